#include "wacrisk/spectral_function.hpp"

#include "wacrisk/errors.hpp"
#include "wacrisk/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace wacrisk {

namespace {

// |c(ir)|^2 evaluated from the real and imaginary parts, which avoids the
// cancellation the expanded form suffers near a resonance.
double denominator(double r, const ScaledParams& sp) {
    const double c = std::cos(r), s = std::sin(r);
    const double re = sp.s2 - r * r + sp.k1 * c + sp.k2 * r * s;
    const double im = sp.s1 * r + sp.k2 * r * c - sp.k1 * s;
    return re * re + im * im;
}

double golden_min(const ScaledParams& sp, double a, double b, double& fmin) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = denominator(x1, sp), f2 = denominator(x2, sp);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * (1.0 + std::abs(a)); ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = denominator(x1, sp);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = denominator(x2, sp);
        }
    }
    const double x = 0.5 * (a + b);
    fmin = denominator(x, sp);
    return x;
}

struct Resonance {
    double r;
    double den;
    double width;
};

std::vector<Resonance> find_resonances(const ScaledParams& sp, double r_max) {
    const double h = std::min(0.01, r_max / 2000.0);
    const auto steps = static_cast<std::size_t>(std::ceil(r_max / h));
    std::vector<double> vals(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) vals[i] = denominator(h * static_cast<double>(i), sp);

    std::vector<Resonance> out;
    for (std::size_t i = 0; i <= steps; ++i) {
        const bool left_ok = (i == 0) || vals[i] <= vals[i - 1];
        const bool right_ok = (i == steps) || vals[i] <= vals[i + 1];
        if (!left_ok || !right_ok) continue;
        const double a = (i == 0) ? 0.0 : h * static_cast<double>(i - 1);
        const double b = h * static_cast<double>(std::min(i + 1, steps));
        double dmin = 0.0;
        const double r0 = golden_min(sp, a, b, dmin);
        const double e = std::max(1e-6, 1e-4 * r0);
        const double curv = (denominator(r0 + e, sp) - 2.0 * dmin + denominator(std::abs(r0 - e), sp)) /
                            (e * e);
        const double width = curv > 0.0 ? std::sqrt(2.0 * std::max(dmin, 0.0) / curv) : h;
        out.push_back({r0, dmin, width});
    }
    return out;
}

}  // namespace

double f_denominator(double r, const ScaledParams& sp) {
    const double r2 = r * r;
    return 2.0 * ((sp.s1 * sp.k2 - sp.k1) * r2 + sp.s2 * sp.k1) * std::cos(r) -
           2.0 * r * (sp.k2 * r2 + sp.s1 * sp.k1 - sp.k2 * sp.s2) * std::sin(r) + r2 * r2 +
           (sp.s1 * sp.s1 + sp.k2 * sp.k2 - 2.0 * sp.s2) * r2 + sp.s2 * sp.s2 + sp.k1 * sp.k1;
}

double f_integrand(double r, const ScaledParams& sp) {
    const double den = denominator(r, sp);
    if (!(den > 0.0)) throw InfeasibleError("spectral integrand denominator is not positive");
    return 1.0 / den;
}

double f_lower_bound(const ScaledParams& sp) {
    const double a3 = 2.0 * std::abs(sp.k2);
    const double a2 = 2.0 * std::abs(sp.s1 * sp.k2 - sp.k1) +
                      std::abs(sp.s1 * sp.s1 + sp.k2 * sp.k2 - 2.0 * sp.s2);
    const double a1 = 2.0 * std::abs(sp.s1 * sp.k1 - sp.s2 * sp.k2);
    const double a0 = (sp.s2 + std::abs(sp.k1)) * (sp.s2 + std::abs(sp.k1));
    const double b1 = 1.0 + a1 + a2 + a3;
    const double b2 = b1 + a0;
    if (a0 == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 / b1 * std::log1p(b1 / a0) + 2.0 / (3.0 * b2);
}

SpectralEvaluation f_quadrature(const ScaledParams& sp, double tol) {
    if (!(tol > 0.0) || !(tol < 1.0)) throw ValidationError("tol must lie in (0, 1)");
    const StabilityVerdict verdict = membership_w(sp);
    if (!verdict.stable) {
        throw InfeasibleError("spectral function requested for a tuple outside the stability region");
    }
    SpectralEvaluation out;
    if (sp.s2 == 0.0 && sp.k1 == 0.0) {
        // c(0) = 0: the consensus direction carries no stationary variance.
        out.value = std::numeric_limits<double>::infinity();
        out.diverging = true;
        return out;
    }

    const double peak = 3.0 * std::sqrt(sp.s2 + std::abs(sp.k1)) + sp.k2 * sp.k2 + sp.s1 * sp.s1;
    const auto resonances = find_resonances(sp, peak + 10.0);
    std::vector<double> breaks;
    double scale = sp.s2 * sp.s2 + sp.k1 * sp.k1;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& res : resonances) {
        const double r4 = res.r * res.r * res.r * res.r;
        const double local = std::max(scale, r4);
        worst = std::min(worst, res.den / local);
        for (double m : {0.0, -1.0, 1.0, -3.0, 3.0, -10.0, 10.0}) {
            const double p = res.r + m * res.width;
            if (p > 0.0) breaks.push_back(p);
        }
    }
    if (!(worst > 1e-10)) {
        out.value = std::numeric_limits<double>::infinity();
        out.diverging = true;
        return out;
    }

    auto g = [&sp](double r) { return 1.0 / denominator(r, sp); };

    // Rough pass over the resonant range to calibrate the absolute target.
    const double lb = f_lower_bound(sp);
    const double r_probe = std::max(10.0, peak);
    const auto rough = integrate_gk15(g, 0.0, r_probe, 1e-3 * lb, breaks, std::numbers::pi / 2, 2000);
    const double target = tol * std::max(lb, rough.value);

    const double R = std::max({10.0, std::cbrt(4.0 / (3.0 * target)), peak});
    const auto q = integrate_gk15(g, 0.0, R, 0.25 * target, breaks, std::numbers::pi / 2);
    if (!q.converged) {
        throw ConvergenceError("spectral quadrature did not reach the requested tolerance");
    }
    const double tail = 1.0 / (3.0 * R * R * R);
    const double tail_dev =
        std::abs(sp.k2) / (2.0 * R * R * R * R) +
        (std::abs(sp.s1 * sp.s1 + sp.k2 * sp.k2 - 2.0 * sp.s2) + 2.0 * std::abs(sp.s1 * sp.k2 - sp.k1)) /
            (5.0 * std::pow(R, 5));
    out.value = 2.0 * (q.value + tail);
    out.abs_error_estimate = 2.0 * (q.abs_error + tail_dev);
    out.truncation_point = R;
    return out;
}

std::size_t GainBox::nx() const {
    if (x_step <= 0.0 || x_hi <= x_lo) return 1;
    return static_cast<std::size_t>(std::floor((x_hi - x_lo) / x_step + 1e-9)) + 1;
}

std::size_t GainBox::ny() const {
    if (y_step <= 0.0 || y_hi <= y_lo) return 1;
    return static_cast<std::size_t>(std::floor((y_hi - y_lo) / y_step + 1e-9)) + 1;
}

double GainBox::x(std::size_t i) const { return x_lo + static_cast<double>(i) * x_step; }
double GainBox::y(std::size_t j) const { return y_lo + static_cast<double>(j) * y_step; }

BoxMinimum minimize_over_box(const std::function<std::optional<double>(double, double)>& objective,
                             const GainBox& box, double polish_tol) {
    if (!(box.x_hi >= box.x_lo) || !(box.y_hi >= box.y_lo)) {
        throw ValidationError("search box bounds are inverted");
    }
    BoxMinimum best;
    bool any = false;
    for (std::size_t i = 0; i < box.nx(); ++i) {
        for (std::size_t j = 0; j < box.ny(); ++j) {
            const double x = box.x(i), y = box.y(j);
            ++best.probes;
            const auto v = objective(x, y);
            if (!v) continue;
            ++best.feasible_nodes;
            if (!any || *v < best.grid_value) {
                best.grid_x = x;
                best.grid_y = y;
                best.grid_value = *v;
                any = true;
            }
        }
    }
    if (!any) throw InfeasibleError("no feasible point in the search box");

    double x = best.grid_x, y = best.grid_y, fx = best.grid_value;
    double hx = box.x_step > 0.0 ? 0.5 * box.x_step : 0.0;
    double hy = box.y_step > 0.0 ? 0.5 * box.y_step : 0.0;
    const double hx_min = hx * polish_tol, hy_min = hy * polish_tol;
    while (hx > hx_min || hy > hy_min) {
        bool moved = false;
        const double cand[4][2] = {{x - hx, y}, {x + hx, y}, {x, y - hy}, {x, y + hy}};
        for (const auto& c : cand) {
            if ((c[0] == x && c[1] == y) || c[0] < box.x_lo || c[0] > box.x_hi || c[1] < box.y_lo ||
                c[1] > box.y_hi) {
                continue;
            }
            ++best.probes;
            const auto v = objective(c[0], c[1]);
            if (v && *v < fx) {
                x = c[0];
                y = c[1];
                fx = *v;
                moved = true;
                break;
            }
        }
        if (!moved) {
            hx *= 0.5;
            hy *= 0.5;
        }
    }
    best.x = x;
    best.y = y;
    best.value = fx;
    return best;
}

SpectralMinimum f_min_over_gains(double s1, double s2, const GainBox& k_box, double tol) {
    auto objective = [&](double k1, double k2) -> std::optional<double> {
        const ScaledParams sp{s1, s2, k1, k2};
        if (!membership_w(sp).stable) return std::nullopt;
        const auto e = f_quadrature(sp, tol);
        if (e.diverging) return std::nullopt;
        return e.value;
    };
    const BoxMinimum m = minimize_over_box(objective, k_box);
    return {m.x, m.y, m.value, m.grid_x, m.grid_y, m.grid_value};
}

}  // namespace wacrisk
