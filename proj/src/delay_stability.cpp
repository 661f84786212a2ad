#include "wacrisk/delay_stability.hpp"

#include "wacrisk/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace wacrisk {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxSwitches = 1'000'000;

void validate(const ScaledParams& sp) {
    if (!std::isfinite(sp.s1) || !std::isfinite(sp.s2) || !std::isfinite(sp.k1) ||
        !std::isfinite(sp.k2)) {
        throw ValidationError("scaled parameters must be finite");
    }
    if (sp.s1 < 0.0 || sp.s2 < 0.0) throw ValidationError("s1 and s2 must be nonnegative");
}

double delta_of(const ScaledParams& sp) { return sp.k2 * sp.k2 + 2.0 * sp.s2 - sp.s1 * sp.s1; }

bool has_two_crossings(const ScaledParams& sp) {
    const double r2 = sp.s2 * sp.s2 - sp.k1 * sp.k1;
    return r2 > 0.0 && delta_of(sp) > 2.0 * std::sqrt(r2);
}

double crossing_angle(const ScaledParams& sp, double g) {
    const double g2 = g * g;
    const double den = sp.k2 * sp.k2 * g2 + sp.k1 * sp.k1;
    const double c = -(sp.s1 * sp.k2 * g2 + sp.k1 * (sp.s2 - g2)) / den;
    const double s = (sp.s1 * sp.k1 * g - sp.k2 * g * (sp.s2 - g2)) / den;
    double phi = std::atan2(s, c);
    if (phi < 0.0) phi += kTwoPi;
    if (phi >= kTwoPi) phi -= kTwoPi;
    return phi;
}

// Crossings with gamma >= 0, largest first.  A zero-frequency entry only shows
// up on the s2 = |k1| edge.
std::vector<Crossing> raw_crossings(const ScaledParams& sp) {
    const double D = delta_of(sp);
    const double r2 = sp.s2 * sp.s2 - sp.k1 * sp.k1;
    std::vector<Crossing> out;
    if (r2 > 0.0) {
        if (!(D > 2.0 * std::sqrt(r2))) return out;
        const double root = std::sqrt(std::max(0.0, D * D - 4.0 * r2));
        for (double g2 : {0.5 * (D + root), 0.5 * (D - root)}) {
            const double g = std::sqrt(std::max(0.0, g2));
            out.push_back({g, crossing_angle(sp, g)});
        }
        return out;
    }
    const double root = std::sqrt(std::max(0.0, D * D - 4.0 * r2));
    const double g = std::sqrt(std::max(0.0, 0.5 * (D + root)));
    if (g > 0.0 || sp.k1 != 0.0) out.push_back({g, crossing_angle(sp, g)});
    return out;
}

// Number of l >= 0 with phi + 2 l pi < gamma.
long crossings_before(const Crossing& c) {
    if (!(c.phi < c.gamma)) return 0;
    return static_cast<long>(std::floor((c.gamma - c.phi) / kTwoPi)) + 1;
}

// Distance from gamma to the nearest phi + 2 l pi, l >= 0.
double switch_distance(const Crossing& c) {
    const double t = (c.gamma - c.phi) / kTwoPi;
    if (t < 0.0) return c.phi - c.gamma;
    const double lo = std::floor(t);
    return kTwoPi * std::min(t - lo, lo + 1.0 - t);
}

int compute_l_star(const Crossing& plus, const Crossing& minus) {
    const double U = (minus.gamma * plus.phi + (kTwoPi - minus.phi) * plus.gamma) /
                     (kTwoPi * (plus.gamma - minus.gamma));
    if (!std::isfinite(U) || U > kMaxSwitches) return kMaxSwitches;
    return std::max(0, static_cast<int>(std::ceil(U)) - 1);
}

void finish_band(StabilityVerdict& v, double band) {
    if (std::abs(v.margin) < band) {
        v.boundary = true;
        v.stable = false;
    }
}

}  // namespace

ScaledParams scale(double d, double lambda, double mu, double kappa, double tau) {
    return {d * tau, lambda * tau * tau, mu * tau * tau, kappa * tau};
}

bool tau0_stable(double d, double lambda, double mu, double kappa) {
    return kappa + d > 0.0 && lambda + mu > 0.0;
}

std::string to_string(Region r) {
    switch (r) {
        case Region::W0: return "W0";
        case Region::W1: return "W1";
        case Region::W2: return "W2";
        case Region::W3: return "W3";
        case Region::DelayStabilized: return "delay_stabilized";
        case Region::Undelayed: return "undelayed";
        case Region::None: return "none";
    }
    return "none";
}

std::vector<Crossing> gamma_phi(const ScaledParams& sp) {
    validate(sp);
    std::vector<Crossing> out;
    for (const auto& c : raw_crossings(sp)) {
        if (c.gamma > 0.0) out.push_back(c);
    }
    if (out.empty()) throw InfeasibleError("no imaginary-axis crossing for this tuple");
    return out;
}

SwitchStructure switch_structure(const ScaledParams& sp) {
    const auto cs = gamma_phi(sp);
    SwitchStructure ss;
    ss.gamma_plus = cs[0].gamma;
    ss.phi_plus = cs[0].phi;
    ss.tau_windows.emplace_back(0.0, ss.phi_plus / ss.gamma_plus);
    if (cs.size() < 2) return ss;

    ss.two_crossings = true;
    ss.gamma_minus = cs[1].gamma;
    ss.phi_minus = cs[1].phi;
    ss.l_star = compute_l_star(cs[0], cs[1]);
    for (int l = 1; l <= ss.l_star; ++l) {
        const double lo = (ss.phi_minus + kTwoPi * (l - 1)) / ss.gamma_minus;
        const double hi = (ss.phi_plus + kTwoPi * l) / ss.gamma_plus;
        if (!(lo < hi)) break;
        ss.tau_windows.emplace_back(lo, hi);
    }
    return ss;
}

StabilityVerdict membership_w(const ScaledParams& sp, const StabilityOptions& opts) {
    validate(sp);
    const double band = opts.boundary_band;
    StabilityVerdict v;

    if (sp.s2 == 0.0 && sp.k1 == 0.0) {
        if (std::abs(sp.k2) < sp.s1) {
            v.stable = true;
            v.region = Region::W0;
            v.margin = sp.s1 + sp.k2;
        } else if (sp.k2 > sp.s1) {
            const double w = std::sqrt(sp.k2 * sp.k2 - sp.s1 * sp.s1);
            const double limit = std::atan2(w, -sp.s1);  // arccot(-s1/w) on (0, pi)
            v.margin = limit - w;
            v.critical_delay_ratio = limit / w;
            v.stable = v.margin > 0.0;
            v.region = v.stable ? Region::W0 : Region::None;
        } else {
            v.margin = sp.s1 + sp.k2;
        }
        finish_band(v, band);
        return v;
    }

    const double a = sp.k2 + sp.s1;
    const double b = sp.k1 + sp.s2;
    const auto cs = raw_crossings(sp);
    const bool two = has_two_crossings(sp);
    if (two || (!cs.empty() && cs[0].gamma > 0.0)) {
        v.switches = switch_structure(sp);
        if (!two) v.critical_delay_ratio = v.switches->phi_plus / v.switches->gamma_plus;
    }

    if (!(a > 0.0 && b > 0.0)) {
        v.margin = std::min(a, b);
        if (opts.table_only || !(b > 0.0) || !two) {
            finish_band(v, band);
            return v;
        }
        // Unstable without delay with one real-axis pair in the right half
        // plane; the delay can still push that pair back across.
        const long np = crossings_before(cs[0]);
        const long nm = crossings_before(cs[1]);
        const double slack = std::min({switch_distance(cs[0]), switch_distance(cs[1]), -a, b});
        v.stable = (nm == np + 1);
        v.region = v.stable ? Region::DelayStabilized : Region::None;
        v.margin = v.stable ? slack : -slack;
        finish_band(v, band);
        return v;
    }

    const double tau0_margin = std::min(a, b);
    const double r2 = sp.s2 * sp.s2 - sp.k1 * sp.k1;

    if (r2 > 0.0 && !two) {
        v.stable = true;
        v.region = Region::W1;
        v.margin = tau0_margin;
        finish_band(v, band);
        return v;
    }

    if (!two) {
        // s2^2 <= k1^2: a single crossing.
        if (cs.empty() || cs[0].gamma == 0.0) {
            v.stable = true;
            v.region = Region::W2;
            v.margin = tau0_margin;
        } else {
            v.margin = std::min(cs[0].phi - cs[0].gamma, tau0_margin);
            v.stable = cs[0].gamma < cs[0].phi;
            v.region = v.stable ? Region::W2 : Region::None;
            if (!v.stable) v.margin = cs[0].phi - cs[0].gamma;
        }
        finish_band(v, band);
        return v;
    }

    const auto& ss = *v.switches;
    double best = ss.phi_plus - ss.gamma_plus;
    for (int l = 1; l <= ss.l_star && best <= 0.0; ++l) {
        const double lower = ss.gamma_minus - (ss.phi_minus + kTwoPi * (l - 1));
        const double upper = ss.phi_plus + kTwoPi * l - ss.gamma_plus;
        best = std::max(best, std::min(lower, upper));
    }
    v.stable = best > 0.0;
    v.region = v.stable ? Region::W3 : Region::None;
    v.margin = v.stable ? std::min(best, tau0_margin) : best;
    finish_band(v, band);
    return v;
}

double NetworkVerdict::consensus_value(const Eigen::VectorXd& theta0,
                                       const Eigen::VectorXd& omega0) const {
    if (!consensus_preserved) {
        throw InfeasibleError("consensus value is defined only when mu_1 = kappa_1 = 0");
    }
    return rho_theta_weight * theta0.sum() + rho_omega_weight * omega0.sum();
}

NetworkVerdict network_stable(const ModalSystem& sys, double d, double tau,
                              const StabilityOptions& opts) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be nonnegative");
    if (!(d > 0.0)) throw ValidationError("damping ratio must be positive");
    const std::size_t n = sys.size();
    NetworkVerdict out;
    out.stable = true;
    for (std::size_t l = 0; l < n; ++l) {
        const auto li = static_cast<Eigen::Index>(l);
        ModeVerdict mv;
        mv.mode = l + 1;
        mv.lambda = sys.lambda(li);
        mv.mu = sys.mu(li);
        mv.kappa = sys.kappa(li);
        mv.scaled = scale(d, mv.lambda, mv.mu, mv.kappa, tau);
        if (tau > 0.0) {
            mv.verdict = membership_w(mv.scaled, opts);
        } else {
            auto& v = mv.verdict;
            v.region = Region::Undelayed;
            if (mv.lambda == 0.0 && mv.mu == 0.0) {
                v.margin = mv.kappa + d;
            } else {
                v.margin = std::min(mv.kappa + d, mv.lambda + mv.mu);
            }
            v.stable = v.margin > 0.0;
            if (std::abs(v.margin) < opts.boundary_band) {
                v.boundary = true;
                v.stable = false;
            }
            if (!v.stable) v.region = Region::None;
        }
        out.stable = out.stable && mv.verdict.stable;
        out.modes.push_back(mv);
    }
    const double gain_scale = std::max({1.0, sys.mu.cwiseAbs().maxCoeff(),
                                        sys.kappa.cwiseAbs().maxCoeff()});
    if (n > 0 && std::abs(sys.mu(0)) <= 1e-12 * gain_scale &&
        std::abs(sys.kappa(0)) <= 1e-12 * gain_scale) {
        out.consensus_preserved = true;
        out.rho_theta_weight = 1.0 / static_cast<double>(n);
        out.rho_omega_weight = 1.0 / (d * static_cast<double>(n));
    }
    return out;
}

NetworkVerdict network_stable(const LaplacianSpectrum& spectrum, const GainSpec& gains, double d,
                              double tau, const StabilityOptions& opts) {
    return network_stable(resolve_gains(spectrum, gains), d, tau, opts);
}

std::complex<double> characteristic(const ScaledParams& sp, std::complex<double> eta) {
    const std::complex<double> e = std::exp(-eta);
    return eta * eta + sp.s1 * eta + sp.k2 * eta * e + sp.s2 + sp.k1 * e;
}

namespace {

std::complex<double> characteristic_derivative(const ScaledParams& sp, std::complex<double> eta) {
    const std::complex<double> e = std::exp(-eta);
    return 2.0 * eta + sp.s1 + sp.k2 * e - sp.k2 * eta * e - sp.k1 * e;
}

}  // namespace

std::complex<double> rightmost_root(const ScaledParams& sp, int resolution) {
    validate(sp);
    if (resolution < 32) throw ValidationError("rightmost_root needs resolution >= 32");
    const int N = resolution;
    const int m = N + 1;

    // Chebyshev points on [-1, 0]; node 0 is t = 0, node N is t = -1.
    Eigen::VectorXd x(m), c(m);
    for (int j = 0; j < m; ++j) {
        x(j) = std::cos(std::numbers::pi * j / N);
        c(j) = ((j == 0 || j == N) ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0);
    }
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (i != j) D(i, j) = c(i) / c(j) / (x(i) - x(j));
        }
        D(i, i) = -D.row(i).sum();
    }
    D *= 2.0;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    A(0, 1) = 1.0;
    A(1, 0) = -sp.s2;
    A(1, 1) = -sp.s1;
    A(1, 2 * N) = -sp.k1;
    A(1, 2 * N + 1) = -sp.k2;
    for (int i = 1; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            A(2 * i, 2 * j) = D(i, j);
            A(2 * i + 1, 2 * j + 1) = D(i, j);
        }
    }

    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) throw ConvergenceError("collocation eigensolver failed");
    const Eigen::VectorXcd ev = es.eigenvalues();

    const double radius = std::max(10.0, N / 4.0);
    bool found = false;
    std::complex<double> best;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        std::complex<double> z = ev(i);
        if (std::abs(z) > radius || z.imag() < -1e-12) continue;
        for (int it = 0; it < 100; ++it) {
            const std::complex<double> dc = characteristic_derivative(sp, z);
            if (std::abs(dc) == 0.0) break;
            const std::complex<double> dz = characteristic(sp, z) / dc;
            z -= dz;
            if (std::abs(dz) <= 1e-14 * (1.0 + std::abs(z))) break;
        }
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) continue;
        if (std::abs(characteristic(sp, z)) > 1e-8 * (1.0 + std::norm(z))) continue;
        const bool better = !found || z.real() > best.real() + 1e-12 ||
                            (z.real() > best.real() - 1e-12 && z.imag() > best.imag());
        if (better) {
            best = z;
            found = true;
        }
    }
    if (!found) throw ConvergenceError("Newton refinement did not converge for any candidate");
    if (std::abs(best.imag()) < 1e-12) best.imag(0.0);
    return {best.real(), std::abs(best.imag())};
}

}  // namespace wacrisk
