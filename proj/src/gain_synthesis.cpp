#include "wacrisk/gain_synthesis.hpp"

#include "wacrisk/errors.hpp"
#include "wacrisk/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace wacrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<double> mode_weight(double lambda, double mu, double kappa, double d, double tau,
                                  const NoiseParams& noise, double J, double quad_tol) {
    const double intensity =
        noise.eta * noise.eta / (J * J) + noise.eta_meas * noise.eta_meas * (mu * mu + kappa * kappa);
    if (tau == 0.0) {
        const double a = d + kappa, b = lambda + mu;
        if (!(a > 0.0) || !(b > 0.0)) return std::nullopt;
        return 2.0 * std::numbers::pi * intensity / (2.0 * a * b);
    }
    const ScaledParams sp = scale(d, lambda, mu, kappa, tau);
    if (!membership_w(sp).stable) return std::nullopt;
    if (intensity == 0.0) return 0.0;
    const SpectralEvaluation e = f_quadrature(sp, quad_tol);
    if (e.diverging) return std::nullopt;
    return tau * tau * tau * intensity * e.value;
}

void validate_inputs(double d, double tau, double J) {
    if (!(d > 0.0)) throw ValidationError("damping ratio must be positive");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be nonnegative");
    if (!(J > 0.0)) throw ValidationError("inertia must be positive");
}

}  // namespace

SynthesisResult synthesize(const LaplacianSpectrum& spectrum, double d, double tau,
                           const NoiseParams& noise, double J, const SynthesisOptions& opts,
                           const SystemicSet* set) {
    validate_inputs(d, tau, J);
    if (!(noise.eta >= 0.0) || !(noise.eta_meas >= 0.0)) {
        throw ValidationError("noise intensities must be nonnegative");
    }
    const std::size_t n = spectrum.size();
    std::vector<ModeOptimum> optima(n - 1);

    parallel_for(n - 1, opts.threads, [&](std::size_t k) {
        const auto l = static_cast<Eigen::Index>(k + 1);
        const double lambda = spectrum.eigenvalues(l);
        auto objective = [&](double mu, double kappa) {
            return mode_weight(lambda, mu, kappa, d, tau, noise, J, opts.quad_tol);
        };
        BoxMinimum m;
        try {
            m = minimize_over_box(objective, opts.gain_box, opts.polish_tol);
        } catch (const InfeasibleError&) {
            std::ostringstream msg;
            msg << "no stable gain in the search box for mode " << (l + 1);
            throw InfeasibleError(msg.str());
        }
        optima[k] = {static_cast<std::size_t>(l + 1), lambda, m.x, m.y, m.value,
                     m.grid_x,  m.grid_y, m.grid_value};
    });

    SynthesisResult out;
    out.modes = optima;
    out.system.lambda = spectrum.eigenvalues;
    out.system.basis = spectrum.eigenvectors;
    out.system.mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    out.system.kappa = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto l = static_cast<Eigen::Index>(k + 1);
        out.system.mu(l) = optima[k].mu;
        out.system.kappa(l) = optima[k].kappa;
        w(l) = optima[k].weight;
    }
    out.M = out.system.phase_gain_matrix();
    out.K = out.system.frequency_gain_matrix();
    out.stats = assemble_pair_stats(out.system.basis, w);
    if (set) out.risk = risk_profile(out.stats, *set);
    return out;
}

SigmaStar sigma_star(const LaplacianSpectrum& spectrum, double d, double tau, double eta, double J,
                     const SynthesisOptions& opts) {
    validate_inputs(d, tau, J);
    if (!(eta >= 0.0)) throw ValidationError("eta must be nonnegative");
    const std::size_t n = spectrum.size();
    const auto N = static_cast<Eigen::Index>(n);
    SigmaStar out;
    out.f_min = Eigen::VectorXd::Zero(N);
    out.mu_at_min = Eigen::VectorXd::Zero(N);
    out.kappa_at_min = Eigen::VectorXd::Zero(N);
    out.pair_i = 1;
    out.pair_j = 2;
    if (tau == 0.0 || eta == 0.0) return out;

    const GainBox& g = opts.gain_box;
    const double t2 = tau * tau;
    const GainBox kbox{g.x_lo * t2, g.x_hi * t2, g.y_lo * tau, g.y_hi * tau, g.x_step * t2,
                       g.y_step * tau};
    parallel_for(n - 1, opts.threads, [&](std::size_t k) {
        const auto l = static_cast<Eigen::Index>(k + 1);
        const SpectralMinimum m =
            f_min_over_gains(d * tau, spectrum.eigenvalues(l) * t2, kbox, opts.quad_tol);
        out.f_min(l) = m.value;
        out.mu_at_min(l) = m.k1 / t2;
        out.kappa_at_min(l) = m.k2 / tau;
    });

    const double pref = std::pow(tau, 1.5) * eta / (J * std::sqrt(2.0 * std::numbers::pi));
    const Eigen::MatrixXd BQ = complete_incidence(n) * spectrum.eigenvectors;
    const auto pairs = enumerate_pairs(n);
    double best = kInf;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        double s = 0.0;
        for (Eigen::Index l = 1; l < N; ++l) {
            const double dq = BQ(static_cast<Eigen::Index>(p), l);
            s += dq * dq * out.f_min(l);
        }
        if (s < best) {
            best = s;
            out.pair_i = pairs[p].first;
            out.pair_j = pairs[p].second;
        }
    }
    out.sigma_star = pref * std::sqrt(best);
    return out;
}

std::string to_string(LimitRegime r) {
    switch (r) {
        case LimitRegime::Reducible: return "reducible";
        case LimitRegime::Floored: return "floored";
        case LimitRegime::Infinite: return "infinite";
    }
    return "reducible";
}

RiskFloor risk_floor(double sigma_star, const SystemicSet& set) {
    if (!(sigma_star >= 0.0)) throw ValidationError("sigma_star must be nonnegative");
    RiskFloor out;
    out.floor = risk_value(sigma_star, set);
    if (sigma_star <= set.safe_sigma()) {
        out.regime = LimitRegime::Reducible;
    } else if (sigma_star >= set.critical_sigma()) {
        out.regime = LimitRegime::Infinite;
    } else {
        out.regime = LimitRegime::Floored;
    }
    return out;
}

ResistanceBounds resistance_bounds(const LaplacianSpectrum& spectrum, double d, double tau,
                                   const ResistanceOptions& opts) {
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    if (!(d > 0.0)) throw ValidationError("damping ratio must be positive");
    if (opts.rays < 2) throw ValidationError("at least two rays are needed");
    const double lam = spectrum.norm();
    const double s1 = d * tau, s2 = lam * tau * tau;
    auto stable_at = [&](double k1, double k2) { return membership_w({s1, s2, k1, k2}).stable; };
    if (!stable_at(0.0, 0.0)) throw InfeasibleError("zero consensus gains are already unstable");

    ResistanceBounds out;
    for (int i = 0; i < opts.rays; ++i) {
        const double theta = 0.5 * std::numbers::pi * i / (opts.rays - 1);
        const double cx = std::cos(theta), cy = std::sin(theta);
        bool prev = true;
        double r_prev = 0.0;
        for (double r = opts.march_step; r <= opts.march_limit + 1e-12; r += opts.march_step) {
            const bool cur = stable_at(r * cx, r * cy);
            if (cur != prev) {
                double lo = r_prev, hi = r;
                while (hi - lo > opts.tol) {
                    const double mid = 0.5 * (lo + hi);
                    if (stable_at(mid * cx, mid * cy) == prev) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                const double rb = 0.5 * (lo + hi);
                out.boundary.emplace_back(rb * cx / (lam * tau * tau), rb * cy / (lam * tau));
            }
            prev = cur;
            r_prev = r;
        }
    }
    if (out.boundary.empty()) throw InfeasibleError("no stability boundary found for consensus gains");
    for (const auto& [mu, kappa] : out.boundary) {
        out.mu_max = std::max(out.mu_max, mu);
        out.kappa_max = std::max(out.kappa_max, kappa);
    }
    const double nm1 = static_cast<double>(spectrum.size() - 1);
    out.xi_k_lower = out.kappa_max > 0.0 ? nm1 / (out.kappa_max * lam) : kInf;
    out.xi_m_lower = out.mu_max > 0.0 ? nm1 / (out.mu_max * lam) : kInf;
    return out;
}

TradeoffScan tradeoff_scan(const LaplacianSpectrum& spectrum, double d, double tau,
                           const NoiseParams& noise, double J, const SystemicSet& set,
                           const GainBox& grid, unsigned threads, double quad_tol) {
    validate_inputs(d, tau, J);
    if (!(noise.eta > 0.0) && !(noise.eta_meas > 0.0)) {
        throw ValidationError("trade-off scan needs nonzero noise");
    }
    if (grid.x_lo < 0.0 || grid.y_lo < 0.0) {
        throw ValidationError("trade-off scan works on nonnegative consensus gains");
    }
    const double xi_l = effective_resistance(spectrum);
    const std::size_t nx = grid.nx(), ny = grid.ny();
    TradeoffScan out;
    out.rows.resize(nx * ny);
    parallel_for(nx * ny, threads, [&](std::size_t idx) {
        TradeoffRow row;
        row.mu = grid.x(idx / ny);
        row.kappa = grid.y(idx % ny);
        row.xi_k = row.kappa > 0.0 ? xi_l / row.kappa : kInf;
        row.xi_m = row.mu > 0.0 ? xi_l / row.mu : kInf;
        try {
            const ModalSystem sys = resolve_gains(spectrum, ConsensusGains{row.mu, row.kappa});
            const PairStats stats = sigma_pairs(sys, d, tau, noise, J, quad_tol);
            row.min_risk = risk_profile(stats, set).min_risk();
            row.stable = true;
        } catch (const InfeasibleError&) {
            row.stable = false;
        }
        if (row.stable) {
            row.product = row.min_risk == 0.0 ? 0.0 : row.min_risk * std::sqrt(row.xi_k + row.xi_m);
        } else {
            row.product = kInf;
        }
        out.rows[idx] = row;
    });

    out.omega_hat = kInf;
    for (const auto& row : out.rows) {
        if (!row.stable) continue;
        ++out.stable_rows;
        out.omega_hat = std::min(out.omega_hat, row.product);
    }
    if (out.stable_rows == 0) throw InfeasibleError("no stable consensus gains on the scan grid");
    return out;
}

}  // namespace wacrisk
