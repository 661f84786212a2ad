#include "wacrisk/steady_state_stats.hpp"

#include "wacrisk/errors.hpp"
#include "wacrisk/spectral_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace wacrisk {

namespace {

void validate_noise(const NoiseParams& noise) {
    if (!(noise.eta >= 0.0) || !(noise.eta_meas >= 0.0) || !std::isfinite(noise.eta) ||
        !std::isfinite(noise.eta_meas)) {
        throw ValidationError("noise intensities must be finite and nonnegative");
    }
}

void validate_common(double d, double J) {
    if (!(d > 0.0) || !std::isfinite(d)) throw ValidationError("damping ratio must be positive");
    if (!(J > 0.0) || !std::isfinite(J)) throw ValidationError("inertia must be positive");
}

double noise_intensity(const NoiseParams& noise, double mu, double kappa, double J) {
    return noise.eta * noise.eta / (J * J) +
           noise.eta_meas * noise.eta_meas * (mu * mu + kappa * kappa);
}

}  // namespace

double PairStats::min_sigma() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : pairs) m = std::min(m, p.sigma);
    return m;
}

double PairStats::max_sigma() const {
    double m = 0.0;
    for (const auto& p : pairs) m = std::max(m, p.sigma);
    return m;
}

std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = i + 1; j <= n; ++j) out.emplace_back(i, j);
    }
    return out;
}

Eigen::MatrixXd complete_incidence(std::size_t n) {
    const auto pairs = enumerate_pairs(n);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pairs.size()),
                                              static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        B(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(pairs[k].first - 1)) = 1.0;
        B(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(pairs[k].second - 1)) = -1.0;
    }
    return B;
}

double frak_f(std::size_t l, double lambda, double mu, double kappa, double d, double tau,
              const NoiseParams& noise, double J, double tol) {
    validate_noise(noise);
    validate_common(d, J);
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive");
    if (l == 0) throw ValidationError("mode index is 1-based");
    if (l == 1) return 0.0;
    const double weight = noise_intensity(noise, mu, kappa, J);
    const ScaledParams sp = scale(d, lambda, mu, kappa, tau);
    const StabilityVerdict v = membership_w(sp);
    if (!v.stable) {
        std::ostringstream msg;
        msg << "mode " << l << " is not stable at tau = " << tau;
        throw InfeasibleError(msg.str());
    }
    if (weight == 0.0) return 0.0;
    const SpectralEvaluation e = f_quadrature(sp, tol);
    if (e.diverging) {
        std::ostringstream msg;
        msg << "spectral function diverges for mode " << l << " (tuple on the stability boundary)";
        throw InfeasibleError(msg.str());
    }
    return tau * tau * tau * weight * e.value;
}

PairStats assemble_pair_stats(const Eigen::MatrixXd& basis, const Eigen::VectorXd& mode_weights) {
    const auto n = static_cast<std::size_t>(basis.rows());
    PairStats out;
    out.mode_weights = mode_weights;
    const Eigen::MatrixXd B = complete_incidence(n);
    const Eigen::MatrixXd BQ = B * basis;
    out.covariance = BQ * mode_weights.asDiagonal() * BQ.transpose() / (2.0 * std::numbers::pi);
    const auto pairs = enumerate_pairs(n);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        double s = 0.0;
        for (Eigen::Index l = 1; l < mode_weights.size(); ++l) {
            const double dq = BQ(static_cast<Eigen::Index>(k), l);
            s += dq * dq * mode_weights(l);
        }
        out.pairs.push_back({pairs[k].first, pairs[k].second, std::sqrt(s / (2.0 * std::numbers::pi))});
    }
    return out;
}

PairStats sigma_pairs(const ModalSystem& sys, double d, double tau, const NoiseParams& noise,
                      double J, double tol) {
    if (tau == 0.0) return sigma_pairs_no_delay(sys, d, noise, J);
    const auto n = static_cast<Eigen::Index>(sys.size());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (Eigen::Index l = 1; l < n; ++l) {
        w(l) = frak_f(static_cast<std::size_t>(l + 1), sys.lambda(l), sys.mu(l), sys.kappa(l), d,
                      tau, noise, J, tol);
    }
    return assemble_pair_stats(sys.basis, w);
}

PairStats sigma_pairs_no_delay(const ModalSystem& sys, double d, const NoiseParams& noise,
                               double J) {
    validate_noise(noise);
    validate_common(d, J);
    const auto n = static_cast<Eigen::Index>(sys.size());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (Eigen::Index l = 1; l < n; ++l) {
        const double a = d + sys.kappa(l);
        const double b = sys.lambda(l) + sys.mu(l);
        if (!(a > 0.0) || !(b > 0.0)) {
            std::ostringstream msg;
            msg << "mode " << (l + 1) << " is not stable without delay";
            throw InfeasibleError(msg.str());
        }
        const double var = noise_intensity(noise, sys.mu(l), sys.kappa(l), J) / (2.0 * a * b);
        w(l) = 2.0 * std::numbers::pi * var;
    }
    return assemble_pair_stats(sys.basis, w);
}

PairStats sigma_pairs_no_meas_noise(const ModalSystem& sys, double d, double tau, double eta,
                                    double J, double tol) {
    validate_noise({eta, 0.0});
    validate_common(d, J);
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive");
    const auto n = static_cast<Eigen::Index>(sys.size());
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    for (Eigen::Index l = 1; l < n; ++l) {
        const ScaledParams sp = scale(d, sys.lambda(l), sys.mu(l), sys.kappa(l), tau);
        if (!membership_w(sp).stable) {
            std::ostringstream msg;
            msg << "mode " << (l + 1) << " is not stable at tau = " << tau;
            throw InfeasibleError(msg.str());
        }
        if (eta == 0.0) continue;
        const SpectralEvaluation e = f_quadrature(sp, tol);
        if (e.diverging) throw InfeasibleError("spectral function diverges on the stability boundary");
        f(l) = e.value;
    }

    const double pref = std::pow(tau, 1.5) * eta / (J * std::sqrt(2.0 * std::numbers::pi));
    PairStats out;
    out.mode_weights = std::pow(tau, 3) * (eta * eta / (J * J)) * f;
    const Eigen::MatrixXd BQ = complete_incidence(sys.size()) * sys.basis;
    out.covariance = BQ * out.mode_weights.asDiagonal() * BQ.transpose() / (2.0 * std::numbers::pi);
    const auto pairs = enumerate_pairs(sys.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        double s = 0.0;
        for (Eigen::Index l = 1; l < n; ++l) {
            const double dq = BQ(static_cast<Eigen::Index>(k), l);
            s += dq * dq * f(l);
        }
        out.pairs.push_back({pairs[k].first, pairs[k].second, pref * std::sqrt(s)});
    }
    return out;
}

}  // namespace wacrisk
