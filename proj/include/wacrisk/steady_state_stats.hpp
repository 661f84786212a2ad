#pragma once

#include "wacrisk/delay_stability.hpp"
#include "wacrisk/network_model.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace wacrisk {

struct NoiseParams {
    double eta = 0.0;       ///< load-volatility diffusion
    double eta_meas = 0.0;  ///< measurement-noise diffusion
};

struct PairSigma {
    std::size_t i = 0;  ///< 1-based generator indices, i < j
    std::size_t j = 0;
    double sigma = 0.0;
};

struct PairStats {
    std::vector<PairSigma> pairs;  ///< row-wise: (1,2), (1,3), ..., (2,3), ...
    /// Per-mode weights, index 0 is the consensus mode and always 0.  In every
    /// variant sigma_ij^2 = (1/2pi) sum_l (q_il - q_jl)^2 w_l.
    Eigen::VectorXd mode_weights;
    Eigen::MatrixXd covariance;  ///< r x r over the pairs above

    double min_sigma() const;
    double max_sigma() const;
};

/// Row-wise enumeration of the n(n-1)/2 generator pairs, 1-based.
std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(std::size_t n);

/// Complete incidence matrix: one row per pair with +1 at i and -1 at j.
Eigen::MatrixXd complete_incidence(std::size_t n);

/// Stationary weight of mode `l` (1-based).  Zero for l = 1.  Requires tau > 0
/// and a stable mode.
double frak_f(std::size_t l, double lambda, double mu, double kappa, double d, double tau,
              const NoiseParams& noise, double J, double tol = 1e-8);

/// Pair statistics with delay.  tau = 0 is routed to the delay-free formula.
PairStats sigma_pairs(const ModalSystem& sys, double d, double tau, const NoiseParams& noise,
                      double J, double tol = 1e-8);

/// Closed-form pair statistics without delay.
PairStats sigma_pairs_no_delay(const ModalSystem& sys, double d, const NoiseParams& noise,
                               double J);

/// Pair statistics with delay and noiseless measurements.
PairStats sigma_pairs_no_meas_noise(const ModalSystem& sys, double d, double tau, double eta,
                                    double J, double tol = 1e-8);

/// Assembles pair deviations and the covariance from per-mode weights.
PairStats assemble_pair_stats(const Eigen::MatrixXd& basis, const Eigen::VectorXd& mode_weights);

}  // namespace wacrisk
