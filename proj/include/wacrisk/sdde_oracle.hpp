#pragma once

#include "wacrisk/delay_stability.hpp"
#include "wacrisk/network_model.hpp"
#include "wacrisk/steady_state_stats.hpp"

#include <cstdint>
#include <vector>

namespace wacrisk {

struct SimConfig {
    double h = 0.005;
    double T = 30.0;
    std::size_t trajectories = 1000;
    double burn_in = 1.0 / 3.0;  ///< fraction of T discarded before sampling
    std::uint64_t seed = 1;
    std::size_t sample_every = 10;
    /// Constant initial history on [-tau, 0]; empty means zero.
    Eigen::VectorXd theta0;
    Eigen::VectorXd omega0;
    unsigned threads = 0;
};

struct PairVariance {
    std::size_t i = 0;
    std::size_t j = 0;
    double variance = 0.0;
    double std_error = 0.0;
};

struct EnsembleStats {
    std::vector<PairVariance> pairs;         ///< row-wise pair order
    Eigen::VectorXd frequency_variance;      ///< per generator
    Eigen::VectorXd frequency_std_error;
    double rho_hat = 0.0;                    ///< ensemble mean of the final phase average
    double rho_std_error = 0.0;
    /// Largest deviation of the ensemble-mean phases from rho_hat over the
    /// sampling window.
    double mean_disagreement = 0.0;
    double h_used = 0.0;
    std::size_t steps = 0;
    std::size_t samples_per_path = 0;
};

/// Semi-implicit Euler-Maruyama ensemble (frequency first, then phase) of the
/// closed loop with 3n independent noise channels.  Throws InfeasibleError when some mode beyond the first is unstable.
EnsembleStats simulate(const ModalSystem& sys, double d, double tau, const NoiseParams& noise,
                       double J, const SimConfig& config);

/// Uniform step that divides tau exactly and is no larger than `h` (nor than tau / 10).
double snap_step(double h, double tau);

/// Deterministic per-trajectory seed.
std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index);

struct ImpulseResponse {
    double h = 0.0;
    std::vector<double> x;  ///< samples at t = k h
    double integral_sq = 0.0;
    double truncated_at = 0.0;
};

/// Unit-delay mode x'' + s1 x' + k2 x'(t-1) + s2 x + k1 x(t-1) = 0 with x(0) = 0,
/// x'(0) = 1 and zero history, integrated by RK4 with Hermite interpolation of
/// the delayed terms.  Stops once the envelope drops below 1e-8; throws
/// InfeasibleError on growth or when T is reached first.
ImpulseResponse impulse_response(const ScaledParams& sp, double h = 0.005, double T = 2000.0);

}  // namespace wacrisk
