#pragma once

#include "wacrisk/network_model.hpp"
#include "wacrisk/risk_engine.hpp"
#include "wacrisk/spectral_function.hpp"
#include "wacrisk/steady_state_stats.hpp"

#include <optional>
#include <vector>

namespace wacrisk {

/// Search box over physical per-mode gains: x is mu, y is kappa.
struct SynthesisOptions {
    GainBox gain_box{-1.0, 1.0, 0.0, 5.0, 0.05, 0.05};
    double polish_tol = 1e-6;
    double quad_tol = 1e-8;
    unsigned threads = 0;
};

struct ModeOptimum {
    std::size_t mode = 0;  ///< 1-based
    double lambda = 0.0;
    double mu = 0.0;
    double kappa = 0.0;
    double weight = 0.0;  ///< frak_f at (mu, kappa)
    double grid_mu = 0.0;
    double grid_kappa = 0.0;
    double grid_weight = 0.0;
};

struct SynthesisResult {
    std::vector<ModeOptimum> modes;  ///< modes 2..n
    ModalSystem system;              ///< optimized gains, mode 1 left at zero
    Eigen::MatrixXd M;
    Eigen::MatrixXd K;
    PairStats stats;
    std::optional<RiskProfile> risk;
};

/// Per-mode minimization of the stationary weight over stable gains.  tau = 0
/// uses the delay-free weight.  The risk profile is filled when `set` is given.
SynthesisResult synthesize(const LaplacianSpectrum& spectrum, double d, double tau,
                           const NoiseParams& noise, double J, const SynthesisOptions& opts = {},
                           const SystemicSet* set = nullptr);

struct SigmaStar {
    double sigma_star = 0.0;
    std::size_t pair_i = 0, pair_j = 0;  ///< pair attaining the minimum
    Eigen::VectorXd f_min;               ///< per-mode minimum of f, index 0 unused
    Eigen::VectorXd mu_at_min;
    Eigen::VectorXd kappa_at_min;
};

/// Delay-induced floor on every pair deviation under noiseless measurements.
/// `gain_box` is over physical (mu, kappa).
SigmaStar sigma_star(const LaplacianSpectrum& spectrum, double d, double tau, double eta, double J,
                     const SynthesisOptions& opts = {});

enum class LimitRegime { Reducible, Floored, Infinite };

std::string to_string(LimitRegime r);

struct RiskFloor {
    LimitRegime regime = LimitRegime::Reducible;
    double floor = 0.0;
};

RiskFloor risk_floor(double sigma_star, const SystemicSet& set);

struct ResistanceOptions {
    int rays = 720;
    double march_step = 0.01;  ///< in the normalized (k1, k2) plane
    double march_limit = 20.0;
    double tol = 1e-6;
};

struct ResistanceBounds {
    double xi_k_lower = 0.0;
    double xi_m_lower = 0.0;
    double kappa_max = 0.0;
    double mu_max = 0.0;
    std::vector<std::pair<double, double>> boundary;  ///< (mu, kappa) points found
};

/// Traces the stable consensus-gain region along rays from the origin and
/// turns the extreme boundary gains into effective-resistance lower bounds.
ResistanceBounds resistance_bounds(const LaplacianSpectrum& spectrum, double d, double tau,
                                   const ResistanceOptions& opts = {});

struct TradeoffRow {
    double mu = 0.0;
    double kappa = 0.0;
    bool stable = false;
    double min_risk = 0.0;
    double xi_k = 0.0;
    double xi_m = 0.0;
    double product = 0.0;
};

struct TradeoffScan {
    std::vector<TradeoffRow> rows;
    double omega_hat = 0.0;
    std::size_t stable_rows = 0;
};

/// Scans consensus gains M = mu L, K = kappa L on `grid` (x = mu, y = kappa)
/// and reports the smallest observed min-risk * sqrt(Xi_K + Xi_M).
TradeoffScan tradeoff_scan(const LaplacianSpectrum& spectrum, double d, double tau,
                           const NoiseParams& noise, double J, const SystemicSet& set,
                           const GainBox& grid, unsigned threads = 0, double quad_tol = 1e-8);

struct LimitReport {
    double sigma_star = 0.0;
    RiskFloor floor;
    ResistanceBounds resistance;
    std::optional<double> omega_hat;
};

}  // namespace wacrisk
