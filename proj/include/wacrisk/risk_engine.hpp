#pragma once

#include "wacrisk/steady_state_stats.hpp"

#include <cstddef>
#include <vector>

namespace wacrisk {

/// Root of erf(nu / sqrt 2) = 1 - eps by bisection.
double nu_epsilon(double eps, double tol = 1e-10);

/// Nested unsafe sets U_delta = (zeta (1 + delta) / (c + delta), inf) with
/// acceptance level eps.  nu_eps is computed once at construction.
class SystemicSet {
public:
    SystemicSet(double zeta, double c, double eps);

    double zeta() const { return zeta_; }
    double c() const { return c_; }
    double eps() const { return eps_; }
    double nu() const { return nu_; }

    /// Lower edge of U_delta.
    double threshold(double delta) const;
    /// sigma at or below which the risk is zero: zeta / (c nu).
    double safe_sigma() const { return zeta_ / (c_ * nu_); }
    /// sigma at or above which the risk is infinite: zeta / nu.
    double critical_sigma() const { return zeta_ / nu_; }

private:
    double zeta_;
    double c_;
    double eps_;
    double nu_;
};

/// Piecewise closed form: 0, (sigma nu c - zeta) / (zeta - sigma nu), or +inf.
double risk_value(double sigma, const SystemicSet& set);

/// inf{delta > 0 : P(|y| in U_delta) < eps} for y ~ N(0, sigma^2), found by
/// bisection on delta.  `tol` is relative to max(1, delta).
double risk_from_definition(double sigma, const SystemicSet& set, double tol = 1e-12);

struct RiskEntry {
    std::size_t i = 0;
    std::size_t j = 0;
    double sigma = 0.0;
    double risk = 0.0;
};

struct RiskProfile {
    std::vector<RiskEntry> entries;  ///< row-wise pair order
    Eigen::VectorXd values() const;
    double min_risk() const;
    double max_risk() const;
};

RiskProfile risk_profile(const PairStats& stats, const SystemicSet& set);

}  // namespace wacrisk
