#include "wacrisk/risk_engine.hpp"

#include "wacrisk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wacrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// P(|y| > a) for y ~ N(0, sigma^2).
double two_sided_tail(double a, double sigma) {
    if (sigma == 0.0) return 0.0;
    return std::erfc(a / (sigma * std::sqrt(2.0)));
}

}  // namespace

double nu_epsilon(double eps, double tol) {
    if (!(eps > 0.0) || !(eps < 1.0)) throw ValidationError("eps must lie in (0, 1)");
    if (!(tol > 0.0)) throw ValidationError("tol must be positive");
    const double target = 1.0 - eps;
    double lo = 0.0, hi = 1.0;
    while (std::erf(hi / std::sqrt(2.0)) < target) hi *= 2.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (std::erf(mid / std::sqrt(2.0)) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

SystemicSet::SystemicSet(double zeta, double c, double eps) : zeta_(zeta), c_(c), eps_(eps) {
    if (!(zeta > 0.0) || !std::isfinite(zeta)) throw ValidationError("zeta must be positive");
    if (!(c > 1.0) || !std::isfinite(c)) throw ValidationError("c must exceed 1");
    if (!(eps > 0.0) || !(eps < 1.0)) throw ValidationError("eps must lie in (0, 1)");
    nu_ = nu_epsilon(eps);
}

double SystemicSet::threshold(double delta) const {
    if (!(delta >= 0.0)) throw ValidationError("delta must be nonnegative");
    if (std::isinf(delta)) return zeta_;
    return zeta_ * (1.0 + delta) / (c_ + delta);
}

double risk_value(double sigma, const SystemicSet& set) {
    if (!(sigma >= 0.0)) throw ValidationError("sigma must be nonnegative");
    const double nu = set.nu();
    if (sigma <= set.safe_sigma()) return 0.0;
    if (sigma >= set.critical_sigma()) return kInf;
    return (sigma * nu * set.c() - set.zeta()) / (set.zeta() - sigma * nu);
}

double risk_from_definition(double sigma, const SystemicSet& set, double tol) {
    if (!(sigma >= 0.0)) throw ValidationError("sigma must be nonnegative");
    const double eps = set.eps();
    auto below = [&](double delta) { return two_sided_tail(set.threshold(delta), sigma) < eps; };

    if (!(two_sided_tail(set.zeta(), sigma) < eps)) return kInf;
    if (below(0.0)) return 0.0;

    double lo = 0.0, hi = 1.0;
    while (!below(hi)) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) return kInf;
    }
    while (hi - lo > tol * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (below(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Eigen::VectorXd RiskProfile::values() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(entries.size()));
    for (std::size_t k = 0; k < entries.size(); ++k) v(static_cast<Eigen::Index>(k)) = entries[k].risk;
    return v;
}

double RiskProfile::min_risk() const {
    double m = kInf;
    for (const auto& e : entries) m = std::min(m, e.risk);
    return m;
}

double RiskProfile::max_risk() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.risk);
    return m;
}

RiskProfile risk_profile(const PairStats& stats, const SystemicSet& set) {
    RiskProfile out;
    out.entries.reserve(stats.pairs.size());
    for (const auto& p : stats.pairs) {
        out.entries.push_back({p.i, p.j, p.sigma, risk_value(p.sigma, set)});
    }
    return out;
}

}  // namespace wacrisk
