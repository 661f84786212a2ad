#pragma once

#include "wacrisk/delay_stability.hpp"

#include <cstddef>
#include <functional>
#include <optional>

namespace wacrisk {

struct SpectralEvaluation {
    double value = 0.0;  ///< +inf when diverging
    double abs_error_estimate = 0.0;
    double truncation_point = 0.0;
    bool diverging = false;
};

/// 1 / |c(ir)|^2 for the unit-delay characteristic function.  Throws
/// InfeasibleError when the denominator is not positive.
double f_integrand(double r, const ScaledParams& sp);

/// The expanded polynomial-trigonometric form of |c(ir)|^2.
double f_denominator(double r, const ScaledParams& sp);

/// f(s;k) = integral over the real line of f_integrand.  `tol` is relative.
/// Throws InfeasibleError when sp is not strictly stable.  A tuple whose
/// denominator nearly vanishes comes back with `diverging` set.
SpectralEvaluation f_quadrature(const ScaledParams& sp, double tol = 1e-8);

/// Closed-form lower bound on f from bounding the denominator piecewise on
/// (0, 1) and (1, inf).
double f_lower_bound(const ScaledParams& sp);

/// Rectangle in a two-parameter plane with the grid spacing used to seed the search.
struct GainBox {
    double x_lo = 0.0, x_hi = 0.0;
    double y_lo = 0.0, y_hi = 0.0;
    double x_step = 0.0, y_step = 0.0;

    std::size_t nx() const;
    std::size_t ny() const;
    double x(std::size_t i) const;
    double y(std::size_t j) const;
};

struct BoxMinimum {
    double x = 0.0, y = 0.0, value = 0.0;            ///< after local polish
    double grid_x = 0.0, grid_y = 0.0, grid_value = 0.0;  ///< best grid node
    std::size_t feasible_nodes = 0;
    std::size_t probes = 0;
};

/// Grid search over `box` followed by a compass-search polish.  `objective`
/// returns nullopt at infeasible points.  Ties on the grid go to the
/// lexicographically smallest (x, y).  Throws InfeasibleError when no grid
/// node is feasible.
BoxMinimum minimize_over_box(const std::function<std::optional<double>(double, double)>& objective,
                             const GainBox& box, double polish_tol = 1e-6);

struct SpectralMinimum {
    double k1 = 0.0, k2 = 0.0, value = 0.0;
    double grid_k1 = 0.0, grid_k2 = 0.0, grid_value = 0.0;
};

/// Minimum of f(s1, s2; k1, k2) over the stable part of a (k1, k2) box.
SpectralMinimum f_min_over_gains(double s1, double s2, const GainBox& k_box, double tol = 1e-8);

}  // namespace wacrisk
