#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace wacrisk {

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    std::size_t intervals = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Globally adaptive Gauss-Kronrod 7/15 integration over [a, b].
/// `breakpoints` (inside (a, b), any order) seed the initial partition, which
/// is further split so no initial piece is longer than `max_initial_width`.
/// Stops when the summed error estimate falls below `abs_tol` or
/// `max_intervals` pieces exist.
QuadratureResult integrate_gk15(const std::function<double(double)>& f, double a, double b,
                                double abs_tol, std::vector<double> breakpoints = {},
                                double max_initial_width = 0.0,
                                std::size_t max_intervals = 200000);

}  // namespace wacrisk
