#pragma once

// Small seeded generators for the property tests.

#include "wacrisk/delay_stability.hpp"
#include "wacrisk/network_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace gen {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

// Connected weighted graph: a random spanning path plus extra edges.
inline Eigen::MatrixXd connected_laplacian(Rng& rng, int n, double density = 0.4) {
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (int k = 0; k + 1 < n; ++k) {
        const int a = order[static_cast<std::size_t>(k)], b = order[static_cast<std::size_t>(k + 1)];
        W(a, b) = W(b, a) = rng.uniform(0.2, 3.0);
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (W(i, j) == 0.0 && rng.coin(density)) W(i, j) = W(j, i) = rng.uniform(0.1, 2.0);
    Eigen::MatrixXd L = -W;
    for (int i = 0; i < n; ++i) L(i, i) = W.row(i).sum();
    return L;
}

inline Eigen::MatrixXd random_symmetric(Rng& rng, int n) {
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) A(i, j) = A(j, i) = rng.uniform(-1.0, 1.0);
    return A;
}

inline wacrisk::ScaledParams tuple(Rng& rng, double s_hi = 3.0, double k_abs = 3.0) {
    return {rng.uniform(0.0, s_hi), rng.uniform(0.0, s_hi), rng.uniform(-k_abs, k_abs),
            rng.uniform(-k_abs, k_abs)};
}

// Draws until membership_w says stable and not on the band edge.
inline wacrisk::ScaledParams stable_tuple(Rng& rng, double s_lo = 0.1, double s_hi = 3.0,
                                          double k_abs = 1.5) {
    for (;;) {
        wacrisk::ScaledParams sp{rng.uniform(s_lo, s_hi), rng.uniform(s_lo, s_hi),
                                 rng.uniform(-k_abs, k_abs), rng.uniform(-k_abs, k_abs)};
        const auto v = wacrisk::membership_w(sp);
        if (v.stable && v.margin > 0.05) return sp;
    }
}

}  // namespace gen
