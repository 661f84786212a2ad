#include "gen.hpp"

#include "wacrisk/errors.hpp"
#include "wacrisk/risk_engine.hpp"
#include "wacrisk/steady_state_stats.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace wacrisk;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double pi = std::numbers::pi;

// Trapezoid on the Gaussian density as an independent route to the quantile.
double nu_by_trapezoid(double eps) {
    auto mass = [](double v) {
        const int n = 20000;
        const double h = v / n;
        double s = 0.5 * (1.0 + std::exp(-0.5 * v * v));
        for (int i = 1; i < n; ++i) s += std::exp(-0.5 * (i * h) * (i * h));
        return 2.0 * s * h / std::sqrt(2.0 * pi);
    };
    double lo = 0.0, hi = 10.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mass(mid) < 1.0 - eps ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("gaussian quantile") {
    CHECK(nu_epsilon(0.1) == doctest::Approx(1.64485).epsilon(1e-5 / 1.64485));
    CHECK(nu_epsilon(0.05) == doctest::Approx(1.95996).epsilon(1e-5 / 1.95996));
    CHECK(nu_epsilon(1.0 - 1e-12) < 1e-10);
    for (double eps : {0.01, 0.1, 0.3, 0.7}) CHECK(nu_epsilon(eps) == doctest::Approx(nu_by_trapezoid(eps)).epsilon(1e-7));
    CHECK_THROWS_AS(nu_epsilon(0.0), ValidationError);
    CHECK_THROWS_AS(nu_epsilon(1.0), ValidationError);
}

TEST_CASE("risk examples") {
    const SystemicSet set(pi / 3, 1.5, 0.1);
    CHECK(set.safe_sigma() == doctest::Approx(0.4244).epsilon(1e-4));
    CHECK(set.critical_sigma() == doctest::Approx(0.6367).epsilon(1e-4));
    CHECK(risk_value(0.42, set) == 0.0);
    const double nu = set.nu();
    CHECK(risk_value(0.5, set) == doctest::Approx((0.5 * nu * 1.5 - pi / 3) / (pi / 3 - 0.5 * nu)));
    CHECK(risk_value(0.5, set) == doctest::Approx(0.830).epsilon(1e-3));
    CHECK(risk_value(0.7, set) == inf);
    CHECK(risk_from_definition(0.5, set) == doctest::Approx(risk_value(0.5, set)).epsilon(1e-6));
    CHECK(risk_value(0.0, set) == 0.0);
    CHECK(risk_from_definition(0.0, set) == 0.0);
}

TEST_CASE("inverting the middle branch") {
    gen::Rng rng(301);
    for (int trial = 0; trial < 20; ++trial) {
        const SystemicSet set(rng.uniform(0.1, 2.0), rng.uniform(1.1, 4.0), rng.uniform(0.01, 0.5));
        const double d0 = trial == 0 ? 1.0 : rng.uniform(0.05, 20.0);
        const double sigma = set.threshold(d0) / set.nu();
        CHECK(risk_value(sigma, set) == doctest::Approx(d0).epsilon(1e-9));
        CHECK(risk_from_definition(sigma, set) == doctest::Approx(d0).epsilon(1e-6));
    }
}

TEST_CASE("boundary ties follow the closed branches") {
    const SystemicSet set(1.0, 2.0, 0.1);
    CHECK(risk_value(set.safe_sigma(), set) == 0.0);
    CHECK(risk_value(set.critical_sigma(), set) == inf);
}

TEST_CASE("property: closed form equals the definition") {
    gen::Rng rng(307);
    for (int k = 0; k < 5; ++k) {
        const SystemicSet set(rng.uniform(0.1, 2.0), rng.uniform(1.05, 3.0), rng.uniform(0.01, 0.4));
        for (int i = 0; i < 100; ++i) {
            const double sigma = 1.3 * set.critical_sigma() * i / 99.0;
            const double a = risk_value(sigma, set), b = risk_from_definition(sigma, set);
            if (std::isinf(a) || std::isinf(b)) {
                CHECK(a == b);
            } else {
                CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, a));
            }
        }
    }
}

TEST_CASE("property: monotone in sigma, zeta, c and the confidence") {
    gen::Rng rng(311);
    for (int trial = 0; trial < 200; ++trial) {
        const double z = rng.uniform(0.2, 2.0), c = rng.uniform(1.1, 3.0), e = rng.uniform(0.02, 0.4);
        const SystemicSet base(z, c, e);
        const double s = rng.uniform(0.0, 1.2 * base.critical_sigma());
        const double r = risk_value(s, base);
        CHECK(risk_value(s * 1.01, base) >= r);
        CHECK(risk_value(s, SystemicSet(z * 1.02, c, e)) <= r);
        CHECK(risk_value(s, SystemicSet(z, c * 1.02, e)) >= r);
        CHECK(risk_value(s, SystemicSet(z, c, e * 0.9)) >= r);
    }
}

TEST_CASE("branch continuity at both ends") {
    const SystemicSet set(1.0, 1.5, 0.1);
    CHECK(risk_value(set.safe_sigma() * (1 + 1e-9), set) < 1e-7);
    CHECK(risk_value(set.critical_sigma() * (1 - 1e-9), set) > 1e7);
}

TEST_CASE("property: unsafe sets are nested") {
    gen::Rng rng(313);
    for (int trial = 0; trial < 200; ++trial) {
        const SystemicSet set(rng.uniform(0.1, 2.0), rng.uniform(1.05, 3.0), 0.1);
        const double a = rng.uniform(0.0, 50.0), b = a + rng.uniform(1e-3, 50.0);
        CHECK(set.threshold(a) < set.threshold(b));
        CHECK(set.threshold(b) < set.zeta());
    }
}

TEST_CASE("invalid systemic sets") {
    CHECK_THROWS_AS(SystemicSet(1.0, 1.0, 0.1), ValidationError);
    CHECK_THROWS_AS(SystemicSet(0.0, 1.5, 0.1), ValidationError);
    CHECK_THROWS_AS(SystemicSet(1.0, 1.5, 1.5), ValidationError);
    const SystemicSet set(1.0, 1.5, 0.1);
    CHECK_THROWS_AS(risk_value(-0.1, set), ValidationError);
}

TEST_CASE("frequency-gain family at tau = 0 with noisy measurements") {
    Eigen::MatrixXd L(2, 2);
    L << 0.792, -0.792, -0.792, 0.792;
    const LaplacianSpectrum s = decompose_laplacian(L);
    const SystemicSet set(pi / 3, 1.5, 0.1);
    auto risk_at = [&](double kappa) {
        const ModalSystem sys = resolve_gains(s, EigenGains{Eigen::Vector2d(0, 0), Eigen::Vector2d(0, kappa)});
        return risk_profile(sigma_pairs(sys, 0.075, 0.0, {0.7, 0.3}, 2.0), set).entries.at(0).risk;
    };
    CHECK(risk_at(1.0) == 0.0);
    CHECK(risk_at(0.3) > 0.0);
    CHECK(risk_at(3.0) > 0.0);
}

TEST_CASE("risk profile keeps pair order and zero deviations give zero risk") {
    PairStats st;
    st.pairs = {{1, 2, 0.0}, {1, 3, 0.0}, {2, 3, 0.0}};
    const RiskProfile rp = risk_profile(st, SystemicSet(0.5, 1.5, 0.1));
    REQUIRE(rp.entries.size() == 3);
    CHECK(rp.entries[2].i == 2);
    CHECK(rp.max_risk() == 0.0);
    CHECK(rp.values().norm() == 0.0);
}
