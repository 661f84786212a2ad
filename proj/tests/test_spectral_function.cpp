#include "gen.hpp"

#include "wacrisk/errors.hpp"
#include "wacrisk/quadrature.hpp"
#include "wacrisk/spectral_function.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace wacrisk;

namespace {

constexpr double pi = std::numbers::pi;

// The bound exactly as typeset, with ln(1 + a0/b1).  Kept to document that
// it is not the one the derivation supports.
double printed_lower_bound(const ScaledParams& sp) {
    const double a3 = 2.0 * std::abs(sp.k2);
    const double a2 = 2.0 * std::abs(sp.s1 * sp.k2 - sp.k1) + std::abs(sp.s1 * sp.s1 + sp.k2 * sp.k2 - 2.0 * sp.s2);
    const double a1 = 2.0 * std::abs(sp.s1 * sp.k1 - sp.s2 * sp.k2);
    const double a0 = (sp.s2 + std::abs(sp.k1)) * (sp.s2 + std::abs(sp.k1));
    const double b1 = 1.0 + a1 + a2 + a3;
    const double b2 = b1 + a0;
    return 2.0 / b1 * std::log1p(a0 / b1) + 2.0 / (3.0 * b2);
}

}  // namespace

TEST_CASE("integrand at the origin") {
    CHECK(f_integrand(0.0, {1, 1, 0, 0}) == doctest::Approx(1.0));
    CHECK(f_integrand(0.0, {1, 1, 1, 0}) == doctest::Approx(0.25));
}

TEST_CASE("property: integrand is even and matches the expanded denominator") {
    gen::Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const ScaledParams sp = gen::stable_tuple(rng);
        const double r = rng.uniform(0.0, 20.0);
        CHECK(f_integrand(r, sp) == doctest::Approx(f_integrand(-r, sp)).epsilon(1e-13));
        const std::complex<double> c = characteristic(sp, {0.0, r});
        CHECK(f_denominator(r, sp) == doctest::Approx(std::norm(c)).epsilon(1e-9));
        CHECK(f_integrand(r, sp) == doctest::Approx(1.0 / std::norm(c)).epsilon(1e-12));
    }
}

TEST_CASE("delay-free closed form") {
    const auto a = f_quadrature({1, 1, 0, 0});
    CHECK(a.value == doctest::Approx(pi).epsilon(1e-6));
    const auto b = f_quadrature({2, 1.5, 0, 0});
    CHECK(b.value == doctest::Approx(pi / 3).epsilon(1e-6));
    CHECK(!a.diverging);
    CHECK(a.truncation_point >= 10.0);
}

TEST_CASE("property: the corrected lower bound holds on random stable tuples") {
    gen::Rng rng(103);
    int printed_fails = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const ScaledParams sp = gen::stable_tuple(rng);
        const double f = f_quadrature(sp).value;
        CHECK(f > f_lower_bound(sp));
        if (!(f > printed_lower_bound(sp))) ++printed_fails;
    }
    MESSAGE("typeset bound violated on " << printed_fails << " of 50 tuples");
}

TEST_CASE("property: f is positive") {
    gen::Rng rng(107);
    for (int trial = 0; trial < 100; ++trial) CHECK(f_quadrature(gen::stable_tuple(rng)).value > 0.0);
}

// k = 0 gives pi / (s1 s2), which only drops by 1/8 over {1, 2, 4, 8}, so the
// sequence runs to 16 before asking for a tenfold drop.
TEST_CASE("f decreases towards zero as s1 or s2 grows") {
    for (const auto& k : {std::pair{0.0, 0.0}, std::pair{0.3, 0.2}, std::pair{-0.2, 0.4}}) {
        double prev = INFINITY, first = 0.0, last = 0.0;
        for (double s1 : {1.0, 2.0, 4.0, 8.0, 16.0}) {
            const double f = f_quadrature({s1, 1.0, k.first, k.second}).value;
            CHECK(f < prev);
            if (s1 == 1.0) first = f;
            last = prev = f;
        }
        CHECK(last < 0.1 * first);

        prev = INFINITY;
        for (double s2 : {1.0, 2.0, 4.0, 8.0, 16.0}) {
            const double f = f_quadrature({1.0, s2, k.first, k.second}).value;
            CHECK(f < prev);
            if (s2 == 1.0) first = f;
            last = prev = f;
        }
        CHECK(last < 0.1 * first);
    }
}

TEST_CASE("property: doubling the truncation point does not move the value") {
    gen::Rng rng(109);
    for (int trial = 0; trial < 15; ++trial) {
        const ScaledParams sp = gen::stable_tuple(rng);
        const auto ev = f_quadrature(sp);
        auto g = [&](double r) { return f_integrand(r, sp); };
        for (double R : {ev.truncation_point, 2.0 * ev.truncation_point}) {
            const auto q = integrate_gk15(g, 0.0, R, 1e-11, {}, pi / 2);
            const double v = 2.0 * (q.value + 1.0 / (3.0 * R * R * R));
            CHECK(v == doctest::Approx(ev.value).epsilon(1e-6));
        }
    }
}

TEST_CASE("tolerance is honoured") {
    const ScaledParams sp{0.3, 2.0, 0.4, 0.5};
    const double tight = f_quadrature(sp, 1e-11).value;
    for (double tol : {1e-4, 1e-6, 1e-8}) {
        CHECK(std::abs(f_quadrature(sp, tol).value - tight) <= tol * tight);
    }
}

TEST_CASE("quadrature is deterministic") {
    const ScaledParams sp{0.2, 1.3, -0.4, 0.7};
    CHECK(f_quadrature(sp).value == f_quadrature(sp).value);
}

TEST_CASE("near the stability boundary f blows up or is flagged") {
    const double near = f_quadrature({0.01, 1.0, 0.0, 0.0}).value;
    CHECK(near == doctest::Approx(pi / 0.01).epsilon(1e-6));
    const auto e = f_quadrature({1e-7, 1.0, 0.0, 0.0});
    CHECK((e.diverging || e.value > 1e6));
    CHECK_THROWS_AS(f_quadrature({0, 0, 0, 2}), InfeasibleError);
    CHECK_THROWS_AS(f_quadrature({1, 1, 0, 0}, 0.0), ValidationError);
}

TEST_CASE("gauss-kronrod on known integrals") {
    auto q = integrate_gk15([](double x) { return std::exp(-x); }, 0.0, 30.0, 1e-13);
    CHECK(q.value == doctest::Approx(1.0 - std::exp(-30.0)).epsilon(1e-12));
    CHECK(q.converged);
    q = integrate_gk15([](double x) { return 1.0 / (1e-4 + (x - 0.3) * (x - 0.3)); }, 0.0, 1.0, 1e-10, {0.3});
    const double exact = (std::atan(0.7 / 1e-2) + std::atan(0.3 / 1e-2)) / 1e-2;
    CHECK(q.value == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("added delayed damping beats zero gain for lightly damped modes") {
    const double s1 = 0.0075, s2 = 0.01584;
    const double f0 = f_quadrature({s1, s2, 0, 0}).value;
    const double f1 = f_quadrature({s1, s2, 0, 0.02}).value;
    CHECK(f1 < f0);
    const GainBox box{-0.005, 0.005, 0.0, 0.1, 0.001, 0.005};
    const SpectralMinimum m = f_min_over_gains(s1, s2, box);
    CHECK(m.value < f0);
    CHECK((m.k1 != 0.0 || m.k2 != 0.0));
}

TEST_CASE("interior minimum has a vanishing gradient") {
    const double s1 = 0.0075, s2 = 0.01584;
    const GainBox box{-0.3, 0.3, 0.0, 3.0, 0.02, 0.05};
    const SpectralMinimum m = f_min_over_gains(s1, s2, box, 1e-10);
    REQUIRE(m.k1 > box.x_lo);
    REQUIRE(m.k1 < box.x_hi);
    REQUIRE(m.k2 > box.y_lo);
    REQUIRE(m.k2 < box.y_hi);
    const double h = 1e-4;
    auto f = [&](double a, double b) { return f_quadrature({s1, s2, a, b}, 1e-12).value; };
    const double gx = (f(m.k1 + h, m.k2) - f(m.k1 - h, m.k2)) / (2 * h);
    const double gy = (f(m.k1, m.k2 + h) - f(m.k1, m.k2 - h)) / (2 * h);
    CHECK(std::hypot(gx, gy) < 1e-3 * m.value / box.x_step);
}

TEST_CASE("box search: ties go to the lexicographically smallest node") {
    const GainBox box{0.0, 1.0, 0.0, 1.0, 0.25, 0.25};
    const BoxMinimum m = minimize_over_box([](double, double) { return std::optional<double>(1.0); }, box);
    CHECK(m.grid_x == 0.0);
    CHECK(m.grid_y == 0.0);
    CHECK(m.feasible_nodes == 25);
    CHECK_THROWS_AS(minimize_over_box([](double, double) { return std::optional<double>(); }, box),
                    InfeasibleError);
}

TEST_CASE("box search finds a quadratic bowl") {
    const GainBox box{-2.0, 2.0, -1.0, 3.0, 0.1, 0.1};
    const BoxMinimum m = minimize_over_box(
        [](double x, double y) { return std::optional<double>((x - 0.333) * (x - 0.333) + 2 * (y - 1.777) * (y - 1.777)); },
        box, 1e-9);
    CHECK(m.x == doctest::Approx(0.333).epsilon(1e-6));
    CHECK(m.y == doctest::Approx(1.777).epsilon(1e-6));
    CHECK(m.grid_x == doctest::Approx(0.3));
    CHECK(m.grid_y == doctest::Approx(1.8));
}
