#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sgrd/core.hpp"
#include "sgrd/error.hpp"

using namespace sgrd;
using doctest::Approx;

TEST_CASE("compute_a") {
    CHECK(compute_a(2, 1, 2) == Approx(1.0).epsilon(1e-15));
    CHECK(compute_a(4, 1, 0.5) == Approx(0.125).epsilon(1e-15));
    CHECK(compute_a(10, 1, 50) == Approx(5.0).epsilon(1e-15));
    CHECK_THROWS_AS((void)compute_a(0, 1, 1), DomainError);
    CHECK_THROWS_AS((void)compute_a(1, 1, 0), DomainError);
    CHECK_THROWS_AS((void)compute_a(1, 1.5, 1), DomainError);
}

TEST_CASE("compute_a peaks at delta*lambda1 = alpha^2/2") {
    const double alpha = 3;
    double prev = -1e300;
    for (int k = 1; k <= 100; ++k) {
        const double dl = 4.5 * k / 100.0;  // delta*lambda1 up to alpha^2/2
        const double a = compute_a(alpha, 1, dl);
        CHECK(a >= prev);
        prev = a;
    }
    CHECK(compute_a(alpha, 1, 4.5) == Approx(alpha / 2));
    for (int k = 1; k <= 100; ++k) {
        const double dl = 4.5 + 0.1 * k;
        CHECK(compute_a(alpha, 1, dl) <= prev);
        prev = compute_a(alpha, 1, dl);
    }
}

TEST_CASE("choose_delta") {
    CHECK(choose_delta(10, 50) == 1.0);
    CHECK(choose_delta(2, 50) == Approx(0.04).epsilon(1e-15));
    CHECK(choose_delta(10, 10) == 1.0);
}

TEST_CASE("regime_check") {
    auto r = regime_check(10, 5);
    CHECK(r.a_positive);
    CHECK(r.curve_regime);
    CHECK(r.gamma_exists);
    r = regime_check(2, 1);
    CHECK(r.a_positive);
    CHECK_FALSE(r.curve_regime);
    CHECK_FALSE(r.gamma_exists);
    r = regime_check(4, 0);
    CHECK_FALSE(r.a_positive);
    CHECK_FALSE(r.curve_regime);
    CHECK_FALSE(r.gamma_exists);
    CHECK(kGapThreshold == Approx(11.6568542).epsilon(1e-8));
    CHECK(kGapThreshold == Approx(2 * std::numbers::sqrt2 / (3 * std::numbers::sqrt2 - 4)));
}

TEST_CASE("curve regime implies a positive") {
    for (double alpha = 0.5; alpha < 20; alpha += 0.5)
        for (double a = -2; a < 10; a += 0.25) {
            const auto r = regime_check(alpha, a);
            if (r.curve_regime) CHECK(r.a_positive);
        }
}

TEST_CASE("gamma_star") {
    CHECK(gamma_star(1) == Approx(0.2928932188134524).epsilon(1e-14));
    CHECK(gamma_star(2) == Approx(0.5857864376269049).epsilon(1e-14));
    CHECK_THROWS_AS((void)gamma_star(0), DomainError);
    CHECK_THROWS_AS((void)gamma_star(-1), DomainError);
}

TEST_CASE("gamma_star minimizes the gap sum on a grid") {
    for (double a : {0.3, 1.0, 5.0, 17.0}) {
        const int n = 1000;
        const double h = (a / 2) / (n + 1);
        double best = 1e300;
        double best_g = 0;
        for (int k = 1; k <= n; ++k) {
            const double g = k * h;
            const double val = 1 / g + 1 / (a - 2 * g);
            if (val < best) {
                best = val;
                best_g = g;
            }
        }
        CHECK(std::abs(best_g - gamma_star(a)) <= h);
    }
}

TEST_CASE("attraction_constant_m") {
    const double g = gamma_star(5);
    CHECK(g == Approx(1.4644660940672622).epsilon(1e-14));
    CHECK(attraction_constant_m(10, 5, g) == Approx(1.3040140296610392).epsilon(1e-13));
    CHECK_THROWS_AS((void)attraction_constant_m(10, 5, 2.4), RegimeError);
    double prev = 1e300;
    for (double alpha = 10; alpha < 1e6; alpha *= 2) {
        const double m = attraction_constant_m(alpha, 5, g);
        CHECK(m > 1);
        CHECK(m < prev);
        prev = m;
    }
    CHECK(prev == Approx(1.0).epsilon(1e-4));
}

TEST_CASE("ledger constants") {
    Params p;
    p.alpha = 2;
    p.kappa = 1;
    const auto led = ledger_constants(p);
    CHECK(led.a1 == Approx(1.0).epsilon(1e-15));
    CHECK(led.a2 == Approx(std::sqrt(3 * std::numbers::pi)).epsilon(1e-15));
    CHECK(led.a2 == Approx(3.0699801).epsilon(1e-7));
    CHECK(led.lf_bound == 1.0);
    CHECK(led.mu_pairs[0].plus == std::complex<double>(0, 0));
    CHECK(led.mu_pairs[0].minus == std::complex<double>(-2, 0));

    Params q;
    q.alpha = 10;
    q.kappa = 50;
    const auto l2 = ledger_constants(q);
    CHECK(l2.lambda1 == Approx(50.0).epsilon(1e-15));
    CHECK(l2.delta == 1.0);
    CHECK(l2.a == Approx(5.0));
    CHECK(l2.lf_bound == 0.2);
    REQUIRE(l2.gamma_star);
    REQUIRE(l2.big_m);
    CHECK(*l2.big_m == Approx(1.3040140296610392).epsilon(1e-13));
    CHECK(l2.regime_1d);
    CHECK(l2.a1 == Approx(8.54400374531753).epsilon(1e-14));
    CHECK(l2.a3 == Approx(23.447360499173755).epsilon(1e-14));
    CHECK(l2.a4 == Approx(std::numbers::sqrt2).epsilon(1e-15));
    CHECK(l2.a5 == Approx(108.7793540462453).epsilon(1e-13));
    CHECK(l2.a6 == Approx(14.054602532186534).epsilon(1e-13));
    CHECK(l2.a7 == Approx(11.208527035116727).epsilon(1e-13));
    // complex pair above alpha^2/4
    const auto mu = l2.mu_pairs[1];
    CHECK(mu.plus.real() == Approx(-5.0));
    CHECK(mu.plus.imag() == Approx(5.0));
    CHECK(mu.minus == std::conj(mu.plus));
}

TEST_CASE("zero mode eigenvalues are exact") {
    for (double alpha : {0.3, 1.0, 2.0, 10.0, 37.5}) {
        const auto mu = spectrum_pair(alpha, 0.0);
        CHECK(mu.plus == std::complex<double>(0, 0));
        CHECK(mu.minus == std::complex<double>(-alpha, 0));
    }
}

TEST_CASE("params validation") {
    Params p;
    CHECK_NOTHROW(p.validate());
    p.delta = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.delta = 1.0;
    p.n_modes = 1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.n_modes = 8;
    p.n_quad = 10;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.n_quad = 0;
    p.dt = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.dt = 1e-3;
    p.h_coeffs = {std::vector<double>(9, 0.0)};
    CHECK_THROWS_AS(p.validate(), ConfigError);
}
