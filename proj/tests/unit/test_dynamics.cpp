#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "matrix_oracle.hpp"
#include "sgrd/dynamics.hpp"
#include "sgrd/error.hpp"

using namespace sgrd;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double max_diff(const Mat2& m, const oracle::Dense& o) {
    return std::max({std::abs(m.a11 - o[0][0]), std::abs(m.a12 - o[0][1]),
                     std::abs(m.a21 - o[1][0]), std::abs(m.a22 - o[1][1])});
}

double max_abs(const oracle::Dense& o) {
    return std::max({std::abs(o[0][0]), std::abs(o[0][1]), std::abs(o[1][0]), std::abs(o[1][1])});
}

Params regime_params(int n_modes = 32) {
    Params p;
    p.alpha = 10;
    p.kappa = 50;
    p.n_modes = n_modes;
    p.h_coeffs = {{0.1}};
    return p;
}

State random_state(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g;
    State y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = scale / (1.0 + static_cast<double>(i * i));
        y.u[i] = s * g(rng);
        y.v[i] = s * g(rng);
    }
    return y;
}

double state_diff(const State& a, const State& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max({d, std::abs(a.u[i] - b.u[i]), std::abs(a.v[i] - b.v[i])});
    return d;
}

}  // namespace

TEST_CASE("zero mode exponential") {
    const Mat2 e = mode_exponential(2, 0, std::log(2.0));
    CHECK(e.a11 == Approx(1.0).epsilon(1e-15));
    CHECK(e.a12 == Approx(0.375).epsilon(1e-15));
    CHECK(std::abs(e.a21) < 1e-16);
    CHECK(e.a22 == Approx(0.25).epsilon(1e-15));

    SpectralOperator op(1, kPi, 4, 8);
    const auto p = build_propagator(op, 2, std::log(2.0));
    CHECK(p.e[0].a11 == 1.0);
    CHECK(p.e[0].a12 == Approx(0.375).epsilon(1e-15));
    CHECK(p.e[0].a21 == 0.0);
    CHECK(p.e[0].a22 == Approx(0.25).epsilon(1e-15));
    CHECK_THROWS_AS((void)build_propagator(op, 2, 0.0), DomainError);
}

TEST_CASE("propagators agree with the matrix exponential oracle") {
    for (double alpha : {0.5, 2.0, 10.0})
        for (double lambda : {0.0, 0.3, 1.0, 25.0, 50.0, 400.0})
            for (double dt : {1e-3, 0.1, 1.0}) {
                CAPTURE(alpha);
                CAPTURE(lambda);
                CAPTURE(dt);
                const auto oe = oracle::mode_exp(alpha, lambda, dt);
                const auto op = oracle::mode_phi(alpha, lambda, dt);
                CHECK(max_diff(mode_exponential(alpha, lambda, dt), oe) <= 1e-11 * max_abs(oe));
                CHECK(max_diff(mode_phi(alpha, lambda, dt), op) <= 1e-11 * max_abs(op));
            }
}

TEST_CASE("defective case alpha^2 = 4 lambda") {
    for (double dt : {1e-4, 1e-2, 0.5, 2.0, 7.0}) {
        CAPTURE(dt);
        const auto oe = oracle::mode_exp(2, 1, dt);
        const auto op = oracle::mode_phi(2, 1, dt);
        CHECK(max_diff(mode_exponential(2, 1, dt), oe) <= 1e-12);
        CHECK(max_diff(mode_phi(2, 1, dt), op) <= 1e-12);
    }
}

TEST_CASE("branches are continuous across the series switch") {
    const double alpha = 2, dt = 0.1;
    // |d| dt on both sides of 1e-3, real and complex
    for (double x : {0.999e-3, 1.001e-3, 5e-4, 2e-3}) {
        for (int sign : {1, -1}) {
            const double d = x / dt;
            const double lambda = alpha * alpha / 4 - sign * d * d;
            const auto oe = oracle::mode_exp(alpha, lambda, dt);
            const auto op = oracle::mode_phi(alpha, lambda, dt);
            CHECK(max_diff(mode_exponential(alpha, lambda, dt), oe) <= 1e-14);
            CHECK(max_diff(mode_phi(alpha, lambda, dt), op) <= 1e-14);
        }
    }
}

TEST_CASE("small step limits") {
    const double dt = 1e-8;
    for (double lambda : {0.0, 1.0, 50.0, 48050.0}) {
        const Mat2 e = mode_exponential(10, lambda, dt);
        const Mat2 p = mode_phi(10, lambda, dt);
        CHECK(std::abs(e.a11 - 1) < 1e-7);
        CHECK(std::abs(e.a22 - 1) < 1e-6);
        CHECK(std::abs(e.a12) < 1e-7);
        CHECK(std::abs(e.a21) < 1e-3);
        CHECK(std::abs(p.a11 / dt - 1) < 1e-7);
        CHECK(std::abs(p.a22 / dt - 1) < 1e-6);
        CHECK(std::abs(p.a12 / dt) < 1e-7);
        CHECK(std::abs(p.a21 / dt) < 1e-3);
    }
}

TEST_CASE("linear flow keeps P exactly and contracts Q") {
    Model model(regime_params());
    const auto& geom = model.geometry();
    const double a = compute_a(10, 1, 50);
    std::mt19937_64 rng(5);
    for (double t : {0.1, 1.0, 5.0}) {
        const auto prop = build_propagator(model.op(), 10, t);
        for (int k = 0; k < 20; ++k) {
            State y = random_state(32, rng, 10.0);
            const double s0 = project_p(y, geom);
            const double q0 = q_norm(y, geom);
            apply_linear(prop, y);
            CHECK(std::abs(project_p(y, geom) - s0) * geom.eta0_norm() <= 1e-12);
            CHECK(q_norm(y, geom) <= std::exp(-a * t) * q0 + 1e-8);
        }
    }
}

TEST_CASE("nonlinearity examples") {
    SpectralOperator op(50, kPi, 16, 32);
    const SpectralField zero(16);
    State y(16);
    const State f0 = nonlinearity(y, zero, zero, 10, op);
    CHECK(state_diff(f0, State(16)) == 0.0);

    y.u[0] = kPi * std::sqrt(kPi);  // u == pi
    CHECK(state_diff(nonlinearity(y, zero, zero, 10, op), State(16)) < 1e-12);

    y.u[0] = kPi / 2 * std::sqrt(kPi);  // u == pi/2
    const State f = nonlinearity(y, zero, zero, 3, op);
    State expect(16);
    expect.v[0] = -std::sqrt(kPi);
    CHECK(state_diff(f, expect) < 1e-12);

    SpectralField z(16);
    z[2] = 0.5;
    const SpectralField ff(std::vector<double>(16, 0.25));
    const State g = nonlinearity(State(16), z, ff, 3, op);
    CHECK(g.u[2] == 0.5);
    CHECK(g.v[2] == Approx(0.25 - 2 * 0.5));
    CHECK(g.v[1] == 0.25);
}

TEST_CASE("equilibria are preserved") {
    Params p = regime_params(16);
    p.h_coeffs.clear();
    Model model(p);
    Stepper st(model);
    const SpectralField zero(16);
    State y(16);
    for (int k = 0; k < 100000; ++k) st.step(y, zero, k * p.dt);
    CHECK(state_diff(y, State(16)) == 0.0);

    State pi(16);
    pi.u[0] = kPi * std::sqrt(kPi);
    State w = pi;
    const int steps = 10000;  // 10 time units
    for (int k = 0; k < steps; ++k) st.step(w, zero, k * p.dt);
    CHECK(state_diff(w, pi) / (steps * p.dt) < 1e-8);
}

TEST_CASE("blow-up is reported with its time") {
    Params p = regime_params(8);
    p.h_coeffs.clear();
    Model model(p);
    Stepper st(model);
    State y(8);
    y.u[3] = std::numeric_limits<double>::quiet_NaN();
    try {
        st.step(y, SpectralField(8), 2.5);
        FAIL("no blow-up error");
    } catch (const BlowUpError& e) {
        CHECK(e.time() == 2.5);
    }
}

TEST_CASE("p0 equivariance of the nonlinear step") {
    Model model(regime_params());
    const auto noise = make_noise(model.params(), 0, 10, 0);
    Stepper st(model);
    std::mt19937_64 rng(9);
    State y = random_state(32, rng, 3.0);
    State w = y + p0_state(32, model.op());
    const State p0 = p0_state(32, model.op());
    for (std::size_t k = 0; k < 10000; ++k) {
        st.step(y, noise, k);
        st.step(w, noise, k);
        if (k == 0) CHECK(energy_norm(w - y - p0, model.geometry()) <= 1e-12);
    }
    CHECK(energy_norm(w - y - p0, model.geometry()) <= 1e-8);
}

TEST_CASE("integrate: identity, splitting, cocycle") {
    Model model(regime_params(16));
    const auto noise = make_noise(model.params(), -2, 12, 3);
    std::mt19937_64 rng(1);
    const State y0 = random_state(16, rng);

    const auto same = integrate(model, y0, noise, 1.0, 1.0);
    CHECK(same.final_state == y0);
    CHECK(same.times.size() == 1);

    const auto whole = integrate(model, y0, noise, 0, 10);
    const auto first = integrate(model, y0, noise, 0, 4);
    const auto second = integrate(model, first.final_state, noise, 4, 10);
    CHECK(state_diff(whole.final_state, second.final_state) <= 1e-12);

    // integrate [s, s+t] on omega equals [0, t] on theta_s omega
    const auto shifted = noise.shifted(4000);
    const auto via_shift = integrate(model, first.final_state, shifted, 0, 6);
    CHECK(state_diff(via_shift.final_state, second.final_state) == 0.0);

    CHECK_THROWS_AS((void)integrate(model, y0, noise, 0, 13), ConfigError);
    CHECK_THROWS_AS((void)integrate(model, y0, noise, 3, 1), ConfigError);
}

TEST_CASE("trajectory records") {
    Model model(regime_params(8));
    const auto noise = make_noise(model.params(), 0, 1, 0);
    RecordSpec spec;
    spec.every_steps = 100;
    spec.checkpoint_times = {0.25, 0.5};
    const auto rec = integrate(model, State(8), noise, 0, 1, spec);
    REQUIRE(rec.times.size() == 11);
    for (std::size_t i = 1; i < rec.times.size(); ++i) CHECK(rec.times[i] > rec.times[i - 1]);
    CHECK(rec.times.back() == Approx(1.0));
    REQUIRE(rec.checkpoints.size() == 2);
    CHECK(rec.checkpoints[0].first == Approx(0.25));
    CHECK(rec.s.size() == rec.times.size());
    CHECK(rec.q_norm.size() == rec.times.size());
    CHECK(rec.s.back() == Approx(project_p(rec.final_state, model.geometry())));
}

TEST_CASE("pullback solves") {
    Model model(regime_params(16));
    const double horizon = 6;
    const auto noise = make_noise(model.params(), -horizon, 0, 2);
    std::mt19937_64 rng(4);
    const State y0 = random_state(16, rng);
    CHECK(pullback_solve(model, y0, noise, 0) == y0);
    // Y(T+s, theta_{-T-s}) = Y(T, theta_{-T}) o Y(s, theta_{-T-s})
    const double s = 2;
    const State full = pullback_solve(model, y0, noise, horizon);
    const auto head = integrate(model, y0, noise, -horizon, -(horizon - s));
    const State rest = pullback_solve(model, head.final_state, noise, horizon - s);
    CHECK(state_diff(full, rest) <= 1e-12);
}

TEST_CASE("pullback on a horizontal pair keeps q below p") {
    Model model(regime_params(16));
    const auto& geom = model.geometry();
    const auto noise = make_noise(model.params(), -10, 0, 6);
    State a(16), b(16);
    const double rl = std::sqrt(kPi);
    a.u[0] = 0.3 * rl;
    b.u[0] = 1.1 * rl;
    const State ya = pullback_solve(model, a, noise, 10);
    const State yb = pullback_solve(model, b, noise, 10);
    const State d = ya - yb;
    CHECK(q_norm(d, geom) <= energy_norm(p_part(d, geom), geom));
}

TEST_CASE("untransformed solution map") {
    Params p = regime_params(16);
    Model model(p);
    const auto noise = make_noise(p, 0, 2, 1);
    std::mt19937_64 rng(2);
    const State phi0 = random_state(16, rng);
    const State back = phi_solution(model, phi0, noise, 0, 0);
    CHECK(state_diff(back, phi0) <= 1e-15);

    const State phi = phi_solution(model, phi0, noise, 0, 2);
    State y0 = phi0;
    const auto z0 = z_field(noise, 0, model.noise_shapes());
    for (std::size_t i = 0; i < 16; ++i) y0.v[i] -= z0[i];
    const State y = integrate(model, y0, noise, 0, 2).final_state;
    CHECK(phi.u == y.u);

    Params q = p;
    q.h_coeffs = {{0.0}};
    Model quiet(q);
    const auto n2 = make_noise(q, 0, 2, 1);
    const State pq = phi_solution(quiet, phi0, n2, 0, 2);
    const State yq = integrate(quiet, phi0, n2, 0, 2).final_state;
    CHECK(pq == yq);
}

TEST_CASE("first order convergence in dt") {
    Params p = regime_params(16);
    p.h_coeffs.clear();
    p.f_coeffs = {1.5 * std::sqrt(kPi), 0.4, -0.2};
    auto run = [&](double dt) {
        Params q = p;
        q.dt = dt;
        Model m(q);
        const auto noise = make_noise(q, 0, 1, 0);
        State y0(16);
        y0.u[0] = 0.5;
        y0.u[1] = 1.0;
        y0.v[2] = 2.0;
        return integrate(m, y0, noise, 0, 1).final_state;
    };
    const State ref = run(1e-2 / 256);
    std::vector<double> lx, ly;
    for (double dt : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
        const State y = run(dt);
        Model m(p);
        lx.push_back(std::log(dt));
        ly.push_back(std::log(energy_norm(y - ref, m.geometry())));
    }
    const double mx = (lx[0] + lx[1] + lx[2] + lx[3]) / 4;
    const double my = (ly[0] + ly[1] + ly[2] + ly[3]) / 4;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 4; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    CHECK(sxy / sxx >= 0.9);
    CHECK(sxy / sxx <= 1.5);
}

TEST_CASE("state dump round trip") {
    std::mt19937_64 rng(8);
    const State y = random_state(12, rng);
    const auto file = std::filesystem::temp_directory_path() / "sgrd_state_test.bin";
    write_state(y, -3.5, file);
    const auto [back, t] = read_state(file);
    CHECK(back == y);
    CHECK(t == -3.5);
    CHECK(std::filesystem::file_size(file) == 8 * (2 + 24));
    std::filesystem::remove(file);
}
