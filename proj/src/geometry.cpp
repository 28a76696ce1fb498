#include "sgrd/geometry.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sgrd/error.hpp"

namespace sgrd {

State::State(SpectralField uu, SpectralField vv) : u(std::move(uu)), v(std::move(vv)) {
    if (u.size() != v.size()) throw ShapeError("State: u and v lengths differ");
}

State& State::operator+=(const State& o) {
    if (o.size() != size()) throw ShapeError("State: size mismatch");
    for (std::size_t i = 0; i < size(); ++i) {
        u[i] += o.u[i];
        v[i] += o.v[i];
    }
    return *this;
}

State& State::operator-=(const State& o) {
    if (o.size() != size()) throw ShapeError("State: size mismatch");
    for (std::size_t i = 0; i < size(); ++i) {
        u[i] -= o.u[i];
        v[i] -= o.v[i];
    }
    return *this;
}

State& State::operator*=(double s) {
    for (std::size_t i = 0; i < size(); ++i) {
        u[i] *= s;
        v[i] *= s;
    }
    return *this;
}

//---------------------------------------------------------------------------//
EnergyGeometry::EnergyGeometry(double alpha, double delta, const SpectralOperator& op)
    : alpha_(alpha), delta_(delta), lambda1_(op.lambda1()), op_(&op) {
    if (!(alpha > 0)) throw DomainError("EnergyGeometry: alpha must be > 0");
    if (!(delta > 0 && delta <= 1)) throw DomainError("EnergyGeometry: delta must lie in (0, 1]");
    // Poincare on the zero-mean block needs delta*lambda1 < lambda1 + alpha^2/4.
    if (!(delta * lambda1_ < lambda1_ + alpha * alpha / 4))
        throw DomainError(fmt::format(
            "EnergyGeometry: fluctuation form not positive definite (delta*lambda1 = {})",
            delta * lambda1_));
    eta0_norm_ = alpha * std::sqrt(op.length() / 2);
}

double EnergyGeometry::min_mode_eigenvalue(int i) const {
    // (u, v) form: [[lambda_i - delta lambda1 + alpha^2/2, alpha/2], [alpha/2, 1]]
    const double a11 = op_->lambda(i) - delta_ * lambda1_ + alpha_ * alpha_ / 2;
    const double a12 = alpha_ / 2;
    const double tr = a11 + 1;
    const double det = a11 - a12 * a12;
    return tr / 2 - std::sqrt(tr * tr / 4 - det);
}

double energy_inner(const State& y1, const State& y2, const EnergyGeometry& geom) {
    const std::size_t n = y1.size();
    if (y2.size() != n) throw ShapeError("energy_inner: size mismatch");
    const double al = geom.alpha();
    const double half = al / 2;
    const double shift = geom.delta() * geom.lambda1();
    const auto lam = geom.op().lambdas();
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u1 = y1.u[i];
        const double u2 = y2.u[i];
        double w = half * half;
        if (i > 0) w += lam[i] - shift;
        acc += w * u1 * u2 + (half * u1 + y1.v[i]) * (half * u2 + y2.v[i]);
    }
    return acc;
}

double energy_norm(const State& y, const EnergyGeometry& geom) {
    return std::sqrt(std::max(0.0, energy_inner(y, y, geom)));
}

double h1l2_norm(const State& y, const EnergyGeometry& geom) {
    const double L = geom.op().length();
    double acc = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double k = static_cast<double>(i) * std::numbers::pi / L;
        acc += (k * k + 1) * y.u[i] * y.u[i] + y.v[i] * y.v[i];
    }
    return std::sqrt(acc);
}

double graph_norm(const State& y, const EnergyGeometry& geom) {
    State cy(y.size());
    const auto lam = geom.op().lambdas();
    for (std::size_t i = 0; i < y.size(); ++i) {
        cy.u[i] = y.v[i];
        cy.v[i] = -lam[i] * y.u[i] - geom.alpha() * y.v[i];
    }
    return energy_norm(y, geom) + energy_norm(cy, geom);
}

double project_p(const State& y, const EnergyGeometry& geom) {
    const double root_l = std::sqrt(geom.op().length());
    return (y.u[0] + y.v[0] / geom.alpha()) / root_l;
}

State p_part(const State& y, const EnergyGeometry& geom) {
    State out(y.size());
    out.u[0] = project_p(y, geom) * std::sqrt(geom.op().length());
    return out;
}

State project_q(const State& y, const EnergyGeometry& geom) {
    State out = y;
    out.u[0] -= project_p(y, geom) * std::sqrt(geom.op().length());
    return out;
}

double q_norm(const State& y, const EnergyGeometry& geom) {
    return energy_norm(project_q(y, geom), geom);
}

TorusCoordinate torus_reduce(double s) {
    double p = std::fmod(s, kTwoPi);
    if (p < 0) p += kTwoPi;
    if (p >= kTwoPi) p = 0;
    return {p};
}

double wrapped_distance(double p1, double p2) {
    const double d = torus_reduce(p1 - p2).p;
    return std::min(d, kTwoPi - d);
}

State shift_along_eta0(State y, double s, const EnergyGeometry& geom) {
    y.u[0] += s * std::sqrt(geom.op().length());
    return y;
}

State p0_state(std::size_t n, const SpectralOperator& op) {
    State out(n);
    out.u[0] = kTwoPi * std::sqrt(op.length());
    return out;
}

}  // namespace sgrd
