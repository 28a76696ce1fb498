#pragma once

#include <numbers>

#include "sgrd/spectral.hpp"

namespace sgrd {

//! Cocycle state Y = (u, v) with v = u_t - z.
struct State {
    SpectralField u;
    SpectralField v;

    State() = default;
    explicit State(std::size_t n) : u(n), v(n) {}
    State(SpectralField uu, SpectralField vv);

    [[nodiscard]] std::size_t size() const noexcept { return u.size(); }

    State& operator+=(const State& o);
    State& operator-=(const State& o);
    State& operator*=(double s);
    friend State operator+(State a, const State& b) { return a += b; }
    friend State operator-(State a, const State& b) { return a -= b; }
    friend State operator*(double s, State a) { return a *= s; }
    friend bool operator==(const State&, const State&) = default;
};

//! Reduced coordinate along eta_0 = (1, 0); p ~ p + 2 pi.
struct TorusCoordinate {
    double p = 0;
};

inline constexpr double kTwoPi = 2 * std::numbers::pi;

//---------------------------------------------------------------------------//
/*!
 * Energy inner product on E = H^1 x L^2:
 *
 *   <Y1,Y2>_E = a^2/4 <u1,u2> + <a/2 u1 + v1, a/2 u2 + v2>
 *             + <A^{1/2} u1, A^{1/2} u2> - delta lambda_1 <u1 - mean, u2 - mean>
 *
 * with a = alpha. In coefficient space the last two terms act on modes i >= 1
 * with weight (lambda_i - delta lambda_1). The splitting E = E_1 + E_2 uses
 * eta_0 = (1, 0) and eta_{-1} = (1, -alpha) on the mean mode.
 */
class EnergyGeometry {
  public:
    EnergyGeometry(double alpha, double delta, const SpectralOperator& op);

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double delta() const noexcept { return delta_; }
    [[nodiscard]] double lambda1() const noexcept { return lambda1_; }
    [[nodiscard]] const SpectralOperator& op() const noexcept { return *op_; }

    /// ||eta_0||_E = alpha sqrt(L/2)
    [[nodiscard]] double eta0_norm() const noexcept { return eta0_norm_; }

    /// Smallest eigenvalue of the 2x2 form of mode i (i >= 1) in the fluctuation block.
    [[nodiscard]] double min_mode_eigenvalue(int i) const;

  private:
    double alpha_;
    double delta_;
    double lambda1_;
    double eta0_norm_;
    const SpectralOperator* op_;
};

[[nodiscard]] double energy_inner(const State& y1, const State& y2, const EnergyGeometry& geom);
[[nodiscard]] double energy_norm(const State& y, const EnergyGeometry& geom);
/// Usual H^1 x L^2 norm: ||grad u||^2 + ||u||^2 + ||v||^2.
[[nodiscard]] double h1l2_norm(const State& y, const EnergyGeometry& geom);
/// Graph-norm ||Y||_E + ||C Y||_E on the truncated space.
[[nodiscard]] double graph_norm(const State& y, const EnergyGeometry& geom);

/// s = mean(u) + mean(v)/alpha, the eta_0 coordinate of PY (unreduced).
[[nodiscard]] double project_p(const State& y, const EnergyGeometry& geom);
/// PY = s eta_0.
[[nodiscard]] State p_part(const State& y, const EnergyGeometry& geom);
/// QY = Y - s eta_0.
[[nodiscard]] State project_q(const State& y, const EnergyGeometry& geom);
/// ||QY||_E
[[nodiscard]] double q_norm(const State& y, const EnergyGeometry& geom);

/// Representative in [0, 2 pi).
[[nodiscard]] TorusCoordinate torus_reduce(double s);
/// Distance on the circle R / 2 pi Z.
[[nodiscard]] double wrapped_distance(double p1, double p2);

/// Y + s eta_0
[[nodiscard]] State shift_along_eta0(State y, double s, const EnergyGeometry& geom);
/// p_0 = (2 pi, 0)
[[nodiscard]] State p0_state(std::size_t n, const SpectralOperator& op);

}  // namespace sgrd
