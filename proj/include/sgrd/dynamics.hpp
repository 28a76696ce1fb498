#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "sgrd/core.hpp"
#include "sgrd/geometry.hpp"
#include "sgrd/noise.hpp"
#include "sgrd/spectral.hpp"

namespace sgrd {

//! Row-major 2x2 block acting on one (u_i, v_i) mode pair.
struct Mat2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
};

//---------------------------------------------------------------------------//
/*!
 * Exact linear propagators of C = [[0, I], [-A, -alpha I]] for one time step,
 * mode by mode: E_i = exp(C_i dt) and Phi_i = int_0^dt exp(C_i s) ds
 * (= dt phi_1(C_i dt)).
 *
 * Both use (C_i - m I)^2 = d^2 I with m = -alpha/2 and d^2 = alpha^2/4 - lambda_i,
 * which covers the real, complex and defective eigenvalue cases with one
 * formula; small |d| dt switches to a Taylor series in d^2.
 */
struct Propagator {
    double dt = 0;
    double alpha = 0;
    std::vector<Mat2> e;
    std::vector<Mat2> phi;
};

[[nodiscard]] Mat2 mode_exponential(double alpha, double lambda, double dt);
[[nodiscard]] Mat2 mode_phi(double alpha, double lambda, double dt);
[[nodiscard]] Propagator build_propagator(const SpectralOperator& op, double alpha, double dt);
/// Y <- E Y (the linear flow only).
void apply_linear(const Propagator& prop, State& y);

//! A sampled Wiener path together with the OU values it drives.
struct NoiseContext {
    NoisePath path;
    OuTrack track;
    std::uint64_t seed = 0;
    std::uint64_t realization_id = 0;

    /// theta_s omega for s = steps * dt (same arrays, shifted origin).
    [[nodiscard]] NoiseContext shifted(std::ptrdiff_t steps) const;
};

/// Path on [t0, t1] with the params' dt and noise count; OU burned in before t0.
[[nodiscard]] NoiseContext make_noise(const Params& params, double t0, double t1,
                                      std::uint64_t realization_id);
[[nodiscard]] NoiseContext make_noise(const Params& params, double t0, double t1,
                                      std::uint64_t seed, std::uint64_t realization_id);

//! Random forcing term z(theta_t omega) on the grid of a NoiseContext.
[[nodiscard]] SpectralField z_field(const NoiseContext& noise, std::size_t k,
                                    std::span<const SpectralField> h_fields);

//---------------------------------------------------------------------------//
/*!
 * Immutable description of the transformed system
 *   u' = v + z,   v' = -A u - alpha v - sin u + f + (1 - alpha) z
 * at a fixed step size. Shareable across threads.
 */
class Model {
  public:
    explicit Model(Params params);

    [[nodiscard]] const Params& params() const noexcept { return params_; }
    [[nodiscard]] const SpectralOperator& op() const noexcept { return op_; }
    [[nodiscard]] const EnergyGeometry& geometry() const noexcept { return geom_; }
    [[nodiscard]] const Propagator& propagator() const noexcept { return prop_; }
    [[nodiscard]] const SpectralField& forcing() const noexcept { return f_; }
    [[nodiscard]] std::span<const SpectralField> noise_shapes() const noexcept { return h_; }
    [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(op_.n_modes()); }

    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

  private:
    Params params_;
    SpectralOperator op_;
    EnergyGeometry geom_;
    Propagator prop_;
    SpectralField f_;
    std::vector<SpectralField> h_;
};

/// F(theta_t omega, Y) = (z, -sin u + f + (1 - alpha) z), sin u evaluated on the
/// collocation grid.
[[nodiscard]] State nonlinearity(const State& y, const SpectralField& z, const SpectralField& f,
                                 double alpha, const SpectralOperator& op);

//! Exponential-Euler stepping with private scratch buffers (one per thread).
class Stepper {
  public:
    explicit Stepper(const Model& model);

    /// One step from grid index k to k + 1 of the noise grid:
    /// Y <- E Y + Phi F(t_k, Y). Throws BlowUpError on non-finite output.
    void step(State& y, const NoiseContext& noise, std::size_t k);
    /// One step with an explicit z field (zero-noise and unit tests).
    void step(State& y, const SpectralField& z, double t);

  private:
    void step_impl(State& y, const double* z, double t);

    const Model* model_;
    std::vector<double> samples_;
    std::vector<double> sin_hat_;
    std::vector<double> z_;
};

//! What to keep while integrating.
struct RecordSpec {
    std::size_t every_steps = 0;           // 0: endpoints only
    std::vector<double> checkpoint_times;  // full states kept at these grid times
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> s;       // unreduced eta_0 coordinate
    std::vector<double> q_norm;  // ||QY||_E
    std::vector<std::pair<double, State>> checkpoints;
    State final_state;
    std::uint64_t seed = 0;
    std::uint64_t realization_id = 0;
};

using StepObserver = std::function<void(std::size_t k, const State& y)>;

/// Advance y over grid indices [k_begin, k_end], calling observer (if set)
/// after each step with the new index.
void advance(const Model& model, State& y, const NoiseContext& noise, std::size_t k_begin,
             std::size_t k_end, const StepObserver& observer = {});

[[nodiscard]] TrajectoryRecord integrate(const Model& model, const State& y0,
                                         const NoiseContext& noise, double t_begin,
                                         double t_end, const RecordSpec& spec = {});

/// Y(T, theta_{-T} omega, Y0): integrate from grid time -T to 0.
[[nodiscard]] State pullback_solve(const Model& model, const State& y0,
                                   const NoiseContext& noise, double horizon);

/// Untransformed solution map: (u0, u1) -> Y0 = (u0, u1 - z(t_begin)), integrate,
/// then add (0, z(t_end)).
[[nodiscard]] State phi_solution(const Model& model, const State& phi0,
                                 const NoiseContext& noise, double t_begin, double t_end);

/// State dump: little-endian f64 header (n, t) then (u_i, v_i) pairs for i = 0..n-1.
void write_state(const State& y, double t, const std::filesystem::path& file);
[[nodiscard]] std::pair<State, double> read_state(const std::filesystem::path& file);

}  // namespace sgrd
