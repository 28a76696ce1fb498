#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "sgrd/spectral.hpp"

namespace sgrd {

//! Independent RNG streams derived from one master seed.
enum class StreamKind : std::uint32_t {
    increments = 0,
    stationary = 1,
    burn_in = 2,
    initial_data = 3,
};

/// Deterministic engine for (seed, realization, kind, component).
[[nodiscard]] std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t realization_id,
                                          StreamKind kind, std::uint32_t component);

//---------------------------------------------------------------------------//
/*!
 * A discretized two-sided Wiener path with m components on the grid
 * t_k = t0 + k dt, k = 0..n_steps. The grid contains t = 0 and the cumulative
 * path is pinned to exactly zero there.
 */
class NoisePath {
  public:
    /// t0 = -zero_index * dt; increments are component-major, m x n_steps.
    NoisePath(int m, double dt, std::size_t zero_index, std::size_t n_steps,
              std::vector<double> increments);

    [[nodiscard]] int components() const noexcept { return m_; }
    [[nodiscard]] std::size_t n_steps() const noexcept { return n_steps_; }
    [[nodiscard]] std::size_t n_points() const noexcept { return n_steps_ + 1; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] double t0() const noexcept { return t0_; }
    [[nodiscard]] double t1() const noexcept { return time(n_steps_); }
    [[nodiscard]] std::size_t zero_index() const noexcept { return zero_index_; }

    /// Grid time of index k, computed relative to the zero index.
    [[nodiscard]] double time(std::size_t k) const noexcept;
    /// Index of a grid time; throws ConfigError if t is off-grid or outside.
    [[nodiscard]] std::size_t index_of(double t) const;

    /// W_j(t_{k+1}) - W_j(t_k)
    [[nodiscard]] double increment(int j, std::size_t k) const {
        return increments_[static_cast<std::size_t>(j) * n_steps_ + k];
    }
    [[nodiscard]] std::span<const double> increments(int j) const {
        return {increments_.data() + static_cast<std::size_t>(j) * n_steps_, n_steps_};
    }
    /// omega_j(t_k)
    [[nodiscard]] double omega(int j, std::size_t k) const {
        return cum_[static_cast<std::size_t>(j) * n_points() + k];
    }

    /// theta_s omega for s = shift_steps * dt: same increments, time origin moved to s.
    [[nodiscard]] NoisePath shifted(std::ptrdiff_t shift_steps) const;

    [[nodiscard]] const std::vector<double>& raw_increments() const noexcept { return increments_; }

  private:
    int m_;
    double t0_;
    double dt_;
    std::size_t n_steps_;
    std::size_t zero_index_;
    std::vector<double> increments_;  // component-major, m x n_steps
    std::vector<double> cum_;         // component-major, m x (n_steps + 1)
};

[[nodiscard]] NoisePath sample_path(int m, double t0, double t1, double dt,
                                    std::uint64_t seed, std::uint64_t realization_id);

/// Binary replay format: little-endian f64 header (m, n_steps, dt, t0) followed
/// by the m x n_steps increments, component-major.
void write_increments(const NoisePath& path, const std::filesystem::path& file);
[[nodiscard]] NoisePath read_increments(const std::filesystem::path& file);

//! Values z_j of the stationary OU processes dz + z dt = dW_j at one time.
struct OUState {
    std::vector<double> z;
    double t = 0;
};

[[nodiscard]] OUState ou_init_stationary(int m, std::mt19937_64& rng);
/// z_j <- e^{-dt} z_j + dW_j
[[nodiscard]] OUState ou_advance(const OUState& state, std::span<const double> dw, double dt);

/// sum_j z_j h_j in coefficient space, h_j zero-padded to n_modes.
[[nodiscard]] SpectralField assemble_z(std::span<const double> z,
                                       std::span<const SpectralField> h_fields);
[[nodiscard]] SpectralField assemble_z(const OUState& state,
                                       std::span<const SpectralField> h_fields);

//---------------------------------------------------------------------------//
/*!
 * OU values on every grid point of a path, driven by the path's own
 * increments. The state at the left edge comes from a stationary draw followed
 * by a burn_in interval driven by an independent stream, so every sub-window of
 * the path sees the same z(theta_t omega).
 */
class OuTrack {
  public:
    OuTrack(const NoisePath& path, double burn_in, std::uint64_t seed,
            std::uint64_t realization_id);
    OuTrack(const NoisePath& path, const OUState& left_edge);

    [[nodiscard]] int components() const noexcept { return m_; }
    [[nodiscard]] std::size_t n_points() const noexcept { return n_points_; }
    [[nodiscard]] std::span<const double> at(std::size_t k) const {
        return {z_.data() + k * static_cast<std::size_t>(m_), static_cast<std::size_t>(m_)};
    }
    [[nodiscard]] OUState state(std::size_t k, double t) const;

  private:
    void fill(const NoisePath& path, std::vector<double> z_left);

    int m_;
    std::size_t n_points_;
    std::vector<double> z_;  // point-major, n_points x m
};

struct ZSample {
    double t;
    SpectralField z;
};

//! Empirical sup of e^{-eps|t|} ||z||, ||A^{1/2} z||, ||A z|| over a window.
struct TemperedBoundEstimate {
    double r = 0;
    double r_prime = 0;
    double r_double_prime = 0;
    double epsilon = 0;
};

[[nodiscard]] TemperedBoundEstimate estimate_tempered_bounds(std::span<const ZSample> history,
                                                             const SpectralOperator& op,
                                                             double epsilon);

/// Same estimate streamed over grid indices [k_begin, k_end] of a track.
[[nodiscard]] TemperedBoundEstimate estimate_tempered_bounds(const NoisePath& path,
                                                             const OuTrack& track,
                                                             std::span<const SpectralField> h_fields,
                                                             const SpectralOperator& op,
                                                             double epsilon, std::size_t k_begin,
                                                             std::size_t k_end);

}  // namespace sgrd
