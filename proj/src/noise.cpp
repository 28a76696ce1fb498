#include "sgrd/noise.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "sgrd/error.hpp"
#include "le_io.hpp"

namespace sgrd {

namespace {

std::size_t grid_steps(double span, double dt, const char* what) {
    const double steps = span / dt;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps))
        throw ConfigError(fmt::format("{} = {} is not a multiple of dt = {}", what, span, dt));
    return static_cast<std::size_t>(rounded);
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t realization_id, StreamKind kind,
                            std::uint32_t component) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(realization_id),
                      static_cast<std::uint32_t>(realization_id >> 32),
                      static_cast<std::uint32_t>(kind), component};
    return std::mt19937_64(seq);
}

//---------------------------------------------------------------------------//
NoisePath::NoisePath(int m, double dt, std::size_t zero_index, std::size_t n_steps,
                     std::vector<double> increments)
    : m_(m), t0_(0), dt_(dt), n_steps_(n_steps), zero_index_(zero_index),
      increments_(std::move(increments)) {
    if (m < 0) throw ShapeError("NoisePath: negative component count");
    if (!(dt > 0)) throw ConfigError("NoisePath: dt must be > 0");
    if (n_steps_ * static_cast<std::size_t>(m) != increments_.size())
        throw ShapeError("NoisePath: increment array is not m x n_steps");
    if (zero_index_ > n_steps_) throw ConfigError("NoisePath: grid does not contain t = 0");
    t0_ = -static_cast<double>(zero_index_) * dt_;

    const std::size_t np = n_points();
    cum_.assign(static_cast<std::size_t>(m) * np, 0.0);
    for (int j = 0; j < m; ++j) {
        double* w = cum_.data() + static_cast<std::size_t>(j) * np;
        const double* dw = increments_.data() + static_cast<std::size_t>(j) * n_steps_;
        w[zero_index_] = 0.0;
        for (std::size_t k = zero_index_; k < n_steps_; ++k) w[k + 1] = w[k] + dw[k];
        for (std::size_t k = zero_index_; k > 0; --k) w[k - 1] = w[k] - dw[k - 1];
    }
}

double NoisePath::time(std::size_t k) const noexcept {
    return (static_cast<double>(k) - static_cast<double>(zero_index_)) * dt_;
}

std::size_t NoisePath::index_of(double t) const {
    const double rel = t / dt_ + static_cast<double>(zero_index_);
    const double k = std::round(rel);
    if (std::abs(rel - k) > 1e-6 || k < 0 || k > static_cast<double>(n_steps_))
        throw ConfigError(fmt::format("time {} is not a grid point of the path window [{}, {}]",
                                      t, t0(), t1()));
    return static_cast<std::size_t>(k);
}

NoisePath NoisePath::shifted(std::ptrdiff_t shift_steps) const {
    const auto z = static_cast<std::ptrdiff_t>(zero_index_) + shift_steps;
    if (z < 0 || z > static_cast<std::ptrdiff_t>(n_steps_))
        throw ConfigError("NoisePath::shifted: shift leaves the path window");
    return {m_, dt_, static_cast<std::size_t>(z), n_steps_, increments_};
}

NoisePath sample_path(int m, double t0, double t1, double dt, std::uint64_t seed,
                      std::uint64_t realization_id) {
    if (!(dt > 0)) throw ConfigError("sample_path: dt must be > 0");
    if (t0 > 0 || t1 < 0)
        throw ConfigError(fmt::format("sample_path: window [{}, {}] does not contain t = 0", t0, t1));
    const std::size_t back = grid_steps(-t0, dt, "|t0|");
    const std::size_t fwd = grid_steps(t1, dt, "t1");
    const std::size_t n = back + fwd;
    std::vector<double> inc(static_cast<std::size_t>(m) * n);
    std::normal_distribution<double> gauss(0.0, std::sqrt(dt));
    // Forward and backward halves come from separate streams anchored at t = 0,
    // so windows sharing a seed agree on every common increment.
    for (int j = 0; j < m; ++j) {
        double* row = inc.data() + static_cast<std::size_t>(j) * n;
        auto fwd_rng = make_stream(seed, realization_id, StreamKind::increments,
                                   2 * static_cast<std::uint32_t>(j));
        auto back_rng = make_stream(seed, realization_id, StreamKind::increments,
                                    2 * static_cast<std::uint32_t>(j) + 1);
        for (std::size_t k = 0; k < fwd; ++k) row[back + k] = gauss(fwd_rng);
        gauss.reset();
        for (std::size_t k = 0; k < back; ++k) row[back - 1 - k] = gauss(back_rng);
        gauss.reset();
    }
    return {m, dt, back, n, std::move(inc)};
}

void write_increments(const NoisePath& path, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", file.string()));
    auto put = [&](double x) { detail::put_f64(out, x); };
    put(static_cast<double>(path.components()));
    put(static_cast<double>(path.n_steps()));
    put(path.dt());
    put(path.t0());
    for (double x : path.raw_increments()) put(x);
    if (!out) throw IoError(fmt::format("write failed for {}", file.string()));
}

NoisePath read_increments(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {} for reading", file.string()));
    auto get = [&]() {
        double x = 0;
        if (!detail::get_f64(in, x))
            throw IoError(fmt::format("truncated increment file {}", file.string()));
        return x;
    };
    const double m = get();
    const double n = get();
    const double dt = get();
    const double t0 = get();
    if (m < 0 || n < 0 || m != std::floor(m) || n != std::floor(n) || !(dt > 0))
        throw IoError(fmt::format("malformed header in {}", file.string()));
    std::vector<double> inc(static_cast<std::size_t>(m) * static_cast<std::size_t>(n));
    for (double& x : inc) x = get();
    return {static_cast<int>(m), dt, grid_steps(-t0, dt, "|t0|"), static_cast<std::size_t>(n),
            std::move(inc)};
}

//---------------------------------------------------------------------------//
OUState ou_init_stationary(int m, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    OUState s;
    s.z.resize(static_cast<std::size_t>(m));
    for (double& z : s.z) z = gauss(rng);
    return s;
}

OUState ou_advance(const OUState& state, std::span<const double> dw, double dt) {
    if (dw.size() != state.z.size()) throw ShapeError("ou_advance: increment count mismatch");
    const double decay = std::exp(-dt);
    OUState next{state.z, state.t + dt};
    for (std::size_t j = 0; j < next.z.size(); ++j) next.z[j] = decay * state.z[j] + dw[j];
    return next;
}

SpectralField assemble_z(std::span<const double> z, std::span<const SpectralField> h_fields) {
    if (z.size() != h_fields.size())
        throw ShapeError(fmt::format("assemble_z: {} OU values for {} noise shapes", z.size(),
                                     h_fields.size()));
    if (h_fields.empty()) return {};
    SpectralField out(h_fields[0].size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        if (h_fields[j].size() != out.size()) throw ShapeError("assemble_z: ragged noise shapes");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += z[j] * h_fields[j][i];
    }
    return out;
}

SpectralField assemble_z(const OUState& state, std::span<const SpectralField> h_fields) {
    return assemble_z(std::span<const double>(state.z), h_fields);
}

//---------------------------------------------------------------------------//
OuTrack::OuTrack(const NoisePath& path, double burn_in, std::uint64_t seed,
                 std::uint64_t realization_id)
    : m_(path.components()), n_points_(path.n_points()) {
    std::vector<double> z(static_cast<std::size_t>(m_));
    const std::size_t burn_steps =
        burn_in > 0 ? static_cast<std::size_t>(std::llround(burn_in / path.dt())) : 0;
    const double decay = std::exp(-path.dt());
    for (int j = 0; j < m_; ++j) {
        auto init = make_stream(seed, realization_id, StreamKind::stationary,
                                static_cast<std::uint32_t>(j));
        std::normal_distribution<double> stat(0.0, std::sqrt(0.5));
        double zj = stat(init);
        auto burn = make_stream(seed, realization_id, StreamKind::burn_in,
                                static_cast<std::uint32_t>(j));
        std::normal_distribution<double> gauss(0.0, std::sqrt(path.dt()));
        for (std::size_t k = 0; k < burn_steps; ++k) zj = decay * zj + gauss(burn);
        z[static_cast<std::size_t>(j)] = zj;
    }
    fill(path, std::move(z));
}

OuTrack::OuTrack(const NoisePath& path, const OUState& left_edge)
    : m_(path.components()), n_points_(path.n_points()) {
    if (left_edge.z.size() != static_cast<std::size_t>(m_))
        throw ShapeError("OuTrack: initial state has wrong component count");
    fill(path, left_edge.z);
}

void OuTrack::fill(const NoisePath& path, std::vector<double> z_left) {
    const auto m = static_cast<std::size_t>(m_);
    z_.resize(n_points_ * m);
    std::copy(z_left.begin(), z_left.end(), z_.begin());
    const double decay = std::exp(-path.dt());
    for (std::size_t k = 0; k + 1 < n_points_; ++k) {
        for (std::size_t j = 0; j < m; ++j)
            z_[(k + 1) * m + j] = decay * z_[k * m + j] + path.increment(static_cast<int>(j), k);
    }
}

OUState OuTrack::state(std::size_t k, double t) const {
    const auto v = at(k);
    return {{v.begin(), v.end()}, t};
}

//---------------------------------------------------------------------------//
namespace {

void accumulate_bounds(TemperedBoundEstimate& est, double t, std::span<const double> z,
                       const SpectralOperator& op) {
    const double w = std::exp(-est.epsilon * std::abs(t));
    est.r = std::max(est.r, w * l2_norm(z));
    est.r_prime = std::max(est.r_prime, w * half_a_norm(z, op));
    est.r_double_prime = std::max(est.r_double_prime, w * a_norm(z, op));
}

}  // namespace

TemperedBoundEstimate estimate_tempered_bounds(std::span<const ZSample> history,
                                               const SpectralOperator& op, double epsilon) {
    if (history.empty()) throw UsageError("estimate_tempered_bounds: empty history");
    if (!(epsilon > 0)) throw UsageError("estimate_tempered_bounds: epsilon must be > 0");
    TemperedBoundEstimate est;
    est.epsilon = epsilon;
    for (const auto& s : history) accumulate_bounds(est, s.t, s.z.coeffs, op);
    return est;
}

TemperedBoundEstimate estimate_tempered_bounds(const NoisePath& path, const OuTrack& track,
                                               std::span<const SpectralField> h_fields,
                                               const SpectralOperator& op, double epsilon,
                                               std::size_t k_begin, std::size_t k_end) {
    if (k_begin > k_end || k_end >= track.n_points())
        throw UsageError("estimate_tempered_bounds: empty or out-of-range window");
    if (!(epsilon > 0)) throw UsageError("estimate_tempered_bounds: epsilon must be > 0");
    TemperedBoundEstimate est;
    est.epsilon = epsilon;
    if (h_fields.empty()) return est;
    for (std::size_t k = k_begin; k <= k_end; ++k) {
        const SpectralField z = assemble_z(track.at(k), h_fields);
        accumulate_bounds(est, path.time(k), z.coeffs, op);
    }
    return est;
}

}  // namespace sgrd
