#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgrd/core.hpp"

namespace sgrd {

enum class ExperimentKind { check_params, simulate, attractor, rotation, sweep };

[[nodiscard]] std::string_view kind_name(ExperimentKind kind);
/// Throws ConfigError naming the valid kinds.
[[nodiscard]] ExperimentKind parse_kind(std::string_view name);

/*!
 * Everything a run needs. Built by load_config from a flat key = value text;
 * `resolved_text` regenerates an equivalent document with every default spelled
 * out, which is what the manifest stores.
 */
struct ExperimentConfig {
    Params params;
    ExperimentKind kind = ExperimentKind::check_params;

    // simulate / rotation
    double horizon = 10.0;              // key T
    std::size_t record_every = 100;     // steps between trajectory records
    std::vector<double> u0_coeffs;
    std::vector<double> v0_coeffs;

    // attractor
    std::vector<double> t_ladder{10, 20, 30, 40, 50, 60};
    std::size_t n_p = 128;
    double curve_tol = 1e-4;
    double resample_interval = 1.0;
    std::size_t n_validation = 32;

    // rotation
    std::size_t n_realizations = 1;
    std::size_t n_ics = 8;
    double ic_scale = 1.0;
    std::size_t order_points = 0;       // 0 skips the order check

    // sweep
    std::vector<double> sweep_alpha;
    std::vector<double> sweep_kappa;
    double sweep_curve_T = 20.0;
    std::size_t sweep_n_p = 32;
    double sweep_rotation_T = 200.0;

    std::filesystem::path out_dir = "out";
    int workers = 1;

    /// Canonical text of every key except out_dir and workers (they do not
    /// change numeric output).
    [[nodiscard]] std::string resolved_text() const;
};

/// Parse and validate. Unknown keys name the nearest valid key; duplicates and
/// missing alpha / kappa are rejected.
[[nodiscard]] ExperimentConfig load_config(std::string_view text);
[[nodiscard]] ExperimentConfig load_config_file(const std::filesystem::path& file);

/// Help text listing every key with its default.
[[nodiscard]] std::string config_reference();

//! One sweep grid point, materialized before any job runs.
struct SweepJob {
    std::size_t index = 0;
    double alpha = 0;
    double kappa = 0;
    std::uint64_t seed = 0;
};

/// Lexicographic over (alpha, kappa) with seeds from (master seed, grid index).
[[nodiscard]] std::vector<SweepJob> sweep_jobs(const ExperimentConfig& config);
[[nodiscard]] std::uint64_t job_seed(std::uint64_t master, std::uint64_t index);

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_blowup = 3, exit_io = 4 };

/// Run the experiment, writing manifest.json, summary.json and CSVs to
/// config.out_dir. Errors are reported on `err` and mapped to exit codes.
int run(const ExperimentConfig& config, std::ostream& err);

}  // namespace sgrd
