#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sgrd/dynamics.hpp"

namespace sgrd {

//! Endpoint rotation-number estimates with their per-IC spread kept visible.
struct RotationEstimate {
    double rho_hat = 0;       // mean over realizations of the per-realization mean
    double T = 0;
    double ci_halfwidth = 0;  // 1.96 sd / sqrt(n) across realizations (0 for one realization)
    double realization_spread = 0;  // max - min of per-realization means
    double max_ic_spread = 0;       // worst max pairwise |rho_i - rho_j| within a realization
    double ic_tolerance = 0;        // agreement tolerance at this T
    bool ics_agree = false;
    std::vector<std::vector<double>> per_ic;  // [realization][ic]
    std::vector<double> realization_means;
    std::string method = "endpoint";
};

/// (s(T) - s(0)) / T along the unreduced eta_0 coordinate, integrating [0, T].
[[nodiscard]] double estimate_rho(const Model& model, const NoiseContext& noise, const State& y0,
                                  double horizon, TrajectoryRecord* record = nullptr,
                                  std::size_t record_every = 0);

/// Finite-T agreement tolerance used for per-IC comparisons:
/// max(rel * |rho|, safety * 2 n 2 pi / T) with n = 1 (ICs within one period).
[[nodiscard]] double ic_agreement_tolerance(double rho, double horizon, double rel = 0.02,
                                            double safety = 2.0);

struct EnsembleOptions {
    std::size_t n_realizations = 1;
    std::size_t n_ics = 8;
    double ic_scale = 1.0;
    int workers = 1;
    std::size_t record_every = 0;               // > 0 keeps per-trajectory records
    std::vector<TrajectoryRecord>* records = nullptr;  // filled [realization * n_ics + ic]
};

[[nodiscard]] RotationEstimate ensemble_rho(const Model& model, double horizon,
                                            const EnsembleOptions& options = {});

struct OrderReport {
    std::size_t violations = 0;    // adjacent inversions beyond tol, summed over record times
    double max_gap_inversion = 0;  // largest s_i - s_{i+1} seen (0 if none)
    std::size_t records = 0;
};

/// Integrate points (sorted by unreduced s within one period) against one path
/// and count adjacent-pair order inversions, the seam pair included.
[[nodiscard]] OrderReport order_check(const Model& model, const NoiseContext& noise,
                                      const std::vector<State>& points, double horizon,
                                      std::size_t record_every = 1, double tol = 1e-8,
                                      int workers = 1);

/// CSV: t, s_unreduced, s_mod2pi, q_norm.
void write_trajectory_csv(const TrajectoryRecord& rec, const std::filesystem::path& file);

}  // namespace sgrd
