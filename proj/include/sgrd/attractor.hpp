#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sgrd/core.hpp"
#include "sgrd/dynamics.hpp"
#include "sgrd/geometry.hpp"
#include "sgrd/noise.hpp"

namespace sgrd {

//---------------------------------------------------------------------------//
/*!
 * Graph p -> (p eta_0 + Phi(p)) over a uniform grid of one torus period.
 *
 * phi_points hold Q-components only (P part zero). Periodicity under
 * p -> p + 2 pi n is structural: only one period is stored.
 */
struct HorizontalCurve {
    std::vector<double> p_grid;
    std::vector<State> phi_points;
    int period_multiple = 1;

    [[nodiscard]] std::size_t size() const noexcept { return p_grid.size(); }
    [[nodiscard]] double period() const noexcept { return kTwoPi * period_multiple; }
    /// Full state p_i eta_0 + Phi(p_i).
    [[nodiscard]] State point(std::size_t i, const EnergyGeometry& geom) const;
    /// Piecewise-linear Phi at an arbitrary (unreduced) p.
    [[nodiscard]] State phi_at(double p) const;
};

/// Uniform p-grid with Phi == Q(phi) everywhere.
[[nodiscard]] HorizontalCurve flat_curve(std::size_t n_p, const State& phi,
                                         const EnergyGeometry& geom);
/// Flat curve with Phi == c e_1 in the u slot (c = 0 gives the line of constants).
[[nodiscard]] HorizontalCurve flat_curve(std::size_t n_p, std::size_t n_modes, double c,
                                         const EnergyGeometry& geom);

//---------------------------------------------------------------------------//
// Radii from the dissipativity estimates.

[[nodiscard]] double absorbing_radius(const ConstantsLedger& ledger,
                                      const TemperedBoundEstimate& bounds);
[[nodiscard]] double attracting_radius(const ConstantsLedger& ledger,
                                       const TemperedBoundEstimate& bounds);

struct AbsorbingRow {
    double horizon = 0;
    double max_q_norm = 0;
    double max_graph_norm = 0;
    bool inside = false;  // max_q_norm <= r0
};

struct AbsorbingReport {
    double r0 = 0;
    double r1 = 0;
    TemperedBoundEstimate bounds;
    std::vector<AbsorbingRow> rows;
    std::optional<double> entry_horizon;  // smallest T after which every row is inside
};

/// Pullback every IC from each horizon to 0 and compare ||QY(0)||_E against R0
/// evaluated with bounds estimated on the noise window.
[[nodiscard]] AbsorbingReport absorbing_check(const Model& model, const NoiseContext& noise,
                                              const std::vector<State>& ics,
                                              const std::vector<double>& horizons,
                                              int workers = 1);

/// Empirical tempered bounds of z on [t0, 0] of the noise window with eps = a/2.
[[nodiscard]] TemperedBoundEstimate window_bounds(const Model& model, const NoiseContext& noise,
                                                  double epsilon);

//---------------------------------------------------------------------------//
struct LipschitzRecord {
    double max_ratio = 0;
    std::size_t worst_i = 0;
    std::size_t worst_j = 0;
};

enum class PMetric { wrapped, unwrapped };

/// max over pairs ||Phi_i - Phi_j||_E / (|p_i - p_j| ||eta_0||_E).
[[nodiscard]] LipschitzRecord lipschitz_verify(const HorizontalCurve& curve,
                                               const EnergyGeometry& geom,
                                               PMetric metric = PMetric::wrapped);
/// Same ratio over arbitrary states, with p = s (their eta_0 coordinates).
[[nodiscard]] LipschitzRecord lipschitz_verify(const std::vector<State>& states,
                                               const EnergyGeometry& geom,
                                               PMetric metric = PMetric::wrapped);

/// max ||Q(Y_i - Y_j)||_E over pairs whose wrapped p-distance is below p_tol.
/// Throws UsageError when fewer than 2 states or no pair matches.
[[nodiscard]] double q_spread(const std::vector<State>& states, const EnergyGeometry& geom,
                              double p_tol);

/// sup over matched grid points of ||Phi_1(p_j) - Phi_2(p_j)||_E.
[[nodiscard]] double hausdorff(const HorizontalCurve& a, const HorizontalCurve& b,
                               const EnergyGeometry& geom);

/// ||QY - Phi(s(Y))||_E, the transverse distance of a state to the curve.
[[nodiscard]] double curve_distance(const State& y, const HorizontalCurve& curve,
                                    const EnergyGeometry& geom);

//---------------------------------------------------------------------------//
struct ResampleSpec {
    double interval = 1.0;        // re-parameterize at absolute times k * interval
    std::size_t checkpoints = 0;  // Lipschitz ratios at this many evenly spaced times
    double order_tol = 1e-8;
    int workers = 1;
};

struct CurveCheckpoint {
    double t = 0;
    double lipschitz = 0;  // raw image points, before re-parameterization
};

struct CurveEvolution {
    HorizontalCurve curve;
    std::vector<CurveCheckpoint> checkpoints;
    std::size_t order_violations = 0;  // adjacent image pairs with s inverted beyond order_tol
    double max_order_inversion = 0;
    bool regime_warning = false;       // regime_1d false for these params
};

/// Image of the curve under the pullback flow from -T to 0, re-parameterized by
/// the eta_0 coordinate onto the uniform p-grid.
[[nodiscard]] CurveEvolution evolve_curve(const Model& model, const HorizontalCurve& curve,
                                          const NoiseContext& noise, double horizon,
                                          const ResampleSpec& spec = {});

/// Re-parameterize curve images (states in grid order) onto a uniform p-grid.
/// Returns the number of order violations through `violations`.
[[nodiscard]] HorizontalCurve reparameterize(const std::vector<State>& images,
                                             const EnergyGeometry& geom, int period_multiple,
                                             double order_tol, std::size_t* violations = nullptr,
                                             double* max_inversion = nullptr);

//---------------------------------------------------------------------------//
struct AttractorOptions {
    std::size_t n_p = 128;
    double curve_tol = 1e-4;
    double seed_constant = 0.0;
    std::size_t n_validation = 32;
    double validation_scale = 10.0;        // Q-norm scale of random validation ICs
    std::vector<double> rate_horizons{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    double rate_floor = 1e-9;              // fit uses residuals above max(rate_floor, 10 q_residual)
    ResampleSpec resample{};
    std::uint64_t validation_seed = 0;     // 0: derive from the noise seed
};

struct AttractorEstimate {
    HorizontalCurve curve;
    double pullback_T = 0;
    double q_residual = 0;
    double hausdorff_step = 0;             // last computed successive distance
    bool converged = false;
    std::optional<double> converged_at;    // T whose successor is within curve_tol
    std::vector<double> ladder;
    std::vector<double> hausdorff_steps;   // d_H(curve_{T_k}, curve_{T_{k+1}})
    std::vector<double> lipschitz;         // per ladder entry
    std::size_t order_violations = 0;
    std::optional<double> transverse_rate;  // fitted decay rate of validation residuals
    std::vector<std::pair<double, double>> rate_samples;  // (horizon, max residual)
    RegimeFlags regime;
};

[[nodiscard]] AttractorEstimate estimate_attractor(const Model& model, const NoiseContext& noise,
                                                   const std::vector<double>& ladder,
                                                   const AttractorOptions& options = {});

/// Random ICs with Q-norm about `scale` and P coordinate uniform on [0, 2 pi).
[[nodiscard]] std::vector<State> random_ics(const Model& model, std::size_t count, double scale,
                                            std::uint64_t seed, std::uint64_t stream);

/// CSV: p, u_1..u_{N-1}, v_0 (mean residual), v_1..v_{N-1}.
void write_curve_csv(const HorizontalCurve& curve, const std::filesystem::path& file,
                     const std::string& manifest_ref);

}  // namespace sgrd
