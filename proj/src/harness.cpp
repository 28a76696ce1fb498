#include "sgrd/harness.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "json.hpp"
#include "sgrd/attractor.hpp"
#include "sgrd/dynamics.hpp"
#include "sgrd/error.hpp"
#include "sgrd/parallel.hpp"
#include "sgrd/rotation.hpp"

#ifndef SGRD_VERSION
#define SGRD_VERSION "unknown"
#endif

namespace sgrd {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 5> kKindNames{"check-params", "simulate", "attractor",
                                                     "rotation", "sweep"};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view key, std::string_view v) {
    double x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
        throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
    return x;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view v) {
    Int x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
        throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, v));
    return x;
}

std::vector<double> parse_list(std::string_view key, std::string_view v) {
    std::vector<double> out;
    if (v.empty()) return out;
    for (auto item : split(v, ';')) out.push_back(parse_double(key, item));
    return out;
}

std::string fmt_list(const std::vector<double>& xs) {
    return fmt::format("{}", fmt::join(xs, "; "));
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] != b[j - 1])});
            diag = up;
        }
    }
    return row[b.size()];
}

struct Key {
    std::string_view name;
    std::string_view help;
    std::function<void(ExperimentConfig&, std::string_view)> set;
    std::function<std::string(const ExperimentConfig&)> get;  // empty: not in resolved text
};

// noise shapes: '|' between shapes, ';' between coefficients
std::vector<std::vector<double>> parse_shapes(std::string_view v) {
    std::vector<std::vector<double>> out;
    if (v.empty()) return out;
    for (auto shape : split(v, '|')) out.push_back(parse_list("h_coeffs", shape));
    return out;
}

std::string fmt_shapes(const std::vector<std::vector<double>>& hs) {
    std::vector<std::string> parts;
    for (const auto& h : hs) parts.push_back(fmt_list(h));
    return fmt::format("{}", fmt::join(parts, " | "));
}

const std::vector<Key>& key_table() {
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        auto dbl = [](double ExperimentConfig::*m) {
            return [m](ExperimentConfig& c, std::string_view v) { c.*m = parse_double("", v); };
        };
        auto size = [](std::size_t ExperimentConfig::*m) {
            return [m](ExperimentConfig& c, std::string_view v) {
                c.*m = parse_int<std::size_t>("", v);
            };
        };
        auto list = [](std::vector<double> ExperimentConfig::*m) {
            return [m](ExperimentConfig& c, std::string_view v) { c.*m = parse_list("", v); };
        };
        auto show_d = [](double ExperimentConfig::*m) {
            return [m](const ExperimentConfig& c) { return fmt::format("{}", c.*m); };
        };
        auto show_s = [](std::size_t ExperimentConfig::*m) {
            return [m](const ExperimentConfig& c) { return fmt::format("{}", c.*m); };
        };
        auto show_l = [](std::vector<double> ExperimentConfig::*m) {
            return [m](const ExperimentConfig& c) { return fmt_list(c.*m); };
        };

        k.push_back({"experiment", "check-params | simulate | attractor | rotation | sweep",
                     [](ExperimentConfig& c, std::string_view v) { c.kind = parse_kind(v); },
                     [](const ExperimentConfig& c) { return std::string(kind_name(c.kind)); }});
        k.push_back({"alpha", "damping (required)",
                     [](ExperimentConfig& c, std::string_view v) { c.params.alpha = parse_double("alpha", v); },
                     [](const ExperimentConfig& c) { return fmt::format("{}", c.params.alpha); }});
        k.push_back({"kappa", "diffusion coefficient K (required)",
                     [](ExperimentConfig& c, std::string_view v) { c.params.kappa = parse_double("kappa", v); },
                     [](const ExperimentConfig& c) { return fmt::format("{}", c.params.kappa); }});
        k.push_back({"delta", "norm parameter in (0, 1] or auto = min(1, alpha^2 / (2 lambda_1)); default auto",
                     [](ExperimentConfig& c, std::string_view v) {
                         if (v == "auto") c.params.delta.reset();
                         else c.params.delta = parse_double("delta", v);
                     },
                     [](const ExperimentConfig& c) {
                         return c.params.delta ? fmt::format("{}", *c.params.delta) : std::string("auto");
                     }});
        k.push_back({"domain_length", "L; default pi",
                     [](ExperimentConfig& c, std::string_view v) { c.params.domain_length = parse_double("domain_length", v); },
                     [](const ExperimentConfig& c) { return fmt::format("{}", c.params.domain_length); }});
        k.push_back({"f_coeffs", "forcing cosine coefficients, ';'-separated; default none",
                     [](ExperimentConfig& c, std::string_view v) { c.params.f_coeffs = parse_list("f_coeffs", v); },
                     [](const ExperimentConfig& c) { return fmt_list(c.params.f_coeffs); }});
        k.push_back({"m", "number of noise shapes; default 1", nullptr, nullptr});  // handled in load_config
        k.push_back({"h_coeffs", "noise shape coefficients, ';' within a shape, '|' between shapes; default 0.1 (h_1 = 0.1 e_0)",
                     nullptr,
                     [](const ExperimentConfig& c) { return fmt_shapes(c.params.h_coeffs); }});
        k.push_back({"n_modes", "Galerkin modes N; default 32",
                     [](ExperimentConfig& c, std::string_view v) { c.params.n_modes = parse_int<int>("n_modes", v); },
                     [](const ExperimentConfig& c) { return fmt::format("{}", c.params.n_modes); }});
        k.push_back({"n_quad", "collocation points; 0 = 2 n_modes; default 0",
                     [](ExperimentConfig& c, std::string_view v) { c.params.n_quad = parse_int<int>("n_quad", v); },
                     [](const ExperimentConfig& c) { return fmt::format("{}", c.params.n_quad); }});
        k.push_back({"dt", "time step; default 1e-3",
                     [](ExperimentConfig& c, std::string_view v) { c.params.dt = parse_double("dt", v); },
                     [](const ExperimentConfig& c) { return fmt::format("{}", c.params.dt); }});
        k.push_back({"burn_in", "OU wash-out time before each window; default 10",
                     [](ExperimentConfig& c, std::string_view v) { c.params.burn_in = parse_double("burn_in", v); },
                     [](const ExperimentConfig& c) { return fmt::format("{}", c.params.burn_in); }});
        k.push_back({"seed", "master seed; default 1",
                     [](ExperimentConfig& c, std::string_view v) { c.params.seed = parse_int<std::uint64_t>("seed", v); },
                     [](const ExperimentConfig& c) { return fmt::format("{}", c.params.seed); }});
        k.push_back({"T", "simulate / rotation horizon; default 10", dbl(&ExperimentConfig::horizon), show_d(&ExperimentConfig::horizon)});
        k.push_back({"record_every", "steps between trajectory records; default 100", size(&ExperimentConfig::record_every), show_s(&ExperimentConfig::record_every)});
        k.push_back({"u0_coeffs", "initial u coefficients (simulate); default 0", list(&ExperimentConfig::u0_coeffs), show_l(&ExperimentConfig::u0_coeffs)});
        k.push_back({"v0_coeffs", "initial v coefficients (simulate); default 0", list(&ExperimentConfig::v0_coeffs), show_l(&ExperimentConfig::v0_coeffs)});
        k.push_back({"t_ladder", "pullback horizons; default 10; 20; 30; 40; 50; 60", list(&ExperimentConfig::t_ladder), show_l(&ExperimentConfig::t_ladder)});
        k.push_back({"n_p", "curve grid points; default 128", size(&ExperimentConfig::n_p), show_s(&ExperimentConfig::n_p)});
        k.push_back({"curve_tol", "successive curve distance for convergence; default 1e-4", dbl(&ExperimentConfig::curve_tol), show_d(&ExperimentConfig::curve_tol)});
        k.push_back({"resample_interval", "curve re-parameterization interval; default 1", dbl(&ExperimentConfig::resample_interval), show_d(&ExperimentConfig::resample_interval)});
        k.push_back({"n_validation", "validation ICs for the curve residual; default 32", size(&ExperimentConfig::n_validation), show_s(&ExperimentConfig::n_validation)});
        k.push_back({"n_realizations", "noise realizations (rotation); default 1", size(&ExperimentConfig::n_realizations), show_s(&ExperimentConfig::n_realizations)});
        k.push_back({"n_ics", "initial conditions per realization; default 8", size(&ExperimentConfig::n_ics), show_s(&ExperimentConfig::n_ics)});
        k.push_back({"ic_scale", "Q-norm scale of random ICs (rotation); default 1", dbl(&ExperimentConfig::ic_scale), show_d(&ExperimentConfig::ic_scale)});
        k.push_back({"order_points", "points for the rotation order check, 0 skips; default 0", size(&ExperimentConfig::order_points), show_s(&ExperimentConfig::order_points)});
        k.push_back({"sweep_alpha", "sweep grid over alpha", list(&ExperimentConfig::sweep_alpha), show_l(&ExperimentConfig::sweep_alpha)});
        k.push_back({"sweep_kappa", "sweep grid over kappa", list(&ExperimentConfig::sweep_kappa), show_l(&ExperimentConfig::sweep_kappa)});
        k.push_back({"sweep_curve_T", "curve horizon per sweep job; default 20", dbl(&ExperimentConfig::sweep_curve_T), show_d(&ExperimentConfig::sweep_curve_T)});
        k.push_back({"sweep_n_p", "curve grid points per sweep job; default 32", size(&ExperimentConfig::sweep_n_p), show_s(&ExperimentConfig::sweep_n_p)});
        k.push_back({"sweep_rotation_T", "rotation horizon per sweep job; default 200", dbl(&ExperimentConfig::sweep_rotation_T), show_d(&ExperimentConfig::sweep_rotation_T)});
        k.push_back({"out_dir", "output directory; default out",
                     [](ExperimentConfig& c, std::string_view v) { c.out_dir = std::string(v); }, nullptr});
        k.push_back({"workers", "worker threads; default 1",
                     [](ExperimentConfig& c, std::string_view v) { c.workers = parse_int<int>("workers", v); }, nullptr});
        return k;
    }();
    return keys;
}

const Key* find_key(std::string_view name) {
    for (const auto& k : key_table())
        if (k.name == name) return &k;
    return nullptr;
}

std::string nearest_key(std::string_view name) {
    std::string best;
    std::size_t best_d = std::string::npos;
    for (const auto& k : key_table()) {
        const auto d = edit_distance(name, k.name);
        if (d < best_d) best_d = d, best = k.name;
    }
    return best;
}

void validate(const ExperimentConfig& c) {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    c.params.validate();
    const auto n = static_cast<std::size_t>(c.params.n_modes);
    if (!(c.horizon >= 0)) fail("T must be >= 0");
    if (c.record_every == 0) fail("record_every must be >= 1");
    if (c.u0_coeffs.size() > n || c.v0_coeffs.size() > n)
        fail("u0_coeffs / v0_coeffs have more entries than n_modes");
    if (c.t_ladder.empty()) fail("t_ladder must not be empty");
    for (std::size_t i = 0; i < c.t_ladder.size(); ++i) {
        if (!(c.t_ladder[i] >= 0)) fail("t_ladder entries must be >= 0");
        if (i > 0 && !(c.t_ladder[i] > c.t_ladder[i - 1])) fail("t_ladder must be increasing");
    }
    if (c.n_p < 4 || c.sweep_n_p < 4) fail("n_p and sweep_n_p must be >= 4");
    if (!(c.curve_tol > 0)) fail("curve_tol must be > 0");
    if (!(c.resample_interval > 0)) fail("resample_interval must be > 0");
    if (c.n_realizations == 0 || c.n_ics == 0) fail("n_realizations and n_ics must be >= 1");
    if (!(c.ic_scale > 0)) fail("ic_scale must be > 0");
    if (c.order_points == 1) fail("order_points must be 0 or >= 2");
    if (!(c.sweep_curve_T > 0) || !(c.sweep_rotation_T > 0))
        fail("sweep_curve_T and sweep_rotation_T must be > 0");
    if (c.kind == ExperimentKind::sweep && (c.sweep_alpha.empty() || c.sweep_kappa.empty()))
        fail("sweep needs non-empty sweep_alpha and sweep_kappa");
    if (c.workers < 1) fail("workers must be >= 1");
}

//---------------------------------------------------------------------------//
// output helpers

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", file.string()));
    out << text;
    if (!out) throw IoError(fmt::format("write failed for {}", file.string()));
}

void write_json(const std::filesystem::path& file, const json& j) {
    write_text(file, j.dump(2) + "\n");
}

json opt_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json regime_json(const RegimeFlags& r) {
    return {{"a_positive", r.a_positive}, {"curve_regime", r.curve_regime},
            {"gamma_exists", r.gamma_exists}};
}

json ledger_json(const ConstantsLedger& l) {
    return {{"alpha", l.alpha},   {"delta", l.delta}, {"lambda1", l.lambda1},
            {"a", l.a},           {"lf_bound", l.lf_bound},
            {"gamma_star", opt_json(l.gamma_star)}, {"M", opt_json(l.big_m)},
            {"a1", l.a1}, {"a2", l.a2}, {"a3", l.a3}, {"a4", l.a4},
            {"a5", l.a5}, {"a6", l.a6}, {"a7", l.a7}, {"regime_1d", l.regime_1d}};
}

json bounds_json(const TemperedBoundEstimate& b) {
    return {{"r", b.r}, {"r_prime", b.r_prime}, {"r_double_prime", b.r_double_prime},
            {"epsilon", b.epsilon}};
}

json params_json(const Params& p) {
    return {{"alpha", p.alpha},
            {"kappa", p.kappa},
            {"delta", p.effective_delta()},
            {"delta_auto", !p.delta.has_value()},
            {"domain_length", p.domain_length},
            {"f_coeffs", p.f_coeffs},
            {"h_coeffs", p.h_coeffs},
            {"m", p.noise_count()}};
}

State initial_state(const ExperimentConfig& c) {
    State y(static_cast<std::size_t>(c.params.n_modes));
    std::copy(c.u0_coeffs.begin(), c.u0_coeffs.end(), y.u.coeffs.begin());
    std::copy(c.v0_coeffs.begin(), c.v0_coeffs.end(), y.v.coeffs.begin());
    return y;
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

//---------------------------------------------------------------------------//
// experiments; each returns (summary, output file names)

struct Outcome {
    json summary;
    std::vector<std::string> outputs;
};

Outcome run_check_params(const ExperimentConfig& c) {
    const auto led = ledger_constants(c.params);
    json pairs = json::array();
    for (const auto& mp : led.mu_pairs)
        pairs.push_back({mp.plus.real(), mp.plus.imag(), mp.minus.real(), mp.minus.imag()});
    return {{{"experiment", kind_name(c.kind)},
             {"a", led.a},
             {"regime_1d", led.regime_1d},
             {"regime", regime_json(regime_check(led))},
             {"ledger", ledger_json(led)},
             {"mu_pairs", pairs}},
            {}};
}

Outcome run_simulate(const ExperimentConfig& c, const std::filesystem::path& dir) {
    Model model(c.params);
    const auto noise = make_noise(c.params, 0, c.horizon, 0);
    RecordSpec spec;
    spec.every_steps = c.record_every;
    const auto rec = integrate(model, initial_state(c), noise, 0, c.horizon, spec);
    write_trajectory_csv(rec, dir / "trajectory.csv");
    write_state(rec.final_state, c.horizon, dir / "final_state.bin");
    const auto led = ledger_constants(c.params);
    json rho = c.horizon > 0 ? json((rec.s.back() - rec.s.front()) / c.horizon) : json(nullptr);
    return {{{"experiment", kind_name(c.kind)},
             {"T", c.horizon},
             {"records", rec.times.size()},
             {"final_s", rec.s.back()},
             {"final_q_norm", rec.q_norm.back()},
             {"rho_endpoint", rho},
             {"regime_1d", led.regime_1d},
             {"regime", regime_json(regime_check(led))}},
            {"trajectory.csv", "final_state.bin"}};
}

Outcome run_attractor(const ExperimentConfig& c, const std::filesystem::path& dir) {
    Model model(c.params);
    const auto led = ledger_constants(c.params);
    const auto noise = make_noise(c.params, -c.t_ladder.back(), 0, 0);
    AttractorOptions opt;
    opt.n_p = c.n_p;
    opt.curve_tol = c.curve_tol;
    opt.n_validation = c.n_validation;
    opt.resample.interval = c.resample_interval;
    opt.resample.workers = c.workers;
    const auto est = estimate_attractor(model, noise, c.t_ladder, opt);
    write_curve_csv(est.curve, dir / "curve.csv", "manifest.json");

    std::string ladder = "T,lipschitz,hausdorff_to_next\n";
    for (std::size_t i = 0; i < est.ladder.size(); ++i) {
        const std::string next =
            i < est.hausdorff_steps.size() ? fmt::format("{:.17g}", est.hausdorff_steps[i]) : "";
        ladder += fmt::format("{:.17g},{:.17g},{}\n", est.ladder[i], est.lipschitz[i], next);
    }
    write_text(dir / "ladder.csv", ladder);

    json radii = {{"R0", nullptr}, {"R1", nullptr}};
    json bounds = nullptr;
    if (led.a > 0) {
        const auto b = window_bounds(model, noise, led.a / 2);
        bounds = bounds_json(b);
        radii["R0"] = absorbing_radius(led, b);
        radii["R1"] = attracting_radius(led, b);
    }
    json rate = opt_json(est.transverse_rate);
    const bool rate_ok = est.transverse_rate && led.gamma_star &&
                         *est.transverse_rate >= *led.gamma_star / 2;
    double lip = 0;
    for (double x : est.lipschitz) lip = std::max(lip, x);
    return {{{"experiment", kind_name(c.kind)},
             {"converged", est.converged},
             {"converged_at", opt_json(est.converged_at)},
             {"pullback_T", est.pullback_T},
             {"hausdorff_step", est.hausdorff_step},
             {"hausdorff_steps", est.hausdorff_steps},
             {"q_residual", est.q_residual},
             {"lipschitz_max", lip},
             {"order_violations", est.order_violations},
             {"transverse_rate", rate},
             {"gamma_star", opt_json(led.gamma_star)},
             {"rate_at_least_half_gamma_star", rate_ok},
             {"radii", radii},
             {"tempered_bounds", bounds},
             {"regime_1d", led.regime_1d},
             {"regime", regime_json(est.regime)}},
            {"curve.csv", "ladder.csv"}};
}

Outcome run_rotation(const ExperimentConfig& c, const std::filesystem::path& dir) {
    Model model(c.params);
    const auto led = ledger_constants(c.params);
    std::vector<TrajectoryRecord> records;
    EnsembleOptions opt;
    opt.n_realizations = c.n_realizations;
    opt.n_ics = c.n_ics;
    opt.ic_scale = c.ic_scale;
    opt.workers = c.workers;
    opt.record_every = c.record_every;
    opt.records = &records;
    const auto est = ensemble_rho(model, c.horizon, opt);
    Outcome out;
    for (std::size_t r = 0; r < c.n_realizations; ++r) {
        for (std::size_t i = 0; i < c.n_ics; ++i) {
            const auto name = fmt::format("trajectory_r{}_ic{}.csv", r, i);
            write_trajectory_csv(records[r * c.n_ics + i], dir / name);
            out.outputs.push_back(name);
        }
    }
    json order = nullptr;
    if (c.order_points > 0) {
        const auto noise = make_noise(c.params, 0, c.horizon, 0);
        const auto curve = flat_curve(c.order_points, model.n(), 0.0, model.geometry());
        std::vector<State> pts;
        for (std::size_t j = 0; j < curve.size(); ++j) pts.push_back(curve.point(j, model.geometry()));
        const auto rep = order_check(model, noise, pts, c.horizon, c.record_every, 1e-8, c.workers);
        order = {{"violations", rep.violations}, {"max_gap_inversion", rep.max_gap_inversion},
                 {"records", rep.records}, {"tol", 1e-8}};
    }
    out.summary = {{"experiment", kind_name(c.kind)},
                   {"method", est.method},
                   {"T", est.T},
                   {"rho_hat", est.rho_hat},
                   {"ci_halfwidth", est.ci_halfwidth},
                   {"realization_spread", est.realization_spread},
                   {"max_ic_spread", est.max_ic_spread},
                   {"ic_tolerance", est.ic_tolerance},
                   {"ics_agree", est.ics_agree},
                   {"realization_means", est.realization_means},
                   {"per_ic", est.per_ic},
                   {"order_check", order},
                   {"regime_1d", led.regime_1d},
                   {"regime", regime_json(regime_check(led))}};
    return out;
}

struct SweepRow {
    SweepJob job;
    double a = 0, delta = 0;
    bool regime_1d = false, curve_regime = false, gamma_exists = false;
    double lipschitz = 0, q_spread = 0, rho_hat = 0, rho_spread = 0;
    std::string status = "ok";
};

SweepRow run_sweep_job(const ExperimentConfig& c, const SweepJob& job) {
    SweepRow row;
    row.job = job;
    try {
        Params p = c.params;
        p.alpha = job.alpha;
        p.kappa = job.kappa;
        p.seed = job.seed;
        const auto led = ledger_constants(p);
        const auto flags = regime_check(led);
        row.a = led.a;
        row.delta = led.delta;
        row.regime_1d = led.regime_1d;
        row.curve_regime = flags.curve_regime;
        row.gamma_exists = flags.gamma_exists;

        Model model(p);
        const auto& geom = model.geometry();
        const auto noise = make_noise(p, -c.sweep_curve_T, 0, 0);
        ResampleSpec spec;
        spec.interval = c.resample_interval;
        spec.checkpoints = 10;
        const auto evo = evolve_curve(model, flat_curve(c.sweep_n_p, model.n(), 0.0, geom), noise,
                                      c.sweep_curve_T, spec);
        row.lipschitz = lipschitz_verify(evo.curve, geom).max_ratio;
        for (const auto& ck : evo.checkpoints) row.lipschitz = std::max(row.lipschitz, ck.lipschitz);

        // transverse spread of pulled-back random ICs around the evolved curve
        const auto ics = random_ics(model, c.n_validation, 10.0, job.seed, 0x5eed);
        for (const auto& y0 : ics) {
            const State y = pullback_solve(model, y0, noise, c.sweep_curve_T);
            row.q_spread = std::max(row.q_spread, curve_distance(y, evo.curve, geom));
        }

        EnsembleOptions opt;
        opt.n_ics = c.n_ics;
        opt.ic_scale = c.ic_scale;
        const auto rot = ensemble_rho(model, c.sweep_rotation_T, opt);
        row.rho_hat = rot.rho_hat;
        row.rho_spread = rot.max_ic_spread;
    } catch (const BlowUpError& e) {
        row.status = fmt::format("blowup at t={}: {}", e.time(), e.what());
    } catch (const std::exception& e) {
        row.status = fmt::format("error: {}", e.what());
    }
    return row;
}

Outcome run_sweep(const ExperimentConfig& c, const std::filesystem::path& dir) {
    const auto jobs = sweep_jobs(c);
    std::vector<SweepRow> rows(jobs.size());
    parallel_for(jobs.size(), c.workers, [&](std::size_t i) { rows[i] = run_sweep_job(c, jobs[i]); });

    std::string csv =
        "index,alpha,kappa,seed,a,delta,regime_1d,curve_regime,gamma_exists,lipschitz,q_spread,"
        "rho_hat,rho_spread,status\n";
    std::size_t failed = 0;
    for (const auto& r : rows) {
        if (r.status != "ok") ++failed;
        csv += fmt::format("{},{:.17g},{:.17g},{},{:.17g},{:.17g},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n",
                           r.job.index, r.job.alpha, r.job.kappa, r.job.seed, r.a, r.delta,
                           int(r.regime_1d), int(r.curve_regime), int(r.gamma_exists), r.lipschitz,
                           r.q_spread, r.rho_hat, r.rho_spread, csv_quote(r.status));
    }
    write_text(dir / "sweep.csv", csv);
    return {{{"experiment", kind_name(c.kind)},
             {"jobs", jobs.size()},
             {"failed_rows", failed},
             {"grid", {{"alpha", c.sweep_alpha}, {"kappa", c.sweep_kappa}}}},
            {"sweep.csv"}};
}

}  // namespace

//---------------------------------------------------------------------------//
std::string_view kind_name(ExperimentKind kind) {
    return kKindNames[static_cast<std::size_t>(kind)];
}

ExperimentKind parse_kind(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == name) return static_cast<ExperimentKind>(i);
    throw ConfigError(fmt::format("unknown experiment '{}' (expected one of {})", name,
                                  fmt::join(kKindNames, ", ")));
}

std::string ExperimentConfig::resolved_text() const {
    std::string out;
    for (const auto& k : key_table()) {
        if (k.name == "m") {
            out += fmt::format("m = {}\n", params.noise_count());
            continue;
        }
        if (!k.get) continue;
        out += fmt::format("{} = {}\n", k.name, k.get(*this));
    }
    return out;
}

ExperimentConfig load_config(std::string_view text) {
    std::map<std::string, std::string, std::less<>> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(fmt::format("line {}: expected key = value", line_no));
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (!find_key(key))
            throw ConfigError(fmt::format("line {}: unknown key '{}' (did you mean '{}'?)", line_no,
                                          key, nearest_key(key)));
        if (!seen.emplace(key, value).second)
            throw ConfigError(fmt::format("line {}: duplicate key '{}'", line_no, key));
    }
    for (const char* req : {"alpha", "kappa"})
        if (!seen.count(req)) throw ConfigError(fmt::format("missing required key '{}'", req));

    ExperimentConfig c;
    for (const auto& [key, value] : seen) {
        const Key* k = find_key(key);
        if (!k->set) continue;
        try {
            k->set(c, value);
        } catch (const ConfigError& e) {
            std::string msg = e.what();
            if (msg.rfind(": ", 0) == 0) msg = key + msg;  // setters built from member pointers
            throw ConfigError(msg);
        }
    }

    // noise shapes: m alone selects the default h_1 = 0.1 e_0
    std::optional<std::size_t> m;
    if (auto it = seen.find("m"); it != seen.end()) m = parse_int<std::size_t>("m", it->second);
    if (auto it = seen.find("h_coeffs"); it != seen.end()) {
        c.params.h_coeffs = parse_shapes(it->second);
        if (m && *m != c.params.h_coeffs.size())
            throw ConfigError(fmt::format("m = {} but h_coeffs lists {} shapes", *m,
                                          c.params.h_coeffs.size()));
    } else if (!m || *m == 1) {
        c.params.h_coeffs = {{0.1}};
    } else if (*m > 1) {
        throw ConfigError("m > 1 requires h_coeffs");
    }
    validate(c);
    return c;
}

ExperimentConfig load_config_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read config {}", file.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config(ss.str());
}

std::string config_reference() {
    std::string out = "Config keys (flat key = value, '#' starts a comment):\n";
    for (const auto& k : key_table()) out += fmt::format("  {:<18} {}\n", k.name, k.help);
    return out;
}

std::uint64_t job_seed(std::uint64_t master, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x73776570u};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<SweepJob> sweep_jobs(const ExperimentConfig& config) {
    auto alphas = config.sweep_alpha;
    auto kappas = config.sweep_kappa;
    std::sort(alphas.begin(), alphas.end());
    std::sort(kappas.begin(), kappas.end());
    std::vector<SweepJob> jobs;
    for (double a : alphas) {
        for (double k : kappas) {
            const std::size_t idx = jobs.size();
            jobs.push_back({idx, a, k, job_seed(config.params.seed, idx)});
        }
    }
    return jobs;
}

int run(const ExperimentConfig& config, std::ostream& err) {
    try {
        validate(config);
        const auto& dir = config.out_dir;
        std::filesystem::create_directories(dir);
        Outcome out;
        switch (config.kind) {
            case ExperimentKind::check_params: out = run_check_params(config); break;
            case ExperimentKind::simulate: out = run_simulate(config, dir); break;
            case ExperimentKind::attractor: out = run_attractor(config, dir); break;
            case ExperimentKind::rotation: out = run_rotation(config, dir); break;
            case ExperimentKind::sweep: out = run_sweep(config, dir); break;
        }
        write_json(dir / "summary.json", out.summary);
        out.outputs.push_back("summary.json");
        const auto& p = config.params;
        const json manifest = {
            {"code_version", SGRD_VERSION},
            {"experiment", kind_name(config.kind)},
            {"seed", p.seed},
            {"params", params_json(p)},
            {"grid", {{"dt", p.dt}, {"n_modes", p.n_modes}, {"n_quad", p.quad_points()},
                      {"domain_length", p.domain_length}, {"burn_in", p.burn_in}}},
            {"config_text", config.resolved_text()},
            {"outputs", out.outputs}};
        write_json(dir / "manifest.json", manifest);
        return exit_ok;
    } catch (const BlowUpError& e) {
        err << "sgrd: numerical blow-up at t=" << e.time() << ": " << e.what() << "\n";
        return exit_blowup;
    } catch (const IoError& e) {
        err << "sgrd: I/O error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "sgrd: I/O error: " << e.what() << "\n";
        return exit_io;
    } catch (const ConfigError& e) {
        err << "sgrd: config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::logic_error& e) {
        // domain / shape / usage errors all trace back to the configuration
        err << "sgrd: config error: " << e.what() << "\n";
        return exit_config;
    } catch (const RegimeError& e) {
        err << "sgrd: config error: " << e.what() << "\n";
        return exit_config;
    }
}

}  // namespace sgrd
