#include "sgrd/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "sgrd/error.hpp"
#include "sgrd/parallel.hpp"

namespace sgrd {

namespace {

State lerp(const State& a, const State& b, double theta) {
    State out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.u[i] = a.u[i] + theta * (b.u[i] - a.u[i]);
        out.v[i] = a.v[i] + theta * (b.v[i] - a.v[i]);
    }
    return out;
}

double periodic_distance(double d, double period) {
    double r = std::fmod(std::abs(d), period);
    return std::min(r, period - r);
}

std::vector<double> uniform_grid(std::size_t n, double period) {
    std::vector<double> g(n);
    for (std::size_t j = 0; j < n; ++j) g[j] = period * static_cast<double>(j) / static_cast<double>(n);
    return g;
}

}  // namespace

//---------------------------------------------------------------------------//
State HorizontalCurve::point(std::size_t i, const EnergyGeometry& geom) const {
    return shift_along_eta0(phi_points[i], p_grid[i], geom);
}

State HorizontalCurve::phi_at(double p) const {
    if (p_grid.empty()) throw UsageError("HorizontalCurve::phi_at: empty curve");
    const double per = period();
    const double r = p - per * std::floor(p / per);
    const auto it = std::upper_bound(p_grid.begin(), p_grid.end(), r);
    const std::size_t n = p_grid.size();
    std::size_t lo = 0, hi = 0;
    double plo = 0, phi = 0;
    if (it == p_grid.begin()) {
        lo = n - 1;
        hi = 0;
        plo = p_grid[n - 1] - per;
        phi = p_grid[0];
    } else if (it == p_grid.end()) {
        lo = n - 1;
        hi = 0;
        plo = p_grid[n - 1];
        phi = p_grid[0] + per;
    } else {
        hi = static_cast<std::size_t>(it - p_grid.begin());
        lo = hi - 1;
        plo = p_grid[lo];
        phi = p_grid[hi];
    }
    const double theta = phi > plo ? (r - plo) / (phi - plo) : 0.0;
    return lerp(phi_points[lo], phi_points[hi], theta);
}

HorizontalCurve flat_curve(std::size_t n_p, const State& phi, const EnergyGeometry& geom) {
    if (n_p < 2) throw UsageError("flat_curve: need at least 2 grid points");
    HorizontalCurve c;
    c.p_grid = uniform_grid(n_p, kTwoPi);
    c.phi_points.assign(n_p, project_q(phi, geom));
    return c;
}

HorizontalCurve flat_curve(std::size_t n_p, std::size_t n_modes, double value,
                           const EnergyGeometry& geom) {
    State phi(n_modes);
    phi.u[1] = value;
    return flat_curve(n_p, phi, geom);
}

//---------------------------------------------------------------------------//
double absorbing_radius(const ConstantsLedger& ledger, const TemperedBoundEstimate& b) {
    if (!(ledger.a > 0)) throw RegimeError("absorbing_radius: requires a > 0");
    return 4 / ledger.a * (ledger.a1 * b.r + b.r_prime) + 2 * ledger.a2 / ledger.a;
}

double attracting_radius(const ConstantsLedger& ledger, const TemperedBoundEstimate& b) {
    if (!(ledger.a > 0)) throw RegimeError("attracting_radius: requires a > 0");
    return ledger.a5 * b.r + ledger.a6 * b.r_prime + 8 / ledger.a * b.r_double_prime + ledger.a7;
}

TemperedBoundEstimate window_bounds(const Model& model, const NoiseContext& noise,
                                    double epsilon) {
    return estimate_tempered_bounds(noise.path, noise.track, model.noise_shapes(), model.op(),
                                    epsilon, 0, noise.path.zero_index());
}

AbsorbingReport absorbing_check(const Model& model, const NoiseContext& noise,
                                const std::vector<State>& ics,
                                const std::vector<double>& horizons, int workers) {
    const auto ledger = ledger_constants(model.params());
    AbsorbingReport rep;
    rep.bounds = window_bounds(model, noise, ledger.a / 2);
    rep.r0 = absorbing_radius(ledger, rep.bounds);
    rep.r1 = attracting_radius(ledger, rep.bounds);

    const std::size_t n_ic = ics.size();
    std::vector<double> qn(horizons.size() * n_ic), gn(horizons.size() * n_ic);
    parallel_for(qn.size(), workers, [&](std::size_t idx) {
        const std::size_t h = idx / n_ic;
        const std::size_t i = idx % n_ic;
        const State y = pullback_solve(model, ics[i], noise, horizons[h]);
        qn[idx] = q_norm(y, model.geometry());
        gn[idx] = graph_norm(project_q(y, model.geometry()), model.geometry());
    });
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        AbsorbingRow row;
        row.horizon = horizons[h];
        for (std::size_t i = 0; i < n_ic; ++i) {
            row.max_q_norm = std::max(row.max_q_norm, qn[h * n_ic + i]);
            row.max_graph_norm = std::max(row.max_graph_norm, gn[h * n_ic + i]);
        }
        row.inside = row.max_q_norm <= rep.r0;
        rep.rows.push_back(row);
    }
    // smallest horizon from which every larger tested horizon is inside
    std::vector<std::size_t> order(horizons.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return horizons[a] < horizons[b]; });
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (!rep.rows[*it].inside) break;
        rep.entry_horizon = horizons[*it];
    }
    return rep;
}

//---------------------------------------------------------------------------//
LipschitzRecord lipschitz_verify(const HorizontalCurve& curve, const EnergyGeometry& geom,
                                 PMetric metric) {
    if (curve.size() < 2) throw UsageError("lipschitz_verify: need at least 2 points");
    LipschitzRecord rec;
    const double eta = geom.eta0_norm();
    for (std::size_t i = 0; i < curve.size(); ++i)
        for (std::size_t j = i + 1; j < curve.size(); ++j) {
            const double dp = metric == PMetric::wrapped
                                  ? periodic_distance(curve.p_grid[i] - curve.p_grid[j], curve.period())
                                  : std::abs(curve.p_grid[i] - curve.p_grid[j]);
            if (!(dp > 0))
                throw DomainError(fmt::format("lipschitz_verify: degenerate pair ({}, {})", i, j));
            const double r = energy_norm(curve.phi_points[i] - curve.phi_points[j], geom) / (dp * eta);
            if (r > rec.max_ratio) rec = {r, i, j};
        }
    return rec;
}

LipschitzRecord lipschitz_verify(const std::vector<State>& states, const EnergyGeometry& geom,
                                 PMetric metric) {
    if (states.size() < 2) throw UsageError("lipschitz_verify: need at least 2 points");
    std::vector<double> s(states.size());
    std::vector<State> q;
    q.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        s[i] = project_p(states[i], geom);
        q.push_back(project_q(states[i], geom));
    }
    LipschitzRecord rec;
    const double eta = geom.eta0_norm();
    for (std::size_t i = 0; i < states.size(); ++i)
        for (std::size_t j = i + 1; j < states.size(); ++j) {
            const double dp = metric == PMetric::wrapped ? wrapped_distance(s[i], s[j])
                                                         : std::abs(s[i] - s[j]);
            if (!(dp > 0))
                throw DomainError(fmt::format("lipschitz_verify: degenerate pair ({}, {})", i, j));
            const double r = energy_norm(q[i] - q[j], geom) / (dp * eta);
            if (r > rec.max_ratio) rec = {r, i, j};
        }
    return rec;
}

double q_spread(const std::vector<State>& states, const EnergyGeometry& geom, double p_tol) {
    if (states.size() < 2) throw UsageError("q_spread: need at least 2 states");
    std::vector<double> s(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) s[i] = project_p(states[i], geom);
    bool matched = false;
    double spread = 0;
    for (std::size_t i = 0; i < states.size(); ++i)
        for (std::size_t j = i + 1; j < states.size(); ++j) {
            if (!(wrapped_distance(s[i], s[j]) < p_tol)) continue;
            matched = true;
            spread = std::max(spread, q_norm(states[i] - states[j], geom));
        }
    if (!matched) throw UsageError("q_spread: no pair within p_tol, spread undefined");
    return spread;
}

double hausdorff(const HorizontalCurve& a, const HorizontalCurve& b, const EnergyGeometry& geom) {
    if (a.size() != b.size()) throw ShapeError("hausdorff: curves use different grids");
    double d = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a.p_grid[j] != b.p_grid[j]) throw ShapeError("hausdorff: curves use different grids");
        d = std::max(d, energy_norm(a.phi_points[j] - b.phi_points[j], geom));
    }
    return d;
}

double curve_distance(const State& y, const HorizontalCurve& curve, const EnergyGeometry& geom) {
    return energy_norm(project_q(y, geom) - curve.phi_at(project_p(y, geom)), geom);
}

//---------------------------------------------------------------------------//
HorizontalCurve reparameterize(const std::vector<State>& images, const EnergyGeometry& geom,
                               int period_multiple, double order_tol, std::size_t* violations,
                               double* max_inversion) {
    const std::size_t n = images.size();
    if (n < 2) throw UsageError("reparameterize: need at least 2 points");
    const double per = kTwoPi * period_multiple;
    std::vector<double> s(n);
    std::vector<State> q;
    q.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = project_p(images[i], geom);
        q.push_back(project_q(images[i], geom));
    }
    std::size_t bad = 0;
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double next = i + 1 < n ? s[i + 1] : s[0] + per;
        const double gap = next - s[i];
        if (gap < -order_tol) ++bad;
        worst = std::max(worst, -gap);
    }
    if (violations) *violations = bad;
    if (max_inversion) *max_inversion = std::max(0.0, worst);

    // three periodic copies so every target in [0, per) is bracketed
    const double base = per * std::floor(s[0] / per);
    std::vector<std::pair<double, std::size_t>> ext;
    ext.reserve(3 * n);
    for (int k = -1; k <= 1; ++k)
        for (std::size_t i = 0; i < n; ++i) ext.emplace_back(s[i] - base + k * per, i);
    if (bad > 0)
        std::stable_sort(ext.begin(), ext.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });

    HorizontalCurve out;
    out.period_multiple = period_multiple;
    out.p_grid = uniform_grid(n, per);
    out.phi_points.reserve(n);
    for (double target : out.p_grid) {
        auto it = std::upper_bound(ext.begin(), ext.end(), target,
                                   [](double x, const auto& e) { return x < e.first; });
        if (it == ext.begin() || it == ext.end())
            throw RegimeError("reparameterize: image does not cover one period");
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = hi.first - lo.first;
        const double theta = w > 0 ? (target - lo.first) / w : 0.0;
        out.phi_points.push_back(lerp(q[lo.second], q[hi.second], theta));
    }
    return out;
}

CurveEvolution evolve_curve(const Model& model, const HorizontalCurve& curve,
                            const NoiseContext& noise, double horizon, const ResampleSpec& spec) {
    if (horizon < 0) throw ConfigError("evolve_curve: horizon must be >= 0");
    if (!(spec.interval > 0)) throw ConfigError("evolve_curve: resample interval must be > 0");
    const auto& geom = model.geometry();
    CurveEvolution evo;
    evo.regime_warning = !ledger_constants(model.params()).regime_1d;
    evo.curve = curve;
    if (horizon == 0) return evo;

    const auto& path = noise.path;
    const std::size_t kb = path.index_of(-horizon);
    const std::size_t k0 = path.zero_index();
    const std::size_t total = k0 - kb;

    // segment ends at absolute times k * interval, then 0
    std::vector<std::size_t> ends;
    const double first = std::floor(-horizon / spec.interval + 1e-9) + 1;
    for (double m = first; m * spec.interval < -1e-12; m += 1) ends.push_back(path.index_of(m * spec.interval));
    ends.push_back(k0);

    std::vector<std::size_t> ck;
    for (std::size_t c = 1; c <= spec.checkpoints; ++c)
        ck.push_back(kb + static_cast<std::size_t>(std::llround(static_cast<double>(c * total) /
                                                                static_cast<double>(spec.checkpoints))));

    const std::size_t n = curve.size();
    std::vector<State> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = curve.point(i, geom);
    std::vector<std::vector<State>> ck_states(ck.size(), std::vector<State>(n));

    std::size_t k_from = kb;
    for (std::size_t k_to : ends) {
        parallel_for(n, spec.workers, [&](std::size_t i) {
            advance(model, pts[i], noise, k_from, k_to, [&](std::size_t k, const State& y) {
                const auto it = std::lower_bound(ck.begin(), ck.end(), k);
                if (it != ck.end() && *it == k)
                    ck_states[static_cast<std::size_t>(it - ck.begin())][i] = y;
            });
        });
        std::size_t bad = 0;
        double inv = 0;
        evo.curve = reparameterize(pts, geom, curve.period_multiple, spec.order_tol, &bad, &inv);
        evo.order_violations += bad;
        evo.max_order_inversion = std::max(evo.max_order_inversion, inv);
        for (std::size_t i = 0; i < n; ++i) pts[i] = evo.curve.point(i, geom);
        k_from = k_to;
    }
    for (std::size_t c = 0; c < ck.size(); ++c)
        evo.checkpoints.push_back({path.time(ck[c]), lipschitz_verify(ck_states[c], geom).max_ratio});
    return evo;
}

//---------------------------------------------------------------------------//
std::vector<State> random_ics(const Model& model, std::size_t count, double scale,
                              std::uint64_t seed, std::uint64_t stream) {
    const auto& geom = model.geometry();
    const std::size_t n = model.n();
    auto rng = make_stream(seed, stream, StreamKind::initial_data, 0);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<State> out;
    out.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        State y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = 1.0 / (1.0 + static_cast<double>(i));
            y.u[i] = w * g(rng);
            y.v[i] = w * g(rng);
        }
        y = project_q(y, geom);
        const double norm = energy_norm(y, geom);
        const double target = scale * (0.1 + 0.9 * unit(rng));
        y *= target / norm;
        out.push_back(shift_along_eta0(std::move(y), kTwoPi * unit(rng), geom));
    }
    return out;
}

AttractorEstimate estimate_attractor(const Model& model, const NoiseContext& noise,
                                     const std::vector<double>& ladder,
                                     const AttractorOptions& opt) {
    if (ladder.empty()) throw ConfigError("estimate_attractor: empty T ladder");
    const auto& geom = model.geometry();
    AttractorEstimate est;
    est.ladder = ladder;
    est.regime = regime_check(ledger_constants(model.params()));

    const HorizontalCurve seed = flat_curve(opt.n_p, model.n(), opt.seed_constant, geom);
    std::optional<HorizontalCurve> prev;
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        const double T = ladder[k];
        CurveEvolution evo = evolve_curve(model, seed, noise, T, opt.resample);
        est.order_violations += evo.order_violations;
        est.lipschitz.push_back(lipschitz_verify(evo.curve, geom).max_ratio);
        est.pullback_T = T;
        if (prev) {
            est.hausdorff_step = hausdorff(*prev, evo.curve, geom);
            est.hausdorff_steps.push_back(est.hausdorff_step);
            if (est.hausdorff_step < opt.curve_tol) {
                est.converged = true;
                est.converged_at = ladder[k - 1];
                est.curve = std::move(evo.curve);
                break;
            }
        }
        prev = evo.curve;
        est.curve = std::move(evo.curve);
    }

    const std::uint64_t vseed = opt.validation_seed != 0 ? opt.validation_seed : noise.seed;
    const auto ics = random_ics(model, opt.n_validation, opt.validation_scale, vseed,
                                noise.realization_id + 0x5eed);
    std::vector<double> res(ics.size());
    parallel_for(ics.size(), opt.resample.workers, [&](std::size_t i) {
        res[i] = curve_distance(pullback_solve(model, ics[i], noise, est.pullback_T), est.curve, geom);
    });
    est.q_residual = ics.empty() ? 0.0 : *std::max_element(res.begin(), res.end());

    // rate horizons reaching past the noise window are skipped
    std::vector<double> horizons;
    for (double h : opt.rate_horizons)
        if (h <= -noise.path.t0() + 0.5 * noise.path.dt()) horizons.push_back(h);
    if (est.pullback_T > 0 && !ics.empty()) {
        const std::size_t nh = horizons.size();
        std::vector<double> r(nh * ics.size());
        parallel_for(r.size(), opt.resample.workers, [&](std::size_t idx) {
            const std::size_t h = idx / ics.size();
            const std::size_t i = idx % ics.size();
            r[idx] = curve_distance(pullback_solve(model, ics[i], noise, horizons[h]),
                                    est.curve, geom);
        });
        // the converged residual marks the interpolation floor; keep the fit above it
        const double floor = std::max(opt.rate_floor, 10 * est.q_residual);
        std::vector<double> xs, ys;
        for (std::size_t h = 0; h < nh; ++h) {
            const double m = *std::max_element(r.begin() + static_cast<std::ptrdiff_t>(h * ics.size()),
                                               r.begin() + static_cast<std::ptrdiff_t>((h + 1) * ics.size()));
            est.rate_samples.emplace_back(horizons[h], m);
            if (m > floor) {
                xs.push_back(horizons[h]);
                ys.push_back(std::log(m));
            }
        }
        if (xs.size() >= 2) {
            const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
            const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
            double sxy = 0, sxx = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sxy += (xs[i] - mx) * (ys[i] - my);
                sxx += (xs[i] - mx) * (xs[i] - mx);
            }
            if (sxx > 0) est.transverse_rate = -sxy / sxx;
        }
    }
    return est;
}

//---------------------------------------------------------------------------//
void write_curve_csv(const HorizontalCurve& curve, const std::filesystem::path& file,
                     const std::string& manifest_ref) {
    std::ofstream out(file);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", file.string()));
    const std::size_t n = curve.phi_points.empty() ? 0 : curve.phi_points[0].size();
    out << "# manifest: " << manifest_ref << '\n';
    out << "p";
    for (std::size_t i = 1; i < n; ++i) out << ",u" << i;
    out << ",v0";
    for (std::size_t i = 1; i < n; ++i) out << ",v" << i;
    out << '\n';
    for (std::size_t j = 0; j < curve.size(); ++j) {
        const State& q = curve.phi_points[j];
        out << fmt::format("{:.17g}", curve.p_grid[j]);
        for (std::size_t i = 1; i < n; ++i) out << fmt::format(",{:.17g}", q.u[i]);
        out << fmt::format(",{:.17g}", q.v[0]);
        for (std::size_t i = 1; i < n; ++i) out << fmt::format(",{:.17g}", q.v[i]);
        out << '\n';
    }
    if (!out) throw IoError(fmt::format("write failed for {}", file.string()));
}

}  // namespace sgrd
