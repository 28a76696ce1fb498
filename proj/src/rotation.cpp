#include "sgrd/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "sgrd/attractor.hpp"
#include "sgrd/error.hpp"
#include "sgrd/parallel.hpp"

namespace sgrd {

double estimate_rho(const Model& model, const NoiseContext& noise, const State& y0,
                    double horizon, TrajectoryRecord* record, std::size_t record_every) {
    if (!(horizon > 0)) throw ConfigError("estimate_rho: horizon must be > 0");
    RecordSpec spec;
    spec.every_steps = record_every;
    TrajectoryRecord rec = integrate(model, y0, noise, 0, horizon, spec);
    const double rho = (rec.s.back() - rec.s.front()) / horizon;
    if (record) *record = std::move(rec);
    return rho;
}

double ic_agreement_tolerance(double rho, double horizon, double rel, double safety) {
    return std::max(rel * std::abs(rho), safety * 2 * kTwoPi / horizon);
}

RotationEstimate ensemble_rho(const Model& model, double horizon, const EnsembleOptions& opt) {
    if (opt.n_realizations < 1 || opt.n_ics < 1)
        throw ConfigError("ensemble_rho: counts must be >= 1");
    const auto& params = model.params();
    // one IC set shared by all realizations
    const auto ics = random_ics(model, opt.n_ics, opt.ic_scale, params.seed, 0);

    RotationEstimate est;
    est.T = horizon;
    est.per_ic.assign(opt.n_realizations, std::vector<double>(opt.n_ics));
    if (opt.records) opt.records->assign(opt.n_realizations * opt.n_ics, {});
    for (std::size_t r = 0; r < opt.n_realizations; ++r) {
        const NoiseContext noise = make_noise(params, 0, horizon, r);
        parallel_for(opt.n_ics, opt.workers, [&](std::size_t i) {
            TrajectoryRecord* rec = opt.records ? &(*opt.records)[r * opt.n_ics + i] : nullptr;
            est.per_ic[r][i] = estimate_rho(model, noise, ics[i], horizon, rec, opt.record_every);
        });
    }
    double spread = 0;
    for (const auto& row : est.per_ic) {
        const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
        spread = std::max(spread, *hi - *lo);
        est.realization_means.push_back(std::accumulate(row.begin(), row.end(), 0.0) /
                                        static_cast<double>(row.size()));
    }
    const auto& m = est.realization_means;
    const double n = static_cast<double>(m.size());
    est.rho_hat = std::accumulate(m.begin(), m.end(), 0.0) / n;
    const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
    est.realization_spread = *hi - *lo;
    if (m.size() > 1 && est.realization_spread > 0) {
        double var = 0;
        for (double x : m) var += (x - est.rho_hat) * (x - est.rho_hat);
        var /= n - 1;
        est.ci_halfwidth = 1.96 * std::sqrt(var / n);
    }
    est.max_ic_spread = spread;
    est.ic_tolerance = ic_agreement_tolerance(est.rho_hat, horizon);
    est.ics_agree = spread <= est.ic_tolerance;
    return est;
}

OrderReport order_check(const Model& model, const NoiseContext& noise,
                        const std::vector<State>& points, double horizon,
                        std::size_t record_every, double tol, int workers) {
    if (points.size() < 2) return {};
    if (record_every == 0) record_every = 1;
    const auto& geom = model.geometry();
    const std::size_t kb = noise.path.index_of(0.0);
    const std::size_t ke = noise.path.index_of(horizon);
    const std::size_t n = points.size();
    std::vector<State> y = points;
    std::vector<Stepper> steppers;
    steppers.reserve(n);
    for (std::size_t i = 0; i < n; ++i) steppers.emplace_back(model);
    std::vector<double> s(n);

    OrderReport rep;
    auto inspect = [&] {
        for (std::size_t i = 0; i < n; ++i) s[i] = project_p(y[i], geom);
        for (std::size_t i = 0; i < n; ++i) {
            // seam pair compares the last point with the first shifted by p0
            const double next = i + 1 < n ? s[i + 1] : s[0] + kTwoPi;
            const double inv = s[i] - next;
            rep.max_gap_inversion = std::max(rep.max_gap_inversion, inv);
            if (inv > tol) ++rep.violations;
        }
        ++rep.records;
    };
    inspect();
    std::size_t k = kb;
    while (k < ke) {
        const std::size_t chunk = std::min(record_every, ke - k);
        parallel_for(n, workers, [&](std::size_t i) {
            for (std::size_t j = 0; j < chunk; ++j) steppers[i].step(y[i], noise, k + j);
        });
        k += chunk;
        inspect();
    }
    rep.max_gap_inversion = std::max(0.0, rep.max_gap_inversion);
    return rep;
}

void write_trajectory_csv(const TrajectoryRecord& rec, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", file.string()));
    out << "t,s_unreduced,s_mod2pi,q_norm\n";
    for (std::size_t i = 0; i < rec.times.size(); ++i)
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", rec.times[i], rec.s[i],
                           torus_reduce(rec.s[i]).p, rec.q_norm[i]);
    if (!out) throw IoError(fmt::format("write failed for {}", file.string()));
}

}  // namespace sgrd
