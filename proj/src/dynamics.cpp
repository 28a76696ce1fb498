#include "sgrd/dynamics.hpp"

#include <cmath>
#include <complex>
#include <fstream>

#include <fmt/format.h>

#include "sgrd/error.hpp"
#include "le_io.hpp"

namespace sgrd {
namespace {

// Below this |d dt| the closed forms lose digits to cancellation.
constexpr double kSeriesSwitch = 1e-3;

double phi1(double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; }

// M_n(h) = int_0^1 tau^n e^{h tau} d tau for n = 0..7.
std::array<double, 8> exp_moments(double h) {
    std::array<double, 8> out{};
    if (std::abs(h) < 1.0) {
        for (int n = 0; n < 8; ++n) {
            double term = 1.0;  // h^j / j!
            double acc = 0.0;
            for (int j = 0; j < 60; ++j) {
                const double add = term / static_cast<double>(n + j + 1);
                acc += add;
                if (std::abs(add) < 1e-18 * std::abs(acc)) break;
                term *= h / static_cast<double>(j + 1);
            }
            out[static_cast<std::size_t>(n)] = acc;
        }
    } else {
        const double eh = std::exp(h);
        out[0] = std::expm1(h) / h;
        for (int n = 1; n < 8; ++n)
            out[static_cast<std::size_t>(n)] = (eh - n * out[static_cast<std::size_t>(n - 1)]) / h;
    }
    return out;
}

// Coefficients c0, c1 with exp(C dt) = c0 I + c1 dt (C - m I).
void exp_coeffs(double alpha, double lambda, double dt, double& c0, double& c1) {
    const double h = -alpha / 2 * dt;
    const double d2 = alpha * alpha / 4 - lambda;
    const double x2 = d2 * dt * dt;
    if (std::abs(x2) < kSeriesSwitch * kSeriesSwitch) {
        const double eh = std::exp(h);
        c0 = eh * (1 + x2 / 2 * (1 + x2 / 12 * (1 + x2 / 30)));
        c1 = eh * (1 + x2 / 6 * (1 + x2 / 20 * (1 + x2 / 42)));
    } else if (x2 > 0) {
        const double x = std::sqrt(x2);
        const double ep = std::exp(h + x);
        const double em = std::exp(h - x);
        c0 = (ep + em) / 2;
        c1 = (ep - em) / (2 * x);
    } else {
        const double w = std::sqrt(-x2);
        const double eh = std::exp(h);
        c0 = eh * std::cos(w);
        c1 = eh * std::sin(w) / w;
    }
}

// Coefficients b0, b1 with Phi = dt (b0 I + b1 dt (C - m I)).
void phi_coeffs(double alpha, double lambda, double dt, double& b0, double& b1) {
    const double h = -alpha / 2 * dt;
    const double d2 = alpha * alpha / 4 - lambda;
    const double x2 = d2 * dt * dt;
    if (std::abs(x2) < kSeriesSwitch * kSeriesSwitch) {
        const auto mm = exp_moments(h);
        // cosh(x tau) and sinh(x tau)/x as series in x^2 tau^2.
        b0 = mm[0] + x2 / 2 * mm[2] + x2 * x2 / 24 * mm[4] + x2 * x2 * x2 / 720 * mm[6];
        b1 = mm[1] + x2 / 6 * mm[3] + x2 * x2 / 120 * mm[5] + x2 * x2 * x2 / 5040 * mm[7];
    } else if (x2 > 0) {
        const double x = std::sqrt(x2);
        const double pp = phi1(h + x);
        const double pm = phi1(h - x);
        b0 = (pp + pm) / 2;
        b1 = (pp - pm) / (2 * x);
    } else {
        const double w = std::sqrt(-x2);
        const double s = std::sin(w / 2);
        // e^{h + i w} - 1 without cancellation in the real part
        const std::complex<double> num(std::expm1(h) * std::cos(w) - 2 * s * s,
                                       std::exp(h) * std::sin(w));
        const std::complex<double> val = num / std::complex<double>(h, w);
        b0 = val.real();
        b1 = val.imag() / w;
    }
}

Mat2 assemble(double k0, double k1, double scale, double alpha, double lambda) {
    // k0 I + k1 (C - m I), C - m I = [[alpha/2, 1], [-lambda, -alpha/2]]
    return {scale * (k0 + k1 * alpha / 2), scale * k1, scale * (-k1 * lambda),
            scale * (k0 - k1 * alpha / 2)};
}

}  // namespace

Mat2 mode_exponential(double alpha, double lambda, double dt) {
    double c0 = 0, c1 = 0;
    exp_coeffs(alpha, lambda, dt, c0, c1);
    return assemble(c0, c1 * dt, 1.0, alpha, lambda);
}

Mat2 mode_phi(double alpha, double lambda, double dt) {
    double b0 = 0, b1 = 0;
    phi_coeffs(alpha, lambda, dt, b0, b1);
    return assemble(b0, b1 * dt, dt, alpha, lambda);
}

Propagator build_propagator(const SpectralOperator& op, double alpha, double dt) {
    if (!(dt > 0)) throw DomainError("build_propagator: dt must be > 0");
    Propagator p;
    p.dt = dt;
    p.alpha = alpha;
    const auto n = static_cast<std::size_t>(op.n_modes());
    p.e.resize(n);
    p.phi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lam = op.lambdas()[i];
        p.e[i] = mode_exponential(alpha, lam, dt);
        p.phi[i] = mode_phi(alpha, lam, dt);
    }
    // The mean block is known in closed form; keep it exact.
    const double decay = std::exp(-alpha * dt);
    p.e[0] = {1.0, -std::expm1(-alpha * dt) / alpha, 0.0, decay};
    return p;
}

void apply_linear(const Propagator& prop, State& y) {
    if (y.size() != prop.e.size()) throw ShapeError("apply_linear: size mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) {
        const Mat2& e = prop.e[i];
        const double u = y.u[i];
        const double v = y.v[i];
        y.u[i] = e.a11 * u + e.a12 * v;
        y.v[i] = e.a21 * u + e.a22 * v;
    }
}

//---------------------------------------------------------------------------//
NoiseContext NoiseContext::shifted(std::ptrdiff_t steps) const {
    NoiseContext out{path.shifted(steps), track, seed, realization_id};
    return out;
}

NoiseContext make_noise(const Params& params, double t0, double t1, std::uint64_t realization_id) {
    return make_noise(params, t0, t1, params.seed, realization_id);
}

NoiseContext make_noise(const Params& params, double t0, double t1, std::uint64_t seed,
                        std::uint64_t realization_id) {
    NoisePath path = sample_path(params.noise_count(), t0, t1, params.dt, seed, realization_id);
    OuTrack track(path, params.burn_in, seed, realization_id);
    return NoiseContext{std::move(path), std::move(track), seed, realization_id};
}

SpectralField z_field(const NoiseContext& noise, std::size_t k,
                      std::span<const SpectralField> h_fields) {
    return assemble_z(noise.track.at(k), h_fields);
}

//---------------------------------------------------------------------------//
Model::Model(Params params)
    : params_((params.validate(), std::move(params))),
      op_(build_operator(params_)),
      geom_(params_.alpha, params_.effective_delta(), op_),
      prop_(build_propagator(op_, params_.alpha, params_.dt)),
      f_(padded_field(params_.f_coeffs, n())) {
    h_.reserve(params_.h_coeffs.size());
    for (const auto& h : params_.h_coeffs) h_.push_back(padded_field(h, n()));
}

State nonlinearity(const State& y, const SpectralField& z, const SpectralField& f, double alpha,
                   const SpectralOperator& op) {
    const auto n = static_cast<std::size_t>(op.n_modes());
    if (y.size() != n || z.size() != n || f.size() != n)
        throw ShapeError("nonlinearity: size mismatch");
    std::vector<double> samples(static_cast<std::size_t>(op.n_quad()));
    op.to_physical(y.u.coeffs, samples);
    for (double& s : samples) s = std::sin(s);
    State out(n);
    op.to_spectral(samples, out.v.coeffs);
    for (std::size_t i = 0; i < n; ++i) {
        out.u[i] = z[i];
        out.v[i] = -out.v[i] + f[i] + (1 - alpha) * z[i];
    }
    return out;
}

//---------------------------------------------------------------------------//
Stepper::Stepper(const Model& model)
    : model_(&model),
      samples_(static_cast<std::size_t>(model.op().n_quad())),
      sin_hat_(model.n()),
      z_(model.n()) {}

void Stepper::step(State& y, const NoiseContext& noise, std::size_t k) {
    const auto h = model_->noise_shapes();
    std::fill(z_.begin(), z_.end(), 0.0);
    if (!h.empty()) {
        const auto zk = noise.track.at(k);
        for (std::size_t j = 0; j < h.size(); ++j) {
            const double zj = zk[j];
            for (std::size_t i = 0; i < z_.size(); ++i) z_[i] += zj * h[j][i];
        }
    }
    step_impl(y, z_.data(), noise.path.time(k));
}

void Stepper::step(State& y, const SpectralField& z, double t) {
    if (z.size() != model_->n()) throw ShapeError("Stepper::step: z size mismatch");
    step_impl(y, z.coeffs.data(), t);
}

void Stepper::step_impl(State& y, const double* z, double t) {
    const Model& m = *model_;
    const std::size_t n = m.n();
    if (y.size() != n) throw ShapeError("Stepper::step: state size mismatch");
    m.op().to_physical(y.u.coeffs, samples_);
    for (double& s : samples_) s = std::sin(s);
    m.op().to_spectral(samples_, sin_hat_);

    const Propagator& p = m.propagator();
    const double one_minus_alpha = 1 - m.params().alpha;
    const auto& f = m.forcing();
    double check = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fu = z[i];
        const double fv = -sin_hat_[i] + f[i] + one_minus_alpha * z[i];
        const Mat2& e = p.e[i];
        const Mat2& q = p.phi[i];
        const double u = y.u[i];
        const double v = y.v[i];
        const double un = e.a11 * u + e.a12 * v + q.a11 * fu + q.a12 * fv;
        const double vn = e.a21 * u + e.a22 * v + q.a21 * fu + q.a22 * fv;
        y.u[i] = un;
        y.v[i] = vn;
        check += un + vn;
    }
    if (!std::isfinite(check))
        throw BlowUpError(t, fmt::format("non-finite state after step at t = {}", t));
}

//---------------------------------------------------------------------------//
void advance(const Model& model, State& y, const NoiseContext& noise, std::size_t k_begin,
             std::size_t k_end, const StepObserver& observer) {
    if (k_begin > k_end || k_end >= noise.path.n_points())
        throw ConfigError("advance: index window outside the noise path");
    Stepper stepper(model);
    for (std::size_t k = k_begin; k < k_end; ++k) {
        stepper.step(y, noise, k);
        if (observer) observer(k + 1, y);
    }
}

TrajectoryRecord integrate(const Model& model, const State& y0, const NoiseContext& noise,
                           double t_begin, double t_end, const RecordSpec& spec) {
    if (t_end < t_begin) throw ConfigError("integrate: t_end before t_begin");
    const std::size_t kb = noise.path.index_of(t_begin);
    const std::size_t ke = noise.path.index_of(t_end);
    std::vector<std::size_t> ck;
    ck.reserve(spec.checkpoint_times.size());
    for (double t : spec.checkpoint_times) {
        const std::size_t k = noise.path.index_of(t);
        if (k < kb || k > ke) throw ConfigError("integrate: checkpoint outside the window");
        ck.push_back(k);
    }
    std::sort(ck.begin(), ck.end());

    const auto& geom = model.geometry();
    TrajectoryRecord rec;
    rec.seed = noise.seed;
    rec.realization_id = noise.realization_id;
    auto record = [&](std::size_t k, const State& y) {
        rec.times.push_back(noise.path.time(k));
        rec.s.push_back(project_p(y, geom));
        rec.q_norm.push_back(q_norm(y, geom));
    };
    std::size_t next_ck = 0;
    auto checkpoint = [&](std::size_t k, const State& y) {
        while (next_ck < ck.size() && ck[next_ck] == k) {
            rec.checkpoints.emplace_back(noise.path.time(k), y);
            ++next_ck;
        }
    };

    State y = y0;
    record(kb, y);
    checkpoint(kb, y);
    advance(model, y, noise, kb, ke, [&](std::size_t k, const State& yk) {
        const bool sample = spec.every_steps > 0 && (k - kb) % spec.every_steps == 0;
        if (sample || k == ke) record(k, yk);
        checkpoint(k, yk);
    });
    rec.final_state = std::move(y);
    return rec;
}

State pullback_solve(const Model& model, const State& y0, const NoiseContext& noise,
                     double horizon) {
    if (horizon < 0) throw ConfigError("pullback_solve: horizon must be >= 0");
    const std::size_t k0 = noise.path.zero_index();
    const std::size_t kb = noise.path.index_of(-horizon);
    State y = y0;
    advance(model, y, noise, kb, k0);
    return y;
}

State phi_solution(const Model& model, const State& phi0, const NoiseContext& noise,
                   double t_begin, double t_end) {
    if (t_end < t_begin) throw ConfigError("phi_solution: t_end before t_begin");
    const std::size_t kb = noise.path.index_of(t_begin);
    const std::size_t ke = noise.path.index_of(t_end);
    const auto h = model.noise_shapes();
    State y = phi0;
    if (!h.empty()) {
        const SpectralField zb = z_field(noise, kb, h);
        for (std::size_t i = 0; i < y.size(); ++i) y.v[i] -= zb[i];
    }
    advance(model, y, noise, kb, ke);
    if (!h.empty()) {
        const SpectralField ze = z_field(noise, ke, h);
        for (std::size_t i = 0; i < y.size(); ++i) y.v[i] += ze[i];
    }
    return y;
}

//---------------------------------------------------------------------------//
void write_state(const State& y, double t, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", file.string()));
    detail::put_f64(out, static_cast<double>(y.size()));
    detail::put_f64(out, t);
    for (std::size_t i = 0; i < y.size(); ++i) {
        detail::put_f64(out, y.u[i]);
        detail::put_f64(out, y.v[i]);
    }
    if (!out) throw IoError(fmt::format("write failed for {}", file.string()));
}

std::pair<State, double> read_state(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {} for reading", file.string()));
    auto get = [&]() {
        double x = 0;
        if (!detail::get_f64(in, x))
            throw IoError(fmt::format("truncated state file {}", file.string()));
        return x;
    };
    const double n = get();
    const double t = get();
    if (n < 0 || n != std::floor(n)) throw IoError(fmt::format("malformed header in {}", file.string()));
    State y(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < y.size(); ++i) {
        y.u[i] = get();
        y.v[i] = get();
    }
    return {std::move(y), t};
}

}  // namespace sgrd
