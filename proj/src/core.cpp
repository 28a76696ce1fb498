#include "sgrd/core.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "sgrd/error.hpp"

namespace sgrd {

namespace {

double mode_lambda(double kappa, double length, int i) {
    const double k = i * std::numbers::pi / length;
    return kappa * k * k;
}

}  // namespace

void Params::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!(alpha > 0) || !std::isfinite(alpha)) fail("alpha must be > 0");
    if (!(kappa > 0) || !std::isfinite(kappa)) fail("kappa must be > 0");
    if (delta && !(*delta > 0 && *delta <= 1))
        fail(fmt::format("delta must lie in (0, 1], got {}", *delta));
    if (!(domain_length > 0)) fail("domain_length must be > 0");
    if (n_modes < 2) fail("n_modes must be >= 2");
    if (n_quad != 0 && n_quad < 2 * n_modes)
        fail("n_quad must be >= 2*n_modes (0 selects 2*n_modes)");
    if (!(dt > 0)) fail("dt must be > 0");
    if (!(burn_in >= 0)) fail("burn_in must be >= 0");
    if (f_coeffs.size() > static_cast<std::size_t>(n_modes))
        fail("f_coeffs has more entries than n_modes");
    for (std::size_t j = 0; j < h_coeffs.size(); ++j) {
        if (h_coeffs[j].size() > static_cast<std::size_t>(n_modes))
            fail(fmt::format("h_coeffs[{}] has more entries than n_modes", j));
    }
}

double Params::lambda1() const noexcept {
    return mode_lambda(kappa, domain_length, 1);
}

double Params::effective_delta() const {
    return delta ? *delta : choose_delta(alpha, lambda1());
}

double compute_a(double alpha, double delta, double lambda1) {
    if (!(alpha > 0)) throw DomainError("compute_a: alpha must be > 0");
    if (!(lambda1 > 0)) throw DomainError("compute_a: lambda1 must be > 0");
    if (!(delta > 0 && delta <= 1))
        throw DomainError("compute_a: delta must lie in (0, 1]");
    return alpha / 2 - std::abs(alpha / 2 - delta * lambda1 / alpha);
}

double choose_delta(double alpha, double lambda1) {
    if (!(alpha > 0) || !(lambda1 > 0))
        throw DomainError("choose_delta: alpha and lambda1 must be > 0");
    return std::min(1.0, alpha * alpha / (2 * lambda1));
}

double gamma_star(double a) {
    if (!(a > 0)) throw DomainError("gamma_star: requires a > 0");
    return (2 - std::numbers::sqrt2) * a / 2;
}

double gap_sum(double alpha, double a, double gamma) {
    return (2 / alpha) * (1 / gamma + 1 / (a - 2 * gamma));
}

double attraction_constant_m(double alpha, double a, double gamma) {
    if (!(gamma > 0 && gamma < a / 2))
        throw RegimeError("attraction_constant_m: gamma must lie in (0, a/2)");
    const double s = gap_sum(alpha, a, gamma);
    if (!(s < 1))
        throw RegimeError(
            fmt::format("attraction_constant_m: gap condition fails ({} >= 1)", s));
    return 1 / (1 - s);
}

RegimeFlags regime_check(double alpha, double a) {
    RegimeFlags flags;
    flags.a_positive = a > 0;
    flags.curve_regime = flags.a_positive && a > 8 / alpha;
    flags.gamma_exists = flags.a_positive && alpha * a > kGapThreshold;
    return flags;
}

RegimeFlags regime_check(const ConstantsLedger& ledger) {
    return regime_check(ledger.alpha, ledger.a);
}

SpectrumPair spectrum_pair(double alpha, double lambda) {
    const double disc = alpha * alpha - 4 * lambda;
    if (disc >= 0) {
        const double r = std::sqrt(disc);
        return {{(-alpha + r) / 2, 0}, {(-alpha - r) / 2, 0}};
    }
    const double im = std::sqrt(-disc) / 2;
    return {{-alpha / 2, im}, {-alpha / 2, -im}};
}

ConstantsLedger ledger_constants(const Params& params) {
    params.validate();
    ConstantsLedger led;
    const double alpha = params.alpha;
    const double measure = params.domain_length;
    led.alpha = alpha;
    led.lambda1 = params.lambda1();
    led.delta = params.effective_delta();
    led.a = compute_a(alpha, led.delta, led.lambda1);
    led.lf_bound = 2 / alpha;

    double f_sq = 0;
    double grad_f_sq = 0;
    for (std::size_t i = 0; i < params.f_coeffs.size(); ++i) {
        const double c = params.f_coeffs[i];
        f_sq += c * c;
        grad_f_sq += mode_lambda(params.kappa, params.domain_length, static_cast<int>(i)) * c * c;
    }

    led.a1 = std::sqrt(alpha * alpha - 3 * alpha + 3);
    led.a2 = std::sqrt(3 * measure + 3 * f_sq);
    led.a3 = std::sqrt(1.75 * alpha * alpha * measure + 1.75 * alpha * alpha * f_sq +
                       3 * grad_f_sq);
    led.a4 = std::sqrt(2 / (2 - led.delta));

    const RegimeFlags flags = regime_check(alpha, led.a);
    if (flags.a_positive) {
        const double a = led.a;
        const double s3 = std::sqrt(3.0);
        const double damp = std::abs(1 - alpha);
        led.a5 = (4 * led.a1 + 2 * std::sqrt(7.0) * alpha * damp) / a +
                 8 * s3 * led.a1 * led.a4 / (a * a);
        led.a6 = (4 + 4 * s3 * damp) / a + 8 * s3 * led.a4 / (a * a);
        led.a7 = (2 * led.a2 + 2 * led.a3) / a + 2 * s3 * led.a2 * led.a4 / (a * a);
        led.gamma_star = gamma_star(a);
        if (gap_sum(alpha, a, *led.gamma_star) < 1)
            led.big_m = attraction_constant_m(alpha, a, *led.gamma_star);
    }
    led.regime_1d = flags.a_positive && flags.curve_regime && flags.gamma_exists;

    led.mu_pairs.reserve(static_cast<std::size_t>(params.n_modes));
    for (int i = 0; i < params.n_modes; ++i)
        led.mu_pairs.push_back(
            spectrum_pair(alpha, mode_lambda(params.kappa, params.domain_length, i)));
    return led;
}

}  // namespace sgrd
