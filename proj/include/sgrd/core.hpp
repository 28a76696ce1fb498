#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

namespace sgrd {

//---------------------------------------------------------------------------//
/*!
 * Physical and numerical parameters of the damped sine-Gordon problem on
 * U = [0, L] with Neumann ends.
 *
 * Forcing and noise shapes are given as coefficients in the orthonormal cosine
 * basis, so the Neumann condition on each h_j holds by construction. Shorter
 * coefficient vectors are zero-padded to n_modes; longer ones are rejected.
 */
struct Params {
    double alpha = 1.0;                     // damping
    double kappa = 1.0;                     // diffusion K
    std::optional<double> delta;            // norm parameter; empty = auto
    double domain_length = std::numbers::pi;
    std::vector<double> f_coeffs;
    std::vector<std::vector<double>> h_coeffs;  // m noise shapes
    int n_modes = 32;
    int n_quad = 0;                         // collocation points; 0 = 2*n_modes
    double dt = 1e-3;
    double burn_in = 10.0;                  // OU wash-out before a window
    std::uint64_t seed = 1;

    /// Throws ConfigError on the first violated invariant.
    void validate() const;

    [[nodiscard]] int noise_count() const noexcept {
        return static_cast<int>(h_coeffs.size());
    }
    [[nodiscard]] int quad_points() const noexcept {
        return n_quad > 0 ? n_quad : 2 * n_modes;
    }
    [[nodiscard]] double lambda1() const noexcept;
    /// delta if given, otherwise choose_delta(alpha, lambda1).
    [[nodiscard]] double effective_delta() const;
};

struct SpectrumPair {
    std::complex<double> plus;
    std::complex<double> minus;
};

struct RegimeFlags {
    bool a_positive = false;
    bool curve_regime = false;   // a > 8/alpha, i.e. a > 4 * (2/alpha)
    bool gamma_exists = false;   // some gamma in (0, a/2) satisfies the gap condition
};

//! Every derived constant used by the attractor and rotation diagnostics.
struct ConstantsLedger {
    double alpha = 0;
    double delta = 0;
    double lambda1 = 0;
    double a = 0;
    double lf_bound = 0;
    std::optional<double> gamma_star;  // present iff a > 0
    std::optional<double> big_m;       // present iff the gap condition holds at gamma_star
    double a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0, a7 = 0;
    bool regime_1d = false;
    std::vector<SpectrumPair> mu_pairs;
};

/// Threshold for alpha * a above which the gap condition can be met:
/// 2*sqrt(2)/(3*sqrt(2)-4) = 6 + 4*sqrt(2).
inline constexpr double kGapThreshold = 6.0 + 4.0 * std::numbers::sqrt2;

[[nodiscard]] double compute_a(double alpha, double delta, double lambda1);
[[nodiscard]] double choose_delta(double alpha, double lambda1);
[[nodiscard]] double gamma_star(double a);
/// (2/alpha)(1/gamma + 1/(a - 2 gamma)); the quantity that must stay below 1.
[[nodiscard]] double gap_sum(double alpha, double a, double gamma);
[[nodiscard]] double attraction_constant_m(double alpha, double a, double gamma);
[[nodiscard]] RegimeFlags regime_check(double alpha, double a);
[[nodiscard]] RegimeFlags regime_check(const ConstantsLedger& ledger);
[[nodiscard]] SpectrumPair spectrum_pair(double alpha, double lambda);
[[nodiscard]] ConstantsLedger ledger_constants(const Params& params);

}  // namespace sgrd
