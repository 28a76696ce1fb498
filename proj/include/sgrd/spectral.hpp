#pragma once

#include <span>
#include <vector>

#include "sgrd/core.hpp"

namespace sgrd {

//! Coefficients of a field in the orthonormal Neumann cosine basis.
struct SpectralField {
    std::vector<double> coeffs;

    SpectralField() = default;
    explicit SpectralField(std::size_t n) : coeffs(n, 0.0) {}
    explicit SpectralField(std::vector<double> c) : coeffs(std::move(c)) {}

    [[nodiscard]] std::size_t size() const noexcept { return coeffs.size(); }
    double& operator[](std::size_t i) { return coeffs[i]; }
    double operator[](std::size_t i) const { return coeffs[i]; }

    friend bool operator==(const SpectralField&, const SpectralField&) = default;
};

//---------------------------------------------------------------------------//
/*!
 * The operator A = -K d^2/dx^2 on [0, L] with Neumann ends, truncated to the
 * first N cosine modes e_0 = 1/sqrt(L), e_i = sqrt(2/L) cos(i pi x / L).
 *
 * Transforms sample at the M cell midpoints x_k = (k + 1/2) L / M. The midpoint
 * rule integrates products of two basis functions exactly when both indices are
 * below M, so to_spectral(to_physical(c)) == c and Parseval holds exactly (up to
 * rounding) on the truncated space.
 */
class SpectralOperator {
  public:
    SpectralOperator(double kappa, double length, int n_modes, int n_quad);

    [[nodiscard]] int n_modes() const noexcept { return n_modes_; }
    [[nodiscard]] int n_quad() const noexcept { return n_quad_; }
    [[nodiscard]] double length() const noexcept { return length_; }
    [[nodiscard]] double kappa() const noexcept { return kappa_; }
    [[nodiscard]] std::span<const double> lambdas() const noexcept { return lambdas_; }
    [[nodiscard]] double lambda(int i) const { return lambdas_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] double lambda1() const { return lambdas_[1]; }
    [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }

    /// e_i(x)
    [[nodiscard]] double basis(int i, double x) const;

    void to_physical(std::span<const double> coeffs, std::span<double> samples) const;
    void to_spectral(std::span<const double> samples, std::span<double> coeffs) const;

  private:
    double kappa_;
    double length_;
    int n_modes_;
    int n_quad_;
    std::vector<double> lambdas_;
    std::vector<double> nodes_;
    std::vector<double> synth_;  // M x N, row-major: e_i(x_k)
    std::vector<double> anal_;   // N x M, row-major: (L/M) e_i(x_k)
};

[[nodiscard]] SpectralOperator build_operator(const Params& params);

[[nodiscard]] std::vector<double> to_physical(const SpectralField& field,
                                              const SpectralOperator& op);
[[nodiscard]] SpectralField to_spectral(std::span<const double> samples,
                                        const SpectralOperator& op);

/// Spatial average of the field: coefficient 0 divided by sqrt(L).
[[nodiscard]] double mean_part(const SpectralField& field, const SpectralOperator& op);

/// Multiplies coefficient i by lambda_i.
[[nodiscard]] SpectralField apply_a(const SpectralField& field, const SpectralOperator& op);

/// Point evaluation and x-derivative of the cosine series.
[[nodiscard]] double evaluate(const SpectralField& field, const SpectralOperator& op, double x);
[[nodiscard]] double derivative(const SpectralField& field, const SpectralOperator& op, double x);

/// L2 norm, ||A^{1/2} u|| and ||A u|| from coefficients.
[[nodiscard]] double l2_norm(std::span<const double> coeffs);
[[nodiscard]] double half_a_norm(std::span<const double> coeffs, const SpectralOperator& op);
[[nodiscard]] double a_norm(std::span<const double> coeffs, const SpectralOperator& op);

/// Zero-padded copy of c of length n; throws ShapeError if c is longer.
[[nodiscard]] SpectralField padded_field(std::span<const double> c, std::size_t n);

}  // namespace sgrd
