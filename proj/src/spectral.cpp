#include "sgrd/spectral.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "sgrd/error.hpp"

namespace sgrd {

SpectralOperator::SpectralOperator(double kappa, double length, int n_modes, int n_quad)
    : kappa_(kappa), length_(length), n_modes_(n_modes), n_quad_(n_quad) {
    if (n_modes < 2) throw ShapeError("SpectralOperator: need at least 2 modes");
    if (n_quad < 2 * n_modes)
        throw ShapeError("SpectralOperator: collocation size must be >= 2*n_modes");
    const auto n = static_cast<std::size_t>(n_modes);
    const auto m = static_cast<std::size_t>(n_quad);

    lambdas_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double k = static_cast<double>(i) * std::numbers::pi / length;
        lambdas_[i] = kappa * k * k;
    }

    nodes_.resize(m);
    for (std::size_t k = 0; k < m; ++k)
        nodes_[k] = (static_cast<double>(k) + 0.5) * length / static_cast<double>(m);

    synth_.resize(m * n);
    anal_.resize(n * m);
    const double w = length / static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const double e = basis(static_cast<int>(i), nodes_[k]);
            synth_[k * n + i] = e;
            anal_[i * m + k] = w * e;
        }
    }
}

double SpectralOperator::basis(int i, double x) const {
    if (i == 0) return 1 / std::sqrt(length_);
    return std::sqrt(2 / length_) * std::cos(i * std::numbers::pi * x / length_);
}

void SpectralOperator::to_physical(std::span<const double> coeffs,
                                   std::span<double> samples) const {
    const auto n = static_cast<std::size_t>(n_modes_);
    const auto m = static_cast<std::size_t>(n_quad_);
    if (coeffs.size() != n || samples.size() != m)
        throw ShapeError(fmt::format("to_physical: expected {} coefficients -> {} samples, got {} -> {}",
                                     n, m, coeffs.size(), samples.size()));
    const double* row = synth_.data();
    for (std::size_t k = 0; k < m; ++k, row += n) {
        double acc = 0;
        for (std::size_t i = 0; i < n; ++i) acc += row[i] * coeffs[i];
        samples[k] = acc;
    }
}

void SpectralOperator::to_spectral(std::span<const double> samples,
                                   std::span<double> coeffs) const {
    const auto n = static_cast<std::size_t>(n_modes_);
    const auto m = static_cast<std::size_t>(n_quad_);
    if (coeffs.size() != n || samples.size() != m)
        throw ShapeError(fmt::format("to_spectral: expected {} samples -> {} coefficients, got {} -> {}",
                                     m, n, samples.size(), coeffs.size()));
    const double* row = anal_.data();
    for (std::size_t i = 0; i < n; ++i, row += m) {
        double acc = 0;
        for (std::size_t k = 0; k < m; ++k) acc += row[k] * samples[k];
        coeffs[i] = acc;
    }
}

SpectralOperator build_operator(const Params& params) {
    return {params.kappa, params.domain_length, params.n_modes, params.quad_points()};
}

std::vector<double> to_physical(const SpectralField& field, const SpectralOperator& op) {
    std::vector<double> samples(static_cast<std::size_t>(op.n_quad()));
    op.to_physical(field.coeffs, samples);
    return samples;
}

SpectralField to_spectral(std::span<const double> samples, const SpectralOperator& op) {
    SpectralField out(static_cast<std::size_t>(op.n_modes()));
    op.to_spectral(samples, out.coeffs);
    return out;
}

double mean_part(const SpectralField& field, const SpectralOperator& op) {
    if (field.size() == 0) return 0;
    return field[0] / std::sqrt(op.length());
}

SpectralField apply_a(const SpectralField& field, const SpectralOperator& op) {
    if (field.size() != static_cast<std::size_t>(op.n_modes()))
        throw ShapeError("apply_a: field length does not match operator");
    SpectralField out(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) out[i] = op.lambdas()[i] * field[i];
    return out;
}

double evaluate(const SpectralField& field, const SpectralOperator& op, double x) {
    double acc = 0;
    for (std::size_t i = 0; i < field.size(); ++i)
        acc += field[i] * op.basis(static_cast<int>(i), x);
    return acc;
}

double derivative(const SpectralField& field, const SpectralOperator& op, double x) {
    const double L = op.length();
    double acc = 0;
    for (std::size_t i = 1; i < field.size(); ++i) {
        const double k = static_cast<double>(i) * std::numbers::pi / L;
        acc -= field[i] * std::sqrt(2 / L) * k * std::sin(k * x);
    }
    return acc;
}

double l2_norm(std::span<const double> coeffs) {
    double acc = 0;
    for (double c : coeffs) acc += c * c;
    return std::sqrt(acc);
}

double half_a_norm(std::span<const double> coeffs, const SpectralOperator& op) {
    double acc = 0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) acc += op.lambdas()[i] * coeffs[i] * coeffs[i];
    return std::sqrt(acc);
}

double a_norm(std::span<const double> coeffs, const SpectralOperator& op) {
    double acc = 0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const double v = op.lambdas()[i] * coeffs[i];
        acc += v * v;
    }
    return std::sqrt(acc);
}

SpectralField padded_field(std::span<const double> c, std::size_t n) {
    if (c.size() > n)
        throw ShapeError(fmt::format("field has {} coefficients, truncation allows {}", c.size(), n));
    SpectralField out(n);
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i];
    return out;
}

}  // namespace sgrd
