#ifndef COHLAB_WAVEPACKET_HPP
#define COHLAB_WAVEPACKET_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

#include "cohlab/fock.hpp"
#include "cohlab/permanent.hpp"

namespace cohlab {

inline constexpr int kMaxGramSize = 64;

/// Gaussian single-particle mode labelled by its phase-space center. All
/// packets of a system share the momentum width sigma and the emission time,
/// so neither enters pairwise overlaps.
struct WavePacket {
    std::array<double, 3> xi{0.0, 0.0, 0.0};  // coordinate-space center
    std::array<double, 3> pi{0.0, 0.0, 0.0};  // momentum-space center
    double sigma = 1.0;                       // momentum-space width
    int dims = 1;                             // spatial dimension, 1 or 3
};

inline void validate(const WavePacket& w) {
    if (!(w.sigma > 0.0))
        throw std::invalid_argument("WavePacket: sigma must be > 0");
    if (w.dims != 1 && w.dims != 3)
        throw std::invalid_argument("WavePacket: dims must be 1 or 3");
    for (int c = 0; c < w.dims; ++c)
        if (!std::isfinite(w.xi[static_cast<std::size_t>(c)]) ||
            !std::isfinite(w.pi[static_cast<std::size_t>(c)]))
            throw std::invalid_argument("WavePacket: centers must be finite");
}

namespace detail {

/// One coordinate factor of the momentum kernel,
/// (pi sigma^2)^{-1/4} exp[-(p - pc)^2/(2 sigma^2) - i xc (p - pc)].
inline complexd kernel_component(double p, double pc, double xc, double sigma) {
    const double dp = p - pc;
    const double mag = std::pow(std::numbers::pi * sigma * sigma, -0.25) *
                       std::exp(-0.5 * dp * dp / (sigma * sigma));
    return std::polar(mag, -xc * dp);
}

inline void require_compatible(const WavePacket& a, const WavePacket& b, const char* who) {
    validate(a);
    validate(b);
    if (a.dims != b.dims)
        throw std::invalid_argument(std::string(who) + ": packets of different dimension");
    if (a.sigma != b.sigma)
        throw std::invalid_argument(std::string(who) + ": packets must share sigma");
}

}  // namespace detail

/// Momentum-space amplitude of the packet; |amplitude|^2 integrates to one.
/// The kernel factorizes across coordinates, so d = 3 is a product of three
/// one-dimensional factors.
inline complexd momentum_amplitude(const WavePacket& w, const std::array<double, 3>& p) {
    validate(w);
    complexd out{1.0, 0.0};
    for (int c = 0; c < w.dims; ++c) {
        const auto i = static_cast<std::size_t>(c);
        out *= detail::kernel_component(p[i], w.pi[i], w.xi[i], w.sigma);
    }
    return out;
}

/// Closed-form Gaussian overlap <a|b> = integral of conj(kernel_a) kernel_b:
///   exp[ -|dpi|^2/(4 s^2) - s^2 |dxi|^2 / 4 - (i/2) dpi . (xi_a + xi_b) ]
/// with dpi = pi_a - pi_b and dxi = xi_a - xi_b. Derived by completing the
/// square per coordinate; the test suite gates it against overlap_quadrature.
inline complexd overlap(const WavePacket& a, const WavePacket& b) {
    detail::require_compatible(a, b, "overlap");
    const double s2 = a.sigma * a.sigma;
    double re = 0.0;
    double im = 0.0;
    for (int c = 0; c < a.dims; ++c) {
        const auto i = static_cast<std::size_t>(c);
        const double dpi = a.pi[i] - b.pi[i];
        const double dxi = a.xi[i] - b.xi[i];
        re += -0.25 * dpi * dpi / s2 - 0.25 * s2 * dxi * dxi;
        im += -0.5 * dpi * (a.xi[i] + b.xi[i]);
    }
    return std::polar(std::exp(re), im);
}

/// Grid requirements for the overlap quadrature oracle.
struct QuadratureSpec {
    double half_width_sigmas = 12.0;  // coverage around both centers, >= 8
    int points = 4096;                // per coordinate, >= 1024
};

struct QuadratureResult {
    complexd value;
    double error_estimate = 0.0;  // |value - half-resolution value|
};

/// Trapezoid evaluation of the overlap integral, per coordinate and
/// multiplied across coordinates (the integrand factorizes, which is also
/// the d = 3 rule: three one-dimensional passes instead of a cubed grid).
/// Refuses grids below the required resolution.
inline QuadratureResult overlap_quadrature(const WavePacket& a, const WavePacket& b,
                                           const QuadratureSpec& spec = {}) {
    detail::require_compatible(a, b, "overlap_quadrature");
    if (spec.half_width_sigmas < 8.0 || spec.points < 1024)
        throw std::invalid_argument(
            "overlap_quadrature: grid must cover >= 8 sigma around both centers "
            "with >= 1024 points per coordinate (got " +
            std::to_string(spec.half_width_sigmas) + " sigma, " +
            std::to_string(spec.points) + " points)");

    const auto integrate_component = [&](int c, int points) {
        const auto i = static_cast<std::size_t>(c);
        const double w = spec.half_width_sigmas * a.sigma;
        const double lo = std::min(a.pi[i], b.pi[i]) - w;
        const double hi = std::max(a.pi[i], b.pi[i]) + w;
        const double h = (hi - lo) / static_cast<double>(points - 1);
        complexd acc{0.0, 0.0};
        for (int g = 0; g < points; ++g) {
            const double p = lo + h * static_cast<double>(g);
            complexd f = std::conj(detail::kernel_component(p, a.pi[i], a.xi[i], a.sigma)) *
                         detail::kernel_component(p, b.pi[i], b.xi[i], b.sigma);
            if (g == 0 || g == points - 1) f *= 0.5;
            acc += f;
        }
        return acc * h;
    };

    complexd full{1.0, 0.0};
    complexd half{1.0, 0.0};
    for (int c = 0; c < a.dims; ++c) {
        full *= integrate_component(c, spec.points);
        half *= integrate_component(c, spec.points / 2 + 1);
    }
    return QuadratureResult{full, std::abs(full - half)};
}

using GramMatrix = Eigen::MatrixXcd;

/// Checks the structural properties every overlap matrix must have:
/// Hermitian, unit diagonal, entries within the unit disk, PSD.
inline void validate_gram(const GramMatrix& g) {
    const int n = static_cast<int>(g.rows());
    if (n == 0 || g.cols() != n)
        throw std::invalid_argument("validate_gram: matrix must be square and nonempty");
    for (int i = 0; i < n; ++i) {
        if (std::abs(g(i, i) - complexd{1.0, 0.0}) > 1e-12)
            throw numerical_error("validate_gram: diagonal entry off unity");
        for (int j = 0; j < i; ++j) {
            if (std::abs(g(i, j) - std::conj(g(j, i))) > 1e-12)
                throw numerical_error("validate_gram: matrix is not Hermitian");
            if (std::abs(g(i, j)) > 1.0 + 1e-12)
                throw numerical_error("validate_gram: off-diagonal entry above unit modulus");
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw numerical_error("validate_gram: matrix is not positive semidefinite");
}

/// G_ij = <packet_i | packet_j>, Hermitian by construction with exact unit
/// diagonal.
inline GramMatrix gram_matrix(std::span<const WavePacket> packets) {
    const int n = static_cast<int>(packets.size());
    if (n < 1) throw std::invalid_argument("gram_matrix: need at least one packet");
    if (n > kMaxGramSize)
        throw std::invalid_argument("gram_matrix: supported up to n = " +
                                    std::to_string(kMaxGramSize));
    GramMatrix g(n, n);
    for (int i = 0; i < n; ++i) {
        g(i, i) = complexd{1.0, 0.0};
        for (int j = i + 1; j < n; ++j) {
            const complexd z = overlap(packets[static_cast<std::size_t>(i)],
                                       packets[static_cast<std::size_t>(j)]);
            g(i, j) = z;
            g(j, i) = std::conj(z);
        }
    }
    validate_gram(g);
    return g;
}

/// Normalization sqrt(perm(G)) of the symmetrized n-packet state. The
/// permanent of a Hermitian PSD matrix is real and non-negative; anything
/// else is a numerical failure.
inline double nboson_norm(std::span<const WavePacket> packets) {
    const GramMatrix g = gram_matrix(packets);
    const complexd p = permanent(g);
    if (std::abs(p.imag()) > 1e-10 * std::max(1.0, std::abs(p)))
        throw numerical_error("nboson_norm: permanent has a non-negligible imaginary part");
    if (p.real() < -1e-10)
        throw numerical_error("nboson_norm: permanent is negative");
    return std::sqrt(std::max(p.real(), 0.0));
}

}  // namespace cohlab

#endif  // COHLAB_WAVEPACKET_HPP
