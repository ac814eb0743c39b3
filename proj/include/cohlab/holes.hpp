#ifndef COHLAB_HOLES_HPP
#define COHLAB_HOLES_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "cohlab/fock.hpp"

namespace cohlab {

/// State over the hole basis of a condensate holding n_f quanta. Index j
/// counts removed quanta, so hole state j is particle number state n_f - j.
/// The ladder ends on both sides: j = 0 is the full condensate (no quantum
/// can be added at the fixed energy budget) and j = n_f is the particle
/// vacuum. Kept separate from StateVector so the reflected indexing never
/// mixes with the particle representation by accident.
struct HoleState {
    int n_f = 0;
    std::vector<complexd> coeff;  // index j = 0..n_f

    int hole_dim() const { return static_cast<int>(coeff.size()); }
};

inline complexd inner(const HoleState& a, const HoleState& b) {
    if (a.n_f != b.n_f)
        throw std::invalid_argument("inner: hole states over different condensates");
    complexd acc{0.0, 0.0};
    for (int j = 0; j <= a.n_f; ++j)
        acc += std::conj(a.coeff[static_cast<std::size_t>(j)]) *
               b.coeff[static_cast<std::size_t>(j)];
    return acc;
}

inline double norm(const HoleState& s) {
    double acc = 0.0;
    for (const auto& c : s.coeff) acc += std::norm(c);
    return std::sqrt(acc);
}

inline double norm_deficit(const HoleState& s) {
    double acc = 0.0;
    for (const auto& c : s.coeff) acc += std::norm(c);
    return 1.0 - acc;
}

inline bool is_normalized(const HoleState& s, double tol = kNormTolerance) {
    return std::abs(norm(s) - 1.0) <= tol;
}

inline HoleState operator+(const HoleState& a, const HoleState& b) {
    if (a.n_f != b.n_f)
        throw std::invalid_argument("HoleState +: mismatched condensates");
    HoleState out = a;
    for (std::size_t j = 0; j < out.coeff.size(); ++j) out.coeff[j] += b.coeff[j];
    return out;
}

inline HoleState operator-(const HoleState& a, const HoleState& b) {
    if (a.n_f != b.n_f)
        throw std::invalid_argument("HoleState -: mismatched condensates");
    HoleState out = a;
    for (std::size_t j = 0; j < out.coeff.size(); ++j) out.coeff[j] -= b.coeff[j];
    return out;
}

inline HoleState operator*(complexd z, const HoleState& s) {
    HoleState out = s;
    for (auto& c : out.coeff) c *= z;
    return out;
}

inline HoleState zero_hole_state(int n_f) {
    if (n_f < 1) throw std::invalid_argument("hole states need n_f >= 1");
    HoleState s;
    s.n_f = n_f;
    s.coeff.assign(static_cast<std::size_t>(n_f) + 1, complexd{0.0, 0.0});
    return s;
}

/// The fully developed condensate: zero holes, particle number state n_f.
inline HoleState bec_state(int n_f) {
    HoleState s = zero_hole_state(n_f);
    s.coeff[0] = complexd{1.0, 0.0};
    return s;
}

inline HoleState hole_number_state(int j, int n_f) {
    HoleState s = zero_hole_state(n_f);
    if (j < 0 || j > n_f)
        throw std::out_of_range("hole_number_state: ladder exhausted, the condensate holds only " +
                                std::to_string(n_f) + " quanta (requested j = " +
                                std::to_string(j) + ")");
    s.coeff[static_cast<std::size_t>(j)] = complexd{1.0, 0.0};
    return s;
}

/// Hole <-> particle basis bijection j = n_f - n.
inline StateVector to_particle_basis(const HoleState& s, int dim) {
    if (dim < s.n_f + 1)
        throw std::invalid_argument("to_particle_basis: dim must be at least n_f + 1");
    StateVector out = zero_state(dim);
    for (int j = 0; j <= s.n_f; ++j)
        out.coeff[static_cast<std::size_t>(s.n_f - j)] = s.coeff[static_cast<std::size_t>(j)];
    return out;
}

inline HoleState from_particle_basis(const StateVector& s, int n_f) {
    HoleState out = zero_hole_state(n_f);
    for (int n = n_f + 1; n < s.dim(); ++n)
        if (std::norm(s.coeff[static_cast<std::size_t>(n)]) > 0.0)
            throw std::invalid_argument(
                "from_particle_basis: support above n_f has no hole image");
    for (int j = 0; j <= n_f; ++j) {
        const int n = n_f - j;
        if (n < s.dim())
            out.coeff[static_cast<std::size_t>(j)] = s.coeff[static_cast<std::size_t>(n)];
    }
    return out;
}

/// Result of the hole-raising step a|j> = sqrt(j+1)|j+1>: at finite n_f the
/// ladder bottoms out on the particle vacuum, so the amplitude that would
/// pass j = n_f is dropped and reported.
struct HoleAnnihilationResult {
    HoleState state;
    double leakage = 0.0;
};

inline HoleAnnihilationResult annihilation_applied(const HoleState& s) {
    HoleAnnihilationResult r;
    r.state = zero_hole_state(s.n_f);
    for (int j = 1; j <= s.n_f; ++j)
        r.state.coeff[static_cast<std::size_t>(j)] =
            std::sqrt(static_cast<double>(j)) * s.coeff[static_cast<std::size_t>(j - 1)];
    r.leakage = static_cast<double>(s.n_f + 1) *
                std::norm(s.coeff[static_cast<std::size_t>(s.n_f)]);
    return r;
}

/// Result of the hole-lowering step a†|j> = sqrt(j)|j-1>. The j = 0 amplitude
/// is annihilated exactly (no further quantum fits into the condensate); the
/// flag records whether that constraint fired.
struct HoleCreationResult {
    HoleState state;
    bool constraint_engaged = false;
};

inline HoleCreationResult creation_applied(const HoleState& s) {
    HoleCreationResult r;
    r.state = zero_hole_state(s.n_f);
    for (int j = 0; j < s.n_f; ++j)
        r.state.coeff[static_cast<std::size_t>(j)] =
            std::sqrt(static_cast<double>(j + 1)) * s.coeff[static_cast<std::size_t>(j + 1)];
    r.constraint_engaged = std::norm(s.coeff[0]) > 0.0;
    return r;
}

/// <s| a a† |s> evaluated by operator application in the hole basis; the hole
/// counter, diagonal with eigenvalue j on |j> once the j = 0 constraint is in
/// place.
inline double hole_number_expectation(const HoleState& s) {
    if (!is_normalized(s))
        throw std::invalid_argument("hole_number_expectation: state is not normalized");
    const HoleState lowered = creation_applied(s).state;
    const HoleState back = annihilation_applied(lowered).state;
    return inner(s, back).real();
}

/// Coherent state of the raising side of the hole ladder:
/// c_j = e^{-|alpha|^2/2} (alpha*)^j / sqrt(j!), cut at j = n_f. The norm
/// deficit equals the Poisson tail of rate |alpha|^2 beyond n_f.
inline HoleState dual_coherent_state(complexd alpha, int n_f) {
    HoleState s = zero_hole_state(n_f);
    // extended-precision recurrence so each stored coefficient carries a
    // single rounding; the tiny tail terms are what the eigen-residual
    // diagnostics measure
    std::complex<long double> c{
        std::exp(-0.5L * static_cast<long double>(std::norm(alpha))), 0.0L};
    s.coeff[0] = complexd{static_cast<double>(c.real()), static_cast<double>(c.imag())};
    const std::complex<long double> ac{alpha.real(), -alpha.imag()};
    for (int j = 1; j <= n_f; ++j) {
        c *= ac / std::sqrt(static_cast<long double>(j));
        s.coeff[static_cast<std::size_t>(j)] =
            complexd{static_cast<double>(c.real()), static_cast<double>(c.imag())};
    }
    return s;
}

/// Displacement with the ladder roles swapped,
///   D†(alpha) = e^{-|alpha|^2/2} exp(alpha* a) exp(-alpha a†),
/// applied to the condensate as finite series of hole-ladder steps (a raises
/// a hole, a† lowers one). Matches dual_coherent_state up to the reported
/// tail.
inline HoleState dual_displacement_applied(complexd alpha, int n_f,
                                           double tail_tolerance = 1e-12) {
    const double tail = poisson_tail(std::norm(alpha), n_f + 1);
    if (tail > tail_tolerance)
        throw truncation_error(
            "dual_displacement_applied: Poisson tail " + std::to_string(tail) +
                " beyond n_f = " + std::to_string(n_f) + " exceeds tolerance",
            tail);
    // exp(-alpha a†) factor: a† kills |0>_† so only the k = 0 term survives.
    HoleState sum = bec_state(n_f);
    HoleState term = sum;
    const complexd z = std::conj(alpha);
    for (int k = 1; k <= n_f; ++k) {
        term = (z / static_cast<double>(k)) * annihilation_applied(term).state;
        sum = sum + term;
        if (norm(term) < 1e-300) break;
    }
    return complexd{std::exp(-0.5 * std::norm(alpha)), 0.0} * sum;
}

enum class LadderOperator { annihilation, creation };

/// || Op s - lambda s || in the hole representation. Accepts slightly
/// unnormalized states (a cut coherent series keeps its ideal coefficients,
/// so its residual is exactly the tail term). The shift, subtraction and
/// norm run in extended precision so the result reflects the stored
/// coefficients rather than the evaluation arithmetic; residuals down at the
/// Poisson-tail scale of large n_f stay meaningful.
inline double eigen_residual(const HoleState& s, LadderOperator which, complexd lambda) {
    using cld = std::complex<long double>;
    const cld lam{lambda.real(), lambda.imag()};
    const auto at = [&s](int j) {
        const complexd c = s.coeff[static_cast<std::size_t>(j)];
        return cld{c.real(), c.imag()};
    };
    long double acc = 0.0L;
    for (int j = 0; j <= s.n_f; ++j) {
        cld applied{0.0L, 0.0L};
        if (which == LadderOperator::annihilation) {
            if (j >= 1) applied = std::sqrt(static_cast<long double>(j)) * at(j - 1);
        } else {
            if (j < s.n_f) applied = std::sqrt(static_cast<long double>(j + 1)) * at(j + 1);
        }
        acc += std::norm(applied - lam * at(j));
    }
    return static_cast<double>(std::sqrt(acc));
}

}  // namespace cohlab

#endif  // COHLAB_HOLES_HPP
