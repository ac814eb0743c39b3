#ifndef COHLAB_FOCK_HPP
#define COHLAB_FOCK_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cohlab {

using complexd = std::complex<double>;

/// Normalization tolerance shared by every routine that requires a unit state.
inline constexpr double kNormTolerance = 1e-12;

/// A series was cut off at the basis boundary and the requested tolerance
/// cannot be met at the given cutoff; carries the computed tail mass.
class truncation_error : public std::runtime_error {
public:
    truncation_error(const std::string& what, double tail)
        : std::runtime_error(what), tail_(tail) {}
    double tail() const { return tail_; }

private:
    double tail_;
};

/// A quantity violated a bound that exact arithmetic guarantees.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pure state over a truncated single-mode number basis, coeff[n] = <n|psi>.
/// Operators act inside the fixed cutoff; whatever would cross the boundary
/// is measured and reported, never silently discarded.
struct StateVector {
    std::vector<complexd> coeff;

    int dim() const { return static_cast<int>(coeff.size()); }
};

inline StateVector zero_state(int dim) {
    if (dim < 1) throw std::invalid_argument("zero_state: dim must be >= 1");
    StateVector s;
    s.coeff.assign(static_cast<std::size_t>(dim), complexd{0.0, 0.0});
    return s;
}

inline complexd inner(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("inner: dimension mismatch");
    complexd acc{0.0, 0.0};
    for (int n = 0; n < a.dim(); ++n)
        acc += std::conj(a.coeff[n]) * b.coeff[n];
    return acc;
}

inline double norm(const StateVector& s) {
    double acc = 0.0;
    for (const auto& c : s.coeff) acc += std::norm(c);
    return std::sqrt(acc);
}

/// 1 - sum |c_n|^2; the probability mass lost to the cutoff for states whose
/// untruncated form is normalized.
inline double norm_deficit(const StateVector& s) {
    double acc = 0.0;
    for (const auto& c : s.coeff) acc += std::norm(c);
    return 1.0 - acc;
}

inline bool is_normalized(const StateVector& s, double tol = kNormTolerance) {
    return std::abs(norm(s) - 1.0) <= tol;
}

inline StateVector operator+(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("StateVector +: dimension mismatch");
    StateVector out = a;
    for (int n = 0; n < out.dim(); ++n) out.coeff[n] += b.coeff[n];
    return out;
}

inline StateVector operator-(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("StateVector -: dimension mismatch");
    StateVector out = a;
    for (int n = 0; n < out.dim(); ++n) out.coeff[n] -= b.coeff[n];
    return out;
}

inline StateVector operator*(complexd z, const StateVector& s) {
    StateVector out = s;
    for (auto& c : out.coeff) c *= z;
    return out;
}

inline StateVector normalized(const StateVector& s) {
    const double n = norm(s);
    if (n < 1e-300)
        throw numerical_error("normalized: state has vanishing norm");
    return complexd{1.0 / n, 0.0} * s;
}

/// Harmonic-oscillator phase-space data in natural units (hbar = 1).
struct OscillatorParams {
    double mass = 1.0;
    double omega = 1.0;
    double x0 = 0.0;
    double p0 = 0.0;
};

inline void validate(const OscillatorParams& p) {
    if (!(p.mass > 0.0))
        throw std::invalid_argument("OscillatorParams: mass must be > 0");
    if (!(p.omega > 0.0))
        throw std::invalid_argument("OscillatorParams: omega must be > 0");
}

struct QuadratureMoments {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = 0.0;
    double var_p = 0.0;

    double uncertainty_product() const { return var_x * var_p; }
};

inline StateVector number_state(int n, int dim) {
    if (dim < 1) throw std::invalid_argument("number_state: dim must be >= 1");
    if (n < 0 || n >= dim)
        throw std::out_of_range("number_state: occupation " + std::to_string(n) +
                                " outside basis of dimension " + std::to_string(dim));
    StateVector s = zero_state(dim);
    s.coeff[static_cast<std::size_t>(n)] = complexd{1.0, 0.0};
    return s;
}

/// Poisson tail sum_{n >= from} e^-rate rate^n / n!, summed upward so small
/// tails keep full relative accuracy.
inline double poisson_tail(double rate, int from) {
    if (!(rate >= 0.0)) throw std::invalid_argument("poisson_tail: rate must be >= 0");
    if (from <= 0) return 1.0;
    if (rate == 0.0) return 0.0;
    double term = std::exp(-rate);
    for (int k = 1; k <= from; ++k) term *= rate / static_cast<double>(k);
    double sum = term;
    for (int k = from + 1; k < from + 2000; ++k) {
        term *= rate / static_cast<double>(k);
        sum += term;
        if (term < sum * 1e-20) break;
    }
    return sum;
}

/// Coherent-state series c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!), cut at the
/// basis boundary. The norm deficit of the result equals the Poisson tail of
/// rate |alpha|^2 beyond dim-1.
inline StateVector coherent_state(complexd alpha, int dim) {
    if (dim < 1) throw std::invalid_argument("coherent_state: dim must be >= 1");
    StateVector s = zero_state(dim);
    complexd c = complexd{std::exp(-0.5 * std::norm(alpha)), 0.0};
    s.coeff[0] = c;
    for (int n = 1; n < dim; ++n) {
        c *= alpha / std::sqrt(static_cast<double>(n));
        s.coeff[static_cast<std::size_t>(n)] = c;
    }
    return s;
}

/// (a s)_n = sqrt(n+1) s_{n+1}. The top output component would read s_dim,
/// which the truncated basis does not hold; it is set to zero and is the one
/// truncation-affected entry of the result.
inline StateVector annihilation_applied(const StateVector& s) {
    StateVector out = zero_state(s.dim());
    for (int n = 0; n + 1 < s.dim(); ++n)
        out.coeff[static_cast<std::size_t>(n)] =
            std::sqrt(static_cast<double>(n + 1)) * s.coeff[static_cast<std::size_t>(n + 1)];
    return out;
}

/// Result of a raising step: the amplitude that would land on |dim> is
/// dropped and its squared magnitude reported as leakage.
struct CreationResult {
    StateVector state;
    double leakage = 0.0;
};

/// (a† s)_n = sqrt(n) s_{n-1}.
inline CreationResult creation_applied(const StateVector& s) {
    CreationResult r;
    r.state = zero_state(s.dim());
    for (int n = 1; n < s.dim(); ++n)
        r.state.coeff[static_cast<std::size_t>(n)] =
            std::sqrt(static_cast<double>(n)) * s.coeff[static_cast<std::size_t>(n - 1)];
    r.leakage = static_cast<double>(s.dim()) *
                std::norm(s.coeff[static_cast<std::size_t>(s.dim() - 1)]);
    return r;
}

/// exp(z a) s as a power series of ladder applications; terminates because a
/// is nilpotent on a truncated basis.
inline StateVector exp_annihilation_applied(complexd z, const StateVector& s) {
    StateVector sum = s;
    StateVector term = s;
    for (int k = 1; k <= s.dim(); ++k) {
        term = (z / static_cast<double>(k)) * annihilation_applied(term);
        sum = sum + term;
        if (norm(term) < 1e-300) break;
    }
    return sum;
}

/// exp(z a†) s as a power series of ladder applications; per-term boundary
/// leakage is dropped (callers control it through the cutoff).
inline StateVector exp_creation_applied(complexd z, const StateVector& s) {
    StateVector sum = s;
    StateVector term = s;
    for (int k = 1; k <= s.dim(); ++k) {
        term = (z / static_cast<double>(k)) * creation_applied(term).state;
        sum = sum + term;
        if (norm(term) < 1e-300) break;
    }
    return sum;
}

/// D(alpha)|0> through the normal-ordered factorization
///   D(alpha) = e^{-|alpha|^2/2} exp(alpha a†) exp(-alpha* a),
/// each factor applied as a finite series of ladder steps. Fails if the
/// Poisson tail beyond the cutoff exceeds tail_tolerance.
inline StateVector displaced_vacuum(complexd alpha, int dim,
                                    double tail_tolerance = 1e-12) {
    if (dim < 1) throw std::invalid_argument("displaced_vacuum: dim must be >= 1");
    const double tail = poisson_tail(std::norm(alpha), dim);
    if (tail > tail_tolerance)
        throw truncation_error(
            "displaced_vacuum: Poisson tail " + std::to_string(tail) +
                " beyond cutoff " + std::to_string(dim) + " exceeds tolerance",
            tail);
    StateVector s = number_state(0, dim);
    s = exp_annihilation_applied(-std::conj(alpha), s);
    s = exp_creation_applied(alpha, s);
    return complexd{std::exp(-0.5 * std::norm(alpha)), 0.0} * s;
}

/// alpha = sqrt(m w / 2) x0 + i p0 / sqrt(2 m w)
inline complexd alpha_from_phase_space(const OscillatorParams& p) {
    validate(p);
    const double mw = p.mass * p.omega;
    return complexd{std::sqrt(0.5 * mw) * p.x0, p.p0 / std::sqrt(2.0 * mw)};
}

struct PhaseSpacePoint {
    double x0 = 0.0;
    double p0 = 0.0;
};

/// Unique inverse of alpha_from_phase_space:
/// x0 = sqrt(2/(m w)) Re alpha, p0 = sqrt(2 m w) Im alpha.
inline PhaseSpacePoint phase_space_from_alpha(complexd alpha, double mass, double omega) {
    if (!(mass > 0.0) || !(omega > 0.0))
        throw std::invalid_argument("phase_space_from_alpha: mass and omega must be > 0");
    const double mw = mass * omega;
    return PhaseSpacePoint{std::sqrt(2.0 / mw) * alpha.real(),
                           std::sqrt(2.0 * mw) * alpha.imag()};
}

/// Quadrature means and variances with x = (a + a†)/sqrt(2 m w) and
/// p = -i sqrt(m w / 2)(a - a†). Requires a normalized state.
inline QuadratureMoments quadrature_moments(const StateVector& s, const OscillatorParams& p) {
    validate(p);
    if (!is_normalized(s))
        throw std::invalid_argument("quadrature_moments: state is not normalized");
    const double mw = p.mass * p.omega;
    const StateVector a_s = annihilation_applied(s);
    const StateVector ad_s = creation_applied(s).state;

    const StateVector xs = complexd{1.0 / std::sqrt(2.0 * mw), 0.0} * (a_s + ad_s);
    const StateVector ps = complexd{0.0, -std::sqrt(0.5 * mw)} * (a_s - ad_s);

    QuadratureMoments m;
    m.mean_x = inner(s, xs).real();
    m.mean_p = inner(s, ps).real();
    m.var_x = inner(xs, xs).real() - m.mean_x * m.mean_x;
    m.var_p = inner(ps, ps).real() - m.mean_p * m.mean_p;
    return m;
}

/// Coordinate-space amplitude (m w / pi)^{1/4} exp[-m w (x - x0)^2 / 2 + i p0 x]
/// with (x0, p0) recovered from alpha.
inline complexd coordinate_wavefunction(complexd alpha, const OscillatorParams& p, double x) {
    validate(p);
    const PhaseSpacePoint c = phase_space_from_alpha(alpha, p.mass, p.omega);
    const double mw = p.mass * p.omega;
    const double mag = std::pow(mw / std::numbers::pi, 0.25) *
                       std::exp(-0.5 * mw * (x - c.x0) * (x - c.x0));
    return std::polar(mag, c.p0 * x);
}

/// Phase evolution e^{-i w t (n + 1/2)} per number component. The zero-point
/// phase is kept; all observables are insensitive to it.
inline StateVector evolve_oscillator(const StateVector& s, const OscillatorParams& p, double t) {
    validate(p);
    StateVector out = s;
    for (int n = 0; n < s.dim(); ++n)
        out.coeff[static_cast<std::size_t>(n)] *=
            std::polar(1.0, -p.omega * t * (static_cast<double>(n) + 0.5));
    return out;
}

inline double mean_occupation(const StateVector& s) {
    double acc = 0.0;
    for (int n = 0; n < s.dim(); ++n)
        acc += static_cast<double>(n) * std::norm(s.coeff[static_cast<std::size_t>(n)]);
    return acc;
}

}  // namespace cohlab

#endif  // COHLAB_FOCK_HPP
