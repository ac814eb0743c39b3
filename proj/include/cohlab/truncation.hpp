#ifndef COHLAB_TRUNCATION_HPP
#define COHLAB_TRUNCATION_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "cohlab/fock.hpp"

namespace cohlab {

/// Single field mode with relativistic dispersion w = sqrt(m^2 + |k|^2).
struct ModeSpec {
    double mass = 0.0;      // energy units
    double momentum = 0.0;  // |k|, energy units

    double frequency() const { return std::hypot(mass, momentum); }
};

inline void validate(const ModeSpec& m) {
    if (!(m.mass >= 0.0))
        throw std::invalid_argument("ModeSpec: mass must be >= 0");
    if (!(m.momentum >= 0.0))
        throw std::invalid_argument("ModeSpec: momentum must be >= 0");
}

struct EnergyBudget {
    double e_max = 0.0;
};

inline void validate(const EnergyBudget& b) {
    if (!(b.e_max > 0.0))
        throw std::invalid_argument("EnergyBudget: e_max must be > 0");
}

/// Largest occupation the budget admits, floor(e_max / w). A massless mode
/// at k = 0 has no bound; that case (and a capacity beyond the integer
/// range) is reported as an empty optional rather than a number.
inline std::optional<std::int64_t> mode_capacity(const EnergyBudget& budget,
                                                 const ModeSpec& mode) {
    validate(budget);
    validate(mode);
    const double w = mode.frequency();
    if (w == 0.0) return std::nullopt;
    const double q = std::floor(budget.e_max / w);
    if (q >= 9.0e18) return std::nullopt;
    return static_cast<std::int64_t>(q);
}

/// Coherent series with every component above n_f removed. The raw series
/// keeps the bare coefficients alpha^n / sqrt(n!) (no Gaussian prefactor);
/// its squared norm and the unit-norm state are returned alongside, since
/// both are needed to quantify how well the cut state approximates the
/// ideal one.
struct TruncatedCoherent {
    StateVector raw;         // c_n = alpha^n / sqrt(n!), n = 0..n_f
    double squared_norm = 0.0;
    StateVector normalized;  // raw / sqrt(squared_norm)
};

inline TruncatedCoherent truncated_coherent(complexd alpha, int n_f) {
    if (n_f < 0) throw std::invalid_argument("truncated_coherent: n_f must be >= 0");
    TruncatedCoherent t;
    t.raw = zero_state(n_f + 1);
    complexd c{1.0, 0.0};
    t.raw.coeff[0] = c;
    for (int n = 1; n <= n_f; ++n) {
        c *= alpha / std::sqrt(static_cast<double>(n));
        t.raw.coeff[static_cast<std::size_t>(n)] = c;
    }
    double s = 0.0;
    for (const auto& z : t.raw.coeff) s += std::norm(z);
    t.squared_norm = s;
    t.normalized = complexd{1.0 / std::sqrt(s), 0.0} * t.raw;
    return t;
}

/// |<ideal coherent | normalized truncated>|^2, evaluated as a vector inner
/// product on the shared components (the cut state has none above n_f). The
/// deficit 1 - fidelity is exactly the Poisson tail of rate |alpha|^2.
inline double truncation_fidelity(complexd alpha, int n_f) {
    const TruncatedCoherent t = truncated_coherent(alpha, n_f);
    const StateVector ideal = coherent_state(alpha, n_f + 1);
    return std::norm(inner(ideal, t.normalized));
}

}  // namespace cohlab

#endif  // COHLAB_TRUNCATION_HPP
