#ifndef COHLAB_PERMANENT_HPP
#define COHLAB_PERMANENT_HPP

#include <Eigen/Core>
#include <algorithm>
#include <bit>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cohlab/fock.hpp"

namespace cohlab {

inline constexpr int kPermanentBruteforceLimit = 10;
inline constexpr int kPermanentRyserLimit = 30;

namespace detail {

inline void require_square(const Eigen::MatrixXcd& m, const char* who) {
    if (m.rows() != m.cols())
        throw std::invalid_argument(std::string(who) + ": matrix must be square");
}

}  // namespace detail

/// Permutation-sum definition, sum over all sigma of prod_i M(i, sigma_i).
/// Factorial cost; guarded at n <= 10. Accumulates in extended precision.
inline complexd permanent_bruteforce(const Eigen::MatrixXcd& m) {
    detail::require_square(m, "permanent_bruteforce");
    const int n = static_cast<int>(m.rows());
    if (n > kPermanentBruteforceLimit)
        throw std::invalid_argument("permanent_bruteforce: n > " +
                                    std::to_string(kPermanentBruteforceLimit));
    if (n == 0) return complexd{1.0, 0.0};

    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::complex<long double> total{0.0L, 0.0L};
    do {
        std::complex<long double> prod{1.0L, 0.0L};
        for (int i = 0; i < n; ++i) {
            const complexd e = m(i, idx[static_cast<std::size_t>(i)]);
            prod *= std::complex<long double>(e.real(), e.imag());
        }
        total += prod;
    } while (std::next_permutation(idx.begin(), idx.end()));
    return complexd{static_cast<double>(total.real()), static_cast<double>(total.imag())};
}

/// Ryser inclusion-exclusion
///   perm(M) = (-1)^n sum_{S != 0} (-1)^|S| prod_i sum_{j in S} M(i, j)
/// with the column subsets visited in Gray-code order so each step updates
/// the row sums by a single column. O(2^n n); guarded at n <= 30.
inline complexd permanent_ryser(const Eigen::MatrixXcd& m) {
    detail::require_square(m, "permanent_ryser");
    const int n = static_cast<int>(m.rows());
    if (n > kPermanentRyserLimit)
        throw std::invalid_argument("permanent_ryser: n > " +
                                    std::to_string(kPermanentRyserLimit));
    if (n == 0) return complexd{1.0, 0.0};

    std::vector<std::complex<long double>> rowsum(static_cast<std::size_t>(n),
                                                  {0.0L, 0.0L});
    std::complex<long double> total{0.0L, 0.0L};
    std::uint64_t gray = 0;
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t k = 1; k < count; ++k) {
        const std::uint64_t next = k ^ (k >> 1);
        const std::uint64_t diff = next ^ gray;
        const int j = std::countr_zero(diff);
        const long double sgn = (next & diff) ? 1.0L : -1.0L;
        for (int i = 0; i < n; ++i) {
            const complexd e = m(i, j);
            rowsum[static_cast<std::size_t>(i)] +=
                sgn * std::complex<long double>(e.real(), e.imag());
        }
        gray = next;
        std::complex<long double> prod{1.0L, 0.0L};
        for (int i = 0; i < n; ++i) prod *= rowsum[static_cast<std::size_t>(i)];
        const int parity = (n - std::popcount(next)) & 1;
        total += parity ? -prod : prod;
    }
    return complexd{static_cast<double>(total.real()), static_cast<double>(total.imag())};
}

/// Evaluation strategy: exact permutation sum up to n = 8, Ryser beyond.
inline complexd permanent(const Eigen::MatrixXcd& m) {
    detail::require_square(m, "permanent");
    const int n = static_cast<int>(m.rows());
    if (n <= 8) return permanent_bruteforce(m);
    return permanent_ryser(m);
}

}  // namespace cohlab

#endif  // COHLAB_PERMANENT_HPP
