#ifndef COHLAB_PION_LASER_HPP
#define COHLAB_PION_LASER_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cohlab/fock.hpp"
#include "cohlab/permanent.hpp"
#include "cohlab/rng.hpp"
#include "cohlab/wavepacket.hpp"

namespace cohlab {

/// Fixed-multiplicity observables stay within the exactly verifiable range;
/// the Ryser path carries event sizes up to this bound.
inline constexpr int kMaxEventMultiplicity = 20;

/// Static Gaussian source: packet coordinate centers ~ Normal(0, R^2) and
/// momentum centers ~ Normal(0, m T) per component, common width sigma and
/// emission time t0. symmetrization = false forces the overlap matrix to the
/// identity, which switches every exchange effect off.
struct ModelConfig {
    double radius = 1.0;             // R
    double temperature = 1.0;        // T
    double mass = 1.0;               // m
    double sigma = 1.0;              // packet momentum width
    double mean_multiplicity = 1.0;  // n0, before symmetrization
    double emission_time = 0.0;      // t0, common to all packets
    int dims = 1;                    // spatial dimension, 1 or 3
    std::uint64_t seed = 1;
    bool symmetrization = true;
};

inline void validate(const ModelConfig& c) {
    std::string issues;
    const auto flag = [&issues](bool bad, const char* what) {
        if (bad) {
            if (!issues.empty()) issues += "; ";
            issues += what;
        }
    };
    flag(!(c.radius > 0.0), "radius must be > 0");
    flag(!(c.temperature > 0.0), "temperature must be > 0");
    flag(!(c.mass > 0.0), "mass must be > 0");
    flag(!(c.sigma > 0.0), "sigma must be > 0");
    flag(!(c.mean_multiplicity > 0.0), "mean_multiplicity must be > 0");
    flag(c.dims != 1 && c.dims != 3, "dims must be 1 or 3");
    if (!issues.empty()) throw std::invalid_argument("ModelConfig: " + issues);
}

/// One sampled configuration of n packets. weight is the permanent of the
/// event's overlap matrix (the stimulated-emission factor); importance is
/// the product source density the packets were drawn from.
struct Event {
    std::vector<WavePacket> packets;
    double weight = 1.0;
    double importance = 1.0;
};

struct Ensemble {
    ModelConfig config;
    int multiplicity = 0;
    std::vector<Event> events;
};

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

using KPoint = std::array<double, 3>;

inline double poisson_pmf(double rate, int n) {
    if (!(rate >= 0.0)) throw std::invalid_argument("poisson_pmf: rate must be >= 0");
    if (n < 0) return 0.0;
    double term = std::exp(-rate);
    for (int k = 1; k <= n; ++k) term *= rate / static_cast<double>(k);
    return term;
}

inline WavePacket sample_single_packet(const ModelConfig& c, Rng& rng) {
    validate(c);
    WavePacket w;
    w.sigma = c.sigma;
    w.dims = c.dims;
    const double p_std = std::sqrt(c.mass * c.temperature);
    for (int comp = 0; comp < c.dims; ++comp)
        w.xi[static_cast<std::size_t>(comp)] = rng.normal(0.0, c.radius);
    for (int comp = 0; comp < c.dims; ++comp)
        w.pi[static_cast<std::size_t>(comp)] = rng.normal(0.0, p_std);
    return w;
}

namespace detail {

inline double source_density(const ModelConfig& c, const WavePacket& w) {
    const double vx = c.radius * c.radius;
    const double vp = c.mass * c.temperature;
    double logd = 0.0;
    for (int comp = 0; comp < c.dims; ++comp) {
        const auto i = static_cast<std::size_t>(comp);
        logd += -0.5 * w.xi[i] * w.xi[i] / vx - 0.5 * std::log(2.0 * std::numbers::pi * vx);
        logd += -0.5 * w.pi[i] * w.pi[i] / vp - 0.5 * std::log(2.0 * std::numbers::pi * vp);
    }
    return std::exp(logd);
}

inline double event_weight(const GramMatrix& g) {
    const complexd p = permanent(g);
    if (std::abs(p.imag()) > 1e-10 * std::max(1.0, std::abs(p)))
        throw numerical_error("event weight: permanent has a non-negligible imaginary part");
    if (!(p.real() > 0.0))
        throw numerical_error("event weight: permanent is not positive");
    return p.real();
}

}  // namespace detail

/// Draws n packets from the product source density and attaches the
/// permanent of their overlap matrix as the importance-sampling weight.
inline Event sample_event(const ModelConfig& c, int n, Rng& rng) {
    validate(c);
    if (n < 1 || n > kMaxEventMultiplicity)
        throw std::invalid_argument("sample_event: multiplicity must be in [1, " +
                                    std::to_string(kMaxEventMultiplicity) + "]");
    Event ev;
    ev.packets.reserve(static_cast<std::size_t>(n));
    ev.importance = 1.0;
    for (int i = 0; i < n; ++i) {
        ev.packets.push_back(sample_single_packet(c, rng));
        ev.importance *= detail::source_density(c, ev.packets.back());
    }
    if (c.symmetrization) {
        ev.weight = detail::event_weight(gram_matrix(ev.packets));
    } else {
        ev.weight = 1.0;
    }
    return ev;
}

/// Every event gets its own substream derived from (seed, n, event index),
/// so the stream is reproducible and events are independent of evaluation
/// order.
inline Ensemble sample_ensemble(const ModelConfig& c, int n, int events) {
    validate(c);
    if (events < 1) throw std::invalid_argument("sample_ensemble: need at least one event");
    Ensemble ens;
    ens.config = c;
    ens.multiplicity = n;
    ens.events.reserve(static_cast<std::size_t>(events));
    for (int e = 0; e < events; ++e) {
        Rng rng(c.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(e));
        ens.events.push_back(sample_event(c, n, rng));
    }
    return ens;
}

namespace detail {

inline Eigen::MatrixXcd without(const Eigen::MatrixXcd& g, std::span<const int> drop_rows,
                                std::span<const int> drop_cols) {
    const int n = static_cast<int>(g.rows());
    std::vector<int> rows;
    std::vector<int> cols;
    for (int i = 0; i < n; ++i) {
        bool dropped = false;
        for (int d : drop_rows) dropped = dropped || d == i;
        if (!dropped) rows.push_back(i);
    }
    for (int j = 0; j < n; ++j) {
        bool dropped = false;
        for (int d : drop_cols) dropped = dropped || d == j;
        if (!dropped) cols.push_back(j);
    }
    Eigen::MatrixXcd out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            out(static_cast<int>(r), static_cast<int>(c)) =
                g(rows[r], cols[c]);
    return out;
}

/// Permanent contractions of one event, reused across the momentum grid.
/// one_body(l, j) is the permanent of the overlap matrix with row l and
/// column j removed; two_body is the same with an unordered row pair and an
/// unordered column pair removed.
struct EventKernel {
    int n = 0;
    double perm = 1.0;
    Eigen::MatrixXcd one_body;
    std::vector<std::pair<int, int>> pairs;
    Eigen::MatrixXcd two_body;
    std::vector<std::vector<int>> pair_id;

    static EventKernel build(const std::vector<WavePacket>& packets, bool symmetrized,
                             bool with_pairs) {
        EventKernel k;
        k.n = static_cast<int>(packets.size());
        GramMatrix g;
        if (symmetrized) {
            g = gram_matrix(packets);
        } else {
            g = GramMatrix::Identity(k.n, k.n);
        }
        k.perm = event_weight(g);
        k.one_body.resize(k.n, k.n);
        for (int l = 0; l < k.n; ++l)
            for (int j = 0; j < k.n; ++j) {
                const int dr[] = {l};
                const int dc[] = {j};
                k.one_body(l, j) = permanent(without(g, dr, dc));
            }
        if (with_pairs && k.n >= 2) {
            k.pair_id.assign(static_cast<std::size_t>(k.n),
                             std::vector<int>(static_cast<std::size_t>(k.n), -1));
            for (int r = 0; r < k.n; ++r)
                for (int s = r + 1; s < k.n; ++s) {
                    k.pair_id[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)] =
                        static_cast<int>(k.pairs.size());
                    k.pair_id[static_cast<std::size_t>(s)][static_cast<std::size_t>(r)] =
                        static_cast<int>(k.pairs.size());
                    k.pairs.emplace_back(r, s);
                }
            const int np = static_cast<int>(k.pairs.size());
            k.two_body.resize(np, np);
            for (int pr = 0; pr < np; ++pr)
                for (int pc = 0; pc < np; ++pc) {
                    const int dr[] = {k.pairs[static_cast<std::size_t>(pr)].first,
                                      k.pairs[static_cast<std::size_t>(pr)].second};
                    const int dc[] = {k.pairs[static_cast<std::size_t>(pc)].first,
                                      k.pairs[static_cast<std::size_t>(pc)].second};
                    k.two_body(pr, pc) = permanent(without(g, dr, dc));
                }
        }
        return k;
    }

    Eigen::VectorXcd amplitudes(const std::vector<WavePacket>& packets,
                                const KPoint& kp) const {
        Eigen::VectorXcd f(n);
        for (int j = 0; j < n; ++j)
            f(j) = momentum_amplitude(packets[static_cast<std::size_t>(j)], kp);
        return f;
    }

    /// Unnormalized one-body momentum density times the event weight.
    double one_body_density(const Eigen::VectorXcd& f) const {
        return (f.adjoint() * one_body * f)(0).real();
    }

    /// Unnormalized two-body momentum density times the event weight.
    /// U({r,s}) = f1_r f2_s + f1_s f2_r collapses the ordered double sum over
    /// removed pairs to a quadratic form over unordered pairs.
    double two_body_density(const Eigen::VectorXcd& f1, const Eigen::VectorXcd& f2) const {
        const int np = static_cast<int>(pairs.size());
        Eigen::VectorXcd u(np);
        for (int p = 0; p < np; ++p) {
            const auto [r, s] = pairs[static_cast<std::size_t>(p)];
            u(p) = f1(r) * f2(s) + f1(s) * f2(r);
        }
        return (u.adjoint() * two_body * u)(0).real();
    }
};

/// Leave-one-block-out error for ratio statistics over weighted events.
inline constexpr int kJackknifeBlocks = 20;

inline double jackknife_error(std::span<const double> leave_one_out, double full) {
    const int b = static_cast<int>(leave_one_out.size());
    if (b < 2) return 0.0;
    double mean = 0.0;
    for (double v : leave_one_out) mean += v;
    mean /= static_cast<double>(b);
    double ss = 0.0;
    for (double v : leave_one_out) ss += (v - mean) * (v - mean);
    (void)full;
    return std::sqrt(ss * static_cast<double>(b - 1) / static_cast<double>(b));
}

}  // namespace detail

/// Self-normalized estimate of the one-body momentum density of the
/// symmetrized fixed-n state, averaged over the ensemble. Integrates to n
/// over momentum space. Errors are leave-one-block-out jackknife.
inline std::vector<Estimate> one_particle_spectrum(const Ensemble& ens,
                                                   std::span<const KPoint> k_grid) {
    if (ens.events.empty())
        throw std::invalid_argument("one_particle_spectrum: ensemble is empty");
    if (k_grid.empty())
        throw std::invalid_argument("one_particle_spectrum: momentum grid is empty");
    const int nk = static_cast<int>(k_grid.size());
    const int blocks = std::min<int>(detail::kJackknifeBlocks,
                                     static_cast<int>(ens.events.size()));

    std::vector<std::vector<double>> num(static_cast<std::size_t>(blocks),
                                         std::vector<double>(static_cast<std::size_t>(nk), 0.0));
    std::vector<double> den(static_cast<std::size_t>(blocks), 0.0);

    for (std::size_t e = 0; e < ens.events.size(); ++e) {
        const auto kern = detail::EventKernel::build(ens.events[e].packets,
                                                     ens.config.symmetrization, false);
        const auto b = e % static_cast<std::size_t>(blocks);
        den[b] += kern.perm;
        for (int ki = 0; ki < nk; ++ki) {
            const auto f = kern.amplitudes(ens.events[e].packets,
                                           k_grid[static_cast<std::size_t>(ki)]);
            num[b][static_cast<std::size_t>(ki)] += kern.one_body_density(f);
        }
    }

    double den_tot = 0.0;
    for (double d : den) den_tot += d;
    if (!(den_tot > 0.0))
        throw numerical_error("one_particle_spectrum: total weight vanished");

    std::vector<Estimate> out(static_cast<std::size_t>(nk));
    std::vector<double> loo(static_cast<std::size_t>(blocks));
    for (int ki = 0; ki < nk; ++ki) {
        double num_tot = 0.0;
        for (int b = 0; b < blocks; ++b) num_tot += num[static_cast<std::size_t>(b)][static_cast<std::size_t>(ki)];
        const double full = num_tot / den_tot;
        double err = 0.0;
        if (blocks >= 2) {
            for (int b = 0; b < blocks; ++b)
                loo[static_cast<std::size_t>(b)] =
                    (num_tot - num[static_cast<std::size_t>(b)][static_cast<std::size_t>(ki)]) /
                    (den_tot - den[static_cast<std::size_t>(b)]);
            err = detail::jackknife_error(loo, full);
        }
        out[static_cast<std::size_t>(ki)] = Estimate{full, err};
    }
    return out;
}

namespace detail {

struct PairSums {
    double den = 0.0;
    std::vector<double> one;   // one-body numerators on the grid
    std::vector<double> two;   // two-body numerators on grid index pairs i <= j
};

inline int grid_pair_index(int i, int j, int nk) {
    // upper-triangle (including diagonal) flattening with i <= j
    return i * nk - i * (i - 1) / 2 + (j - i);
}

/// Shared accumulation for the correlation estimators: per jackknife block,
/// the weighted one-body numerator on every grid point and the two-body
/// numerator on every unordered grid pair.
inline std::vector<PairSums> accumulate_pair_sums(const Ensemble& ens,
                                                  std::span<const KPoint> k_grid) {
    const int nk = static_cast<int>(k_grid.size());
    const int npairs = nk * (nk + 1) / 2;
    const int blocks = std::min<int>(kJackknifeBlocks, static_cast<int>(ens.events.size()));
    std::vector<PairSums> sums(static_cast<std::size_t>(blocks));
    for (auto& s : sums) {
        s.one.assign(static_cast<std::size_t>(nk), 0.0);
        s.two.assign(static_cast<std::size_t>(npairs), 0.0);
    }
    for (std::size_t e = 0; e < ens.events.size(); ++e) {
        const auto kern = EventKernel::build(ens.events[e].packets,
                                             ens.config.symmetrization, true);
        auto& s = sums[e % static_cast<std::size_t>(blocks)];
        s.den += kern.perm;
        std::vector<Eigen::VectorXcd> f(static_cast<std::size_t>(nk));
        for (int ki = 0; ki < nk; ++ki) {
            f[static_cast<std::size_t>(ki)] =
                kern.amplitudes(ens.events[e].packets, k_grid[static_cast<std::size_t>(ki)]);
            s.one[static_cast<std::size_t>(ki)] +=
                kern.one_body_density(f[static_cast<std::size_t>(ki)]);
        }
        for (int i = 0; i < nk; ++i)
            for (int j = i; j < nk; ++j)
                s.two[static_cast<std::size_t>(grid_pair_index(i, j, nk))] +=
                    kern.two_body_density(f[static_cast<std::size_t>(i)],
                                          f[static_cast<std::size_t>(j)]);
    }
    return sums;
}

inline constexpr double kDensityFloor = 1e-150;

/// Pair-normalized fixed-n correlation from accumulated sums:
///   C2 = [N2 / (n(n-1))] / [(N1(k1)/n)(N1(k2)/n)].
/// This normalization makes a fully condensed event give exactly one.
inline double c2_from_sums(double num2, double num1a, double num1b, double den, int n) {
    if (!(den > 0.0)) throw numerical_error("two_particle_correlation: total weight vanished");
    if (num1a / den < kDensityFloor || num1b / den < kDensityFloor)
        throw numerical_error(
            "two_particle_correlation: one-particle density below the numerical floor; "
            "the ratio is undefined at this momentum");
    return num2 * den * static_cast<double>(n) /
           (static_cast<double>(n - 1) * num1a * num1b);
}

}  // namespace detail

/// Fixed-n two-particle intensity correlation with jackknife error.
inline Estimate two_particle_correlation(const Ensemble& ens, const KPoint& k1,
                                         const KPoint& k2) {
    if (ens.events.empty())
        throw std::invalid_argument("two_particle_correlation: ensemble is empty");
    if (ens.multiplicity < 2)
        throw std::invalid_argument("two_particle_correlation: need multiplicity >= 2");
    const std::array<KPoint, 2> grid{k1, k2};
    const auto sums = detail::accumulate_pair_sums(ens, grid);
    const int blocks = static_cast<int>(sums.size());
    const int pid = detail::grid_pair_index(0, 1, 2);

    double den = 0.0, n1a = 0.0, n1b = 0.0, n2 = 0.0;
    for (const auto& s : sums) {
        den += s.den;
        n1a += s.one[0];
        n1b += s.one[1];
        n2 += s.two[static_cast<std::size_t>(pid)];
    }
    const double full = detail::c2_from_sums(n2, n1a, n1b, den, ens.multiplicity);
    if (blocks < 2) return Estimate{full, 0.0};
    std::vector<double> loo(static_cast<std::size_t>(blocks));
    for (int b = 0; b < blocks; ++b) {
        const auto& s = sums[static_cast<std::size_t>(b)];
        loo[static_cast<std::size_t>(b)] =
            detail::c2_from_sums(n2 - s.two[static_cast<std::size_t>(pid)], n1a - s.one[0],
                                 n1b - s.one[1], den - s.den, ens.multiplicity);
    }
    return Estimate{full, detail::jackknife_error(loo, full)};
}

/// Fixed-n correlation over all unordered pairs of a momentum grid, plus the
/// largest deviation from flatness.
struct CorrelationGrid {
    std::vector<KPoint> k_grid;
    Eigen::MatrixXd c2;      // (i, j) symmetric
    Eigen::MatrixXd error;
    double max_abs_deviation = 0.0;  // max over pairs of |C2 - 1|
    double error_at_max = 0.0;
};

inline CorrelationGrid correlation_grid(const Ensemble& ens, std::span<const KPoint> k_grid) {
    if (ens.events.empty())
        throw std::invalid_argument("correlation_grid: ensemble is empty");
    if (ens.multiplicity < 2)
        throw std::invalid_argument("correlation_grid: need multiplicity >= 2");
    if (k_grid.empty())
        throw std::invalid_argument("correlation_grid: momentum grid is empty");

    const int nk = static_cast<int>(k_grid.size());
    const auto sums = detail::accumulate_pair_sums(ens, k_grid);
    const int blocks = static_cast<int>(sums.size());

    double den = 0.0;
    std::vector<double> one(static_cast<std::size_t>(nk), 0.0);
    std::vector<double> two(static_cast<std::size_t>(nk * (nk + 1) / 2), 0.0);
    for (const auto& s : sums) {
        den += s.den;
        for (int ki = 0; ki < nk; ++ki) one[static_cast<std::size_t>(ki)] += s.one[static_cast<std::size_t>(ki)];
        for (std::size_t p = 0; p < two.size(); ++p) two[p] += s.two[p];
    }

    CorrelationGrid out;
    out.k_grid.assign(k_grid.begin(), k_grid.end());
    out.c2.resize(nk, nk);
    out.error.resize(nk, nk);
    std::vector<double> loo(static_cast<std::size_t>(blocks));
    for (int i = 0; i < nk; ++i)
        for (int j = i; j < nk; ++j) {
            const auto p = static_cast<std::size_t>(detail::grid_pair_index(i, j, nk));
            const double full = detail::c2_from_sums(two[p], one[static_cast<std::size_t>(i)],
                                                     one[static_cast<std::size_t>(j)], den,
                                                     ens.multiplicity);
            double err = 0.0;
            if (blocks >= 2) {
                for (int b = 0; b < blocks; ++b) {
                    const auto& s = sums[static_cast<std::size_t>(b)];
                    loo[static_cast<std::size_t>(b)] = detail::c2_from_sums(
                        two[p] - s.two[p],
                        one[static_cast<std::size_t>(i)] - s.one[static_cast<std::size_t>(i)],
                        one[static_cast<std::size_t>(j)] - s.one[static_cast<std::size_t>(j)],
                        den - s.den, ens.multiplicity);
                }
                err = detail::jackknife_error(loo, full);
            }
            out.c2(i, j) = full;
            out.c2(j, i) = full;
            out.error(i, j) = err;
            out.error(j, i) = err;
            if (std::abs(full - 1.0) > out.max_abs_deviation) {
                out.max_abs_deviation = std::abs(full - 1.0);
                out.error_at_max = err;
            }
        }
    return out;
}

/// Monte Carlo estimate of the normalization constant N(n), the mean
/// stimulated-emission weight under the product source density. N(1) = 1
/// identically.
inline Estimate normalization_constant(const ModelConfig& c, int n, int samples) {
    validate(c);
    if (n < 1 || n > kMaxEventMultiplicity)
        throw std::invalid_argument("normalization_constant: n out of range");
    if (samples < 1000)
        throw std::invalid_argument("normalization_constant: need at least 1000 samples");
    double sum = 0.0;
    double sumsq = 0.0;
    for (int e = 0; e < samples; ++e) {
        Rng rng(c.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(e));
        const Event ev = sample_event(c, n, rng);
        sum += ev.weight;
        sumsq += ev.weight * ev.weight;
    }
    const double mean = sum / static_cast<double>(samples);
    const double var = std::max(0.0, (sumsq - static_cast<double>(samples) * mean * mean) /
                                         static_cast<double>(samples - 1));
    return Estimate{mean, std::sqrt(var / static_cast<double>(samples))};
}

/// Multiplicity law p_n proportional to p0_n(n0) N(n): the independent-
/// emission Poisson reweighted by the mean symmetrization enhancement.
/// With symmetrization off every weight is exactly one and the result is
/// the truncated, renormalized Poisson itself. Errors are propagated
/// through the normalization.
inline std::vector<Estimate> multiplicity_distribution(const ModelConfig& c, int n_max,
                                                       int samples) {
    validate(c);
    if (n_max < 0 || n_max > kMaxEventMultiplicity)
        throw std::invalid_argument("multiplicity_distribution: n_max out of range");
    std::vector<double> a(static_cast<std::size_t>(n_max) + 1, 0.0);
    std::vector<double> var_a(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (int n = 0; n <= n_max; ++n) {
        const Estimate nn = n == 0 ? Estimate{1.0, 0.0}  // empty product
                                   : normalization_constant(c, n, samples);
        const double pmf = poisson_pmf(c.mean_multiplicity, n);
        a[static_cast<std::size_t>(n)] = pmf * nn.value;
        var_a[static_cast<std::size_t>(n)] = pmf * pmf * nn.error * nn.error;
    }
    double s = 0.0;
    for (double v : a) s += v;
    std::vector<Estimate> p(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        const auto i = static_cast<std::size_t>(n);
        double var = 0.0;
        for (int m = 0; m <= n_max; ++m) {
            const auto k = static_cast<std::size_t>(m);
            const double d = (m == n ? 1.0 / s : 0.0) - a[i] / (s * s);
            var += d * d * var_a[k];
        }
        p[i] = Estimate{a[i] / s, std::sqrt(var)};
    }
    return p;
}

/// Projector onto the state of n_f quanta stacked in one mode, built by
/// ladder ascent from the vacuum.
struct CondensateDensity {
    int n_f = 0;
    Eigen::MatrixXcd rho;

    double trace() const { return rho.trace().real(); }
    double purity() const { return (rho * rho).trace().real(); }
    double idempotency_defect() const { return (rho * rho - rho).cwiseAbs().maxCoeff(); }
};

inline CondensateDensity condensate_density(int n_f) {
    if (n_f < 1) throw std::invalid_argument("condensate_density: n_f must be >= 1");
    StateVector v = number_state(0, n_f + 1);
    for (int k = 1; k <= n_f; ++k)
        v = complexd{1.0 / std::sqrt(static_cast<double>(k)), 0.0} * creation_applied(v).state;
    Eigen::VectorXcd vec(n_f + 1);
    for (int i = 0; i <= n_f; ++i) vec(i) = v.coeff[static_cast<std::size_t>(i)];
    CondensateDensity d;
    d.n_f = n_f;
    d.rho = vec * vec.adjoint();
    return d;
}

struct CondensedLimitRow {
    double r2t = 0.0;                // R^2 T of the config
    double max_abs_deviation = 0.0;  // max over the grid of |C2 - 1|
    double error = 0.0;              // jackknife error at the maximizing pair
};

/// Drives a sequence of sources of decreasing R^2 T at fixed multiplicity
/// and records how far the correlation sits from flatness on the grid.
inline std::vector<CondensedLimitRow> condensed_limit_check(
    std::span<const ModelConfig> sequence, int n, int events, std::span<const KPoint> k_grid) {
    if (sequence.empty())
        throw std::invalid_argument("condensed_limit_check: empty config sequence");
    for (std::size_t i = 1; i < sequence.size(); ++i) {
        const auto r2t = [](const ModelConfig& c) {
            return c.radius * c.radius * c.temperature;
        };
        if (!(r2t(sequence[i]) < r2t(sequence[i - 1])))
            throw std::invalid_argument("condensed_limit_check: R^2 T must decrease");
    }
    std::vector<CondensedLimitRow> rows;
    rows.reserve(sequence.size());
    for (const auto& cfg : sequence) {
        const Ensemble ens = sample_ensemble(cfg, n, events);
        const CorrelationGrid grid = correlation_grid(ens, k_grid);
        rows.push_back(CondensedLimitRow{cfg.radius * cfg.radius * cfg.temperature,
                                         grid.max_abs_deviation, grid.error_at_max});
    }
    return rows;
}

/// True when each deviation is no larger than its predecessor within z
/// combined error bars.
inline bool monotone_flattening(std::span<const CondensedLimitRow> rows, double z = 3.0) {
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].max_abs_deviation >
            rows[i - 1].max_abs_deviation + z * (rows[i].error + rows[i - 1].error))
            return false;
    return true;
}

/// Inclusive correlation: strata of fixed multiplicity mixed with the
/// multiplicity law, C2 = <N2> / (<N1><N1>) without the fixed-n pair
/// normalization. Stratum and multiplicity errors are combined assuming
/// independence, which the stratified streams satisfy.
inline Estimate two_particle_correlation_inclusive(const ModelConfig& c, int n_max,
                                                   int events_per_stratum, int samples,
                                                   const KPoint& k1, const KPoint& k2) {
    validate(c);
    if (n_max < 2 || n_max > kMaxEventMultiplicity)
        throw std::invalid_argument("two_particle_correlation_inclusive: n_max out of range");
    const auto pn = multiplicity_distribution(c, n_max, samples);
    const std::array<KPoint, 2> grid{k1, k2};

    double n1a = 0.0, n1b = 0.0, n2 = 0.0;
    double var_n1a = 0.0, var_n1b = 0.0, var_n2 = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const Ensemble ens = sample_ensemble(c, n, events_per_stratum);
        const auto sums = detail::accumulate_pair_sums(ens, grid);
        double den = 0.0, s1a = 0.0, s1b = 0.0, s2 = 0.0;
        for (const auto& s : sums) {
            den += s.den;
            s1a += s.one[0];
            s1b += s.one[1];
            s2 += s.two[static_cast<std::size_t>(detail::grid_pair_index(0, 1, 2))];
        }
        const double e1a = s1a / den;
        const double e1b = s1b / den;
        const double e2 = n >= 2 ? s2 / den : 0.0;
        // block jackknife per stratum
        const int blocks = static_cast<int>(sums.size());
        double err1a = 0.0, err1b = 0.0, err2 = 0.0;
        if (blocks >= 2) {
            std::vector<double> l1a(static_cast<std::size_t>(blocks)),
                l1b(static_cast<std::size_t>(blocks)), l2(static_cast<std::size_t>(blocks));
            for (int b = 0; b < blocks; ++b) {
                const auto& s = sums[static_cast<std::size_t>(b)];
                l1a[static_cast<std::size_t>(b)] = (s1a - s.one[0]) / (den - s.den);
                l1b[static_cast<std::size_t>(b)] = (s1b - s.one[1]) / (den - s.den);
                l2[static_cast<std::size_t>(b)] =
                    n >= 2 ? (s2 -
                              s.two[static_cast<std::size_t>(detail::grid_pair_index(0, 1, 2))]) /
                                 (den - s.den)
                           : 0.0;
            }
            err1a = detail::jackknife_error(l1a, e1a);
            err1b = detail::jackknife_error(l1b, e1b);
            err2 = detail::jackknife_error(l2, e2);
        }

        const double w = pn[static_cast<std::size_t>(n)].value;
        const double vw = pn[static_cast<std::size_t>(n)].error * pn[static_cast<std::size_t>(n)].error;
        n1a += w * e1a;
        n1b += w * e1b;
        n2 += w * e2;
        var_n1a += w * w * err1a * err1a + e1a * e1a * vw;
        var_n1b += w * w * err1b * err1b + e1b * e1b * vw;
        var_n2 += w * w * err2 * err2 + e2 * e2 * vw;
    }
    if (n1a < detail::kDensityFloor || n1b < detail::kDensityFloor)
        throw numerical_error("two_particle_correlation_inclusive: density below floor");
    const double value = n2 / (n1a * n1b);
    const double rel = std::sqrt(var_n2 / (n2 * n2 + detail::kDensityFloor) +
                                 var_n1a / (n1a * n1a) + var_n1b / (n1b * n1b));
    return Estimate{value, value * rel};
}

}  // namespace cohlab

#endif  // COHLAB_PION_LASER_HPP
