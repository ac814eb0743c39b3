// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria. The first argument must point at the built CLI binary
// (used by the determinism criterion).
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cohlab/cohlab.hpp"
#include "../oracles.hpp"

namespace {

namespace fs = std::filesystem;
using cohlab::complexd;

std::string g_cli_path;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(3);
    ss << std::scientific << v;
    return ss.str();
}

// --- criterion 1: minimum uncertainty ---------------------------------------
Outcome minimum_uncertainty() {
    double worst = 0.0;
    for (const double mass : {0.5, 1.0, 2.0})
        for (const double omega : {0.5, 1.0, 2.0})
            for (const double mag : {0.0, 0.5, 1.0, 2.0}) {
                const complexd alpha = std::polar(mag, 0.7);
                const cohlab::OscillatorParams p{mass, omega, 0.0, 0.0};
                const auto m = cohlab::quadrature_moments(cohlab::coherent_state(alpha, 64), p);
                worst = std::max(worst, std::abs(m.uncertainty_product() - 0.25));
            }
    return {worst <= 1e-10, "max |var_x var_p - 1/4| = " + fmt(worst) + " (tol 1e-10)"};
}

// --- criterion 2: coherent eigenvalue relation -------------------------------
Outcome coherent_eigenvalue() {
    double worst = 0.0;
    for (const complexd alpha : {complexd{0.5, 0.0}, complexd{0.0, 1.0}, complexd{1.0, 1.0},
                                 complexd{-1.4, 0.9}, complexd{2.0, 0.0}, complexd{0.0, -2.0}}) {
        const auto s = cohlab::coherent_state(alpha, 64);
        const auto lhs = cohlab::annihilation_applied(s);
        double acc = 0.0;
        for (int n = 0; n + 1 < 64; ++n)
            acc += std::norm(lhs.coeff[static_cast<std::size_t>(n)] -
                             alpha * s.coeff[static_cast<std::size_t>(n)]);
        worst = std::max(worst, std::sqrt(acc));
    }
    return {worst <= 1e-10,
            "max ||a|a> - a|a>|| below cutoff = " + fmt(worst) + " (tol 1e-10)"};
}

// --- criterion 3: displacement vs series -------------------------------------
Outcome displacement_equivalence() {
    double worst = 0.0;
    for (const complexd alpha : {complexd{0.5, 0.0}, complexd{0.0, 1.0}, complexd{1.0, 1.0},
                                 complexd{-1.4, 0.9}, complexd{2.0, 0.0}}) {
        if (cohlab::poisson_tail(std::norm(alpha), 64) >= 1e-12)
            return {false, "tail precondition violated in the test itself"};
        const auto d = cohlab::displaced_vacuum(alpha, 64, 1e-12);
        const auto c = cohlab::coherent_state(alpha, 64);
        for (int n = 0; n < 64; ++n)
            worst = std::max(worst, std::abs(d.coeff[static_cast<std::size_t>(n)] -
                                             c.coeff[static_cast<std::size_t>(n)]));
    }
    return {worst <= 1e-10, "max componentwise difference = " + fmt(worst) + " (tol 1e-10)"};
}

// --- criterion 4: swapped ladder exactness ------------------------------------
Outcome dual_ladder_exactness() {
    double worst = 0.0;
    for (const int n_f : {3, 17, 64}) {
        for (int j = 0; j <= n_f; ++j) {
            const auto h = cohlab::hole_number_state(j, n_f);
            if (j < n_f) {
                // a|j> = sqrt(j+1)|j+1>, exact by construction
                const auto up = cohlab::annihilation_applied(h);
                worst = std::max(worst,
                                 std::abs(up.state.coeff[static_cast<std::size_t>(j + 1)] -
                                          complexd{std::sqrt(static_cast<double>(j + 1)), 0.0}));
                // composition a† a |j> = (j+1)|j>
                const auto comp = cohlab::creation_applied(up.state);
                worst = std::max(worst,
                                 std::abs(comp.state.coeff[static_cast<std::size_t>(j)] -
                                          complexd{static_cast<double>(j + 1), 0.0}) /
                                     static_cast<double>(j + 1));
            } else {
                const auto up = cohlab::annihilation_applied(h);
                if (cohlab::norm(up.state) != 0.0 ||
                    std::abs(up.leakage - static_cast<double>(n_f + 1)) > 1e-14)
                    return {false, "ladder bottom mishandled at j = n_f"};
            }
            if (j > 0) {
                const auto down = cohlab::creation_applied(h);
                worst = std::max(worst,
                                 std::abs(down.state.coeff[static_cast<std::size_t>(j - 1)] -
                                          complexd{std::sqrt(static_cast<double>(j)), 0.0}));
            } else {
                if (cohlab::norm(cohlab::creation_applied(h).state) != 0.0)
                    return {false, "a† did not annihilate the condensate"};
            }
        }
    }
    return {worst <= 1e-14, "max deviation across all rungs = " + fmt(worst) + " (tol 1e-14)"};
}

// --- criterion 5: creation-operator eigenstates -------------------------------
double residual_tail_bound(complexd alpha, int n_f) {
    // e^{-|a|^2/2} |a|^{n_f+1} sqrt(n_f+1) / sqrt((n_f+1)!)
    long double bound = std::exp(-0.5L * static_cast<long double>(std::norm(alpha)));
    for (int k = 1; k <= n_f + 1; ++k)
        bound *=
            static_cast<long double>(std::abs(alpha)) / std::sqrt(static_cast<long double>(k));
    bound *= std::sqrt(static_cast<long double>(n_f + 1));
    return static_cast<double>(bound);
}

Outcome creation_eigenstate() {
    // Strict decrease over the full n_f sweep requires |alpha|^2 well below
    // n_f = 8 (the tail terms peak near |alpha|^2 - 1). In that regime the
    // n_f = 64 tail (~1e-22) lies far below the resolution at which a double
    // vector can satisfy the recurrence at all (~4e-16), so the bound there
    // is asserted up to an explicit storage-resolution allowance. A second,
    // larger amplitude makes every tail representable and the bound is then
    // asserted strictly at all four n_f.
    const double storage_floor = 16.0 * std::numeric_limits<double>::epsilon();

    const complexd alpha_small{2.0, 0.0};
    std::vector<double> residuals;
    for (const int n_f : {8, 16, 32, 64}) {
        const auto s = cohlab::dual_coherent_state(alpha_small, n_f);
        const double r = cohlab::eigen_residual(s, cohlab::LadderOperator::creation,
                                                std::conj(alpha_small));
        const double limit = residual_tail_bound(alpha_small, n_f) * (1.0 + 1e-10) +
                             storage_floor * std::abs(alpha_small);
        if (r > limit)
            return {false, "residual " + fmt(r) + " exceeds tail bound at n_f = " +
                               std::to_string(n_f) + " (alpha = 2)"};
        residuals.push_back(r);
    }
    for (std::size_t i = 1; i < residuals.size(); ++i)
        if (!(residuals[i] < residuals[i - 1]))
            return {false, "residuals not strictly decreasing in n_f (alpha = 2)"};

    const complexd alpha_large = std::polar(3.9, 0.3);
    for (const int n_f : {8, 16, 32, 64}) {
        const auto s = cohlab::dual_coherent_state(alpha_large, n_f);
        const double r = cohlab::eigen_residual(s, cohlab::LadderOperator::creation,
                                                std::conj(alpha_large));
        if (r > residual_tail_bound(alpha_large, n_f) * (1.0 + 1e-10))
            return {false, "residual " + fmt(r) + " exceeds the strict tail bound at n_f = " +
                               std::to_string(n_f) + " (alpha = 3.9)"};
    }

    const auto on_bec = cohlab::creation_applied(cohlab::bec_state(64));
    for (const auto& c : on_bec.state.coeff)
        if (c != complexd{0.0, 0.0}) return {false, "a†|BEC> is not exactly zero"};

    return {true, "alpha=2: residuals " + fmt(residuals[0]) + " > ... > " +
                      fmt(residuals.back()) +
                      " strictly decreasing within the bound; alpha=3.9: strict bound at every "
                      "n_f; a†|BEC> = 0 exactly"};
}

// --- criterion 6: truncation fidelity -----------------------------------------
Outcome truncation_fidelity_matches_tail() {
    double worst = 0.0;
    for (const double mag : {0.5, 1.0, 1.7, 2.4, 3.0})
        for (const int n_f : {0, 1, 2, 4, 8, 16, 32, 64}) {
            const complexd alpha = std::polar(mag, 1.1);
            const double deficit = 1.0 - cohlab::truncation_fidelity(alpha, n_f);
            const double tail = oracles::poisson_tail(mag * mag, n_f + 1);
            worst = std::max(worst, std::abs(deficit - tail));
        }
    return {worst <= 1e-12, "max |deficit - tail| = " + fmt(worst) + " (tol 1e-12)"};
}

// --- criterion 7: permanent routes agree ---------------------------------------
Outcome permanent_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    cohlab::Rng rng(271828);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + trial % 7;
        std::vector<cohlab::WavePacket> packets;
        for (int i = 0; i < n; ++i) {
            cohlab::WavePacket w;
            w.sigma = 1.0;
            w.xi[0] = rng.normal(0.0, 1.5);
            w.pi[0] = rng.normal(0.0, 1.5);
            packets.push_back(w);
        }
        const auto g = cohlab::gram_matrix(packets);
        const complexd brute = cohlab::permanent_bruteforce(g);
        const complexd ryser = cohlab::permanent_ryser(g);
        worst = std::max(worst, std::abs(ryser - brute) / std::abs(brute));
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = worst <= 1e-12 && seconds < 60.0;
    return {pass, "500 matrices n in 2..8, max relative difference = " + fmt(worst) +
                      " (tol 1e-12), " + fmt(seconds) + " s (limit 60)"};
}

// --- criterion 8: overlap closed form vs quadrature ----------------------------
Outcome overlap_vs_quadrature() {
    cohlab::Rng rng(31415);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double sigma = 0.5 + 1.5 * rng.uniform();
        cohlab::WavePacket a, b;
        a.sigma = b.sigma = sigma;
        a.xi[0] = rng.normal(0.0, 2.0);
        a.pi[0] = rng.normal(0.0, 2.0);
        b.xi[0] = rng.normal(0.0, 2.0);
        b.pi[0] = rng.normal(0.0, 2.0);
        const auto q = cohlab::overlap_quadrature(a, b);
        worst = std::max(worst, std::abs(cohlab::overlap(a, b) - q.value));
    }
    return {worst <= 1e-8, "100 random pairs, max |closed - quadrature| = " + fmt(worst) +
                               " (tol 1e-8)"};
}

// --- criterion 9: condensate identities ----------------------------------------
Outcome condensate_identities() {
    double worst = 0.0;
    for (const int n_f : {1, 5, 50}) {
        const auto rho = cohlab::condensate_density(n_f);
        worst = std::max({worst, std::abs(rho.trace() - 1.0), rho.idempotency_defect(),
                          std::abs(rho.purity() - 1.0)});
    }
    return {worst <= 1e-12,
            "max deviation over {trace, rho^2 = rho, purity} at n_f in {1,5,50} = " + fmt(worst) +
                " (tol 1e-12)"};
}

// --- criterion 10: condensed-limit flattening -----------------------------------
Outcome condensed_limit_flattening() {
    cohlab::ModelConfig base;
    base.radius = 8.0;
    base.temperature = 2.5;
    base.mass = 1.0;
    base.sigma = 0.8;
    base.mean_multiplicity = 2.0;
    base.dims = 1;
    base.seed = 2718;

    std::vector<cohlab::KPoint> grid;
    for (int i = 0; i < 5; ++i) grid.push_back({-1.6 + 0.8 * i, 0.0, 0.0});

    const std::vector<double> scales{1.0, 0.02, 0.006, 0.002, 0.0005};
    std::ostringstream detail;
    for (const int n : {2, 3, 4}) {
        std::vector<cohlab::ModelConfig> sequence;
        for (const double s : scales) {
            cohlab::ModelConfig c = base;
            c.radius = base.radius * s;
            c.temperature = base.temperature * s;
            sequence.push_back(c);
        }
        const auto rows = cohlab::condensed_limit_check(sequence, n, 4000, grid);
        if (!cohlab::monotone_flattening(rows))
            return {false, "deviation sequence not monotone at n = " + std::to_string(n)};
        if (rows.back().max_abs_deviation > 0.02)
            return {false, "collapsed configuration keeps max|C2-1| = " +
                               fmt(rows.back().max_abs_deviation) + " > 0.02 at n = " +
                               std::to_string(n)};
        detail << "n=" << n << ": " << fmt(rows.front().max_abs_deviation) << " -> "
               << fmt(rows.back().max_abs_deviation) << "; ";
    }

    // dilute endpoint at n = 2 must bunch at equal momenta
    cohlab::ModelConfig dilute = base;
    const auto ens = cohlab::sample_ensemble(dilute, 2, 8000);
    const auto c2 = cohlab::two_particle_correlation(ens, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
    if (c2.value < 1.8)
        return {false, "dilute endpoint C2(0,0) = " + fmt(c2.value) + " < 1.8"};

    // and the bunching value is what the two-packet grid oracle demands for
    // remote packets with equal momentum profiles
    const oracles::TwoPacketGridOracle oracle{8.0, 0.0, -8.0, 0.0, base.sigma};
    cohlab::Ensemble fixed;
    fixed.config = base;
    fixed.multiplicity = 2;
    cohlab::Event ev;
    cohlab::WavePacket pa, pb;
    pa.sigma = pb.sigma = base.sigma;
    pa.xi[0] = 8.0;
    pb.xi[0] = -8.0;
    ev.packets = {pa, pb};
    const double perm = cohlab::permanent(cohlab::gram_matrix(ev.packets)).real();
    ev.weight = perm;
    fixed.events.push_back(ev);
    const auto fixed_c2 = cohlab::two_particle_correlation(fixed, {0.3, 0.0, 0.0}, {0.3, 0.0, 0.0});
    if (std::abs(fixed_c2.value - oracle.c2(0.3, 0.3, perm)) > 1e-6)
        return {false, "estimator disagrees with the grid oracle on the fixed pair"};

    return {true, detail.str() + "dilute C2(0,0) = " + fmt(c2.value) + " (>= 1.8, oracle-checked)"};
}

// --- criterion 11: switch-off equivalence ----------------------------------------
Outcome switch_off_equivalence() {
    cohlab::ModelConfig c;
    c.radius = 1.2;
    c.temperature = 0.8;
    c.sigma = 0.9;
    c.mean_multiplicity = 2.5;
    c.seed = 97;
    c.symmetrization = false;
    const int n_max = 8;
    const auto p = cohlab::multiplicity_distribution(c, n_max, 2000);
    long double z = 0.0L;
    for (int n = 0; n <= n_max; ++n) z += oracles::poisson_pmf(2.5, n);
    double worst = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        worst = std::max(worst, std::abs(p[static_cast<std::size_t>(n)].value -
                                         oracles::poisson_pmf(2.5, n) / static_cast<double>(z)));
        worst = std::max(worst, p[static_cast<std::size_t>(n)].error);
    }
    return {worst <= 1e-12,
            "max |p_n - truncated Poisson| = " + fmt(worst) + " (tol 1e-12)"};
}

// --- criterion 12: determinism of the CLI ------------------------------------------
int run_cli(const std::string& args) {
    const std::string cmd = g_cli_path + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome cli_determinism() {
    const fs::path dir = fs::temp_directory_path() / "cohlab_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "model.ini";
    {
        std::ofstream out(cfg);
        out << "R = 1.2\nT = 0.8\nm = 1\nsigma = 0.9\nn0 = 2\nseed = 31\n"
               "n = 2\nn_max = 4\nevents = 250\nsamples = 1000\n"
               "k_min = -1\nk_max = 1\nk_points = 3\nlimit_scales = 1,0.1,0.01\n";
    }
    const std::vector<std::pair<std::string, std::string>> runs{{"norm", "_norm.csv"},
                                                                {"mult", "_mult.csv"},
                                                                {"spectrum", "_spectrum.csv"},
                                                                {"c2", "_c2.csv"},
                                                                {"limit", "_limit.csv"}};
    for (const auto& [sub, suffix] : runs) {
        fs::create_directories(dir / (sub + "_a"));
        fs::create_directories(dir / (sub + "_b"));
        const std::string a = (dir / (sub + "_a") / "run").string();
        const std::string b = (dir / (sub + "_b") / "run").string();
        if (run_cli("plaser " + sub + " --config " + cfg.string() + " --out " + a) != 0)
            return {false, "plaser " + sub + " failed"};
        if (run_cli("plaser " + sub + " --config " + cfg.string() + " --out " + b) != 0)
            return {false, "plaser " + sub + " rerun failed"};
        const std::string body_a = slurp(a + suffix);
        const std::string body_b = slurp(b + suffix);
        if (body_a.empty() || body_a != body_b)
            return {false, "plaser " + sub + " output differs between identical runs"};
    }
    return {true, "norm/mult/spectrum/c2/limit rerun byte-identically under a fixed seed"};
}

}  // namespace

int main(int argc, char** argv) {
    g_cli_path = argc > 1 ? argv[1] : "tools/cohlab";

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"minimum-uncertainty", minimum_uncertainty},
        {"coherent-eigenvalue", coherent_eigenvalue},
        {"displacement-series-equivalence", displacement_equivalence},
        {"dual-ladder-exactness", dual_ladder_exactness},
        {"creation-operator-eigenstate", creation_eigenstate},
        {"truncation-fidelity", truncation_fidelity_matches_tail},
        {"permanent-oracle-equivalence", permanent_equivalence},
        {"overlap-closed-form-vs-quadrature", overlap_vs_quadrature},
        {"condensate-identities", condensate_identities},
        {"condensed-limit-flattening", condensed_limit_flattening},
        {"switch-off-equivalence", switch_off_equivalence},
        {"determinism", cli_determinism},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (out.pass ? "[PASS] " : "[FAIL] ") << (i + 1 < 10 ? "0" : "")
                  << (i + 1) << " " << criteria[i].first << ": " << out.detail << "\n";
        if (!out.pass) ++failed;
    }
    std::cout << (failed == 0 ? "acceptance: all " : "acceptance: FAILED ")
              << (failed == 0 ? std::to_string(criteria.size()) + " criteria passed"
                              : std::to_string(failed) + " of " +
                                    std::to_string(criteria.size()) + " criteria")
              << "\n";
    return failed == 0 ? 0 : 1;
}
