// Command-line front end: every computation as a reproducible batch run
// writing CSV tables plus a JSON mirror that embeds the run manifest.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "cohlab/cohlab.hpp"

namespace {

using cohlab::complexd;
using nlohmann::json;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::string fd(double v) { return cohlab::format_double(v); }

void ensure_parent(const std::filesystem::path& p) {
    const auto dir = p.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

void finish(const std::string& out_prefix, cohlab::RunManifest manifest, json data,
            const std::vector<std::pair<std::string, cohlab::CsvTable>>& tables,
            const Timer& timer) {
    const std::string json_path = out_prefix + ".json";
    const std::string manifest_ref = std::filesystem::path(json_path).filename().string();
    for (const auto& [suffix, table] : tables)
        manifest.outputs.push_back(out_prefix + "_" + suffix + ".csv");
    manifest.outputs.push_back(json_path);
    for (const auto& [suffix, table] : tables) {
        const std::string path = out_prefix + "_" + suffix + ".csv";
        ensure_parent(path);
        cohlab::write_csv(path, table, manifest_ref);
        std::cout << "wrote " << path << "\n";
    }
    manifest.wall_clock_seconds = timer.seconds();
    json j;
    j["manifest"] = cohlab::to_json(manifest);
    j["data"] = std::move(data);
    ensure_parent(json_path);
    std::ofstream out(json_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + json_path);
    out << j.dump(2) << "\n";
    std::cout << "wrote " << json_path << "\n";
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(cohlab::trim(item)));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad integer list entry '" + item + "'");
        }
    }
    if (out.empty()) throw std::invalid_argument("empty integer list");
    return out;
}

/// Tail bound on the creation eigen-residual of a cut dual coherent state.
double residual_tail_bound(complexd alpha, int n_f) {
    const long double mag = std::abs(alpha);
    long double t = std::exp(-0.5L * mag * mag);
    for (int k = 1; k <= n_f; ++k) t *= mag / std::sqrt(static_cast<long double>(k));
    return static_cast<double>(t * mag);
}

// ---------------------------------------------------------------------------

struct CoherentArgs {
    std::string alpha_text;
    double x0 = 0.0, p0 = 0.0;
    bool have_phase_space = false;
    int dim = 64;
    double mass = 1.0, omega = 1.0;
    double check_tail = -1.0;
    int period_samples = 33;
    std::string out;
};

void run_coherent(const CoherentArgs& args, const std::string& raw_command) {
    Timer timer;
    const cohlab::OscillatorParams params{args.mass, args.omega, args.x0, args.p0};
    const complexd alpha = args.have_phase_space ? cohlab::alpha_from_phase_space(params)
                                                 : cohlab::parse_complex(args.alpha_text);
    const auto state = cohlab::coherent_state(alpha, args.dim);

    double displacement_max_diff = -1.0;
    if (args.check_tail > 0.0) {
        // validate the cutoff against the requested tail tolerance first
        const auto displaced = cohlab::displaced_vacuum(alpha, args.dim, args.check_tail);
        displacement_max_diff = 0.0;
        for (int n = 0; n < args.dim; ++n)
            displacement_max_diff =
                std::max(displacement_max_diff,
                         std::abs(displaced.coeff[static_cast<std::size_t>(n)] -
                                  state.coeff[static_cast<std::size_t>(n)]));
    }

    cohlab::CsvTable coeffs;
    coeffs.columns = {"n", "re", "im", "probability"};
    for (int n = 0; n < state.dim(); ++n) {
        const complexd c = state.coeff[static_cast<std::size_t>(n)];
        coeffs.add_row({std::to_string(n), fd(c.real()), fd(c.imag()), fd(std::norm(c))});
    }

    const auto moments = cohlab::quadrature_moments(state, params);
    cohlab::CsvTable mom;
    mom.columns = {"mean_x", "mean_p", "var_x", "var_p", "uncertainty_product"};
    mom.add_row({fd(moments.mean_x), fd(moments.mean_p), fd(moments.var_x), fd(moments.var_p),
                 fd(moments.uncertainty_product())});

    cohlab::CsvTable traj;
    traj.columns = {"t", "mean_x", "mean_p", "var_x", "var_p", "uncertainty_product"};
    const double period = 2.0 * std::numbers::pi / args.omega;
    for (int i = 0; i < args.period_samples; ++i) {
        const double t = period * static_cast<double>(i) / (args.period_samples - 1);
        const auto m = cohlab::quadrature_moments(cohlab::evolve_oscillator(state, params, t), params);
        traj.add_row({fd(t), fd(m.mean_x), fd(m.mean_p), fd(m.var_x), fd(m.var_p),
                      fd(m.uncertainty_product())});
    }

    json data;
    data["alpha"] = {alpha.real(), alpha.imag()};
    data["norm_deficit"] = cohlab::norm_deficit(state);
    data["mean_occupation"] = cohlab::mean_occupation(state);
    data["moments"] = {{"mean_x", moments.mean_x},
                       {"mean_p", moments.mean_p},
                       {"var_x", moments.var_x},
                       {"var_p", moments.var_p},
                       {"uncertainty_product", moments.uncertainty_product()}};
    if (displacement_max_diff >= 0.0)
        data["displacement_max_componentwise_diff"] = displacement_max_diff;

    cohlab::RunManifest manifest;
    manifest.command = raw_command;
    manifest.parameters = {{"alpha", fd(alpha.real()) + (alpha.imag() < 0 ? "" : "+") +
                                         fd(alpha.imag()) + "i"},
                           {"dim", std::to_string(args.dim)},
                           {"mass", fd(args.mass)},
                           {"omega", fd(args.omega)},
                           {"period_samples", std::to_string(args.period_samples)}};
    finish(args.out, std::move(manifest), std::move(data),
           {{"coefficients", coeffs}, {"moments", mom}, {"trajectory", traj}}, timer);
}

// ---------------------------------------------------------------------------

struct HolesArgs {
    std::string alpha_text = "0";
    int n_f = 64;
    std::string sweep = "8,16,32,64";
    std::string out;
};

void run_holes(const HolesArgs& args, const std::string& raw_command) {
    Timer timer;
    const complexd alpha = cohlab::parse_complex(args.alpha_text);
    const auto state = cohlab::dual_coherent_state(alpha, args.n_f);

    cohlab::CsvTable coeffs;
    coeffs.columns = {"holes", "particle_n", "re", "im", "probability"};
    for (int j = 0; j <= args.n_f; ++j) {
        const complexd c = state.coeff[static_cast<std::size_t>(j)];
        coeffs.add_row({std::to_string(j), std::to_string(args.n_f - j), fd(c.real()),
                        fd(c.imag()), fd(std::norm(c))});
    }

    cohlab::CsvTable residuals;
    residuals.columns = {"n_f", "creation_eigen_residual", "tail_bound", "norm_deficit"};
    for (const int nf : parse_int_list(args.sweep)) {
        if (nf < 1) throw std::invalid_argument("nf-sweep entries must be >= 1");
        const auto s = cohlab::dual_coherent_state(alpha, nf);
        const double r =
            cohlab::eigen_residual(s, cohlab::LadderOperator::creation, std::conj(alpha));
        residuals.add_row({std::to_string(nf), fd(r), fd(residual_tail_bound(alpha, nf)),
                           fd(cohlab::norm_deficit(s))});
    }

    const auto bec = cohlab::bec_state(args.n_f);
    const auto creation_on_bec = cohlab::creation_applied(bec);
    cohlab::CsvTable summary;
    summary.columns = {"n_f", "hole_number_expectation", "creation_on_bec_norm",
                       "constraint_engaged"};
    const auto unit_state = complexd{1.0 / cohlab::norm(state), 0.0} * state;
    summary.add_row({std::to_string(args.n_f), fd(cohlab::hole_number_expectation(unit_state)),
                     fd(cohlab::norm(creation_on_bec.state)),
                     creation_on_bec.constraint_engaged ? "1" : "0"});

    json data;
    data["alpha"] = {alpha.real(), alpha.imag()};
    data["n_f"] = args.n_f;
    data["norm_deficit"] = cohlab::norm_deficit(state);
    data["hole_number_expectation"] = cohlab::hole_number_expectation(unit_state);
    data["creation_on_bec_norm"] = cohlab::norm(creation_on_bec.state);

    cohlab::RunManifest manifest;
    manifest.command = raw_command;
    manifest.parameters = {{"alpha", args.alpha_text},
                           {"n_f", std::to_string(args.n_f)},
                           {"nf_sweep", args.sweep}};
    finish(args.out, std::move(manifest), std::move(data),
           {{"coefficients", coeffs}, {"residuals", residuals}, {"summary", summary}}, timer);
}

// ---------------------------------------------------------------------------

struct TruncateArgs {
    std::string alpha_text = "1";
    std::string nf_list = "4,8,16,32,64";
    std::string out;
};

void run_truncate(const TruncateArgs& args, const std::string& raw_command) {
    Timer timer;
    const complexd alpha = cohlab::parse_complex(args.alpha_text);

    cohlab::CsvTable table;
    table.columns = {"n_f", "squared_norm", "fidelity", "fidelity_deficit", "poisson_tail"};
    for (const int nf : parse_int_list(args.nf_list)) {
        if (nf < 0) throw std::invalid_argument("nf-list entries must be >= 0");
        const auto t = cohlab::truncated_coherent(alpha, nf);
        const double fidelity = cohlab::truncation_fidelity(alpha, nf);
        table.add_row({std::to_string(nf), fd(t.squared_norm), fd(fidelity), fd(1.0 - fidelity),
                       fd(cohlab::poisson_tail(std::norm(alpha), nf + 1))});
    }

    json data;
    data["alpha"] = {alpha.real(), alpha.imag()};

    cohlab::RunManifest manifest;
    manifest.command = raw_command;
    manifest.parameters = {{"alpha", args.alpha_text}, {"nf_list", args.nf_list}};
    finish(args.out, std::move(manifest), std::move(data), {{"fidelity", table}}, timer);
}

// ---------------------------------------------------------------------------

struct PlaserArgs {
    std::string config_path;
    std::string out;
};

json config_echo(const cohlab::PlaserSettings& s) {
    json j;
    j["R"] = s.model.radius;
    j["T"] = s.model.temperature;
    j["m"] = s.model.mass;
    j["sigma"] = s.model.sigma;
    j["n0"] = s.model.mean_multiplicity;
    j["t0"] = s.model.emission_time;
    j["d"] = s.model.dims;
    j["seed"] = s.model.seed;
    j["symmetrization"] = s.model.symmetrization;
    j["n"] = s.multiplicity;
    j["n_max"] = s.n_max;
    j["events"] = s.events;
    j["samples"] = s.samples;
    j["k_min"] = s.k_min;
    j["k_max"] = s.k_max;
    j["k_points"] = s.k_points;
    j["c2_mode"] = s.c2_mode;
    j["limit_scales"] = s.limit_scales;
    return j;
}

cohlab::RunManifest plaser_manifest(const std::string& raw_command, const PlaserArgs& args,
                                    const cohlab::PlaserSettings& s) {
    cohlab::RunManifest m;
    m.command = raw_command;
    m.seed = s.model.seed;
    m.parameters = {{"config", args.config_path}};
    const json echo = config_echo(s);
    for (const auto& [key, value] : echo.items()) m.parameters.emplace_back(key, value.dump());
    return m;
}

void run_plaser_norm(const PlaserArgs& args, const std::string& raw_command) {
    Timer timer;
    const auto settings = cohlab::parse_plaser_settings(cohlab::read_key_value_file(args.config_path));
    cohlab::CsvTable table;
    table.columns = {"n", "normalization", "std_error"};
    json values = json::array();
    for (int n = 1; n <= settings.n_max; ++n) {
        const auto est = cohlab::normalization_constant(settings.model, n, settings.samples);
        table.add_row({std::to_string(n), fd(est.value), fd(est.error)});
        values.push_back({{"n", n}, {"value", est.value}, {"std_error", est.error}});
    }
    json data;
    data["config"] = config_echo(settings);
    data["normalization"] = values;
    finish(args.out, plaser_manifest(raw_command, args, settings), std::move(data),
           {{"norm", table}}, timer);
}

void run_plaser_mult(const PlaserArgs& args, const std::string& raw_command) {
    Timer timer;
    const auto settings = cohlab::parse_plaser_settings(cohlab::read_key_value_file(args.config_path));
    const auto p = cohlab::multiplicity_distribution(settings.model, settings.n_max,
                                                     settings.samples);
    // truncated renormalized independent-emission reference
    std::vector<double> ref(p.size());
    double z = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        ref[n] = cohlab::poisson_pmf(settings.model.mean_multiplicity, static_cast<int>(n));
        z += ref[n];
    }
    cohlab::CsvTable table;
    table.columns = {"n", "probability", "std_error", "poisson_reference"};
    json values = json::array();
    for (std::size_t n = 0; n < p.size(); ++n) {
        table.add_row({std::to_string(n), fd(p[n].value), fd(p[n].error), fd(ref[n] / z)});
        values.push_back({{"n", n},
                          {"probability", p[n].value},
                          {"std_error", p[n].error},
                          {"poisson_reference", ref[n] / z}});
    }
    json data;
    data["config"] = config_echo(settings);
    data["multiplicity"] = values;
    finish(args.out, plaser_manifest(raw_command, args, settings), std::move(data),
           {{"mult", table}}, timer);
}

void run_plaser_spectrum(const PlaserArgs& args, const std::string& raw_command) {
    Timer timer;
    const auto settings = cohlab::parse_plaser_settings(cohlab::read_key_value_file(args.config_path));
    const auto grid = cohlab::make_k_grid(settings.k_min, settings.k_max, settings.k_points);
    const auto ens = cohlab::sample_ensemble(settings.model, settings.multiplicity,
                                             settings.events);
    const auto spec = cohlab::one_particle_spectrum(ens, grid);
    cohlab::CsvTable table;
    table.columns = {"k", "density", "std_error"};
    json values = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        table.add_row({fd(grid[i][0]), fd(spec[i].value), fd(spec[i].error)});
        values.push_back(
            {{"k", grid[i][0]}, {"density", spec[i].value}, {"std_error", spec[i].error}});
    }
    json data;
    data["config"] = config_echo(settings);
    data["spectrum"] = values;
    finish(args.out, plaser_manifest(raw_command, args, settings), std::move(data),
           {{"spectrum", table}}, timer);
}

void run_plaser_c2(const PlaserArgs& args, const std::string& raw_command) {
    Timer timer;
    const auto settings = cohlab::parse_plaser_settings(cohlab::read_key_value_file(args.config_path));
    const auto grid = cohlab::make_k_grid(settings.k_min, settings.k_max, settings.k_points);
    const auto ens = cohlab::sample_ensemble(settings.model, settings.multiplicity,
                                             settings.events);
    const auto cg = cohlab::correlation_grid(ens, grid);

    cohlab::CsvTable table;
    table.columns = {"k1", "k2", "c2_fixed_n", "std_error"};
    json values = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = i; j < grid.size(); ++j) {
            table.add_row({fd(grid[i][0]), fd(grid[j][0]),
                           fd(cg.c2(static_cast<int>(i), static_cast<int>(j))),
                           fd(cg.error(static_cast<int>(i), static_cast<int>(j)))});
            values.push_back({{"k1", grid[i][0]},
                              {"k2", grid[j][0]},
                              {"c2_fixed_n", cg.c2(static_cast<int>(i), static_cast<int>(j))},
                              {"std_error", cg.error(static_cast<int>(i), static_cast<int>(j))}});
        }
    json data;
    data["config"] = config_echo(settings);
    data["c2_fixed_n"] = values;
    data["max_abs_deviation"] = cg.max_abs_deviation;

    std::vector<std::pair<std::string, cohlab::CsvTable>> tables{{"c2", table}};
    if (settings.c2_mode == "inclusive") {
        cohlab::CsvTable incl;
        incl.columns = {"k1", "k2", "c2_inclusive", "std_error"};
        json ivalues = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto est = cohlab::two_particle_correlation_inclusive(
                settings.model, settings.n_max, settings.events, settings.samples, grid[i],
                grid[i]);
            incl.add_row({fd(grid[i][0]), fd(grid[i][0]), fd(est.value), fd(est.error)});
            ivalues.push_back(
                {{"k1", grid[i][0]}, {"k2", grid[i][0]}, {"c2_inclusive", est.value},
                 {"std_error", est.error}});
        }
        data["c2_inclusive"] = ivalues;
        tables.emplace_back("c2_inclusive", incl);
    }
    finish(args.out, plaser_manifest(raw_command, args, settings), std::move(data), tables, timer);
}

void run_plaser_limit(const PlaserArgs& args, const std::string& raw_command) {
    Timer timer;
    const auto settings = cohlab::parse_plaser_settings(cohlab::read_key_value_file(args.config_path));
    const auto grid = cohlab::make_k_grid(settings.k_min, settings.k_max, settings.k_points);
    std::vector<cohlab::ModelConfig> sequence;
    for (const double scale : settings.limit_scales) {
        cohlab::ModelConfig c = settings.model;
        c.radius = settings.model.radius * scale;
        c.temperature = settings.model.temperature * scale;
        sequence.push_back(c);
    }
    const auto rows = cohlab::condensed_limit_check(sequence, settings.multiplicity,
                                                    settings.events, grid);
    cohlab::CsvTable table;
    table.columns = {"step", "scale", "radius", "temperature", "r2t", "max_abs_c2_deviation",
                     "std_error"};
    json values = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        table.add_row({std::to_string(i), fd(settings.limit_scales[i]), fd(sequence[i].radius),
                       fd(sequence[i].temperature), fd(rows[i].r2t),
                       fd(rows[i].max_abs_deviation), fd(rows[i].error)});
        values.push_back({{"step", i},
                          {"scale", settings.limit_scales[i]},
                          {"r2t", rows[i].r2t},
                          {"max_abs_c2_deviation", rows[i].max_abs_deviation},
                          {"std_error", rows[i].error}});
    }
    json data;
    data["config"] = config_echo(settings);
    data["limit"] = values;
    data["monotone_within_errors"] = cohlab::monotone_flattening(rows);
    finish(args.out, plaser_manifest(raw_command, args, settings), std::move(data),
           {{"limit", table}}, timer);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cohlab: coherent states, hole ladders over a condensate, and the "
                 "multiboson wave-packet source model"};
    app.require_subcommand(1);

    CoherentArgs coherent;
    auto* coherent_cmd =
        app.add_subcommand("coherent", "Coherent state: coefficients, quadratures, trajectory");
    auto* alpha_opt = coherent_cmd->add_option("--alpha", coherent.alpha_text,
                                               "complex amplitude, e.g. 1.5, 2i, 1+0.5i");
    auto* x0_opt = coherent_cmd->add_option("--x0", coherent.x0, "initial position");
    coherent_cmd->add_option("--p0", coherent.p0, "initial momentum")->needs(x0_opt);
    coherent_cmd->add_option("--dim", coherent.dim, "basis cutoff")->check(CLI::PositiveNumber);
    coherent_cmd->add_option("--mass", coherent.mass, "oscillator mass");
    coherent_cmd->add_option("--omega", coherent.omega, "oscillator frequency");
    coherent_cmd->add_option("--check-tail", coherent.check_tail,
                             "verify the displacement route at this tail tolerance");
    coherent_cmd->add_option("--period-samples", coherent.period_samples,
                             "trajectory samples over one period");
    coherent_cmd->add_option("--out", coherent.out, "output prefix")->required();
    alpha_opt->excludes(x0_opt);

    HolesArgs holes;
    auto* holes_cmd = app.add_subcommand(
        "holes", "Hole ladder over a condensate and dual coherent states");
    holes_cmd->add_option("--alpha", holes.alpha_text, "complex amplitude");
    holes_cmd->add_option("--nf", holes.n_f, "condensate occupancy")->check(CLI::PositiveNumber);
    holes_cmd->add_option("--nf-sweep", holes.sweep, "comma list for the residual sweep");
    holes_cmd->add_option("--out", holes.out, "output prefix")->required();

    TruncateArgs truncate;
    auto* truncate_cmd =
        app.add_subcommand("truncate", "Energy-truncated coherent states and their fidelity");
    truncate_cmd->add_option("--alpha", truncate.alpha_text, "complex amplitude");
    truncate_cmd->add_option("--nf-list", truncate.nf_list, "comma list of capacities");
    truncate_cmd->add_option("--out", truncate.out, "output prefix")->required();

    auto* plaser_cmd = app.add_subcommand("plaser", "Multiboson wave-packet source model");
    plaser_cmd->require_subcommand(1);
    PlaserArgs plaser;
    std::vector<CLI::App*> plaser_subs;
    for (const char* name : {"norm", "mult", "spectrum", "c2", "limit"}) {
        auto* sub = plaser_cmd->add_subcommand(name, std::string("plaser ") + name);
        sub->add_option("--config", plaser.config_path, "flat key=value config file")->required();
        sub->add_option("--out", plaser.out, "output prefix")->required();
        plaser_subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    std::string raw_command;
    for (int i = 0; i < argc; ++i) raw_command += std::string(i ? " " : "") + argv[i];

    try {
        if (*coherent_cmd) {
            coherent.have_phase_space = x0_opt->count() > 0;
            if (!coherent.have_phase_space && alpha_opt->count() == 0)
                throw std::invalid_argument("coherent: provide --alpha or --x0/--p0");
            run_coherent(coherent, raw_command);
        } else if (*holes_cmd) {
            run_holes(holes, raw_command);
        } else if (*truncate_cmd) {
            run_truncate(truncate, raw_command);
        } else if (*plaser_cmd) {
            if (*plaser_subs[0]) run_plaser_norm(plaser, raw_command);
            else if (*plaser_subs[1]) run_plaser_mult(plaser, raw_command);
            else if (*plaser_subs[2]) run_plaser_spectrum(plaser, raw_command);
            else if (*plaser_subs[3]) run_plaser_c2(plaser, raw_command);
            else run_plaser_limit(plaser, raw_command);
        }
        return 0;
    } catch (const cohlab::truncation_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const cohlab::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const cohlab::config_error& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
