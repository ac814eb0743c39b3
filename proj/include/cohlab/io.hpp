#ifndef COHLAB_IO_HPP
#define COHLAB_IO_HPP

#include <cctype>
#include <charconv>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cohlab/pion_laser.hpp"

namespace cohlab {

inline constexpr std::string_view kVersion = "0.1.0";

/// Configuration rejected; the message lists every offending key at once.
class config_error : public std::invalid_argument {
public:
    config_error(const std::string& what, std::vector<std::string> issues)
        : std::invalid_argument(what), issues_(std::move(issues)) {}
    const std::vector<std::string>& issues() const { return issues_; }

private:
    std::vector<std::string> issues_;
};

/// Shortest exact decimal form of a double; stable across reruns.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

/// Flat `key = value` file; '#' starts a comment, blank lines are skipped.
inline std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file: " + path.string());
    std::map<std::string, std::string> kv;
    std::vector<std::string> issues;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            issues.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        const std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty()) {
            issues.push_back("line " + std::to_string(lineno) + ": empty key");
            continue;
        }
        if (kv.count(key)) issues.push_back("duplicate key: " + key);
        kv[key] = value;
    }
    if (!issues.empty()) {
        std::string msg = "config file " + path.string() + " is malformed: ";
        for (std::size_t i = 0; i < issues.size(); ++i)
            msg += (i ? "; " : "") + issues[i];
        throw config_error(msg, issues);
    }
    return kv;
}

/// Complex literal: "1.5", "2i", "-1+0.5i", "1e-3-2e-4i" or "(re,im)".
inline complexd parse_complex(std::string_view text) {
    const std::string s = trim(text);
    if (s.empty()) throw std::invalid_argument("parse_complex: empty value");

    const auto parse_real = [](std::string_view v) {
        std::string t = trim(v);
        if (t.empty()) throw std::invalid_argument("parse_complex: empty number");
        double sign = 1.0;
        if (t.front() == '+') t.erase(0, 1);  // from_chars takes no leading '+'
        else if (t.front() == '-') {
            sign = -1.0;
            t.erase(0, 1);
        }
        t = trim(t);
        if (t.empty()) throw std::invalid_argument("parse_complex: dangling sign");
        double out = 0.0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
        if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
            throw std::invalid_argument("parse_complex: bad number '" + t + "'");
        return sign * out;
    };

    if (s.front() == '(') {
        if (s.back() != ')')
            throw std::invalid_argument("parse_complex: unbalanced parentheses in '" + s + "'");
        const auto comma = s.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("parse_complex: expected '(re,im)' in '" + s + "'");
        return complexd{parse_real(std::string_view(s).substr(1, comma - 1)),
                        parse_real(std::string_view(s).substr(comma + 1, s.size() - comma - 2))};
    }

    if (s.back() == 'i' || s.back() == 'j') {
        const std::string_view body = std::string_view(s).substr(0, s.size() - 1);
        // split at the last sign that is not an exponent sign and not leading
        std::size_t split = std::string::npos;
        for (std::size_t i = body.size(); i-- > 1;) {
            if ((body[i] == '+' || body[i] == '-') &&
                body[i - 1] != 'e' && body[i - 1] != 'E') {
                split = i;
                break;
            }
        }
        if (split == std::string::npos) {
            if (body.empty()) return complexd{0.0, 1.0};
            if (body == "+") return complexd{0.0, 1.0};
            if (body == "-") return complexd{0.0, -1.0};
            return complexd{0.0, parse_real(body)};
        }
        const std::string_view im = body.substr(split);
        double imval;
        if (im == "+")
            imval = 1.0;
        else if (im == "-")
            imval = -1.0;
        else
            imval = parse_real(im);
        return complexd{parse_real(body.substr(0, split)), imval};
    }
    return complexd{parse_real(s), 0.0};
}

/// Record of one command invocation; every output file references it.
/// Reruns with the same manifest reproduce the data bit-exactly; only the
/// wall-clock field varies.
struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::uint64_t seed = 0;
    std::string version{kVersion};
    std::vector<std::string> outputs;
    double wall_clock_seconds = 0.0;
};

inline nlohmann::json to_json(const RunManifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : m.parameters) params[k] = v;
    j["parameters"] = params;
    j["seed"] = m.seed;
    j["version"] = m.version;
    j["outputs"] = m.outputs;
    j["wall_clock_seconds"] = m.wall_clock_seconds;
    return j;
}

/// Plain table with one header line. The first line is a comment naming the
/// sibling JSON file that holds the manifest, so the whole file is
/// reproducible byte for byte.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) {
        if (row.size() != columns.size())
            throw std::invalid_argument("CsvTable: row width does not match header");
        rows.push_back(std::move(row));
    }
};

inline void write_csv(const std::filesystem::path& path, const CsvTable& table,
                      const std::string& manifest_ref) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << "# manifest: " << manifest_ref << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        out << (c ? "," : "") << table.columns[c];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << row[c];
        out << "\n";
    }
}

/// Model keys of the flat config format. Unknown keys are rejected so typos
/// cannot silently fall back to defaults.
struct PlaserSettings {
    ModelConfig model;
    int multiplicity = 2;      // n: fixed event size for norm/spectrum/c2
    int n_max = 6;             // multiplicity range for mult/norm tables
    int events = 2000;         // events per ensemble
    int samples = 2000;        // samples per normalization estimate
    double k_min = -2.0;
    double k_max = 2.0;
    int k_points = 7;
    std::string c2_mode = "fixed";       // fixed | inclusive
    std::vector<double> limit_scales{1.0, 0.4, 0.15, 0.05, 0.008};
};

namespace detail {

struct KeyParser {
    const std::map<std::string, std::string>& kv;
    std::vector<std::string> issues;
    std::vector<std::string> seen;

    bool has(const std::string& key) {
        seen.push_back(key);
        return kv.count(key) > 0;
    }

    template <class F>
    void take(const std::string& key, F&& apply) {
        if (!has(key)) return;
        try {
            apply(kv.at(key));
        } catch (const std::exception& e) {
            issues.push_back(key + ": " + e.what());
        }
    }

    double as_double(const std::string& v) {
        double out = 0.0;
        const std::string t = trim(v);
        const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
        if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
            throw std::invalid_argument("expected a number, got '" + v + "'");
        return out;
    }

    int as_int(const std::string& v) {
        int out = 0;
        const std::string t = trim(v);
        const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
        if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
            throw std::invalid_argument("expected an integer, got '" + v + "'");
        return out;
    }

    std::uint64_t as_uint64(const std::string& v) {
        std::uint64_t out = 0;
        const std::string t = trim(v);
        const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
        if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
            throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
        return out;
    }

    bool as_on_off(const std::string& v) {
        const std::string t = trim(v);
        if (t == "on" || t == "true" || t == "1") return true;
        if (t == "off" || t == "false" || t == "0") return false;
        throw std::invalid_argument("expected on/off, got '" + v + "'");
    }

    std::vector<double> as_double_list(const std::string& v) {
        std::vector<double> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(as_double(item));
        if (out.empty()) throw std::invalid_argument("expected a comma-separated list");
        return out;
    }
};

}  // namespace detail

inline PlaserSettings parse_plaser_settings(const std::map<std::string, std::string>& kv) {
    PlaserSettings s;
    detail::KeyParser p{kv, {}, {}};

    p.take("R", [&](const std::string& v) { s.model.radius = p.as_double(v); });
    p.take("T", [&](const std::string& v) { s.model.temperature = p.as_double(v); });
    p.take("m", [&](const std::string& v) { s.model.mass = p.as_double(v); });
    p.take("sigma", [&](const std::string& v) { s.model.sigma = p.as_double(v); });
    p.take("n0", [&](const std::string& v) { s.model.mean_multiplicity = p.as_double(v); });
    p.take("t0", [&](const std::string& v) { s.model.emission_time = p.as_double(v); });
    p.take("d", [&](const std::string& v) { s.model.dims = p.as_int(v); });
    p.take("seed", [&](const std::string& v) { s.model.seed = p.as_uint64(v); });
    p.take("symmetrization",
           [&](const std::string& v) { s.model.symmetrization = p.as_on_off(v); });
    p.take("n", [&](const std::string& v) { s.multiplicity = p.as_int(v); });
    p.take("n_max", [&](const std::string& v) { s.n_max = p.as_int(v); });
    p.take("events", [&](const std::string& v) { s.events = p.as_int(v); });
    p.take("samples", [&](const std::string& v) { s.samples = p.as_int(v); });
    p.take("k_min", [&](const std::string& v) { s.k_min = p.as_double(v); });
    p.take("k_max", [&](const std::string& v) { s.k_max = p.as_double(v); });
    p.take("k_points", [&](const std::string& v) { s.k_points = p.as_int(v); });
    p.take("c2_mode", [&](const std::string& v) {
        const std::string t = trim(v);
        if (t != "fixed" && t != "inclusive")
            throw std::invalid_argument("expected fixed or inclusive, got '" + v + "'");
        s.c2_mode = t;
    });
    p.take("limit_scales",
           [&](const std::string& v) { s.limit_scales = p.as_double_list(v); });

    if (!kv.count("seed"))
        p.issues.push_back("seed: required (stochastic runs take no wall-clock default)");
    for (const auto& [key, value] : kv) {
        (void)value;
        bool known = false;
        for (const auto& k : p.seen) known = known || k == key;
        if (!known) p.issues.push_back(key + ": unknown key");
    }
    try {
        validate(s.model);
    } catch (const std::invalid_argument& e) {
        p.issues.push_back(e.what());
    }
    if (s.multiplicity < 1 || s.multiplicity > kMaxEventMultiplicity)
        p.issues.push_back("n: must be in [1, " + std::to_string(kMaxEventMultiplicity) + "]");
    if (s.n_max < 0 || s.n_max > kMaxEventMultiplicity)
        p.issues.push_back("n_max: must be in [0, " + std::to_string(kMaxEventMultiplicity) + "]");
    if (s.events < 1) p.issues.push_back("events: must be >= 1");
    if (s.samples < 1000) p.issues.push_back("samples: must be >= 1000");
    if (s.k_points < 2) p.issues.push_back("k_points: must be >= 2");
    if (!(s.k_min < s.k_max)) p.issues.push_back("k_min/k_max: need k_min < k_max");
    for (double sc : s.limit_scales)
        if (!(sc > 0.0)) {
            p.issues.push_back("limit_scales: entries must be > 0");
            break;
        }
    for (std::size_t i = 1; i < s.limit_scales.size(); ++i)
        if (!(s.limit_scales[i] < s.limit_scales[i - 1])) {
            p.issues.push_back("limit_scales: must be strictly decreasing");
            break;
        }

    if (!p.issues.empty()) {
        std::string msg = "invalid configuration: ";
        for (std::size_t i = 0; i < p.issues.size(); ++i)
            msg += (i ? "; " : "") + p.issues[i];
        throw config_error(msg, p.issues);
    }
    return s;
}

inline std::vector<KPoint> make_k_grid(double k_min, double k_max, int points) {
    if (points < 2) throw std::invalid_argument("make_k_grid: need at least two points");
    std::vector<KPoint> grid(static_cast<std::size_t>(points));
    const double h = (k_max - k_min) / static_cast<double>(points - 1);
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] = KPoint{k_min + h * static_cast<double>(i), 0.0, 0.0};
    return grid;
}

}  // namespace cohlab

#endif  // COHLAB_IO_HPP
