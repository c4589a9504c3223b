#include "couplesim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>

#include "couplesim/format.hpp"

namespace couplesim {

namespace {

struct Entry {
    std::string section;
    std::string key;
    std::string value;
    std::string where;  // file:line
};

std::vector<Entry> tokenize(std::istream& is, const std::string& source, bool sections) {
    std::vector<Entry> out;
    std::set<std::pair<std::string, std::string>> seen;
    std::string section;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.erase(cut);
        boost::algorithm::trim(line);
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (!sections) throw std::invalid_argument(where + ": sections are not allowed here");
            if (line.back() != ']') throw std::invalid_argument(where + ": malformed section header");
            section = boost::algorithm::trim_copy(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument(where + ": expected key = value");
        Entry e{section, boost::algorithm::trim_copy(line.substr(0, eq)),
                boost::algorithm::trim_copy(line.substr(eq + 1)), where};
        if (e.key.empty()) throw std::invalid_argument(where + ": empty key");
        if (sections && section.empty())
            throw std::invalid_argument(where + ": key '" + e.key + "' appears before any section");
        if (!seen.insert({section, e.key}).second)
            throw std::invalid_argument(where + ": duplicate key '" + e.key + "'");
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, s, [](char c) { return c == ','; });
    std::vector<std::string> out;
    for (auto& p : parts) {
        boost::algorithm::trim(p);
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

double number(const Entry& e) { return parse_double(e.value, e.where + " " + e.key); }

std::uint64_t count(const Entry& e) {
    const double v = number(e);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19)
        throw std::invalid_argument(e.where + ": '" + e.key + "' must be a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

std::uint64_t seed(const Entry& e) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (r.ec != std::errc() || r.ptr != e.value.data() + e.value.size() || e.value.empty())
        throw std::invalid_argument(e.where + ": '" + e.key + "' must be an unsigned 64-bit integer");
    return v;
}

bool boolean(const Entry& e) {
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    throw std::invalid_argument(e.where + ": '" + e.key + "' must be true or false");
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    const std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

// Applies a [params]-style entry to raw values; false if the key is unknown.
bool apply_param(ParamValues& v, const Entry& e) {
    static const std::map<std::string, double ParamValues::*> fields = {
        {"theta", &ParamValues::theta},     {"psi", &ParamValues::psi},
        {"eta", &ParamValues::eta},         {"phi", &ParamValues::phi},
        {"sigma", &ParamValues::sigma},     {"rho", &ParamValues::rho},
        {"alpha", &ParamValues::alpha},     {"beta", &ParamValues::beta},
        {"delta", &ParamValues::delta},     {"gamma", &ParamValues::gamma},
        {"xi", &ParamValues::xi},           {"h_bar", &ParamValues::h_bar},
        {"h_min_R", &ParamValues::h_min_R}, {"h_min_NR", &ParamValues::h_min_NR},
        {"hours_per_unit", &ParamValues::hours_per_unit}};
    const auto it = fields.find(e.key);
    if (it == fields.end()) return false;
    v.*(it->second) = number(e);
    return true;
}

[[noreturn]] void unknown(const Entry& e) {
    throw std::invalid_argument(e.where + ": unknown key '" + e.key + "' in section [" + e.section +
                                "]");
}

}  // namespace

std::vector<Scenario> parse_scenario_list(const std::string& list) {
    std::vector<Scenario> out;
    for (const auto& name : split_list(list)) out.push_back(parse_scenario(name));
    if (out.empty()) throw std::invalid_argument("scenario list is empty");
    return out;
}

std::vector<double> RunConfig::sweep_grid_or_default() const {
    return sweep_grid ? *sweep_grid : default_sweep_grid(params.delta());
}

std::vector<double> RunConfig::curve_grid_or_default() const {
    return curve_grid ? *curve_grid : default_curve_grid(params.delta());
}

CalibrationConfig RunConfig::calibration_config() const {
    CalibrationConfig c = calibration;
    c.population = population;
    if (calibration_n) c.population.n_couples = *calibration_n;
    return c;
}

RunConfig parse_config(std::istream& is, const std::string& source, const std::string& base_dir) {
    RunConfig cfg;
    ParamValues pv;
    std::optional<std::string> params_file;
    const std::vector<Entry> entries = tokenize(is, source, true);
    std::vector<Entry> param_entries;

    using Handler = std::function<void(const Entry&)>;
    const std::map<std::string, Handler> sections = {
        {"params",
         [&](const Entry& e) {
             if (e.key == "source") {
                 if (e.value == "calibrate")
                     cfg.calibrate_first = true;
                 else if (e.value != "values")
                     throw std::invalid_argument(e.where + ": source must be 'values' or 'calibrate'");
             } else if (e.key == "file") {
                 params_file = resolve(base_dir, e.value);
             } else {
                 ParamValues probe;
                 if (!apply_param(probe, e)) unknown(e);
                 param_entries.push_back(e);
             }
         }},
        {"population",
         [&](const Entry& e) {
             if (e.key == "n") {
                 cfg.population.n_couples = count(e);
                 if (cfg.population.n_couples < 1)
                     throw std::invalid_argument(e.where + ": n must be at least 1");
             } else if (e.key == "seed") {
                 cfg.population.seed = seed(e);
             } else if (e.key == "threads") {
                 cfg.population.threads = static_cast<unsigned>(count(e));
             } else {
                 unknown(e);
             }
         }},
        {"solver",
         [&](const Entry& e) {
             if (e.key == "grid_points") {
                 cfg.population.solver.grid_points = static_cast<int>(count(e));
                 if (cfg.population.solver.grid_points < 2)
                     throw std::invalid_argument(e.where + ": grid_points must be at least 2");
             } else if (e.key == "polish_starts") {
                 cfg.population.solver.polish_starts = static_cast<int>(count(e));
             } else {
                 unknown(e);
             }
         }},
        {"scenarios",
         [&](const Entry& e) {
             if (e.key == "run")
                 cfg.scenarios = parse_scenario_list(e.value);
             else if (e.key == "outsourcing_price")
                 cfg.outsourcing_price = number(e);
             else
                 unknown(e);
         }},
        {"sweep",
         [&](const Entry& e) {
             if (e.key == "delta_grid")
                 cfg.sweep_grid = parse_grid(e.value);
             else
                 unknown(e);
         }},
        {"calibration",
         [&](const Entry& e) {
             auto& c = cfg.calibration;
             if (e.key == "starts") {
                 c.starts = static_cast<int>(count(e));
             } else if (e.key == "max_evals") {
                 c.max_evals = static_cast<int>(count(e));
             } else if (e.key == "jitter") {
                 c.jitter = number(e);
             } else if (e.key == "jitter_seed") {
                 c.jitter_seed = seed(e);
             } else if (e.key == "ftol") {
                 c.ftol = number(e);
             } else if (e.key == "xtol") {
                 c.xtol = number(e);
             } else if (e.key == "n") {
                 cfg.calibration_n = count(e);
             } else if (e.key == "free") {
                 c.free.fill(false);
                 for (const auto& name : split_list(e.value)) {
                     const auto& names = estimated_names();
                     const auto it = std::find(names.begin(), names.end(), name);
                     if (it == names.end())
                         throw std::invalid_argument(e.where + ": unknown parameter '" + name + "'");
                     c.free[static_cast<std::size_t>(it - names.begin())] = true;
                 }
             } else if (e.key == "targets") {
                 const std::string path = resolve(base_dir, e.value);
                 std::ifstream f(path);
                 if (!f) throw std::invalid_argument(e.where + ": cannot open targets file " + path);
                 cfg.targets = read_targets(f, path);
             } else {
                 unknown(e);
             }
         }},
        {"targets",
         [&](const Entry& e) {
             const auto& names = MomentSet::names();
             const auto it = std::find(names.begin(), names.end(), e.key);
             if (it == names.end()) unknown(e);
             const double v = number(e);
             if (!std::isfinite(v) || v == 0.0)
                 throw std::invalid_argument(e.where + ": target '" + e.key +
                                             "' must be finite and non-zero");
             cfg.targets.values[static_cast<std::size_t>(it - names.begin())] = v;
         }},
        {"regional",
         [&](const Entry& e) {
             if (e.key == "prefecture_data") {
                 cfg.prefecture_data = resolve(base_dir, e.value);
             } else if (e.key == "national_gaps") {
                 const auto parts = split_list(e.value);
                 if (parts.size() != 4)
                     throw std::invalid_argument(e.where + ": national_gaps needs four values");
                 std::array<double, 4> g{};
                 for (std::size_t k = 0; k < 4; ++k) g[k] = parse_double(parts[k], e.key);
                 cfg.national_gaps = GapSet::from_array(g);
             } else if (e.key == "delta_grid") {
                 cfg.curve_grid = parse_grid(e.value);
             } else {
                 unknown(e);
             }
         }},
        {"output",
         [&](const Entry& e) {
             if (e.key == "dir") {
                 cfg.out_dir = e.value;
             } else if (e.key == "gnuplot") {
                 cfg.gnuplot = boolean(e);
             } else if (e.key == "occupation_gap") {
                 if (e.value == "unconditional")
                     cfg.gap_options.occupation_among_workers = false;
                 else if (e.value == "among_workers")
                     cfg.gap_options.occupation_among_workers = true;
                 else
                     throw std::invalid_argument(e.where +
                                                 ": occupation_gap must be unconditional or among_workers");
             } else {
                 unknown(e);
             }
         }},
    };

    for (const Entry& e : entries) {
        const auto it = sections.find(e.section);
        if (it == sections.end())
            throw std::invalid_argument(e.where + ": unknown section [" + e.section + "]");
        it->second(e);
    }

    // A params file supplies the starting values; explicit keys override it.
    if (params_file) {
        std::ifstream f(*params_file);
        if (!f) throw std::invalid_argument(source + ": cannot open params file " + *params_file);
        pv = read_params(f, *params_file).values();
    }
    for (const Entry& e : param_entries) apply_param(pv, e);
    cfg.params = ModelParams(pv);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file " + path);
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_config(f, path, dir.empty() ? "." : dir);
}

ModelParams read_params(std::istream& is, const std::string& source, const ModelParams& base) {
    ParamValues pv = base.values();
    for (const Entry& e : tokenize(is, source, false))
        if (!apply_param(pv, e)) unknown(e);
    return ModelParams(pv);
}

void write_params(std::ostream& os, const ModelParams& p) {
    const ParamValues& v = p.values();
    const std::pair<const char*, double> rows[] = {
        {"theta", v.theta},     {"psi", v.psi},       {"eta", v.eta},
        {"phi", v.phi},         {"sigma", v.sigma},   {"rho", v.rho},
        {"alpha", v.alpha},     {"beta", v.beta},     {"delta", v.delta},
        {"gamma", v.gamma},     {"xi", v.xi},         {"h_bar", v.h_bar},
        {"h_min_R", v.h_min_R}, {"h_min_NR", v.h_min_NR}, {"hours_per_unit", v.hours_per_unit}};
    for (const auto& [k, val] : rows) os << k << " = " << format_exact(val) << "\n";
}

}  // namespace couplesim
