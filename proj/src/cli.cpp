#include "couplesim/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "couplesim/format.hpp"
#include "couplesim/report.hpp"

namespace couplesim {

namespace {

// Runs `fn`, turning any exception it throws into a StageError for `stage`.
template <class Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

class OutputDir {
public:
    OutputDir(const std::string& dir, std::ostream& log) : dir_(dir), log_(log) {
        in_stage("output", [&] { std::filesystem::create_directories(dir_); });
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& fn) const {
        const std::filesystem::path path = dir_ / name;
        in_stage("output", [&] {
            // Render first so a failure never leaves a half-written file.
            std::ostringstream buf;
            fn(buf);
            std::ofstream f(path, std::ios::binary | std::ios::trunc);
            if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
            f << buf.str();
            f.close();
            if (!f) throw std::runtime_error("failed writing " + path.string());
        });
        log_ << "wrote " << path.string() << "\n";
    }

private:
    std::filesystem::path dir_;
    std::ostream& log_;
};

Scenario priced(Scenario s, const RunConfig& cfg) {
    if (s.kind == ScheduleKind::Outsourcing && !s.price && cfg.outsourcing_price)
        s.price = cfg.outsourcing_price;
    return s;
}

// Parameters for the simulation commands: the configured values, or a fresh
// estimate when the config asks for calibration first.
ModelParams working_params(const RunConfig& cfg, std::ostream& log) {
    if (!cfg.calibrate_first) return cfg.params;
    log << "calibrating before simulation\n";
    return in_stage("calibrate", [&] {
        return calibrate(cfg.targets, cfg.params, cfg.calibration_config()).params_hat;
    });
}

void write_key_values(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& rows) {
    os << "key,value\n";
    for (const auto& [k, v] : rows) os << k << "," << v << "\n";
}

std::string gnuplot_relative_earnings() {
    return "set datafile separator ','\n"
           "set key off\n"
           "set xlabel 'wife share of couple earnings'\n"
           "set ylabel 'density'\n"
           "set style fill solid 0.5\n"
           "plot 'relative_earnings.csv' every ::1 using (($2+$3)/2):($1 eq 'bin' ? $5 : 1/0) "
           "with boxes\n";
}

std::string gnuplot_sweep(const std::vector<Scenario>& scenarios) {
    std::ostringstream os;
    os << "set datafile separator ','\n"
          "set xlabel 'delta'\n"
          "set ylabel 'gap'\n"
          "set key outside\n"
          "plot ";
    bool first = true;
    for (const Scenario& s : scenarios)
        for (const auto& g : GapSet::names()) {
            if (!first) os << ", \\\n     ";
            first = false;
            os << "'sweep.csv' every ::1 using 2:(strcol(1) eq '" << s.name() << "' && strcol(3) eq '"
               << g << "' ? $4 : 1/0) with linespoints title '" << s.name() << " " << g << "'";
        }
    os << "\n";
    return os.str();
}

std::string gnuplot_curve() {
    std::ostringstream os;
    os << "set datafile separator ','\n"
          "set xlabel 'norm score'\n"
          "set ylabel 'gap'\n"
          "set key outside\n"
          "plot ";
    const auto& names = GapSet::names();
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (k) os << ", \\\n     ";
        os << "'curve.csv' every ::1 using 2:" << k + 3 << " with lines title '" << names[k] << "'";
    }
    os << "\n";
    return os.str();
}

}  // namespace

int exit_code_for(const std::string& stage) {
    static const std::map<std::string, int> codes = {
        {"config", 2},        {"calibrate", 3}, {"simulate", 4}, {"counterfactual", 5},
        {"sweep", 6},         {"regional", 7},  {"output", 8}};
    const auto it = codes.find(stage);
    return it == codes.end() ? 9 : it->second;
}

RunConfig resolve_config(const std::optional<std::string>& path, const CliOverrides& o) {
    return in_stage("config", [&] {
        RunConfig cfg = path ? load_config(*path) : RunConfig{};
        if (o.out) cfg.out_dir = *o.out;
        if (o.seed) cfg.population.seed = *o.seed;
        if (o.n) {
            if (*o.n < 1) throw std::invalid_argument("--n must be at least 1");
            cfg.population.n_couples = *o.n;
            cfg.calibration_n.reset();
        }
        if (o.scenario) cfg.scenarios = parse_scenario_list(*o.scenario);
        if (o.delta_grid) {
            const std::vector<double> g = parse_grid(*o.delta_grid);
            cfg.sweep_grid = g;
            cfg.curve_grid = g;
        }
        if (o.prefecture_data) cfg.prefecture_data = *o.prefecture_data;
        if (o.threads) cfg.population.threads = *o.threads;
        return cfg;
    });
}

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    const ModelParams p = working_params(cfg, log);
    // simulate reports the first configured scenario (baseline by default)
    const Scenario s = priced(cfg.scenarios.front(), cfg);
    log << "simulating " << cfg.population.n_couples << " couples (" << s.name() << ")\n";
    const ModelParams ps = in_stage("simulate", [&] { return s.params_for(p); });
    const SimulatedPopulation pop = in_stage("simulate", [&] {
        return solve_population(draw_couples(p, cfg.population), ps, s.mode_for(ps),
                                cfg.population.threads, cfg.population.solver);
    });
    const ScenarioResult r = in_stage("simulate", [&] { return summarize(s, pop, cfg.gap_options); });
    const RelativeEarningsDensity rel =
        in_stage("simulate", [&] { return relative_earnings_density(pop); });

    const OutputDir out(cfg.out_dir, log);
    out.write("moments.csv", [&](std::ostream& os) { write_moments_csv(os, r.moments, &cfg.targets); });
    out.write("occupation_matrix.csv",
              [&](std::ostream& os) { write_occupation_csv(os, {{s.name(), r.occupations}}); });
    out.write("hours.csv", [&](std::ostream& os) { write_hours_csv(os, {{s.name(), r.hours}}); });
    out.write("gaps.csv", [&](std::ostream& os) { write_gaps_csv(os, {{s.name(), r.gaps}}); });
    out.write("relative_earnings.csv",
              [&](std::ostream& os) { write_relative_earnings_csv(os, rel); });
    out.write("params.txt", [&](std::ostream& os) { write_params(os, p); });
    if (cfg.gnuplot)
        out.write("relative_earnings.gp", [&](std::ostream& os) { os << gnuplot_relative_earnings(); });
}

void cmd_calibrate(const RunConfig& cfg, std::ostream& log) {
    const CalibrationConfig cc = cfg.calibration_config();
    log << "calibrating on " << cc.population.n_couples << " couples, " << cc.starts << " starts\n";
    const SmmObjective objective =
        in_stage("calibrate", [&] { return SmmObjective(cfg.targets, cc); });
    const CalibrationResult res = in_stage("calibrate", [&] { return calibrate(objective, cfg.params, cc); });
    const MomentSet fit = in_stage("calibrate", [&] { return objective.moments(res.params_hat); });
    log << "objective " << format_number(res.objective) << (res.converged ? "" : " (not converged)")
        << "\n";

    const OutputDir out(cfg.out_dir, log);
    out.write("params.txt", [&](std::ostream& os) { write_params(os, res.params_hat); });
    out.write("trace.csv", [&](std::ostream& os) { write_trace_csv(os, res.trace); });
    out.write("calibration_fit.csv",
              [&](std::ostream& os) { write_moments_csv(os, fit, &cfg.targets); });
    out.write("calibration_summary.csv", [&](std::ostream& os) {
        std::vector<std::pair<std::string, std::string>> rows = {
            {"objective", format_number(res.objective)},
            {"converged", res.converged ? "true" : "false"},
            {"best_start", std::to_string(res.best_start)},
            {"evaluations", std::to_string(res.trace.size())},
            {"n_couples", std::to_string(cc.population.n_couples)}};
        const ParamVector v = estimated_values(res.params_hat);
        for (std::size_t i = 0; i < kNumEstimated; ++i)
            rows.emplace_back(estimated_names()[i], format_number(v[i]));
        write_key_values(os, rows);
    });
}

void cmd_counterfactual(const RunConfig& cfg, std::ostream& log) {
    const ModelParams p = working_params(cfg, log);
    const std::vector<Couple> couples =
        in_stage("counterfactual", [&] { return draw_couples(p, cfg.population); });
    std::vector<std::pair<std::string, OccupationMatrix>> occ;
    std::vector<std::pair<std::string, GapSet>> gaps;
    std::vector<std::pair<std::string, HoursTable>> hours;
    for (const Scenario& base : cfg.scenarios) {
        const Scenario s = priced(base, cfg);
        log << "scenario " << s.name() << "\n";
        const ScenarioResult r = in_stage("counterfactual", [&] {
            return run_scenario(p, s, couples, cfg.population.threads, cfg.population.solver,
                                cfg.gap_options);
        });
        occ.emplace_back(s.name(), r.occupations);
        gaps.emplace_back(s.name(), r.gaps);
        hours.emplace_back(s.name(), r.hours);
    }
    const OutputDir out(cfg.out_dir, log);
    out.write("counterfactual_occupations.csv", [&](std::ostream& os) { write_occupation_csv(os, occ); });
    out.write("counterfactual_gaps.csv", [&](std::ostream& os) { write_gaps_csv(os, gaps); });
    out.write("counterfactual_hours.csv", [&](std::ostream& os) { write_hours_csv(os, hours); });
}

void cmd_sweep(const RunConfig& cfg, std::ostream& log) {
    const ModelParams p = working_params(cfg, log);
    std::vector<Scenario> scenarios;
    for (const Scenario& s : cfg.scenarios) scenarios.push_back(priced(s, cfg));
    const std::vector<double> grid =
        cfg.sweep_grid ? *cfg.sweep_grid : default_sweep_grid(p.delta());
    log << "sweeping " << grid.size() << " delta values over " << scenarios.size() << " scenarios\n";
    const std::vector<SweepRow> rows = in_stage(
        "sweep", [&] { return delta_sweep(p, scenarios, grid, cfg.population, cfg.gap_options); });
    const OutputDir out(cfg.out_dir, log);
    out.write("sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, rows); });
    if (cfg.gnuplot) out.write("sweep.gp", [&](std::ostream& os) { os << gnuplot_sweep(scenarios); });
}

void cmd_regional(const RunConfig& cfg, std::ostream& log) {
    const ModelParams p = working_params(cfg, log);
    const std::vector<PrefectureRecord> records = in_stage("regional", [&] {
        if (!cfg.prefecture_data)
            throw std::invalid_argument("no prefecture data (set [regional] prefecture_data or "
                                        "--prefecture-data)");
        std::ifstream f(*cfg.prefecture_data);
        if (!f) throw std::invalid_argument("cannot open prefecture data " + *cfg.prefecture_data);
        return read_prefectures(f, *cfg.prefecture_data);
    });
    const Line bridge = in_stage("regional", [&] { return ols_bridge(records); });
    const std::vector<double> grid =
        cfg.curve_grid ? *cfg.curve_grid : default_curve_grid(p.delta());
    log << "prediction curve over " << grid.size() << " delta values\n";

    // The curve is simulated once without the level adjustment; the adjustment
    // comes from its own point at the calibrated delta, so the national gaps
    // are reproduced there exactly.
    PredictionCurve curve = in_stage("regional", [&] {
        return prediction_curve(p, grid, GapSet{}, bridge, cfg.population, cfg.gap_options);
    });
    const GapSet g0 = in_stage("regional", [&] {
        for (const CurvePoint& pt : curve.points)
            if (pt.delta == p.delta()) return level_adjustment(cfg.national_gaps, pt.model_gaps);
        throw std::logic_error("prediction curve lacks the calibrated delta");
    });
    for (CurvePoint& pt : curve.points) pt.gaps_hat = pt.model_gaps + g0;
    const CurveComparison cmp = in_stage("regional", [&] { return compare_curve(curve, records); });

    const OutputDir out(cfg.out_dir, log);
    out.write("curve.csv", [&](std::ostream& os) { write_curve_csv(os, curve); });
    out.write("fit.csv", [&](std::ostream& os) { write_fit_csv(os, curve, records, cmp); });
    out.write("regional_summary.csv", [&](std::ostream& os) {
        std::vector<std::pair<std::string, std::string>> rows = {
            {"bridge_intercept", format_number(bridge.intercept)},
            {"bridge_slope", format_number(bridge.slope)},
            {"delta_hat", format_number(p.delta())},
            {"prefectures", std::to_string(records.size())}};
        const auto& names = GapSet::names();
        const auto g = g0.as_array();
        for (std::size_t k = 0; k < names.size(); ++k) {
            rows.emplace_back("g0_" + names[k], format_number(g[k]));
            rows.emplace_back("rms_" + names[k], format_number(cmp.rms[k]));
            rows.emplace_back("points_" + names[k], std::to_string(cmp.points_used[k]));
        }
        write_key_values(os, rows);
    });
    if (cfg.gnuplot) out.write("curve.gp", [&](std::ostream& os) { os << gnuplot_curve(); });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Structural simulation of couples' labour supply under a breadwinner norm"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    CliOverrides o;
    app.add_option("--config", config_path, "Run configuration file (default: built-in values)");
    app.add_option("--out", o.out, "Output directory (default: out)");
    app.add_option("--seed", o.seed, "Population seed (unsigned 64-bit)");
    app.add_option("--n", o.n, "Number of simulated couples")->check(CLI::PositiveNumber);
    app.add_option("--scenario", o.scenario,
                   "Scenario or comma-separated list: baseline, flexible, outsourcing");
    app.add_option("--delta-grid", o.delta_grid, "Delta grid for sweep and regional, start:stop:points");
    app.add_option("--prefecture-data", o.prefecture_data, "Prefecture CSV for the regional command");
    app.add_option("--threads", o.threads, "Worker threads (0 = all cores)");

    using Command = void (*)(const RunConfig&, std::ostream&);
    const std::pair<const char*, std::pair<const char*, Command>> commands[] = {
        {"simulate", {"Baseline tables: moments, occupations, hours, gaps, relative earnings",
                      cmd_simulate}},
        {"calibrate", {"Simulated method of moments estimate of the nine parameters", cmd_calibrate}},
        {"counterfactual", {"Occupation, gap and hours panels for each scenario", cmd_counterfactual}},
        {"sweep", {"Gender gaps along a grid of norm strengths", cmd_sweep}},
        {"regional", {"Regional prediction curve against prefecture data", cmd_regional}},
    };
    Command chosen = nullptr;
    for (const auto& [name, info] : commands) {
        CLI::App* sub = app.add_subcommand(name, info.first);
        sub->fallthrough();
        const Command fn = info.second;
        sub->callback([&chosen, fn] { chosen = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        const RunConfig cfg = resolve_config(config_path, o);
        chosen(cfg, out);
    } catch (const StageError& e) {
        err << "error in stage " << e.what() << "\n";
        return exit_code_for(e.stage());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for("");
    }
    return 0;
}

}  // namespace couplesim
