#include "couplesim/counterfactual.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>

#include "couplesim/format.hpp"

namespace couplesim {

std::string Scenario::name() const {
    switch (kind) {
        case ScheduleKind::Baseline:
            return "baseline";
        case ScheduleKind::FlexibleRegular:
            return "flexible";
        case ScheduleKind::Outsourcing:
            return "outsourcing";
    }
    return "baseline";
}

ModelParams Scenario::params_for(const ModelParams& p) const {
    return delta_override ? p.with_delta(*delta_override) : p;
}

SolverMode Scenario::mode_for(const ModelParams& p) const {
    switch (kind) {
        case ScheduleKind::Baseline:
            return SolverMode::baseline();
        case ScheduleKind::FlexibleRegular:
            return SolverMode::flexible_regular();
        case ScheduleKind::Outsourcing: {
            const double pr = price.value_or(default_outsourcing_price(p));
            if (!(pr > 0.0) || !std::isfinite(pr))
                throw std::invalid_argument("outsourcing price must be positive and finite");
            return SolverMode::outsourcing(pr);
        }
    }
    return SolverMode::baseline();
}

Scenario parse_scenario(const std::string& name) {
    if (name == "baseline") return Scenario::baseline();
    if (name == "flexible" || name == "flexible_regular") return Scenario::flexible_regular();
    if (name == "outsourcing") return Scenario::outsourcing();
    throw std::invalid_argument("unknown scenario '" + name +
                                "' (expected baseline, flexible or outsourcing)");
}

double default_outsourcing_price(const ModelParams& p) { return p.psi() * p.kink_rate(); }

ScenarioResult summarize(const Scenario& s, const SimulatedPopulation& pop,
                         const GapOptions& gaps) {
    ScenarioResult r;
    r.scenario = s;
    r.params = pop.params;
    r.occupations = occupation_matrix(pop);
    r.gaps = gender_gaps(pop, gaps);
    r.hours = hours_table(pop);
    r.moments = compute_moments(pop);
    r.couples_digest = couples_digest(pop.couples);
    return r;
}

ScenarioResult run_scenario(const ModelParams& p, const Scenario& s,
                            const std::vector<Couple>& couples, unsigned threads,
                            const SolverSettings& settings, const GapOptions& gaps) {
    const ModelParams ps = s.params_for(p);
    const SimulatedPopulation pop = solve_population(couples, ps, s.mode_for(ps), threads, settings);
    return summarize(s, pop, gaps);
}

ScenarioResult run_scenario(const ModelParams& p, const Scenario& s, const PopulationConfig& cfg,
                            const GapOptions& gaps) {
    return run_scenario(p, s, draw_couples(p, cfg), cfg.threads, cfg.solver, gaps);
}

std::vector<double> default_sweep_grid(double delta_hat, int points) {
    if (points < 2) throw std::invalid_argument("a sweep grid needs at least two points");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) g[i] = 1.2 * delta_hat * i / (points - 1);
    return g;
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, spec, [](char c) { return c == ':'; });
    if (parts.size() != 3)
        throw std::invalid_argument("grid '" + spec + "' must have the form start:stop:points");
    for (auto& s : parts) boost::algorithm::trim(s);
    const double start = parse_double(parts[0], "grid start");
    const double stop = parse_double(parts[1], "grid stop");
    const double pts = parse_double(parts[2], "grid points");
    if (!(pts >= 1.0) || pts != std::floor(pts) || pts > 1e6)
        throw std::invalid_argument("grid points must be a positive integer");
    const int n = static_cast<int>(pts);
    if (n == 1) {
        if (start != stop) throw std::invalid_argument("a one-point grid needs start == stop");
        return {start};
    }
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[i] = start + (stop - start) * i / (n - 1);
    return g;
}

std::vector<SweepRow> delta_sweep(const ModelParams& p, const std::vector<Scenario>& scenarios,
                                  const std::vector<double>& delta_grid,
                                  const PopulationConfig& cfg, const GapOptions& gaps) {
    if (delta_grid.empty()) throw std::invalid_argument("delta grid is empty");
    for (double d : delta_grid)
        if (!(d >= 0.0) || !std::isfinite(d))
            throw std::invalid_argument("delta grid values must be finite and non-negative");
    const std::vector<Couple> couples = draw_couples(p, cfg);
    std::vector<SweepRow> rows;
    for (const Scenario& base : scenarios) {
        for (double d : delta_grid) {
            Scenario s = base;
            s.delta_override = d;
            const ScenarioResult r = run_scenario(p, s, couples, cfg.threads, cfg.solver, gaps);
            const auto g = r.gaps.as_array();
            for (std::size_t k = 0; k < g.size(); ++k)
                rows.push_back({s.name(), d, GapSet::names()[k], g[k]});
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "scenario,delta,gap,value\n";
    for (const SweepRow& r : rows)
        os << r.scenario << "," << format_number(r.delta) << "," << r.gap << ","
           << format_number(r.value) << "\n";
}

}  // namespace couplesim
