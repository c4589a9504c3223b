#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "couplesim/population.hpp"
#include "couplesim/statistics.hpp"

namespace couplesim {

struct Scenario {
    ScheduleKind kind = ScheduleKind::Baseline;
    std::optional<double> price;           // outsourcing only; default psi * h_bar^theta
    std::optional<double> delta_override;  // replaces delta when set

    static Scenario baseline() { return {}; }
    static Scenario flexible_regular() { return {ScheduleKind::FlexibleRegular, {}, {}}; }
    static Scenario outsourcing(std::optional<double> price = {}) {
        return {ScheduleKind::Outsourcing, price, {}};
    }

    std::string name() const;  // "baseline", "flexible", "outsourcing"
    ModelParams params_for(const ModelParams& p) const;
    SolverMode mode_for(const ModelParams& p) const;  // throws if a given price is not positive
};

// Accepts baseline, flexible (or flexible_regular) and outsourcing.
Scenario parse_scenario(const std::string& name);

// Price of purchased housework: the hourly rate of a unit-ability
// non-regular worker.
double default_outsourcing_price(const ModelParams& p);

struct ScenarioResult {
    Scenario scenario;
    ModelParams params;
    OccupationMatrix occupations{};
    GapSet gaps;
    HoursTable hours{};
    MomentSet moments;
    std::string couples_digest;
};

ScenarioResult summarize(const Scenario& s, const SimulatedPopulation& pop,
                         const GapOptions& gaps = {});

// Couples come from the population seed with the (unchanged) distribution
// parameters, so every scenario and every delta sees the same households.
ScenarioResult run_scenario(const ModelParams& p, const Scenario& s, const PopulationConfig& cfg,
                            const GapOptions& gaps = {});

// Same, on couples drawn once by the caller.
ScenarioResult run_scenario(const ModelParams& p, const Scenario& s,
                            const std::vector<Couple>& couples, unsigned threads = 0,
                            const SolverSettings& settings = {}, const GapOptions& gaps = {});

struct SweepRow {
    std::string scenario;
    double delta = 0.0;
    std::string gap;
    double value = 0.0;
};

// n evenly spaced points on [0, 1.2 * delta_hat].
std::vector<double> default_sweep_grid(double delta_hat, int points = 11);

// start:stop:points, inclusive of both ends.
std::vector<double> parse_grid(const std::string& spec);

// Long format: one row per (scenario, delta, gap), scenarios outermost, then
// delta in the order given.
std::vector<SweepRow> delta_sweep(const ModelParams& p, const std::vector<Scenario>& scenarios,
                                  const std::vector<double>& delta_grid,
                                  const PopulationConfig& cfg, const GapOptions& gaps = {});

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace couplesim
