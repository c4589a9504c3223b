#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "couplesim/config.hpp"

namespace couplesim {

// Files written by the commands, all under the output directory. Numbers use
// six significant digits; an undefined statistic prints as "-".
//
//   simulate
//     moments.csv             moment,model,target
//     occupation_matrix.csv   scenario,husband,R,NR,NW   (shares of couples)
//     hours.csv               scenario,husband,wife,h_m,h_f,d_m,d_f,weight
//     gaps.csv                scenario,participation,occupation,hours,wage
//     relative_earnings.csv   kind,bin_lo,bin_hi,mass,density
//     params.txt              key = value, exact round trip
//   calibrate
//     params.txt              estimated parameters, exact round trip
//     trace.csv               start,evaluation,<nine parameters>,objective,best_so_far
//     calibration_fit.csv     moment,model,target   (at the estimate)
//     calibration_summary.csv key,value
//   counterfactual
//     counterfactual_occupations.csv, counterfactual_gaps.csv,
//     counterfactual_hours.csv   one panel per scenario, same columns as above
//   sweep
//     sweep.csv               scenario,delta,gap,value
//   regional
//     curve.csv               delta,score_hat,gap_*_hat,share_wife_outearns
//     fit.csv                 gap,delta,score,model,data_fit
//     regional_summary.csv    key,value
//
// With gnuplot enabled, sweep.gp, curve.gp and relative_earnings.gp are
// written next to the data they plot.

// Raised by the commands; `stage` names the step that failed.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// Command-line values that replace the config file's.
struct CliOverrides {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
    std::optional<std::string> scenario;
    std::optional<std::string> delta_grid;
    std::optional<std::string> prefecture_data;
    std::optional<unsigned> threads;
};

// Loads the file (or the built-in defaults when no path is given) and applies
// the overrides. Throws StageError("config", ...).
RunConfig resolve_config(const std::optional<std::string>& path, const CliOverrides& o);

// Each command writes its files into cfg.out_dir and reports progress on `log`.
void cmd_simulate(const RunConfig& cfg, std::ostream& log);
void cmd_calibrate(const RunConfig& cfg, std::ostream& log);
void cmd_counterfactual(const RunConfig& cfg, std::ostream& log);
void cmd_sweep(const RunConfig& cfg, std::ostream& log);
void cmd_regional(const RunConfig& cfg, std::ostream& log);

// Whole command line; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Exit codes by failing stage.
inline constexpr int kExitUsage = 1;
int exit_code_for(const std::string& stage);

}  // namespace couplesim
