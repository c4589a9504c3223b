#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "couplesim/population.hpp"
#include "couplesim/statistics.hpp"

namespace couplesim {

// The nine estimated parameters, in the order used by every vector below.
inline constexpr std::size_t kNumEstimated = 9;
using ParamVector = std::array<double, kNumEstimated>;

const std::array<std::string, kNumEstimated>& estimated_names();
ParamVector estimated_values(const ModelParams& p);
// Replaces the estimated coordinates of `base`; fixed constants are kept.
ModelParams with_estimated(const ModelParams& base, const ParamVector& v);

// Unconstrained coordinates: log for positive parameters, logit for psi,
// Fisher z for rho and a square root for delta (so delta = 0 is reachable).
ParamVector to_unconstrained(const ModelParams& p);
ModelParams from_unconstrained(const ModelParams& base, const ParamVector& u);

struct CalibrationTargets {
    std::array<double, MomentSet::kCount> values{};

    // Data column of the baseline calibration table.
    static CalibrationTargets defaults();
    static CalibrationTargets from_moments(const MomentSet& m);
};

// key = value lines keyed by moment name; '#' starts a comment. Keys not given
// keep their default. Unknown keys and non-finite or zero values throw.
CalibrationTargets read_targets(std::istream& is, const std::string& source = "targets");
void write_targets(std::ostream& os, const CalibrationTargets& t);

inline constexpr double kUndefinedMomentPenalty = 1e6;

// Sum over moments of ((target - model) / target)^2; an undefined model
// moment adds kUndefinedMomentPenalty instead.
double smm_loss(const MomentSet& model, const CalibrationTargets& targets);

struct CalibrationConfig {
    PopulationConfig population{};
    int starts = 8;            // the initial point plus starts-1 jittered ones
    int max_evals = 5000;      // per start
    double jitter = 0.15;      // sd of start perturbations, unconstrained scale
    std::uint64_t jitter_seed = 7;
    double ftol = 1e-12;
    double xtol = 1e-5;
    double initial_step = 0.1;  // simplex edge, unconstrained scale
    std::array<bool, kNumEstimated> free{true, true, true, true, true,
                                         true, true, true, true};
};

// Simulated-moments objective with common random numbers: the standard
// draws are fixed at construction, so repeated evaluation is bit-identical.
class SmmObjective {
public:
    SmmObjective(CalibrationTargets targets, const CalibrationConfig& cfg);

    double operator()(const ModelParams& p) const;
    MomentSet moments(const ModelParams& p) const;
    const CalibrationTargets& targets() const { return targets_; }

private:
    CalibrationTargets targets_;
    std::vector<StandardDraw> draws_;
    SolverMode mode_;
    unsigned threads_;
    SolverSettings solver_;
};

struct TraceRow {
    int start = 0;
    int evaluation = 0;  // running count within the start
    ParamVector params{};
    double objective = 0.0;
    double best_so_far = 0.0;  // over the whole run
};

struct CalibrationResult {
    ModelParams params_hat;
    double objective = 0.0;
    std::vector<TraceRow> trace;
    bool converged = false;
    int best_start = 0;
};

CalibrationResult calibrate(const CalibrationTargets& targets, const ModelParams& init,
                            const CalibrationConfig& cfg);

// Convenience for tests: the same minimisation over a prepared objective.
CalibrationResult calibrate(const SmmObjective& objective, const ModelParams& init,
                            const CalibrationConfig& cfg);

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

}  // namespace couplesim
