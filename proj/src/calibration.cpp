#include "couplesim/calibration.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string/trim.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "couplesim/format.hpp"
#include "couplesim/nelder_mead.hpp"

namespace couplesim {

const std::array<std::string, kNumEstimated>& estimated_names() {
    static const std::array<std::string, kNumEstimated> n = {
        "theta", "psi", "eta", "phi", "sigma", "rho", "alpha", "beta", "delta"};
    return n;
}

ParamVector estimated_values(const ModelParams& p) {
    return {p.theta(), p.psi(), p.eta(), p.phi(), p.sigma(),
            p.rho(),   p.alpha(), p.beta(), p.delta()};
}

ModelParams with_estimated(const ModelParams& base, const ParamVector& v) {
    ParamValues pv = base.values();
    pv.theta = v[0];
    pv.psi = v[1];
    pv.eta = v[2];
    pv.phi = v[3];
    pv.sigma = v[4];
    pv.rho = v[5];
    pv.alpha = v[6];
    pv.beta = v[7];
    pv.delta = v[8];
    return ModelParams(pv);
}

ParamVector to_unconstrained(const ModelParams& p) {
    const ParamVector v = estimated_values(p);
    ParamVector u{};
    for (std::size_t i = 0; i < kNumEstimated; ++i) u[i] = std::log(v[i]);
    u[1] = std::log(v[1] / (1.0 - v[1]));
    u[5] = std::atanh(v[5]);
    u[8] = std::sqrt(v[8]);
    return u;
}

ModelParams from_unconstrained(const ModelParams& base, const ParamVector& u) {
    ParamVector v{};
    for (std::size_t i = 0; i < kNumEstimated; ++i) v[i] = std::exp(u[i]);
    v[1] = 1.0 / (1.0 + std::exp(-u[1]));
    v[5] = std::tanh(u[5]);
    v[8] = u[8] * u[8];
    return with_estimated(base, v);
}

CalibrationTargets CalibrationTargets::defaults() {
    return {{0.90, 0.09, 0.64, 0.40, 0.62, 0.21, 0.22, 0.14, 0.07}};
}

CalibrationTargets CalibrationTargets::from_moments(const MomentSet& m) {
    CalibrationTargets t;
    const auto a = m.as_array();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i]) throw std::invalid_argument("moment " + MomentSet::names()[i] + " is undefined");
        t.values[i] = *a[i];
    }
    return t;
}

CalibrationTargets read_targets(std::istream& is, const std::string& source) {
    CalibrationTargets t = CalibrationTargets::defaults();
    const auto& names = MomentSet::names();
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        boost::algorithm::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                        ": expected key = value");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        boost::algorithm::trim(key);
        boost::algorithm::trim(val);
        std::size_t idx = names.size();
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == key) idx = i;
        if (idx == names.size())
            throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                        ": unknown target '" + key + "'");
        const double v = parse_double(val, key);
        if (!std::isfinite(v) || v == 0.0)
            throw std::invalid_argument("target '" + key + "' must be finite and non-zero");
        t.values[idx] = v;
    }
    return t;
}

void write_targets(std::ostream& os, const CalibrationTargets& t) {
    const auto& names = MomentSet::names();
    for (std::size_t i = 0; i < names.size(); ++i)
        os << names[i] << " = " << format_number(t.values[i]) << "\n";
}

double smm_loss(const MomentSet& model, const CalibrationTargets& targets) {
    const auto m = model.as_array();
    double loss = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m[i] || !std::isfinite(*m[i])) {
            loss += kUndefinedMomentPenalty;
            continue;
        }
        const double r = (targets.values[i] - *m[i]) / targets.values[i];
        loss += r * r;
    }
    return loss;
}

SmmObjective::SmmObjective(CalibrationTargets targets, const CalibrationConfig& cfg)
    : targets_(std::move(targets)),
      draws_(standard_draws(cfg.population.seed, cfg.population.n_couples)),
      mode_(cfg.population.mode),
      threads_(cfg.population.threads),
      solver_(cfg.population.solver) {
    if (draws_.empty()) throw std::invalid_argument("population needs at least one couple");
    for (double v : targets_.values)
        if (!std::isfinite(v) || v == 0.0)
            throw std::invalid_argument("targets must be finite and non-zero");
}

MomentSet SmmObjective::moments(const ModelParams& p) const {
    const SimulatedPopulation pop =
        solve_population(couples_from_draws(draws_, p), p, mode_, threads_, solver_);
    return compute_moments(pop);
}

double SmmObjective::operator()(const ModelParams& p) const { return smm_loss(moments(p), targets_); }

namespace {

ParamVector jittered(const ParamVector& u, const std::array<bool, kNumEstimated>& free,
                     double sd, boost::random::mt19937_64& gen) {
    boost::random::normal_distribution<double> normal(0.0, sd);
    ParamVector out = u;
    for (std::size_t i = 0; i < kNumEstimated; ++i) {
        const double z = normal(gen);  // drawn for every coordinate to keep streams aligned
        if (free[i]) out[i] += z;
    }
    return out;
}

}  // namespace

CalibrationResult calibrate(const SmmObjective& objective, const ModelParams& init,
                            const CalibrationConfig& cfg) {
    if (cfg.starts < 1) throw std::invalid_argument("calibration needs at least one start");
    if (cfg.max_evals < 1) throw std::invalid_argument("max_evals must be positive");
    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < kNumEstimated; ++i)
        if (cfg.free[i]) free_idx.push_back(i);

    CalibrationResult res;
    res.params_hat = init;
    res.objective = std::numeric_limits<double>::infinity();

    const ParamVector u0 = to_unconstrained(init);
    const ParamVector fixed = estimated_values(init);
    boost::random::mt19937_64 gen(cfg.jitter_seed);
    // frozen coordinates keep their exact starting values; the transforms do
    // not round-trip bit for bit
    auto to_params = [&](const ParamVector& u) {
        ParamVector v = estimated_values(from_unconstrained(init, u));
        for (std::size_t i = 0; i < kNumEstimated; ++i)
            if (!cfg.free[i]) v[i] = fixed[i];
        return with_estimated(init, v);
    };

    for (int start = 0; start < cfg.starts; ++start) {
        const ParamVector base = start == 0 ? u0 : jittered(u0, cfg.free, cfg.jitter, gen);
        int count = 0;
        auto full = [&](const std::vector<double>& x) {
            ParamVector u = base;
            for (std::size_t k = 0; k < free_idx.size(); ++k) u[free_idx[k]] = x[k];
            return u;
        };
        auto f = [&](const std::vector<double>& x) {
            // the simplex only checks its budget between iterations
            if (count >= cfg.max_evals) return std::numeric_limits<double>::infinity();
            ++count;
            const ParamVector u = full(x);
            double v;
            ModelParams p;
            try {
                p = to_params(u);
                v = objective(p);
            } catch (const std::invalid_argument&) {
                return std::numeric_limits<double>::infinity();
            }
            TraceRow row;
            row.start = start;
            row.evaluation = count;
            row.params = estimated_values(p);
            row.objective = v;
            if (v < res.objective) {
                res.objective = v;
                res.params_hat = p;
                res.best_start = start;
            }
            row.best_so_far = res.objective;
            res.trace.push_back(row);
            return v;
        };

        std::vector<double> x(free_idx.size()), step(free_idx.size(), cfg.initial_step);
        for (std::size_t k = 0; k < free_idx.size(); ++k) x[k] = base[free_idx[k]];
        if (free_idx.empty()) {
            f(x);
            res.converged = true;
            continue;
        }
        SimplexOptions opt;
        opt.ftol = cfg.ftol;
        opt.xtol = cfg.xtol;
        // Restart once from the converged point with a fresh simplex; a
        // collapsed simplex in nine dimensions often stalls short of the
        // minimum.
        bool converged = false;
        const int simplex_size = static_cast<int>(free_idx.size()) + 1;
        for (int round = 0; round < 2; ++round) {
            if (round > 0 && cfg.max_evals - count < simplex_size) break;
            opt.max_evals = cfg.max_evals - count;
            const auto r = simplex_minimize(f, x, step, opt);
            x = r.x;
            converged = r.converged;
            for (double& s : step) s *= 0.5;
        }
        if (start == res.best_start) res.converged = converged;
    }
    return res;
}

CalibrationResult calibrate(const CalibrationTargets& targets, const ModelParams& init,
                            const CalibrationConfig& cfg) {
    const SmmObjective objective(targets, cfg);
    return calibrate(objective, init, cfg);
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
    os << "start,evaluation";
    for (const auto& n : estimated_names()) os << "," << n;
    os << ",objective,best_so_far\n";
    for (const TraceRow& r : trace) {
        os << r.start << "," << r.evaluation;
        for (double v : r.params) os << "," << format_number(v);
        os << "," << format_number(r.objective) << "," << format_number(r.best_so_far) << "\n";
    }
}

}  // namespace couplesim
