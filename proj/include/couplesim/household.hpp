#pragma once

#include <array>
#include <utility>

#include "couplesim/model.hpp"

namespace couplesim {

enum class ScheduleKind { Baseline, FlexibleRegular, Outsourcing };

struct SolverMode {
    ScheduleKind kind = ScheduleKind::Baseline;
    double price = 0.0;  // price of purchased housework, outsourcing only

    static SolverMode baseline() { return {}; }
    static SolverMode flexible_regular() { return {ScheduleKind::FlexibleRegular, 0.0}; }
    static SolverMode outsourcing(double price) { return {ScheduleKind::Outsourcing, price}; }

    bool flexible() const { return kind == ScheduleKind::FlexibleRegular; }
    bool outsourcing() const { return kind == ScheduleKind::Outsourcing; }
};

// Optimal conditional allocation for one couple and one occupation pair.
struct Allocation {
    double h_m = 0.0;
    double h_f = 0.0;
    double d_m = 0.0;
    double d_f = 0.0;
    double d_buy = 0.0;
    double e_m = 0.0;
    double e_f = 0.0;
    double c = 0.0;      // per-person consumption
    double u = kNegInf;  // joint utility net of any norm penalty
    bool norm_binding = false;

    bool feasible() const { return u > kNegInf; }
};

using OccupationPair = std::pair<Occupation, Occupation>;

template <class T>
using PairGrid = std::array<std::array<T, 3>, 3>;

struct CoupleSolution {
    PairGrid<Allocation> alloc{};
    PairGrid<double> u{};
    PairGrid<double> prob{};
};

// Tuning knobs for the inner optimizer. Defaults are what the library uses;
// tests may tighten them.
struct SolverSettings {
    int grid_points = 6;        // per free coordinate per earnings piece
    int polish_starts = 2;      // simplex polishes per piece combination
    double prune_margin = 0.3;  // skip polishing grid peaks this far below the best
    double simplex_tol = 1e-10;
    double simplex_xtol = 1e-5;
};

Allocation solve_allocation(const Couple& couple, OccupationPair pair, const ModelParams& p,
                            const SolverMode& mode = {}, const SolverSettings& s = {});

CoupleSolution solve_couple(const Couple& couple, const ModelParams& p,
                            const SolverMode& mode = {}, const SolverSettings& s = {});

// Multinomial-logit probabilities over the 3x3 grid with scale eta. Entries
// equal to -inf get probability exactly 0. Ties for the maximum under a
// vanishing eta are split evenly among the tied cells.
PairGrid<double> choice_probabilities(const PairGrid<double>& u, double eta);

// Joint utility of an explicit allocation, including the norm penalty. Used
// by tests to re-score solver output independently of the optimizer.
double joint_utility(const Couple& couple, OccupationPair pair, const ModelParams& p,
                     const SolverMode& mode, double h_m, double h_f, double d_m, double d_f,
                     double d_buy);

}  // namespace couplesim
