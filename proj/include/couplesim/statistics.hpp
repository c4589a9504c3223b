#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "couplesim/population.hpp"

namespace couplesim {

// A statistic whose conditioning set may be empty. nullopt is reported as a
// dash, never as zero.
using Stat = std::optional<double>;

// The nine targeted moments, in table order.
struct MomentSet {
    Stat share_R_male;
    Stat share_NR_male;
    Stat logwage_gap_RNR_male;
    Stat mean_hours_R_male;
    Stat sd_logwage_R_male;
    Stat corr_logearn_RR;
    Stat mean_d_f_R;
    Stat sd_d_f_R;
    Stat share_wife_outearns;

    static constexpr std::size_t kCount = 9;
    static const std::array<std::string, kCount>& names();
    std::array<Stat, kCount> as_array() const;
    static MomentSet from_array(const std::array<Stat, kCount>& v);
};

struct GapSet {
    double participation = 0.0;
    double occupation = 0.0;
    double hours = 0.0;
    double wage = 0.0;

    static const std::array<std::string, 4>& names();
    std::array<double, 4> as_array() const { return {participation, occupation, hours, wage}; }
    static GapSet from_array(const std::array<double, 4>& v) { return {v[0], v[1], v[2], v[3]}; }
};

GapSet operator-(const GapSet& a, const GapSet& b);
GapSet operator+(const GapSet& a, const GapSet& b);

// Rows: husband's occupation; columns: wife's. Order R, NR, NW.
using OccupationMatrix = PairGrid<double>;

struct HoursCell {
    Occupation husband;
    Occupation wife;
    Stat h_m, h_f, d_m, d_f;  // weekly hours
    double weight = 0.0;      // share of couples in the cell
};

// The four working-pair cells (R,R), (R,NR), (NR,R), (NR,NR).
using HoursTable = std::array<HoursCell, 4>;

struct RelativeEarningsDensity {
    double bin_width = 0.05;
    std::vector<double> mass;     // share of dual-earner weight per bin, atom excluded
    double atom_half = 0.0;       // share exactly at 0.5
    double mass_above_half = 0.0; // share strictly above 0.5
    double total_weight = 0.0;    // dual-earner weight (per couple)

    double density(std::size_t bin) const { return mass[bin] / bin_width; }
};

struct GapOptions {
    bool occupation_among_workers = false;
};

// Neumaier-compensated weighted first and second moments of one or two
// variables.
class WeightedMoments {
public:
    void add(double w, double x, double y = 0.0);
    double weight() const { return sw_.value(); }
    Stat mean_x() const;
    Stat mean_y() const;
    Stat sd_x() const;
    Stat sd_y() const;
    Stat corr() const;

private:
    struct Sum {
        double s = 0.0;
        double c = 0.0;
        void add(double v);
        double value() const { return s + c; }
    };
    Sum sw_, sx_, sy_, sxx_, syy_, sxy_;
};

MomentSet compute_moments(const SimulatedPopulation& pop);
OccupationMatrix occupation_matrix(const SimulatedPopulation& pop);
HoursTable hours_table(const SimulatedPopulation& pop);
GapSet gender_gaps(const SimulatedPopulation& pop, const GapOptions& opt = {});
RelativeEarningsDensity relative_earnings_density(const SimulatedPopulation& pop,
                                                  double bin_width = 0.05);

// Male and female marginal occupation shares (R, NR, NW).
std::array<double, 3> male_occupation_shares(const OccupationMatrix& m);
std::array<double, 3> female_occupation_shares(const OccupationMatrix& m);

}  // namespace couplesim
