#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "couplesim/population.hpp"
#include "couplesim/statistics.hpp"

namespace couplesim {

struct PrefectureRecord {
    std::string id;
    double score = 0.0;  // higher = more conservative
    GapSet gaps;
    double share_wife_outearns = 0.0;
};

// Header: prefecture,score,gap_participation,gap_occupation,gap_hours,gap_wage,share_wife_outearns
std::vector<PrefectureRecord> read_prefectures(std::istream& is,
                                               const std::string& source = "prefectures");
void write_prefectures(std::ostream& os, const std::vector<PrefectureRecord>& records);

// Gaps in the national data not explained by the model: data - model.
GapSet level_adjustment(const GapSet& data_national, const GapSet& model_national);

// National data gaps from the baseline gap table.
GapSet national_data_gaps();

struct Line {
    double intercept = 0.0;
    double slope = 0.0;

    double operator()(double x) const { return intercept + slope * x; }
};

// OLS of y on x; throws std::invalid_argument with fewer than two points or
// no variation in x.
Line ols(const std::vector<double>& x, const std::vector<double>& y);

// Score on the share of wives who out-earn their husbands.
Line ols_bridge(const std::vector<PrefectureRecord>& records);

struct CurvePoint {
    double delta = 0.0;
    double share = 0.0;      // model share_wife_outearns at delta
    double score_hat = 0.0;  // bridge applied to the share
    GapSet model_gaps;       // G(delta)
    GapSet gaps_hat;         // G(delta) + g0
};

struct PredictionCurve {
    std::vector<CurvePoint> points;  // sorted by delta
};

// 21 evenly spaced points on [0, 2 * delta_hat].
std::vector<double> default_curve_grid(double delta_hat, int points = 21);

// Simulates every delta in the grid (sorted, duplicates removed, with the
// calibrated delta added if absent) on the same couples.
PredictionCurve prediction_curve(const ModelParams& p, std::vector<double> delta_grid,
                                 const GapSet& g0, const Line& bridge, const PopulationConfig& cfg,
                                 const GapOptions& gaps = {});

// Per-gap data fit (gap on score) and the root-mean-square distance between
// the model curve and that fit over curve points inside the data score range.
struct CurveComparison {
    std::array<Line, 4> fits{};
    std::array<double, 4> rms{};
    std::array<int, 4> points_used{};
};

CurveComparison compare_curve(const PredictionCurve& curve,
                              const std::vector<PrefectureRecord>& records);

void write_curve_csv(std::ostream& os, const PredictionCurve& curve);
// Paired series for plotting: for each curve point inside the data score
// range, the curve value and the data fit at the same score.
void write_fit_csv(std::ostream& os, const PredictionCurve& curve,
                   const std::vector<PrefectureRecord>& records, const CurveComparison& cmp);

}  // namespace couplesim
