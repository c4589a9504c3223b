#include "couplesim/regional.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>

#include "couplesim/format.hpp"

namespace couplesim {

namespace {

const char* kPrefectureHeader =
    "prefecture,score,gap_participation,gap_occupation,gap_hours,gap_wage,share_wife_outearns";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, line, [](char c) { return c == ','; });
    for (auto& s : parts) boost::algorithm::trim(s);
    return parts;
}

}  // namespace

std::vector<PrefectureRecord> read_prefectures(std::istream& is, const std::string& source) {
    std::string line;
    int line_no = 0;
    bool header = false;
    std::vector<PrefectureRecord> out;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = boost::algorithm::trim_copy(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        const auto where = source + ":" + std::to_string(line_no);
        if (!header) {
            std::string expect = kPrefectureHeader;
            if (split_csv(trimmed) != split_csv(expect))
                throw std::invalid_argument(where + ": expected header '" + expect + "'");
            header = true;
            continue;
        }
        const auto f = split_csv(trimmed);
        if (f.size() != 7)
            throw std::invalid_argument(where + ": expected 7 fields, got " + std::to_string(f.size()));
        PrefectureRecord r;
        r.id = f[0];
        r.score = parse_double(f[1], where + " score");
        r.gaps.participation = parse_double(f[2], where + " gap_participation");
        r.gaps.occupation = parse_double(f[3], where + " gap_occupation");
        r.gaps.hours = parse_double(f[4], where + " gap_hours");
        r.gaps.wage = parse_double(f[5], where + " gap_wage");
        r.share_wife_outearns = parse_double(f[6], where + " share_wife_outearns");
        if (!std::isfinite(r.score)) throw std::invalid_argument(where + ": score must be finite");
        for (double g : r.gaps.as_array())
            if (!std::isfinite(g)) throw std::invalid_argument(where + ": gaps must be finite");
        if (!(r.share_wife_outearns >= 0.0 && r.share_wife_outearns <= 1.0))
            throw std::invalid_argument(where + ": share_wife_outearns must lie in [0,1]");
        out.push_back(r);
    }
    if (!header) throw std::invalid_argument(source + ": missing header row");
    return out;
}

void write_prefectures(std::ostream& os, const std::vector<PrefectureRecord>& records) {
    os << kPrefectureHeader << "\n";
    for (const auto& r : records) {
        os << r.id << "," << format_exact(r.score);
        for (double g : r.gaps.as_array()) os << "," << format_exact(g);
        os << "," << format_exact(r.share_wife_outearns) << "\n";
    }
}

GapSet level_adjustment(const GapSet& data_national, const GapSet& model_national) {
    return data_national - model_national;
}

GapSet national_data_gaps() { return {0.16, 0.53, 0.49, 0.76}; }

Line ols(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("ols: x and y differ in length");
    if (x.size() < 2) throw std::invalid_argument("ols: need at least two observations");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double scale = std::max(1.0, std::abs(mx));
    if (!(sxx > 1e-24 * n * scale * scale))
        throw std::invalid_argument("ols: regressor has no variation");
    Line l;
    l.slope = sxy / sxx;
    l.intercept = my - l.slope * mx;
    return l;
}

Line ols_bridge(const std::vector<PrefectureRecord>& records) {
    std::vector<double> share, score;
    for (const auto& r : records) {
        share.push_back(r.share_wife_outearns);
        score.push_back(r.score);
    }
    return ols(share, score);
}

std::vector<double> default_curve_grid(double delta_hat, int points) {
    if (points < 2) throw std::invalid_argument("a curve grid needs at least two points");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) g[i] = 2.0 * delta_hat * i / (points - 1);
    return g;
}

PredictionCurve prediction_curve(const ModelParams& p, std::vector<double> delta_grid,
                                 const GapSet& g0, const Line& bridge, const PopulationConfig& cfg,
                                 const GapOptions& gaps) {
    for (double d : delta_grid)
        if (!(d >= 0.0) || !std::isfinite(d))
            throw std::invalid_argument("delta grid values must be finite and non-negative");
    // the calibrated delta itself is always on the curve; a grid point within
    // rounding of it is replaced by the exact value
    for (double& d : delta_grid)
        if (std::abs(d - p.delta()) <= 1e-12 * std::max(1.0, p.delta())) d = p.delta();
    delta_grid.push_back(p.delta());
    std::sort(delta_grid.begin(), delta_grid.end());
    delta_grid.erase(std::unique(delta_grid.begin(), delta_grid.end()), delta_grid.end());

    const std::vector<Couple> couples = draw_couples(p, cfg);
    PredictionCurve curve;
    for (double d : delta_grid) {
        const ModelParams pd = p.with_delta(d);
        const SimulatedPopulation pop =
            solve_population(couples, pd, cfg.mode, cfg.threads, cfg.solver);
        CurvePoint pt;
        pt.delta = d;
        const Stat share = compute_moments(pop).share_wife_outearns;
        pt.share = share.value_or(0.0);
        pt.score_hat = bridge(pt.share);
        pt.model_gaps = gender_gaps(pop, gaps);
        pt.gaps_hat = pt.model_gaps + g0;
        curve.points.push_back(pt);
    }
    return curve;
}

CurveComparison compare_curve(const PredictionCurve& curve,
                              const std::vector<PrefectureRecord>& records) {
    CurveComparison cmp;
    std::vector<double> score;
    std::array<std::vector<double>, 4> gaps;
    for (const auto& r : records) {
        score.push_back(r.score);
        const auto g = r.gaps.as_array();
        for (std::size_t k = 0; k < 4; ++k) gaps[k].push_back(g[k]);
    }
    for (std::size_t k = 0; k < 4; ++k) cmp.fits[k] = ols(score, gaps[k]);
    const auto [lo, hi] = std::minmax_element(score.begin(), score.end());
    for (std::size_t k = 0; k < 4; ++k) {
        double ss = 0.0;
        int n = 0;
        for (const CurvePoint& pt : curve.points) {
            if (pt.score_hat < *lo || pt.score_hat > *hi) continue;
            const double diff = pt.gaps_hat.as_array()[k] - cmp.fits[k](pt.score_hat);
            ss += diff * diff;
            ++n;
        }
        cmp.points_used[k] = n;
        cmp.rms[k] = n > 0 ? std::sqrt(ss / n) : std::numeric_limits<double>::quiet_NaN();
    }
    return cmp;
}

void write_curve_csv(std::ostream& os, const PredictionCurve& curve) {
    os << "delta,score_hat,gap_participation_hat,gap_occupation_hat,gap_hours_hat,gap_wage_hat,"
          "share_wife_outearns\n";
    for (const CurvePoint& pt : curve.points) {
        os << format_number(pt.delta) << "," << format_number(pt.score_hat);
        for (double g : pt.gaps_hat.as_array()) os << "," << format_number(g);
        os << "," << format_number(pt.share) << "\n";
    }
}

void write_fit_csv(std::ostream& os, const PredictionCurve& curve,
                   const std::vector<PrefectureRecord>& records, const CurveComparison& cmp) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : records) {
        lo = std::min(lo, r.score);
        hi = std::max(hi, r.score);
    }
    os << "gap,delta,score,model,data_fit\n";
    for (std::size_t k = 0; k < 4; ++k)
        for (const CurvePoint& pt : curve.points) {
            if (pt.score_hat < lo || pt.score_hat > hi) continue;
            os << GapSet::names()[k] << "," << format_number(pt.delta) << ","
               << format_number(pt.score_hat) << "," << format_number(pt.gaps_hat.as_array()[k])
               << "," << format_number(cmp.fits[k](pt.score_hat)) << "\n";
        }
}

}  // namespace couplesim
