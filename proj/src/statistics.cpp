#include "couplesim/statistics.hpp"

#include <cmath>
#include <stdexcept>

namespace couplesim {

namespace {

constexpr int R = index_of(Occupation::Regular);
constexpr int NR = index_of(Occupation::NonRegular);
constexpr int NW = index_of(Occupation::NotWorking);

template <class Fn>
void for_each_cell(const SimulatedPopulation& pop, Fn&& fn) {
    for (const CoupleSolution& s : pop.solutions)
        for (int jm = 0; jm < 3; ++jm)
            for (int jf = 0; jf < 3; ++jf) {
                const double w = s.prob[jm][jf];
                if (w > 0.0) fn(jm, jf, w, s.alloc[jm][jf]);
            }
}

Stat diff(const Stat& a, const Stat& b) {
    if (!a || !b) return std::nullopt;
    return *a - *b;
}

}  // namespace

void WeightedMoments::Sum::add(double v) {
    const double t = s + v;
    if (std::abs(s) >= std::abs(v))
        c += (s - t) + v;
    else
        c += (v - t) + s;
    s = t;
}

void WeightedMoments::add(double w, double x, double y) {
    sw_.add(w);
    sx_.add(w * x);
    sy_.add(w * y);
    sxx_.add(w * x * x);
    syy_.add(w * y * y);
    sxy_.add(w * x * y);
}

Stat WeightedMoments::mean_x() const {
    const double w = weight();
    if (!(w > 0.0)) return std::nullopt;
    return sx_.value() / w;
}

Stat WeightedMoments::mean_y() const {
    const double w = weight();
    if (!(w > 0.0)) return std::nullopt;
    return sy_.value() / w;
}

Stat WeightedMoments::sd_x() const {
    const double w = weight();
    if (!(w > 0.0)) return std::nullopt;
    const double m = sx_.value() / w;
    return std::sqrt(std::max(0.0, sxx_.value() / w - m * m));
}

Stat WeightedMoments::sd_y() const {
    const double w = weight();
    if (!(w > 0.0)) return std::nullopt;
    const double m = sy_.value() / w;
    return std::sqrt(std::max(0.0, syy_.value() / w - m * m));
}

Stat WeightedMoments::corr() const {
    const double w = weight();
    if (!(w > 0.0)) return std::nullopt;
    const double mx = sx_.value() / w;
    const double my = sy_.value() / w;
    const double vx = sxx_.value() / w - mx * mx;
    const double vy = syy_.value() / w - my * my;
    if (!(vx > 0.0) || !(vy > 0.0)) return std::nullopt;
    const double c = (sxy_.value() / w - mx * my) / std::sqrt(vx * vy);
    return std::clamp(c, -1.0, 1.0);
}

const std::array<std::string, MomentSet::kCount>& MomentSet::names() {
    static const std::array<std::string, kCount> n = {
        "share_R_male",      "share_NR_male",    "logwage_gap_RNR_male",
        "mean_hours_R_male", "sd_logwage_R_male", "corr_logearn_RR",
        "mean_d_f_R",        "sd_d_f_R",          "share_wife_outearns"};
    return n;
}

std::array<Stat, MomentSet::kCount> MomentSet::as_array() const {
    return {share_R_male,      share_NR_male,   logwage_gap_RNR_male,
            mean_hours_R_male, sd_logwage_R_male, corr_logearn_RR,
            mean_d_f_R,        sd_d_f_R,          share_wife_outearns};
}

MomentSet MomentSet::from_array(const std::array<Stat, kCount>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
}

const std::array<std::string, 4>& GapSet::names() {
    static const std::array<std::string, 4> n = {"participation", "occupation", "hours", "wage"};
    return n;
}

GapSet operator-(const GapSet& a, const GapSet& b) {
    return {a.participation - b.participation, a.occupation - b.occupation, a.hours - b.hours,
            a.wage - b.wage};
}

GapSet operator+(const GapSet& a, const GapSet& b) {
    return {a.participation + b.participation, a.occupation + b.occupation, a.hours + b.hours,
            a.wage + b.wage};
}

MomentSet compute_moments(const SimulatedPopulation& pop) {
    if (pop.size() == 0) throw std::invalid_argument("empty population");
    WeightedMoments male_r, male_nr, rr, female_r, dual;
    double total = 0.0;
    for_each_cell(pop, [&](int jm, int jf, double w, const Allocation& a) {
        total += w;
        if (jm == R) {
            const double logw = std::log(a.e_m / a.h_m);
            male_r.add(w, a.h_m, logw);
        } else if (jm == NR) {
            male_nr.add(w, 0.0, std::log(a.e_m / a.h_m));
        }
        if (jm == R && jf == R) rr.add(w, std::log(a.e_m), std::log(a.e_f));
        if (jf == R) female_r.add(w, a.d_f);
        if (jm != NW && jf != NW) dual.add(w, a.e_f > a.e_m ? 1.0 : 0.0);
    });
    const double n = static_cast<double>(pop.size());
    MomentSet m;
    m.share_R_male = male_r.weight() / n;
    m.share_NR_male = male_nr.weight() / n;
    m.logwage_gap_RNR_male = diff(male_r.mean_y(), male_nr.mean_y());
    m.mean_hours_R_male = male_r.mean_x();
    m.sd_logwage_R_male = male_r.sd_y();
    m.corr_logearn_RR = rr.corr();
    m.mean_d_f_R = female_r.mean_x();
    m.sd_d_f_R = female_r.sd_x();
    m.share_wife_outearns = dual.mean_x();
    return m;
}

OccupationMatrix occupation_matrix(const SimulatedPopulation& pop) {
    OccupationMatrix m{};
    if (pop.size() == 0) return m;
    std::array<std::array<WeightedMoments, 3>, 3> acc;
    for (const CoupleSolution& s : pop.solutions)
        for (int jm = 0; jm < 3; ++jm)
            for (int jf = 0; jf < 3; ++jf) acc[jm][jf].add(s.prob[jm][jf], 0.0);
    const double n = static_cast<double>(pop.size());
    for (int jm = 0; jm < 3; ++jm)
        for (int jf = 0; jf < 3; ++jf) m[jm][jf] = acc[jm][jf].weight() / n;
    return m;
}

HoursTable hours_table(const SimulatedPopulation& pop) {
    const double scale = pop.params.hours_per_unit();
    const std::array<std::pair<int, int>, 4> cells = {{{R, R}, {R, NR}, {NR, R}, {NR, NR}}};
    std::array<WeightedMoments, 4> hours, domestic;
    for_each_cell(pop, [&](int jm, int jf, double w, const Allocation& a) {
        for (std::size_t c = 0; c < cells.size(); ++c)
            if (cells[c].first == jm && cells[c].second == jf) {
                hours[c].add(w, a.h_m, a.h_f);
                domestic[c].add(w, a.d_m, a.d_f);
            }
    });
    auto scaled = [&](const Stat& s) -> Stat {
        if (!s) return std::nullopt;
        return *s * scale;
    };
    HoursTable t;
    const double n = pop.size() > 0 ? static_cast<double>(pop.size()) : 1.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        t[c].husband = kOccupations[cells[c].first];
        t[c].wife = kOccupations[cells[c].second];
        t[c].h_m = scaled(hours[c].mean_x());
        t[c].h_f = scaled(hours[c].mean_y());
        t[c].d_m = scaled(domestic[c].mean_x());
        t[c].d_f = scaled(domestic[c].mean_y());
        t[c].weight = hours[c].weight() / n;
    }
    return t;
}

GapSet gender_gaps(const SimulatedPopulation& pop, const GapOptions& opt) {
    if (pop.size() == 0) throw std::invalid_argument("empty population");
    WeightedMoments men, women;
    double male_work = 0.0, female_work = 0.0, male_r = 0.0, female_r = 0.0;
    for_each_cell(pop, [&](int jm, int jf, double w, const Allocation& a) {
        if (jm != NW) {
            male_work += w;
            men.add(w, std::log(a.h_m), std::log(a.e_m / a.h_m));
        }
        if (jf != NW) {
            female_work += w;
            women.add(w, std::log(a.h_f), std::log(a.e_f / a.h_f));
        }
        if (jm == R) male_r += w;
        if (jf == R) female_r += w;
    });
    const double n = static_cast<double>(pop.size());
    GapSet g;
    g.participation = (male_work - female_work) / n;
    if (opt.occupation_among_workers) {
        const double mr = male_work > 0.0 ? male_r / male_work : 0.0;
        const double fr = female_work > 0.0 ? female_r / female_work : 0.0;
        g.occupation = mr - fr;
    } else {
        g.occupation = (male_r - female_r) / n;
    }
    g.hours = men.mean_x().value_or(0.0) - women.mean_x().value_or(0.0);
    g.wage = men.mean_y().value_or(0.0) - women.mean_y().value_or(0.0);
    return g;
}

RelativeEarningsDensity relative_earnings_density(const SimulatedPopulation& pop,
                                                  double bin_width) {
    if (!(bin_width > 0.0 && bin_width <= 1.0))
        throw std::invalid_argument("bin width must lie in (0,1]");
    RelativeEarningsDensity out;
    out.bin_width = bin_width;
    const auto bins = static_cast<std::size_t>(std::ceil(1.0 / bin_width - 1e-9));
    std::vector<WeightedMoments> acc(bins);
    WeightedMoments atom, above, total;
    for_each_cell(pop, [&](int jm, int jf, double w, const Allocation& a) {
        if (jm == NW || jf == NW) return;
        total.add(w, 0.0);
        if (a.e_f == a.e_m) {
            atom.add(w, 0.0);
            return;
        }
        const double share = a.e_f / (a.e_m + a.e_f);
        if (a.e_f > a.e_m) above.add(w, 0.0);
        auto b = static_cast<std::size_t>(share / bin_width);
        if (b >= bins) b = bins - 1;
        acc[b].add(w, 0.0);
    });
    const double tw = total.weight();
    out.mass.assign(bins, 0.0);
    out.total_weight = tw / std::max<double>(1.0, static_cast<double>(pop.size()));
    if (tw > 0.0) {
        for (std::size_t b = 0; b < bins; ++b) out.mass[b] = acc[b].weight() / tw;
        out.atom_half = atom.weight() / tw;
        out.mass_above_half = above.weight() / tw;
    }
    return out;
}

std::array<double, 3> male_occupation_shares(const OccupationMatrix& m) {
    std::array<double, 3> s{};
    for (int jm = 0; jm < 3; ++jm)
        for (int jf = 0; jf < 3; ++jf) s[jm] += m[jm][jf];
    return s;
}

std::array<double, 3> female_occupation_shares(const OccupationMatrix& m) {
    std::array<double, 3> s{};
    for (int jm = 0; jm < 3; ++jm)
        for (int jf = 0; jf < 3; ++jf) s[jf] += m[jm][jf];
    return s;
}

}  // namespace couplesim
