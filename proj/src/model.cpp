#include "couplesim/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace couplesim {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid model parameter: ") + what);
}

}  // namespace

std::string_view occupation_name(Occupation j) {
    switch (j) {
        case Occupation::Regular: return "Regular";
        case Occupation::NonRegular: return "Non-regular";
        case Occupation::NotWorking: return "Not-work";
    }
    return "?";
}

std::string_view occupation_code(Occupation j) {
    switch (j) {
        case Occupation::Regular: return "R";
        case Occupation::NonRegular: return "NR";
        case Occupation::NotWorking: return "NW";
    }
    return "?";
}

ModelParams::ModelParams(const ParamValues& v) : v_(v) {
    auto finite = [](double x) { return std::isfinite(x); };
    require(finite(v.theta) && v.theta > 0.0, "theta must be > 0");
    require(finite(v.psi) && v.psi > 0.0 && v.psi < 1.0, "psi must lie in (0,1)");
    require(finite(v.eta) && v.eta > 0.0, "eta must be > 0");
    require(finite(v.phi) && v.phi > 0.0, "phi must be > 0");
    require(finite(v.sigma) && v.sigma > 0.0, "sigma must be > 0");
    require(finite(v.rho) && v.rho > -1.0 && v.rho < 1.0, "rho must lie in (-1,1)");
    require(finite(v.alpha) && v.alpha > 0.0, "alpha must be > 0");
    require(finite(v.beta) && v.beta > 0.0, "beta must be > 0");
    require(finite(v.delta) && v.delta >= 0.0, "delta must be >= 0");
    require(finite(v.gamma) && v.gamma > 0.0, "gamma must be > 0");
    require(finite(v.xi) && v.xi > 0.0 && v.xi <= 1.0, "xi must lie in (0,1]");
    require(v.h_min_NR > 0.0 && v.h_min_NR < v.h_min_R && v.h_min_R < v.h_bar && v.h_bar < 1.0,
            "hours must satisfy 0 < h_min_NR < h_min_R < h_bar < 1");
    require(finite(v.hours_per_unit) && v.hours_per_unit > 0.0, "hours_per_unit must be > 0");
    kink_rate_ = std::pow(v.h_bar, v.theta);
}

double ModelParams::min_hours(Occupation j) const {
    switch (j) {
        case Occupation::Regular: return v_.h_min_R;
        case Occupation::NonRegular: return v_.h_min_NR;
        case Occupation::NotWorking: return 0.0;
    }
    return 0.0;
}

ModelParams ModelParams::with_delta(double delta) const {
    ParamValues v = v_;
    v.delta = delta;
    return ModelParams(v);
}

bool operator==(const ModelParams& a, const ModelParams& b) {
    const ParamValues& x = a.v_;
    const ParamValues& y = b.v_;
    return x.theta == y.theta && x.psi == y.psi && x.eta == y.eta && x.phi == y.phi &&
           x.sigma == y.sigma && x.rho == y.rho && x.alpha == y.alpha && x.beta == y.beta &&
           x.delta == y.delta && x.gamma == y.gamma && x.xi == y.xi && x.h_bar == y.h_bar &&
           x.h_min_R == y.h_min_R && x.h_min_NR == y.h_min_NR &&
           x.hours_per_unit == y.hours_per_unit;
}

void validate(const Couple& c) {
    if (!(c.a_m > 0.0) || !(c.a_f > 0.0) || !std::isfinite(c.a_m) || !std::isfinite(c.a_f))
        throw std::invalid_argument("couple abilities must be positive and finite");
    if (!(c.D > 0.0 && c.D < 1.0))
        throw std::invalid_argument("home requirement D must lie in (0,1)");
}

double earnings(double h, double a, Occupation j, const ModelParams& p, bool flexible_regular) {
    if (!(h >= 0.0 && h <= 1.0)) throw std::invalid_argument("hours must lie in [0,1]");
    if (!(a > 0.0)) throw std::invalid_argument("ability must be positive");
    switch (j) {
        case Occupation::Regular:
            if (h < p.h_min_R()) return 0.0;
            if (flexible_regular || h > p.h_bar()) return a * p.kink_rate() * h;
            return a * std::pow(h, 1.0 + p.theta());
        case Occupation::NonRegular:
            if (h < p.h_min_NR()) return 0.0;
            return p.psi() * a * p.kink_rate() * h;
        case Occupation::NotWorking:
            return 0.0;
    }
    return 0.0;
}

double individual_utility(double c, double total_hours, const ModelParams& p) {
    if (!(c > 0.0)) return kNegInf;
    const double g1 = 1.0 + p.gamma();
    return std::log(c) - p.phi() * std::pow(total_hours, g1) / g1;
}

double domestic_output(double d_m, double d_f, const ModelParams& p) {
    const double xi = p.xi();
    return std::pow(std::pow(d_m, xi) + std::pow(d_f, xi), 1.0 / xi);
}

double domestic_partner_hours(double D, double d_own, const ModelParams& p) {
    if (!(d_own >= 0.0)) throw std::invalid_argument("domestic hours must be non-negative");
    if (d_own > D) throw std::invalid_argument("own domestic hours exceed the home requirement");
    const double xi = p.xi();
    const double rest = std::pow(D, xi) - std::pow(d_own, xi);
    if (rest <= 0.0) return 0.0;
    return std::pow(rest, 1.0 / xi);
}

}  // namespace couplesim
