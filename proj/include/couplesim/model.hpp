#pragma once

#include <array>
#include <limits>
#include <string_view>

namespace couplesim {

// Model primitives: parameters, occupations, earnings schedules, utility and
// the CES domestic-production constraint. Everything here is pure.

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum class Occupation : int { Regular = 0, NonRegular = 1, NotWorking = 2 };

inline constexpr std::array<Occupation, 3> kOccupations = {
    Occupation::Regular, Occupation::NonRegular, Occupation::NotWorking};

std::string_view occupation_name(Occupation j);
std::string_view occupation_code(Occupation j);  // "R", "NR", "NW"

inline constexpr int index_of(Occupation j) { return static_cast<int>(j); }

// Raw parameter values. Defaults are the published baseline calibration.
struct ParamValues {
    double theta = 2.62;
    double psi = 0.59;
    double eta = 0.17;
    double phi = 12.0;
    double sigma = 0.64;
    double rho = 0.53;
    double alpha = 0.08;
    double beta = 0.43;
    double delta = 0.79;
    // fixed
    double gamma = 3.0;
    double xi = 2.0 / 3.0;
    // time is measured in units of 100 hours per week
    double h_bar = 0.40;
    double h_min_R = 0.20;
    double h_min_NR = 0.10;
    double hours_per_unit = 100.0;
};

// Validated parameter set. Construction throws std::invalid_argument on any
// domain violation, so holders of a ModelParams never see an invalid value.
class ModelParams {
public:
    ModelParams() : ModelParams(ParamValues{}) {}
    explicit ModelParams(const ParamValues& v);

    static ModelParams calibrated() { return ModelParams(ParamValues{}); }

    const ParamValues& values() const { return v_; }

    double theta() const { return v_.theta; }
    double psi() const { return v_.psi; }
    double eta() const { return v_.eta; }
    double phi() const { return v_.phi; }
    double sigma() const { return v_.sigma; }
    double rho() const { return v_.rho; }
    double alpha() const { return v_.alpha; }
    double beta() const { return v_.beta; }
    double delta() const { return v_.delta; }
    double gamma() const { return v_.gamma; }
    double xi() const { return v_.xi; }
    double h_bar() const { return v_.h_bar; }
    double h_min_R() const { return v_.h_min_R; }
    double h_min_NR() const { return v_.h_min_NR; }
    double hours_per_unit() const { return v_.hours_per_unit; }

    // h_bar^theta, the hourly rate of a unit-ability regular worker at the kink
    double kink_rate() const { return kink_rate_; }
    double min_hours(Occupation j) const;

    ModelParams with_delta(double delta) const;

    friend bool operator==(const ModelParams& a, const ModelParams& b);

private:
    ParamValues v_;
    double kink_rate_ = 0.0;
};

struct Couple {
    double a_m = 1.0;
    double a_f = 1.0;
    double D = 0.1;
};

// Throws std::invalid_argument unless a_m, a_f > 0 and 0 < D < 1.
void validate(const Couple& c);

// Earnings e(h, a, j). Regular jobs pay a*h^(1+theta) up to the kink and
// linearly above it; the flexible schedule is linear throughout. Hours below
// the occupation's minimum earn nothing.
double earnings(double h, double a, Occupation j, const ModelParams& p,
                bool flexible_regular = false);

// log c - phi * t^(1+gamma) / (1+gamma); kNegInf when c <= 0.
double individual_utility(double c, double total_hours, const ModelParams& p);

// zeta(d_m, d_f) = (d_m^xi + d_f^xi)^(1/xi)
double domestic_output(double d_m, double d_f, const ModelParams& p);

// Partner hours d_other with zeta(d_own, d_other) = D.
double domestic_partner_hours(double D, double d_own, const ModelParams& p);

}  // namespace couplesim
