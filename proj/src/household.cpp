#include "couplesim/household.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "couplesim/nelder_mead.hpp"

namespace couplesim {

namespace {


// One smooth segment of an earnings schedule: e = coef * h^power on [lo, hi].
// A not-working spouse is the degenerate segment lo = hi = 0, coef = 0.
struct Piece {
    double lo = 0.0;
    double hi = 0.0;
    double coef = 0.0;
    double power = 1.0;

    bool fixed() const { return hi <= lo; }
    double earn(double h) const {
        if (coef == 0.0) return 0.0;
        return power == 1.0 ? coef * h : coef * std::pow(h, power);
    }
    double hours_for(double e) const {
        return power == 1.0 ? e / coef : std::pow(e / coef, 1.0 / power);
    }
};

struct Pieces {
    std::array<Piece, 2> seg{};
    int count = 0;
};

Pieces make_pieces(Occupation j, double a, const ModelParams& p, const SolverMode& mode) {
    Pieces out;
    switch (j) {
        case Occupation::NotWorking:
            out.seg[0] = Piece{};
            out.count = 1;
            break;
        case Occupation::NonRegular:
            out.seg[0] = Piece{p.h_min_NR(), 1.0, p.psi() * a * p.kink_rate(), 1.0};
            out.count = 1;
            break;
        case Occupation::Regular:
            if (mode.flexible()) {
                out.seg[0] = Piece{p.h_min_R(), 1.0, a * p.kink_rate(), 1.0};
                out.count = 1;
            } else {
                out.seg[0] = Piece{p.h_min_R(), p.h_bar(), a, 1.0 + p.theta()};
                out.seg[1] = Piece{p.h_bar(), 1.0, a * p.kink_rate(), 1.0};
                out.count = 2;
            }
            break;
    }
    return out;
}

// Fast paths for the fixed curvatures used by the calibrated model.
struct Curvature {
    double xi;
    double gamma;
    bool xi_two_thirds;
    bool gamma_three;

    Curvature(double xi_, double gamma_)
        : xi(xi_), gamma(gamma_), xi_two_thirds(xi_ == 2.0 / 3.0), gamma_three(gamma_ == 3.0) {}

    double pow_xi(double x) const {
        if (xi_two_thirds) {
            const double c = std::cbrt(x);
            return c * c;
        }
        return std::pow(x, xi);
    }
    double pow_inv_xi(double s) const {
        if (xi_two_thirds) return s * std::sqrt(s);
        return std::pow(s, 1.0 / xi);
    }
    double pow_one_minus_xi(double r) const {
        if (xi_two_thirds) return std::cbrt(r);
        return std::pow(r, 1.0 - xi);
    }
    double pow_gamma(double t) const {
        if (gamma_three) return t * t * t;
        return std::pow(t, gamma);
    }
    double pow_gamma1(double t) const {
        if (gamma_three) {
            const double t2 = t * t;
            return t2 * t2;
        }
        return std::pow(t, gamma + 1.0);
    }
};

struct Inner {
    double x = 0.0;  // husband domestic hours
    double y = 0.0;  // wife domestic hours
    double b = 0.0;  // purchased hours
    double value = kNegInf;
};

struct Split {
    double x = 0.0;
    double y = 0.0;
    double cost = 0.0;  // sum of T^(1+gamma) / (1+gamma)
    bool feasible = false;
};

// Solves the household problem for fixed market hours: the optimal split of
// domestic hours (and purchased hours when outsourcing is available).
class Evaluator {
public:
    Evaluator(const Couple& c, const ModelParams& p, const SolverMode& m)
        : couple_(c), p_(p), mode_(m), cv_(p.xi(), p.gamma()), D_xi_(cv_.pow_xi(c.D)) {}

    // Joint utility before any norm penalty; -inf when infeasible.
    double value(double hm, double hf, double earn_total, Inner* out) {
        if (!(earn_total > 0.0)) return kNegInf;
        if (!mode_.outsourcing()) {
            const Split s = split(hm, hf, couple_.D);
            if (!s.feasible) return kNegInf;
            const double v = 2.0 * std::log(0.5 * earn_total) - p_.phi() * s.cost;
            if (out) *out = Inner{s.x, s.y, 0.0, v};
            return v;
        }
        return value_outsourcing(hm, hf, earn_total, out);
    }

    const Curvature& curvature() const { return cv_; }

private:
    // Minimises the disutility of total hours over the isoquant
    // x^xi + y^xi = D^xi subject to h + d <= 1 for each spouse.
    //
    // Parametrised by w = logit(q), q = (x/D)^xi, the first-order condition
    //   gamma [log(hm + x) - log(hf + y)] + (1 - xi)/xi * w = 0
    // is monotone and nearly linear in w, so a bracketed Newton iteration
    // converges in a handful of steps.
    Split split(double hm, double hf, double D_eff) {
        Split s;
        const double cap_m = 1.0 - hm;
        const double cap_f = 1.0 - hf;
        if (cap_m < 0.0 || cap_f < 0.0) return s;
        const double g1 = 1.0 + p_.gamma();
        if (D_eff <= 0.0) {
            s.feasible = true;
            s.cost = (cv_.pow_gamma1(hm) + cv_.pow_gamma1(hf)) / g1;
            return s;
        }
        const double xi = cv_.xi;
        const double tilt = (1.0 - xi) / xi;
        const double gamma = p_.gamma();

        constexpr double kWide = 60.0;
        double lo = -kWide;
        double hi = kWide;
        bool lo_binding = false;
        bool hi_binding = false;
        if (cap_m < D_eff) {
            const double c = cv_.pow_xi(cap_m / D_eff);
            hi = std::log(c / (1.0 - c));
            hi_binding = true;
        }
        if (cap_f < D_eff) {
            const double c = cv_.pow_xi(cap_f / D_eff);
            lo = std::log((1.0 - c) / c);
            lo_binding = true;
        }
        if (lo > hi) return s;

        double x = 0.0, y = 0.0, q = 0.0;
        auto place = [&](double w) {
            const double e = std::exp(-w);
            q = 1.0 / (1.0 + e);
            const double q1 = e / (1.0 + e);
            x = D_eff * cv_.pow_inv_xi(q);
            y = D_eff * cv_.pow_inv_xi(q1);
        };
        auto foc = [&](double w, double* slope) {
            place(w);
            const double tm = hm + x;
            const double tf = hf + y;
            if (slope) *slope = gamma / xi * (x * (1.0 - q) / tm + y * q / tf) + tilt;
            return gamma * (std::log(tm) - std::log(tf)) + tilt * w;
        };

        double w;
        if (lo_binding && foc(lo, nullptr) >= 0.0) {
            w = lo;
        } else if (hi_binding && foc(hi, nullptr) <= 0.0) {
            w = hi;
        } else {
            w = std::clamp(warm_w_, lo, hi);
            for (int it = 0; it < 100; ++it) {
                double slope = 0.0;
                const double f = foc(w, &slope);
                if (f > 0.0)
                    hi = w;
                else
                    lo = w;
                double wn = w - f / slope;
                if (!(wn > lo && wn < hi)) wn = 0.5 * (lo + hi);
                const bool done = std::abs(wn - w) <= 1e-11 || hi - lo <= 1e-11;
                w = wn;
                if (done) break;
            }
            warm_w_ = w;
        }
        place(w);
        x = std::min(x, cap_m);
        y = std::min(y, cap_f);
        s.x = x;
        s.y = y;
        s.cost = (cv_.pow_gamma1(hm + x) + cv_.pow_gamma1(hf + y)) / g1;
        s.feasible = true;
        return s;
    }

    // One input of the domestic requirement at a given log shadow price L:
    // the quantity v solving lhs(log v) = L - offset, where lhs is increasing,
    // clamped to [0, cap]. Also returns d(v^xi)/dL.
    struct Input {
        double v = 0.0;
        double v_xi = 0.0;
        double slope = 0.0;
        double log_v = 0.0;  // warm start for the next solve
    };

    // lhs(s) = g_coef * log(base + e^s) + (1 - xi) s  for spouses,
    // lhs(s) = (1 - xi) s - log(E - p e^s)           for purchases.
    template <class Lhs>
    Input solve_input(Lhs&& lhs, double target, double s_lo, double s_hi, double warm) const {
        Input in;
        double d_lo = 0.0, d_hi = 0.0;
        if (lhs(s_hi, &d_hi) <= target) {
            in.v = std::exp(s_hi);
            in.log_v = s_hi;
        } else if (lhs(s_lo, &d_lo) >= target) {
            in.v = 0.0;
            in.log_v = s_lo;
        } else {
            double lo = s_lo, hi = s_hi;
            double s = std::isfinite(warm) ? std::clamp(warm, lo, hi) : 0.5 * (lo + hi);
            double deriv = 1.0;
            for (int it = 0; it < 100; ++it) {
                const double f = lhs(s, &deriv) - target;
                if (f > 0.0)
                    hi = s;
                else
                    lo = s;
                double sn = s - f / deriv;
                if (!(sn > lo && sn < hi)) sn = 0.5 * (lo + hi);
                const bool done = std::abs(sn - s) <= 1e-13 * (1.0 + std::abs(s)) || hi - lo <= 1e-13;
                s = sn;
                if (done) break;
            }
            lhs(s, &deriv);
            in.v = std::exp(s);
            in.log_v = s;
            in.v_xi = cv_.pow_xi(in.v);
            in.slope = cv_.xi * in.v_xi / deriv;
            return in;
        }
        in.v_xi = in.v > 0.0 ? cv_.pow_xi(in.v) : 0.0;
        return in;
    }

    // Newton on the full system (log x, log y, log b, L) from the previous
    // solution. Inputs at their caps drop out of the linearisation. Returns
    // false when it fails to converge; the nested solve then takes over.
    bool joint_newton(double hm, double hf, double earn_total, double s_lo,
                      std::array<double, 3> s_cap, Input* x, Input* y, Input* b) {
        if (!std::isfinite(warm_L_)) return false;
        const double gamma = p_.gamma();
        const double one_xi = 1.0 - cv_.xi;
        const double price = mode_.price;
        const std::array<double, 3> offset{std::log(p_.phi()), std::log(p_.phi()),
                                           std::log(2.0 * price)};
        std::array<double, 3> s = warm_s_;
        double L = warm_L_;
        std::array<double, 3> v{}, v_xi{}, r{}, d{};
        std::array<bool, 3> held{};
        for (int it = 0; it < 40; ++it) {
            for (int i = 0; i < 3; ++i) {
                s[i] = std::clamp(s[i], s_lo, s_cap[i]);
                v[i] = std::exp(s[i]);
                double lhs;
                if (i < 2) {
                    const double h = i == 0 ? hm : hf;
                    d[i] = gamma * v[i] / (h + v[i]) + one_xi;
                    lhs = gamma * std::log(h + v[i]) + one_xi * s[i];
                } else {
                    const double rest = earn_total - price * v[i];
                    if (!(rest > 0.0)) return false;
                    d[i] = one_xi + price * v[i] / rest;
                    lhs = one_xi * s[i] - std::log(rest);
                }
                r[i] = lhs - (L - offset[i]);
                held[i] = (s[i] >= s_cap[i] && r[i] < 0.0) || (s[i] <= s_lo && r[i] > 0.0);
                v_xi[i] = cv_.pow_xi(v[i]);
            }
            const double r0 = v_xi[0] + v_xi[1] + v_xi[2] - D_xi_;
            double A = 0.0, B = 0.0, r_max = 0.0;
            for (int i = 0; i < 3; ++i) {
                if (held[i]) continue;
                const double w = cv_.xi * v_xi[i] / d[i];
                A += w;
                B += w * r[i];
                r_max = std::max(r_max, std::abs(r[i]));
            }
            if (!(A > 0.0)) return false;
            if (std::abs(r0) <= 1e-14 * D_xi_ && r_max <= 1e-12) {
                auto fill = [&](int i, Input* in) {
                    in->v = v[i];
                    in->v_xi = v_xi[i];
                    in->log_v = s[i];
                };
                fill(0, x);
                fill(1, y);
                fill(2, b);
                warm_s_ = s;
                warm_L_ = L;
                return true;
            }
            const double dL = std::clamp((B - r0) / A, -2.0, 2.0);
            L += dL;
            for (int i = 0; i < 3; ++i)
                if (!held[i]) s[i] += std::clamp((dL - r[i]) / d[i], -2.0, 2.0);
        }
        return false;
    }

    // Outsourcing: at the optimum the marginal cost of every input per unit of
    // its CES share is a common shadow price lambda,
    //   phi (h_m + x)^gamma x^(1-xi) = phi (h_f + y)^gamma y^(1-xi)
    //                                = 2 p b^(1-xi) / (E - p b),
    // so the allocation solves one increasing equation in log lambda:
    //   x^xi + y^xi + b^xi = D^xi.
    double value_outsourcing(double hm, double hf, double earn_total, Inner* out) {
        const double price = mode_.price;
        const double D = couple_.D;
        const double phi = p_.phi();
        const double gamma = p_.gamma();
        const double one_xi = 1.0 - cv_.xi;
        const double cap_m = 1.0 - hm;
        const double cap_f = 1.0 - hf;
        if (cap_m < 0.0 || cap_f < 0.0) return kNegInf;
        const double b_max = std::min(D, earn_total / price * (1.0 - 1e-12));
        if (!(b_max > 0.0)) return kNegInf;
        const double cap_xi = cv_.pow_xi(cap_m) + cv_.pow_xi(cap_f) + cv_.pow_xi(b_max);
        if (cap_xi < D_xi_) return kNegInf;

        const double s_lo = std::log(D) - 80.0;
        const double log_phi = std::log(phi);
        const double log_2p = std::log(2.0 * price);
        auto spouse = [&](double h) {
            return [h, gamma, one_xi](double s, double* d) {
                const double v = std::exp(s);
                *d = gamma * v / (h + v) + one_xi;
                return gamma * std::log(h + v) + one_xi * s;
            };
        };
        auto buy = [&](double s, double* d) {
            const double v = std::exp(s);
            const double rest = earn_total - price * v;
            *d = one_xi + price * v / rest;
            return one_xi * s - std::log(rest);
        };
        const auto lhs_m = spouse(hm);
        const auto lhs_f = spouse(hf);
        const double s_m = cap_m > 0.0 ? std::log(cap_m) : s_lo;
        const double s_f = cap_f > 0.0 ? std::log(cap_f) : s_lo;
        const double s_b = std::log(b_max);

        Input x, y, b;
        if (!joint_newton(hm, hf, earn_total, s_lo, {s_m, s_f, s_b}, &x, &y, &b)) {
            auto excess = [&](double L, double* slope) {
                x = solve_input(lhs_m, L - log_phi, s_lo, s_m, warm_s_[0]);
                y = solve_input(lhs_f, L - log_phi, s_lo, s_f, warm_s_[1]);
                b = solve_input(buy, L - log_2p, s_lo, s_b, warm_s_[2]);
                *slope = x.slope + y.slope + b.slope;
                return x.v_xi + y.v_xi + b.v_xi - D_xi_;
            };
            // Safeguarded Newton in L with an outward bracket search.
            double L = std::isfinite(warm_L_) ? warm_L_ : log_phi + gamma * std::log(0.5 + D);
            double lo = -std::numeric_limits<double>::infinity();
            double hi = std::numeric_limits<double>::infinity();
            double step = 1.0;
            for (int it = 0; it < 300; ++it) {
                double slope = 0.0;
                const double g = excess(L, &slope);
                if (g > 0.0)
                    hi = L;
                else
                    lo = L;
                if (std::abs(g) <= 1e-14 * D_xi_) break;
                double Ln = slope > 0.0 ? L - g / slope : L + (g > 0.0 ? -step : step);
                if (std::isfinite(lo) && std::isfinite(hi)) {
                    if (!(Ln > lo && Ln < hi)) Ln = 0.5 * (lo + hi);
                    if (hi - lo <= 1e-13 * (1.0 + std::abs(L))) break;
                } else if (!(std::abs(Ln - L) <= step)) {
                    Ln = L + (g > 0.0 ? -step : step);
                    step *= 2.0;
                }
                L = Ln;
            }
            warm_L_ = L;
            warm_s_ = {x.log_v, y.log_v, b.log_v};
        }

        // Put the rounding residual of the constraint on the wife's hours, or
        // on the husband's when hers are capped.
        double xv = x.v, yv = y.v;
        const double bv = b.v;
        const double rest = D_xi_ - cv_.pow_xi(bv);
        if (rest <= 0.0) return kNegInf;
        if (yv < cap_f) {
            yv = cv_.pow_inv_xi(std::max(0.0, rest - (xv > 0.0 ? cv_.pow_xi(xv) : 0.0)));
        } else {
            xv = cv_.pow_inv_xi(std::max(0.0, rest - cv_.pow_xi(yv)));
        }
        if (xv > cap_m * (1.0 + 1e-12) || yv > cap_f * (1.0 + 1e-12)) return kNegInf;
        xv = std::min(xv, cap_m);
        yv = std::min(yv, cap_f);
        const double cons = earn_total - price * bv;
        if (!(cons > 0.0)) return kNegInf;
        const double cost = (cv_.pow_gamma1(hm + xv) + cv_.pow_gamma1(hf + yv)) / (1.0 + gamma);
        const double v = 2.0 * std::log(0.5 * cons) - phi * cost;
        if (out) *out = Inner{xv, yv, bv, v};
        return v;
    }

    const Couple& couple_;
    const ModelParams& p_;
    const SolverMode& mode_;
    Curvature cv_;
    double D_xi_;
    double warm_w_ = 0.0;
    static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
    double warm_L_ = kNaN;
    std::array<double, 3> warm_s_{kNaN, kNaN, kNaN};
};

struct Candidate {
    double hm = 0.0;
    double hf = 0.0;
    double em = 0.0;
    double ef = 0.0;
    Inner inner;
    double value = kNegInf;
};

// Maps an unconstrained coordinate onto [lo, hi]; the boundary is reachable
// and smooth, so the simplex can settle on a corner.
double to_box(double u, double lo, double hi) { return lo + (hi - lo) * 0.5 * (1.0 + std::sin(u)); }
double from_box(double h, double lo, double hi) {
    if (hi <= lo) return 0.0;
    const double z = std::clamp(2.0 * (h - lo) / (hi - lo) - 1.0, -1.0, 1.0);
    return std::asin(z);
}

class PairSolver {
public:
    PairSolver(const Couple& c, OccupationPair pair, const ModelParams& p, const SolverMode& m,
               const SolverSettings& s)
        : couple_(c), pair_(pair), p_(p), mode_(m), settings_(s), eval_(c, p, m) {
        const Pieces pm = make_pieces(pair.first, c.a_m, p, m);
        const Pieces pf = make_pieces(pair.second, c.a_f, p, m);
        for (int i = 0; i < pm.count; ++i)
            for (int k = 0; k < pf.count; ++k) {
                Combo combo;
                combo.pm = pm.seg[i];
                combo.pf = pf.seg[k];
                combos_.push_back(std::move(combo));
            }
    }

    Allocation solve() {
        double grid_best = kNegInf;
        for (Combo& c : combos_) {
            scan(c);
            grid_best = std::max(grid_best, c.best_value());
        }
        const double margin = settings_.prune_margin;
        for (Combo& c : combos_) {
            if (c.best_value() < grid_best - margin) continue;
            const double floor = c.best_value() - margin;
            int started = 0;
            for (int idx : c.peaks) {
                if (started >= settings_.polish_starts || c.grid[idx].value < floor) break;
                polish(c, c.grid[idx], false);
                ++started;
            }
        }
        // The restricted problem (e_f <= e_m) only differs from the
        // unrestricted one when the unrestricted optimum has e_f > e_m.
        if (p_.delta() > 0.0 && any_.ef > any_.em) {
            for (Combo& c : combos_) {
                if (c.best_in_region < 0 || c.pf.fixed()) continue;
                if (c.grid[c.best_in_region].value < ok_.value - margin) continue;
                polish(c, c.grid[c.best_in_region], true);
            }
            for (Combo& c : combos_) search_equal_earnings(c);
        }
        return compose();
    }

private:
    struct Combo {
        Piece pm;
        Piece pf;
        int nm = 1;
        int nf = 1;
        std::vector<Candidate> grid;
        std::vector<int> peaks;  // grid local maxima, best first
        int best_in_region = -1;

        double best_value() const { return peaks.empty() ? kNegInf : grid[peaks.front()].value; }
    };

    Allocation compose() const {
        Allocation a;
        const double v_unres = any_.value;
        const double v_res = ok_.value;
        if (v_unres == kNegInf && v_res == kNegInf) return a;
        const double penalised = v_unres - p_.delta();
        const bool use_restricted = v_res >= penalised;
        const Candidate& best = use_restricted ? ok_ : any_;
        a.h_m = best.hm;
        a.h_f = best.hf;
        a.d_m = best.inner.x;
        a.d_f = best.inner.y;
        a.d_buy = best.inner.b;
        a.e_m = best.em;
        a.e_f = best.ef;
        a.c = 0.5 * (best.em + best.ef - mode_.price * best.inner.b);
        a.norm_binding = !use_restricted && best.ef > best.em;
        a.u = use_restricted ? v_res : (a.norm_binding ? penalised : v_unres);
        if (use_restricted && pair_.second != Occupation::NotWorking) {
            // hours recovered by inverting the wife's schedule can sit an ulp
            // above the tie; step down until the schedule itself agrees
            const bool flex = mode_.flexible();
            const double em = earnings(a.h_m, couple_.a_m, pair_.first, p_, flex);
            const double lo = p_.min_hours(pair_.second);
            while (a.h_f > lo && earnings(a.h_f, couple_.a_f, pair_.second, p_, flex) > em)
                a.h_f = std::nextafter(a.h_f, 0.0);
        }
        return a;
    }

    Candidate evaluate(double hm, double hf, const Piece& pm, const Piece& pf,
                       bool equal_earnings = false) {
        const double em = pm.earn(hm);
        const double ef = equal_earnings ? em : pf.earn(hf);
        Inner in;
        const double v = eval_.value(hm, hf, em + ef, &in);
        const Candidate c{hm, hf, em, ef, in, v};
        if (v != kNegInf) {
            if (v > any_.value) any_ = c;
            if (ef <= em && v > ok_.value) ok_ = c;
        }
        return c;
    }

    void scan(Combo& c) {
        const bool free_m = !c.pm.fixed();
        const bool free_f = !c.pf.fixed();
        const int n = settings_.grid_points;
        c.nm = free_m ? n : 1;
        c.nf = free_f ? n : 1;
        auto node = [](const Piece& pc, int i, int cnt) {
            if (cnt == 1) return pc.lo;
            return pc.lo + (pc.hi - pc.lo) * static_cast<double>(i) / (cnt - 1);
        };
        const int nm = c.nm;
        const int nf = c.nf;
        c.grid.resize(static_cast<std::size_t>(nm * nf));
        for (int i = 0; i < nm; ++i)
            for (int k = 0; k < nf; ++k)
                c.grid[i * nf + k] = evaluate(node(c.pm, i, nm), node(c.pf, k, nf), c.pm, c.pf);

        for (int i = 0; i < nm; ++i) {
            for (int k = 0; k < nf; ++k) {
                const Candidate& g = c.grid[i * nf + k];
                if (g.value == kNegInf) continue;
                if (g.ef <= g.em &&
                    (c.best_in_region < 0 || g.value > c.grid[c.best_in_region].value))
                    c.best_in_region = i * nf + k;
                bool peak = true;
                for (int di = -1; di <= 1 && peak; ++di)
                    for (int dk = -1; dk <= 1; ++dk) {
                        const int ii = i + di;
                        const int kk = k + dk;
                        if ((di == 0 && dk == 0) || ii < 0 || kk < 0 || ii >= nm || kk >= nf) continue;
                        if (c.grid[ii * nf + kk].value > g.value) {
                            peak = false;
                            break;
                        }
                    }
                if (peak) c.peaks.push_back(i * nf + k);
            }
        }
        std::stable_sort(c.peaks.begin(), c.peaks.end(),
                         [&](int a, int b) { return c.grid[a].value > c.grid[b].value; });
    }

    SimplexOptions simplex_options() const {
        SimplexOptions opt;
        opt.ftol = settings_.simplex_tol;
        opt.xtol = settings_.simplex_xtol;
        opt.max_evals = 800;
        return opt;
    }

    // Simplex polish from a grid point within one piece combination, in
    // sine-mapped coordinates.
    void polish(const Combo& c, const Candidate& start, bool restricted) {
        const Piece& pm = c.pm;
        const Piece& pf = c.pf;
        auto score = [&](double hm, double hf) {
            const Candidate cand = evaluate(hm, hf, pm, pf);
            if (restricted && cand.ef > cand.em) return std::numeric_limits<double>::infinity();
            return -cand.value;
        };
        const SimplexOptions opt = simplex_options();
        auto step_for = [](double u) { return u > 0.0 ? -0.25 : 0.25; };
        const bool free_m = !pm.fixed();
        const bool free_f = !pf.fixed();
        if (free_m && free_f) {
            const std::array<double, 2> u0{from_box(start.hm, pm.lo, pm.hi),
                                           from_box(start.hf, pf.lo, pf.hi)};
            nelder_mead<2>(
                [&](const std::array<double, 2>& u) {
                    return score(to_box(u[0], pm.lo, pm.hi), to_box(u[1], pf.lo, pf.hi));
                },
                u0, {step_for(u0[0]), step_for(u0[1])}, opt);
        } else if (free_m) {
            const std::array<double, 1> u0{from_box(start.hm, pm.lo, pm.hi)};
            nelder_mead<1>(
                [&](const std::array<double, 1>& u) { return score(to_box(u[0], pm.lo, pm.hi), pf.lo); },
                u0, {step_for(u0[0])}, opt);
        } else if (free_f) {
            const std::array<double, 1> u0{from_box(start.hf, pf.lo, pf.hi)};
            nelder_mead<1>(
                [&](const std::array<double, 1>& u) { return score(pm.lo, to_box(u[0], pf.lo, pf.hi)); },
                u0, {step_for(u0[0])}, opt);
        }
    }

    // Search along e_f = e_m, where the restricted optimum sits whenever the
    // norm constraint binds. The wife's hours follow from inverting her
    // earnings schedule.
    void search_equal_earnings(const Combo& c) {
        const Piece& pm = c.pm;
        const Piece& pf = c.pf;
        if (pm.fixed() || pf.fixed()) return;
        const double e_lo = std::max(pm.earn(pm.lo), pf.earn(pf.lo));
        const double e_hi = std::min(pm.earn(pm.hi), pf.earn(pf.hi));
        if (!(e_hi > e_lo)) return;
        const double lo = std::clamp(pm.hours_for(e_lo), pm.lo, pm.hi);
        const double hi = std::clamp(pm.hours_for(e_hi), pm.lo, pm.hi);
        if (!(hi > lo)) return;

        auto at = [&](double hm) {
            const double hf = std::clamp(pf.hours_for(pm.earn(hm)), pf.lo, pf.hi);
            return evaluate(hm, hf, pm, pf, true).value;
        };
        const int n = settings_.grid_points;
        double best_h = lo;
        double best_v = kNegInf;
        for (int i = 0; i < n; ++i) {
            const double h = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
            const double v = at(h);
            if (v > best_v) {
                best_v = v;
                best_h = h;
            }
        }
        if (best_v == kNegInf) return;
        const std::array<double, 1> u0{from_box(best_h, lo, hi)};
        nelder_mead<1>([&](const std::array<double, 1>& u) { return -at(to_box(u[0], lo, hi)); }, u0,
                       {u0[0] > 0.0 ? -0.2 : 0.2}, simplex_options());
    }

    Couple couple_;
    OccupationPair pair_;
    const ModelParams& p_;
    const SolverMode& mode_;
    SolverSettings settings_;
    Evaluator eval_;
    std::vector<Combo> combos_;
    Candidate any_;  // best seen anywhere (penalty not applied)
    Candidate ok_;   // best seen with e_f <= e_m
};

}  // namespace

Allocation solve_allocation(const Couple& couple, OccupationPair pair, const ModelParams& p,
                            const SolverMode& mode, const SolverSettings& s) {
    validate(couple);
    if (mode.outsourcing() && !(mode.price > 0.0))
        throw std::invalid_argument("outsourcing requires a positive price");
    PairSolver solver(couple, pair, p, mode, s);
    return solver.solve();
}

PairGrid<double> choice_probabilities(const PairGrid<double>& u, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    PairGrid<double> prob{};
    double top = kNegInf;
    for (const auto& row : u)
        for (double v : row) top = std::max(top, v);
    if (top == kNegInf) return prob;
    double total = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            const double w = u[i][k] == kNegInf ? 0.0 : std::exp((u[i][k] - top) / eta);
            prob[i][k] = w;
            total += w;
        }
    for (auto& row : prob)
        for (double& v : row) v /= total;
    return prob;
}

CoupleSolution solve_couple(const Couple& couple, const ModelParams& p, const SolverMode& mode,
                            const SolverSettings& s) {
    CoupleSolution sol;
    for (Occupation jm : kOccupations)
        for (Occupation jf : kOccupations) {
            const Allocation a = solve_allocation(couple, {jm, jf}, p, mode, s);
            sol.alloc[index_of(jm)][index_of(jf)] = a;
            sol.u[index_of(jm)][index_of(jf)] = a.u;
        }
    sol.prob = choice_probabilities(sol.u, p.eta());
    return sol;
}

double joint_utility(const Couple& couple, OccupationPair pair, const ModelParams& p,
                     const SolverMode& mode, double h_m, double h_f, double d_m, double d_f,
                     double d_buy) {
    const double em = earnings(h_m, couple.a_m, pair.first, p, mode.flexible());
    const double ef = earnings(h_f, couple.a_f, pair.second, p, mode.flexible());
    const double c = 0.5 * (em + ef - (mode.outsourcing() ? mode.price * d_buy : 0.0));
    const double u = individual_utility(c, h_m + d_m, p) + individual_utility(c, h_f + d_f, p);
    if (u == kNegInf) return u;
    return ef > em ? u - p.delta() : u;
}

}  // namespace couplesim
