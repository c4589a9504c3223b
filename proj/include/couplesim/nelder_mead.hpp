#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace couplesim {

// Derivative-free simplex minimizer.
//
// Non-finite objective values are treated as +inf, so callers can encode
// infeasible regions by returning +inf (or NaN).
struct SimplexOptions {
    double ftol = 1e-10;   // spread of function values across the simplex
    double xtol = 1e-10;   // max distance of any vertex from the best vertex
    int max_evals = 2000;
};

template <class Point>
struct SimplexResultT {
    Point x{};
    double f = std::numeric_limits<double>::infinity();
    int evals = 0;
    bool converged = false;
};

template <std::size_t N>
using SimplexResult = SimplexResultT<std::array<double, N>>;

// Works for std::array<double, N> (fixed, allocation-light) and
// std::vector<double> (dimension chosen at run time).
template <class Point, class F>
SimplexResultT<Point> simplex_minimize(F&& f, const Point& start, const Point& step,
                                       const SimplexOptions& opt = {}) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const std::size_t N = start.size();
    SimplexResultT<Point> res;

    auto eval = [&](const Point& x) {
        ++res.evals;
        const double v = f(x);
        return std::isfinite(v) ? v : kInf;
    };

    std::vector<Point> pts(N + 1, start);
    std::vector<double> fv(N + 1);
    fv[0] = eval(start);
    for (std::size_t i = 0; i < N; ++i) {
        pts[i + 1][i] += step[i];
        fv[i + 1] = eval(pts[i + 1]);
    }

    std::vector<std::size_t> order(N + 1);
    std::vector<Point> p2(N + 1, start);
    std::vector<double> f2(N + 1);
    auto sort_vertices = [&] {
        for (std::size_t i = 0; i <= N; ++i) order[i] = i;
        // stable so ties resolve by vertex index, keeping runs reproducible
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        for (std::size_t i = 0; i <= N; ++i) {
            p2[i] = pts[order[i]];
            f2[i] = fv[order[i]];
        }
        pts.swap(p2);
        fv.swap(f2);
    };

    auto affine = [N](const Point& c, const Point& w, double t) {
        Point out = c;
        for (std::size_t i = 0; i < N; ++i) out[i] = c[i] + t * (w[i] - c[i]);
        return out;
    };

    Point centroid = start;
    while (true) {
        sort_vertices();
        double xspread = 0.0;
        for (std::size_t k = 1; k <= N; ++k)
            for (std::size_t i = 0; i < N; ++i)
                xspread = std::max(xspread, std::abs(pts[k][i] - pts[0][i]));
        const double fspread = fv[N] - fv[0];
        if (std::isfinite(fv[N]) && fspread <= opt.ftol && xspread <= opt.xtol) {
            res.converged = true;
            break;
        }
        if (xspread <= opt.xtol * 1e-3) {
            // collapsed simplex; nothing further to gain
            res.converged = std::isfinite(fv[0]);
            break;
        }
        if (res.evals >= opt.max_evals) break;

        for (std::size_t i = 0; i < N; ++i) centroid[i] = 0.0;
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t i = 0; i < N; ++i) centroid[i] += pts[k][i] / static_cast<double>(N);

        const Point xr = affine(centroid, pts[N], -1.0);
        const double fr = eval(xr);
        if (fr < fv[0]) {
            const Point xe = affine(centroid, pts[N], -2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[N] = xe;
                fv[N] = fe;
            } else {
                pts[N] = xr;
                fv[N] = fr;
            }
            continue;
        }
        if (fr < fv[N - 1]) {
            pts[N] = xr;
            fv[N] = fr;
            continue;
        }
        if (fr < fv[N]) {
            const Point xc = affine(centroid, pts[N], -0.5);
            const double fc = eval(xc);
            if (fc <= fr) {
                pts[N] = xc;
                fv[N] = fc;
                continue;
            }
        } else {
            const Point xc = affine(centroid, pts[N], 0.5);
            const double fc = eval(xc);
            if (fc < fv[N]) {
                pts[N] = xc;
                fv[N] = fc;
                continue;
            }
        }
        for (std::size_t k = 1; k <= N; ++k) {
            pts[k] = affine(pts[0], pts[k], 0.5);
            fv[k] = eval(pts[k]);
        }
    }

    res.x = pts[0];
    res.f = fv[0];
    return res;
}

template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F&& f, const std::array<double, N>& start,
                             const std::array<double, N>& step,
                             const SimplexOptions& opt = {}) {
    return simplex_minimize(std::forward<F>(f), start, step, opt);
}

}  // namespace couplesim
