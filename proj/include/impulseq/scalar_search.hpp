#pragma once

// Bracketed 1-D minimization and root finding.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "impulseq/core_model.hpp"

namespace impulseq {

struct ScalarMinimum {
    double x = 0.0;
    double value = 0.0;
    int evaluations = 0;
};

/// Relative tolerance under which two objective values count as tied.
inline constexpr double kTieTolerance = 1e-12;

/// True when `candidate` beats `incumbent` by more than the tie tolerance.
inline bool strictly_better(double candidate, double incumbent) {
    const double scale = std::max({1.0, std::abs(candidate), std::abs(incumbent)});
    return candidate < incumbent - kTieTolerance * scale;
}

/// Golden-section search on [a, b]. Returns the best point evaluated; ties keep
/// the smaller x. Throws ConvergenceError (carrying the best point so far) if the
/// bracket has not shrunk below `x_tol` within `max_iter` iterations.
template <class F>
ScalarMinimum golden_section_minimize(F&& f, double a, double b, double x_tol, int max_iter = 300) {
    static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    ScalarMinimum best{a, f(a), 1};
    auto consider = [&best](double x, double v) {
        if (strictly_better(v, best.value) || (!strictly_better(best.value, v) && x < best.x)) {
            best.x = x;
            best.value = v;
        }
    };
    {
        const double fb = f(b);
        ++best.evaluations;
        consider(b, fb);
    }
    if (b - a <= x_tol) {
        return best;
    }
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    best.evaluations += 2;
    consider(x1, f1);
    consider(x2, f2);
    for (int iter = 0; iter < max_iter; ++iter) {
        if (b - a <= x_tol) {
            return best;
        }
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
            consider(x1, f1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
            consider(x2, f2);
        }
        ++best.evaluations;
    }
    if (b - a <= x_tol) {
        return best;
    }
    throw ConvergenceError("golden-section search did not converge within " + std::to_string(max_iter) +
                               " iterations",
                           best.x, best.value);
}

/// Uniform scan of `n_scan` points over [a, b], then golden-section refinement
/// around the best scan point. Deterministic; ties resolve to the smallest x.
template <class F>
ScalarMinimum scan_then_golden(F&& f, double a, double b, int n_scan, double x_tol, int max_iter = 300) {
    n_scan = std::max(n_scan, 2);
    ScalarMinimum best{a, f(a), 1};
    int best_index = 0;
    const double width = b - a;
    for (int i = 1; i < n_scan; ++i) {
        const double x = (i == n_scan - 1) ? b : a + width * static_cast<double>(i) / (n_scan - 1);
        const double v = f(x);
        ++best.evaluations;
        if (strictly_better(v, best.value)) {
            best = {x, v, best.evaluations};
            best_index = i;
        }
    }
    if (width <= 0.0) {
        return best;
    }
    const auto grid_point = [&](int i) {
        if (i <= 0) return a;
        if (i >= n_scan - 1) return b;
        return a + width * static_cast<double>(i) / (n_scan - 1);
    };
    const double lo = grid_point(best_index - 1);
    const double hi = grid_point(best_index + 1);
    const ScalarMinimum refined = golden_section_minimize(f, lo, hi, x_tol, max_iter);
    const int evaluations = best.evaluations + refined.evaluations;
    if (strictly_better(refined.value, best.value)) {
        best = refined;
    }
    best.evaluations = evaluations;
    return best;
}

/// Bisection on a sign change of g over [a, b]; nullopt when g(a), g(b) share a sign.
template <class G>
std::optional<double> bisect_root(G&& g, double a, double b, double x_tol, int max_iter = 200) {
    double ga = g(a);
    const double gb = g(b);
    if (ga == 0.0) return a;
    if (gb == 0.0) return b;
    if ((ga < 0.0) == (gb < 0.0)) {
        return std::nullopt;
    }
    for (int iter = 0; iter < max_iter && b - a > x_tol; ++iter) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) {
            break;
        }
        const double gm = g(mid);
        if (gm == 0.0) {
            return mid;
        }
        if ((gm < 0.0) == (ga < 0.0)) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace impulseq
