#pragma once

// Erlang-A fluid queue  q' = lambda - mu (q ^ c) - theta (q - c)+.
//
// Between impulses the level relaxes exponentially toward xi1 (rate theta) while
// above capacity and toward xi2 (rate mu) while at or below it, so every
// trajectory is a chain of at most two exponential segments.

#include <optional>
#include <vector>

#include "impulseq/core_model.hpp"

namespace impulseq {

/// q(t) = target + coeff * exp(-rate (t - start)) on [start, end].
struct ErlangSegment {
    double start = 0.0;
    double end = 0.0;
    double target = 0.0;
    double rate = 0.0;
    double coeff = 0.0;

    double value_at(double t) const;
    double start_value() const { return target + coeff; }
    double end_value() const { return value_at(end); }
    /// Exact integral of the segment over [start, t], t clamped into the segment.
    double integral_to(double t) const;
    double integral() const { return integral_to(end); }
};

/// First time the trajectory reaches capacity, or never.
struct CrossingTime {
    std::optional<double> value;

    static CrossingTime never() { return {}; }
    static CrossingTime at(double t) { return CrossingTime{t}; }
    bool is_never() const { return !value.has_value(); }
};

/// Time to reach c from q0 under constant rates; 0 when q0 == c.
/// Never when the trajectory stays on its starting side, including the
/// asymptotic approach when lambda == mu c.
CrossingTime capacity_crossing_time(const QueueParams& params, double q0);

/// Closed-form trajectory segments on [t0, t0 + duration] starting from q0 at t0.
/// Linear dynamics yield a single segment; Erlang-A yields one or two.
std::vector<ErlangSegment> flow_path(const QueueParams& params, double q0, double t0, double duration,
                                     Dynamics dynamics = Dynamics::ErlangA);

/// Value of a segment chain at t (t inside the chain's span).
double path_value(const std::vector<ErlangSegment>& path, double t);

/// Exact integral of a segment chain over its whole span.
double path_integral(const std::vector<ErlangSegment>& path);

/// Piecewise closed-form solution of the Erlang-A fluid ODE.
double erlang_solution(const QueueParams& params, double q0, double t);

struct ErlangSteadyBounds {
    SteadyBounds bounds;
    /// False when the closed form assumes a single-regime cycle but the returned
    /// (L, U) straddle c; the numeric oracle should be used instead.
    bool regime_valid = true;
    double rate = 0.0;    // relaxation rate assumed within the cycle
    double target = 0.0;  // attractor assumed within the cycle
};

/// Steady bounds for impulses every `delta` with 0 < m <= 1.
///   lambda <  mu c, FullState:  linear formula at rate mu toward xi2
///   lambda >= mu c, FullState:  U = xi1 (1 - e^{-theta delta}) / (1 - m e^{-theta delta}), L = m U
///   AbandonmentOnly:            U = [xi1 (1 - e) + c (1 - m) e] / (1 - m e), L = (U ^ c) + m (U - c)+
ErlangSteadyBounds erlang_steady_bounds(const QueueParams& params, double m, double delta,
                                        ImpulseMode mode = ImpulseMode::FullState);

}  // namespace impulseq
