#pragma once

// Infinite-server fluid queue  q' = lambda - mu q  with multiplicative impulses.

#include "impulseq/core_model.hpp"

namespace impulseq {

/// One steady inter-impulse cycle of the periodically impulsed linear queue.
struct LinearCycle {
    double post_impulse = 0.0;  // level right after an impulse; the cycle minimum when m < 1
    double pre_impulse = 0.0;   // level right before an impulse; the cycle maximum when m < 1
    double average = 0.0;       // time average over one cycle
};

/// lambda/mu + (q0 - lambda/mu) e^{-mu t}. Throws DomainError for t < 0.
double linear_solution(const QueueParams& params, double q0, double t);

/// Steady pre/post-impulse levels for impulses every `delta`.
/// For m >= 1 the post-impulse level is the upper bound.
/// Throws InstabilityError when m e^{-mu delta} >= 1.
SteadyBounds linear_steady_bounds(const QueueParams& params, double m, double delta);

/// lambda/mu + (L - lambda/mu)(1 - e^{-mu delta})/(mu delta), L the post-impulse level.
double linear_cycle_average(const QueueParams& params, double m, double delta);

LinearCycle linear_cycle(const QueueParams& params, double m, double delta);

namespace detail {

/// Fixed point V of V = xi + (m V - xi) e^{-rate delta}: the steady pre-impulse level
/// of a single-regime cycle relaxing toward `target`.
double steady_pre_impulse(double target, double rate, double m, double delta);

}  // namespace detail

}  // namespace impulseq
