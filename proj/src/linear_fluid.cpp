#include "impulseq/linear_fluid.hpp"

#include <algorithm>
#include <cmath>

namespace impulseq {

namespace {

void check_cycle_args(double m, double delta) {
    if (!std::isfinite(m) || m <= 0.0) {
        throw ParameterError("impulse multiplier m must be finite and > 0");
    }
    if (!std::isfinite(delta) || delta <= 0.0) {
        throw ParameterError("impulse spacing delta must be finite and > 0");
    }
}

}  // namespace

double detail::steady_pre_impulse(double target, double rate, double m, double delta) {
    const double decay = std::exp(-rate * delta);
    if (!(m * decay < 1.0)) {
        throw InstabilityError("m * exp(-rate * delta) >= 1: no stable impulsive cycle");
    }
    // 1 - e^{-rate delta} via expm1 keeps precision for short cycles.
    return target * -std::expm1(-rate * delta) / (1.0 - m * decay);
}

double linear_solution(const QueueParams& params, double q0, double t) {
    validate(params);
    if (!(t >= 0.0)) {
        throw DomainError("time must be >= 0");
    }
    const double xi = params.lambda / params.mu;
    return xi + (q0 - xi) * std::exp(-params.mu * t);
}

SteadyBounds linear_steady_bounds(const QueueParams& params, double m, double delta) {
    validate(params);
    check_cycle_args(m, delta);
    const double pre = detail::steady_pre_impulse(params.lambda / params.mu, params.mu, m, delta);
    const double post = m * pre;
    SteadyBounds bounds;
    bounds.lower = std::min(pre, post);
    bounds.upper = std::max(pre, post);
    bounds.amplitude = bounds.upper - bounds.lower;
    return bounds;
}

LinearCycle linear_cycle(const QueueParams& params, double m, double delta) {
    validate(params);
    check_cycle_args(m, delta);
    const double xi = params.lambda / params.mu;
    const double rd = params.mu * delta;
    LinearCycle cycle;
    cycle.pre_impulse = detail::steady_pre_impulse(xi, params.mu, m, delta);
    cycle.post_impulse = m * cycle.pre_impulse;
    cycle.average = xi + (cycle.post_impulse - xi) * -std::expm1(-rd) / rd;
    return cycle;
}

double linear_cycle_average(const QueueParams& params, double m, double delta) {
    return linear_cycle(params, m, delta).average;
}

}  // namespace impulseq
