#include "impulseq/erlang_fluid.hpp"

#include <algorithm>
#include <cmath>

#include "impulseq/linear_fluid.hpp"

namespace impulseq {

double ErlangSegment::value_at(double t) const {
    return target + coeff * std::exp(-rate * (t - start));
}

double ErlangSegment::integral_to(double t) const {
    const double d = std::clamp(t, start, end) - start;
    if (d <= 0.0) {
        return 0.0;
    }
    if (rate == 0.0) {
        return (target + coeff) * d;
    }
    return target * d + coeff * -std::expm1(-rate * d) / rate;
}

CrossingTime capacity_crossing_time(const QueueParams& params, double q0) {
    validate(params);
    if (!std::isfinite(q0) || q0 < 0.0) {
        throw ParameterError("q0 must be finite and >= 0");
    }
    if (q0 == params.c) {
        return CrossingTime::at(0.0);
    }
    const double slack = params.mu * params.c - params.lambda;  // > 0 when underloaded
    if (q0 > params.c) {
        if (slack <= 0.0) {
            return CrossingTime::never();
        }
        if (params.theta == 0.0) {
            // Linear drift at rate (lambda - mu c) above capacity.
            return CrossingTime::at((q0 - params.c) / slack);
        }
        // log((theta q0 - lambda + mu c - theta c) / (mu c - lambda)) / theta
        const double arg = params.theta * (q0 - params.c) / slack;
        return CrossingTime::at(std::log1p(arg) / params.theta);
    }
    if (slack >= 0.0) {
        return CrossingTime::never();
    }
    // log((q0 - lambda/mu) / (c - lambda/mu)) / mu
    const double arg = params.mu * (params.c - q0) / -slack;
    return CrossingTime::at(std::log1p(arg) / params.mu);
}

namespace {

ErlangSegment above_segment(const QueueParams& params, double q0, double start, double end) {
    if (params.theta > 0.0) {
        const double xi1 = fixed_points(params).xi1;
        return {start, end, xi1, params.theta, q0 - xi1};
    }
    if (params.lambda == params.mu * params.c) {
        return {start, end, q0, 0.0, 0.0};
    }
    throw ParameterError("theta must be > 0 while the trajectory lies above capacity");
}

ErlangSegment below_segment(const QueueParams& params, double q0, double start, double end) {
    const double xi2 = params.lambda / params.mu;
    return {start, end, xi2, params.mu, q0 - xi2};
}

}  // namespace

std::vector<ErlangSegment> flow_path(const QueueParams& params, double q0, double t0, double duration,
                                     Dynamics dynamics) {
    validate(params);
    if (!(duration >= 0.0)) {
        throw DomainError("path duration must be >= 0");
    }
    if (!std::isfinite(q0) || q0 < 0.0) {
        throw ParameterError("initial level must be finite and >= 0");
    }
    const double t_end = t0 + duration;
    if (dynamics == Dynamics::Linear) {
        return {below_segment(params, q0, t0, t_end)};
    }

    // At capacity the side is decided by where the flow goes next.
    const bool starts_above = q0 > params.c || (q0 == params.c && overloaded(params));
    if (q0 == params.c) {
        return {starts_above ? above_segment(params, q0, t0, t_end) : below_segment(params, q0, t0, t_end)};
    }

    const CrossingTime crossing = capacity_crossing_time(params, q0);
    if (crossing.is_never() || *crossing.value >= duration) {
        return {starts_above ? above_segment(params, q0, t0, t_end) : below_segment(params, q0, t0, t_end)};
    }
    if (starts_above && params.theta == 0.0) {
        throw ParameterError("theta must be > 0 while the trajectory lies above capacity");
    }
    const double t_cross = t0 + *crossing.value;
    if (starts_above) {
        return {above_segment(params, q0, t0, t_cross), below_segment(params, params.c, t_cross, t_end)};
    }
    return {below_segment(params, q0, t0, t_cross), above_segment(params, params.c, t_cross, t_end)};
}

double path_value(const std::vector<ErlangSegment>& path, double t) {
    for (const auto& seg : path) {
        if (t <= seg.end) {
            return seg.value_at(t);
        }
    }
    return path.back().value_at(t);
}

double path_integral(const std::vector<ErlangSegment>& path) {
    double total = 0.0;
    for (const auto& seg : path) {
        total += seg.integral();
    }
    return total;
}

double erlang_solution(const QueueParams& params, double q0, double t) {
    if (!(t >= 0.0)) {
        throw DomainError("time must be >= 0");
    }
    return flow_path(params, q0, 0.0, t).back().end_value();
}

ErlangSteadyBounds erlang_steady_bounds(const QueueParams& params, double m, double delta, ImpulseMode mode) {
    validate(params);
    if (!std::isfinite(m) || m <= 0.0 || m > 1.0) {
        throw ParameterError("erlang steady bounds need a decreasing impulse, 0 < m <= 1");
    }
    if (!std::isfinite(delta) || delta <= 0.0) {
        throw ParameterError("impulse spacing delta must be finite and > 0");
    }

    ErlangSteadyBounds out;
    if (mode == ImpulseMode::FullState && !overloaded(params) && params.lambda != params.mu * params.c) {
        // Cycle lives below xi2 < c.
        out.target = params.lambda / params.mu;
        out.rate = params.mu;
        const double upper = detail::steady_pre_impulse(out.target, out.rate, m, delta);
        out.bounds = {m * upper, upper, upper - m * upper};
        out.regime_valid = upper <= params.c;
        return out;
    }

    if (params.theta <= 0.0) {
        throw UndefinedFixedPointError("theta must be > 0 for above-capacity steady bounds");
    }
    out.target = fixed_points(params).xi1;
    out.rate = params.theta;
    const double decay = std::exp(-params.theta * delta);
    if (!(m * decay < 1.0)) {
        throw InstabilityError("m * exp(-theta * delta) >= 1: no stable impulsive cycle");
    }

    if (mode == ImpulseMode::FullState) {
        const double upper = detail::steady_pre_impulse(out.target, out.rate, m, delta);
        const double lower = m * upper;
        out.bounds = {lower, upper, upper - lower};
        out.regime_valid = lower >= params.c;
        return out;
    }

    const double upper =
        (out.target * -std::expm1(-params.theta * delta) + params.c * (1.0 - m) * decay) / (1.0 - m * decay);
    const double lower = apply_impulse(upper, m, ImpulseMode::AbandonmentOnly, params.c);
    out.bounds = {lower, upper, upper - lower};
    out.regime_valid = upper > params.c;
    return out;
}

}  // namespace impulseq
