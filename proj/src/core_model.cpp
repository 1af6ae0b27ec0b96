#include "impulseq/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace impulseq {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw ParameterError(message);
    }
}

}  // namespace

void validate(const QueueParams& params) {
    require(std::isfinite(params.lambda) && params.lambda > 0.0, "lambda must be finite and > 0");
    require(std::isfinite(params.mu) && params.mu > 0.0, "mu must be finite and > 0");
    require(std::isfinite(params.theta) && params.theta >= 0.0, "theta must be finite and >= 0");
    require(std::isfinite(params.c) && params.c > 0.0, "c must be finite and > 0");
}

void validate(const ImpulseSpec& spec) {
    require(std::isfinite(spec.m) && spec.m > 0.0, "impulse multiplier m must be finite and > 0");
    if (const auto* periodic = std::get_if<Periodic>(&spec.schedule)) {
        require(std::isfinite(periodic->delta) && periodic->delta > 0.0,
                "impulse spacing delta must be finite and > 0");
    } else {
        const auto& single = std::get<Single>(spec.schedule);
        require(std::isfinite(single.tau) && single.tau >= 0.0, "impulse time tau must be finite and >= 0");
    }
}

bool overloaded(const QueueParams& params) noexcept {
    return params.lambda > params.mu * params.c;
}

RegimeCase classify_regime(const QueueParams& params, double q0) {
    validate(params);
    require(std::isfinite(q0) && q0 >= 0.0, "q0 must be finite and >= 0");
    const bool over_start = q0 > params.c;
    if (overloaded(params)) {
        return over_start ? RegimeCase::OverStartOverLoad : RegimeCase::UnderStartOverLoad;
    }
    return over_start ? RegimeCase::OverStartUnderLoad : RegimeCase::UnderStartUnderLoad;
}

FixedPoints fixed_points(const QueueParams& params) {
    validate(params);
    FixedPoints fp;
    fp.xi2 = params.lambda / params.mu;
    const double excess = params.lambda - params.mu * params.c;
    if (excess == 0.0) {
        fp.xi1 = params.c;
    } else if (params.theta > 0.0) {
        fp.xi1 = params.c + excess / params.theta;
    } else if (excess > 0.0) {
        throw UndefinedFixedPointError("theta == 0 with lambda > mu c: no above-capacity fixed point");
    } else {
        fp.xi1 = -std::numeric_limits<double>::infinity();
    }
    return fp;
}

double apply_impulse(double pre, double m, ImpulseMode mode, double c) noexcept {
    if (mode == ImpulseMode::FullState) {
        return m * pre;
    }
    return std::min(pre, c) + m * std::max(pre - c, 0.0);
}

std::string to_string(RegimeCase regime) {
    switch (regime) {
        case RegimeCase::OverStartOverLoad: return "OverStart_OverLoad";
        case RegimeCase::UnderStartOverLoad: return "UnderStart_OverLoad";
        case RegimeCase::OverStartUnderLoad: return "OverStart_UnderLoad";
        case RegimeCase::UnderStartUnderLoad: return "UnderStart_UnderLoad";
    }
    return "unknown";
}

std::string to_string(ImpulseMode mode) {
    return mode == ImpulseMode::FullState ? "full_state" : "abandonment_only";
}

std::string to_string(Dynamics dynamics) {
    return dynamics == Dynamics::Linear ? "linear" : "erlanga";
}

std::optional<ImpulseMode> parse_impulse_mode(const std::string& text) {
    if (text == "full_state" || text == "FullState") return ImpulseMode::FullState;
    if (text == "abandonment_only" || text == "AbandonmentOnly") return ImpulseMode::AbandonmentOnly;
    return std::nullopt;
}

std::optional<Dynamics> parse_dynamics(const std::string& text) {
    if (text == "linear") return Dynamics::Linear;
    if (text == "erlanga" || text == "erlang-a" || text == "erlang_a") return Dynamics::ErlangA;
    return std::nullopt;
}

}  // namespace impulseq
