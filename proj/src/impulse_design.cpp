#include "impulseq/impulse_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "impulseq/erlang_fluid.hpp"
#include "impulseq/scalar_search.hpp"

namespace impulseq {

namespace {

constexpr int kScanPoints = 64;
constexpr double kGoldenRelTol = 1e-10;
constexpr double kBoundaryRelTol = 1e-12;

void check_horizon(const QueueParams& params, double q0, double T, double m) {
    validate(params);
    if (!std::isfinite(q0) || q0 < 0.0) throw ParameterError("q0 must be finite and >= 0");
    if (!std::isfinite(T) || T <= 0.0) throw ParameterError("horizon T must be finite and > 0");
    if (!std::isfinite(m) || m <= 0.0) throw ParameterError("impulse multiplier m must be finite and > 0");
}

void check_tau(double T, double tau) {
    if (!(tau >= 0.0 && tau <= T)) throw DomainError("impulse time tau must lie in [0, T]");
}

void check_shrinking(double m) {
    if (m > 1.0) throw ParameterError("impulse design needs a decreasing impulse, 0 < m <= 1");
}

double drift(const QueueParams& params, double q, Dynamics dynamics) {
    if (dynamics == Dynamics::Linear) {
        return params.lambda - params.mu * q;
    }
    return params.lambda - params.mu * std::min(q, params.c) - params.theta * std::max(q - params.c, 0.0);
}

/// Time for target + (v0 - target) e^{-rate t} to reach `level`.
std::optional<double> exponential_hit(double v0, double target, double rate, double level) {
    if (v0 == level) return 0.0;
    if (rate <= 0.0) return std::nullopt;
    const double num = v0 - target;
    const double den = level - target;
    if (num == 0.0 || den == 0.0) return std::nullopt;
    const double ratio = num / den;
    if (ratio < 1.0) return std::nullopt;
    return std::log(ratio) / rate;
}

double clamp_to(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

std::vector<SubInterval> tile(int regime, std::vector<std::pair<int, SolverKind>> pieces,
                              std::vector<double> cuts) {
    // cuts has pieces.size() + 1 entries, non-decreasing; zero-length pieces are dropped.
    std::vector<SubInterval> out;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (cuts[i + 1] > cuts[i]) {
            out.push_back({regime, pieces[i].first, cuts[i], cuts[i + 1], pieces[i].second});
        }
    }
    return out;
}

bool better_candidate(const Candidate& a, const Candidate& b) {
    if (strictly_better(a.J, b.J)) return true;
    if (strictly_better(b.J, a.J)) return false;
    return a.tau < b.tau;
}

}  // namespace

std::string SubInterval::label() const {
    return "I_{" + std::to_string(regime) + "," + std::to_string(piece) + "}";
}

std::string to_string(SolverKind kind) { return kind == SolverKind::Analytic ? "analytic" : "numeric"; }

std::string to_string(Provenance provenance) {
    switch (provenance) {
        case Provenance::Analytic: return "analytic";
        case Provenance::Numeric: return "numeric";
        case Provenance::Endpoint: return "endpoint";
    }
    return "unknown";
}

double average_queue_length(const QueueParams& params, double q0, double T, double tau, double m,
                            Dynamics dynamics) {
    check_horizon(params, q0, T, m);
    check_tau(T, tau);
    const auto before = flow_path(params, q0, 0.0, tau, dynamics);
    const double jumped = m * before.back().end_value();
    const auto after = flow_path(params, jumped, tau, T - tau, dynamics);
    return (path_integral(before) + path_integral(after)) / T;
}

double detail::derivative_unchecked(const QueueParams& params, double q0, double T, double tau, double m,
                                    Dynamics dynamics) {
    check_horizon(params, q0, T, m);
    check_tau(T, tau);
    const auto before = flow_path(params, q0, 0.0, tau, dynamics);
    const double pre = before.back().end_value();
    const double jumped = m * pre;
    const double jumped_rate = m * drift(params, pre, dynamics);  // d(m q(tau-))/dtau
    const auto after = flow_path(params, jumped, tau, T - tau, dynamics);

    // d/dtau of the pre-impulse integral, and the lower-limit term of the post one.
    double total = pre - jumped;

    // First post-impulse piece: q = target + (y(tau) - target) e^{-rate (t - tau)} on [tau, s1].
    const ErlangSegment& first = after.front();
    const double span = first.end - tau;
    const double dcoeff = jumped_rate + first.rate * (jumped - first.target);
    total += first.rate > 0.0 ? dcoeff * -std::expm1(-first.rate * span) / first.rate : dcoeff * span;

    if (after.size() == 2) {
        // Crossing at s1 = tau + t*(y), t*(y) = log((y - target)/(c - target)) / rate.
        // The boundary terms q(s1-) s1' - q(s1+) s1' cancel since both sides equal c.
        const double dcross_dy = 1.0 / (first.rate * (jumped - first.target));
        const double ds1 = 1.0 + dcross_dy * jumped_rate;
        const ErlangSegment& second = after.back();
        total += second.coeff * ds1 * -std::expm1(-second.rate * (T - second.start));
    }
    return total / T;
}

double derivative_average(const QueueParams& params, double q0, double T, double tau, double m,
                          Dynamics dynamics) {
    check_horizon(params, q0, T, m);
    check_tau(T, tau);
    if (dynamics == Dynamics::ErlangA && m <= 1.0) {
        const auto pieces = erlang_subintervals(params, q0, T, m);
        const double tol = kBoundaryRelTol * std::max(1.0, T);
        for (std::size_t i = 1; i < pieces.size(); ++i) {
            if (std::abs(tau - pieces[i].lo) <= tol) {
                throw BoundaryError("tau = " + std::to_string(tau) + " is the boundary between " +
                                    pieces[i - 1].label() + " and " + pieces[i].label());
            }
        }
    }
    return detail::derivative_unchecked(params, q0, T, tau, m, dynamics);
}

std::optional<double> detail::level_hit_time(const QueueParams& params, double q0, double level) {
    if (q0 == level) return 0.0;
    const bool starts_above = q0 > params.c || (q0 == params.c && overloaded(params));
    const auto fp_target = [&](bool above) {
        return above ? fixed_points(params).xi1 : params.lambda / params.mu;
    };
    const auto rate = [&](bool above) { return above ? params.theta : params.mu; };

    if (q0 == params.c) {
        return exponential_hit(q0, fp_target(starts_above), rate(starts_above), level);
    }
    const CrossingTime crossing = capacity_crossing_time(params, q0);
    const double first_end = crossing.is_never() ? std::numeric_limits<double>::infinity() : *crossing.value;
    if (auto hit = exponential_hit(q0, fp_target(starts_above), rate(starts_above), level)) {
        if (*hit <= first_end) return hit;
    }
    if (crossing.is_never()) return std::nullopt;
    if (auto hit = exponential_hit(params.c, fp_target(!starts_above), rate(!starts_above), level)) {
        return first_end + *hit;
    }
    return std::nullopt;
}

std::vector<SubInterval> erlang_subintervals(const QueueParams& params, double q0, double T, double m) {
    check_horizon(params, q0, T, m);
    check_shrinking(m);
    const RegimeCase regime = classify_regime(params, q0);
    const double jump_level = params.c / m;  // pre-impulse level at which m q lands on c
    const auto hit = detail::level_hit_time(params, q0, jump_level);
    const double inf = std::numeric_limits<double>::infinity();

    switch (regime) {
        case RegimeCase::OverStartOverLoad: {
            const double xi1 = fixed_points(params).xi1;
            const double b = clamp_to(hit.value_or(inf), 0.0, T);
            const bool above_at_start = m * q0 > params.c;
            if (q0 > xi1) {
                // Level falls: the post-impulse start is above c on [0, b].
                if (!above_at_start) return {{1, 2, 0.0, T, SolverKind::Numeric}};
                return tile(1, {{1, SolverKind::Analytic}, {2, SolverKind::Numeric}}, {0.0, b, T});
            }
            if (above_at_start) return {{1, 1, 0.0, T, SolverKind::Analytic}};
            return tile(1, {{2, SolverKind::Numeric}, {1, SolverKind::Analytic}}, {0.0, b, T});
        }
        case RegimeCase::UnderStartOverLoad: {
            const double t2 = *capacity_crossing_time(params, q0).value;
            if (T <= t2) return {{2, 5, 0.0, T, SolverKind::Analytic}};
            const double b = hit.value_or(inf);
            if (T > b) {
                return tile(2, {{1, SolverKind::Analytic}, {2, SolverKind::Numeric}, {3, SolverKind::Analytic}},
                            {0.0, t2, b, T});
            }
            return tile(2, {{1, SolverKind::Analytic}, {4, SolverKind::Numeric}}, {0.0, t2, T});
        }
        case RegimeCase::OverStartUnderLoad: {
            const double b = hit ? std::max(*hit, 0.0) : 0.0;
            if (T <= b) return {{3, 4, 0.0, T, SolverKind::Analytic}};
            const CrossingTime t1 = capacity_crossing_time(params, q0);
            const double t1c = clamp_to(t1.value.value_or(inf), b, T);
            return tile(3, {{1, SolverKind::Analytic}, {2, SolverKind::Numeric}, {3, SolverKind::Analytic}},
                        {0.0, b, t1c, T});
        }
        case RegimeCase::UnderStartUnderLoad:
            return {{4, 1, 0.0, T, SolverKind::Analytic}};
    }
    return {};
}

std::optional<double> analytic_candidate(const QueueParams& params, double q0, double T, double m,
                                         const SubInterval& piece) {
    (void)m;
    if (piece.solver != SolverKind::Analytic) return std::nullopt;
    const auto interior_optimum = [&](double start_level, double start_time, double target, double rate) {
        // Root of (1-m)(q_s - xi) e^{-rate (tau - s)} + (1-m) xi e^{-rate (T - tau)}.
        if (start_level > target) return start_time;
        return (T + start_time) / 2.0 + std::log1p(-start_level / target) / (2.0 * rate);
    };
    switch (piece.regime * 10 + piece.piece) {
        case 11: return interior_optimum(q0, 0.0, fixed_points(params).xi1, params.theta);
        case 21: return *capacity_crossing_time(params, q0).value;
        case 23: {
            const double t2 = *capacity_crossing_time(params, q0).value;
            return interior_optimum(params.c, t2, fixed_points(params).xi1, params.theta);
        }
        case 25:
        case 41: return interior_optimum(q0, 0.0, params.lambda / params.mu, params.mu);
        case 31:
        case 34: return 0.0;
        case 33: return *capacity_crossing_time(params, q0).value;
        default: return std::nullopt;
    }
}

Candidate detail::numeric_minimum(const QueueParams& params, double q0, double T, double m, Dynamics dynamics,
                                  double lo, double hi, const std::string& label) {
    const auto J = [&](double tau) { return average_queue_length(params, q0, T, tau, m, dynamics); };
    const ScalarMinimum coarse = scan_then_golden(J, lo, hi, kScanPoints, kGoldenRelTol * T);
    Candidate best{label, coarse.x, coarse.value, Provenance::Numeric};

    // Golden section resolves tau only to ~sqrt(eps); a sign change of the exact
    // derivative around the result pins it down further.
    const double width = (hi - lo) / (kScanPoints - 1);
    const double a = std::max(lo, coarse.x - width);
    const double b = std::min(hi, coarse.x + width);
    if (b > a) {
        const auto dJ = [&](double tau) { return derivative_unchecked(params, q0, T, tau, m, dynamics); };
        if (auto root = bisect_root(dJ, a, b, 1e-15 * std::max(1.0, T))) {
            const double value = J(*root);
            if (!strictly_better(best.J, value)) {
                best.tau = *root;
                best.J = value;
            }
        }
    }
    return best;
}

OptimalTimes linear_optimal_times(const QueueParams& params, double q0, double T, double m) {
    check_horizon(params, q0, T, m);
    check_shrinking(m);
    const double xi = params.lambda / params.mu;
    double tau = 0.0;
    if (q0 < xi) {
        tau = clamp_to(T / 2.0 + std::log1p(-q0 / xi) / (2.0 * params.mu), 0.0, T);
    }
    const auto J = [&](double t) { return average_queue_length(params, q0, T, t, m, Dynamics::Linear); };

    OptimalTimes out;
    out.candidates = {{"linear", tau, J(tau), Provenance::Analytic},
                      {"linear", 0.0, J(0.0), Provenance::Endpoint},
                      {"linear", T, J(T), Provenance::Endpoint}};
    const Candidate* best = &out.candidates.front();
    for (const auto& cand : out.candidates) {
        if (better_candidate(cand, *best)) best = &cand;
    }
    out.tau_min = best->tau;
    out.J_min = best->J;
    out.tau_max = T;
    out.J_max = J(T);
    return out;
}

OptimalTimes erlang_optimal_times(const QueueParams& params, double q0, double T, double m) {
    const auto pieces = erlang_subintervals(params, q0, T, m);
    const auto J = [&](double t) { return average_queue_length(params, q0, T, t, m, Dynamics::ErlangA); };

    OptimalTimes out;
    for (const auto& piece : pieces) {
        const std::string label = piece.label();
        out.candidates.push_back({label, piece.lo, J(piece.lo), Provenance::Endpoint});
        if (const auto formula = analytic_candidate(params, q0, T, m, piece)) {
            const double tau = clamp_to(*formula, piece.lo, piece.hi);
            out.candidates.push_back({label, tau, J(tau), Provenance::Analytic});
        }
        out.candidates.push_back(
            detail::numeric_minimum(params, q0, T, m, Dynamics::ErlangA, piece.lo, piece.hi, label));
    }
    out.candidates.push_back({pieces.back().label(), T, J(T), Provenance::Endpoint});

    const Candidate* best = &out.candidates.front();
    for (const auto& cand : out.candidates) {
        if (better_candidate(cand, *best)) best = &cand;
    }
    out.tau_min = best->tau;
    out.J_min = best->J;
    out.tau_max = T;
    out.J_max = J(T);
    return out;
}

}  // namespace impulseq
