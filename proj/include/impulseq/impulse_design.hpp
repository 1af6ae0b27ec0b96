#pragma once

// Single-impulse timing on a finite horizon [0, T].
//
// J(tau) is the time-average level over [0, T] when one impulse q -> m q is
// applied at tau. Every trajectory piece is exponential, so J and dJ/dtau are
// evaluated exactly from the segment chains in erlang_fluid.hpp.

#include <optional>
#include <string>
#include <vector>

#include "impulseq/core_model.hpp"

namespace impulseq {

enum class SolverKind { Analytic, Numeric };

/// One piece I_{i,j} of the impulse-time axis. Within a piece the configuration
/// of the pre- and post-impulse trajectories (which side of c, whether a
/// capacity crossing happens) does not change.
struct SubInterval {
    int regime = 0;  // i: 1..4, the RegimeCase in declaration order
    int piece = 0;   // j
    double lo = 0.0;
    double hi = 0.0;
    SolverKind solver = SolverKind::Numeric;

    std::string label() const;
};

enum class Provenance { Analytic, Numeric, Endpoint };

struct Candidate {
    std::string label;
    double tau = 0.0;
    double J = 0.0;
    Provenance provenance = Provenance::Numeric;
};

struct OptimalTimes {
    double tau_min = 0.0;
    double tau_max = 0.0;
    double J_min = 0.0;
    double J_max = 0.0;
    std::vector<Candidate> candidates;
};

std::string to_string(SolverKind kind);
std::string to_string(Provenance provenance);

/// J(tau) by exact integration of every exponential piece.
double average_queue_length(const QueueParams& params, double q0, double T, double tau, double m,
                            Dynamics dynamics);

/// dJ/dtau by the Leibniz rule over the active piece configuration, including the
/// sensitivity of a post-impulse capacity crossing time to tau.
/// Throws BoundaryError when tau sits on an interior sub-interval boundary.
double derivative_average(const QueueParams& params, double q0, double T, double tau, double m,
                          Dynamics dynamics);

/// Tiling of [0, T] into the pieces of the Erlang-A impulse-timing problem (0 < m <= 1).
std::vector<SubInterval> erlang_subintervals(const QueueParams& params, double q0, double T, double m);

/// Closed-form minimizer attached to an Analytic piece, before clamping. nullopt for Numeric pieces.
std::optional<double> analytic_candidate(const QueueParams& params, double q0, double T, double m,
                                         const SubInterval& piece);

OptimalTimes linear_optimal_times(const QueueParams& params, double q0, double T, double m);

/// Global minimizer over every piece (analytic formulas verified by a numeric
/// search on the same piece, numeric searches on the rest, and all piece
/// endpoints); the maximizer is always T.
OptimalTimes erlang_optimal_times(const QueueParams& params, double q0, double T, double m);

namespace detail {

/// dJ/dtau without the boundary check.
double derivative_unchecked(const QueueParams& params, double q0, double T, double tau, double m,
                            Dynamics dynamics);

/// First time the impulse-free trajectory from q0 reaches `level`; nullopt if never.
std::optional<double> level_hit_time(const QueueParams& params, double q0, double level);

/// Scan + golden-section on [lo, hi], then bisection on a derivative sign change
/// around the result. Ties resolve to the smallest tau.
Candidate numeric_minimum(const QueueParams& params, double q0, double T, double m, Dynamics dynamics,
                          double lo, double hi, const std::string& label);

}  // namespace detail

}  // namespace impulseq
