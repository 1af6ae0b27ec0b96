#pragma once

// Adaptive Runge-Kutta reference solutions with impulse events.
//
// Independent of the closed forms: the right-hand side is integrated with a
// Dormand-Prince 5(4) dense-output stepper, capacity crossings are located by
// bisection on the dense output and the step is restarted there.

#include <cstddef>
#include <vector>

#include "impulseq/core_model.hpp"

namespace impulseq {

struct OracleConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double min_density = 1000.0;  // samples per unit time
    std::size_t max_steps = 50'000'000;
};

struct Sample {
    double t = 0.0;
    double q = 0.0;
};

enum class BreakpointKind { Impulse, CapacityCrossing };

struct Breakpoint {
    double t = 0.0;
    BreakpointKind kind = BreakpointKind::Impulse;
};

/// Samples are ordered by time; an impulse time appears twice (pre, then post).
struct Trajectory {
    std::vector<Sample> samples;
    std::vector<Breakpoint> breakpoints;
};

std::string to_string(BreakpointKind kind);

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, Trajectory partial) : Error(what), partial_(std::move(partial)) {}

    const Trajectory& partial() const noexcept { return partial_; }

private:
    Trajectory partial_;
};

struct CycleLevels {
    double pre = 0.0;
    double post = 0.0;
};

/// The periodic integration had not settled after the requested number of cycles.
class CycleConvergenceError : public ConvergenceError {
public:
    CycleConvergenceError(const std::string& what, CycleLevels previous, CycleLevels last)
        : ConvergenceError(what, last.pre, last.post), previous_(previous), last_(last) {}

    CycleLevels previous() const noexcept { return previous_; }
    CycleLevels last() const noexcept { return last_; }

private:
    CycleLevels previous_;
    CycleLevels last_;
};

struct OracleCycle {
    SteadyBounds bounds;
    CycleLevels levels;    // final cycle
    double average = 0.0;  // trapezoid average over the final cycle
    Trajectory trajectory;
};

struct GridMinimum {
    double tau = 0.0;
    double J = 0.0;
};

/// Integrates [0, horizon] from q0, applying every scheduled impulse with t <= horizon.
Trajectory integrate_impulsive(const QueueParams& params, double q0, const ImpulseSpec& impulses, double horizon,
                               const OracleConfig& cfg = {}, Dynamics dynamics = Dynamics::ErlangA);

/// Trapezoid average over [from, to], linear interpolation at the window ends.
double trajectory_average(const Trajectory& traj, double from, double to);

/// Runs n_cycles periods of length delta from q0 and reads the last one.
/// Throws CycleConvergenceError if the last two cycles differ by more than
/// abs_tol + 100 rel_tol |level|.
OracleCycle steady_cycle_bounds(const QueueParams& params, double m, double delta, ImpulseMode mode, int n_cycles,
                                Dynamics dynamics, const OracleConfig& cfg = {}, double q0 = 0.0);

/// Uniform grid over [0, T] (endpoints included), then golden-section refinement
/// between the neighbours of the best grid point. Ties go to the smallest tau.
GridMinimum grid_minimize_impulse_time(const QueueParams& params, double q0, double T, double m, int n_grid,
                                       Dynamics dynamics);

}  // namespace impulseq
