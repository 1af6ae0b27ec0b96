#include "impulseq/numeric_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "impulseq/impulse_design.hpp"
#include "impulseq/scalar_search.hpp"

namespace impulseq {

namespace {

namespace odeint = boost::numeric::odeint;

using State = std::array<double, 1>;
using DenseStepper = odeint::dense_output_runge_kutta<odeint::controlled_runge_kutta<odeint::runge_kutta_dopri5<State>>>;

constexpr double kCrossingTimeTol = 1e-12;

// The Erlang-A right-hand side is kinked at c. Each smooth stretch is integrated
// with the branch of its starting side, extended past c, so the stepper never
// sees the kink and the crossing is a root of a smooth dense output.
struct Rhs {
    const QueueParams& params;
    Dynamics dynamics;
    bool above;

    void operator()(const State& x, State& dxdt, double /*t*/) const {
        const double q = x[0];
        if (dynamics == Dynamics::Linear || !above) {
            dxdt[0] = params.lambda - params.mu * q;
        } else {
            dxdt[0] = params.lambda - params.mu * params.c - params.theta * (q - params.c);
        }
    }
};

bool starts_above(const QueueParams& params, double q, Dynamics dynamics) {
    if (dynamics == Dynamics::Linear) return false;
    return q > params.c || (q == params.c && overloaded(params));
}

std::vector<double> impulse_times(const ImpulseSpec& spec, double horizon) {
    std::vector<double> times;
    if (const auto* periodic = std::get_if<Periodic>(&spec.schedule)) {
        const double slack = 1e-12 * horizon;
        for (long k = 1;; ++k) {
            double t = static_cast<double>(k) * periodic->delta;
            if (t > horizon + slack) break;
            times.push_back(std::min(t, horizon));
        }
    } else {
        const double tau = std::get<Single>(spec.schedule).tau;
        if (tau <= horizon) times.push_back(tau);
    }
    return times;
}

void validate(const OracleConfig& cfg) {
    if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) throw ParameterError("oracle tolerances must be > 0");
    if (!(cfg.min_density > 0.0)) throw ParameterError("oracle min_density must be > 0");
    if (cfg.max_steps == 0) throw ParameterError("oracle max_steps must be > 0");
}

class Recorder {
public:
    Recorder(double density) : density_(density) {}

    Trajectory traj;

    void add(double t, double q) { traj.samples.push_back({t, q}); }

    /// Grid samples strictly between the last recorded time and `until`.
    template <class F>
    void fill(double until, F&& value_at) {
        const double last = traj.samples.empty() ? -1.0 : traj.samples.back().t;
        auto k = static_cast<long>(std::floor(last * density_)) + 1;
        for (;; ++k) {
            const double t = static_cast<double>(k) / density_;
            if (t >= until) break;
            if (t > last) add(t, value_at(t));
        }
    }

private:
    double density_;
};

}  // namespace

std::string to_string(BreakpointKind kind) {
    return kind == BreakpointKind::Impulse ? "impulse" : "capacity_crossing";
}

Trajectory integrate_impulsive(const QueueParams& params, double q0, const ImpulseSpec& impulses, double horizon,
                               const OracleConfig& cfg, Dynamics dynamics) {
    validate(params);
    validate(impulses);
    validate(cfg);
    if (!std::isfinite(q0) || q0 < 0.0) throw ParameterError("q0 must be finite and >= 0");
    if (!std::isfinite(horizon) || horizon <= 0.0) throw DomainError("horizon must be finite and > 0");

    const std::vector<double> events = impulse_times(impulses, horizon);
    std::size_t next_event = 0;

    Recorder rec(cfg.min_density);
    double t = 0.0;
    State x{q0};
    bool above = starts_above(params, q0, dynamics);
    rec.add(t, q0);

    DenseStepper stepper = odeint::make_dense_output(cfg.abs_tol, cfg.rel_tol, odeint::runge_kutta_dopri5<State>());
    double dt = std::min(1.0 / cfg.min_density, horizon);

    const auto apply_due_impulse = [&]() {
        if (next_event < events.size() && events[next_event] == t) {
            const double post = apply_impulse(x[0], impulses.m, impulses.mode, params.c);
            rec.add(t, post);
            rec.traj.breakpoints.push_back({t, BreakpointKind::Impulse});
            x[0] = post;
            above = starts_above(params, post, dynamics);
            ++next_event;
            return true;
        }
        return false;
    };

    while (apply_due_impulse()) {
    }
    stepper.initialize(x, t, dt);

    std::size_t steps = 0;
    while (t < horizon) {
        if (steps >= cfg.max_steps) {
            throw IntegrationError("maximum number of integration steps exceeded at t = " + std::to_string(t),
                                   std::move(rec.traj));
        }
        const Rhs rhs{params, dynamics, above};
        const auto [t0, t1] = stepper.do_step(rhs);
        ++steps;
        dt = stepper.current_time_step();

        double stop = std::min(t1, horizon);
        if (next_event < events.size()) stop = std::min(stop, events[next_event]);
        const auto value_at = [&](double s) {
            if (s == t1) return stepper.current_state()[0];
            State out;
            stepper.calc_state(s, out);
            return out[0];
        };
        double q_stop = value_at(stop);

        if (dynamics == Dynamics::ErlangA) {
            const bool crossed = above ? q_stop < params.c : q_stop > params.c;
            if (crossed) {
                const auto gap = [&](double s) { return value_at(s) - params.c; };
                const double t_cross = bisect_root(gap, t0, stop, kCrossingTimeTol, 400).value_or(stop);
                rec.fill(t_cross, value_at);
                const double q_cross = value_at(t_cross);
                if (t_cross > rec.traj.samples.back().t) rec.add(t_cross, q_cross);
                rec.traj.breakpoints.push_back({t_cross, BreakpointKind::CapacityCrossing});
                t = t_cross;
                x[0] = q_cross;
                above = !above;
                stepper.initialize(x, t, dt);
                continue;
            }
        }

        rec.fill(stop, value_at);
        if (stop > rec.traj.samples.back().t) rec.add(stop, q_stop);
        t = stop;
        x[0] = q_stop;
        if (apply_due_impulse()) {
            while (apply_due_impulse()) {
            }
            stepper.initialize(x, t, dt);
        } else if (stop < t1 && t < horizon) {
            stepper.initialize(x, t, dt);
        }
    }
    return std::move(rec.traj);
}

double trajectory_average(const Trajectory& traj, double from, double to) {
    if (!(to > from)) throw DomainError("averaging window must have positive width");
    const auto& s = traj.samples;
    if (s.empty() || from < s.front().t || to > s.back().t) {
        throw DomainError("averaging window lies outside the trajectory span");
    }
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const Sample& a = s[i];
        const Sample& b = s[i + 1];
        const double lo = std::max(a.t, from);
        const double hi = std::min(b.t, to);
        if (!(hi > lo)) continue;
        const auto interp = [&](double t) { return a.q + (b.q - a.q) * (t - a.t) / (b.t - a.t); };
        area += 0.5 * (interp(lo) + interp(hi)) * (hi - lo);
    }
    return area / (to - from);
}

OracleCycle steady_cycle_bounds(const QueueParams& params, double m, double delta, ImpulseMode mode, int n_cycles,
                                Dynamics dynamics, const OracleConfig& cfg, double q0) {
    if (n_cycles < 2) throw ParameterError("n_cycles must be >= 2");
    if (!std::isfinite(delta) || delta <= 0.0) throw ParameterError("impulse spacing delta must be finite and > 0");

    const ImpulseSpec spec{m, Periodic{delta}, mode};
    const double horizon = static_cast<double>(n_cycles) * delta;
    OracleCycle out;
    out.trajectory = integrate_impulsive(params, q0, spec, horizon, cfg, dynamics);

    std::vector<CycleLevels> cycles;
    const auto& samples = out.trajectory.samples;
    std::size_t i = 0;
    for (const auto& bp : out.trajectory.breakpoints) {
        if (bp.kind != BreakpointKind::Impulse) continue;
        while (i + 1 < samples.size() && !(samples[i].t == bp.t && samples[i + 1].t == bp.t)) ++i;
        cycles.push_back({samples[i].q, samples[i + 1].q});
        i += 2;
    }
    if (cycles.size() < 2) throw ConvergenceError("fewer than two impulse cycles recorded", 0.0, 0.0);

    const CycleLevels prev = cycles[cycles.size() - 2];
    const CycleLevels last = cycles.back();
    const double scale = std::max(std::abs(last.pre), std::abs(last.post));
    const double tol = cfg.abs_tol + 100.0 * cfg.rel_tol * scale;
    if (std::abs(last.pre - prev.pre) > tol || std::abs(last.post - prev.post) > tol) {
        throw CycleConvergenceError("impulsive cycle not settled after " + std::to_string(n_cycles) + " cycles",
                                    prev, last);
    }

    out.levels = last;
    out.bounds.lower = std::min(last.pre, last.post);
    out.bounds.upper = std::max(last.pre, last.post);
    out.bounds.amplitude = out.bounds.upper - out.bounds.lower;
    out.average = trajectory_average(out.trajectory, horizon - delta, horizon);
    return out;
}

GridMinimum grid_minimize_impulse_time(const QueueParams& params, double q0, double T, double m, int n_grid,
                                       Dynamics dynamics) {
    if (n_grid < 16) throw ParameterError("n_grid must be >= 16");
    const auto J = [&](double tau) { return average_queue_length(params, q0, T, tau, m, dynamics); };
    const ScalarMinimum best = scan_then_golden(J, 0.0, T, n_grid, 1e-12 * T);
    return {best.x, best.value};
}

}  // namespace impulseq
