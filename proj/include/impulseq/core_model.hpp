#pragma once

// Shared domain types for fluid queues under multiplicative impulses.
//
// Every level is a continuous fluid quantity; every rate is per unit time.
// All types are plain values and every free function here is pure.

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace impulseq {

// -----------------------------------------------------------------------------
// Errors
// -----------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A rate, level or multiplier violates its domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// An argument lies outside the domain of the operation (negative time, empty window).
class DomainError : public Error {
public:
    using Error::Error;
};

/// m * exp(-rate * delta) >= 1: the periodic impulse map has no attracting cycle.
class InstabilityError : public Error {
public:
    using Error::Error;
};

/// theta == 0 with lambda > mu * c: the above-capacity fixed point does not exist.
class UndefinedFixedPointError : public Error {
public:
    using Error::Error;
};

/// The derivative was requested exactly on a sub-interval boundary.
class BoundaryError : public Error {
public:
    using Error::Error;
};

/// An iterative numerical method stopped before meeting its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best_x, double best_value)
        : Error(what), best_x_(best_x), best_value_(best_value) {}

    double best_x() const noexcept { return best_x_; }
    double best_value() const noexcept { return best_value_; }

private:
    double best_x_;
    double best_value_;
};

// -----------------------------------------------------------------------------
// Domain types
// -----------------------------------------------------------------------------

struct QueueParams {
    double lambda = 0.0;  // arrival rate
    double mu = 0.0;      // service rate per busy server
    double theta = 0.0;   // abandonment rate per waiting customer
    double c = 0.0;       // server capacity (fluid units)
};

enum class ImpulseMode { FullState, AbandonmentOnly };

struct Periodic {
    double delta = 0.0;  // spacing between impulses, first at t = delta
};

struct Single {
    double tau = 0.0;
};

struct ImpulseSpec {
    double m = 1.0;  // post-impulse level = m * pre-impulse level
    std::variant<Periodic, Single> schedule = Periodic{1.0};
    ImpulseMode mode = ImpulseMode::FullState;
};

enum class Dynamics { Linear, ErlangA };

/// (q0 vs c) x (lambda vs mu c). Ties go to the "<=" side.
enum class RegimeCase {
    OverStartOverLoad,    // q0 >  c, lambda >  mu c
    UnderStartOverLoad,   // q0 <= c, lambda >  mu c
    OverStartUnderLoad,   // q0 >  c, lambda <= mu c
    UnderStartUnderLoad,  // q0 <= c, lambda <= mu c
};

struct SteadyBounds {
    double lower = 0.0;
    double upper = 0.0;
    double amplitude = 0.0;  // upper - lower
};

struct FixedPoints {
    double xi1 = 0.0;  // (lambda - mu c + theta c) / theta, the above-capacity attractor
    double xi2 = 0.0;  // lambda / mu, the below-capacity attractor
};

// -----------------------------------------------------------------------------
// Operations
// -----------------------------------------------------------------------------

/// Throws ParameterError unless lambda, mu, c > 0 and theta >= 0 (all finite).
void validate(const QueueParams& params);

/// Throws ParameterError unless m > 0 and the schedule is well formed.
void validate(const ImpulseSpec& spec);

bool overloaded(const QueueParams& params) noexcept;

RegimeCase classify_regime(const QueueParams& params, double q0);

/// Both attractors. xi1 is reported as c when lambda == mu c (for any theta), and
/// as -infinity when theta == 0 with lambda < mu c (downward drift above c never settles).
FixedPoints fixed_points(const QueueParams& params);

/// Level right after an impulse hits `pre`.
/// AbandonmentOnly only scales the part above capacity: (pre ^ c) + m (pre - c)+.
double apply_impulse(double pre, double m, ImpulseMode mode, double c) noexcept;

std::string to_string(RegimeCase regime);
std::string to_string(ImpulseMode mode);
std::string to_string(Dynamics dynamics);

std::optional<ImpulseMode> parse_impulse_mode(const std::string& text);
std::optional<Dynamics> parse_dynamics(const std::string& text);

}  // namespace impulseq
