"""Fluid queues under multiplicative impulses."""

from ._impulseq import (
    BoundaryError,
    ConvergenceError,
    DomainError,
    Dynamics,
    ImpulseMode,
    InstabilityError,
    ParameterError,
    QueueParams,
    RegimeCase,
    UndefinedFixedPointError,
    apply_impulse,
    average_queue_length,
    capacity_crossing_time,
    classify_regime,
    derivative_average,
    erlang_optimal_times,
    erlang_solution,
    erlang_steady_bounds,
    erlang_subintervals,
    fixed_points,
    grid_minimize_impulse_time,
    integrate_impulsive,
    linear_cycle_average,
    linear_optimal_times,
    linear_solution,
    linear_steady_bounds,
    steady_cycle_bounds,
)

__all__ = [name for name in dir() if not name.startswith("_")]
