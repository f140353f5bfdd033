"""Python bindings for the stemdde simulator.

The core is a C++ library; this package re-exports its main operations:
configuration loading, the inner threshold problem (delay and growth
factor with directional derivatives), the outer integrator, and the
model-hypothesis checks.
"""

from ._core import (  # noqa: F401
    CompatibilityError,
    Config,
    ConfigurationError,
    ContinuityError,
    DomainError,
    Equilibrium,
    HistorySegment,
    MaturationResult,
    ModelViolationError,
    SegmentNorms,
    SimulationResult,
    StepRecord,
    TerminationRecord,
    ThresholdError,
    Trajectory,
    check_G,
    dir_deriv_F,
    dir_deriv_tau,
    dir_deriv_y,
    find_equilibria,
    integrate,
    make_compatible,
    manifold_residual,
    rhs,
    run_check,
    run_simulate,
    solve_maturation,
    voc_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
