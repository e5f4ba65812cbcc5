"""History-dependent random adding processes.

A trajectory grows by repeatedly adding two values sampled uniformly from
its own past.  The package pairs Monte Carlo simulation of that process and
its variants (lazy updates, continuous time, weighted summands) with exact
moment recursions, growth-rate classification, martingale diagnostics, and
limit-law checks.
"""

from .backends import active_backend, available_backends, use_backend
from .process import (
    ConstantWeight,
    ContinuizedSpec,
    ContinuousTrajectory,
    DiscreteInit,
    DiscreteSpec,
    PathInit,
    Trajectory,
    TwoPointWeight,
    WeightSpec,
    sample_selection_time,
    simulate_continuized,
    simulate_discrete,
    simulate_discrete_weighted,
)

__version__ = "0.1.0"

__all__ = [
    "ConstantWeight",
    "ContinuizedSpec",
    "ContinuousTrajectory",
    "DiscreteInit",
    "DiscreteSpec",
    "PathInit",
    "Trajectory",
    "TwoPointWeight",
    "WeightSpec",
    "active_backend",
    "available_backends",
    "sample_selection_time",
    "simulate_continuized",
    "simulate_discrete",
    "simulate_discrete_weighted",
    "use_backend",
    "__version__",
]
