"""Process definitions and trajectory simulation for random adding processes.

Four variants are covered by two sampling entry points:

* ``simulate_discrete`` — the discrete-time adding process.  Each new term is
  the sum of two uniformly selected past terms; with persistence probability
  ``p < 1`` the update only fires with probability ``p``, otherwise the last
  value is repeated.  Optional constant weights ``a``, ``b`` generalize the
  update to ``a*X[U] + b*X[V]``.
* ``simulate_continuized`` — the continuous-time version subordinated to a
  rate-1 Poisson process.  At each jump the new value is ``A*X(U) + B*X(V)``
  where the selection times ``U``, ``V`` have CDFs ``(u/t)**alpha`` and
  ``(v/t)**beta`` over the continuous past, and the weights may be random.

Randomness is counter-based (Philox).  Trajectory ``k`` of an ensemble uses
the stream keyed by ``(master_seed, k)``, so results are bit-reproducible
and independent of scheduling; a single trajectory with seed ``s`` is
identical to member 0 of an ensemble with master seed ``s``.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field

import numpy as np

from . import backends

__all__ = [
    "DiscreteInit",
    "PathInit",
    "ConstantWeight",
    "TwoPointWeight",
    "WeightSpec",
    "DiscreteSpec",
    "ContinuizedSpec",
    "Trajectory",
    "ContinuousTrajectory",
    "simulate_discrete",
    "simulate_discrete_weighted",
    "simulate_continuized",
    "sample_selection_time",
]


@dataclass(frozen=True)
class DiscreteInit:
    """Fixed initial history x_1..x_r of a discrete-time process."""

    values: tuple[float, ...]

    def __init__(self, values):
        vals = tuple(float(v) for v in values)
        if len(vals) < 1:
            raise ValueError("initial history needs at least one value")
        if any(not v > 0 for v in vals):
            raise ValueError("initial values must be strictly positive")
        object.__setattr__(self, "values", vals)

    @property
    def r(self) -> int:
        return len(self.values)

    @property
    def s_r(self) -> float:
        return sum(self.values)


@dataclass(frozen=True)
class PathInit:
    """Piecewise-constant initial path x(t) on [0, tau].

    ``values[i]`` holds on the interval (breakpoints[i-1], breakpoints[i]]
    with breakpoints[0] = 0 implied; the path is left-continuous at the
    breakpoints.  The degenerate start tau=0 is a single value x(0).
    """

    tau: float
    breakpoints: tuple[float, ...]  # right endpoints, last one equals tau
    values: tuple[float, ...]

    def __init__(self, tau, values, breakpoints=None):
        tau = float(tau)
        vals = tuple(float(v) for v in values)
        if tau < 0:
            raise ValueError("tau must be nonnegative")
        if not vals:
            raise ValueError("path needs at least one value")
        if any(not v > 0 for v in vals):
            raise ValueError("path values must be strictly positive")
        if tau == 0:
            if len(vals) != 1 or breakpoints not in (None, (0.0,), [0.0]):
                raise ValueError("tau=0 admits a single value x(0) only")
            brks = (0.0,)
        else:
            if breakpoints is None:
                if len(vals) != 1:
                    raise ValueError("breakpoints required for a multi-piece path")
                brks = (tau,)
            else:
                brks = tuple(float(b) for b in breakpoints)
            if len(brks) != len(vals):
                raise ValueError("one breakpoint (right endpoint) per value")
            if any(b2 <= b1 for b1, b2 in zip(brks, brks[1:])) or brks[0] <= 0:
                raise ValueError("breakpoints must be strictly increasing in (0, tau]")
            if brks[-1] != tau:
                raise ValueError("last breakpoint must equal tau")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "breakpoints", brks)
        object.__setattr__(self, "values", vals)

    def value_at(self, s: float) -> float:
        """Path value at time s; clamps to x(0) below 0 and x(tau) above tau."""
        if s <= 0.0:
            return self.values[0]
        if s >= self.tau:
            return self.values[-1]
        return self.values[bisect_left(self.breakpoints, s)]

    def integral(self, t: float) -> float:
        """∫_0^min(t, tau) x(u) du."""
        t = min(float(t), self.tau)
        if t <= 0:
            return 0.0
        acc = 0.0
        left = 0.0
        for b, v in zip(self.breakpoints, self.values):
            if t <= b:
                return acc + v * (t - left)
            acc += v * (b - left)
            left = b
        return acc


@dataclass(frozen=True)
class ConstantWeight:
    value: float

    def __post_init__(self):
        if self.value == 0:
            raise ValueError("constant weight must be nonzero")

    mean = property(lambda self: self.value)
    second_moment = property(lambda self: self.value**2)
    is_random = False


@dataclass(frozen=True)
class TwoPointWeight:
    """Weight equal to v1 with probability prob1, else v2."""

    v1: float
    v2: float
    prob1: float

    def __post_init__(self):
        if not 0.0 <= self.prob1 <= 1.0:
            raise ValueError("prob1 must lie in [0, 1]")

    @property
    def mean(self) -> float:
        return self.prob1 * self.v1 + (1.0 - self.prob1) * self.v2

    @property
    def second_moment(self) -> float:
        return self.prob1 * self.v1**2 + (1.0 - self.prob1) * self.v2**2

    is_random = True


@dataclass(frozen=True)
class WeightSpec:
    a: ConstantWeight | TwoPointWeight = ConstantWeight(1.0)
    b: ConstantWeight | TwoPointWeight = ConstantWeight(1.0)


@dataclass(frozen=True)
class DiscreteSpec:
    """Discrete adding process with persistence probability p in (0, 1]."""

    p: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must lie in (0, 1]")


@dataclass(frozen=True)
class ContinuizedSpec:
    """Poisson-continuized adding process with power-law selection."""

    alpha: float = 1.0
    beta: float = 1.0
    weights: WeightSpec = field(default_factory=WeightSpec)

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")


@dataclass(frozen=True)
class Trajectory:
    values: np.ndarray  # X_1..X_n
    partial_sums: np.ndarray  # S_1..S_n
    seed: int
    spec: DiscreteSpec
    init: DiscreteInit
    weights: tuple[float, float] = (1.0, 1.0)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ContinuousTrajectory:
    jump_times: np.ndarray  # strictly increasing, all > tau
    jump_values: np.ndarray
    seed: int
    spec: ContinuizedSpec
    init: PathInit

    def value_at(self, t: float) -> float:
        """X(t): right-continuous at jumps, init path before the first jump."""
        k = int(np.searchsorted(self.jump_times, t, side="right")) - 1
        if k >= 0:
            return float(self.jump_values[k])
        return self.init.value_at(t)

    def integral(self, t: float) -> float:
        """S(t) = ∫_0^t X(u) du from the piecewise-constant path."""
        acc = self.init.integral(t)
        prev_t = self.init.tau
        prev_x = self.init.values[-1]
        for jt, jv in zip(self.jump_times, self.jump_values):
            if t <= jt:
                break
            acc += prev_x * (jt - prev_t)
            prev_t, prev_x = jt, jv
        if t > prev_t:
            acc += prev_x * (t - prev_t)
        return acc


def sample_selection_time(t: float, alpha: float, uniform_draw: float) -> float:
    """Inverse-CDF sample of the selection law P{U <= u} = (u/t)**alpha.

    Returns t * draw**(1/alpha), a time in (0, t).
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not 0.0 < uniform_draw < 1.0:
        raise ValueError("uniform draw must lie in (0, 1)")
    return t * uniform_draw ** (1.0 / alpha)


def _coerce_discrete_init(init) -> DiscreteInit:
    return init if isinstance(init, DiscreteInit) else DiscreteInit(init)


def simulate_discrete(init, p: float, n_max: int, seed: int) -> Trajectory:
    """Simulate X_1..X_{n_max} of the (p-)adding process.

    At step n >= r, with probability p two indices U(n), V(n) are drawn
    independently and uniformly from {1..n} and X_{n+1} = X_{U(n)} + X_{V(n)};
    otherwise X_{n+1} = X_n.  Identical (seed, inputs) give bit-identical
    output regardless of backend.
    """
    return simulate_discrete_weighted(init, p, n_max, seed, a=1.0, b=1.0)


def simulate_discrete_weighted(
    init, p: float, n_max: int, seed: int, a: float = 1.0, b: float = 1.0
) -> Trajectory:
    """Discrete simulation with the weighted update a*X[U] + b*X[V].

    The weighted form (a, b) != (1, 1) is only defined for p = 1.
    """
    init = _coerce_discrete_init(init)
    spec = DiscreteSpec(p)  # validates p
    if n_max < init.r:
        raise ValueError("n_max must be at least the initial history length")
    if (a, b) != (1.0, 1.0) and p != 1.0:
        raise ValueError("weighted updates require p = 1")
    x0 = np.asarray(init.values, dtype=np.float64)
    values = backends.kernels().discrete_path(x0, p, a, b, int(n_max), int(seed), 0)
    values = np.asarray(values)
    return Trajectory(
        values=values,
        partial_sums=np.cumsum(values),
        seed=int(seed),
        spec=spec,
        init=init,
        weights=(a, b),
    )


def simulate_continuized(
    init, spec: ContinuizedSpec, t_max: float, seed: int
) -> ContinuousTrajectory:
    """Simulate the continuized process on (tau, t_max].

    Jumps occur at the times of a rate-1 Poisson process started at tau.  At
    jump time T_r the selection times are T_r * u**(1/alpha), T_r * v**(1/beta)
    and the value looked up resolves through the initial path for times
    <= tau and through prior jumps otherwise.
    """
    if not isinstance(init, PathInit):
        init = PathInit(0.0, [init]) if np.isscalar(init) else PathInit(*init)
    if not t_max > init.tau:
        raise ValueError("t_max must exceed tau")
    jt, jv = backends.kernels().continuized_path(
        np.asarray(init.breakpoints, dtype=np.float64),
        np.asarray(init.values, dtype=np.float64),
        init.tau,
        float(t_max),
        spec.alpha,
        spec.beta,
        _weight_params(spec.weights.a),
        _weight_params(spec.weights.b),
        int(seed),
        0,
    )
    return ContinuousTrajectory(
        jump_times=np.asarray(jt),
        jump_values=np.asarray(jv),
        seed=int(seed),
        spec=spec,
        init=init,
    )


def _weight_params(law) -> tuple[float, float, float, float]:
    """Flatten a weight law for the kernels: (is_random, v1, v2, prob1)."""
    if law.is_random:
        return (1.0, law.v1, law.v2, law.prob1)
    return (0.0, law.value, law.value, 1.0)
