"""Martingale construction and convergence diagnostics.

Each process variant admits a linear combination of the running sum and the
current value whose conditional expectation is constant in time.  Evaluated
along a simulated trajectory, that combination converges to the
trajectory's own growth constant; watching it flatten is the most direct
numerical window on the limit variable.

The base combination is S_n/(n(n+1)).  With persistence probability p < 1
the coefficients become infinite tail sums with geometric decay; they are
evaluated once per index by a backward one-step recursion seeded with a
truncated tail sum whose remainder is bounded in closed form, so every
coefficient carries a certified error interval.  The continuized analogue
replaces the tail sums with exponential-weight integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .process import ContinuousTrajectory, PathInit, Trajectory

__all__ = [
    "MartingaleSeries",
    "base_martingale",
    "p_martingale",
    "p_coefficients",
    "continuized_martingale",
    "continuized_coefficients",
    "continuized_expected_limit",
    "generalized_discrete_martingale",
    "martingale_from_snapshots",
    "base_expected_limit",
    "p_expected_limit",
    "ladder_constancy",
    "cauchy_decrements",
]

# exp(-s) below this floor contributes nothing at double precision
_TAIL_CUT = -math.log(1e-14)


@dataclass(frozen=True)
class MartingaleSeries:
    """Martingale values along one trajectory.

    ``indices`` holds n (discrete variants) or t (continuized);
    ``coefficients`` caches the index-dependent weights the series was
    computed with,
    keyed ``s_coeff`` / ``x_coeff`` for the sum and value multipliers, plus
    ``*_tail`` upper bounds on the truncation error where the weights are
    tail sums.
    """

    variant: str
    indices: np.ndarray
    values: np.ndarray
    coefficients: dict | None = None
    params: dict | None = None

    def __len__(self) -> int:
        return len(self.values)


# ------------------------------------------------------------ base process


def base_martingale(traj: Trajectory) -> MartingaleSeries:
    """M_n = S_n/(n(n+1)) for the plain adding process."""
    if traj.spec.p != 1.0:
        raise ValueError("base martingale requires persistence p = 1")
    if tuple(traj.weights) != (1.0, 1.0):
        raise ValueError("base martingale requires unit weights")
    r = traj.init.r
    n = np.arange(r, len(traj) + 1, dtype=np.float64)
    values = traj.partial_sums[r - 1:] / (n * (n + 1.0))
    return MartingaleSeries("base", n.astype(np.int64), values)


def base_expected_limit(init) -> float:
    """E M for the base martingale: the initial sum over r(r+1)."""
    values = tuple(float(v) for v in getattr(init, "values", init))
    r = len(values)
    return sum(values) / (r * (r + 1.0))


# ------------------------------------------------------------ p-adding


def _tail_sum(n: int, p: float, tol: float, shifted: bool) -> tuple[float, float]:
    """Truncated tail sum of weight ratios from index n, with remainder bound.

    The k-th term is the ratio of tail weights at n and k; consecutive
    terms shrink by at least nu = 1-p, so stopping once the current term
    drops below tol times the partial sum leaves a remainder of at most
    term * nu/(1-nu).
    """
    nu = 1.0 - p

    def weight_tail(k: float) -> float:
        # weight ratio denominators: k(nu+kp)(1+kp), shifted variant
        # k(k+1)(nu+kp+1)(2+kp); the nu^{-k} growth cancels in ratios
        if shifted:
            return k * (k + 1.0) * (nu + k * p + 1.0) * (2.0 + k * p)
        return k * (nu + k * p) * (1.0 + k * p)

    base = weight_tail(n)
    term = 1.0
    total = 1.0
    k = n
    while term >= tol * total:
        k += 1
        term = nu ** (k - n) * base / weight_tail(k)
        total += term
    return total, term * nu / (1.0 - nu)


def p_coefficients(n_values, p: float, tol: float = 1e-12):
    """Tail-sum coefficients of the p-adding martingale at the given indices.

    Returns (s_coeff, x_coeff, s_tail, x_tail): the multiplier tail sums
    for S_n and X_n and certified upper bounds on their truncation error.
    Both coefficients converge to 1/p from above.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    n_values = np.asarray(n_values, dtype=np.int64)
    if n_values.ndim != 1 or n_values.size == 0 or n_values[0] < 1:
        raise ValueError("indices must be a nonempty 1-d array of n >= 1")
    if np.any(np.diff(n_values) <= 0):
        raise ValueError("indices must be strictly increasing")
    nu = 1.0 - p
    n_max = int(n_values[-1])
    n_min = int(n_values[0])

    out = {}
    for shifted, key in ((False, "s"), (True, "x")):
        top, top_bound = _tail_sum(n_max, p, tol, shifted)
        coeff = np.empty(n_max - n_min + 1)
        bound = np.empty_like(coeff)
        coeff[-1] = top
        bound[-1] = top_bound
        if shifted:
            def weight(k):
                return k * (k + 1.0) * (nu + k * p + 1.0) * (2.0 + k * p)
        else:
            def weight(k):
                return k * (nu + k * p) * (1.0 + k * p)
        # backward one-step recursion: the sum at n is 1 plus the ratio of
        # consecutive weights times the sum at n+1; the ratio is < nu so the
        # seed's error interval only contracts
        for i in range(n_max - 1, n_min - 1, -1):
            ratio = nu * weight(i) / weight(i + 1)
            coeff[i - n_min] = 1.0 + ratio * coeff[i - n_min + 1]
            bound[i - n_min] = ratio * bound[i - n_min + 1]
        sel = n_values - n_min
        out[key] = (coeff[sel], bound[sel])
    return out["s"][0], out["x"][0], out["s"][1], out["x"][1]


def p_martingale(traj: Trajectory, p: float, tol: float = 1e-12) -> MartingaleSeries:
    """Martingale of the p-adding process along one trajectory.

    M_n couples the running sum and the current value:

        M_n = p A_n S_n / (n(1+np)) + (1-p) B_n X_n / ((n+1)(2+np))

    with A_n, B_n the tail-sum coefficients from `p_coefficients`.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    if traj.spec.p != p:
        raise ValueError("trajectory was generated with a different p")
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    r = traj.init.r
    n = np.arange(r, len(traj) + 1, dtype=np.int64)
    s_coeff, x_coeff, s_tail, x_tail = p_coefficients(n, p, tol)
    nf = n.astype(np.float64)
    s_n = traj.partial_sums[r - 1:]
    x_n = traj.values[r - 1:]
    values = (
        p * s_coeff * s_n / (nf * (1.0 + nf * p))
        + (1.0 - p) * x_coeff * x_n / ((nf + 1.0) * (2.0 + nf * p))
    )
    cache = {
        "s_coeff": s_coeff,
        "x_coeff": x_coeff,
        "s_coeff_tail": s_tail,
        "x_coeff_tail": x_tail,
    }
    return MartingaleSeries("p-adding", n, values, cache, {"p": p, "tol": tol})


def p_expected_limit(init, p: float, tol: float = 1e-12) -> float:
    """E M for the p-adding martingale from the initial history."""
    values = tuple(float(v) for v in getattr(init, "values", init))
    r = len(values)
    s_coeff, x_coeff, _, _ = p_coefficients([r], p, tol)
    return (
        p * s_coeff[0] * sum(values) / (r * (1.0 + r * p))
        + (1.0 - p) * x_coeff[0] * values[-1] / ((r + 1.0) * (2.0 + r * p))
    )


# ------------------------------------------------------------ continuized


def continuized_coefficients(t_values, tol: float = 1e-10):
    """Exponential-weight coefficients of the continuized martingale.

    At time t the sum multiplier is the integral over the remaining time of
    e^{t-v} t(1+t)^2 / (v(1+v)^2), and the value multiplier the analogous
    integral with v^2(2+v)^2 weights; both increase to 1.  Integration uses
    v = t + s with the exponential cutoff at e^{-s} = 1e-14.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    t_values = np.asarray(t_values, dtype=np.float64)
    if t_values.ndim != 1 or t_values.size == 0 or t_values[0] <= 0.0:
        raise ValueError("times must be a nonempty 1-d array of t > 0")
    if np.any(np.diff(t_values) <= 0.0):
        raise ValueError("times must be strictly increasing")
    s_coeff = np.empty_like(t_values)
    x_coeff = np.empty_like(t_values)
    for i, t in enumerate(t_values):
        sa, err_a = quad(
            lambda s: math.exp(-s) * t * (1.0 + t) ** 2
            / ((t + s) * (1.0 + t + s) ** 2),
            0.0, _TAIL_CUT, epsabs=1e-14, epsrel=tol, limit=200,
        )
        sb, err_b = quad(
            lambda s: math.exp(-s) * t**2 * (2.0 + t) ** 2
            / ((t + s) ** 2 * (2.0 + t + s) ** 2),
            0.0, _TAIL_CUT, epsabs=1e-14, epsrel=tol, limit=200,
        )
        if err_a > max(tol * abs(sa), 1e-12) or err_b > max(tol * abs(sb), 1e-12):
            raise RuntimeError(f"coefficient quadrature did not converge at t={t}")
        s_coeff[i] = sa
        x_coeff[i] = sb
    return s_coeff, x_coeff


def continuized_martingale(ctraj: ContinuousTrajectory, t_grid,
                           tol: float = 1e-10) -> MartingaleSeries:
    """M(t) = A(t) S(t)/(t(1+t)) + B(t) X(t)/(t(2+t)) along one trajectory."""
    spec = ctraj.spec
    if spec.alpha != 1.0 or spec.beta != 1.0:
        raise ValueError("continuized martingale requires uniform selection")
    if spec.weights.a.is_random or spec.weights.b.is_random or \
            spec.weights.a.mean != 1.0 or spec.weights.b.mean != 1.0:
        raise ValueError("continuized martingale requires unit weights")
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("grid must be a nonempty 1-d array")
    if t_grid[0] <= 0.0 or t_grid[0] < ctraj.init.tau:
        raise ValueError("grid times must be positive and not precede the path")
    if np.any(np.diff(t_grid) <= 0.0):
        raise ValueError("grid times must be strictly increasing")
    s_coeff, x_coeff = continuized_coefficients(t_grid, tol)
    values = np.empty_like(t_grid)
    for i, t in enumerate(t_grid):
        s_t = ctraj.integral(t)
        x_t = ctraj.value_at(t)
        values[i] = s_coeff[i] * s_t / (t * (1.0 + t)) \
            + x_coeff[i] * x_t / (t * (2.0 + t))
    cache = {"s_coeff": s_coeff, "x_coeff": x_coeff}
    return MartingaleSeries("continuized", t_grid, values, cache, {"tol": tol})


def continuized_expected_limit(init, tol: float = 1e-10) -> float:
    """E M for the base continuized process started from a fixed path.

    Evaluates the martingale mean at the path horizon; for a point start
    (tau = 0) the limit of S(t)/t^2 has mean x(0)/2.
    """
    if not isinstance(init, PathInit):
        init = PathInit(0.0, [init]) if np.isscalar(init) else PathInit(*init)
    tau = init.tau
    if tau == 0.0:
        return 0.5 * float(init.values[-1])
    s_coeff, x_coeff = continuized_coefficients(np.array([tau]), tol)
    return float(
        s_coeff[0] * init.integral(tau) / (tau * (1.0 + tau))
        + x_coeff[0] * init.value_at(tau) / (tau * (2.0 + tau))
    )


# ------------------------------------------------------------ generalized discrete


def generalized_discrete_martingale(traj: Trajectory, a: float, b: float) -> MartingaleSeries:
    """M_n = Gamma(n)/Gamma(n+a+b) * S_n for the weighted discrete process.

    The gamma ratio is evaluated through log-gamma, covering non-integer
    weight sums.  Weight sums at or below 1 are rejected: there the
    normalization no longer decays and the martingale's integrability is
    an open question, besides putting gamma poles in reach.
    """
    a = float(a)
    b = float(b)
    if not a + b > 1.0:
        raise ValueError("weight sum a + b must exceed 1")
    if tuple(traj.weights) != (a, b):
        raise ValueError("trajectory was generated with different weights")
    r = traj.init.r
    n = np.arange(r, len(traj) + 1, dtype=np.int64)
    nf = n.astype(np.float64)
    scale = np.exp([math.lgamma(v) - math.lgamma(v + a + b) for v in nf])
    values = scale * traj.partial_sums[r - 1:]
    return MartingaleSeries(
        "generalized-discrete", n, values,
        {"s_coeff": scale}, {"a": a, "b": b},
    )


# ------------------------------------------------------------ ensemble bridge


def martingale_from_snapshots(variant: str, indices, s_samples, x_samples=None, *,
                              p: float | None = None, tol: float = 1e-12,
                              weights: tuple[float, float] | None = None) -> np.ndarray:
    """Martingale values for an ensemble of snapshot rows.

    ``s_samples`` (and ``x_samples`` where the variant needs the current
    value) are (reps, len(indices)) arrays of S and X at the given indices
    or times.  Coefficients are computed once and broadcast across reps,
    which keeps large-ensemble diagnostics cheap.
    """
    indices = np.asarray(indices)
    s_samples = np.atleast_2d(np.asarray(s_samples, dtype=np.float64))
    if s_samples.shape[1] != indices.size:
        raise ValueError("snapshot columns must match the index grid")
    if variant == "base":
        n = indices.astype(np.float64)
        return s_samples / (n * (n + 1.0))
    if variant == "p-adding":
        if p is None or x_samples is None:
            raise ValueError("p-adding needs p and X samples")
        x_samples = np.atleast_2d(np.asarray(x_samples, dtype=np.float64))
        s_coeff, x_coeff, _, _ = p_coefficients(indices, p, tol)
        n = indices.astype(np.float64)
        return (
            p * s_coeff * s_samples / (n * (1.0 + n * p))
            + (1.0 - p) * x_coeff * x_samples / ((n + 1.0) * (2.0 + n * p))
        )
    if variant == "continuized":
        if x_samples is None:
            raise ValueError("continuized needs X samples")
        x_samples = np.atleast_2d(np.asarray(x_samples, dtype=np.float64))
        t = indices.astype(np.float64)
        s_coeff, x_coeff = continuized_coefficients(t, max(tol, 1e-12))
        return s_coeff * s_samples / (t * (1.0 + t)) \
            + x_coeff * x_samples / (t * (2.0 + t))
    if variant == "generalized-discrete":
        if weights is None:
            raise ValueError("generalized-discrete needs the weight pair")
        a, b = weights
        if not a + b > 1.0:
            raise ValueError("weight sum a + b must exceed 1")
        n = indices.astype(np.float64)
        scale = np.exp([math.lgamma(v) - math.lgamma(v + a + b) for v in n])
        return scale * s_samples
    raise ValueError(f"unknown variant {variant!r}")


# ------------------------------------------------------------ diagnostics


def ladder_constancy(indices, m_samples):
    """Means and standard errors of M across an index ladder.

    Returns (means, std_errs, within_band): the ensemble mean at each
    index, its standard error, and whether every pairwise difference of
    means sits inside three combined standard errors, the operational
    reading of "the ensemble mean does not move".
    """
    m = np.atleast_2d(np.asarray(m_samples, dtype=np.float64))
    if m.shape[0] < 2:
        raise ValueError("need at least two ensemble members")
    means = m.mean(axis=0)
    ses = m.std(axis=0, ddof=1) / math.sqrt(m.shape[0])
    ok = True
    for i in range(means.size):
        for j in range(i + 1, means.size):
            band = 3.0 * math.hypot(ses[i], ses[j])
            if abs(means[i] - means[j]) > band:
                ok = False
    return means, ses, ok


def cauchy_decrements(m_samples) -> np.ndarray:
    """E (M_{2n} - M_n)^2 along a dyadic ladder of snapshot columns.

    Column j of the input is M at the j-th ladder index (each index double
    the last).  A convergent martingale makes the returned sequence fall
    by at least half per step; the caller asserts the rate.
    """
    m = np.atleast_2d(np.asarray(m_samples, dtype=np.float64))
    if m.shape[1] < 2:
        raise ValueError("need at least two ladder indices")
    diffs = np.diff(m, axis=1)
    return np.mean(diffs**2, axis=0)
