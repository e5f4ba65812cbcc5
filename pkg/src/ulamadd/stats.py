"""Ensemble statistics, limit-law samples, and log-gamma moment fits.

The pieces here sit on top of the simulation kernels: ``mc_ensemble`` runs a
replicated simulation and summarizes per-index moments together with the
matching martingale values, ``limit_density_samples`` extracts the scaled
variables whose laws stabilize (Gamma(2,1) and Exp(1) targets), and
``loggamma_fit`` inverts the three-moment map of a log-gamma shape to predict
the fourth moment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import backends, martingales
from .process import (
    ContinuizedSpec,
    DiscreteInit,
    DiscreteSpec,
    PathInit,
    _weight_params,
)

__all__ = [
    "EnsembleSummary",
    "FitReport",
    "LimitLawSamples",
    "gamma2_quantile",
    "limit_density_samples",
    "loggamma_fit",
    "mc_ensemble",
    "wasserstein2",
]

_ESTIMATE_KEYS = ("x", "x2", "x3", "m", "m2")


@dataclass(frozen=True)
class EnsembleSummary:
    """Replicated-simulation snapshots plus per-index moment estimates.

    ``samples`` has shape (reps, len(indices), len(columns)); ``m_samples``
    holds the martingale value per replicate and index when the variant has
    one (None otherwise).  ``estimates`` maps "mean_x", "se_x", ...,
    "mean_m2", "se_m2" to per-index arrays; martingale entries are None when
    ``m_samples`` is.  ``seed`` is the master seed: replicate k owns the
    Philox stream keyed by (seed, k), so equal seeds reproduce bit-identical
    ensembles.
    """

    variant: str
    indices: np.ndarray
    reps: int
    seed: int
    spec: DiscreteSpec | ContinuizedSpec
    init: DiscreteInit | PathInit
    weights: tuple[float, float]
    columns: tuple[str, ...]
    samples: np.ndarray
    m_samples: np.ndarray | None
    estimates: dict[str, np.ndarray | None]

    def column(self, name: str) -> np.ndarray:
        return self.samples[:, :, self.columns.index(name)]

    def at_index(self, n) -> np.ndarray:
        """Snapshot rows (reps, len(columns)) at one grid index or time."""
        pos = np.nonzero(self.indices == n)[0]
        if pos.size == 0:
            raise ValueError(f"index {n!r} is not on the ensemble grid")
        return self.samples[:, int(pos[0]), :]


def _mean_se(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    reps = values.shape[0]
    return (
        values.mean(axis=0),
        values.std(axis=0, ddof=1) / math.sqrt(reps),
    )


def _estimate_table(x: np.ndarray, m: np.ndarray | None) -> dict:
    table: dict[str, np.ndarray | None] = {}
    powers = {"x": x, "x2": x * x, "x3": x * x * x}
    if m is not None:
        powers["m"] = m
        powers["m2"] = m * m
    for key in _ESTIMATE_KEYS:
        if key in powers:
            mean, se = _mean_se(powers[key])
            table[f"mean_{key}"], table[f"se_{key}"] = mean, se
        else:
            table[f"mean_{key}"] = table[f"se_{key}"] = None
    return table


def mc_ensemble(
    spec,
    init,
    index_grid,
    reps: int,
    seed: int,
    *,
    weights: tuple[float, float] = (1.0, 1.0),
    tol: float = 1e-12,
) -> EnsembleSummary:
    """Replicated snapshots of a process at the given step indices or times.

    ``spec`` selects the process family: a DiscreteSpec runs the (p-)adding
    chain (optionally with a constant weight pair, p = 1 only), a
    ContinuizedSpec runs the jump process.  Martingale values are attached
    for every variant that has one; for constant-weight updates that needs
    the weight sum to exceed 1.  reps must be at least 2 so standard errors
    are defined.
    """
    reps = int(reps)
    if reps < 2:
        raise ValueError("need at least 2 replicates for standard errors")
    seed = int(seed)
    kern = backends.kernels()

    if isinstance(spec, DiscreteSpec):
        if not isinstance(init, DiscreteInit):
            init = DiscreteInit(init)
        grid = np.asarray(index_grid, dtype=np.int64)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("index grid must be a non-empty 1-d sequence")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("index grid must be strictly increasing")
        if grid[0] < init.r:
            raise ValueError("grid indices must be >= the initial history length")
        a, b = float(weights[0]), float(weights[1])
        if (a, b) != (1.0, 1.0) and spec.p < 1.0:
            raise ValueError("weighted updates support p = 1 only")
        out = kern.discrete_ensemble_snapshots(
            tuple(init.values), spec.p, a, b, grid, reps, seed, 0
        )
        columns = ("x", "s_prev", "s", "x_u", "x_v", "jumped")
        x, s = out[:, :, 0], out[:, :, 2]
        if (a, b) != (1.0, 1.0):
            variant = "generalized-discrete"
            m = (
                martingales.martingale_from_snapshots(
                    variant, grid, s, weights=(a, b)
                )
                if a + b > 1.0
                else None
            )
        elif spec.p < 1.0:
            variant = "p-adding"
            m = martingales.martingale_from_snapshots(
                variant, grid, s, x, p=spec.p, tol=tol
            )
        else:
            variant = "base"
            m = martingales.martingale_from_snapshots(variant, grid, s)
        return EnsembleSummary(
            variant=variant,
            indices=grid,
            reps=reps,
            seed=seed,
            spec=spec,
            init=init,
            weights=(a, b),
            columns=columns,
            samples=out,
            m_samples=m,
            estimates=_estimate_table(x, m),
        )

    if isinstance(spec, ContinuizedSpec):
        if not isinstance(init, PathInit):
            init = PathInit(0.0, [init]) if np.isscalar(init) else PathInit(*init)
        grid = np.asarray(index_grid, dtype=np.float64)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("time grid must be a non-empty 1-d sequence")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("time grid must be strictly increasing")
        if grid[0] <= max(init.tau, 0.0):
            raise ValueError("grid times must exceed the initial horizon")
        if weights != (1.0, 1.0):
            raise ValueError(
                "continuized weights live on ContinuizedSpec, not the weights argument"
            )
        out = kern.continuized_ensemble_snapshots(
            np.asarray(init.breakpoints, dtype=np.float64),
            np.asarray(init.values, dtype=np.float64),
            init.tau,
            float(grid[-1]),
            spec.alpha,
            spec.beta,
            _weight_params(spec.weights.a),
            _weight_params(spec.weights.b),
            grid,
            reps,
            seed,
            0,
        )
        columns = ("x", "s", "jumps")
        x, s = out[:, :, 0], out[:, :, 1]
        unit_weights = (
            not spec.weights.a.is_random
            and not spec.weights.b.is_random
            and spec.weights.a.value == 1.0
            and spec.weights.b.value == 1.0
        )
        m = None
        if spec.alpha == 1.0 and spec.beta == 1.0 and unit_weights:
            m = martingales.martingale_from_snapshots(
                "continuized", grid, s, x, tol=max(tol, 1e-12)
            )
        return EnsembleSummary(
            variant="continuized",
            indices=grid,
            reps=reps,
            seed=seed,
            spec=spec,
            init=init,
            weights=(1.0, 1.0),
            columns=columns,
            samples=out,
            m_samples=m,
            estimates=_estimate_table(x, m),
        )

    raise TypeError("spec must be a DiscreteSpec or a ContinuizedSpec")


@dataclass(frozen=True)
class LimitLawSamples:
    """Scaled-variable samples at one step index of a base-process ensemble.

    ``scaled_value`` is X_n / (n M_{n-1}) whose law approaches the density
    w e^{-w} (a Gamma(2,1) law); ``scaled_pair_sum`` is
    (X_U(n) + X_V(n)) / (n M_n), mean 2(n+1)/n; ``scaled_selection`` is
    X_U(n) / (n M_n), approaching Exp(1).  Histograms use fixed bins of
    width 0.1 on [0, 10] so runs at different sizes stay comparable.
    """

    index: int
    scaled_value: np.ndarray
    scaled_pair_sum: np.ndarray
    scaled_selection: np.ndarray
    bin_edges: np.ndarray
    value_density: np.ndarray
    pair_sum_density: np.ndarray

    @property
    def bin_mid(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def limit_density_samples(ensemble: EnsembleSummary, n: int) -> LimitLawSamples:
    """Limit-law variables from base-process snapshots at step index ``n``.

    The snapshot row at n carries S_{n-1}, S_n and the step-n selections, so
    all three scalings are exact: n M_{n-1} = S_{n-1}/(n-1) and
    n M_n = S_n/(n+1).
    """
    if ensemble.variant != "base":
        raise ValueError("limit-law scalings apply to the base variant only")
    if ensemble.m_samples is None:
        raise ValueError("ensemble must carry martingale values")
    n = int(n)
    if n < 2:
        raise ValueError("need n >= 2 so M_{n-1} exists")
    row = ensemble.at_index(n)
    cols = ensemble.columns
    x = row[:, cols.index("x")]
    s_prev = row[:, cols.index("s_prev")]
    s = row[:, cols.index("s")]
    xu = row[:, cols.index("x_u")]
    xv = row[:, cols.index("x_v")]
    scaled_value = x * (n - 1) / s_prev
    scaled_pair_sum = (xu + xv) * (n + 1) / s
    scaled_selection = xu * (n + 1) / s
    edges = np.linspace(0.0, 10.0, 101)
    width = edges[1] - edges[0]
    value_density = np.histogram(scaled_value, bins=edges)[0] / (
        scaled_value.size * width
    )
    pair_density = np.histogram(scaled_pair_sum, bins=edges)[0] / (
        scaled_pair_sum.size * width
    )
    return LimitLawSamples(
        index=n,
        scaled_value=scaled_value,
        scaled_pair_sum=scaled_pair_sum,
        scaled_selection=scaled_selection,
        bin_edges=edges,
        value_density=value_density,
        pair_sum_density=pair_density,
    )


def gamma2_quantile(u):
    """Quantile of the Gamma(2,1) law, CDF F(w) = 1 - e^{-w}(1 + w).

    Newton iteration from w0 = max(u, -log(1-u)); F is convex left of the
    mode and the start point sits at or right of the root, so the iterates
    stay positive and the CDF residual drops below 1e-12 in a few steps.
    Accepts scalars or arrays with entries in (0, 1).
    """
    arr = np.asarray(u, dtype=np.float64)
    if arr.size == 0:
        return arr.copy()
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("quantile argument must lie strictly in (0, 1)")
    w = np.maximum(arr, -np.log1p(-arr))
    for _ in range(100):
        # F(w) - u, written to avoid cancellation for small w
        resid = -np.expm1(-w) - w * np.exp(-w) - arr
        if np.all(np.abs(resid) < 1e-12):
            break
        w = w - resid / (w * np.exp(-w))
        w = np.maximum(w, 1e-300)  # density vanishes at 0; keep iterates inside
    else:
        raise RuntimeError("Gamma(2,1) quantile iteration did not converge")
    return w if arr.ndim else float(w)


def _exp1_quantile(u):
    return -np.log1p(-np.asarray(u, dtype=np.float64))


_TARGETS = {"gamma2": gamma2_quantile, "exp1": _exp1_quantile}


def wasserstein2(samples, target: str) -> float:
    """Order-2 Wasserstein distance to a reference law by quantile coupling.

    Sorted samples are matched against target quantiles at the plotting
    positions (i - 1/2)/N; the distance is the root mean square gap of that
    coupling.  ``target`` is "Gamma2" (density w e^{-w}) or "Exp1".  At
    least 100 positive, finite samples are required.
    """
    a = np.asarray(samples, dtype=np.float64).ravel()
    if a.size < 100:
        raise ValueError("need at least 100 samples for a stable distance")
    if not np.all(np.isfinite(a)) or np.any(a <= 0.0):
        raise ValueError("samples must be positive and finite")
    key = target.strip().lower()
    if key not in _TARGETS:
        raise ValueError("target must be 'Gamma2' or 'Exp1'")
    positions = (np.arange(a.size) + 0.5) / a.size
    gaps = np.sort(a) - _TARGETS[key](positions)
    return float(math.sqrt(np.mean(gaps * gaps)))


@dataclass(frozen=True)
class FitReport:
    """Log-gamma moment fit log mu_s = log_scale*s - shape*log(1 - s*scale).

    Equivalently X = exp(log_scale + Y) with Y gamma-distributed with shape
    ``gamma_shape`` and scale ``gamma_scale``.  ``fourth_moment`` is the
    implied E X^4, present only when gamma_scale < 1/4 (the s = 4 moment
    diverges otherwise).  ``residuals`` are the relative errors of the
    refitted first three moments against the inputs.
    """

    log_scale: float
    gamma_shape: float
    gamma_scale: float
    inputs: tuple[float, float, float]
    fitted_moments: tuple[float, float, float]
    residuals: tuple[float, float, float]
    fourth_moment: float | None


def _loggamma_ratio(theta: float) -> float:
    # log(mu3/mu1^3) / log(mu2/mu1^2) as a function of the gamma scale;
    # increases from 3 at 0+ and diverges at 1/3-.
    num = 3.0 * math.log1p(-theta) - math.log1p(-3.0 * theta)
    den = 2.0 * math.log1p(-theta) - math.log1p(-2.0 * theta)
    return num / den


def loggamma_fit(mu1: float, mu2: float, mu3: float) -> FitReport:
    """Fit the three-parameter log-gamma moment law to (mu1, mu2, mu3).

    The centered logs L_s - s L_1 eliminate the scale, leaving one monotone
    equation for the gamma scale on (0, 1/3); shape and scale follow in
    closed form.  Raises ValueError when the moment ratios are infeasible
    (including the degenerate zero-variance case mu2 = mu1^2).
    """
    mus = (float(mu1), float(mu2), float(mu3))
    if any(not m > 0.0 for m in mus):
        raise ValueError("moments must be positive")
    log1, log2, log3 = (math.log(m) for m in mus)
    gap2 = log2 - 2.0 * log1
    gap3 = log3 - 3.0 * log1
    if gap2 <= 0.0:
        raise ValueError(
            "infeasible moments: mu2 <= mu1^2 leaves no positive spread to fit"
        )
    ratio = gap3 / gap2
    lo, hi = 1e-10, 1.0 / 3.0 - 1e-10
    if ratio <= _loggamma_ratio(lo) or ratio >= _loggamma_ratio(hi):
        raise ValueError(
            "infeasible moments: no gamma scale in (0, 1/3) matches the "
            f"log-moment ratio {ratio:.6g}"
        )
    theta = brentq(
        lambda t: _loggamma_ratio(t) - ratio, lo, hi, xtol=1e-15, rtol=8.9e-16
    )
    shape = gap2 / (2.0 * math.log1p(-theta) - math.log1p(-2.0 * theta))
    log_scale = log1 + shape * math.log1p(-theta)
    fitted = tuple(
        math.exp(log_scale * s - shape * math.log1p(-s * theta)) for s in (1, 2, 3)
    )
    residuals = tuple(f / m - 1.0 for f, m in zip(fitted, mus))
    fourth = (
        math.exp(4.0 * log_scale - shape * math.log1p(-4.0 * theta))
        if theta < 0.25
        else None
    )
    return FitReport(
        log_scale=log_scale,
        gamma_shape=shape,
        gamma_scale=theta,
        inputs=mus,
        fitted_moments=fitted,
        residuals=residuals,
        fourth_moment=fourth,
    )
