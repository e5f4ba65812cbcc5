"""Moment functions of the continuized and generalized adding processes.

Everything here rests on closed systems of ordinary differential equations
for the moments.  All of them are singular at t = 0 (coefficients carry 1/t
and 1/t**2), so each solver bootstraps with a truncated power series of the
regular solution about the origin, steps to a small handover time, and then
continues with an adaptive Runge-Kutta integrator.  The series recurrences
are exact; raising the handover or the series order changes nothing beyond
roundoff, which the tests pin down by halving the handover.

Growth classification for the weighted process with power-law selection
(exponents alpha, beta; weights A, B) reduces to a quadratic in the growth
exponent sigma; `sigma_roots` and `classify_regions` implement it together
with the oscillation criterion and, on the diagonal alpha == beta, the
second-moment exponent.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp

from .process import PathInit

__all__ = [
    "OdeMomentState",
    "GrowthReport",
    "mean_continuized",
    "second_moment_continuized_base",
    "second_moment_state",
    "second_moment_residual",
    "product_moment_continuized",
    "third_moment_continuized_base",
    "third_moment_state",
    "generalized_mean_ode",
    "sigma_roots",
    "classify_regions",
    "named_constants",
]

_SERIES_ORDER = 28
_HANDOVER = 0.5
_RTOL = 1e-10
_ATOL = 1e-12
# exp(-s) below this floor contributes nothing at double precision
_TAIL_CUT = -math.log(1e-14)


@dataclass(frozen=True)
class OdeMomentState:
    """Named snapshot of a moment system at one time.

    For the base second-moment system the names are ``x_sq`` (E X(t)^2),
    ``x_sq_integral`` (its running integral), ``pair_integral`` (the double
    integral of the product moment over [0,t]^2) and ``pair_integral_rate``
    (the time derivative of the latter).  The third-moment system carries
    ``x_cubed`` = E X(t)^3, the mixed moments of X with the running
    integrals S_j(t) = int_0^t X(u)^j du, and ``s3`` = E S_3(t).
    """

    t: float
    names: tuple[str, ...]
    values: tuple[float, ...]

    def __getitem__(self, name: str) -> float:
        return self.values[self.names.index(name)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))


# ------------------------------------------------------------ mean


def mean_continuized(init, t: float) -> float:
    """E X(t) for the continuized process started from an initial path.

    The mean solves t m'' + (1+t) m' - m = 0 beyond the initial segment;
    the solution through the initial conditions is

        m(t) = (1+t) [ x(tau)/(1+tau) + C * int_tau^t e^{-y}/(y(1+y)^2) dy ]

    with C fixed by matching m'(tau) to the jump rate out of the initial
    path.  The integral is evaluated with the substitution y = tau + u so
    the exponential weight never overflows.
    """
    if not isinstance(init, PathInit):
        init = PathInit(0.0, (init,)) if np.isscalar(init) else PathInit(*init)
    t = float(t)
    if t < init.tau:
        raise ValueError("t precedes the initial path")
    tau = init.tau
    x_tau = init.values[-1]
    if tau == 0.0:
        # regular solution through x(0): linear growth, exactly
        return x_tau * (1.0 + t)
    if t == tau:
        return x_tau
    # C e^{-tau}/(tau(1+tau)) + (2+tau)/(1+tau) x(tau) = (2/tau) int_0^tau x
    weight = 2.0 * init.integral(tau) / tau - (2.0 + tau) * x_tau / (1.0 + tau)
    upper = min(t - tau, _TAIL_CUT)
    integral, _ = quad(
        lambda u: math.exp(-u) / ((tau + u) * (1.0 + tau + u) ** 2),
        0.0, upper, epsabs=1e-14, epsrel=1e-12, limit=200,
    )
    return (1.0 + t) * (x_tau / (1.0 + tau) + tau * (1.0 + tau) * weight * integral)


# ------------------------------------------------------------ base second moment
#
# State y = (q, R, Q, P):  q = E X^2,  R = int_0^t q,  Q = the double
# integral of E X(u)X(v) over [0,t]^2, P = Q'.  The closed system is
#   q' = -q + 2R/t + 2Q/t^2,   R' = q,   Q' = P,   P' = -P + 2q + 4Q/t.


def _base_series_coeffs(order: int):
    q = [0.0] * (order + 1)
    big_q = [0.0] * (order + 2)
    q[0] = 1.0
    for k in range(order):
        big_q[k + 2] = ((3 - k) * big_q[k + 1] + 2.0 * q[k]) / ((k + 1) * (k + 2))
        q[k + 1] = (2.0 * big_q[k + 2] + q[k] * (1 - k) / (k + 1)) / (k + 1)
    return q, big_q


def _poly_eval(coeffs, t: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _base_series_state(t: float) -> np.ndarray:
    q, big_q = _base_series_coeffs(_SERIES_ORDER)
    r_int = [0.0] + [c / (k + 1) for k, c in enumerate(q)]
    dq = [k * c for k, c in enumerate(big_q)][1:]
    return np.array([
        _poly_eval(q, t),
        _poly_eval(r_int, t),
        _poly_eval(big_q, t),
        _poly_eval(dq, t),
    ])


def _base_rhs(t, y):
    q, r, big_q, p = y
    return (
        -q + 2.0 * r / t + 2.0 * big_q / t**2,
        q,
        p,
        -p + 2.0 * q + 4.0 * big_q / t,
    )


_BASE_CACHE: dict[float, tuple[float, object]] = {}


def _base_dense(t_max: float, handover: float):
    cached = _BASE_CACHE.get(handover)
    if cached is not None and cached[0] >= t_max:
        return cached[1]
    target = max(float(t_max), 4.0 * handover, 2.0)
    sol = solve_ivp(
        _base_rhs, (handover, target), _base_series_state(handover),
        method="DOP853", rtol=_RTOL, atol=_ATOL, dense_output=True,
    )
    if not sol.success:
        raise RuntimeError(f"second-moment integration failed: {sol.message}")
    _BASE_CACHE[handover] = (target, sol.sol)
    return sol.sol


def _check_grid(t_grid) -> np.ndarray:
    grid = np.asarray(t_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-d array")
    if not np.all(np.isfinite(grid)) or grid[0] <= 0.0:
        raise ValueError("grid times must be positive and finite")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid times must be strictly increasing")
    return grid


def _base_state_vector(t: float, handover: float) -> np.ndarray:
    if t <= handover:
        return _base_series_state(t)
    return np.asarray(_base_dense(t, handover)(t))


def second_moment_continuized_base(t_grid, *, handover: float = _HANDOVER) -> np.ndarray:
    """E X(t)^2 of the base continuized process (start x(0)=1) on a grid."""
    grid = _check_grid(t_grid)
    dense = _base_dense(grid[-1], handover) if grid[-1] > handover else None
    out = np.empty_like(grid)
    for i, t in enumerate(grid):
        out[i] = _base_series_state(t)[0] if t <= handover else dense(t)[0]
    return out


def second_moment_state(t: float, *, handover: float = _HANDOVER) -> OdeMomentState:
    """Full base second-moment state (q, its integral, pair integral, rate)."""
    t = float(t)
    if t <= 0.0:
        raise ValueError("t must be positive")
    vec = _base_state_vector(t, handover)
    return OdeMomentState(
        t,
        ("x_sq", "x_sq_integral", "pair_integral", "pair_integral_rate"),
        tuple(float(v) for v in vec),
    )


def second_moment_residual(t: float, *, handover: float = _HANDOVER) -> float:
    """Relative residual of the reduced fourth-order equation for q.

    Eliminating the auxiliary states couples q to itself through

        t^2 q'''' + (2t^2+6t) q''' + (t^2+4t+6) q'' - (2t+6) q' + 2 q = 0.

    Derivatives of the computed solution are propagated in closed form from
    the first-order system (no divided differences), so the residual
    measures integration error only.
    """
    t = float(t)
    if t <= 0.0:
        raise ValueError("t must be positive")
    q, r, big_q, p = _base_state_vector(t, handover)
    dq = [q]
    dr = [r]
    dbq = [big_q]
    dp = [p]
    # m-th derivatives of 1/t and 1/t^2
    inv1 = [(-1) ** m * math.factorial(m) / t ** (m + 1) for m in range(5)]
    inv2 = [(-1) ** m * math.factorial(m + 1) / t ** (m + 2) for m in range(5)]
    for i in range(4):
        conv_r1 = sum(math.comb(i, j) * dr[j] * inv1[i - j] for j in range(i + 1))
        conv_q2 = sum(math.comb(i, j) * dbq[j] * inv2[i - j] for j in range(i + 1))
        conv_q1 = sum(math.comb(i, j) * dbq[j] * inv1[i - j] for j in range(i + 1))
        dq.append(-dq[i] + 2.0 * conv_r1 + 2.0 * conv_q2)
        dr.append(dq[i])
        dbq.append(dp[i])
        dp.append(-dp[i] + 2.0 * dq[i] + 4.0 * conv_q1)
    terms = (
        t**2 * dq[4],
        (2.0 * t**2 + 6.0 * t) * dq[3],
        (t**2 + 4.0 * t + 6.0) * dq[2],
        -(2.0 * t + 6.0) * dq[1],
        2.0 * dq[0],
    )
    scale = max(abs(v) for v in terms)
    return abs(sum(terms)) / scale


def product_moment_continuized(s: float, t: float, *, handover: float = _HANDOVER) -> float:
    """E X(s)X(t) for the base continuized process, 0 < s <= t.

    For fixed s the product moment solves the same second-order equation as
    the mean in t, so it is pinned by its diagonal value q(s) and diagonal
    slope, both of which the second-moment system supplies:

        c(s,t) = (1+t) { q(s)/(1+s)
                         + e^s [ (1+s) Q'(s) - s(2+s) q(s) ]
                           * int_s^t e^{-y}/(y(1+y)^2) dy }.

    The exponential prefactor is folded into the integral (y = s + u) so
    large s cannot overflow.
    """
    s = float(s)
    t = float(t)
    if not 0.0 < s <= t:
        raise ValueError("need 0 < s <= t")
    state = second_moment_state(s, handover=handover)
    q_s = state["x_sq"]
    if t == s:
        return q_s
    slope = (1.0 + s) * state["pair_integral_rate"] - s * (2.0 + s) * q_s
    upper = min(t - s, _TAIL_CUT)
    integral, _ = quad(
        lambda u: math.exp(-u) / ((s + u) * (1.0 + s + u) ** 2),
        0.0, upper, epsabs=1e-14, epsrel=1e-12, limit=200,
    )
    return (1.0 + t) * (q_s / (1.0 + s) + slope * integral)


# ------------------------------------------------------------ third moment
#
# Seven coupled states close the third-moment hierarchy; with
# S_j(t) = int_0^t X(u)^j du they are
#   s1_cubed = E S_1^3        x_s1_sq = E X S_1^2    x_sq_s1 = E X^2 S_1
#   x_cubed  = E X^3          s2_s1   = E S_2 S_1    s3      = E S_3
#   x_s2     = E X S_2
# and the rate equations follow from conditioning on a jump in (t, t+h):
#   s1_cubed' = 3 x_s1_sq
#   x_s1_sq'  = -x_s1_sq + 2 x_sq_s1 + (2/t) s1_cubed
#   x_sq_s1'  = -x_sq_s1 + x_cubed + (2/t) s2_s1 + (2/t^2) s1_cubed
#   x_cubed'  = -x_cubed + (2/t) s3 + (6/t^2) s2_s1
#   s2_s1'    = x_sq_s1 + x_s2
#   s3'       = x_cubed
#   x_s2'     = -x_s2 + x_cubed + (2/t) s2_s1

_THIRD_NAMES = ("s1_cubed", "x_s1_sq", "x_sq_s1", "x_cubed", "s2_s1", "s3", "x_s2")


def _third_series_coeffs(order: int):
    a0 = [0.0] * (order + 2)
    a1 = [0.0] * (order + 1)
    a2 = [0.0] * (order + 1)
    a3 = [0.0] * (order + 1)
    b2 = [0.0] * (order + 2)
    b3 = [0.0] * (order + 2)
    g1 = [0.0] * (order + 1)
    a3[0] = 1.0
    for k in range(1, order + 1):
        a0[k] = 3.0 * a1[k - 1] / k
        b2[k] = (a2[k - 1] + g1[k - 1]) / k
        b3[k] = a3[k - 1] / k
        g1[k] = (-g1[k - 1] + a3[k - 1] + 2.0 * b2[k]) / k
        a1[k] = (-a1[k - 1] + 2.0 * a2[k - 1] + 2.0 * a0[k]) / k
        a0[k + 1] = 3.0 * a1[k] / (k + 1)
        a2[k] = (-a2[k - 1] + a3[k - 1] + 2.0 * b2[k] + 2.0 * a0[k + 1]) / k
        b2[k + 1] = (a2[k] + g1[k]) / (k + 1)
        a3[k] = (-a3[k - 1] + 2.0 * b3[k] + 6.0 * b2[k + 1]) / k
    return a0, a1, a2, a3, b2, b3, g1


def _third_series_state(t: float) -> np.ndarray:
    coeffs = _third_series_coeffs(_SERIES_ORDER)
    return np.array([_poly_eval(c, t) for c in coeffs])


def _third_rhs(t, y):
    a0, a1, a2, a3, b2, b3, g1 = y
    return (
        3.0 * a1,
        -a1 + 2.0 * a2 + 2.0 * a0 / t,
        -a2 + a3 + 2.0 * b2 / t + 2.0 * a0 / t**2,
        -a3 + 2.0 * b3 / t + 6.0 * b2 / t**2,
        a2 + g1,
        a3,
        -g1 + a3 + 2.0 * b2 / t,
    )


_THIRD_CACHE: dict[float, tuple[float, object]] = {}


def _third_dense(t_max: float, handover: float):
    cached = _THIRD_CACHE.get(handover)
    if cached is not None and cached[0] >= t_max:
        return cached[1]
    target = max(float(t_max), 4.0 * handover, 2.0)
    sol = solve_ivp(
        _third_rhs, (handover, target), _third_series_state(handover),
        method="DOP853", rtol=_RTOL, atol=_ATOL, dense_output=True,
    )
    if not sol.success:
        raise RuntimeError(f"third-moment integration failed: {sol.message}")
    _THIRD_CACHE[handover] = (target, sol.sol)
    return sol.sol


def third_moment_continuized_base(t_grid, *, handover: float = _HANDOVER) -> np.ndarray:
    """E S_3(t) = E int_0^t X(u)^3 du of the base process on a grid.

    The integral is the smoothest member of the system (its rate is
    E X^3); its tail growth is t^4, one power above the third moment
    itself.
    """
    grid = _check_grid(t_grid)
    dense = _third_dense(grid[-1], handover) if grid[-1] > handover else None
    out = np.empty_like(grid)
    for i, t in enumerate(grid):
        out[i] = _third_series_state(t)[5] if t <= handover else dense(t)[5]
    return out


def third_moment_state(t: float, *, handover: float = _HANDOVER) -> OdeMomentState:
    """Full third-moment state; ``x_cubed`` is E X(t)^3."""
    t = float(t)
    if t <= 0.0:
        raise ValueError("t must be positive")
    if t <= handover:
        vec = _third_series_state(t)
    else:
        vec = np.asarray(_third_dense(t, handover)(t))
    return OdeMomentState(t, _THIRD_NAMES, tuple(float(v) for v in vec))


# ------------------------------------------------------------ generalized mean


def _weight_mean(w) -> float:
    mean = getattr(w, "mean", None)
    return float(w) if mean is None else float(mean)


def _weight_second_moment(w) -> float:
    second = getattr(w, "second_moment", None)
    return float(w) ** 2 if second is None else float(second)


def _generalized_series(alpha: float, beta: float, a: float, b: float, order: int):
    # regular solution about 0: m = sum c_k t^k with c_0 = 1 and
    # (k+1) c_{k+1} = c_k [ a*alpha/(alpha+k) + b*beta/(beta+k) - 1 ]
    c = [1.0]
    for k in range(order):
        gain = a * alpha / (alpha + k) + b * beta / (beta + k) - 1.0
        c.append(c[-1] * gain / (k + 1))
    return c


def generalized_mean_ode(alpha, beta, a_weight, b_weight, t_grid, *,
                         handover: float = _HANDOVER) -> np.ndarray:
    """E X(t) for the weighted process with power-law selection.

    The mean solves a third-order equation whose regular solution at the
    origin has m(0) = 1; random weights enter through their means only.
    Parameter pairs with equal exponents or exponents differing by an
    integer collapse two of the three indicial roots, so the Frobenius
    basis degenerates there; the regular series plus forward integration
    used here does not rely on that basis, and a warning marks such calls.
    """
    alpha = float(alpha)
    beta = float(beta)
    if not (alpha > 0.0 and beta > 0.0):
        raise ValueError("selection exponents must be positive")
    a = _weight_mean(a_weight)
    b = _weight_mean(b_weight)
    if a == 0.0 or b == 0.0:
        raise ValueError("weights must be nonzero")
    gap = abs(alpha - beta)
    if gap == 0.0 or abs(gap - round(gap)) < 1e-12:
        warnings.warn(
            "selection exponents equal or separated by an integer: the "
            "indicial roots collide and only the regular solution is used",
            RuntimeWarning,
            stacklevel=2,
        )
    grid = np.asarray(t_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-d array")
    if not np.all(np.isfinite(grid)) or grid[0] < 0.0:
        raise ValueError("grid times must be nonnegative and finite")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid times must be strictly increasing")

    series = _generalized_series(alpha, beta, a, b, _SERIES_ORDER)
    d1 = [k * c for k, c in enumerate(series)][1:]
    d2 = [k * c for k, c in enumerate(d1)][1:]

    x = 1.0 - a
    y = 1.0 - b

    def rhs(t, state):
        m, m1, m2 = state
        m3 = -(
            ((alpha + beta + 1.0) * t + t**2) * m2
            + (alpha * beta + (1.0 + beta * y + alpha * x) * t) * m1
            + (1.0 - a - b) * alpha * beta * m
        ) / t**2
        return (m1, m2, m3)

    out = np.empty_like(grid)
    head = grid <= handover
    for i in np.nonzero(head)[0]:
        out[i] = _poly_eval(series, grid[i])
    if not head.all():
        y0 = [
            _poly_eval(series, handover),
            _poly_eval(d1, handover),
            _poly_eval(d2, handover),
        ]
        sol = solve_ivp(
            rhs, (handover, grid[-1]), y0, method="DOP853",
            rtol=_RTOL, atol=_ATOL, dense_output=True,
        )
        if not sol.success:
            raise RuntimeError(f"mean integration failed: {sol.message}")
        for i in np.nonzero(~head)[0]:
            out[i] = sol.sol(grid[i])[0]
    return out


# ------------------------------------------------------------ growth classification


def sigma_roots(alpha, beta, a_weight, b_weight) -> tuple[complex, complex]:
    """Roots of the growth-exponent quadratic, sorted by real part descending.

    The mean grows like t**sigma where sigma solves

        sigma^2 + [beta(1-B) + alpha(1-A)] sigma + (1-A-B) alpha beta = 0,

    generally the root with the larger real part.
    """
    alpha = float(alpha)
    beta = float(beta)
    if not (alpha > 0.0 and beta > 0.0):
        raise ValueError("selection exponents must be positive")
    a = _weight_mean(a_weight)
    b = _weight_mean(b_weight)
    lin = beta * (1.0 - b) + alpha * (1.0 - a)
    const = (1.0 - a - b) * alpha * beta
    disc = complex(lin * lin - 4.0 * const) ** 0.5
    r1 = (-lin + disc) / 2.0
    r2 = (-lin - disc) / 2.0
    pair = sorted((r1, r2), key=lambda z: (z.real, z.imag), reverse=True)
    return (pair[0], pair[1])


@dataclass(frozen=True)
class GrowthReport:
    """Growth and oscillation classification of the generalized mean.

    ``second_moment_exponent`` is populated only on the diagonal
    alpha == beta, where the second-moment analysis applies; elsewhere it
    is None rather than an extrapolation.  When the two sigma roots
    coincide the growth exponent may carry a logarithmic factor, flagged
    in ``region_label`` without asserting the factor.
    """

    sigma_roots: tuple[complex, complex]
    oscillatory: bool
    mean_growth: bool
    second_moment_exponent: float | None
    region_label: str

    @property
    def repeated_sigma(self) -> bool:
        return self.sigma_roots[0] == self.sigma_roots[1]


def classify_regions(alpha, beta, a_weight, b_weight) -> GrowthReport:
    """Classify the generalized process mean by its sigma roots.

    Oscillation happens exactly when the quadratic's discriminant

        f = alpha^2 x^2 + 2 alpha beta x y + beta^2 y^2
            - 4 alpha beta (x + y - 1),     x = 1-A, y = 1-B,

    is negative; growth when the dominant root has positive real part.
    Random weights are classified through their means; the second-moment
    exponent additionally needs E A^2 + E B^2.
    """
    alpha = float(alpha)
    beta = float(beta)
    if not (alpha > 0.0 and beta > 0.0):
        raise ValueError("selection exponents must be positive")
    a = _weight_mean(a_weight)
    b = _weight_mean(b_weight)
    x = 1.0 - a
    y = 1.0 - b
    f = (alpha * x) ** 2 + 2.0 * alpha * beta * x * y + (beta * y) ** 2 \
        - 4.0 * alpha * beta * (x + y - 1.0)
    roots = sigma_roots(alpha, beta, a, b)
    oscillatory = f < 0.0
    growing = roots[0].real > 0.0
    exponent = None
    if alpha == beta:
        a2 = _weight_second_moment(a_weight)
        b2 = _weight_second_moment(b_weight)
        exponent = alpha * max(a2 + b2 - 1.0, 2.0 * (a + b - 1.0))
    label = ("oscillatory" if oscillatory else "real") + \
        ("-growing" if growing else "-decaying")
    return GrowthReport(roots, oscillatory, growing, exponent, label)


def named_constants() -> dict[str, float]:
    """Exact limiting constants of the base processes, at float precision."""
    k_discrete = math.sinh(math.pi) / (2.0 * math.pi)
    return {
        "K_discrete_base": k_discrete,
        "K_continuized_base": math.cosh(math.pi * math.sqrt(7.0) / 2.0) / (4.0 * math.pi),
        "EM2_discrete_base": k_discrete / 6.0,
    }
