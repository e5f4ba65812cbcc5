"""Exact (non-Monte-Carlo) moments of the discrete adding processes.

Everything here iterates coupled expectation recursions forward.  The coupled
first-order systems are the primary computation path; reduced single
high-order recurrences appear only as cross-checks (see asymptotics for
their coefficient fixtures).  Float mode uses 64-bit arithmetic, rational
mode (``exact=True``) uses ``fractions.Fraction`` and is intended for
index ranges up to a few hundred where it bounds float drift.

Index conventions, for the process X_{n+1} = X_{U(n)} + X_{V(n)} (or its
lazy variant firing with probability p):

    m_n = E X_n          q_n = E X_n^2        p_n = E S_n^2
    w_n = E X_n S_{n-1}  t2_n = sum_{k<=n} q_k
    t_n = E X_n^3        f_n = E X_n^4        c_{m,n} = E X_m X_n
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import backends
from .process import DiscreteInit


@dataclass(frozen=True)
class MomentSeries:
    kind: str  # mean | second | third | fourth | product
    indices: tuple[int, ...]
    values: tuple
    method: str  # closed_form | forward_system | rational_oracle | enumeration
    init: tuple
    p: float


def _as_init(init) -> DiscreteInit:
    if isinstance(init, DiscreteInit):
        return init
    return DiscreteInit(tuple(float(v) for v in init))


def _one(exact: bool):
    return Fraction(1) if exact else 1.0


# ---------------------------------------------------------------- means


def mean_exact(init, p: float, n: int, *, exact: bool = False):
    """E X_n by forward iteration of m_{k+1} = nu m_k + (2p/k) sum m_j."""
    init = _as_init(init)
    r = init.r
    if n < r:
        raise ValueError(f"n={n} precedes the initial history (r={r})")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    if exact:
        vals = [Fraction(x) for x in init.values]
        nu = 1 - Fraction(p)
        two_p = 2 * Fraction(p)
    else:
        vals = list(init.values)
        nu = 1.0 - p
        two_p = 2.0 * p
    if n < len(vals):
        return vals[n - 1]
    m = vals[-1]
    s = sum(vals)
    for k in range(r, n):
        m = nu * m + two_p * s / k
        s += m
    return m


def mean_closed_form(init, p: float, n: int) -> float:
    """Closed-form E X_n; cross-check for mean_exact.

    p = 1 uses the linear law 2 n s_r / (r(r+1)); p < 1 evaluates the
    Casoratian-sum solution of the second-order difference equation.
    """
    init = _as_init(init)
    r = init.r
    if n < r:
        raise ValueError(f"n={n} precedes the initial history (r={r})")
    if n <= r:
        return init.values[n - 1]
    if p >= 1.0:
        return 2.0 * n * init.s_r / (r * (r + 1))
    nu = 1.0 - p
    x_r = init.values[-1]
    c = 2.0 * init.s_r * (nu + p * r) / r - (1.0 + nu + p * r) * x_r
    # nu^{k-1}/nu^{r-1} folded together to avoid underflow at large k
    acc = 0.0
    for k in range(r, n):
        acc += nu ** (k - r) / (k * (nu + p * k) * (1.0 + p * k))
    return (nu + p * n) * (x_r / (nu + p * r) + c * p * r * acc)


def mean_sequence(init, p: float, n_max: int) -> np.ndarray:
    """E X_n for n = 1..n_max as one forward pass."""
    init = _as_init(init)
    r = init.r
    if n_max < r:
        raise ValueError("n_max must reach the initial history")
    out = np.empty(n_max, dtype=np.float64)
    out[:r] = init.values
    m = init.values[-1]
    s = init.s_r
    nu = 1.0 - p
    for k in range(r, n_max):
        m = nu * m + 2.0 * p * s / k
        s += m
        out[k] = m
    return out


# -------------------------------------------------------- second moments


def second_moment_exact(init, p: float, n: int, *, exact: bool = False):
    """(q_n, p_n, w_n, t_n) for the p-adding process (p = 1 is the base)."""
    init = _as_init(init)
    r = init.r
    if n < r:
        raise ValueError(f"n={n} precedes the initial history (r={r})")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    if not exact:
        row = backends.kernels().second_moment_forward(init.values, p, [n])[0]
        q, w, t, ps = row
        return float(q), float(ps), float(w), float(t)
    xs = [Fraction(x) for x in init.values]
    pf = Fraction(p)
    nu = 1 - pf
    s_r = sum(xs)
    q = xs[-1] ** 2
    w = xs[-1] * (s_r - xs[-1])
    t = sum(x * x for x in xs)
    ps = s_r**2
    for k in range(r, n):
        q1 = nu * q + pf * (2 * t / k + 2 * ps / k**2)
        w1 = nu * (w + q) + 2 * pf * ps / k
        t += q1
        ps = ps + 2 * w1 + q1
        q, w = q1, w1
    return q, ps, w, t


def second_moment_sequence(init, p: float, n_max: int) -> np.ndarray:
    """q_n for n = r..n_max (one row per index, via the kernel lane)."""
    init = _as_init(init)
    cps = np.arange(init.r, n_max + 1, dtype=np.int64)
    rows = backends.kernels().second_moment_forward(init.values, p, cps)
    return rows[:, 0]


def K_closed_form(init) -> float:
    """Limit of q_n / n^2 for the base process, in closed form."""
    init = _as_init(init)
    r = init.r
    t_r = sum(x * x for x in init.values)
    x_r = init.values[-1]
    bracket = 2.0 * (r + 1) * (t_r / r + init.s_r**2 / r**2) - (r + 2) * x_r**2
    return math.sinh(math.pi) / (2.0 * math.pi * casoratian_base(r)) * bracket


def K_operational(p: float, init=(1.0,),
                  checkpoints=(250_000, 500_000, 1_000_000)) -> float:
    """Limit of q_n / n^2 for the p-adding process.

    No closed form exists for p < 1; the limit is defined operationally by
    Richardson extrapolation of q_n/n^2 over a doubling checkpoint ladder
    (the leading correction is O(1/n)).
    """
    init = _as_init(init)
    n1, n2, n3 = checkpoints
    if not (n2 == 2 * n1 and n3 == 2 * n2):
        raise ValueError("checkpoints must double: (n, 2n, 4n)")
    rows = backends.kernels().second_moment_forward(init.values, p, [n1, n2, n3])
    v = rows[:, 0] / np.asarray(checkpoints, dtype=np.float64) ** 2
    k1 = 2.0 * v[1] - v[0]
    k2 = 2.0 * v[2] - v[1]
    return (4.0 * k2 - k1) / 3.0


def casoratian_base(n: int) -> float:
    """W_n of the base second-moment difference equation; W_0 = 1."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    w = 1.0
    for k in range(n):
        w *= ((k + 2) ** 2 + 1) / (k + 1) ** 2
    return w


def casoratian_closed_form(n: int) -> float:
    """Product form of W_n; cross-check for the recursion."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    acc = 0.5 * ((n + 1) ** 2 + 1)
    for k in range(1, n + 1):
        acc *= 1.0 + 1.0 / k**2
    return acc


# --------------------------------------------------- third/fourth moments
#
# Both systems below are for the base process started from the single value
# x_1 = 1.  States follow
#     a^{[j,k]}_n = E{X_n^j S_{n-1}^k}
#     b^{[j,k]}_n = E{(sum_{v<=n} X_v^j) S_n^k}
#     c2_n        = E{(sum_{v<=n} X_v^2)^2}
# with the initial values forced by S_0 = 0, S_1 = X_1 = 1.


def _third_states(limit: int, one):
    zero = one - one
    a03 = a12 = a21 = zero
    a30 = b21 = b30 = one
    yield 1, a30
    for k in range(1, limit):
        a03n = a03 + 3 * (a12 + a21) + a30
        a12n = 2 * a03n / k
        a21n = 2 * a03n / k**2 + 2 * b21 / k
        a30n = 2 * b30 / k + 6 * b21 / k**2
        b21 = b21 * (k + 2) / k + a21n + a30n
        b30 = b30 + a30n
        a03, a12, a21, a30 = a03n, a12n, a21n, a30n
        yield k + 1, a30


def third_moment_exact(n: int, *, method: str = "system", exact: bool = False):
    """t_n = E X_n^3 for the base process, init = [1]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if method == "reduced":
        return _third_moment_reduced(n, exact)
    if method != "system":
        raise ValueError("method must be 'system' or 'reduced'")
    value = None
    for _, value in _third_states(n, _one(exact)):
        pass
    return value


def third_moment_sequence(n_max: int) -> np.ndarray:
    out = np.empty(n_max, dtype=np.float64)
    for idx, value in _third_states(n_max, 1.0):
        out[idx - 1] = value
    return out


def _third_moment_reduced(n: int, exact: bool):
    # single reduced third-order recurrence, iterated from t_1, t_2, t_3
    one = _one(exact)
    t = [one, 8 * one, 63 * one / 2]
    if n <= 3:
        return t[n - 1]
    for k in range(1, n - 2):
        c3 = (4 * k - 3) * (k + 1) ** 2 * (k + 2) ** 2
        c2 = 3 * (4 * k**3 + 17 * k**2 + 14 * k - 21) * (k + 1) ** 2
        c1 = 12 * k**5 + 87 * k**4 + 234 * k**3 + 177 * k**2 - 84 * k - 126
        c0 = (k**3 + 5 * k**2 + 11 * k - 5) * (4 * k + 1) * (k + 3)
        t.append((c2 * t[-1] - c1 * t[-2] + c0 * t[-3]) / c3)
        del t[0]
    return t[-1]


def _fourth_states(limit: int, one):
    zero = one - one
    a04 = a13 = a22 = a31 = zero
    a40 = b22 = b31 = b40 = c2 = one
    yield 1, a40
    for k in range(1, limit):
        a04n = a04 + 4 * a13 + 6 * a22 + 4 * a31 + a40
        a40n = 2 * b40 / k + 8 * b31 / k**2 + 6 * c2 / k**2
        a13n = 2 * a04n / k
        a22n = 2 * b22 / k + 2 * a04n / k**2
        a31n = 2 * b31 / k + 6 * b22 / k**2
        b22n = b22 * (k**2 + 4 * k + 2) / k**2 + 2 * c2 / k + a22n + 2 * a31n + a40n
        c2 = c2 * (k + 4) / k + 4 * b22 / k**2 + a40n
        b31 = b31 * (k + 2) / k + a31n + a40n
        b40 = b40 + a40n
        b22 = b22n
        a04, a13, a22, a31, a40 = a04n, a13n, a22n, a31n, a40n
        yield k + 1, a40


def fourth_moment_exact(n: int, *, exact: bool = False):
    """f_n = E X_n^4 for the base process, init = [1]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    value = None
    for _, value in _fourth_states(n, _one(exact)):
        pass
    return value


def fourth_moment_sequence(n_max: int) -> np.ndarray:
    out = np.empty(n_max, dtype=np.float64)
    for idx, value in _fourth_states(n_max, 1.0):
        out[idx - 1] = value
    return out


# -------------------------------------------------------- product moments


def product_moment_exact(init, p: float, m: int, n: int, *, exact: bool = False):
    """c_{m,n} = E X_m X_n for r <= m <= n.

    Iterates c_{m,k+1} = nu c_{m,k} + (2p/k) E(X_m S_k) forward in k,
    carrying g_k = E(X_m S_k) alongside (g_m = w_m + q_m).
    """
    init = _as_init(init)
    if m < init.r:
        raise ValueError("m precedes the initial history")
    if n < m:
        raise ValueError("need m <= n")
    q_m, _, w_m, _ = second_moment_exact(init, p, m, exact=exact)
    if exact:
        nu = 1 - Fraction(p)
        two_p = 2 * Fraction(p)
    else:
        nu = 1.0 - p
        two_p = 2.0 * p
    c = q_m
    g = w_m + q_m
    for k in range(m, n):
        c = nu * c + two_p * g / k
        g += c
    return c


def product_moment_profile(init, p: float, m_values, n: int) -> np.ndarray:
    """c_{m,n} for several m at fixed n (one iteration per m)."""
    return np.array(
        [product_moment_exact(init, p, int(m), n) for m in m_values],
        dtype=np.float64,
    )


# ------------------------------------------------------ enumeration oracle

_ORACLE_BUDGET = 10_000_000


@dataclass(frozen=True)
class EnumeratedDistribution:
    """Equiprobable exhaustive outcomes of the base process.

    Every (U(k), V(k)) choice sequence is equally likely, so the law is a
    uniform measure over ``paths``; all moments are exact rationals.
    """

    paths: tuple[tuple[Fraction, ...], ...]

    def expectation(self, fn) -> Fraction:
        total = sum(fn(path) for path in self.paths)
        return Fraction(total, len(self.paths))

    def moment(self, index: int, power: int = 1) -> Fraction:
        return self.expectation(lambda path: path[index - 1] ** power)

    def product_moment(self, m: int, n: int) -> Fraction:
        return self.expectation(lambda path: path[m - 1] * path[n - 1])

    def partial_sum_moment(self, index: int, power: int = 1) -> Fraction:
        return self.expectation(lambda path: sum(path[:index]) ** power)

    def mixed_xs_moment(self, index: int) -> Fraction:
        # E X_n S_{n-1}, the w_n state of the second-moment system
        return self.expectation(
            lambda path: path[index - 1] * sum(path[: index - 1])
        )


def enumerate_oracle(init, n_max: int) -> EnumeratedDistribution:
    """Brute-force law of (X_1..X_{n_max}) for the base process."""
    init = _as_init(init)
    r = init.r
    if n_max < r:
        raise ValueError("n_max must reach the initial history")
    budget = 1
    for k in range(r, n_max):
        budget *= k * k
        if budget > _ORACLE_BUDGET:
            raise ValueError(
                f"enumeration needs {budget}+ outcomes, over the "
                f"{_ORACLE_BUDGET} budget"
            )
    paths = [tuple(Fraction(x) for x in init.values)]
    for k in range(r, n_max):
        grown = []
        for path in paths:
            for u in range(k):
                xu = path[u]
                for v in range(k):
                    grown.append(path + (xu + path[v],))
        paths = grown
    return EnumeratedDistribution(tuple(paths))
