"""Growth exponents of linear recurrences with polynomial coefficients.

A recurrence is stored as sum_j P_j(n) y_{n+j} = 0 where shift j counts up
from the lowest index appearing.  Trial solutions n^rho delta^n yield delta
as a root of the leading characteristic form and rho as a root of the first
series order (in 1/n) that does not vanish identically.

Bundled fixture recurrences live in ``ulamadd/fixtures/*.json`` with schema
{"start_index": int, "coefficients": [[int, ...], ...]}: outer index is the
shift j, inner entries are ascending powers of n.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

FIXTURES = (
    "second_moment_base",
    "third_moment_base",
    "fourth_moment_base",
)

_ZERO_REL = 1e-9  # series coefficient treated as identically zero below this
_CLUSTER_TOL = 1e-8


@dataclass(frozen=True)
class RecurrencePoly:
    """sum_j P_j(n) y_{n+j} = 0, asserted for n >= start_index."""

    coefficients: tuple[tuple[float, ...], ...]
    start_index: int = 1

    def __post_init__(self):
        if len(self.coefficients) < 2:
            raise ValueError("need at least two coefficient polynomials")
        for poly in (self.coefficients[0], self.coefficients[-1]):
            if not any(c != 0 for c in poly):
                raise ValueError("leading/trailing coefficient is identically zero")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def degree(self) -> int:
        return max(len(poly) - 1 for poly in self.coefficients)

    def coeff(self, j: int, power: int) -> float:
        poly = self.coefficients[j]
        return float(poly[power]) if power < len(poly) else 0.0

    def eval_coeff(self, j: int, n: float) -> float:
        acc = 0.0
        for c in reversed(self.coefficients[j]):
            acc = acc * n + c
        return acc

    def iterate(self, initial, count: int) -> np.ndarray:
        """Forward-iterate from y_{start_index}..y_{start_index+order-1}."""
        k = self.order
        if len(initial) != k:
            raise ValueError(f"need exactly {k} initial values")
        out = np.empty(count, dtype=np.float64)
        out[:k] = initial
        for i in range(count - k):
            n = self.start_index + i
            lead = self.eval_coeff(k, n)
            if lead == 0.0:
                raise ZeroDivisionError(f"leading coefficient vanishes at n={n}")
            acc = 0.0
            for j in range(k):
                acc += self.eval_coeff(j, n) * out[i + j]
            out[i + k] = -acc / lead
        return out


def _cluster(roots, tol: float):
    ordered = sorted(roots, key=lambda z: (round(z.real, 12), round(z.imag, 12)))
    merged: list[list[complex]] = []
    for z in ordered:
        if merged and abs(z - merged[-1][0]) <= tol:
            merged[-1].append(z)
        else:
            merged.append([z])
    out = []
    for group in merged:
        center = sum(group) / len(group)
        out.extend([center] * len(group))
    return tuple(out)


def _poly_roots(ascending) -> tuple[complex, ...]:
    coeffs = np.asarray(ascending, dtype=complex)
    nz = np.nonzero(np.abs(coeffs) > 0)[0]
    if len(nz) == 0:
        raise ValueError("zero polynomial has no roots")
    coeffs = coeffs[: nz[-1] + 1]
    if len(coeffs) == 1:
        return ()
    roots = np.roots(coeffs[::-1])
    return _cluster([complex(z) for z in roots], _CLUSTER_TOL)


def characteristic_delta(rec: RecurrencePoly) -> tuple[complex, ...]:
    """Roots delta (with multiplicity) of the leading characteristic form."""
    d = rec.degree
    lead = [rec.coeff(j, d) for j in range(rec.order + 1)]
    if not any(lead):
        raise ValueError("leading form is identically zero; reduce the degree")
    return _poly_roots(lead)


def _binom_poly(i: int) -> np.ndarray:
    # rho-choose-i as an ascending coefficient vector in rho
    poly = np.array([1.0])
    for s in range(i):
        poly = np.convolve(poly, np.array([-float(s), 1.0]))
    return poly / math.factorial(i)


def polynomial_rho(rec: RecurrencePoly, delta: complex,
                   max_depth: int | None = None) -> tuple[complex, ...]:
    """Roots rho of the first non-vanishing series order for n^rho delta^n.

    Substituting y_n = n^rho delta^n and expanding (1+j/n)^rho in powers of
    1/n groups the recurrence as n^(D-l) terms; order l=0 vanishes because
    delta is a characteristic root, and the first l with a nonzero
    rho-polynomial supplies the exponents.
    """
    d = rec.degree
    k = rec.order
    if max_depth is None:
        max_depth = d + k + 2
    scale = max(abs(rec.coeff(j, i)) for j in range(k + 1)
                for i in range(len(rec.coefficients[j]))) or 1.0
    binoms = [_binom_poly(i) for i in range(max_depth + 1)]
    for level in range(1, max_depth + 1):
        # T_level(rho) = sum_j delta^j sum_i C(rho,i) j^i c_{j, d-level+i}
        t_poly = np.zeros(level + 1, dtype=complex)
        for j in range(k + 1):
            dj = delta**j
            for i in range(level + 1):
                c = rec.coeff(j, d - level + i) if d - level + i >= 0 else 0.0
                if c == 0.0:
                    continue
                contrib = dj * (float(j) ** i) * c * binoms[i]
                t_poly[: len(contrib)] += contrib
        if np.max(np.abs(t_poly)) > _ZERO_REL * scale:
            return _poly_roots(t_poly)
    raise ValueError(
        f"series coefficients vanish through depth {max_depth}; "
        "degenerate case beyond the configured expansion"
    )


@dataclass(frozen=True)
class ExponentEstimate:
    slope: float
    stderr: float
    n_points: int


def empirical_exponent(values, tail_fraction: float = 0.2,
                       indices=None) -> ExponentEstimate:
    """Log-log least-squares slope over the tail of a positive series."""
    vals = np.asarray(values, dtype=np.float64)
    if indices is None:
        idx = np.arange(1, len(vals) + 1, dtype=np.float64)
    else:
        idx = np.asarray(indices, dtype=np.float64)
        if idx.shape != vals.shape:
            raise ValueError("indices and values must align")
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError("tail_fraction must lie in (0,1)")
    start = int(len(vals) * (1.0 - tail_fraction))
    tail_v = vals[start:]
    tail_i = idx[start:]
    if len(tail_v) < 20:
        raise ValueError("need at least 20 tail points")
    if np.any(tail_v <= 0.0):
        raise ValueError("tail values must be positive")
    x = np.log(tail_i)
    y = np.log(tail_v)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ y) / sxx
    resid = y - y.mean() - slope * xc
    dof = max(len(x) - 2, 1)
    stderr = math.sqrt(float(resid @ resid) / dof / sxx)
    return ExponentEstimate(slope, stderr, len(x))


def load_fixture(name: str) -> RecurrencePoly:
    if name not in FIXTURES:
        raise ValueError(f"unknown fixture {name!r}; have {FIXTURES}")
    payload = resources.files("ulamadd.fixtures").joinpath(f"{name}.json")
    data = json.loads(payload.read_text())
    return RecurrencePoly(
        tuple(tuple(float(c) for c in poly) for poly in data["coefficients"]),
        start_index=int(data.get("start_index", 1)),
    )


def p_adding_second_moment_recurrence(p: float) -> RecurrencePoly:
    """Fourth-order recurrence satisfied by q_n of the lazy process.

    Coefficients are polynomial in p, so this fixture is built in code
    rather than stored as integer JSON.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    nu = 1.0 - p
    return RecurrencePoly(
        (
            (0.0, 0.0, nu * nu),
            (-3.0 * nu, -nu * (2.0 * p + 6.0), -nu * (4.0 - 2.0 * p)),
            (15.0 + 2.0 * p * p, 18.0 - 8.0 * p - 2.0 * p * p,
             6.0 - 6.0 * p + p * p),
            (-3.0 * p - 21.0, 4.0 * p - 18.0, 2.0 * p - 4.0),
            (9.0, 6.0, 1.0),
        ),
        start_index=1,
    )
