"""Pure-Python/numpy kernel lane.

Mirrors ``ulamadd._kernels`` (the Cython lane) exactly.  Bit-identity between
the lanes rests on two facts: both consume the same Philox stream per
trajectory, and ``Generator.random(size=k)`` yields the same k doubles as k
successive ``next_double`` calls.  The per-step draw order is part of the
kernel contract:

* discrete, p == 1:      (u, v) per step
* discrete, p < 1:       (j, u, v) per step, u and v consumed even when the
                         update does not fire
* continuized, per jump: (w, u, v[, a][, b]); the wait draw w that overshoots
                         t_max is consumed, its u/v are not
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right

import numpy as np

_MASK64 = (1 << 64) - 1


def philox_generator(seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator for trajectory `stream` under `seed`."""
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def discrete_path(x0, p, a, b, n_max, seed, stream):
    r = len(x0)
    values = list(map(float, x0))
    if n_max > r:
        rng = philox_generator(seed, stream)
        per = 2 if p >= 1.0 else 3
        draws = rng.random(per * (n_max - r)).tolist()
        i = 0
        if p >= 1.0:
            for n in range(r, n_max):
                iu = int(n * draws[i])
                iv = int(n * draws[i + 1])
                i += 2
                if iu >= n:
                    iu = n - 1
                if iv >= n:
                    iv = n - 1
                values.append(a * values[iu] + b * values[iv])
        else:
            for n in range(r, n_max):
                j = draws[i]
                iu = int(n * draws[i + 1])
                iv = int(n * draws[i + 2])
                i += 3
                if j < p:
                    if iu >= n:
                        iu = n - 1
                    if iv >= n:
                        iv = n - 1
                    values.append(values[iu] + values[iv])
                else:
                    values.append(values[n - 1])
    return np.asarray(values, dtype=np.float64)


def discrete_ensemble_snapshots(x0, p, a, b, grid, reps, seed, stream_offset=0):
    """Per-trajectory state snapshots at the requested step indices.

    Returns an array of shape (reps, len(grid), 6) with columns
    (X_n, S_{n-1}, S_n, XU_n, XV_n, jumped) recorded at each grid step n:
    the state just before step n plus the values selected by the step-n draw.
    XU/XV are NaN when a p<1 step does not fire.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    r = len(x0)
    grid = np.asarray(grid, dtype=np.int64)
    n_last = int(grid.max())
    per = 2 if p >= 1.0 else 3
    n_steps = n_last - r + 1
    out = np.empty((reps, len(grid), 6), dtype=np.float64)

    # chunk across trajectories; each trajectory still owns one Philox stream
    chunk = max(16, min(reps, int(1.5e7 / max(1, per * n_steps))))
    grid_pos = {int(n): g for g, n in enumerate(grid)}

    for lo in range(0, reps, chunk):
        hi = min(lo + chunk, reps)
        c = hi - lo
        rows = np.arange(c)
        vals = np.empty((c, n_last + 1), dtype=np.float64)
        vals[:, :r] = x0
        draws = np.empty((c, per * n_steps), dtype=np.float64)
        for k in range(lo, hi):
            draws[k - lo] = philox_generator(seed, k + stream_offset).random(
                per * n_steps
            )
        s_cur = np.full(c, x0.sum())
        s_prev = s_cur - x0[-1]
        i = 0
        for n in range(r, n_last + 1):
            if p >= 1.0:
                u = draws[:, i]
                v = draws[:, i + 1]
                i += 2
                iu = np.minimum((n * u).astype(np.int64), n - 1)
                iv = np.minimum((n * v).astype(np.int64), n - 1)
                xu = vals[rows, iu]
                xv = vals[rows, iv]
                x_new = a * xu + b * xv
                jumped = None
            else:
                j = draws[:, i] < p
                u = draws[:, i + 1]
                v = draws[:, i + 2]
                i += 3
                iu = np.minimum((n * u).astype(np.int64), n - 1)
                iv = np.minimum((n * v).astype(np.int64), n - 1)
                xu_raw = vals[rows, iu]
                xv_raw = vals[rows, iv]
                x_new = np.where(j, xu_raw + xv_raw, vals[:, n - 1])
                xu = np.where(j, xu_raw, np.nan)
                xv = np.where(j, xv_raw, np.nan)
                jumped = j
            g = grid_pos.get(n)
            if g is not None:
                out[lo:hi, g, 0] = vals[:, n - 1]
                out[lo:hi, g, 1] = s_prev
                out[lo:hi, g, 2] = s_cur
                out[lo:hi, g, 3] = xu
                out[lo:hi, g, 4] = xv
                out[lo:hi, g, 5] = 1.0 if jumped is None else jumped
            vals[:, n] = x_new
            s_prev = s_cur
            s_cur = s_cur + x_new
    return out


def second_moment_forward(x0, p, checkpoints):
    """Forward iteration of the coupled second-moment system.

    State (q_n, w_n, t_n, p_n) = (E X_n^2, E X_n S_{n-1}, sum q_k, E S_n^2);
    rows returned at each checkpoint index n.
    """
    x0 = [float(v) for v in x0]
    r = len(x0)
    s_r = sum(x0)
    q = x0[-1] ** 2
    w = x0[-1] * (s_r - x0[-1])
    t = sum(v * v for v in x0)
    ps = s_r**2
    cps = sorted(int(n) for n in checkpoints)
    if cps[0] < r:
        raise ValueError("checkpoints must be >= the initial history length")
    out = np.empty((len(cps), 4), dtype=np.float64)
    nu = 1.0 - p
    ci = 0
    n = r
    while True:
        while ci < len(cps) and cps[ci] == n:
            out[ci] = (q, w, t, ps)
            ci += 1
        if ci == len(cps):
            break
        q1 = nu * q + p * (2.0 / n * t + 2.0 / (n * n) * ps)
        w1 = nu * (w + q) + 2.0 * p / n * ps
        t += q1
        ps = ps + 2.0 * w1 + q1
        q, w = q1, w1
        n += 1
    return out


def _path_value(breaks, vals, s):
    if s <= 0.0:
        return vals[0]
    if s >= breaks[-1]:
        return vals[-1]
    return vals[bisect_left(breaks, s)]


def _path_integral(breaks, vals, t):
    t = min(t, breaks[-1])
    if t <= 0.0:
        return 0.0
    acc = 0.0
    left = 0.0
    for b, v in zip(breaks, vals):
        if t <= b:
            return acc + v * (t - left)
        acc += v * (b - left)
        left = b
    return acc


class _DrawBuffer:
    """Sequential draws from one Philox stream, prefetched in blocks."""

    def __init__(self, seed, stream, hint):
        self.rng = philox_generator(seed, stream)
        self.block = self.rng.random(max(64, hint)).tolist()
        self.ptr = 0

    def next(self):
        if self.ptr == len(self.block):
            self.block = self.rng.random(256).tolist()
            self.ptr = 0
        v = self.block[self.ptr]
        self.ptr += 1
        return v


def _continuized_jumps(breaks, vals, tau, t_max, alpha, beta, wa, wb, buf, on_jump):
    """Shared jump loop; calls on_jump(t_prev, t_next, x_prev, x_new)."""
    a_rand, a_v1, a_v2, a_p1 = wa
    b_rand, b_v1, b_v2, b_p1 = wb
    inv_alpha = 1.0 / alpha
    inv_beta = 1.0 / beta
    jt: list[float] = []
    jv: list[float] = []
    t_cur = tau
    x_cur = vals[-1]
    while True:
        wait = -math.log1p(-buf.next())
        if wait <= 0.0:
            wait = 5e-324  # keep jump times strictly increasing
        t_next = t_cur + wait
        if t_next > t_max:
            on_jump(t_cur, t_max, x_cur, None)
            break
        su = t_next * buf.next() ** inv_alpha
        sv = t_next * buf.next() ** inv_beta
        if su <= tau:
            xu = _path_value(breaks, vals, su)
        else:
            k = bisect_right(jt, su) - 1
            xu = jv[k] if k >= 0 else vals[-1]
        if sv <= tau:
            xv = _path_value(breaks, vals, sv)
        else:
            k = bisect_right(jt, sv) - 1
            xv = jv[k] if k >= 0 else vals[-1]
        aw = (a_v1 if buf.next() < a_p1 else a_v2) if a_rand else a_v1
        bw = (b_v1 if buf.next() < b_p1 else b_v2) if b_rand else b_v1
        x_new = aw * xu + bw * xv
        on_jump(t_cur, t_next, x_cur, x_new)
        jt.append(t_next)
        jv.append(x_new)
        t_cur = t_next
        x_cur = x_new
    return jt, jv


def continuized_path(breaks, vals, tau, t_max, alpha, beta, wa, wb, seed, stream):
    breaks = list(map(float, breaks))
    vals = list(map(float, vals))
    buf = _DrawBuffer(seed, stream, int(5 * (t_max - tau)) + 64)
    jt, jv = _continuized_jumps(
        breaks, vals, tau, t_max, alpha, beta, wa, wb, buf, lambda *args: None
    )
    return np.asarray(jt, dtype=np.float64), np.asarray(jv, dtype=np.float64)


def continuized_ensemble_snapshots(
    breaks, vals, tau, t_max, alpha, beta, wa, wb, t_grid, reps, seed, stream_offset=0
):
    """Per-trajectory (X(t), S(t), jump count) at each grid time.

    S(t) = ∫_0^t X(u) du including the initial-path segment.
    """
    breaks = list(map(float, breaks))
    vals = list(map(float, vals))
    t_grid = [float(t) for t in t_grid]
    if any(t2 <= t1 for t1, t2 in zip(t_grid, t_grid[1:])):
        raise ValueError("t_grid must be strictly increasing")
    if t_grid and t_grid[-1] > t_max:
        raise ValueError("t_grid must lie within (0, t_max]")
    out = np.empty((reps, len(t_grid), 3), dtype=np.float64)
    hint = int(5 * (t_max - tau)) + 64
    init_total = _path_integral(breaks, vals, tau)

    for k in range(reps):
        buf = _DrawBuffer(seed, k + stream_offset, hint)
        state = {"g": 0, "s": init_total, "n": 0}

        # flush grid times inside the initial path
        while state["g"] < len(t_grid) and t_grid[state["g"]] <= tau:
            tg = t_grid[state["g"]]
            out[k, state["g"]] = (
                _path_value(breaks, vals, tg),
                _path_integral(breaks, vals, tg),
                0.0,
            )
            state["g"] += 1

        def on_jump(t_prev, t_next, x_prev, x_new, k=k, state=state):
            g = state["g"]
            while g < len(t_grid) and t_grid[g] < t_next:
                tg = t_grid[g]
                out[k, g] = (x_prev, state["s"] + x_prev * (tg - t_prev), state["n"])
                g += 1
            state["s"] += x_prev * (t_next - t_prev)
            if x_new is None:
                # closing segment: t_next is t_max and no jump fires there
                if g < len(t_grid) and t_grid[g] == t_next:
                    out[k, g] = (x_prev, state["s"], state["n"])
                    g += 1
            else:
                state["n"] += 1
                if g < len(t_grid) and t_grid[g] == t_next:
                    out[k, g] = (x_new, state["s"], state["n"])
                    g += 1
            state["g"] = g

        _continuized_jumps(breaks, vals, tau, t_max, alpha, beta, wa, wb, buf, on_jump)
    return out
