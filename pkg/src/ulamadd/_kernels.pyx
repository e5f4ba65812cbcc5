# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel lane.

Same API and draw contract as ``_kernels_py``; the two must stay
bit-identical.  Uniforms come straight from the Philox bit generator via
``next_double`` (one stream per trajectory), which matches what
``Generator.random`` consumes in the Python lane.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport log1p, pow, NAN

import numpy as np

cimport numpy as cnp
from numpy.random cimport bitgen_t

cnp.import_array()

_MASK64 = (1 << 64) - 1


def _philox(seed, stream):
    key = np.array([int(seed) & _MASK64, int(stream) & _MASK64], dtype=np.uint64)
    return np.random.Philox(key=key)


cdef bitgen_t *_bits(object bg):
    return <bitgen_t *> PyCapsule_GetPointer(bg.capsule, "BitGenerator")


def discrete_path(x0, double p, double a, double b, Py_ssize_t n_max, seed, stream):
    cdef Py_ssize_t r = len(x0)
    cdef Py_ssize_t total = n_max if n_max > r else r
    out = np.empty(total, dtype=np.float64)
    cdef double[::1] v = out
    cdef Py_ssize_t i, n, iu, iv
    cdef double u, uv, j
    cdef bitgen_t *rng
    for i in range(r):
        v[i] = x0[i]
    if n_max <= r:
        return out
    bg = _philox(seed, stream)
    rng = _bits(bg)
    if p >= 1.0:
        with bg.lock, nogil:
            for n in range(r, n_max):
                u = rng.next_double(rng.state)
                uv = rng.next_double(rng.state)
                iu = <Py_ssize_t>(n * u)
                if iu >= n:
                    iu = n - 1
                iv = <Py_ssize_t>(n * uv)
                if iv >= n:
                    iv = n - 1
                v[n] = a * v[iu] + b * v[iv]
    else:
        with bg.lock, nogil:
            for n in range(r, n_max):
                j = rng.next_double(rng.state)
                u = rng.next_double(rng.state)
                uv = rng.next_double(rng.state)
                if j < p:
                    iu = <Py_ssize_t>(n * u)
                    if iu >= n:
                        iu = n - 1
                    iv = <Py_ssize_t>(n * uv)
                    if iv >= n:
                        iv = n - 1
                    v[n] = v[iu] + v[iv]
                else:
                    v[n] = v[n - 1]
    return out


def discrete_ensemble_snapshots(x0, double p, double a, double b, grid,
                                Py_ssize_t reps, seed, Py_ssize_t stream_offset=0):
    x0_arr = np.asarray(x0, dtype=np.float64)
    grid_arr = np.asarray(grid, dtype=np.int64)
    if np.any(np.diff(grid_arr) <= 0):
        raise ValueError("grid must be strictly increasing")
    cdef double[::1] xv0 = x0_arr
    cdef cnp.int64_t[::1] gv = grid_arr
    cdef Py_ssize_t r = x0_arr.shape[0]
    cdef Py_ssize_t G = grid_arr.shape[0]
    cdef Py_ssize_t n_last = gv[G - 1]
    if gv[0] < r:
        raise ValueError("grid indices must be >= the initial history length")
    out = np.empty((reps, G, 6), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    work = np.empty(n_last + 1, dtype=np.float64)
    cdef double[::1] w = work
    cdef double x0sum = x0_arr.sum()
    cdef double x0last = xv0[r - 1]
    cdef Py_ssize_t k, i, n, gi, iu, iv
    cdef double u, uv, jdraw, s_prev, s_cur, x_new, xu, xv, jumped
    cdef bitgen_t *rng
    for k in range(reps):
        bg = _philox(seed, k + stream_offset)
        rng = _bits(bg)
        with bg.lock, nogil:
            for i in range(r):
                w[i] = xv0[i]
            s_cur = x0sum
            s_prev = x0sum - x0last
            gi = 0
            for n in range(r, n_last + 1):
                if p >= 1.0:
                    u = rng.next_double(rng.state)
                    uv = rng.next_double(rng.state)
                    iu = <Py_ssize_t>(n * u)
                    if iu >= n:
                        iu = n - 1
                    iv = <Py_ssize_t>(n * uv)
                    if iv >= n:
                        iv = n - 1
                    xu = w[iu]
                    xv = w[iv]
                    x_new = a * xu + b * xv
                    jumped = 1.0
                else:
                    jdraw = rng.next_double(rng.state)
                    u = rng.next_double(rng.state)
                    uv = rng.next_double(rng.state)
                    iu = <Py_ssize_t>(n * u)
                    if iu >= n:
                        iu = n - 1
                    iv = <Py_ssize_t>(n * uv)
                    if iv >= n:
                        iv = n - 1
                    if jdraw < p:
                        xu = w[iu]
                        xv = w[iv]
                        x_new = xu + xv
                        jumped = 1.0
                    else:
                        xu = NAN
                        xv = NAN
                        x_new = w[n - 1]
                        jumped = 0.0
                if gi < G and gv[gi] == n:
                    o[k, gi, 0] = w[n - 1]
                    o[k, gi, 1] = s_prev
                    o[k, gi, 2] = s_cur
                    o[k, gi, 3] = xu
                    o[k, gi, 4] = xv
                    o[k, gi, 5] = jumped
                    gi += 1
                w[n] = x_new
                s_prev = s_cur
                s_cur = s_cur + x_new
    return out


def second_moment_forward(x0, double p, checkpoints):
    x0_list = [float(v) for v in x0]
    cdef Py_ssize_t r = len(x0_list)
    cps_arr = np.asarray(sorted(int(n) for n in checkpoints), dtype=np.int64)
    cdef cnp.int64_t[::1] cps = cps_arr
    cdef Py_ssize_t nc = cps_arr.shape[0]
    if cps[0] < r:
        raise ValueError("checkpoints must be >= the initial history length")
    out = np.empty((nc, 4), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double s_r = sum(x0_list)
    cdef double q = x0_list[r - 1] ** 2
    cdef double wv = x0_list[r - 1] * (s_r - x0_list[r - 1])
    cdef double t = sum(v * v for v in x0_list)
    cdef double ps = s_r * s_r
    cdef double nu = 1.0 - p
    cdef double q1, w1
    cdef Py_ssize_t ci = 0, n = r
    with nogil:
        while True:
            while ci < nc and cps[ci] == n:
                o[ci, 0] = q
                o[ci, 1] = wv
                o[ci, 2] = t
                o[ci, 3] = ps
                ci += 1
            if ci == nc:
                break
            q1 = nu * q + p * (2.0 / n * t + 2.0 / (n * n) * ps)
            w1 = nu * (wv + q) + 2.0 * p / n * ps
            t += q1
            ps = ps + 2.0 * w1 + q1
            q = q1
            wv = w1
            n += 1
    return out


cdef Py_ssize_t _upper_bound(double[::1] arr, Py_ssize_t n, double x) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef double _path_value(double[::1] bk, double[::1] bv, double s) noexcept nogil:
    cdef Py_ssize_t nb = bk.shape[0]
    if s <= 0.0:
        return bv[0]
    if s >= bk[nb - 1]:
        return bv[nb - 1]
    cdef Py_ssize_t lo = 0, hi = nb, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if bk[mid] < s:
            lo = mid + 1
        else:
            hi = mid
    return bv[lo]


cdef double _path_integral(double[::1] bk, double[::1] bv, double t) noexcept nogil:
    cdef Py_ssize_t nb = bk.shape[0]
    cdef double tt = t if t < bk[nb - 1] else bk[nb - 1]
    if tt <= 0.0:
        return 0.0
    cdef double acc = 0.0, left = 0.0
    cdef Py_ssize_t i
    for i in range(nb):
        if tt <= bk[i]:
            return acc + bv[i] * (tt - left)
        acc += bv[i] * (bk[i] - left)
        left = bk[i]
    return acc


def continuized_path(breaks, vals, double tau, double t_max, double alpha,
                     double beta, wa, wb, seed, stream):
    bk_arr = np.asarray(breaks, dtype=np.float64)
    bv_arr = np.asarray(vals, dtype=np.float64)
    cdef double[::1] bk = bk_arr
    cdef double[::1] bv = bv_arr
    cdef int a_rand = int(wa[0])
    cdef double a_v1 = wa[1], a_v2 = wa[2], a_p1 = wa[3]
    cdef int b_rand = int(wb[0])
    cdef double b_v1 = wb[1], b_v2 = wb[2], b_p1 = wb[3]
    cdef double inv_alpha = 1.0 / alpha
    cdef double inv_beta = 1.0 / beta
    cdef Py_ssize_t cap = 256 + <Py_ssize_t>(2.0 * (t_max - tau))
    jt_arr = np.empty(cap, dtype=np.float64)
    jv_arr = np.empty(cap, dtype=np.float64)
    cdef double[::1] jt = jt_arr
    cdef double[::1] jv = jv_arr
    cdef Py_ssize_t m = 0, k
    cdef double t_cur = tau, x_cur = bv[bk_arr.shape[0] - 1]
    cdef double wait, t_next, su, sv, xu, xv, aw, bw, x_new
    cdef bitgen_t *rng
    bg = _philox(seed, stream)
    rng = _bits(bg)
    with bg.lock:
        while True:
            wait = -log1p(-rng.next_double(rng.state))
            if wait <= 0.0:
                wait = 5e-324
            t_next = t_cur + wait
            if t_next > t_max:
                break
            su = t_next * pow(rng.next_double(rng.state), inv_alpha)
            sv = t_next * pow(rng.next_double(rng.state), inv_beta)
            if su <= tau:
                xu = _path_value(bk, bv, su)
            else:
                k = _upper_bound(jt, m, su) - 1
                xu = jv[k] if k >= 0 else bv[bk_arr.shape[0] - 1]
            if sv <= tau:
                xv = _path_value(bk, bv, sv)
            else:
                k = _upper_bound(jt, m, sv) - 1
                xv = jv[k] if k >= 0 else bv[bk_arr.shape[0] - 1]
            if a_rand:
                aw = a_v1 if rng.next_double(rng.state) < a_p1 else a_v2
            else:
                aw = a_v1
            if b_rand:
                bw = b_v1 if rng.next_double(rng.state) < b_p1 else b_v2
            else:
                bw = b_v1
            x_new = aw * xu + bw * xv
            if m == cap:
                cap *= 2
                jt_arr = np.concatenate([jt_arr, np.empty(cap - m)])
                jv_arr = np.concatenate([jv_arr, np.empty(cap - m)])
                jt = jt_arr
                jv = jv_arr
            jt[m] = t_next
            jv[m] = x_new
            m += 1
            t_cur = t_next
            x_cur = x_new
    return jt_arr[:m].copy(), jv_arr[:m].copy()


def continuized_ensemble_snapshots(breaks, vals, double tau, double t_max,
                                   double alpha, double beta, wa, wb, t_grid,
                                   Py_ssize_t reps, seed,
                                   Py_ssize_t stream_offset=0):
    bk_arr = np.asarray(breaks, dtype=np.float64)
    bv_arr = np.asarray(vals, dtype=np.float64)
    tg_arr = np.asarray(t_grid, dtype=np.float64)
    if np.any(np.diff(tg_arr) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if tg_arr.shape[0] and tg_arr[tg_arr.shape[0] - 1] > t_max:
        raise ValueError("t_grid must lie within (0, t_max]")
    cdef double[::1] bk = bk_arr
    cdef double[::1] bv = bv_arr
    cdef double[::1] tg = tg_arr
    cdef Py_ssize_t G = tg_arr.shape[0]
    cdef int a_rand = int(wa[0])
    cdef double a_v1 = wa[1], a_v2 = wa[2], a_p1 = wa[3]
    cdef int b_rand = int(wb[0])
    cdef double b_v1 = wb[1], b_v2 = wb[2], b_p1 = wb[3]
    cdef double inv_alpha = 1.0 / alpha
    cdef double inv_beta = 1.0 / beta
    cdef double init_total = _path_integral(bk, bv, tau)
    cdef double x_tau = bv[bk_arr.shape[0] - 1]
    out = np.empty((reps, G, 3), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t cap0 = 256 + <Py_ssize_t>(2.0 * (t_max - tau))
    jt_arr = np.empty(cap0, dtype=np.float64)
    jv_arr = np.empty(cap0, dtype=np.float64)
    cdef double[::1] jt = jt_arr
    cdef double[::1] jv = jv_arr
    cdef Py_ssize_t cap, m, g, k, rep
    cdef double t_cur, x_cur, s, nj
    cdef double wait, t_next, su, sv, xu, xv, aw, bw, x_new
    cdef bitgen_t *rng
    for rep in range(reps):
        bg = _philox(seed, rep + stream_offset)
        rng = _bits(bg)
        cap = jt_arr.shape[0]
        m = 0
        g = 0
        while g < G and tg[g] <= tau:
            o[rep, g, 0] = _path_value(bk, bv, tg[g])
            o[rep, g, 1] = _path_integral(bk, bv, tg[g])
            o[rep, g, 2] = 0.0
            g += 1
        t_cur = tau
        x_cur = x_tau
        s = init_total
        nj = 0.0
        with bg.lock:
            while True:
                wait = -log1p(-rng.next_double(rng.state))
                if wait <= 0.0:
                    wait = 5e-324
                t_next = t_cur + wait
                if t_next > t_max:
                    while g < G and tg[g] < t_max:
                        o[rep, g, 0] = x_cur
                        o[rep, g, 1] = s + x_cur * (tg[g] - t_cur)
                        o[rep, g, 2] = nj
                        g += 1
                    s += x_cur * (t_max - t_cur)
                    if g < G and tg[g] == t_max:
                        o[rep, g, 0] = x_cur
                        o[rep, g, 1] = s
                        o[rep, g, 2] = nj
                        g += 1
                    break
                su = t_next * pow(rng.next_double(rng.state), inv_alpha)
                sv = t_next * pow(rng.next_double(rng.state), inv_beta)
                if su <= tau:
                    xu = _path_value(bk, bv, su)
                else:
                    k = _upper_bound(jt, m, su) - 1
                    xu = jv[k] if k >= 0 else x_tau
                if sv <= tau:
                    xv = _path_value(bk, bv, sv)
                else:
                    k = _upper_bound(jt, m, sv) - 1
                    xv = jv[k] if k >= 0 else x_tau
                if a_rand:
                    aw = a_v1 if rng.next_double(rng.state) < a_p1 else a_v2
                else:
                    aw = a_v1
                if b_rand:
                    bw = b_v1 if rng.next_double(rng.state) < b_p1 else b_v2
                else:
                    bw = b_v1
                x_new = aw * xu + bw * xv
                while g < G and tg[g] < t_next:
                    o[rep, g, 0] = x_cur
                    o[rep, g, 1] = s + x_cur * (tg[g] - t_cur)
                    o[rep, g, 2] = nj
                    g += 1
                s += x_cur * (t_next - t_cur)
                nj += 1.0
                if g < G and tg[g] == t_next:
                    o[rep, g, 0] = x_new
                    o[rep, g, 1] = s
                    o[rep, g, 2] = nj
                    g += 1
                if m == cap:
                    cap *= 2
                    jt_arr = np.concatenate([jt_arr, np.empty(cap - m)])
                    jv_arr = np.concatenate([jv_arr, np.empty(cap - m)])
                    jt = jt_arr
                    jv = jv_arr
                jt[m] = t_next
                jv[m] = x_new
                m += 1
                t_cur = t_next
                x_cur = x_new
    return out
