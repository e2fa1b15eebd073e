"""Streaming simulation kernels.

One tight loop per driving process.  Each path is advanced step by step
with O(1) detector state and never stored; everything a downstream check
needs is reduced on the fly to a handful of per-path marks:

* grid indices of first hits, last zero touches, frozen extremum
  attainment snapshots (the "last time at the running max before the last
  zero touch" pattern and its variants),
* path values at those indices,
* values of slowly varying functionals (running max at fixed report
  times, comparison-curve crossings).

Snapshot convention: detectors for a time of the form
sup{t < L : condition(t)} maintain the "last index where the condition
held" and freeze a copy of it every time an L-candidate occurs; at the end
of the path the copy frozen at the final candidate is the answer.

All randomness is counter-based (see rng.py), so kernels are deterministic
functions of their arguments and paths can be replayed cheaply.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .rng import (
    PURPOSE_TAIL_RETURN,
    PURPOSE_TAIL_VALUE,
    PURPOSE_UNIFORM_LEVEL,
    bm_increment,
    coord_increment,
    stream_key,
    uniform_mark,
)


@njit(cache=True)
def williams_pass(seed, n_paths, dt, max_steps, report_idx, y_barriers,
                  a_levels, lam_delta):
    """Brownian paths from 0 run to their first hit of 1.

    Per path, in one sweep: the first hit of 1 (t1), the last zero touch
    before it (sigma), the frozen last running-max attainment before sigma
    (rho) with its max value, first hits of the levels in ``a_levels`` and
    ``y_barriers`` and of an independent uniform level, running max at the
    grid indices ``report_idx``, last crossings before sigma of the
    comparison curves exp(-lam_delta * t) and exp(-running max), and a
    witness for a strict increase of (1 - S_t) / (1 - max(B_t, 0)) before
    sigma.  Paths still running after ``max_steps`` are flagged truncated.
    """
    sq = np.sqrt(dt)
    nrt = report_idx.shape[0]
    ny = y_barriers.shape[0]
    na = a_levels.shape[0]
    dfac = np.exp(-lam_delta * dt)

    t1_idx = np.full(n_paths, -1, dtype=np.int64)
    b_t1 = np.zeros(n_paths)
    sigma_idx = np.zeros(n_paths, dtype=np.int64)
    b_sigma = np.zeros(n_paths)
    rho_idx = np.zeros(n_paths, dtype=np.int64)
    s_rho = np.zeros(n_paths)
    u_level = np.zeros(n_paths)
    u_idx = np.full(n_paths, -1, dtype=np.int64)
    b_u = np.zeros(n_paths)
    ta_idx = np.full((n_paths, na), -1, dtype=np.int64)
    b_ta = np.zeros((n_paths, na))
    alpha_idx = np.full((n_paths, ny), -1, dtype=np.int64)
    dle_idx = np.zeros(n_paths, dtype=np.int64)
    dle_b = np.zeros(n_paths)
    dls_idx = np.zeros(n_paths, dtype=np.int64)
    dls_b = np.zeros(n_paths)
    s_at = np.zeros((n_paths, nrt))
    incr_flag = np.zeros(n_paths, dtype=np.uint8)
    max_incr = np.zeros(n_paths)
    steps = np.zeros(n_paths, dtype=np.int64)

    for i in range(n_paths):
        key = stream_key(seed, i)
        u = uniform_mark(key, PURPOSE_UNIFORM_LEVEL)
        u_level[i] = u

        b = 0.0
        s = 0.0
        last_max = 0
        # frozen-at-candidate state (index 0 is a zero touch)
        f_sigma = 0
        f_bsig = 0.0
        f_rho = 0
        f_srho = 0.0
        f_incr = 0.0
        f_dle = 0
        f_dleb = 0.0
        f_dls = 0
        f_dlsb = 0.0
        # live trackers
        d_exp = 1.0
        e_s = 1.0
        fle_prev = 0.0   # (1 - B+) - exp(-lam t), zero at the start
        fls_prev = 0.0   # (1 - B+) - exp(-S)
        prev_ratio = 1.0
        incr_now = 0.0
        dle_last = 0
        dle_lastb = 0.0
        dls_last = 0
        dls_lastb = 0.0
        i_y = 0
        i_a = 0
        i_rt = 0
        u_found = False
        k = 0
        truncated = False

        while True:
            if k >= max_steps:
                truncated = True
                break
            b += sq * bm_increment(key, k)
            k += 1
            if b >= s:
                s = b
                last_max = k
                e_s = np.exp(-s)
            while i_y < ny and b >= y_barriers[i_y]:
                alpha_idx[i, i_y] = k
                i_y += 1
            while i_a < na and b >= a_levels[i_a]:
                ta_idx[i, i_a] = k
                b_ta[i, i_a] = b
                i_a += 1
            if not u_found and b > u:
                u_idx[i] = k
                b_u[i] = b
                u_found = True
            if i_rt < nrt and k == report_idx[i_rt]:
                s_at[i, i_rt] = s
                i_rt += 1
            if b >= 1.0:
                t1_idx[i] = k
                b_t1[i] = b
                break
            # pre-hit trackers (sigma < t1, rho < sigma)
            bp = b if b > 0.0 else 0.0
            ratio = (1.0 - s) / (1.0 - bp)
            if ratio > prev_ratio:
                gain = ratio - prev_ratio
                if gain > incr_now:
                    incr_now = gain
            prev_ratio = ratio
            d_exp *= dfac
            fle = (1.0 - bp) - d_exp
            if fle == 0.0 or (fle > 0.0) != (fle_prev > 0.0):
                if fle == 0.0 or fle_prev != 0.0:
                    dle_last = k
                    dle_lastb = b
            fle_prev = fle
            fls = (1.0 - bp) - e_s
            if fls == 0.0 or (fls > 0.0) != (fls_prev > 0.0):
                if fls == 0.0 or fls_prev != 0.0:
                    dls_last = k
                    dls_lastb = b
            fls_prev = fls
            if b <= 0.0:
                f_sigma = k
                f_bsig = b
                f_rho = last_max
                f_srho = s
                f_incr = incr_now
                f_dle = dle_last
                f_dleb = dle_lastb
                f_dls = dls_last
                f_dlsb = dls_lastb

        # fill report times the path never reached (running max is frozen
        # at t1; truncated paths keep their last value and stay flagged)
        while i_rt < nrt:
            s_at[i, i_rt] = s
            i_rt += 1
        if truncated:
            t1_idx[i] = -1
        sigma_idx[i] = f_sigma
        b_sigma[i] = f_bsig
        rho_idx[i] = f_rho
        s_rho[i] = f_srho
        max_incr[i] = f_incr
        incr_flag[i] = 1 if f_incr > 1e-12 else 0
        dle_idx[i] = f_dle
        dle_b[i] = f_dleb
        dls_idx[i] = f_dls
        dls_b[i] = f_dlsb
        steps[i] = k

    return (t1_idx, b_t1, sigma_idx, b_sigma, rho_idx, s_rho, u_level,
            u_idx, b_u, ta_idx, b_ta, alpha_idx, dle_idx, dle_b, dls_idx,
            dls_b, s_at, incr_flag, max_incr, steps)


@njit(cache=True)
def bessel_pass(seed, n_paths, dt, max_steps, ndim, r0, level, c_level,
                r_stop):
    """Bessel(ndim) radial paths from r0, pruned at radius ``r_stop``.

    Tracks the last touch of ``level`` from above (L-candidates are indices
    with R <= level), the frozen last running-max attainment before it with
    the max value, and the first passage below ``c_level``.  The stream is
    pruned once R >= r_stop, where the analytic probability of ever
    returning to ``level`` is (level / r_stop)^(ndim - 2); per-path uniform
    marks for an exact tail completion of the extremum law are returned.
    """
    sq = np.sqrt(dt)
    l_idx = np.zeros(n_paths, dtype=np.int64)
    rho_idx = np.zeros(n_paths, dtype=np.int64)
    peak = np.zeros(n_paths)
    tc_idx = np.full(n_paths, -1, dtype=np.int64)
    r_tc = np.zeros(n_paths)
    r_end = np.zeros(n_paths)
    truncated = np.zeros(n_paths, dtype=np.uint8)
    v_ret = np.zeros(n_paths)
    w_val = np.zeros(n_paths)
    steps = np.zeros(n_paths, dtype=np.int64)
    coords = np.zeros(ndim)

    for i in range(n_paths):
        key = stream_key(seed, i)
        v_ret[i] = uniform_mark(key, PURPOSE_TAIL_RETURN)
        w_val[i] = uniform_mark(key, PURPOSE_TAIL_VALUE)
        for j in range(ndim):
            coords[j] = 0.0
        coords[0] = r0
        r = r0
        m = r0
        last_max = 0
        f_l = 0
        f_rho = 0
        f_peak = r0
        c_found = False
        k = 0
        while True:
            if k >= max_steps:
                truncated[i] = 1
                break
            acc = 0.0
            for j in range(ndim):
                coords[j] += sq * coord_increment(key, k, j)
                acc += coords[j] * coords[j]
            r = np.sqrt(acc)
            k += 1
            if r >= m:
                m = r
                last_max = k
            if not c_found and r <= c_level:
                tc_idx[i] = k
                r_tc[i] = r
                c_found = True
            if r <= level:
                f_l = k
                f_rho = last_max
                f_peak = m
            if r >= r_stop:
                break
        l_idx[i] = f_l
        rho_idx[i] = f_rho
        peak[i] = f_peak
        r_end[i] = r
        steps[i] = k

    return l_idx, rho_idx, peak, tc_idx, r_tc, r_end, truncated, v_ret, w_val, steps


@njit(cache=True)
def drifted_pass(seed, n_paths, dt, max_steps, x0, mu, sigma, a_level,
                 c_level, x_stop):
    """Downward-drifting paths x0 + mu*t + sigma*B_t (mu < 0).

    Tracks the last touch of ``a_level`` from below (candidates are indices
    with X >= a_level), the frozen last running-min attainment before it,
    and the first passage above ``c_level``.  Pruned once X <= x_stop,
    below which the analytic probability of returning to ``a_level`` is
    under the caller's pruning budget.
    """
    sq = np.sqrt(dt)
    visited = np.zeros(n_paths, dtype=np.uint8)
    l_idx = np.zeros(n_paths, dtype=np.int64)
    rho_idx = np.zeros(n_paths, dtype=np.int64)
    x_rho = np.zeros(n_paths)
    tc_idx = np.full(n_paths, -1, dtype=np.int64)
    x_tc = np.zeros(n_paths)
    x_end = np.zeros(n_paths)
    truncated = np.zeros(n_paths, dtype=np.uint8)
    steps = np.zeros(n_paths, dtype=np.int64)

    for i in range(n_paths):
        key = stream_key(seed, i)
        x = x0
        lo = x0
        last_min = 0
        f_l = 0
        f_rho = 0
        f_xrho = x0
        seen = False
        c_found = False
        k = 0
        while True:
            if k >= max_steps:
                truncated[i] = 1
                break
            x += mu * dt + sigma * sq * bm_increment(key, k)
            k += 1
            if x <= lo:
                lo = x
                last_min = k
            if not c_found and x >= c_level:
                tc_idx[i] = k
                x_tc[i] = x
                c_found = True
            if x >= a_level:
                seen = True
                f_l = k
                f_rho = last_min
                f_xrho = lo
            if x <= x_stop:
                break
        visited[i] = 1 if seen else 0
        l_idx[i] = f_l
        rho_idx[i] = f_rho
        x_rho[i] = f_xrho
        x_end[i] = x
        steps[i] = k

    return visited, l_idx, rho_idx, x_rho, tc_idx, x_tc, x_end, truncated, steps


@njit(cache=True)
def horizon_pass(seed, n_paths, dt, n_steps):
    """Brownian paths on the fixed window [0, n_steps * dt].

    Tracks the last zero crossing before the horizon and, frozen at each
    crossing, the last attainment of the running sup of
    |B_u| / sqrt(T - u) over the indices strictly before the crossing,
    with the signed path value at that attainment.
    """
    sq = np.sqrt(dt)
    horizon = n_steps * dt
    g_idx = np.zeros(n_paths, dtype=np.int64)
    rho_idx = np.zeros(n_paths, dtype=np.int64)
    b_rho = np.zeros(n_paths)
    b_end = np.zeros(n_paths)

    for i in range(n_paths):
        key = stream_key(seed, i)
        b = 0.0
        prev_b = 0.0
        sup = 0.0
        sup_idx = 0
        sup_b = 0.0
        f_g = 0
        f_rho = 0
        f_brho = 0.0
        for k in range(1, n_steps):
            b += sq * bm_increment(key, k - 1)
            # zero between k-1 and k: freeze with the sup through k-1
            if b == 0.0 or (prev_b > 0.0) != (b > 0.0):
                f_g = k - 1 if b != 0.0 else k
                f_rho = sup_idx
                f_brho = sup_b
            psi = abs(b) / np.sqrt(horizon - k * dt)
            if psi >= sup:
                sup = psi
                sup_idx = k
                sup_b = b
            prev_b = b
        b += sq * bm_increment(key, n_steps - 1)
        g_idx[i] = f_g
        rho_idx[i] = f_rho
        b_rho[i] = f_brho
        b_end[i] = b

    return g_idx, rho_idx, b_rho, b_end


@njit(cache=True)
def independent_snap_pass(seed, n_paths, dt, n_steps):
    """Paths on [0, 2T]: a random time built from the second half only.

    Phase one runs the path across the full window recording B at T and 2T
    and the first hit of 1; the time 1 / (1 + |B_2T - B_T|) in (0, T] is
    then snapped to the nearest grid index, and phase two replays the
    stream (same counters) to read the path value at the snapped index
    stopped at the first hit of 1.  No path storage is needed.
    """
    sq = np.sqrt(dt)
    half = n_steps // 2
    snap_idx = np.zeros(n_paths, dtype=np.int64)
    eval_idx = np.zeros(n_paths, dtype=np.int64)
    b_eval = np.zeros(n_paths)
    b_half = np.zeros(n_paths)
    b_full = np.zeros(n_paths)
    t1_idx = np.full(n_paths, -1, dtype=np.int64)

    for i in range(n_paths):
        key = stream_key(seed, i)
        b = 0.0
        t1 = -1
        for k in range(1, n_steps + 1):
            b += sq * bm_increment(key, k - 1)
            if t1 < 0 and b >= 1.0:
                t1 = k
            if k == half:
                b_half[i] = b
        b_full[i] = b
        rho = 1.0 / (1.0 + abs(b_full[i] - b_half[i]))
        snap = int(np.rint(rho / dt))
        if snap > half:
            snap = half
        snap_idx[i] = snap
        stop = snap if t1 < 0 or t1 > snap else t1
        eval_idx[i] = stop
        t1_idx[i] = t1
        b = 0.0
        for k in range(1, stop + 1):
            b += sq * bm_increment(key, k - 1)
        b_eval[i] = b

    return snap_idx, eval_idx, b_eval, b_half, b_full, t1_idx
