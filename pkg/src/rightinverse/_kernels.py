"""Compiled inner loops.

Paths are stored as polylines with jumps: vertex ``i`` has time ``T[i]``,
left limit ``VL[i]`` and value ``VR[i]``; the path is linear between
``(T[i], VR[i])`` and ``(T[i+1], VL[i+1])``.  ``VL[i] != VR[i]`` marks a jump.
All kernels take the number of valid vertices ``n`` explicitly so that they
can run on partially filled buffers.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

INF = np.inf

# room kept free at the end of a buffer before a new grid cell is started
CELL_RESERVE = 3 * 66


@njit(cache=True, inline="always")
def sample_jump(g, kind, params):
    if kind == 1:  # atoms: params = sizes..., cumprobs...
        m = params.shape[0] // 2
        u = g.random()
        for j in range(m):
            if u < params[m + j]:
                return params[j]
        return params[m - 1]
    if kind == 2:  # two-sided exponential: p_up, rate_up, rate_down
        if g.random() < params[0]:
            return g.exponential(1.0 / params[1])
        return -g.exponential(1.0 / params[2])
    if kind == 3:  # negative exponential
        return -g.exponential(1.0 / params[0])
    if kind == 4:  # symmetric Pareto tail above the cutoff
        u = 1.0 - g.random()
        y = params[1] * u ** (-1.0 / params[0])
        if g.random() < 0.5:
            return -y
        return y
    return 0.0


@njit(cache=True, inline="always")
def _push(T, VR, VL, pos, t, x):
    pos += 1
    T[pos] = t
    VR[pos] = x
    VL[pos] = x
    return pos


@njit(cache=True, inline="always")
def _advance_plain(g, T, VR, VL, pos, s, x, h, b, sig):
    """Diffuse from ``(s, x)`` over ``h`` and append the endpoint."""
    xe = x + b * h + sig * math.sqrt(h) * g.standard_normal()
    pos = _push(T, VR, VL, pos, s + h, xe)
    return pos, xe


@njit(cache=True, inline="always")
def _advance_bridge(g, T, VR, VL, pos, s, x, h, b, sig):
    """As :func:`_advance_plain`, also appending sampled bridge extremes."""
    xe = x + b * h + sig * math.sqrt(h) * g.standard_normal()
    u1 = 1.0 - g.random()
    u2 = 1.0 - g.random()
    d2 = (xe - x) * (xe - x)
    v = sig * sig * h
    mx = 0.5 * (x + xe + math.sqrt(d2 - 2.0 * v * math.log(u1)))
    mn = 0.5 * (x + xe - math.sqrt(d2 - 2.0 * v * math.log(u2)))
    if xe >= x:
        pos = _push(T, VR, VL, pos, s + h / 3.0, mn)
        pos = _push(T, VR, VL, pos, s + 2.0 * h / 3.0, mx)
    else:
        pos = _push(T, VR, VL, pos, s + h / 3.0, mx)
        pos = _push(T, VR, VL, pos, s + 2.0 * h / 3.0, mn)
    pos = _push(T, VR, VL, pos, s + h, xe)
    return pos, xe


@njit(cache=True, inline="always")
def _gen_cells(g, T, VR, VL, pos, cell0, ncells, dt, next_jump, b, sig, rate,
               kind, params, advance):
    cap = T.shape[0]
    x = VR[pos]
    s = T[pos]
    done = 0
    for c in range(ncells):
        if pos + CELL_RESERVE >= cap:
            break
        tb = (cell0 + c + 1) * dt
        while next_jump < tb:
            if pos + 8 >= cap:
                raise RuntimeError("path buffer overflow inside a cell")
            pos, x = advance(g, T, VR, VL, pos, s, x, next_jump - s, b, sig)
            T[pos] = next_jump
            x = x + sample_jump(g, kind, params)
            VR[pos] = x
            s = next_jump
            next_jump = s + g.exponential(1.0 / rate)
        pos, x = advance(g, T, VR, VL, pos, s, x, tb - s, b, sig)
        T[pos] = tb
        s = tb
        done += 1
    return pos, done, next_jump


@njit(cache=True)
def gen_cells_plain(g, T, VR, VL, pos, cell0, ncells, dt, next_jump, b, sig, rate,
                    kind, params):
    """Append up to ``ncells`` grid cells after vertex ``pos``.

    Returns ``(pos, cells_done, next_jump)``.  Stops early, always at a cell
    boundary, when the buffer runs short; random draws are consumed cell by
    cell so the result does not depend on how the work is chunked.
    """
    return _gen_cells(g, T, VR, VL, pos, cell0, ncells, dt, next_jump, b, sig, rate,
                      kind, params, _advance_plain)


@njit(cache=True)
def gen_cells_bridge(g, T, VR, VL, pos, cell0, ncells, dt, next_jump, b, sig, rate,
                     kind, params):
    """:func:`gen_cells_plain` with two bridge-extreme vertices per sub-interval."""
    return _gen_cells(g, T, VR, VL, pos, cell0, ncells, dt, next_jump, b, sig, rate,
                      kind, params, _advance_bridge)


# ---------------------------------------------------------------------------
# scanning primitives
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def next_hit(T, VR, VL, n, i, t, v, level):
    """First time ``>= t`` at which the path equals ``level``.

    The search starts inside segment ``i`` at ``(t, v)``.  Jumps across the
    level do not count.  Returns ``(found, i, time)``; when not found ``i`` is
    the last vertex so the search can resume after the path is extended.
    """
    while i < n - 1:
        v1 = VL[i + 1]
        if (v - level) * (v1 - level) <= 0.0:
            if v == level:
                return True, i, t
            # interpolate on the whole segment so that equal levels give equal times
            v0 = VR[i]
            th = T[i] + (level - v0) / (v1 - v0) * (T[i + 1] - T[i])
            if th < t:
                th = t
            return True, i, th
        i += 1
        t = T[i]
        v = VR[i]
    if i == n - 1 and v == level:
        return True, i, t
    return False, n - 1, T[n - 1]


@njit(cache=True)
def evans_scan(T, VR, VL, n, levels, hits, k, i, t, v):
    """Iterated hitting times of ``levels`` (resumable)."""
    m = levels.shape[0]
    while k < m:
        found, i, th = next_hit(T, VR, VL, n, i, t, v, levels[k])
        if not found:
            return k, n - 1, T[n - 1], VR[n - 1]
        hits[k] = th
        t = th
        v = levels[k]
        k += 1
    return k, i, t, v


@njit(cache=True)
def first_hit(T, VR, VL, n, level):
    found, i, th = next_hit(T, VR, VL, n, 0, T[0], VR[0], level)
    if found:
        return th
    return INF


@njit(cache=True)
def passage_scan(T, VR, VL, n, level):
    """First passage strictly above ``level``.

    Returns ``(time, overshoot, level - sup_before, last_sup_time)`` with
    ``time = inf`` when there is no passage within the data.
    """
    M = VR[0]
    G = T[0]
    if M > level:
        return T[0], M - level, 0.0, T[0]
    t = T[0]
    v = VR[0]
    for i in range(n - 1):
        t1 = T[i + 1]
        v1 = VL[i + 1]
        if v1 > level:
            tc = t + (level - v) / (v1 - v) * (t1 - t)
            return tc, 0.0, 0.0, tc
        if v1 >= M:
            M = v1
            G = t1
        t = t1
        v = VR[i + 1]
        if v > level:
            return t, v - level, level - M, G
        if v >= M:
            M = v
            G = t
    return INF, 0.0, level - M, G


@njit(cache=True)
def running_max(VR, VL, n):
    out = np.empty(n)
    m = VR[0]
    for i in range(n):
        if VL[i] > m:
            m = VL[i]
        if VR[i] > m:
            m = VR[i]
        out[i] = m
    return out


@njit(cache=True)
def thinned_scan(T, VR, VL, n, eps, lev_q, lt_q, K_lev, K_lt, H_lt,
                 mark_S, mark_t0, mark_dK, mark_dH):
    """Thinned ladder construction.

    Follows the running maximum of the (restarted) path.  An upward jump over
    the maximum by more than ``eps`` is replaced by the excursion plus the
    return time to the pre-jump maximum, after which the path is restarted.
    Fills the thinned clock at level queries ``lev_q`` (first time the thinned
    height reaches the level) and at local-time queries ``lt_q``.

    Returns ``(n_marks, status, local_time, height, time)`` where status is
    0 when all queries were answered, 1 when the data ran out and 2 when the
    data ran out while waiting for a return.
    """
    nlev = lev_q.shape[0]
    nlt = lt_q.shape[0]
    cap = mark_S.shape[0]
    nm = 0
    i = 0
    t = T[0]
    v = VR[0]
    M = v
    lt = 0.0
    G = t
    jl = 0
    jt = 0
    while jl < nlev and lev_q[jl] <= M:
        K_lev[jl] = t
        jl += 1
    while i < n - 1:
        if jl >= nlev and jt >= nlt:
            return nm, 0, lt, M, t
        t1 = T[i + 1]
        v1 = VL[i + 1]
        if v1 > M:
            if v < M:
                tc = t + (M - v) / (v1 - v) * (t1 - t)
            else:
                tc = t
            rise = v1 - M
            while jl < nlev and lev_q[jl] <= v1:
                K_lev[jl] = tc + (lev_q[jl] - M) / rise * (t1 - tc)
                jl += 1
            while jt < nlt and lt_q[jt] <= lt + rise:
                K_lt[jt] = tc + (lt_q[jt] - lt) / rise * (t1 - tc)
                H_lt[jt] = M + (lt_q[jt] - lt)
                jt += 1
            lt += rise
            M = v1
            G = t1
        elif v1 == M:
            G = t1
        i += 1
        t = t1
        v = VR[i]
        if v != v1 and v > M:
            dH = v - M
            if dH <= eps:
                while jl < nlev and lev_q[jl] <= v:
                    K_lev[jl] = t
                    jl += 1
                M = v
                G = t
            else:
                found, ir, tr = next_hit(T, VR, VL, n, i, t, v, M)
                if nm < cap:
                    mark_S[nm] = lt
                    mark_t0[nm] = G
                    mark_dK[nm] = (tr - G) if found else INF
                    mark_dH[nm] = dH
                    nm += 1
                if not found:
                    return nm, 2, lt, M, t
                i = ir
                t = tr
                v = M
                G = tr
    if jl >= nlev and jt >= nlt:
        return nm, 0, lt, M, t
    return nm, 1, lt, M, t


@njit(cache=True)
def ladder_scan(T, VR, VL, n, rec_x, rec_t0, rec_dtau, rec_dH):
    """Excursions below the running supremum with their ladder jumps.

    Local time is the creeping part of the supremum (unit drift of the
    ladder height).  Each record is ``(local time, start, duration, dH)``.
    Returns ``(n_records, local_time, sup, creep_time, last_sup_time)``.
    """
    nr = 0
    t = T[0]
    v = VR[0]
    M = v
    G = t
    lt = 0.0
    creep = 0.0
    for i in range(n - 1):
        t1 = T[i + 1]
        v1 = VL[i + 1]
        if v1 > M:
            if v < M:
                tc = t + (M - v) / (v1 - v) * (t1 - t)
            else:
                tc = t
            if tc > G:
                rec_x[nr] = lt
                rec_t0[nr] = G
                rec_dtau[nr] = tc - G
                rec_dH[nr] = 0.0
                nr += 1
            creep += t1 - tc
            lt += v1 - M
            M = v1
            G = t1
        elif v1 == M:
            G = t1
        t = t1
        v = VR[i + 1]
        if v != v1 and v > M:
            rec_x[nr] = lt
            rec_t0[nr] = G
            rec_dtau[nr] = t - G
            rec_dH[nr] = v - M
            nr += 1
            M = v
            G = t
    return nr, lt, M, creep, G


@njit(cache=True, inline="always")
def _seg_occupation(q, lam, r0, z0, h, slope):
    # int_0^h exp(-q (r0 + r) + i lam (z0 + slope r)) dr
    c = complex(-q, lam * slope)
    pre = np.exp(complex(-q * r0, lam * z0))
    ch = c * h
    if abs(ch) < 1e-8:
        val = h * (1.0 + 0.5 * ch)
    else:
        val = (np.exp(ch) - 1.0) / c
    return pre * val


@njit(cache=True)
def z_table(T, VR, VL, n, hits, levels, kdone, step, sigma_pos, q, lam,
            duration, is_exc, start_value, zeta_plus, height, post_dur, depth,
            occ_re, occ_im):
    """Per-step summaries of the excursions away from the right inverse.

    Step ``k`` runs from ``hits[k-1]`` (0 for k = 0) to ``hits[k]``; during it
    the local time is ``levels[k]`` and ``Z = X - levels[k]``.  Without a
    Gaussian part the excursion starts at the first jump of the step; the
    creeping before it is drift of the inverse, so excursion clocks
    (``zeta_plus``, the occupation integral and ``duration`` of excursion
    steps) are measured from that jump.
    """
    i = 0
    t_start = 0.0
    for k in range(kdone):
        t_end = hits[k]
        top = levels[k]
        duration[k] = t_end - t_start
        while i < n - 1 and T[i + 1] <= t_start:
            i += 1
        r_pos = INF
        first_jump_z = np.nan
        zmin = (levels[k] - step) - top
        acc = complex(0.0, 0.0)
        origin = t_start if sigma_pos else INF
        # first piece starts at the hit, value levels[k] - step
        ta = t_start
        xa = levels[k] - step
        j = i
        while True:
            if j + 1 < n and T[j + 1] < t_end:
                tb = T[j + 1]
                xb = VL[j + 1]
                last = False
            else:
                tb = t_end
                xb = top
                last = True
            h = tb - ta
            if h > 0.0 and origin < INF:
                slope = (xb - xa) / h
                acc += _seg_occupation(q, lam, ta - origin, xa - top, h, slope)
            if xb - top < zmin:
                zmin = xb - top
            if last:
                break
            j += 1
            ta = tb
            xa = VR[j]
            if VR[j] != VL[j]:
                if np.isnan(first_jump_z):
                    first_jump_z = VR[j] - top
                    if not sigma_pos:
                        origin = tb
                if VR[j] > top and r_pos == INF:
                    r_pos = tb - origin
                    height[k] = VR[j] - top
                    post_dur[k] = t_end - tb
            if xa - top < zmin:
                zmin = xa - top
        zeta_plus[k] = r_pos
        if r_pos == INF:
            height[k] = np.nan
            post_dur[k] = np.nan
        depth[k] = zmin
        occ_re[k] = acc.real
        occ_im[k] = acc.imag
        if sigma_pos:
            is_exc[k] = duration[k] > 0.0
            start_value[k] = 0.0
        else:
            is_exc[k] = not np.isnan(first_jump_z)
            start_value[k] = first_jump_z
            if is_exc[k]:
                duration[k] = t_end - origin
        t_start = t_end
        i = j if j < n else n - 1
    return kdone


@njit(cache=True)
def zero_excursions(T, VR, VL, n, band, starts, ends, signs, depth):
    """Excursions of the path away from zero and occupation time of ``|X| < band``.

    Zero is reached only by continuous motion.  Returns ``(count, band_time,
    open_start, open_sign, open_depth)``; the excursion still running at the
    end of the data is described by the last three (``open_start < 0`` if
    zero was never left).
    """
    cnt = 0
    occ = 0.0
    cap = starts.shape[0]
    open_start = -1.0
    cur_sign = 0.0
    cur_min = 0.0
    t = T[0]
    v = VR[0]
    for i in range(n - 1):
        t1 = T[i + 1]
        v1 = VL[i + 1]
        h = t1 - t
        # time in the band along the linear piece
        if h > 0.0:
            if v == v1:
                if abs(v) < band:
                    occ += h
            else:
                lo = min(v, v1)
                hi = max(v, v1)
                a = max(lo, -band)
                c = min(hi, band)
                if c > a:
                    occ += h * (c - a) / (hi - lo)
        # zero crossings
        if v != 0.0 and v1 != 0.0 and (v > 0.0) != (v1 > 0.0) or (v == 0.0 and v1 != 0.0):
            tz = t + (0.0 - v) / (v1 - v) * h if v != v1 else t
            if open_start >= 0.0 and cnt < cap:
                starts[cnt] = open_start
                ends[cnt] = tz
                signs[cnt] = cur_sign
                depth[cnt] = cur_min
                cnt += 1
            open_start = tz
            cur_sign = 1.0 if v1 > 0.0 else -1.0
            cur_min = min(0.0, v1)
        if open_start >= 0.0:
            if v1 < cur_min:
                cur_min = v1
        t = t1
        v = VR[i + 1]
        if open_start >= 0.0 and v < cur_min:
            cur_min = v
    return cnt, occ, open_start, cur_sign, cur_min


# ---------------------------------------------------------------------------
# streaming drivers (generate and scan without keeping the whole path)
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _evans_stream(g, levels, hits, dt, ncells, next_jump, b, sig, rate, kind, params,
                  chunk, per_cell, advance):
    cap = chunk * per_cell + CELL_RESERVE + 64
    T = np.empty(cap)
    VR = np.empty(cap)
    VL = np.empty(cap)
    T[0] = 0.0
    VR[0] = 0.0
    VL[0] = 0.0
    pos = 0
    m = levels.shape[0]
    k = 0
    i = 0
    t = 0.0
    v = 0.0
    cell = 0
    while cell < ncells and k < m:
        pos, done, next_jump = _gen_cells(g, T, VR, VL, pos, cell, min(chunk, ncells - cell),
                                          dt, next_jump, b, sig, rate, kind, params, advance)
        cell += done
        k, i, t, v = evans_scan(T, VR, VL, pos + 1, levels, hits, k, i, t, v)
        # keep only the vertices from the current segment on
        if i > 0:
            keep = pos + 1 - i
            for j in range(keep):
                T[j] = T[i + j]
                VR[j] = VR[i + j]
                VL[j] = VL[i + j]
            pos = keep - 1
            i = 0
    return k, cell


@njit(cache=True)
def evans_stream_plain(g, levels, hits, dt, ncells, next_jump, b, sig, rate, kind, params,
                       chunk):
    """Evans hitting times on a path generated on the fly.

    Produces exactly the hits that :func:`evans_scan` finds on the stored
    path with the same generator.  Returns ``(levels_reached, cells_used)``.
    """
    return _evans_stream(g, levels, hits, dt, ncells, next_jump, b, sig, rate, kind, params,
                         chunk, 1, _advance_plain)


@njit(cache=True)
def evans_stream_bridge(g, levels, hits, dt, ncells, next_jump, b, sig, rate, kind, params,
                        chunk):
    return _evans_stream(g, levels, hits, dt, ncells, next_jump, b, sig, rate, kind, params,
                         chunk, 3, _advance_bridge)
