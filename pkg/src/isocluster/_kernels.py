"""Compiled inner loops.

Sparse vectors are passed as sorted ``(keys, vals)`` array pairs; sets of
them as CSR triples ``(indptr, keys, vals)``.  Every routine iterates in a
fixed order, so identical inputs give bit-identical results no matter how
they are batched.
"""

import math

import numpy as np
from numba import njit

_CACHE = True


@njit(cache=_CACHE)
def merge_axpby(ak, av, alpha, bk, bv, beta):
    na = ak.size
    nb = bk.size
    keys = np.empty(na + nb, np.int64)
    vals = np.empty(na + nb, np.float64)
    i = 0
    j = 0
    n = 0
    while i < na and j < nb:
        ka = ak[i]
        kb = bk[j]
        if ka == kb:
            v = alpha * av[i] + beta * bv[j]
            k = ka
            i += 1
            j += 1
        elif ka < kb:
            v = alpha * av[i]
            k = ka
            i += 1
        else:
            v = beta * bv[j]
            k = kb
            j += 1
        if v != 0.0:
            keys[n] = k
            vals[n] = v
            n += 1
    while i < na:
        v = alpha * av[i]
        if v != 0.0:
            keys[n] = ak[i]
            vals[n] = v
            n += 1
        i += 1
    while j < nb:
        v = beta * bv[j]
        if v != 0.0:
            keys[n] = bk[j]
            vals[n] = v
            n += 1
        j += 1
    return keys[:n].copy(), vals[:n].copy()


@njit(cache=_CACHE)
def sparse_dot(ak, av, bk, bv):
    i = 0
    j = 0
    s = 0.0
    while i < ak.size and j < bk.size:
        if ak[i] == bk[j]:
            s += av[i] * bv[j]
            i += 1
            j += 1
        elif ak[i] < bk[j]:
            i += 1
        else:
            j += 1
    return s


@njit(cache=_CACHE)
def sparse_dist2(ak, av, bk, bv):
    i = 0
    j = 0
    s = 0.0
    while i < ak.size and j < bk.size:
        if ak[i] == bk[j]:
            t = av[i] - bv[j]
            i += 1
            j += 1
        elif ak[i] < bk[j]:
            t = av[i]
            i += 1
        else:
            t = -bv[j]
            j += 1
        s += t * t
    while i < ak.size:
        s += av[i] * av[i]
        i += 1
    while j < bk.size:
        s += bv[j] * bv[j]
        j += 1
    return s


@njit(cache=_CACHE)
def block_dist2(indptr, keys, vals, qk, qv):
    m = indptr.size - 1
    out = np.empty(m)
    for r in range(m):
        s = indptr[r]
        e = indptr[r + 1]
        out[r] = sparse_dist2(keys[s:e], vals[s:e], qk, qv)
    return out


@njit(cache=_CACHE)
def block_dot(indptr, keys, vals, qk, qv):
    m = indptr.size - 1
    out = np.empty(m)
    for r in range(m):
        s = indptr[r]
        e = indptr[r + 1]
        out[r] = sparse_dot(keys[s:e], vals[s:e], qk, qv)
    return out


@njit(cache=_CACHE)
def pairwise_dist2(indptr, keys, vals):
    n = indptr.size - 1
    out = np.zeros((n, n))
    for i in range(n):
        si = indptr[i]
        ei = indptr[i + 1]
        for j in range(i + 1, n):
            sj = indptr[j]
            ej = indptr[j + 1]
            v = sparse_dist2(keys[si:ei], vals[si:ei], keys[sj:ej], vals[sj:ej])
            out[i, j] = v
            out[j, i] = v
    return out


@njit(cache=_CACHE)
def combine_rows(indptr, keys, vals, w):
    """Sparse ``sum_i w_i x_i`` with exact zeros dropped."""
    total = 0
    for i in range(w.size):
        if w[i] != 0.0:
            total += indptr[i + 1] - indptr[i]
    k = np.empty(total, np.int64)
    v = np.empty(total, np.float64)
    n = 0
    for i in range(w.size):
        if w[i] != 0.0:
            for p in range(indptr[i], indptr[i + 1]):
                k[n] = keys[p]
                v[n] = w[i] * vals[p]
                n += 1
    order = np.argsort(k, kind="mergesort")
    ok = np.empty(total, np.int64)
    ov = np.empty(total, np.float64)
    m = 0
    p = 0
    while p < total:
        key = k[order[p]]
        acc = 0.0
        while p < total and k[order[p]] == key:
            acc += v[order[p]]
            p += 1
        if acc != 0.0:
            ok[m] = key
            ov[m] = acc
            m += 1
    return ok[:m].copy(), ov[:m].copy()


@njit(cache=_CACHE)
def grow(w, R, d, j, D2, r):
    """Expand ball ``(w, R)`` to cover entry ``j``; updates ``w``, ``d``
    in place and returns ``(new radius, grew)``."""
    dj = math.sqrt(max(d[j], 0.0))
    h = dj + r[j] - R
    if not h > 1e-12 * (1.0 + R):
        return R, False
    if dj == 0.0:
        return r[j], True
    t = 0.5 * h / dj
    dj2 = d[j]
    for i in range(d.size):
        d[i] = (1.0 - t) * d[i] + t * D2[j, i] - t * (1.0 - t) * dj2
        w[i] = (1.0 - t) * w[i]
    w[j] += t
    return R + 0.5 * h, True


@njit(cache=_CACHE)
def farthest_pair(members, reach):
    n = members.size
    best = -1.0
    a = -1
    b = -1
    for i in range(n):
        if not members[i]:
            continue
        for j in range(i + 1, n):
            if members[j] and reach[i, j] > best:
                best = reach[i, j]
                a = i
                b = j
    return a, b


@njit(cache=_CACHE)
def seed_ball(a, b, D2, D, r, w, d):
    """Smallest ball covering entries ``a`` and ``b``; fills ``w``, ``d``."""
    n = w.size
    dab = D[a, b]
    ra = r[a]
    rb = r[b]
    if dab + rb <= ra:
        lam = 0.0
        R = ra
    elif dab + ra <= rb:
        lam = 1.0
        R = rb
    else:
        R = 0.5 * (dab + ra + rb)
        lam = (R - ra) / dab
    for i in range(n):
        w[i] = 0.0
        d[i] = (1.0 - lam) * D2[a, i] + lam * D2[b, i] - lam * (1.0 - lam) * D2[a, b]
    w[a] += 1.0 - lam
    w[b] += lam
    return R


@njit(cache=_CACHE)
def quasi_rows(D2, D, r, members, shrink):
    """Quasi-minimal bounding balls for each row of the ``members`` mask."""
    S, n = members.shape
    W = np.zeros((S, n))
    RR = np.zeros(S)
    DD = np.zeros((S, n))
    reach = np.empty((n, n))
    points_only = True
    for i in range(n):
        if r[i] > 0.0:
            points_only = False
        for j in range(n):
            reach[i, j] = D[i, j] + r[i] + r[j]
    for s in range(S):
        mem = members[s]
        w = W[s]
        d = DD[s]
        count = 0
        first = -1
        for i in range(n):
            if mem[i]:
                count += 1
                if first < 0:
                    first = i
        if count == 1:
            w[first] = 1.0
            for i in range(n):
                d[i] = D2[first, i]
            RR[s] = r[first]
            continue
        a, b = farthest_pair(mem, reach)
        R = seed_ball(a, b, D2, D, r, w, d)
        last = -1
        for j in range(n):
            if not mem[j] or j == a or j == b:
                continue
            dj_pos = d[j] > 0.0
            R, grew = grow(w, R, d, j, D2, r)
            if grew and dj_pos:
                last = j
        if shrink and points_only and last >= 0:
            q = last
            dq = d[q]
            L = math.sqrt(max(dq, 0.0))
            sh = 0.0
            for i in range(n):
                if not mem[i] or i == q:
                    continue
                den = D2[q, i] + dq - d[i]
                if D2[q, i] > 0.0 and den > 0.0:
                    cand = D2[q, i] * L / den
                    if cand > sh:
                        sh = cand
            if sh > R:
                sh = R
            if L > 0.0 and sh < R:
                tau = sh / L
                for i in range(n):
                    d[i] = (1.0 - tau) * D2[q, i] + tau * d[i] - tau * (1.0 - tau) * dq
                    w[i] = tau * w[i]
                w[q] += 1.0 - tau
                R = sh
        RR[s] = R
    return W, RR, DD


@njit(cache=_CACHE)
def center_gap2(wa, da, wb, db):
    s1 = 0.0
    s2 = 0.0
    for i in range(wa.size):
        s1 += wb[i] * da[i]
        s2 += wb[i] * db[i]
    return max(s1 - s2, 0.0)


@njit(cache=_CACHE)
def margin(l2, r1, r2):
    if r1 >= r2:
        return l2 - (r1 * r1 - r2 * r2)
    return l2 - (r2 * r2 - r1 * r1)


@njit(cache=_CACHE)
def greedy_sides(D2, D, r, min_fill):
    """Greedy two-way split; returns 0/1 side labels and the seed pair.

    Once the entries left over are just enough to bring a side up to
    ``min_fill``, they all go to that side.
    """
    n = r.size
    members = np.ones(n, np.bool_)
    reach = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            reach[i, j] = D[i, j] + r[i] + r[j]
    a, b = farthest_pair(members, reach)
    side = np.full(n, -1, np.int64)
    side[a] = 0
    side[b] = 1
    wa = np.zeros(n)
    wb = np.zeros(n)
    wa[a] = 1.0
    wb[b] = 1.0
    da = D2[a].copy()
    db = D2[b].copy()
    ra = r[a]
    rb = r[b]
    wa2 = np.empty(n)
    da2 = np.empty(n)
    wb2 = np.empty(n)
    db2 = np.empty(n)
    na = 1
    nb = 1
    for step in range(n - 2):
        left = n - 2 - step
        pick = -1
        far = -1.0
        for j in range(n):
            if side[j] >= 0:
                continue
            ga = math.sqrt(max(da[j], 0.0)) + r[j] - ra
            gb = math.sqrt(max(db[j], 0.0)) + r[j] - rb
            near = max(min(ga, gb), 0.0)
            if near > far:
                far = near
                pick = j
        wa2[:] = wa
        da2[:] = da
        wb2[:] = wb
        db2[:] = db
        ra2, _ = grow(wa2, ra, da2, pick, D2, r)
        rb2, _ = grow(wb2, rb, db2, pick, D2, r)
        ma = margin(center_gap2(wa2, da2, wb, db), ra2, rb)
        mb = margin(center_gap2(wa, da, wb2, db2), ra, rb2)
        if na + left <= min_fill:
            to_a = True
        elif nb + left <= min_fill:
            to_a = False
        else:
            to_a = ma > mb or (ma == mb and ra2 + rb <= ra + rb2)
        if to_a:
            na += 1
            side[pick] = 0
            wa[:] = wa2
            da[:] = da2
            ra = ra2
        else:
            nb += 1
            side[pick] = 1
            wb[:] = wb2
            db[:] = db2
            rb = rb2
    return side, a, b


@njit(cache=_CACHE)
def choose_child(d, radii):
    """Inside some ball: least power ``d^2 - R^2``.  Otherwise least
    ``T = 4RH + H^2``, then least ``R + H/2``; lower index on ties."""
    best = -1
    bp = 0.0
    for i in range(d.size):
        if d[i] <= radii[i]:
            p = d[i] * d[i] - radii[i] * radii[i]
            if best < 0 or p < bp:
                best = i
                bp = p
    if best >= 0:
        return best
    bt = 0.0
    bg = 0.0
    for i in range(d.size):
        h = d[i] - radii[i]
        t = 4.0 * radii[i] * h + h * h
        g = radii[i] + 0.5 * h
        if best < 0 or t < bt or (t == bt and g < bg):
            best = i
            bt = t
            bg = g
    return best
