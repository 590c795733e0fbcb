"""Hot loops: RK4 on the left-trivialized extremal system and the grid scan.

The extremal state is a flat 6-vector ``(h1, h2, h3, x, y, theta)``.  Every
kernel exists twice: a scalar-loop version compiled with numba and a
vectorised pure-numpy version.  The public wrappers at the bottom dispatch on
:data:`se2geodesics._jit.USE_NUMBA`; both paths are kept importable so tests
and ``benchmarks/`` can compare them.
"""

import numpy as np

from ._jit import USE_NUMBA, njit

TWO_PI = 2.0 * np.pi

# cell-key packing for the spatial bucket index
_CELL_OFFSET = 1 << 20
_CELL_SPAN = 1 << 21


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

@njit
def _rhs(s, out):
    h1 = s[0]
    h2 = s[1]
    h3 = s[2]
    th = s[5]
    out[0] = h2 * h3
    out[1] = -h1 * h3
    out[2] = -h1 * h2
    out[3] = h1 * np.cos(th)
    out[4] = h1 * np.sin(th)
    out[5] = h2


@njit
def _rk4_step(s, h, k1, k2, k3, k4, tmp):
    _rhs(s, k1)
    for m in range(6):
        tmp[m] = s[m] + 0.5 * h * k1[m]
    _rhs(tmp, k2)
    for m in range(6):
        tmp[m] = s[m] + 0.5 * h * k2[m]
    _rhs(tmp, k3)
    for m in range(6):
        tmp[m] = s[m] + h * k3[m]
    _rhs(tmp, k4)
    for m in range(6):
        s[m] += (h / 6.0) * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m])


@njit
def nb_rk4_path(state0, h, n):
    out = np.empty((n + 1, 6))
    s = state0.copy()
    out[0] = s
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    tmp = np.empty(6)
    for i in range(n):
        _rk4_step(s, h, k1, k2, k3, k4, tmp)
        out[i + 1] = s
    return out


@njit
def nb_rk4_endpoints(states0, h, n):
    N = states0.shape[0]
    out = np.empty((N, 6))
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    tmp = np.empty(6)
    for q in range(N):
        s = states0[q].copy()
        for _ in range(n[q]):
            _rk4_step(s, h[q], k1, k2, k3, k4, tmp)
        out[q] = s
    return out


@njit
def _vrhs(p, out):
    out[0] = p[1] * p[2]
    out[1] = -p[0] * p[2]
    out[2] = -p[0] * p[1]


@njit
def nb_rk4_vertical(p0, h, n):
    p = p0.copy()
    k1 = np.empty(3)
    k2 = np.empty(3)
    k3 = np.empty(3)
    k4 = np.empty(3)
    tmp = np.empty(3)
    for _ in range(n):
        _vrhs(p, k1)
        for m in range(3):
            tmp[m] = p[m] + 0.5 * h * k1[m]
        _vrhs(tmp, k2)
        for m in range(3):
            tmp[m] = p[m] + 0.5 * h * k2[m]
        _vrhs(tmp, k3)
        for m in range(3):
            tmp[m] = p[m] + h * k3[m]
        _vrhs(tmp, k4)
        for m in range(3):
            p[m] += (h / 6.0) * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m])
    return p


@njit
def _wrap(a):
    return (a + np.pi) % TWO_PI - np.pi


@njit
def _dist(s, r):
    dx = s[3] - r[3]
    dy = s[4] - r[4]
    dt = _wrap(s[5] - r[5])
    return np.sqrt(dx * dx + dy * dy + dt * dt)


@njit
def _cell_key(ix, iy, it, nth):
    return ((ix + _CELL_OFFSET) * _CELL_SPAN + (iy + _CELL_OFFSET)) * nth + it


@njit
def _theta_cell(th, nth):
    return int((th % TWO_PI) / TWO_PI * nth) % nth


@njit
def nb_build_index(path, cell, nth):
    n = path.shape[0]
    keys = np.empty(n, np.int64)
    for k in range(n):
        ix = int(np.floor(path[k, 3] / cell))
        iy = int(np.floor(path[k, 4] / cell))
        keys[k] = _cell_key(ix, iy, _theta_cell(path[k, 5], nth), nth)
    order = np.argsort(keys, kind="mergesort")
    return keys[order], order


@njit
def _query(s, path, skeys, order, cell, nth, delta, kmin, kmax):
    """Smallest k in [kmin, kmax) with |path[k] - s| < delta, else kmax."""
    ix = int(np.floor(s[3] / cell))
    iy = int(np.floor(s[4] / cell))
    it = _theta_cell(s[5], nth)
    best = kmax
    nk = skeys.shape[0]
    for a in range(-1, 2):
        for b in range(-1, 2):
            for c in range(-1, 2):
                key = _cell_key(ix + a, iy + b, (it + c) % nth, nth)
                lo = np.searchsorted(skeys, key)
                while lo < nk and skeys[lo] == key:
                    k = order[lo]
                    lo += 1
                    if kmin <= k < best and _dist(s, path[k]) < delta:
                        best = k
    return best


@njit
def nb_scan(path, states0, h, delta, divergence, seed_radius, skeys, order, cell, nth):
    n = path.shape[0] - 1
    N = states0.shape[0]
    seed_j = np.full(N, -1, np.int64)
    seed_d = np.full(N, np.inf)
    best_k = n + 1
    best_q = -1
    best_j = -1
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    tmp = np.empty(6)
    for q in range(N):
        s = states0[q].copy()
        div = 0.0
        d1 = np.inf
        d2 = np.inf
        own_k = n + 1
        for j in range(n + 1):
            if seed_j[q] >= 0 and j >= min(best_k, own_k):
                break
            d = _dist(s, path[j])
            if d > div:
                div = d
            if div >= divergence:
                if seed_j[q] < 0 and d1 < d2 and d1 <= d and d1 < seed_radius:
                    seed_j[q] = j - 1
                    seed_d[q] = d1
                # ties on k go to the earlier partner time, then the lower grid index
                beats_tie = j < best_j or (j == best_j and q < best_q) or best_q < 0
                kmax = min(best_k + 1 if beats_tie else best_k, own_k)
                if j < kmax:
                    k = _query(s, path, skeys, order, cell, nth, delta, j, kmax)
                    if k < kmax:
                        own_k = k
                        best_k = k
                        best_q = q
                        best_j = j
            d2 = d1
            d1 = d
            if j < n:
                _rk4_step(s, h, k1, k2, k3, k4, tmp)
    return best_k, best_q, best_j, seed_j, seed_d


# ---------------------------------------------------------------------------
# numpy fallbacks
# ---------------------------------------------------------------------------

def _np_rhs(S):
    h1, h2, h3, th = S[..., 0], S[..., 1], S[..., 2], S[..., 5]
    return np.stack(
        [h2 * h3, -h1 * h3, -h1 * h2, h1 * np.cos(th), h1 * np.sin(th), h2], axis=-1
    )


def _np_step(S, h):
    # h broadcasts against the leading axes of S
    h = np.asarray(h)[..., None]
    k1 = _np_rhs(S)
    k2 = _np_rhs(S + 0.5 * h * k1)
    k3 = _np_rhs(S + 0.5 * h * k2)
    k4 = _np_rhs(S + h * k3)
    return S + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def np_rk4_path(state0, h, n):
    out = np.empty((n + 1, 6))
    s = np.array(state0, dtype=float)
    out[0] = s
    for i in range(n):
        s = _np_step(s, h)
        out[i + 1] = s
    return out


def np_rk4_endpoints(states0, h, n):
    S = np.array(states0, dtype=float)
    h = np.asarray(h, dtype=float)
    n = np.asarray(n)
    for i in range(int(n.max(initial=0))):
        # finished trajectories take zero-length steps
        S = _np_step(S, np.where(i < n, h, 0.0))
    return S


def np_rk4_vertical(p0, h, n):
    p = np.array(p0, dtype=float)

    def f(v):
        return np.array([v[1] * v[2], -v[0] * v[2], -v[0] * v[1]])

    for _ in range(n):
        k1 = f(p)
        k2 = f(p + 0.5 * h * k1)
        k3 = f(p + 0.5 * h * k2)
        k4 = f(p + h * k3)
        p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return p


def _np_wrap(a):
    return (a + np.pi) % TWO_PI - np.pi


def _np_cells(P, cell, nth):
    ix = np.floor(P[..., 3] / cell).astype(np.int64)
    iy = np.floor(P[..., 4] / cell).astype(np.int64)
    it = ((P[..., 5] % TWO_PI) / TWO_PI * nth).astype(np.int64) % nth
    return ix, iy, it


def np_build_index(path, cell, nth):
    ix, iy, it = _np_cells(path, cell, nth)
    keys = ((ix + _CELL_OFFSET) * _CELL_SPAN + (iy + _CELL_OFFSET)) * nth + it
    order = np.argsort(keys, kind="mergesort")
    return keys[order], order


def np_scan(path, states0, h, delta, divergence, seed_radius, skeys, order, cell, nth):
    n = path.shape[0] - 1
    S = np.array(states0, dtype=float)
    N = S.shape[0]
    idx = np.arange(N)
    seed_j = np.full(N, -1, np.int64)
    seed_d = np.full(N, np.inf)
    div = np.zeros(N)
    d1 = np.full(N, np.inf)
    d2 = np.full(N, np.inf)
    own_k = np.full(N, n + 1, np.int64)
    best_k, best_q, best_j = n + 1, -1, -1
    offsets = np.array([(a, b, c) for a in (-1, 0, 1) for b in (-1, 0, 1) for c in (-1, 0, 1)])
    for j in range(n + 1):
        live = (seed_j < 0) | (j < np.minimum(best_k, own_k))
        if not live.any():
            break
        r = path[j]
        d = np.sqrt((S[:, 3] - r[3]) ** 2 + (S[:, 4] - r[4]) ** 2 + _np_wrap(S[:, 5] - r[5]) ** 2)
        div = np.where(live, np.maximum(div, d), div)
        diverged = live & (div >= divergence)
        new_seed = diverged & (seed_j < 0) & (d1 < d2) & (d1 <= d) & (d1 < seed_radius)
        seed_j[new_seed] = j - 1
        seed_d[new_seed] = d1[new_seed]

        kmax = np.minimum(best_k, own_k)
        ask = np.nonzero(diverged & (j < kmax))[0]
        if ask.size:
            ix, iy, it = _np_cells(S[ask], cell, nth)
            cand_q, cand_k = [], []
            for a, b, c in offsets:
                key = ((ix + a + _CELL_OFFSET) * _CELL_SPAN + (iy + b + _CELL_OFFSET)) * nth + (it + c) % nth
                lo = np.searchsorted(skeys, key, "left")
                hi = np.searchsorted(skeys, key, "right")
                cnt = hi - lo
                if cnt.sum() == 0:
                    continue
                rows = np.repeat(np.arange(ask.size), cnt)
                pos = np.repeat(lo - np.cumsum(cnt) + cnt, cnt) + np.arange(cnt.sum())
                cand_q.append(rows)
                cand_k.append(order[pos])
            if cand_q:
                rows = np.concatenate(cand_q)
                ks = np.concatenate(cand_k)
                qs = ask[rows]
                dd = np.sqrt(
                    (S[qs, 3] - path[ks, 3]) ** 2
                    + (S[qs, 4] - path[ks, 4]) ** 2
                    + _np_wrap(S[qs, 5] - path[ks, 5]) ** 2
                )
                ok = (ks >= j) & (ks < kmax[qs]) & (dd < delta)
                if ok.any():
                    qs, ks = qs[ok], ks[ok]
                    found = np.full(N, n + 1, np.int64)
                    np.minimum.at(found, qs, ks)
                    hit = found < own_k
                    own_k[hit] = found[hit]
                    kmin = found.min()
                    if kmin < best_k:
                        best_k = int(kmin)
                        best_q = int(idx[found == kmin][0])
                        best_j = j
        d2 = np.where(live, d1, d2)
        d1 = np.where(live, d, d1)
        if j < n:
            S[live] = _np_step(S[live], h)
    return best_k, best_q, best_j, seed_j, seed_d


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if USE_NUMBA:
    rk4_path = nb_rk4_path
    rk4_endpoints = nb_rk4_endpoints
    rk4_vertical = nb_rk4_vertical
    build_index = nb_build_index
    scan = nb_scan
else:
    rk4_path = np_rk4_path
    rk4_endpoints = np_rk4_endpoints
    rk4_vertical = np_rk4_vertical
    build_index = np_build_index
    scan = np_scan
