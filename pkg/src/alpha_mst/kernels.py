"""Hot inner loops.

Each kernel exists twice: a scalar-loop version compiled with numba and a
vectorised numpy version.  The public wrappers dispatch on
:func:`alpha_mst._accel.use_numba`; both variants return identical results.
"""
from __future__ import annotations

import numpy as np

from ._accel import njit, use_numba

_CHUNK = 1 << 15


# --------------------------------------------------------------------------
# angular subset enumeration (LAC / cover separation at one vertex)
# --------------------------------------------------------------------------
@njit
def _popcount(v):
    c = 0
    while v:
        v &= v - 1
        c += 1
    return c


@njit
def _subset_scan_loop(cov, x, cover_mode, tol):
    k = cov.shape[0]
    best_mask = 0
    best_viol = tol
    for mask in range(3, 1 << k):
        c = _popcount(mask)
        if c < 2:
            continue
        xs = 0.0
        v = 0
        for j in range(k):
            if (mask >> j) & 1:
                xs += x[j]
                cv = _popcount(cov[j] & mask)
                if cv > v:
                    v = cv
        if cover_mode:
            if v >= c:
                continue
            rhs = c - 1
        else:
            rhs = v
        viol = xs - rhs
        if viol > best_viol:
            best_viol = viol
            best_mask = mask
    return best_mask, best_viol


def _subset_scan_numpy(cov, x, cover_mode, tol):
    k = cov.shape[0]
    shifts = np.arange(k, dtype=np.int64)
    best_mask, best_viol = 0, tol
    total = 1 << k
    for lo in range(0, total, _CHUNK):
        masks = np.arange(lo, min(lo + _CHUNK, total), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(bool)
        c = bits.sum(axis=1)
        xs = np.where(bits, x[None, :], 0.0).sum(axis=1)
        covered = np.bitwise_count(masks[:, None] & cov[None, :]).astype(np.int64)
        v = np.where(bits, covered, 0).max(axis=1)
        if cover_mode:
            valid = (c >= 2) & (v < c)
            rhs = c - 1
        else:
            valid = c >= 2
            rhs = v
        viol = np.where(valid, xs - rhs, -np.inf)
        i = int(np.argmax(viol))
        if viol[i] > best_viol:
            best_viol = float(viol[i])
            best_mask = int(masks[i])
    return best_mask, best_viol


def best_violated_subset(cov_masks, x, cover_mode=False, tol=1e-6):
    """Most violated subset (bitmask) of a vertex star.

    ``cov_masks[j]`` is the bitmask of star positions covered by an
    alpha-sector anchored at position ``j``.  With ``cover_mode`` False the
    rhs of a subset is its cover value (max covered count); otherwise only
    non-admissible subsets count and the rhs is ``|s| - 1``.  Returns
    ``(mask, violation)`` with mask 0 when nothing exceeds ``tol``.
    """
    cov = np.ascontiguousarray(cov_masks, dtype=np.int64)
    xv = np.ascontiguousarray(x, dtype=np.float64)
    if cov.size < 2:
        return 0, tol
    if use_numba():
        m, v = _subset_scan_loop(cov, xv, bool(cover_mode), float(tol))
        return int(m), float(v)
    return _subset_scan_numpy(cov, xv, bool(cover_mode), float(tol))


# --------------------------------------------------------------------------
# max flow / min cut on a small dense network
# --------------------------------------------------------------------------
@njit
def _max_flow_loop(cap, s, t, eps):
    V = cap.shape[0]
    res = cap.copy()
    flow = 0.0
    pred = np.empty(V, dtype=np.int64)
    queue = np.empty(V, dtype=np.int64)
    while True:
        pred[:] = -1
        pred[s] = s
        head = 0
        tail = 1
        queue[0] = s
        while head < tail and pred[t] == -1:
            u = queue[head]
            head += 1
            for v in range(V):
                if pred[v] == -1 and res[u, v] > eps:
                    pred[v] = u
                    queue[tail] = v
                    tail += 1
        if pred[t] == -1:
            break
        b = np.inf
        v = t
        while v != s:
            u = pred[v]
            if res[u, v] < b:
                b = res[u, v]
            v = u
        v = t
        while v != s:
            u = pred[v]
            res[u, v] -= b
            res[v, u] += b
            v = u
        flow += b
    return flow, pred != -1


def _max_flow_numpy(cap, s, t, eps):
    V = cap.shape[0]
    res = cap.copy()
    flow = 0.0
    while True:
        pred = np.full(V, -1, dtype=np.int64)
        pred[s] = s
        frontier = np.array([s])
        while frontier.size and pred[t] == -1:
            reach = (res[frontier] > eps) & (pred == -1)[None, :]
            has = reach.any(axis=0)
            newv = np.flatnonzero(has)
            pred[newv] = frontier[np.argmax(reach[:, newv], axis=0)]
            frontier = newv
        if pred[t] == -1:
            break
        path = [t]
        while path[-1] != s:
            path.append(int(pred[path[-1]]))
        path = np.array(path[::-1])
        b = res[path[:-1], path[1:]].min()
        res[path[:-1], path[1:]] -= b
        res[path[1:], path[:-1]] += b
        flow += b
    return flow, pred != -1


def min_cut(cap, s, t, eps=1e-12):
    """Max-flow value and the source side of the minimal minimum cut."""
    cap = np.ascontiguousarray(cap, dtype=np.float64)
    if use_numba():
        f, side = _max_flow_loop(cap, int(s), int(t), float(eps))
        return float(f), side
    return _max_flow_numpy(cap, int(s), int(t), float(eps))


# --------------------------------------------------------------------------
# single-source shortest paths on a dense non-negative matrix
# --------------------------------------------------------------------------
@njit
def _dijkstra_loop(W, src, target):
    V = W.shape[0]
    dist = np.full(V, np.inf)
    pred = np.full(V, -1, dtype=np.int64)
    done = np.zeros(V, dtype=np.bool_)
    dist[src] = 0.0
    for _ in range(V):
        u = -1
        best = np.inf
        for v in range(V):
            if not done[v] and dist[v] < best:
                best = dist[v]
                u = v
        if u == -1:
            break
        done[u] = True
        if u == target:
            break
        du = dist[u]
        for v in range(V):
            w = W[u, v]
            if w < np.inf and not done[v] and du + w < dist[v]:
                dist[v] = du + w
                pred[v] = u
    return dist, pred


def _dijkstra_numpy(W, src, target):
    V = W.shape[0]
    dist = np.full(V, np.inf)
    pred = np.full(V, -1, dtype=np.int64)
    done = np.zeros(V, dtype=bool)
    dist[src] = 0.0
    for _ in range(V):
        masked = np.where(done, np.inf, dist)
        u = int(np.argmin(masked))
        if not np.isfinite(masked[u]):
            break
        done[u] = True
        if u == target:
            break
        cand = dist[u] + W[u]
        better = (cand < dist) & ~done & np.isfinite(W[u])
        dist[better] = cand[better]
        pred[better] = u
    return dist, pred


def shortest_path(W, src, target=-1):
    """Dijkstra from ``src`` (stops once ``target`` is settled)."""
    W = np.ascontiguousarray(W, dtype=np.float64)
    if use_numba():
        return _dijkstra_loop(W, int(src), int(target))
    return _dijkstra_numpy(W, int(src), int(target))


# --------------------------------------------------------------------------
# exhaustive spanning-tree enumeration through Pruefer sequences
# --------------------------------------------------------------------------
@njit
def _trees_loop(n, edge_index, adm, weights):
    total = n ** (n - 2)
    masks = np.empty(total, dtype=np.uint64)
    tw = np.empty(total, dtype=np.float64)
    count = 0
    seq = np.zeros(max(n - 2, 1), dtype=np.int64)
    deg = np.empty(n, dtype=np.int64)
    nbr = np.empty(n, dtype=np.int64)
    eids = np.empty(n - 1, dtype=np.int64)
    for _ in range(total):
        deg[:] = 1
        for a in range(n - 2):
            deg[seq[a]] += 1
        nbr[:] = 0
        ne = 0
        for a in range(n - 2):
            leaf = 0
            while deg[leaf] != 1:
                leaf += 1
            u = seq[a]
            eids[ne] = edge_index[leaf, u]
            ne += 1
            nbr[leaf] |= 1 << u
            nbr[u] |= 1 << leaf
            deg[leaf] -= 1
            deg[u] -= 1
        u = -1
        for v in range(n):
            if deg[v] == 1:
                if u == -1:
                    u = v
                else:
                    eids[ne] = edge_index[u, v]
                    nbr[u] |= 1 << v
                    nbr[v] |= 1 << u
                    break
        ok = True
        for v in range(n):
            if not adm[v, nbr[v]]:
                ok = False
                break
        if ok:
            eids.sort()
            m = np.uint64(0)
            w = 0.0
            for a in range(n - 1):
                m |= np.uint64(1) << np.uint64(eids[a])
                w += weights[eids[a]]
            masks[count] = m
            tw[count] = w
            count += 1
        # advance the odometer
        a = n - 3
        while a >= 0:
            seq[a] += 1
            if seq[a] < n:
                break
            seq[a] = 0
            a -= 1
    return masks[:count], tw[:count]


def _trees_numpy(n, edge_index, adm, weights):
    if n == 2:
        seqs = np.zeros((1, 0), dtype=np.int64)
    else:
        seqs = np.stack(np.meshgrid(*[np.arange(n)] * (n - 2), indexing="ij"), -1).reshape(-1, n - 2)
    out_m, out_w = [], []
    for lo in range(0, seqs.shape[0], _CHUNK):
        S = seqs[lo: lo + _CHUNK]
        N = S.shape[0]
        rows = np.arange(N)
        deg = np.ones((N, n), dtype=np.int64)
        for a in range(n - 2):
            np.add.at(deg, (rows, S[:, a]), 1)
        nbr = np.zeros((N, n), dtype=np.int64)
        eids = np.empty((N, n - 1), dtype=np.int64)
        for a in range(n - 2):
            leaf = np.argmax(deg == 1, axis=1)
            u = S[:, a]
            eids[:, a] = edge_index[leaf, u]
            nbr[rows, leaf] |= 1 << u
            nbr[rows, u] |= 1 << leaf
            deg[rows, leaf] -= 1
            deg[rows, u] -= 1
        ones = deg == 1
        u = np.argmax(ones, axis=1)
        v = n - 1 - np.argmax(ones[:, ::-1], axis=1)
        eids[:, n - 2] = edge_index[u, v]
        nbr[rows, u] |= 1 << v
        nbr[rows, v] |= 1 << u
        ok = adm[np.arange(n)[None, :], nbr].all(axis=1)
        e = np.sort(eids[ok], axis=1)
        m = np.bitwise_or.reduce(np.left_shift(np.uint64(1), e.astype(np.uint64)), axis=1)
        w = np.zeros(e.shape[0])
        for a in range(n - 1):
            w += weights[e[:, a]]
        out_m.append(m.astype(np.uint64))
        out_w.append(w)
    return np.concatenate(out_m), np.concatenate(out_w)


def enumerate_trees(n, edge_index, adm, weights):
    """All spanning trees of K_n whose every vertex star passes ``adm``.

    ``adm[v, mask]`` says whether neighbor bitmask ``mask`` is an admissible
    star at ``v``.  Returns (edge bitmasks as uint64, tree weights).
    """
    edge_index = np.ascontiguousarray(edge_index, dtype=np.int64)
    adm = np.ascontiguousarray(adm, dtype=np.bool_)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if use_numba():
        return _trees_loop(int(n), edge_index, adm, weights)
    return _trees_numpy(int(n), edge_index, adm, weights)
