"""Compiled inner loops for lattice Monte Carlo.

All kernels carry a local splitmix64 state passed in as a uint64 seed,
so every replicate is a pure function of its seed.  Graphs arrive as
CSR arrays (indptr/indices) with a parallel array of edge ids.
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

U64_1 = np.uint64(1)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _next_u64(state):
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True, inline="always")
def _rand_below(state, n):
    state, z = _next_u64(state)
    # multiply-high maps 64 random bits to [0, n)
    return state, np.int64((z >> np.uint64(32)) * np.uint64(n) >> np.uint64(32))


# -- Wilson's algorithm on CSR graphs (unit conductances) ----------------


@njit(cache=True)
def wilson_csr(indptr, indices, order, root, seed):
    """Uniform spanning tree via loop-erased walks; returns successor array.

    nxt[v] is v's neighbor on the path toward the root; nxt[root] = -1.
    """
    n = indptr.shape[0] - 1
    nxt = np.full(n, -1, dtype=np.int64)
    intree = np.zeros(n, dtype=np.bool_)
    intree[root] = True
    state = np.uint64(seed)
    for k in range(order.shape[0]):
        v = order[k]
        while not intree[v]:
            deg = indptr[v + 1] - indptr[v]
            state, j = _rand_below(state, deg)
            w = indices[indptr[v] + j]
            nxt[v] = w
            v = w
        v = order[k]
        while not intree[v]:
            intree[v] = True
            v = nxt[v]
    return nxt


@njit(cache=True)
def wilson_mask_batch(indptr, indices, eid, order, root, seeds):
    """Batch of USTs on a graph with <= 64 edges, packed as edge-bit masks."""
    n = indptr.shape[0] - 1
    out = np.zeros(seeds.shape[0], dtype=np.uint64)
    nxt = np.empty(n, dtype=np.int64)
    intree = np.empty(n, dtype=np.bool_)
    for s in range(seeds.shape[0]):
        state = np.uint64(seeds[s])
        for i in range(n):
            nxt[i] = -1
            intree[i] = False
        intree[root] = True
        for k in range(order.shape[0]):
            v = order[k]
            while not intree[v]:
                deg = indptr[v + 1] - indptr[v]
                state, j = _rand_below(state, deg)
                nxt[v] = indptr[v] + j
                v = indices[indptr[v] + j]
            v = order[k]
            while not intree[v]:
                intree[v] = True
                out[s] |= U64_1 << np.uint64(eid[nxt[v]])
                v = indices[nxt[v]]
    return out


# -- loop-erased walks on Z^2 --------------------------------------------


@njit(cache=True)
def _lerw_to_radius(N, state, px, py, lastidx, W, off):
    """LERW from the origin to the first exit of B(0, N).

    px/py hold the current simple path; lastidx is a (W*W) workspace of
    -1 entries (restored before returning).  Returns (path length in
    vertices, raw walk steps, state).
    """
    n2 = np.int64(N) * np.int64(N)
    x = np.int64(0)
    y = np.int64(0)
    plen = 1
    px[0] = 0
    py[0] = 0
    lastidx[off * W + off] = 0
    steps = np.int64(0)
    while x * x + y * y < n2:
        state, j = _rand_below(state, 4)
        if j == 0:
            x += 1
        elif j == 1:
            x -= 1
        elif j == 2:
            y += 1
        else:
            y -= 1
        steps += 1
        cell = (x + off) * W + (y + off)
        prev = lastidx[cell]
        if prev >= 0:
            # erase the loop: clear the suffix markers
            for t in range(prev + 1, plen):
                lastidx[(px[t] + off) * W + (py[t] + off)] = -1
            plen = prev + 1
        else:
            lastidx[cell] = plen
            px[plen] = x
            py[plen] = y
            plen += 1
    for t in range(plen):
        lastidx[(px[t] + off) * W + (py[t] + off)] = -1
    return plen, steps, state


@njit(cache=True)
def lerw_length_batch(N, seeds):
    """Edge counts of LERWs from 0 to the boundary of B(0, N)."""
    W = 2 * N + 5
    off = N + 2
    maxlen = W * W + 4
    px = np.empty(maxlen, dtype=np.int64)
    py = np.empty(maxlen, dtype=np.int64)
    lastidx = np.full(W * W, -1, dtype=np.int64)
    out = np.empty(seeds.shape[0], dtype=np.int64)
    for s in range(seeds.shape[0]):
        plen, _, _ = _lerw_to_radius(N, np.uint64(seeds[s]), px, py, lastidx, W, off)
        out[s] = plen - 1
    return out


@njit(cache=True)
def escape_batch(L, N, seeds):
    """Indicator samples of the walk/loop-erasure avoidance event.

    Per replicate: Y is a walk from 0 stopped on exiting B(N); its loop
    erasure beyond the last visit of B(L) is marked; an independent walk
    X from 0 (same stopping) scores 1 iff it never touches the marks.
    """
    W = 2 * N + 5
    off = N + 2
    maxlen = W * W + 4
    px = np.empty(maxlen, dtype=np.int64)
    py = np.empty(maxlen, dtype=np.int64)
    lastidx = np.full(W * W, -1, dtype=np.int64)
    marks = np.zeros(W * W, dtype=np.bool_)
    out = np.empty(seeds.shape[0], dtype=np.int64)
    l2 = np.int64(L) * np.int64(L)
    n2 = np.int64(N) * np.int64(N)
    for s in range(seeds.shape[0]):
        state = np.uint64(seeds[s])
        plen, _, state = _lerw_to_radius(N, state, px, py, lastidx, W, off)
        start = 0
        for t in range(plen):
            if px[t] * px[t] + py[t] * py[t] <= l2:
                start = t
        for t in range(start, plen):
            marks[(px[t] + off) * W + (py[t] + off)] = True
        hit = marks[off * W + off]
        x = np.int64(0)
        y = np.int64(0)
        while not hit and x * x + y * y < n2:
            state, j = _rand_below(state, 4)
            if j == 0:
                x += 1
            elif j == 1:
                x -= 1
            elif j == 2:
                y += 1
            else:
                y -= 1
            if marks[(x + off) * W + (y + off)]:
                hit = True
        out[s] = 0 if hit else 1
        for t in range(start, plen):
            marks[(px[t] + off) * W + (py[t] + off)] = False
    return out


# -- union-find / tree analysis helpers -----------------------------------


@njit(cache=True, inline="always")
def _uf_find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def tree_depths(nxt, root):
    """Depth of each vertex in a successor-array tree (root depth 0)."""
    n = nxt.shape[0]
    depth = np.full(n, -1, dtype=np.int64)
    depth[root] = 0
    stack = np.empty(n, dtype=np.int64)
    for v in range(n):
        if depth[v] >= 0:
            continue
        top = 0
        u = v
        while depth[u] < 0:
            stack[top] = u
            top += 1
            u = nxt[u]
        d = depth[u]
        while top > 0:
            top -= 1
            d += 1
            depth[stack[top]] = d
    return depth


@njit(cache=True)
def crossing_components(eu, ev, emask, norms, lo, hi, ring_lo, ring_hi, delta):
    """Representatives of annulus-crossing components of a masked edge set.

    An edge participates when both endpoint norms are in [lo, hi+delta).  A
    component crosses when it meets the inner ring [lo, lo+delta) and
    the outer ring [hi, hi+delta)... both rings computed from ring_lo,
    ring_hi bands.  Returns (labels, reps) where reps[i] is component
    i's vertex closest to the center, reps truncated to crossing comps.
    """
    n = norms.shape[0]
    parent = np.arange(n)
    for k in range(eu.shape[0]):
        if not emask[k]:
            continue
        a, b = eu[k], ev[k]
        if lo <= norms[a] < hi + delta and lo <= norms[b] < hi + delta:
            ra = _uf_find(parent, a)
            rb = _uf_find(parent, b)
            if ra != rb:
                parent[rb] = ra
    touch_in = np.zeros(n, dtype=np.bool_)
    touch_out = np.zeros(n, dtype=np.bool_)
    closest = np.full(n, -1, dtype=np.int64)
    for v in range(n):
        if not (lo <= norms[v] < hi + delta):
            continue
        r = _uf_find(parent, v)
        if ring_lo <= norms[v] < ring_lo + delta:
            touch_in[r] = True
        if ring_hi <= norms[v] < ring_hi + delta:
            touch_out[r] = True
        if closest[r] < 0 or norms[v] < norms[closest[r]]:
            closest[r] = v
    reps = np.empty(n, dtype=np.int64)
    cnt = 0
    for r in range(n):
        if touch_in[r] and touch_out[r]:
            reps[cnt] = closest[r]
            cnt += 1
    return reps[:cnt]


@njit(cache=True)
def joined_within(nxt, depth, norms, u, v, radius):
    """True iff the tree path u..v only uses edges inside B(0, radius)."""
    a, b = u, v
    while a != b:
        if depth[a] < depth[b]:
            a, b = b, a
        p = nxt[a]
        if norms[a] > radius or norms[p] > radius:
            return False
        a = p
    return True


@njit(cache=True)
def count_crossing_components(eu, ev, emask, norms, lo, hi, delta):
    """Connected components of the masked edge set inside the closed
    annulus [lo, hi] touching the inner ring [lo, lo+delta) and the outer
    ring (hi-delta, hi] (K statistic).  The closed-ball outer ring keeps
    the discretization bias small at coarse delta/hi; an exterior ring
    [hi, hi+delta) drags the count visibly below its limit."""
    hi_in = hi - delta + 1e-9 * delta
    reps = crossing_components(eu, ev, emask, norms, lo, hi_in, lo, hi_in, delta)
    return reps.shape[0]


@njit(cache=True)
def build_adjacency(n, eu, ev, emask):
    """CSR adjacency of the masked edge subset."""
    deg = np.zeros(n + 1, dtype=np.int64)
    m = 0
    for k in range(eu.shape[0]):
        if emask[k]:
            deg[eu[k] + 1] += 1
            deg[ev[k] + 1] += 1
            m += 1
    indptr = np.cumsum(deg)
    indices = np.empty(2 * m, dtype=np.int64)
    fill = indptr[:-1].copy()
    for k in range(eu.shape[0]):
        if emask[k]:
            indices[fill[eu[k]]] = ev[k]
            fill[eu[k]] += 1
            indices[fill[ev[k]]] = eu[k]
            fill[ev[k]] += 1
    return indptr, indices


@njit(cache=True)
def bfs_tree_parents(indptr, indices, root):
    """Parents/depths of a tree given as CSR adjacency (-2 = unreached)."""
    n = indptr.shape[0] - 1
    parent = np.full(n, -2, dtype=np.int64)
    depth = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    parent[root] = -1
    depth[root] = 0
    queue[0] = root
    head, tail = 0, 1
    while head < tail:
        v = queue[head]
        head += 1
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if parent[w] == -2:
                parent[w] = v
                depth[w] = depth[v] + 1
                queue[tail] = w
                tail += 1
    return parent, depth
