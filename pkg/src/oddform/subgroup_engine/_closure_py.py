"""Pure numpy versions of the packed GF(2) kernels (same API as the compiled core)."""

import numpy as np

_U = np.uint64


def _rows(xs, d):
    m = _U((1 << d) - 1)
    return [(xs >> _U(k * d)) & m for k in range(d)]


def _mul_fixed_left(g, xs, d):
    """g * x for a fixed python-int g and an array of x."""
    m = (1 << d) - 1
    rows = _rows(xs, d)
    out = np.zeros(xs.shape, dtype=_U)
    for i in range(d):
        gi = (g >> (i * d)) & m
        r = np.zeros(xs.shape, dtype=_U)
        k = 0
        while gi:
            if gi & 1:
                r ^= rows[k]
            gi >>= 1
            k += 1
        out |= r << _U(i * d)
    return out


def _mul_arrays(xs, ys, d):
    m = _U((1 << d) - 1)
    one = _U(1)
    yrows = _rows(ys, d)
    out = np.zeros(np.broadcast(xs, ys).shape, dtype=_U)
    for i in range(d):
        xi = (xs >> _U(i * d)) & m
        r = np.zeros(out.shape, dtype=_U)
        for k in range(d):
            bit = (xi >> _U(k)) & one
            r ^= yrows[k] * bit
        out |= r << _U(i * d)
    return out


def mul_left(g, xs, d, threads=1):
    return _mul_fixed_left(int(g), np.asarray(xs, dtype=_U), d)


def mul_right(xs, g, d, threads=1):
    xs = np.asarray(xs, dtype=_U)
    return _mul_arrays(xs, np.full(xs.shape, g, dtype=_U), d)


def mul_pairs(xs, ys, d, threads=1):
    return _mul_arrays(np.asarray(xs, dtype=_U), np.asarray(ys, dtype=_U), d)


def row_tables(gens, d):
    m = (1 << d) - 1
    gens = [int(g) for g in np.asarray(gens, dtype=_U)]
    tabs = np.zeros((len(gens), 1 << d), dtype=_U)
    for j, g in enumerate(gens):
        rows = [(g >> (k * d)) & m for k in range(d)]
        for v in range(1 << d):
            acc = 0
            for k in range(d):
                if v >> k & 1:
                    acc ^= rows[k]
            tabs[j, v] = acc
    return tabs


def _mul_tab(xs, tab, d):
    m = _U((1 << d) - 1)
    out = np.zeros(xs.shape, dtype=_U)
    for i in range(d):
        out |= tab[((xs >> _U(i * d)) & m).astype(np.intp)] << _U(i * d)
    return out


def bfs(gens, visited, frontier, d, budget, threads=1, block=65536):
    """Saturate ``visited`` under right multiplication by ``gens``."""
    visited = np.unique(np.asarray(visited, dtype=_U))
    cur = np.unique(np.asarray(frontier, dtype=_U))
    tabs = row_tables(gens, d)
    hit = False
    while len(cur) and len(tabs):
        parts = []
        for k in range(0, len(cur), block):
            blk = cur[k:k + block]
            parts.extend(_mul_tab(blk, t, d) for t in tabs)
        cand = np.unique(np.concatenate(parts))
        new = cand[~np.isin(cand, visited, assume_unique=True)]
        if len(visited) + len(new) > budget:
            new = new[: max(budget - len(visited) + 1, 0)]
            hit = True
        visited = np.union1d(visited, new)
        cur = new
        if hit:
            break
    return visited, hit


def orbit(conj_l, conj_r, start, d, budget):
    seen = np.array([start], dtype=_U)
    cur = seen
    pairs = list(zip((int(a) for a in conj_l), (int(b) for b in conj_r)))
    while len(cur):
        cand = np.unique(np.concatenate(
            [_mul_arrays(_mul_fixed_left(a, cur, d), np.full(cur.shape, b, dtype=_U), d) for a, b in pairs]
            or [np.empty(0, dtype=_U)]))
        new = cand[~np.isin(cand, seen, assume_unique=True)]
        seen = np.union1d(seen, new)
        cur = new
        if len(seen) > budget:
            return seen, True
    return seen, False
