"""Finite subgroups as explicit element sets: closure, normal closure, orbits.

Over F2 with 2n+1 <= 8 every matrix packs into one uint64 and the heavy
lifting happens in ``backend.kernel``.  Other contexts use a generic BFS keyed
by the raw bytes of the code matrix; it is only meant for small subgroups.
"""

from __future__ import annotations

import numpy as np

from ..errors import BudgetExceeded
from ..heisenberg import FormParam
from ..ring import HermitianCtx
from ..unitary import eps, hpow, identity, minv, minv_batch, t_extra, t_short, theta_hb
from . import backend
from .predicates import membership_cu, membership_nu, membership_pcs  # noqa: F401

DEFAULT_BUDGET = 8_000_000


# -- packing ----------------------------------------------------------------------

def packable(ctx: HermitianCtx) -> bool:
    return ctx.q == 2 and ctx.dim <= 8 and ctx.zero == 0 and ctx.one == 1


def _weights(d):
    return (np.uint64(1) << np.arange(d * d, dtype=np.uint64)).reshape(d, d)


def pack(S: np.ndarray) -> np.ndarray:
    """Packed codes of a matrix or a ``(N, d, d)`` stack of F2 matrices."""
    S = np.asarray(S)
    d = S.shape[-1]
    w = _weights(d)
    return np.bitwise_or.reduce((S.astype(np.uint64) * w).reshape(*S.shape[:-2], d * d), axis=-1)


def unpack(codes, d: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.uint64)
    bits = (codes[..., None] >> np.arange(d * d, dtype=np.uint64)) & np.uint64(1)
    return bits.reshape(*codes.shape, d, d).astype(np.intp)


def _key(s) -> bytes:
    return np.ascontiguousarray(s, dtype=np.int16).tobytes()


# -- the group container -----------------------------------------------------------

class GroupSet:
    """A finite subgroup given by its full element set and a generating list."""

    def __init__(self, ctx: HermitianCtx, generators, codes=None, elements=None, budget_hit=False):
        self.ctx = ctx
        self.generators = [np.asarray(g) for g in generators]
        self.packed = codes is not None
        self.codes = codes
        self._elements = elements  # dict key -> matrix in generic mode
        self.budget_hit = budget_hit

    def __len__(self):
        return len(self.codes) if self.packed else len(self._elements)

    def __repr__(self):
        return f"GroupSet(order={len(self)}, gens={len(self.generators)})"

    def __contains__(self, s) -> bool:
        return bool(self.contains_many(np.asarray(s)[None])[0])

    def contains_many(self, S) -> np.ndarray:
        S = np.asarray(S)
        if self.packed:
            c = pack(S)
            idx = np.searchsorted(self.codes, c)
            idx = np.minimum(idx, len(self.codes) - 1)
            return self.codes[idx] == c
        return np.array([_key(s) in self._elements for s in S], dtype=bool)

    def contains_codes(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=np.uint64)
        idx = np.minimum(np.searchsorted(self.codes, c), len(self.codes) - 1)
        return self.codes[idx] == c

    def iter_matrices(self, chunk: int = 100_000):
        """Yield the elements as ``(N, d, d)`` code stacks in a fixed order."""
        if self.packed:
            for k in range(0, len(self.codes), chunk):
                yield unpack(self.codes[k:k + chunk], self.ctx.dim)
        else:
            keys = sorted(self._elements)
            for k in range(0, len(keys), chunk):
                yield np.stack([self._elements[x] for x in keys[k:k + chunk]])

    def matrices(self) -> np.ndarray:
        parts = list(self.iter_matrices())
        return np.concatenate(parts) if parts else np.empty((0, self.ctx.dim, self.ctx.dim), dtype=np.intp)

    def issubset(self, other: "GroupSet") -> bool:
        if self.packed and other.packed:
            return bool(other.contains_codes(self.codes).all())
        return all(other.contains_many(m).all() for m in self.iter_matrices())

    def is_closed(self) -> bool:
        """Contains the identity and is stable under left multiplication by its generators."""
        ctx = self.ctx
        if identity(ctx) not in self:
            return False
        for g in self.generators:
            for S in self.iter_matrices():
                if not self.contains_many(ctx.matmul(g, S)).all():
                    return False
        return True

    def fingerprint(self) -> str:
        import hashlib
        h = hashlib.sha256()
        for S in self.iter_matrices():
            h.update(np.ascontiguousarray(S, dtype=np.int16).tobytes())
        return h.hexdigest()


# -- generators --------------------------------------------------------------------

def eu_generators(P) -> list:
    """All nontrivial elementary transvections of level ``P``, in a fixed order."""
    ctx = P.ctx
    n = ctx.n
    hb = theta_hb(n)
    out = []
    ideal = sorted(P.ideal.elements)
    for i in hb:
        for j in hb:
            if i in (j, -j):
                continue
            for x in ideal:
                if x != ctx.zero:
                    out.append(t_short(ctx, i, j, x))
    for i in hb:
        for a in sorted(P.omega.elements):
            if a != (ctx.zero, ctx.zero):
                out.append(t_extra(ctx, i, hpow(ctx, a, -eps(i))))
    return out


def full_eu_generators(ctx: HermitianCtx, D: FormParam) -> list:
    from ..formideal import full_off
    return eu_generators(full_off(D))


def _distinct(mats):
    seen, out = set(), []
    for m in mats:
        k = _key(m)
        if k not in seen:
            seen.add(k)
            out.append(np.asarray(m))
    return out


def _with_inverses(ctx, mats):
    mats = _distinct(mats)
    if not mats:
        return mats
    return _distinct(mats + list(minv_batch(ctx, np.stack(mats))))


# -- closure -----------------------------------------------------------------------

def closure(ctx: HermitianCtx, gens, budget: int = DEFAULT_BUDGET, threads: int | None = None,
            kernel=None) -> GroupSet:
    """The subgroup generated by ``gens``; raises ``BudgetExceeded`` when it grows past ``budget``."""
    gens = _distinct(gens)
    e = identity(ctx)
    if packable(ctx):
        return _extend_packed(ctx, GroupSet(ctx, [], codes=pack(e)[None].astype(np.uint64)), gens,
                              budget, threads, kernel)
    return _extend_generic(ctx, GroupSet(ctx, [], elements={_key(e): e}), gens, budget)


def extend(G: GroupSet, new_gens, budget: int = DEFAULT_BUDGET, threads=None, kernel=None) -> GroupSet:
    """The subgroup generated by ``G`` and ``new_gens``."""
    if G.packed:
        return _extend_packed(G.ctx, G, new_gens, budget, threads, kernel)
    return _extend_generic(G.ctx, G, new_gens, budget)


def _extend_packed(ctx, G, new_gens, budget, threads, kernel):
    k = kernel or backend.kernel
    threads = threads or backend.default_threads()
    d = ctx.dim
    new_gens = _distinct(new_gens)
    all_gens = _distinct(G.generators + new_gens)
    if not new_gens:
        return GroupSet(ctx, all_gens, codes=G.codes, budget_hit=G.budget_hit)
    gcodes = np.ascontiguousarray(pack(np.stack(all_gens)), dtype=np.uint64)
    ncodes = pack(np.stack(new_gens))
    # products of the new generators with the current elements seed the search
    seeds = np.unique(np.concatenate([k.mul_right(G.codes, np.uint64(g), d, threads) for g in ncodes]))
    seeds = seeds[~G.contains_codes(seeds)] if len(G.codes) else seeds
    visited = np.ascontiguousarray(np.union1d(G.codes, seeds), dtype=np.uint64)
    if len(visited) > budget:
        raise BudgetExceeded(len(visited), budget)
    codes, hit = k.bfs(gcodes, visited, np.ascontiguousarray(seeds, dtype=np.uint64), d, budget, threads)
    if hit:
        raise BudgetExceeded(len(codes), budget)
    return GroupSet(ctx, all_gens, codes=np.asarray(codes, dtype=np.uint64))


def _extend_generic(ctx, G, new_gens, budget):
    new_gens = _distinct(new_gens)
    all_gens = _distinct(G.generators + new_gens)
    elems = dict(G._elements)
    if not new_gens:
        return GroupSet(ctx, all_gens, elements=elems)
    frontier = []
    cur = np.stack(list(elems.values()))
    for g in new_gens:
        for m in ctx.matmul(g, cur):
            kk = _key(m)
            if kk not in elems:
                elems[kk] = m
                frontier.append(m)
    while frontier:
        if len(elems) > budget:
            raise BudgetExceeded(len(elems), budget)
        F = np.stack(frontier)
        frontier = []
        for g in all_gens:
            for m in ctx.matmul(g, F):
                kk = _key(m)
                if kk not in elems:
                    elems[kk] = np.asarray(m, dtype=np.intp)
                    frontier.append(m)
    if len(elems) > budget:
        raise BudgetExceeded(len(elems), budget)
    return GroupSet(ctx, all_gens, elements=elems)


# -- conjugation -------------------------------------------------------------------

def conjugate(ctx: HermitianCtx, x, a, ainv=None):
    """``x^a = a^-1 x a``."""
    ainv = minv(ctx, a) if ainv is None else ainv
    return ctx.matmul(ctx.matmul(ainv, x), a)


def conjugate_left(ctx: HermitianCtx, x, a, ainv=None):
    """``^a x = a x a^-1``."""
    ainv = minv(ctx, a) if ainv is None else ainv
    return ctx.matmul(ctx.matmul(a, x), ainv)


def conj_orbit(ctx: HermitianCtx, x, ambient, budget: int = DEFAULT_BUDGET):
    """All conjugates of ``x`` by the group generated by ``ambient`` (as a code array or stack)."""
    amb = _with_inverses(ctx, ambient)
    if packable(ctx):
        k = backend.kernel
        if not amb:
            return pack(x)[None].astype(np.uint64)
        left = np.ascontiguousarray(pack(np.stack(amb)), dtype=np.uint64)
        right = np.ascontiguousarray(pack(minv_batch(ctx, np.stack(amb))), dtype=np.uint64)
        out, hit = k.orbit(left, right, np.uint64(pack(x)), ctx.dim, budget)
        if hit:
            raise BudgetExceeded(len(out), budget)
        return np.asarray(out, dtype=np.uint64)
    seen = {_key(x): np.asarray(x)}
    todo = [np.asarray(x)]
    invs = [minv(ctx, a) for a in amb]
    while todo:
        y = todo.pop()
        for a, ai in zip(amb, invs):
            z = ctx.matmul(ctx.matmul(a, y), ai)
            kk = _key(z)
            if kk not in seen:
                seen[kk] = z
                todo.append(z)
                if len(seen) > budget:
                    raise BudgetExceeded(len(seen), budget)
    return np.stack([seen[k] for k in sorted(seen)])


def orbit_inside(G: GroupSet, x, ambient, budget: int = DEFAULT_BUDGET) -> bool:
    """Is every conjugate of ``x`` by ``<ambient>`` an element of ``G``?"""
    if x not in G:
        return False
    orb = conj_orbit(G.ctx, x, ambient, budget)
    if G.packed:
        return bool(G.contains_codes(orb).all())
    return bool(G.contains_many(orb).all())


def normal_closure(ctx: HermitianCtx, seed, ambient, budget: int = DEFAULT_BUDGET, threads=None,
                   kernel=None) -> GroupSet:
    """Smallest subgroup containing ``seed`` and stable under conjugation by ``ambient``."""
    amb = _with_inverses(ctx, ambient)
    invs = [minv(ctx, a) for a in amb]
    G = closure(ctx, seed, budget, threads, kernel)
    pending = list(G.generators)
    while pending:
        new = []
        for g in pending:
            for a, ai in zip(amb, invs):
                c = ctx.matmul(ctx.matmul(ai, g), a)
                if c not in G and all(not np.array_equal(c, m) for m in new):
                    new.append(c)
        if not new:
            break
        G = extend(G, new, budget, threads, kernel)
        pending = new
    return G


def membership(G: GroupSet, s) -> bool:
    return s in G


def random_elements(G: GroupSet, count: int, rng) -> np.ndarray:
    """Uniform sample (with replacement) of elements of ``G``."""
    if G.packed:
        idx = rng.integers(0, len(G.codes), size=count)
        return unpack(G.codes[idx], G.ctx.dim)
    keys = sorted(G._elements)
    idx = rng.integers(0, len(keys), size=count)
    return np.stack([G._elements[keys[i]] for i in idx])
