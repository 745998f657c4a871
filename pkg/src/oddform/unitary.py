"""The module M = R^(2n+1), the forms B and Q, and the group U_{2n+1}(R, Delta).

Matrices and vectors are numpy integer arrays of ring codes, indexed by
position.  Positions follow the basis order e_1..e_n, e_0, e_-n..e_-1; use
``pos`` to go from a signed index to a position.  Most functions accept a
leading batch axis.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np

from .errors import BadIndices, NotInParameter, NotInvertible, PreconditionViolated
from .heisenberg import FormParam, hplus, twist_elem, untwist_elem, vhminus, vhplus
from .ring import HermitianCtx

EXHAUSTIVE_Q_LIMIT = 2 ** 21


# -- indexing -----------------------------------------------------------------

def theta(n: int) -> list[int]:
    return list(range(1, n + 1)) + [0] + list(range(-n, 0))


def theta_hb(n: int) -> list[int]:
    return [i for i in theta(n) if i != 0]


def pos(n: int, i: int) -> int:
    if not -n <= i <= n:
        raise BadIndices(f"index {i} outside -{n}..{n}")
    if i > 0:
        return i - 1
    if i == 0:
        return n
    return 2 * n + 1 + i


def eps(i: int) -> int:
    if i == 0:
        raise BadIndices("eps is undefined at 0")
    return 1 if i > 0 else -1


@lru_cache(maxsize=None)
def _reverse_perm(n: int) -> np.ndarray:
    """Position of ``-i`` for every position of ``i``."""
    return np.array([pos(n, -i) for i in theta(n)], dtype=np.intp)


# -- basic matrix plumbing ------------------------------------------------------

def identity(ctx: HermitianCtx) -> np.ndarray:
    e = np.full((ctx.dim, ctx.dim), ctx.zero, dtype=np.intp)
    np.fill_diagonal(e, ctx.one)
    return e


def basis(ctx: HermitianCtx, i: int) -> np.ndarray:
    v = np.full(ctx.dim, ctx.zero, dtype=np.intp)
    v[pos(ctx.n, i)] = ctx.one
    return v


def unit_matrix(ctx: HermitianCtx, i: int, j: int) -> np.ndarray:
    m = np.full((ctx.dim, ctx.dim), ctx.zero, dtype=np.intp)
    m[pos(ctx.n, i), pos(ctx.n, j)] = ctx.one
    return m


def entry(ctx: HermitianCtx, s: np.ndarray, i: int, j: int) -> int:
    return int(s[..., pos(ctx.n, i), pos(ctx.n, j)])


def col(ctx: HermitianCtx, s: np.ndarray, j: int) -> np.ndarray:
    return s[..., :, pos(ctx.n, j)]


def row(ctx: HermitianCtx, s: np.ndarray, i: int) -> np.ndarray:
    return s[..., pos(ctx.n, i), :]


def mmul(ctx: HermitianCtx, *mats) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = ctx.matmul(out, m)
    return out


def madd(ctx, a, b):
    return ctx.add_t[a, b]


def msub(ctx, a, b):
    return ctx.sub_t[a, b]


def mbar(ctx, a):
    return ctx.bar_t[a]


def scal(ctx, x: int, a):
    return ctx.mul_t[x, a]


def outer(ctx, u, w):
    """Column ``u`` times row ``w``."""
    return ctx.mul_t[np.asarray(u)[..., :, None], np.asarray(w)[..., None, :]]


def equal(a, b) -> bool:
    return bool(np.array_equal(a, b))


# -- forms --------------------------------------------------------------------

@lru_cache(maxsize=None)
def _gram_cached(ctx_id, ctx) -> np.ndarray:
    n = ctx.n
    g = np.full((ctx.dim, ctx.dim), ctx.zero, dtype=np.intp)
    for i in theta_hb(n):
        g[pos(n, i), pos(n, -i)] = ctx.one if i > 0 else ctx.lam
    g[n, n] = ctx.mu
    return g


def gram(ctx: HermitianCtx) -> np.ndarray:
    """Matrix ``G`` with ``B(u, v) = bar(u)^t G v``."""
    return _gram_cached(id(ctx), ctx)


def form_B(ctx: HermitianCtx, u, v) -> int:
    n = ctx.n
    acc = ctx.zero
    for i in theta(n):
        a = ctx.bar(int(u[pos(n, i)]))
        b = int(v[pos(n, -i)])
        c = ctx.one if i > 0 else (ctx.mu if i == 0 else ctx.lam)
        acc = ctx.add(acc, ctx.mul(a, c, b))
    return acc


def form_Q(ctx: HermitianCtx, u) -> tuple:
    n = ctx.n
    y = ctx.zero
    for i in range(1, n + 1):
        y = ctx.add(y, ctx.mul(ctx.bar(int(u[pos(n, i)])), int(u[pos(n, -i)])))
    return int(u[n]), y


def q_batch(ctx: HermitianCtx, V: np.ndarray):
    """``Q`` applied along the last axis of ``V``; returns ``(x, y)`` arrays."""
    n = ctx.n
    V = np.asarray(V)
    y = np.full(V.shape[:-1], ctx.zero, dtype=np.intp)
    for i in range(1, n + 1):
        y = ctx.add_t[y, ctx.mul_t[ctx.bar_t[V[..., i - 1]], V[..., 2 * n + 1 - i]]]
    return V[..., n], y


def q_columns(ctx: HermitianCtx, s: np.ndarray):
    """``Q(s_{*j})`` for every column position j: arrays of shape ``(..., d)``."""
    n = ctx.n
    s = np.asarray(s)
    y = np.full(s.shape[:-2] + s.shape[-1:], ctx.zero, dtype=np.intp)
    for i in range(1, n + 1):
        y = ctx.add_t[y, ctx.mul_t[ctx.bar_t[s[..., i - 1, :]], s[..., 2 * n + 1 - i, :]]]
    return s[..., n, :], y


def polarity(ctx: HermitianCtx, u) -> np.ndarray:
    """The row ``u~`` with ``u~ v = B(u, v)``."""
    u = np.asarray(u)
    G = gram(ctx)
    return ctx.matmul(ctx.bar_t[u][..., None, :], G)[..., 0, :]


# -- inverse --------------------------------------------------------------------

def _det_subset(ctx: HermitianCtx, a: list) -> int:
    """Determinant by dynamic programming over column subsets (no division)."""
    m = len(a)
    if m == 0:
        return ctx.one
    f = {0: ctx.one}
    for r in range(m):
        g = {}
        for mask, val in f.items():
            for c in range(m):
                if mask >> c & 1:
                    continue
                higher = bin(mask >> (c + 1)).count("1")
                term = ctx.mul(val, a[r][c])
                if higher % 2:
                    term = ctx.neg(term)
                nm = mask | (1 << c)
                g[nm] = ctx.add(g.get(nm, ctx.zero), term)
        f = g
    return f[(1 << m) - 1]


def det(ctx: HermitianCtx, s: np.ndarray) -> int:
    return _det_subset(ctx, [[int(x) for x in r] for r in s])


def _minv_adjugate(ctx: HermitianCtx, s: np.ndarray) -> np.ndarray:
    a = [[int(x) for x in r] for r in s]
    d = _det_subset(ctx, a)
    inv = ctx.ring.inverse(d)
    if inv is None:
        raise NotInvertible("determinant is not a unit")
    m = len(a)
    out = np.empty((m, m), dtype=np.intp)
    for i in range(m):
        for j in range(m):
            minor = [[a[r][c] for c in range(m) if c != i] for r in range(m) if r != j]
            cof = _det_subset(ctx, minor)
            if (i + j) % 2:
                cof = ctx.neg(cof)
            out[i, j] = ctx.mul(cof, inv)
    return out


def _unit_tables(ctx: HermitianCtx):
    q = ctx.q
    is_unit = np.zeros(q, dtype=bool)
    inv = np.zeros(q, dtype=np.intp)
    for u in ctx.ring.units:
        is_unit[u] = True
        inv[u] = ctx.ring.inverse(u)
    return is_unit, inv


def minv_batch(ctx: HermitianCtx, S: np.ndarray) -> np.ndarray:
    """Inverse of every matrix in a ``(N, d, d)`` stack.

    Gauss-Jordan with unit pivots handles every invertible matrix over a
    local ring; matrices where no unit pivot exists fall back to the
    adjugate formula.
    """
    S = np.asarray(S, dtype=np.intp)
    N, d, _ = S.shape
    is_unit, inv = _unit_tables(ctx)
    A = S.copy()
    B = np.broadcast_to(identity(ctx), S.shape).copy()
    ok = np.ones(N, dtype=bool)
    ar = np.arange(N)
    M, Sub = ctx.mul_t, ctx.sub_t
    for c in range(d):
        cand = is_unit[A[:, c:, c]]
        has = cand.any(axis=1)
        ok &= has
        p = c + np.argmax(cand, axis=1)
        # swap rows c and p
        rc, rp = A[ar, c].copy(), A[ar, p].copy()
        A[ar, c], A[ar, p] = rp, rc
        rc, rp = B[ar, c].copy(), B[ar, p].copy()
        B[ar, c], B[ar, p] = rp, rc
        f = inv[A[:, c, c]]
        A[:, c] = M[f[:, None], A[:, c]]
        B[:, c] = M[f[:, None], B[:, c]]
        fac = A[:, :, c].copy()
        fac[:, c] = ctx.zero
        A = Sub[A, M[fac[:, :, None], A[:, c][:, None, :]]]
        B = Sub[B, M[fac[:, :, None], B[:, c][:, None, :]]]
    if not ok.all():
        for k in np.flatnonzero(~ok):
            B[k] = _minv_adjugate(ctx, S[k])
    return B


_INV_CACHE_SIZE = 1 << 14


def minv(ctx: HermitianCtx, s: np.ndarray) -> np.ndarray:
    """Inverse of one matrix.  Recent results are cached; the returned array is read-only."""
    s = np.asarray(s, dtype=np.intp)
    cache = ctx.__dict__.setdefault("_inv_cache", {})
    key = s.tobytes()
    out = cache.get(key)
    if out is None:
        out = minv_batch(ctx, s[None])[0]
        out.setflags(write=False)
        if len(cache) >= _INV_CACHE_SIZE:
            cache.clear()
        cache[key] = out
    return out


# -- membership predicates -------------------------------------------------------

@lru_cache(maxsize=None)
def _lam_factors(ctx_id, ctx):
    n = ctx.n
    a = np.full(ctx.dim, ctx.one, dtype=np.intp)
    b = np.full(ctx.dim, ctx.one, dtype=np.intp)
    for i in theta_hb(n):
        a[pos(n, i)] = ctx.lambda_power(-(eps(i) + 1) // 2)
        b[pos(n, i)] = ctx.lambda_power((eps(i) + 1) // 2)
    m = np.full(ctx.dim, ctx.one, dtype=np.intp)
    m[n] = ctx.mu
    return a, b, m


def lemma_conditions(ctx: HermitianCtx, S: np.ndarray, D: FormParam, Sinv=None):
    """Evaluate the entrywise and column-Q criteria for a stack of matrices.

    Returns ``(cond_i, cond_ii)`` boolean arrays over the batch.
    """
    S = np.asarray(S)
    single = S.ndim == 2
    if single:
        S = S[None]
    if Sinv is None:
        Sinv = minv_batch(ctx, S)
    elif single:
        Sinv = np.asarray(Sinv)[None]
    n = ctx.n
    a, b, m = _lam_factors(id(ctx), ctx)
    rev = _reverse_perm(n)
    M = ctx.mul_t
    P = np.swapaxes(ctx.bar_t[S][:, rev][:, :, rev], 1, 2)
    lhs = M[m[None, :, None], Sinv]
    rhs = M[M[a[None, :, None], P], M[b, m][None, None, :]]
    c1 = (lhs == rhs).all(axis=(1, 2))
    x, y = q_columns(ctx, S)
    dx, dy = vhminus(ctx, np.where(np.arange(ctx.dim) == n, ctx.one, ctx.zero), np.full(ctx.dim, ctx.zero))
    x, y = vhplus(ctx, x, y, dx[None, :], dy[None, :])
    c2 = D.mask[x * ctx.q + y].all(axis=1)
    if single:
        return bool(c1[0]), bool(c2[0])
    return c1, c2


def is_unitary_l36(ctx: HermitianCtx, s: np.ndarray, D: FormParam) -> bool:
    c1, c2 = lemma_conditions(ctx, s, D)
    return bool(c1 and c2)


def is_unitary_l36_batch(ctx: HermitianCtx, S: np.ndarray, D: FormParam, Sinv=None) -> np.ndarray:
    c1, c2 = lemma_conditions(ctx, S, D, Sinv)
    return c1 & c2


def _all_vectors(ctx: HermitianCtx) -> np.ndarray:
    cache = ctx.__dict__.setdefault("_vectors_cache", {})
    if "all" not in cache:
        cache["all"] = np.array(list(product(range(ctx.q), repeat=ctx.dim)), dtype=np.intp)
    return cache["all"]


def q_test_vectors(ctx: HermitianCtx, sample_budget: int = 4096, rng=None):
    """All of M when small enough, else a seeded sample.  Returns (vectors, exhaustive)."""
    if ctx.q ** ctx.dim <= EXHAUSTIVE_Q_LIMIT:
        return _all_vectors(ctx), True
    rng = rng if rng is not None else np.random.default_rng(0)
    return rng.integers(0, ctx.q, size=(sample_budget, ctx.dim)).astype(np.intp), False


def is_unitary_def(ctx: HermitianCtx, s: np.ndarray, D: FormParam,
                   sample_budget: int = 4096, rng=None, vectors=None) -> bool:
    """The defining conditions: B preserved and Q preserved modulo ``D``."""
    s = np.asarray(s)
    minv(ctx, s)  # raises NotInvertible
    G = gram(ctx)
    if not equal(ctx.matmul(ctx.matmul(ctx.bar_t[s].T, G), s), G):
        return False
    if vectors is None:
        vectors, _ = q_test_vectors(ctx, sample_budget, rng)
    img = ctx.matmul(vectors, s.T)
    x1, y1 = q_batch(ctx, img)
    x0, y0 = q_batch(ctx, vectors)
    mx, my = vhminus(ctx, x0, y0)
    x, y = vhplus(ctx, x1, y1, mx, my)
    return bool(D.mask[x * ctx.q + y].all())


# -- transvections ----------------------------------------------------------------

def _check_hb(n, *idx):
    for i in idx:
        if not isinstance(i, (int, np.integer)) or i == 0 or not -n <= i <= n:
            raise BadIndices(f"index {i} is not a hyperbolic index for n={n}")


def t_short(ctx: HermitianCtx, i: int, j: int, x: int) -> np.ndarray:
    n = ctx.n
    _check_hb(n, i, j)
    if i == j or i == -j:
        raise BadIndices(f"short transvection needs i != +-j, got ({i},{j})")
    s = identity(ctx)
    s[pos(n, i), pos(n, j)] = ctx.add(s[pos(n, i), pos(n, j)], x)
    c = ctx.mul(ctx.lambda_power((eps(j) - 1) // 2), ctx.bar(x), ctx.lambda_power((1 - eps(i)) // 2))
    p, q = pos(n, -j), pos(n, -i)
    s[p, q] = ctx.sub(s[p, q], c)
    return s


def t_extra(ctx: HermitianCtx, i: int, a, D: FormParam | None = None) -> np.ndarray:
    """``T_i(x, y)``; with ``D`` given, ``(x, y)`` must lie in ``D^{-eps(i)}``."""
    n = ctx.n
    _check_hb(n, i)
    x, y = int(a[0]), int(a[1])
    if D is not None and not in_param_power(ctx, (x, y), D, -eps(i)):
        raise NotInParameter(f"({ctx.fmt(x)},{ctx.fmt(y)}) not in the parameter twisted by {-eps(i)}")
    s = identity(ctx)
    p0, pi, pmi = n, pos(n, i), pos(n, -i)
    s[p0, pmi] = ctx.add(s[p0, pmi], x)
    c = ctx.mul(ctx.lambda_power(-(1 + eps(i)) // 2), ctx.bar(x), ctx.mu)
    s[pi, p0] = ctx.sub(s[pi, p0], c)
    s[pi, pmi] = ctx.add(s[pi, pmi], y)
    return s


def in_param_power(ctx: HermitianCtx, a, D: FormParam, sign: int) -> bool:
    """Is ``a`` in ``D^sign`` (``D`` given untwisted)?"""
    if sign == 1:
        return tuple(a) in D
    return untwist_elem(ctx, tuple(a), -1) in D


def hpow(ctx: HermitianCtx, a, sign: int):
    """``a^sign`` for an element of an untwisted parameter."""
    return twist_elem(ctx, a, sign)


def t_esd(ctx: HermitianCtx, j: int, u, x: int, P=None, check_factorization: bool = True) -> np.ndarray:
    """The ESD transvection ``T_{*j}(u, x)``.

    With an odd form ideal ``P`` the defining preconditions are checked; the
    result is compared against its product decomposition into elementary
    transvections unless ``check_factorization`` is off.
    """
    n = ctx.n
    _check_hb(n, j)
    u = np.asarray(u, dtype=np.intp)
    e = eps(j)
    if u[pos(n, j)] != ctx.zero:
        raise PreconditionViolated("u_j", f"coordinate {j} of u must vanish")
    head = _esd_head(ctx, j, u, x)
    if P is not None:
        for i in theta_hb(n):
            if int(u[pos(n, i)]) not in P.ideal:
                raise PreconditionViolated("u_hb", f"coordinate {i} of u is not in the ideal")
        if untwist_elem(ctx, head, e) not in P.omega:
            raise PreconditionViolated("Q(u)", "Q(u) twisted plus (0,x) is not in omega")
    s = identity(ctx)
    s[:, pos(n, j)] = ctx.add_t[s[:, pos(n, j)], u]
    w = ctx.mul_t[ctx.lambda_power((e - 1) // 2), polarity(ctx, u)]
    s[pos(n, -j)] = ctx.sub_t[s[pos(n, -j)], w]
    s[pos(n, -j), pos(n, j)] = ctx.add(s[pos(n, -j), pos(n, j)], x)
    if check_factorization and not equal(s, esd_factorization(ctx, j, u, x)):
        raise PreconditionViolated("factorization", "ESD matrix differs from its product form")
    return s


def _esd_head(ctx, j, u, x):
    """``Q(u)^{eps(j)} (+) (0, x)`` in the twisted group of sign ``eps(j)``."""
    e = eps(j)
    return hplus(ctx, hpow(ctx, form_Q(ctx, u), e), (ctx.zero, x), e)


def esd_factorization(ctx: HermitianCtx, j: int, u, x: int) -> np.ndarray:
    """The product form of ``T_{*j}(u, x)`` via short and extra short transvections."""
    n = ctx.n
    e = eps(j)
    out = identity(ctx)
    for i in theta_hb(n):
        if i in (j, -j):
            continue
        out = ctx.matmul(out, t_short(ctx, i, j, int(u[pos(n, i)])))
    um = int(u[pos(n, -j)])
    tail = ctx.sub(um, ctx.mul(ctx.lambda_power(e), ctx.bar(um)))
    arg = hplus(ctx, _esd_head(ctx, j, u, x), (ctx.zero, tail), e)
    return ctx.matmul(out, t_extra(ctx, -j, arg))


def conjugate_esd_closed_form(ctx: HermitianCtx, s: np.ndarray, j: int, u) -> np.ndarray:
    """Closed form of ``s T_{*j}(u) s^{-1}`` for unitary ``s``."""
    e = eps(j)
    su = ctx.matmul(s, np.asarray(u))
    c = s[:, pos(ctx.n, -j)]
    t1 = ctx.mul_t[ctx.lambda_power((-e - 1) // 2), outer(ctx, su, polarity(ctx, c))]
    t2 = ctx.mul_t[ctx.lambda_power((e - 1) // 2), outer(ctx, c, polarity(ctx, su))]
    return ctx.sub_t[ctx.add_t[identity(ctx), t1], t2]


def conjugate_esd_formula_check(ctx: HermitianCtx, s: np.ndarray, j: int, u, P=None) -> bool:
    t = t_esd(ctx, j, u, ctx.zero, P)
    lhs = mmul(ctx, s, t, minv(ctx, s))
    return equal(lhs, conjugate_esd_closed_form(ctx, s, j, u))


# -- exchange format ---------------------------------------------------------------

def matrix_to_json(ctx: HermitianCtx, s: np.ndarray) -> dict:
    return {"n": ctx.n, "rows": [[ctx.fmt(int(x)) for x in r] for r in np.asarray(s)]}


def matrix_from_json(ctx: HermitianCtx, d: dict) -> np.ndarray:
    from .errors import MalformedSpec
    rows = d.get("rows")
    if d.get("n") != ctx.n or rows is None or len(rows) != ctx.dim or any(len(r) != ctx.dim for r in rows):
        raise MalformedSpec("matrix shape does not match the context")
    return np.array([[ctx.parse(x) for x in r] for r in rows], dtype=np.intp)


def random_transvection(ctx: HermitianCtx, D: FormParam, rng, P=None, nontrivial: bool = False) -> np.ndarray:
    """A random elementary transvection (of level ``P`` when given).

    With ``nontrivial`` the draw is repeated until it is not the identity.
    """
    n = ctx.n
    hb = theta_hb(n)
    ideal = sorted(P.ideal.elements) if P is not None else list(range(ctx.q))
    param = P.omega if P is not None else D
    e = identity(ctx)
    while True:
        if rng.random() < 0.7:
            while True:
                i, j = (int(v) for v in rng.choice(hb, 2))
                if i not in (j, -j):
                    break
            out = t_short(ctx, i, j, int(rng.choice(ideal)))
        else:
            i = int(rng.choice(hb))
            els = sorted(param.elements)
            a = els[int(rng.integers(len(els)))]
            out = t_extra(ctx, i, hpow(ctx, a, -eps(i)))
        if not nontrivial or not np.array_equal(out, e) or (len(ideal) == 1 and len(param) == 1):
            return out


def random_product(ctx: HermitianCtx, D: FormParam, rng, length: int, P=None) -> np.ndarray:
    out = identity(ctx)
    for _ in range(length):
        out = ctx.matmul(out, random_transvection(ctx, D, rng, P))
    return out
