"""Steinberg-type relations among elementary transvections, and form identities.

Each relation enumerates its parameter tuples, builds the matrices for the two
sides in batches and compares them.  Inverses inside commutators come from
``minv_batch``, never from the known closed forms, so the check is independent
of the relations being tested.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .heisenberg import FormParam, hcirc, hminus, hplus, trace
from .ring import HermitianCtx
from .unitary import (
    eps,
    form_B,
    form_Q,
    hpow,
    minv_batch,
    polarity,
    q_test_vectors,
    t_extra,
    t_short,
    theta_hb,
)


@dataclass
class RelationReport:
    counts: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def total_failures(self) -> int:
        return len(self.failures)

    def merge(self, other: "RelationReport") -> None:
        for k, v in other.counts.items():
            self.counts[k] = self.counts.get(k, 0) + v
        self.failures.extend(other.failures)


def commutator_batch(ctx: HermitianCtx, G: np.ndarray, H: np.ndarray) -> np.ndarray:
    """``[g, h] = g h g^-1 h^-1`` over stacks."""
    Gi, Hi = minv_batch(ctx, G), minv_batch(ctx, H)
    return ctx.matmul(ctx.matmul(ctx.matmul(G, H), Gi), Hi)


def _lp(ctx, e):
    return ctx.lambda_power(e)


def _pairs(n):
    hb = theta_hb(n)
    return [(i, j) for i in hb for j in hb if i not in (j, -j)]


def _inv_param(ctx, D, i):
    """Elements of ``D^{-eps(i)}``, the admissible arguments of ``T_i``."""
    return [hpow(ctx, a, -eps(i)) for a in sorted(D.elements)]


# -- case enumerators: each yields (params, lhs-builder, rhs-builder) descriptions

def cases(ctx: HermitianCtx, D: FormParam, name: str):
    n, R = ctx.n, range(ctx.q)
    hb = theta_hb(n)
    if name == "S1":
        return [(i, j, x) for i, j in _pairs(n) for x in R]
    if name in ("S2",):
        return [(i, j, x, y) for i, j in _pairs(n) for x in R for y in R]
    if name == "S3":
        return [(i, j, k, l, x, y) for i, j in _pairs(n) for k, l in _pairs(n)
                if k not in (j, -i) and l not in (i, -j) for x in R for y in R]
    if name == "S4":
        return [(i, j, k, x, y) for i, j in _pairs(n) for k in hb
                if k not in (j, -j) and k not in (i, -i) for x in R for y in R]
    if name == "S5":
        return [(i, j, x, y) for i, j in _pairs(n) for x in R for y in R]
    if name in ("E1", "E3"):
        return [(i, a, b) for i in hb for a in _inv_param(ctx, D, i) for b in _inv_param(ctx, D, i)]
    if name == "E2":
        return [(i, j, a, b) for i in hb for j in hb if j not in (i, -i)
                for a in _inv_param(ctx, D, i) for b in _inv_param(ctx, D, j)]
    if name == "SE1":
        return [(i, j, k, x, a) for i, j in _pairs(n) for k in hb if k not in (j, -i)
                for x in R for a in _inv_param(ctx, D, k)]
    if name == "SE2":
        return [(i, j, x, a) for i, j in _pairs(n) for x in R for a in _inv_param(ctx, D, j)]
    raise KeyError(name)


RELATIONS = ("S1", "S2", "S3", "S4", "S5", "E1", "E2", "E3", "SE1", "SE2")


def _sides(ctx: HermitianCtx, name: str, p):
    """Return ``(kind, A, B, rhs)``; kind is 'eq' (A == rhs), 'prod' (A B == rhs) or 'comm'."""
    T, Te = t_short, t_extra
    if name == "S1":
        i, j, x = p
        c = ctx.neg(ctx.mul(_lp(ctx, (eps(j) - 1) // 2), ctx.bar(x), _lp(ctx, (1 - eps(i)) // 2)))
        return "eq", T(ctx, i, j, x), None, T(ctx, -j, -i, c)
    if name == "S2":
        i, j, x, y = p
        return "prod", T(ctx, i, j, x), T(ctx, i, j, y), T(ctx, i, j, ctx.add(x, y))
    if name == "S3":
        i, j, k, l, x, y = p
        return "comm", T(ctx, i, j, x), T(ctx, k, l, y), None
    if name == "S4":
        i, j, k, x, y = p
        return "comm", T(ctx, i, j, x), T(ctx, j, k, y), T(ctx, i, k, ctx.mul(x, y))
    if name == "S5":
        i, j, x, y = p
        e = eps(i)
        z = ctx.sub(ctx.mul(x, y), ctx.mul(_lp(ctx, (-1 - e) // 2), ctx.bar(y), ctx.bar(x), _lp(ctx, (1 - e) // 2)))
        return "comm", T(ctx, i, j, x), T(ctx, j, -i, y), Te(ctx, i, (ctx.zero, z))
    if name == "E1":
        i, a, b = p
        return "prod", Te(ctx, i, a), Te(ctx, i, b), Te(ctx, i, hplus(ctx, a, b, -eps(i)))
    if name == "E2":
        i, j, a, b = p
        c = ctx.neg(ctx.mul(_lp(ctx, -(1 + eps(i)) // 2), ctx.bar(a[0]), ctx.mu, b[0]))
        return "comm", Te(ctx, i, a), Te(ctx, j, b), T(ctx, i, -j, c)
    if name == "E3":
        i, a, b = p
        d = ctx.sub(ctx.mul(ctx.bar(a[0]), ctx.mu, b[0]), ctx.mul(ctx.bar(b[0]), ctx.mu, a[0]))
        z = ctx.neg(ctx.mul(_lp(ctx, -(1 + eps(i)) // 2), d))
        return "comm", Te(ctx, i, a), Te(ctx, i, b), Te(ctx, i, (ctx.zero, z))
    if name == "SE1":
        i, j, k, x, a = p
        return "comm", T(ctx, i, j, x), Te(ctx, k, a), None
    if name == "SE2":
        i, j, x, a = p
        y, z = a
        c = ctx.mul(_lp(ctx, (eps(j) - 1) // 2), ctx.bar(x), _lp(ctx, (1 - eps(i)) // 2))
        rhs = ctx.matmul(T(ctx, j, -i, ctx.mul(z, c)), Te(ctx, i, (ctx.mul(y, c), ctx.mul(x, z, c))))
        return "comm", T(ctx, i, j, x), Te(ctx, j, a), rhs
    raise KeyError(name)


def check_relation(ctx: HermitianCtx, D: FormParam, name: str, params=None, chunk: int = 4096) -> RelationReport:
    """Check one relation over ``params`` (default: every admissible tuple)."""
    if params is None:
        params = cases(ctx, D, name)
    rep = RelationReport(counts={name: 0})
    e = np.eye(ctx.dim, dtype=np.intp) * ctx.one + (1 - np.eye(ctx.dim, dtype=np.intp)) * ctx.zero
    for start in range(0, len(params), chunk):
        block = params[start:start + chunk]
        sides = [_sides(ctx, name, p) for p in block]
        kind = sides[0][0]
        A = np.stack([s[1] for s in sides])
        R = np.stack([e if s[3] is None else s[3] for s in sides])
        if kind == "eq":
            L = A
        elif kind == "prod":
            L = ctx.matmul(A, np.stack([s[2] for s in sides]))
        else:
            L = commutator_batch(ctx, A, np.stack([s[2] for s in sides]))
        bad = ~(L == R).all(axis=(1, 2))
        rep.counts[name] += len(block)
        for k in np.flatnonzero(bad):
            rep.failures.append({"relation": name, "params": _jsonable(ctx, block[k])})
    return rep


def _jsonable(ctx, p):
    out = []
    for v in p:
        if isinstance(v, tuple):
            out.append([ctx.fmt(v[0]), ctx.fmt(v[1])])
        else:
            out.append(v)
    return out


def run_relations(ctx: HermitianCtx, D: FormParam, samples: int | None = None, rng=None,
                  names=RELATIONS) -> RelationReport:
    """Full relation suite; ``samples`` draws that many tuples per relation instead."""
    rep = RelationReport()
    for name in names:
        ps = cases(ctx, D, name)
        if samples is not None and len(ps) > samples:
            idx = rng.integers(0, len(ps), size=samples)
            ps = [ps[k] for k in idx]
        rep.merge(check_relation(ctx, D, name, ps))
    return rep


# -- form identities ----------------------------------------------------------

def run_form_identities(ctx: HermitianCtx, D: FormParam, samples: int = 512, rng=None,
                        unitary_samples=()) -> RelationReport:
    """Hermitian symmetry and sesquilinearity of B, the Q identities, and polarity."""
    rng = rng if rng is not None else np.random.default_rng(0)
    rep = RelationReport(counts={k: 0 for k in ("B_hermitian", "B_sesqui", "Q_scale", "Q_sum", "Q_trace", "polarity")})
    fail = rep.failures.append
    V, _ = q_test_vectors(ctx, samples, rng)
    if len(V) > samples:
        V = V[rng.integers(0, len(V), size=samples)]
    W = V[rng.permutation(len(V))]
    dmin = {(ctx.zero, ctx.sub(x, ctx.mul(ctx.bar(x), ctx.lam))) for x in range(ctx.q)}
    for u, v in zip(V, W):
        x, y = (int(t) for t in rng.integers(0, ctx.q, size=2))
        b_uv, b_vu = form_B(ctx, u, v), form_B(ctx, v, u)
        rep.counts["B_hermitian"] += 1
        if b_uv != ctx.mul(ctx.bar(b_vu), ctx.lam):
            fail({"relation": "B_hermitian"})
        rep.counts["B_sesqui"] += 1
        if form_B(ctx, ctx.mul_t[u, x], ctx.mul_t[v, y]) != ctx.mul(ctx.bar(x), b_uv, y):
            fail({"relation": "B_sesqui"})
        rep.counts["Q_scale"] += 1
        if form_Q(ctx, ctx.mul_t[u, x]) != hcirc(ctx, form_Q(ctx, u), x):
            fail({"relation": "Q_scale"})
        rep.counts["Q_sum"] += 1
        rhs = hplus(ctx, hplus(ctx, form_Q(ctx, u), form_Q(ctx, v)), (ctx.zero, b_uv))
        diff = hplus(ctx, form_Q(ctx, ctx.add_t[u, v]), hminus(ctx, rhs))
        if diff not in dmin:
            fail({"relation": "Q_sum"})
        rep.counts["Q_trace"] += 1
        if trace(ctx, form_Q(ctx, u)) != form_B(ctx, u, u):
            fail({"relation": "Q_trace"})
    for s in unitary_samples:
        si = minv_batch(ctx, s[None])[0]
        for u in V[:16]:
            rep.counts["polarity"] += 1
            lhs = polarity(ctx, ctx.matmul(s, u))
            rhs = ctx.matmul(polarity(ctx, u)[None, :], si)[0]
            if not np.array_equal(lhs, rhs):
                fail({"relation": "polarity"})
    return rep
