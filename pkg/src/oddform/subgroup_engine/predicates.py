"""Principal, normalised and full congruence membership, vectorised over stacks.

Every predicate takes one matrix or an ``(N, d, d)`` stack and answers with a
bool or a bool array.  ``Sinv`` may be supplied when the inverses are already
known.
"""

from __future__ import annotations

import numpy as np

from ..heisenberg import jdelta, vhcirc, vhminus, vhplus
from ..unitary import minv_batch, q_columns, theta_hb, pos


def _stack(S):
    S = np.asarray(S)
    return (S[None], True) if S.ndim == 2 else (S, False)


def _out(v, single):
    return bool(v[0]) if single else v


def q_col0_minus_one(ctx, S, q=None):
    """``Q(s_{*0}) -. (1, 0)`` for a stack, as ``(x, y)`` arrays."""
    x, y = q_columns(ctx, S) if q is None else q
    x0, y0 = x[:, ctx.n], y[:, ctx.n]
    mx, my = vhminus(ctx, np.intp(ctx.one), np.intp(ctx.zero))
    return vhplus(ctx, x0, y0, mx, my)


def _in_omega(P, x, y):
    return P.omega.mask[x * P.ctx.q + y]


def _hb_positions(ctx):
    return np.array([pos(ctx.n, i) for i in theta_hb(ctx.n)], dtype=np.intp)


def pcs_conditions(ctx, S, P):
    """Per-matrix booleans for the two principal congruence conditions."""
    hb = _hb_positions(ctx)
    e = np.eye(ctx.dim, dtype=np.intp)
    e = np.where(e == 1, ctx.one, ctx.zero)
    diff = ctx.sub_t[S[:, hb][:, :, hb], e[hb][:, hb][None]]
    c1 = P.ideal.mask[diff].all(axis=(1, 2))
    x, y = q_columns(ctx, S)
    c2 = _in_omega(P, x[:, hb], y[:, hb]).all(axis=1)
    qx, qy = q_col0_minus_one(ctx, S)
    for a in sorted(jdelta(P.delta)):
        cx, cy = vhcirc(ctx, qx, qy, a)
        c2 &= _in_omega(P, cx, cy)
    return c1, c2


def membership_pcs(S, P):
    ctx = P.ctx
    S, single = _stack(S)
    c1, c2 = pcs_conditions(ctx, S, P)
    return _out(c1 & c2, single)


def membership_nu(S, P, Sinv=None, skip_inverse=False, q=None):
    """Normalised membership.  ``skip_inverse`` tests only the matrices themselves,
    which is exact when the stack runs over a whole group (inverses are then in it)."""
    ctx = P.ctx
    S, single = _stack(S)
    ok = np.ones(len(S), dtype=bool)
    J = sorted(jdelta(P.omega))
    if skip_inverse:
        mats = (S,)
    else:
        mats = (S, minv_batch(ctx, S) if Sinv is None else _stack(Sinv)[0])
    for k, M in enumerate(mats):
        qx, qy = q_col0_minus_one(ctx, M, q if k == 0 else None)
        for a in J:
            cx, cy = vhcirc(ctx, qx, qy, a)
            ok &= _in_omega(P, cx, cy)
    return _out(ok, single)


def cu_conditions(ctx, S, P, q=None) -> dict:
    """The seven entrywise and form conditions of the full congruence criterion."""
    I = P.ideal.mask
    M, sub = ctx.mul_t, ctx.sub_t
    J = np.array(sorted(jdelta(P.delta)), dtype=np.intp)
    hbp = _hb_positions(ctx)
    h = len(hbp)
    p0 = ctx.n
    ok = {}
    blk = S[:, hbp][:, :, hbp]
    off = ~np.eye(h, dtype=bool)
    ok["i"] = I[blk[:, off]].all(axis=1)
    diag = blk[:, np.arange(h), np.arange(h)]
    ok["ii"] = I[sub[diag[:, :, None], diag[:, None, :]]].all(axis=(1, 2))
    col0 = S[:, hbp, p0]
    row0 = S[:, p0, hbp]
    ba = M[ctx.bar_t[J], ctx.mu]
    ok["iii"] = I[M[col0[:, :, None], J]].all(axis=(1, 2))
    ok["iv"] = I[M[ba[None, None, :], row0[:, :, None]]].all(axis=(1, 2))
    d = sub[S[:, p0, p0][:, None], diag]
    bad = M[M[ba[None, :, None, None], d[:, None, :, None]], J[None, None, None, :]]
    ok["v"] = I[bad].all(axis=(1, 2, 3))
    x, y = q_columns(ctx, S) if q is None else q
    ok["vi"] = _in_omega(P, x[:, hbp], y[:, hbp]).all(axis=1)
    qx, qy = q_col0_minus_one(ctx, S, (x, y))
    ok["vii"] = np.ones(len(S), dtype=bool)
    for (a, b) in sorted(P.delta.elements):
        cx, cy = vhcirc(ctx, qx, qy, a)
        tx, ty = vhplus(ctx, cx, cy, np.intp(a), np.intp(b))
        sx, sy = vhcirc(ctx, np.intp(a), np.intp(b), diag)
        mx, my = vhminus(ctx, sx, sy)
        rx, ry = vhplus(ctx, tx[:, None], ty[:, None], mx, my)
        ok["vii"] &= _in_omega(P, rx, ry).all(axis=1)
    return ok


def membership_cu(S, P, Sinv=None, skip_inverse=False):
    """Full congruence membership: the seven conditions together with normalised membership."""
    ctx = P.ctx
    S, single = _stack(S)
    q = q_columns(ctx, S)
    ok = np.ones(len(S), dtype=bool)
    for v in cu_conditions(ctx, S, P, q).values():
        ok &= v
    ok &= membership_nu(S, P, Sinv, skip_inverse, q)
    return _out(ok, single)
