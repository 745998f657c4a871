"""The Heisenberg group of a Hermitian ring and its odd form parameters.

An element is a pair ``(x, y)`` of ring codes.  The sign ``k`` selects the
group: ``k=+1`` is the Heisenberg group of ``(R, bar, lambda, mu)`` and
``k=-1`` the one of the inverse Hermitian ring, which for commutative ``R``
has the same involution, symmetry ``bar(lambda)`` and ``mu`` replaced by
``bar(mu)``.  ``circ`` (the scalar action) is the same for both signs.

Multi-term sums are always folded left to right; the group is not abelian.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import GeneratorOutsideDeltaMax, OddFormError
from .ring import HermitianCtx

Heis = tuple  # (x, y)


def _mu(ctx: HermitianCtx, k: int) -> int:
    return ctx.mu if k == 1 else ctx.mu_bar


def _lam(ctx: HermitianCtx, k: int) -> int:
    return ctx.lam if k == 1 else ctx.lam_bar


def hplus(ctx: HermitianCtx, a: Heis, b: Heis, k: int = 1) -> Heis:
    x1, y1 = a
    x2, y2 = b
    m = ctx._mul
    t = m[m[ctx.bar_list[x1]][_mu(ctx, k)]][x2]
    return ctx._add[x1][x2], ctx._sub[ctx._add[y1][y2]][t]


def hminus(ctx: HermitianCtx, a: Heis, k: int = 1) -> Heis:
    """The group inverse ``(-x, -y - bar(x) mu x)``."""
    x, y = a
    m = ctx._mul
    t = m[m[ctx.bar_list[x]][_mu(ctx, k)]][x]
    return ctx._neg[x], ctx._sub[ctx._neg[y]][t]


def hsub(ctx: HermitianCtx, a: Heis, b: Heis, k: int = 1) -> Heis:
    return hplus(ctx, a, hminus(ctx, b, k), k)


def hsum(ctx: HermitianCtx, items: Iterable[Heis], k: int = 1) -> Heis:
    acc = (ctx.zero, ctx.zero)
    for a in items:
        acc = hplus(ctx, acc, a, k)
    return acc


def hcirc(ctx: HermitianCtx, a: Heis, r: int, k: int = 1) -> Heis:
    x, y = a
    m = ctx._mul
    return m[x][r], m[m[ctx.bar_list[r]][y]][r]


def trace(ctx: HermitianCtx, a: Heis, k: int = 1) -> int:
    x, y = a
    m, b = ctx._mul, ctx.bar_list
    t = m[m[b[x]][_mu(ctx, k)]][x]
    return ctx._add[ctx._add[t][y]][m[b[y]][_lam(ctx, k)]]


def hcode(ctx: HermitianCtx, a: Heis) -> int:
    return a[0] * ctx.q + a[1]


def hdecode(ctx: HermitianCtx, c: int) -> Heis:
    return divmod(int(c), ctx.q)


def all_pairs(ctx: HermitianCtx) -> list[Heis]:
    return [(x, y) for x in range(ctx.q) for y in range(ctx.q)]


def twist_elem(ctx: HermitianCtx, a: Heis, sign: int = -1) -> Heis:
    """``(x, y)**sign``: the identity for ``+1``, ``(x, bar(lambda) y)`` for ``-1``."""
    if sign == 1:
        return a
    return a[0], ctx._mul[ctx.lam_bar][a[1]]


def untwist_elem(ctx: HermitianCtx, a: Heis, sign: int = -1) -> Heis:
    if sign == 1:
        return a
    return a[0], ctx._mul[ctx.lam][a[1]]


# -- vectorised variants over numpy code arrays ---------------------------------

def vhplus(ctx, x1, y1, x2, y2, k=1):
    M = ctx.mul_t
    t = M[M[ctx.bar_t[x1], _mu(ctx, k)], x2]
    return ctx.add_t[x1, x2], ctx.sub_t[ctx.add_t[y1, y2], t]


def vhminus(ctx, x, y, k=1):
    M = ctx.mul_t
    t = M[M[ctx.bar_t[x], _mu(ctx, k)], x]
    return ctx.neg_t[x], ctx.sub_t[ctx.neg_t[y], t]


def vhcirc(ctx, x, y, r):
    M = ctx.mul_t
    return M[x, r], M[M[ctx.bar_t[r], y], r]


# -- closures ------------------------------------------------------------------

def subgroup_closure(ctx: HermitianCtx, seeds: Iterable[Heis], k: int = 1,
                     circ: bool = False) -> frozenset:
    """Smallest subset containing ``seeds`` and ``(0,0)`` closed under the group law.

    With ``circ=True`` the result is also stable under ``a -> a o r`` for every
    ring element ``r``, i.e. it is the generated R-submodule.
    """
    zero = (ctx.zero, ctx.zero)
    elems = {zero}
    todo = []
    for s in seeds:
        s = (int(s[0]), int(s[1]))
        if s not in elems:
            elems.add(s)
            todo.append(s)
    ring = range(ctx.q)
    while todo:
        a = todo.pop()
        new = [hminus(ctx, a, k)]
        if circ:
            new.extend(hcirc(ctx, a, r) for r in ring)
        for b in list(elems):
            new.append(hplus(ctx, a, b, k))
            new.append(hplus(ctx, b, a, k))
        for c in new:
            if c not in elems:
                elems.add(c)
                todo.append(c)
    return frozenset(elems)


def is_circ_stable(ctx: HermitianCtx, S) -> bool:
    return all(hcirc(ctx, a, r) in S for a in S for r in range(ctx.q))


def is_subgroup(ctx: HermitianCtx, S, k: int = 1) -> bool:
    if (ctx.zero, ctx.zero) not in S:
        return False
    return all(hplus(ctx, a, hminus(ctx, b, k), k) in S for a in S for b in S)


def is_submodule(ctx: HermitianCtx, S, k: int = 1) -> bool:
    return is_subgroup(ctx, S, k) and is_circ_stable(ctx, S)


def circ_set(ctx: HermitianCtx, A: Iterable[Heis], B: Iterable[int], k: int = 1) -> frozenset:
    """``A o B``: the subgroup generated by ``{a o b}``."""
    B = list(B)
    return subgroup_closure(ctx, (hcirc(ctx, a, b) for a in A for b in B), k)


# -- odd form parameters -------------------------------------------------------

class FormParam:
    """An explicit, validated odd form parameter (or one of its twists).

    ``twist`` is the sign of the Heisenberg group the set lives in.
    """

    def __init__(self, ctx: HermitianCtx, elements, generators=(), twist: int = 1):
        self.ctx = ctx
        self.elements = frozenset((int(x), int(y)) for x, y in elements)
        self.generators = tuple(generators)
        self.twist = twist
        mask = np.zeros(ctx.q * ctx.q, dtype=bool)
        for x, y in self.elements:
            mask[x * ctx.q + y] = True
        self.mask = mask

    def __contains__(self, a) -> bool:
        return (int(a[0]), int(a[1])) in self.elements

    def __iter__(self):
        return iter(sorted(self.elements))

    def __len__(self):
        return len(self.elements)

    def __eq__(self, other):
        if isinstance(other, FormParam):
            return self.elements == other.elements and self.twist == other.twist
        return NotImplemented

    def __hash__(self):
        return hash((self.elements, self.twist))

    def __le__(self, other):
        return self.elements <= other.elements

    def __repr__(self):
        f = self.ctx.fmt
        body = ", ".join(f"({f(x)},{f(y)})" for x, y in sorted(self.elements))
        return f"FormParam[{self.twist:+d}]{{{body}}}"

    def power(self, sign: int) -> "FormParam":
        """This parameter raised to ``sign``: itself or its twist."""
        return self if sign == 1 else twist_param(self)


def _delta_min_set(ctx: HermitianCtx, k: int = 1) -> frozenset:
    lam = _lam(ctx, k)
    return frozenset((ctx.zero, ctx.sub(x, ctx.mul(ctx.bar(x), lam))) for x in range(ctx.q))


def _delta_max_set(ctx: HermitianCtx, k: int = 1) -> frozenset:
    return frozenset(a for a in all_pairs(ctx) if trace(ctx, a, k) == ctx.zero)


def delta_min(ctx: HermitianCtx, k: int = 1) -> FormParam:
    return FormParam(ctx, _delta_min_set(ctx, k), (), k)


def delta_max(ctx: HermitianCtx, k: int = 1) -> FormParam:
    return FormParam(ctx, _delta_max_set(ctx, k), (), k)


def is_form_param(ctx: HermitianCtx, S, k: int = 1) -> bool:
    S = frozenset(S)
    return _delta_min_set(ctx, k) <= S <= _delta_max_set(ctx, k) and is_submodule(ctx, S, k)


def param_closure(ctx: HermitianCtx, gens: Sequence[Heis], k: int = 1) -> FormParam:
    """Smallest odd form parameter (in the ``k`` group) containing ``gens``."""
    gens = [(int(x), int(y)) for x, y in gens]
    for g in gens:
        if trace(ctx, g, k) != ctx.zero:
            raise GeneratorOutsideDeltaMax(f"trace of ({ctx.fmt(g[0])},{ctx.fmt(g[1])}) is nonzero")
    S = subgroup_closure(ctx, list(_delta_min_set(ctx, k)) + gens, k, circ=True)
    if not S <= _delta_max_set(ctx, k):
        # cannot happen for a valid context: the trace is a module homomorphism
        raise OddFormError("closure left the trace kernel")
    return FormParam(ctx, S, gens, k)


def twist_param(D: FormParam) -> FormParam:
    """The elementwise twist of ``D``; for ``D = Delta`` this is ``Delta^{-1}``."""
    ctx = D.ctx
    if D.twist == 1:
        els = (twist_elem(ctx, a, -1) for a in D.elements)
    else:
        els = (untwist_elem(ctx, a, -1) for a in D.elements)
    gens = [twist_elem(ctx, a, -1) if D.twist == 1 else untwist_elem(ctx, a, -1) for a in D.generators]
    return FormParam(ctx, els, gens, -D.twist)


def inverse_param_by_bar(D: FormParam) -> frozenset:
    """``{(x, y) : (x, bar(y)) in D}``, the defining description of ``D^{-1}``."""
    ctx = D.ctx
    return frozenset((x, y) for x, y in all_pairs(ctx) if (x, ctx.bar(y)) in D.elements)


def jdelta(D) -> frozenset:
    """First-coordinate projection ``J(D)``."""
    els = D.elements if isinstance(D, FormParam) else D
    return frozenset(x for x, _ in els)


def sum_expansion_check(ctx: HermitianCtx, a: Heis, xs: Sequence[int], k: int = 1) -> bool:
    """Check ``a o (x1+..+xm)`` against the termwise expansion plus its correction term."""
    if trace(ctx, a, k) != ctx.zero:
        raise GeneratorOutsideDeltaMax("sum expansion needs a trace-zero element")
    b = a[1]
    lhs = hcirc(ctx, a, ctx.sum(xs))
    acc = (ctx.zero, ctx.zero)
    for x in xs:
        acc = hplus(ctx, acc, hcirc(ctx, a, x), k)
    lam_k = _lam(ctx, k)
    corr = ctx.zero
    for i in range(len(xs)):
        for j in range(i):
            t = ctx.mul(ctx.bar(xs[i]), b, xs[j])
            corr = ctx.add(corr, ctx.sub(t, ctx.mul(ctx.bar(t), lam_k)))
    rhs = hplus(ctx, acc, (ctx.zero, corr), k)
    return lhs == rhs


def param_from_config(ctx: HermitianCtx, d: dict | None) -> FormParam:
    """Build Delta from ``{"kind": "min"|"max"|"generated", "gens": [[x, y], ...]}``."""
    d = d or {"kind": "max"}
    kind = d.get("kind", "max")
    if kind == "min":
        return delta_min(ctx)
    if kind == "max":
        return delta_max(ctx)
    if kind == "generated":
        gens = [(ctx.parse(x), ctx.parse(y)) for x, y in d.get("gens", [])]
        return param_closure(ctx, gens)
    from .errors import MalformedSpec
    raise MalformedSpec(f"unknown delta kind {kind!r}")


def param_to_config(D: FormParam) -> dict:
    f = D.ctx.fmt
    return {"kind": "generated", "gens": [[f(x), f(y)] for x, y in sorted(D.elements)]}
