"""Involution invariant ideals, relative odd form parameters and odd form ideals.

Everything is an explicit finite set.  ``OddFormIdeal`` always carries the
ambient odd form parameter ``delta`` because the bounds on ``omega`` depend
on it.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import ClosureEscapesOmegaMax, GeneratorOutsideOmegaMax, NotAnIdeal
from .heisenberg import (
    FormParam,
    hcirc,
    jdelta,
    subgroup_closure,
    is_submodule,
)
from .ring import HermitianCtx


class Ideal:
    """A finite ideal given by its element set."""

    def __init__(self, ctx: HermitianCtx, elements, generators=()):
        self.ctx = ctx
        self.elements = frozenset(int(x) for x in elements)
        self.generators = tuple(generators)
        mask = np.zeros(ctx.q, dtype=bool)
        mask[list(self.elements)] = True
        self.mask = mask

    def __contains__(self, x) -> bool:
        return int(x) in self.elements

    def __iter__(self):
        return iter(sorted(self.elements))

    def __len__(self):
        return len(self.elements)

    def __eq__(self, other):
        if isinstance(other, Ideal):
            return self.elements == other.elements
        return NotImplemented

    def __hash__(self):
        return hash(self.elements)

    def __le__(self, other):
        return self.elements <= other.elements

    def __repr__(self):
        return "Ideal{" + ", ".join(self.ctx.fmt(x) for x in sorted(self.elements)) + "}"

    def is_whole(self) -> bool:
        return len(self.elements) == self.ctx.q

    def is_zero(self) -> bool:
        return self.elements == {self.ctx.zero}


def _additive_span(ctx: HermitianCtx, seeds: Iterable[int]) -> set:
    span = {ctx.zero}
    todo = [ctx.zero]
    seeds = set(seeds)
    while todo:
        a = todo.pop()
        for s in seeds:
            b = ctx.add(a, s)
            if b not in span:
                span.add(b)
                todo.append(b)
    return span


def ideal_closure(ctx: HermitianCtx, gens: Iterable[int]) -> Ideal:
    """The smallest involution invariant ideal containing ``gens``."""
    gens = [int(g) for g in gens]
    seeds = {ctx.mul(r, h) for g in gens for h in (g, ctx.bar(g)) for r in range(ctx.q)}
    return Ideal(ctx, _additive_span(ctx, seeds), gens)


def zero_ideal(ctx: HermitianCtx) -> Ideal:
    return Ideal(ctx, [ctx.zero])


def whole_ideal(ctx: HermitianCtx) -> Ideal:
    return Ideal(ctx, range(ctx.q), [ctx.one])


def is_ideal(ctx: HermitianCtx, S) -> bool:
    S = set(S)
    if ctx.zero not in S:
        return False
    return (all(ctx.sub(a, b) in S for a in S for b in S)
            and all(ctx.mul(r, a) in S for a in S for r in range(ctx.q))
            and all(ctx.bar(a) in S for a in S))


def ideal_product(A: Ideal, B: Ideal) -> Ideal:
    ctx = A.ctx
    return ideal_closure(ctx, {ctx.mul(a, b) for a in A.elements for b in B.elements})


def ideal_power(A: Ideal, k: int) -> Ideal:
    if k < 0:
        raise ValueError("ideal power needs k >= 0")
    P = whole_ideal(A.ctx)
    for _ in range(k):
        P = ideal_product(P, A)
    return P


def ideal_quotient(A: Ideal, B: Ideal) -> Ideal:
    """``A : B = {x : xB in A}``."""
    ctx = A.ctx
    return Ideal(ctx, [x for x in range(ctx.q) if all(ctx.mul(x, b) in A.elements for b in B.elements)])


def tilde_ideal(D: FormParam, A: Ideal) -> frozenset:
    """``{x : bar(J(D)) mu x in A}``."""
    ctx = D.ctx
    J = jdelta(D)
    return frozenset(x for x in range(ctx.q)
                     if all(ctx.mul(ctx.bar(j), ctx.mu, x) in A.elements for j in J))


def omega_min(D: FormParam, A: Ideal) -> frozenset:
    """``{(0, x - bar(x) lambda) : x in A}`` summed with ``D o A``, as a generated subgroup."""
    ctx = D.ctx
    seeds = [(ctx.zero, ctx.sub(x, ctx.mul(ctx.bar(x), ctx.lam))) for x in A.elements]
    seeds += [hcirc(ctx, d, a) for d in D.elements for a in A.elements]
    return subgroup_closure(ctx, seeds)


def omega_max(D: FormParam, A: Ideal) -> frozenset:
    It = tilde_ideal(D, A)
    return frozenset((x, y) for x, y in D.elements if x in It and y in A.elements)


class OddFormIdeal:
    """A pair ``(I, Omega)`` inside the Hermitian form ring ``(R, delta)``."""

    def __init__(self, delta: FormParam, ideal: Ideal, omega, validate: bool = True):
        self.ctx = delta.ctx
        self.delta = delta
        self.ideal = ideal
        self.omega = omega if isinstance(omega, FormParam) else FormParam(self.ctx, omega)
        if validate:
            check_off(self)

    def __eq__(self, other):
        if isinstance(other, OddFormIdeal):
            return self.ideal == other.ideal and self.omega == other.omega
        return NotImplemented

    def __hash__(self):
        return hash((self.ideal.elements, self.omega.elements))

    def __le__(self, other):
        return off_subset(self, other)

    def __repr__(self):
        return f"OddFormIdeal({self.ideal!r}, {self.omega!r})"

    def omega_power(self, sign: int) -> FormParam:
        """``Omega^sign`` (the twist for ``-1``)."""
        return self.omega.power(sign)

    def is_zero(self) -> bool:
        return self.ideal.is_zero() and len(self.omega) == 1

    def to_config(self) -> dict:
        f = self.ctx.fmt
        return {"ideal": [f(x) for x in sorted(self.ideal.elements)],
                "omega": [[f(x), f(y)] for x, y in sorted(self.omega.elements)]}


def check_off(P: OddFormIdeal) -> None:
    """Raise unless ``P`` satisfies every defining condition of an odd form ideal."""
    ctx = P.ctx
    if not is_ideal(ctx, P.ideal.elements):
        raise NotAnIdeal(f"{P.ideal!r} is not an involution invariant ideal")
    lo, hi = omega_min(P.delta, P.ideal), omega_max(P.delta, P.ideal)
    om = P.omega.elements
    if not om <= hi:
        raise ClosureEscapesOmegaMax("omega is not contained in omega_max")
    if not lo <= om:
        raise NotAnIdeal("omega does not contain omega_min")
    if not is_submodule(ctx, om):
        raise NotAnIdeal("omega is not closed under the module operations")


def is_off(P: OddFormIdeal) -> bool:
    try:
        check_off(P)
    except (NotAnIdeal, ClosureEscapesOmegaMax):
        return False
    return True


def _build(D: FormParam, A: Ideal, seeds: Iterable) -> OddFormIdeal:
    om = subgroup_closure(D.ctx, list(omega_min(D, A)) + list(seeds), circ=True)
    if not om <= omega_max(D, A):
        raise ClosureEscapesOmegaMax("generated omega leaves omega_max")
    return OddFormIdeal(D, A, om, validate=False)


def make_off(ctx: HermitianCtx, D: FormParam, A: Ideal, omega_gens: Sequence = ()) -> OddFormIdeal:
    hi = omega_max(D, A)
    gens = [(int(x), int(y)) for x, y in omega_gens]
    for g in gens:
        if g not in hi:
            raise GeneratorOutsideOmegaMax(f"({ctx.fmt(g[0])},{ctx.fmt(g[1])}) is not in omega_max")
    P = _build(D, A, gens)
    P.omega.generators = tuple(gens)
    return P


def zero_off(D: FormParam) -> OddFormIdeal:
    return make_off(D.ctx, D, zero_ideal(D.ctx))


def full_off(D: FormParam) -> OddFormIdeal:
    """``(R, D)`` itself."""
    return OddFormIdeal(D, whole_ideal(D.ctx), D.elements, validate=False)


def off_star(P: OddFormIdeal, J: Ideal) -> OddFormIdeal:
    """``(IJ, Omega_min^{IJ} + Omega o J)``."""
    ctx = P.ctx
    IJ = ideal_product(P.ideal, J)
    seeds = [hcirc(ctx, w, j) for w in P.omega.elements for j in J.elements]
    return _build(P.delta, IJ, seeds)


def off_colon(P: OddFormIdeal, J: Ideal) -> OddFormIdeal:
    """``(I:J, Omega_min^{I:J} + {a in Omega_max^{I:J} : a o J in Omega})``."""
    ctx = P.ctx
    IJ = ideal_quotient(P.ideal, J)
    om = P.omega.elements
    keep = [a for a in omega_max(P.delta, IJ) if all(hcirc(ctx, a, j) in om for j in J.elements)]
    return _build(P.delta, IJ, keep)


def off_subset(P: OddFormIdeal, Q: OddFormIdeal) -> bool:
    return P.ideal.elements <= Q.ideal.elements and P.omega.elements <= Q.omega.elements


def all_ideals(ctx: HermitianCtx) -> list[Ideal]:
    """Every involution invariant ideal, by saturating from the zero ideal."""
    found = {zero_ideal(ctx).elements}
    todo = [frozenset([ctx.zero])]
    while todo:
        cur = todo.pop()
        for x in range(ctx.q):
            if x in cur:
                continue
            nxt = ideal_closure(ctx, list(cur) + [x]).elements
            if nxt not in found:
                found.add(nxt)
                todo.append(nxt)
    return [Ideal(ctx, s) for s in sorted(found, key=lambda s: (len(s), sorted(s)))]


def all_odd_form_ideals(D: FormParam) -> list[OddFormIdeal]:
    """Every odd form ideal of ``(R, D)``; only sensible for tiny rings."""
    ctx = D.ctx
    out = []
    for A in all_ideals(ctx):
        lo, hi = omega_min(D, A), omega_max(D, A)
        if not lo <= hi:
            continue
        found = {lo}
        todo = [lo]
        while todo:
            cur = todo.pop()
            for a in hi - cur:
                nxt = subgroup_closure(ctx, list(cur) + [a], circ=True)
                if nxt <= hi and nxt not in found:
                    found.add(nxt)
                    todo.append(nxt)
        for om in sorted(found, key=lambda s: (len(s), sorted(s))):
            out.append(OddFormIdeal(D, A, om, validate=False))
    return out


def off_from_config(D: FormParam, ideal_cfg: dict | None, omega_cfg: dict | None) -> OddFormIdeal:
    ctx = D.ctx
    if ideal_cfg is None:
        return full_off(D)
    A = ideal_closure(ctx, [ctx.parse(g) for g in ideal_cfg.get("gens", [])])
    gens = [(ctx.parse(x), ctx.parse(y)) for x, y in (omega_cfg or {}).get("gens", [])]
    return make_off(ctx, D, A, gens)
