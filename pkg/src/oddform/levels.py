"""Lower and upper levels of subgroups and the sandwich verdicts built on them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadArguments, ClosureEscapesOmegaMax, NotAnIdeal
from .formideal import (
    OddFormIdeal,
    all_odd_form_ideals,
    check_off,
    ideal_closure,
    ideal_power,
    is_ideal,
    off_colon,
    off_star,
    off_subset,
    omega_max,
    omega_min,
    Ideal,
)
from .heisenberg import FormParam, hcirc, jdelta, subgroup_closure, vhcirc, vhminus, vhplus
from .subgroup_engine import (
    DEFAULT_BUDGET,
    GroupSet,
    _key,
    conj_orbit,
    eu_generators,
    pack,
)
from .subgroup_engine.predicates import membership_cu, membership_nu, q_col0_minus_one
from .unitary import eps, hpow, minv, pos, q_columns, t_extra, t_short, theta_hb


@dataclass
class LevelReport:
    lower: OddFormIdeal | None
    upper: OddFormIdeal
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    mode: str = "exact"

    @property
    def sandwich_ok(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        out = {"upper": self.upper.to_config(), "checks": dict(self.checks), "mode": self.mode,
               "details": self.details}
        out["lower"] = self.lower.to_config() if self.lower is not None else None
        return out


def k_exponent(n: int, d: int = 1, mode: str = "chain") -> int:
    """The exponent of ``I`` in the sandwich theorems.

    ``single`` is the exponent for one step (12 for n=3, 10 for n>=4);
    ``chain`` the exponent for a subnormal chain of length ``d``.
    """
    if n < 3 or d < 1:
        raise BadArguments(f"need n >= 3 and d >= 1, got n={n}, d={d}")
    base = 12 if n == 3 else 10
    if mode == "single":
        return base
    if mode == "chain":
        return (base ** d - 1) // (base - 1) - 1
    raise BadArguments(f"unknown mode {mode!r}")


# -- upper level ------------------------------------------------------------------

def _chunks(elems, chunk=100_000):
    if isinstance(elems, GroupSet):
        yield from elems.iter_matrices(chunk)
        return
    if hasattr(elems, "__next__"):
        # an iterator yields matrices or whole stacks
        for S in elems:
            S = np.asarray(S)
            yield S[None] if S.ndim == 2 else S
        return
    if isinstance(elems, np.ndarray):
        S = elems[None] if elems.ndim == 2 else elems
        for k in range(0, len(S), chunk):
            yield S[k:k + chunk]
        return
    batch = []
    for s in elems:
        batch.append(np.asarray(s))
        if len(batch) == chunk:
            yield np.stack(batch)
            batch = []
    if batch:
        yield np.stack(batch)


def harvest(ctx, S, D: FormParam):
    """The ring values ``Y`` and Heisenberg codes ``Z`` contributed by a stack."""
    n = ctx.n
    hb = theta_hb(n)
    hbp = [pos(n, i) for i in hb]
    M, sub = ctx.mul_t, ctx.sub_t
    J = sorted(jdelta(D))
    p0 = n
    ys = []
    blk = S[:, hbp][:, :, hbp]
    off = ~np.eye(len(hbp), dtype=bool)
    ys.append(blk[:, off].ravel())
    diag = blk[:, np.arange(len(hbp)), np.arange(len(hbp))]
    ys.append(sub[diag[:, :, None], diag[:, None, :]].ravel())
    col0 = S[:, hbp, p0]
    row0 = S[:, p0, hbp]
    d00 = sub[S[:, p0, p0][:, None], diag]
    for a in J:
        ys.append(M[col0, a].ravel())
        ba = M[ctx.bar(a), ctx.mu]
        ys.append(M[ba, row0].ravel())
        for b in J:
            ys.append(M[M[ba, d00], b].ravel())
    Y = np.unique(np.concatenate(ys))
    zs = []
    x, y = q_columns(ctx, S)
    zs.append((x[:, hbp] * ctx.q + y[:, hbp]).ravel())
    qx, qy = q_col0_minus_one(ctx, S)
    for (a, b) in sorted(D.elements):
        cx, cy = vhcirc(ctx, qx, qy, a)
        tx, ty = vhplus(ctx, cx, cy, np.intp(a), np.intp(b))
        for p in hbp:
            sx, sy = vhcirc(ctx, np.intp(a), np.intp(b), S[:, p, p])
            mx, my = vhminus(ctx, sx, sy)
            rx, ry = vhplus(ctx, tx, ty, mx, my)
            zs.append((rx * ctx.q + ry).ravel())
    Z = np.unique(np.concatenate(zs))
    return Y, Z


def _upper_from(ctx, D, Y, Z) -> OddFormIdeal:
    I = ideal_closure(ctx, [int(v) for v in Y])
    zel = [divmod(int(c), ctx.q) for c in Z]
    om = subgroup_closure(ctx, list(omega_min(D, I)) + zel, circ=True)
    if not om <= omega_max(D, I):
        raise ClosureEscapesOmegaMax("upper level omega leaves omega_max")
    return OddFormIdeal(D, I, om, validate=False)


def upper_level(elems, D: FormParam, early_stop: bool = True) -> OddFormIdeal:
    """``U(H)`` from all supplied elements (a GroupSet, a stack or an iterable)."""
    ctx = D.ctx
    Y = np.array([ctx.zero], dtype=np.intp)
    Z = np.array([ctx.zero * ctx.q + ctx.zero], dtype=np.intp)
    top = None
    for S in _chunks(elems):
        y, z = harvest(ctx, S, D)
        Y = np.union1d(Y, y)
        Z = np.union1d(Z, z)
        if early_stop:
            U = _upper_from(ctx, D, Y, Z)
            if U.ideal.is_whole() and U.omega.elements == D.elements:
                # nothing can grow any further once the level is (R, D)
                return U
            top = U
    return _upper_from(ctx, D, Y, Z) if top is None or not early_stop else top


# -- lower level -------------------------------------------------------------------

class _OrbitOracle:
    """Memoised test 'every ambient conjugate of x lies in H'."""

    def __init__(self, H: GroupSet, ambient, budget=DEFAULT_BUDGET):
        self.H = H
        self.ambient = ambient
        self.budget = budget
        self.good = set()
        self.bad = set()

    def __call__(self, x) -> bool:
        ctx = self.H.ctx
        k = int(pack(x)) if self.H.packed else _key(x)
        if k in self.good:
            return True
        if k in self.bad:
            return False
        if x not in self.H:
            self.bad.add(k)
            return False
        orb = conj_orbit(ctx, x, self.ambient, self.budget)
        inside = bool(self.H.contains_codes(orb).all()) if self.H.packed else bool(self.H.contains_many(orb).all())
        keys = [int(c) for c in orb] if self.H.packed else [_key(m) for m in orb]
        (self.good if inside else self.bad).update(keys)
        return inside


def _ideal_family(ctx, D, x):
    """The transvections whose conjugates must stay in H for ``x`` to be in the lower ideal."""
    n = ctx.n
    hb = theta_hb(n)
    R = range(ctx.q)
    for r in R:
        xr = ctx.mul(x, r)
        for i in hb:
            for j in hb:
                if i not in (j, -j):
                    yield t_short(ctx, i, j, xr)
        for i in hb:
            lam = ctx.lambda_power(-eps(i))
            yield t_extra(ctx, i, (ctx.zero, ctx.sub(xr, ctx.mul(ctx.bar(xr), lam))))
            for a in D.elements:
                alpha = hpow(ctx, a, -eps(i))
                yield t_extra(ctx, i, hcirc(ctx, alpha, xr))
                yield t_extra(ctx, i, hcirc(ctx, alpha, ctx.mul(ctx.bar(x), r)))


def lower_level(H: GroupSet, ambient, D: FormParam, budget: int = DEFAULT_BUDGET,
                findings: list | None = None) -> OddFormIdeal:
    """``L(H)``: the greatest level whose relative elementary subgroup lies in ``H``.

    Conjugation by the elementary group is realised through conjugation orbits
    under ``ambient`` (its generators).
    """
    ctx = D.ctx
    test = _OrbitOracle(H, ambient, budget)
    I_el = [x for x in range(ctx.q) if all(test(t) for t in _ideal_family(ctx, D, x))]
    if not is_ideal(ctx, I_el):
        if findings is not None:
            findings.append({"check": "lower_ideal_is_ideal", "verdict": False})
        I = ideal_closure(ctx, I_el)
    else:
        I = Ideal(ctx, I_el)
    keep = []
    for (y, z) in sorted(omega_max(D, I)):
        ok = True
        for r in range(ctx.q):
            for i in theta_hb(ctx.n):
                arg = (y, z) if i < 0 else (y, ctx.bar(z))
                if not test(t_extra(ctx, i, hcirc(ctx, arg, r))):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            keep.append((y, z))
    om = subgroup_closure(ctx, list(omega_min(D, I)) + keep, circ=True)
    L = OddFormIdeal(D, I, om, validate=False)
    try:
        check_off(L)
    except (NotAnIdeal, ClosureEscapesOmegaMax) as exc:
        if findings is not None:
            findings.append({"check": "lower_is_odd_form_ideal", "verdict": False, "error": str(exc)})
    return L


# -- verdicts -----------------------------------------------------------------------

def all_in_cu(elems, P: OddFormIdeal) -> bool:
    """Every element lies in the full congruence subgroup of ``P``.

    For a GroupSet the inverse half of the normalised test is skipped: the
    inverses of a group's elements are the same elements.
    """
    whole = isinstance(elems, GroupSet)
    for S in _chunks(elems):
        if not membership_cu(S, P, skip_inverse=whole).all():
            return False
    return True


def all_in_nu(elems, P: OddFormIdeal) -> bool:
    whole = isinstance(elems, GroupSet)
    for S in _chunks(elems):
        if not membership_nu(S, P, skip_inverse=whole).all():
            return False
    return True


def level_elementary_inside(H: GroupSet, P: OddFormIdeal, ambient, budget=DEFAULT_BUDGET, oracle=None) -> bool:
    """Is ``EU((R, D), P)`` contained in ``H``?  (Each generator's ambient orbit inside H.)"""
    test = oracle or _OrbitOracle(H, ambient, budget)
    return all(test(g) for g in eu_generators(P))


def sandwich_check(H: GroupSet, D: FormParam, k: int, ambient, I: Ideal | None = None,
                   budget: int = DEFAULT_BUDGET, with_lower: bool = True) -> LevelReport:
    """Evaluate both sandwich inclusions and the three equivalent reformulations."""
    upper = upper_level(H, D)
    I = upper.ideal if I is None else I
    Ik = ideal_power(I, k)
    target = off_star(upper, Ik)
    checks = {}
    checks["eu_in_H"] = bool(H.contains_many(np.stack(eu_generators(target))).all()) \
        if eu_generators(target) else True
    checks["H_in_CU"] = all_in_cu(H, upper)
    details = {"k": k, "upper_star": target.to_config()}
    lower = None
    if with_lower:
        findings = []
        oracle = _OrbitOracle(H, ambient, budget)
        lower = lower_level(H, ambient, D, budget, findings)
        checks["lower_in_upper"] = off_subset(lower, upper)
        inside = level_elementary_inside(H, target, ambient, budget, oracle)
        star_low = off_subset(target, lower)
        up_colon = off_subset(upper, off_colon(lower, Ik))
        details.update({"elementary_inside": inside, "star_in_lower": star_low, "upper_in_colon": up_colon})
        checks["reformulations_agree"] = inside == star_low == up_colon
        if findings:
            details["findings"] = findings
    return LevelReport(lower, upper, checks, details, "exact")


def conjugate_group_elements(H: GroupSet, tau, chunk: int = 100_000):
    """The elements ``h^tau = tau^-1 h tau`` of ``H^tau``, yielded as stacks."""
    ctx = H.ctx
    ti = minv(ctx, tau)
    for S in H.iter_matrices(chunk):
        yield ctx.matmul(ctx.matmul(ti, S), tau)


def conjugation_invariance_check(H: GroupSet, taus, D: FormParam) -> bool:
    U = upper_level(H, D)
    return all(upper_level(conjugate_group_elements(H, t), D) == U for t in taus)


def minimality_check(H, D: FormParam, offs=None) -> bool:
    """Every level whose full congruence subgroup contains ``H`` contains ``U(H)``."""
    U = upper_level(H, D)
    offs = all_odd_form_ideals(D) if offs is None else offs
    for P in offs:
        if all_in_cu(H, P) and not off_subset(U, P):
            return False
    return True
