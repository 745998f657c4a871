"""Arrow calculus and instance checks of the matrix identities used in the sandwich proofs.

Every ``verify_*`` function evaluates the displayed identities for one
matrix and one parameter tuple.  It returns ``True`` when all of them hold and
appends a finding bundle for each identity that fails.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidIndices, PreconditionViolated
from .formideal import ideal_closure, ideal_power, omega_min
from .heisenberg import hcirc, hplus
from .unitary import (
    eps,
    form_Q,
    identity,
    in_param_power,
    matrix_to_json,
    minv,
    minv_batch,
    polarity,
    pos,
    t_esd,
    t_extra,
    t_short,
    theta_hb,
    hpow,
)


# -- arrows ------------------------------------------------------------------------

@dataclass
class ArrowState:
    a: np.ndarray
    b: np.ndarray


@dataclass
class ConjugateDecomposition:
    """``target = prod (conj * base^exp * conj^-1)`` over the factors, in order."""
    base: np.ndarray
    factors: list = field(default_factory=list)   # (conjugator, exponent)
    words: list = field(default_factory=list)     # conjugator words in the letters a, g1, g2, ...

    def product(self, ctx) -> np.ndarray:
        out = identity(ctx)
        if not self.factors:
            return out
        inv = minv(ctx, self.base)
        C = np.stack([c for c, _ in self.factors])
        Ci = minv_batch(ctx, C)
        for c, ci, (_, e) in zip(C, Ci, self.factors):
            out = ctx.matmul(out, ctx.matmul(ctx.matmul(c, self.base if e > 0 else inv), ci))
        return out


def comm(ctx, g, h):
    """``[g, h] = g h g^-1 h^-1``."""
    return ctx.matmul(ctx.matmul(g, h), ctx.matmul(minv(ctx, g), minv(ctx, h)))


def arrow_step(ctx, state: ArrowState, g) -> ArrowState:
    """``(a, b) -> ([a^-1, g], [g, b])``."""
    return ArrowState(comm(ctx, minv(ctx, state.a), g), comm(ctx, g, state.b))


def arrow_chain(ctx, state: ArrowState, gs) -> ArrowState:
    for g in gs:
        state = arrow_step(ctx, state, g)
    return state


def _inv_word(w):
    return tuple((x, -e) for x, e in reversed(w))


def lemredux_decompose(ctx, state: ArrowState, gs) -> ConjugateDecomposition:
    """Write ``a_{n+1} b_{n+1}`` as ``2^n`` conjugates of ``c = a_1 b_1`` and ``c^-1``.

    One step uses ``a' b' = (a^-1 g) c (a^-1 g)^-1 * a^-1 c^-1 a`` with ``c = a b``:
    the factors of ``a b`` are conjugated by ``a^-1 g`` and those of ``(a b)^-1``
    (reversed, exponents flipped) by ``a^-1``.
    """
    base = ctx.matmul(state.a, state.b)
    e = identity(ctx)
    factors = [(e, 1)]
    words = [()]
    a, a_word = state.a, (("a", 1),)
    for k, g in enumerate(gs, start=1):
        ai = minv(ctx, a)
        left = ctx.matmul(ai, g)
        lw = _inv_word(a_word) + ((f"g{k}", 1),)
        new = [(ctx.matmul(left, c), x) for c, x in factors]
        new_w = [lw + w for w in words]
        new += [(ctx.matmul(ai, c), -x) for c, x in reversed(factors)]
        new_w += [_inv_word(a_word) + w for w in reversed(words)]
        factors, words = new, new_w
        a = comm(ctx, ai, g)
        # [a^-1, g] = a^-1 g a g^-1
        a_word = _inv_word(a_word) + ((f"g{k}", 1),) + a_word + ((f"g{k}", -1),)
    return ConjugateDecomposition(base, factors, [_simplify(w) for w in words])


def _simplify(w):
    out = []
    for x in w:
        if out and out[-1][0] == x[0] and out[-1][1] == -x[1]:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def evaluate_word(ctx, word, letters: dict, inverses: dict | None = None):
    """Multiply out a word; ``inverses`` caches the inverted letters across calls."""
    inverses = {} if inverses is None else inverses
    out = identity(ctx)
    for name, e in word:
        if e > 0:
            m = letters[name]
        else:
            if name not in inverses:
                inverses[name] = minv(ctx, letters[name])
            m = inverses[name]
        out = ctx.matmul(out, m)
    return out


def check_decomposition(ctx, dec: ConjugateDecomposition, state: ArrowState, gs, target) -> dict:
    """Factor count, exact reconstruction, and that each conjugator equals its word."""
    letters = {"a": state.a, **{f"g{k}": g for k, g in enumerate(gs, start=1)}}
    inverses = {}
    words_ok = all(np.array_equal(evaluate_word(ctx, w, letters, inverses), c)
                   for w, (c, _) in zip(dec.words, dec.factors))
    return {
        "count": len(dec.factors) == 2 ** len(gs),
        "reconstruct": np.array_equal(dec.product(ctx), target),
        "words": words_ok,
    }


# -- bookkeeping -----------------------------------------------------------------

def _finding(ctx, lemma, params, lhs, rhs):
    def enc(v):
        if isinstance(v, np.ndarray) and v.ndim == 2:
            return matrix_to_json(ctx, v)
        if isinstance(v, np.ndarray):
            return [ctx.fmt(int(x)) for x in v]
        if isinstance(v, tuple):
            return [ctx.fmt(int(x)) for x in v]
        if isinstance(v, (int, np.integer)):
            return ctx.fmt(int(v))
        return v
    return {"lemma": lemma, "params": params, "lhs": enc(lhs), "rhs": enc(rhs), "verdict": False}


class _Checker:
    def __init__(self, ctx, lemma, params, findings):
        self.ctx, self.lemma, self.params, self.findings = ctx, lemma, params, findings
        self.ok = True

    def eq(self, name, lhs, rhs):
        same = np.array_equal(np.asarray(lhs), np.asarray(rhs))
        if not same:
            self.ok = False
            if self.findings is not None:
                self.findings.append(_finding(self.ctx, f"{self.lemma}.{name}", self.params, lhs, rhs))
        return same

    def true(self, name, cond, detail=None):
        if not cond:
            self.ok = False
            if self.findings is not None:
                self.findings.append({"lemma": f"{self.lemma}.{name}", "params": self.params,
                                      "lhs": detail, "rhs": None, "verdict": False})
        return bool(cond)


def _e(ctx, s, i, j):
    return int(s[pos(ctx.n, i), pos(ctx.n, j)])


def _distinct_hb(n, *idx):
    hb = theta_hb(n)
    if any(i not in hb for i in idx):
        raise InvalidIndices(f"indices {idx} not in the hyperbolic range")


def _elementary_ok(ctx, P, factors) -> bool:
    """Are all transvection factors ``(kind, i, j_or_none, arg)`` of level ``P``?"""
    for kind, i, arg in factors:
        if kind == "short" and arg not in P.ideal:
            return False
        if kind == "extra" and not in_param_power(ctx, arg, P.omega, -eps(i)):
            return False
    return True


# -- Lemma on two special elements and their arrow chains ------------------------------

CHOICES = ("n3_case_i", "n3_case_ii", "n4_case_i", "n4_case_ii")


def _tau_factors(ctx, sigma, r, s, t, a1, which):
    """The four elementary factors of tau_1 (``which=1``) or tau_2 (``which=2``)."""
    S = lambda i, j: _e(ctx, sigma, i, j)
    b = ctx.bar
    lp = ctx.lambda_power
    m = ctx.mul
    er, es, et = eps(r), eps(s), eps(t)
    if which == 1:
        x1 = m(S(s, s), b(S(s, r)), b(a1))
        x2 = ctx.neg(m(S(s, r), b(S(s, r)), b(a1)))
        x3 = ctx.neg(m(lp((et - es) // 2), S(s, -t), b(S(s, r)), a1))
        z = ctx.sub(m(lp((et - er) // 2), S(s, -t), b(S(s, s)), a1),
                    m(lp((-et - er) // 2), S(s, s), b(S(s, -t)), b(a1)))
    else:
        x1 = m(S(r, s), b(S(r, r)), a1)
        x2 = ctx.neg(m(S(r, r), b(S(r, r)), a1))
        x3 = ctx.neg(m(lp((et - es) // 2), S(r, -t), b(S(r, r)), b(a1)))
        z = ctx.sub(m(lp((et - er) // 2), S(r, -t), b(S(r, s)), b(a1)),
                    m(lp((-et - er) // 2), S(r, s), b(S(r, -t)), a1))
    return [("short", (r, t), x1), ("short", (s, t), x2), ("short", (r, -s), x3), ("extra", r, (ctx.zero, z))]


def _build(ctx, factors):
    out = identity(ctx)
    for kind, idx, arg in factors:
        m = t_short(ctx, idx[0], idx[1], arg) if kind == "short" else t_extra(ctx, idx, arg)
        out = ctx.matmul(out, m)
    return out


def lemsub2_chain(ctx, sigma, choice, params):
    """The arrow letters and the claimed target transvection for one parameter tuple."""
    r, s, t = params["r"], params["s"], params["t"]
    a = params["a"]
    T = lambda i, j, x: t_short(ctx, i, j, x)
    lp = ctx.lambda_power
    S = lambda i, j: _e(ctx, sigma, i, j)
    c = ctx.neg(ctx.mul(lp((eps(s) - eps(t)) // 2), a[3])) if len(a) > 3 else None
    if choice == "n3_case_i":
        pm = params["pm"]
        gs = [T(-s, t, a[1]), T(-s, r, a[2]), T(t, pm * r, c)]
        val = ctx.mul(S(s, -t), ctx.bar(S(s, r)), a[0], a[1], a[2], a[3])
        return 1, gs, T(-s, pm * r, val)
    if choice == "n3_case_ii":
        gs = [T(s, r, a[1]), T(t, r, a[2]), T(r, -t, a[3]), T(-r, s, a[4])]
        val = ctx.mul(S(r, s), ctx.bar(S(r, r)), a[0], a[1], a[2], a[3], a[4])
        return 2, gs, T(-r, -t, val)
    if choice == "n4_case_i":
        u = params["u"]
        val = ctx.mul(S(s, -t), ctx.bar(S(s, r)), a[0], a[1], a[2], a[3])
        if params.get("v") is None:
            gs = [T(-s, t, a[1]), T(-s, r, a[2]), T(t, u, c)]
            return 1, gs, T(-s, u, val)
        v = params["v"]
        gs = [T(-s, u, a[1]), T(-s, r, a[2]), T(u, v, c)]
        return 1, gs, T(-s, v, val)
    if choice == "n4_case_ii":
        u, v = params["u"], params["v"]
        gs = [T(s, r, a[1]), T(t, u, a[2]), T(v, s, ctx.neg(a[3]))]
        val = ctx.mul(S(r, s), ctx.bar(S(r, r)), a[0], a[1], a[2], a[3])
        return 2, gs, T(v, u, val)
    raise InvalidIndices(f"unknown choice {choice!r}")


def _validate_lemsub2(n, choice, p):
    r, s, t = p["r"], p["s"], p["t"]
    _distinct_hb(n, r, s, t)
    if r in (s, -s) or t in (r, -r, s, -s):
        raise InvalidIndices(f"need r != +-s and t != +-r, +-s, got {(r, s, t)}")
    if choice.startswith("n4") and n < 4:
        raise InvalidIndices("the n >= 4 chains need n >= 4")
    if choice.startswith("n3") and n != 3:
        raise InvalidIndices("the n = 3 chains need n = 3")
    u, v = p.get("u"), p.get("v")
    if choice == "n4_case_i":
        if u in (s, -s, t, -t) or (v is not None and (u in (r, -r) or v in (s, -s, u, -u))):
            raise InvalidIndices(f"bad (u, v) = {(u, v)}")
    if choice == "n4_case_ii":
        if u in (r, -r, s, -s, t, -t) or v in (r, s, -s, -t, u, -u):
            raise InvalidIndices(f"bad (u, v) = {(u, v)}")


def verify_lemsub2_arrows(ctx, sigma, choice: str, params: dict, P, findings=None) -> bool:
    """Check tau in EU(I, Omega), the row/column identities of xi, the arrow chain and its decomposition."""
    _validate_lemsub2(ctx.n, choice, params)
    r, s = params["r"], params["s"]
    which, gs, target = lemsub2_chain(ctx, sigma, choice, params)
    ck = _Checker(ctx, f"lemsub2.{choice}", _jsonable(params), findings)
    facs = _tau_factors(ctx, sigma, r, s, params["t"], params["a"][0], which)
    ck.true("tau_elementary", _elementary_ok(ctx, P, [(k, i if k == "extra" else None, x) for k, i, x in facs]))
    tau = _build(ctx, facs)
    si, ti = minv(ctx, sigma), minv(ctx, tau)
    xi = ctx.matmul(ctx.matmul(sigma, ti), si)
    e = identity(ctx)
    k = s if which == 1 else r
    pk, pmk = pos(ctx.n, k), pos(ctx.n, -k)
    ck.eq("sigma_tauinv_row", ctx.matmul(sigma, ti)[pk], sigma[pk])
    ck.eq("tauinv_sigmainv_col", ctx.matmul(ti, si)[:, pmk], si[:, pmk])
    ck.eq("xi_row", xi[pk], e[pk])
    ck.eq("xi_col", xi[:, pmk], e[:, pmk])
    start = ArrowState(tau, xi)
    end = arrow_chain(ctx, start, gs)
    ck.eq("chain_a", end.a, target)
    ck.eq("chain_b", end.b, e)
    dec = lemredux_decompose(ctx, start, gs)
    res = check_decomposition(ctx, dec, start, gs, ctx.matmul(end.a, end.b))
    for name, good in res.items():
        ck.true(f"decomposition_{name}", good)
    return ck.ok


def lemsub2_params(ctx, choice: str, ideal_elems):
    """Every valid parameter tuple of one chain with all a-values from ``ideal_elems``."""
    n = ctx.n
    hb = theta_hb(n)
    na = 5 if choice == "n3_case_ii" else 4
    for r, s, t in itertools.product(hb, repeat=3):
        if r in (s, -s) or t in (r, -r, s, -s):
            continue
        extra = [{}]
        if choice == "n3_case_i":
            extra = [{"pm": 1}, {"pm": -1}]
        elif choice == "n4_case_i":
            extra = [{"u": u, "v": None} for u in hb if u not in (s, -s, t, -t)]
            extra += [{"u": u, "v": v} for u in hb if u not in (r, -r, s, -s, t, -t)
                      for v in hb if v not in (s, -s, u, -u)]
        elif choice == "n4_case_ii":
            extra = [{"u": u, "v": v} for u in hb if u not in (r, -r, s, -s, t, -t)
                     for v in hb if v not in (r, s, -s, -t, u, -u)]
        for ex in extra:
            for a in itertools.product(sorted(ideal_elems), repeat=na):
                yield {"r": r, "s": s, "t": t, "a": list(a), **ex}


def _jsonable(p):
    return {k: (list(v) if isinstance(v, (list, tuple)) else v) for k, v in p.items()}


# -- the congruences of the third lemma, with the sign probe ---------------------------

def lemsub3_values(ctx, sigma, r, s, t, a0):
    """``tau`` and the displayed expressions for its (t,t) and (t,r) entries."""
    S = lambda i, j: _e(ctx, sigma, i, j)
    si = minv(ctx, sigma)
    Sp = lambda i, j: _e(ctx, si, i, j)
    m, b, lp = ctx.mul, ctx.bar, ctx.lambda_power
    g = t_short(ctx, t, r, ctx.neg(m(b(S(r, s)), b(a0))))
    tau = comm(ctx, si, g)
    tt, tr = _e(ctx, tau, t, t), _e(ctx, tau, t, r)
    k = lp((eps(r) - eps(t)) // 2)
    w = m(b(S(r, s)), b(a0))
    l2 = m(lp(-eps(t)), b(S(r, -t)), S(r, s), a0)
    out = {
        "tau": tau,
        "tt": tt,
        "tr": tr,
        "tt_line1": ctx.add(ctx.sub(ctx.one, m(Sp(t, t), w, S(r, t))), m(Sp(t, -r), k, S(r, s), a0, S(-t, t))),
        "tt_line2": ctx.add(ctx.sub(ctx.one, m(Sp(t, t), w, S(r, t))), m(l2, S(-t, t))),
        "tr_line1": ctx.add(ctx.add(ctx.neg(m(Sp(t, t), w, S(r, r))), m(Sp(t, -r), k, S(r, s), a0, S(-t, r))),
                            m(tt, w)),
        "tr_line2_minus": ctx.add(ctx.add(ctx.neg(m(Sp(t, t), w, S(r, r))), m(l2, S(-t, r))), m(tt, w)),
        "tr_line2_plus": ctx.add(ctx.add(m(Sp(t, t), w, S(r, r)), m(l2, S(-t, r))), m(tt, w)),
    }
    gens = [m(a0, S(r, s), b(S(r, r))), m(a0, S(r, s), b(S(r, t))), m(a0, S(r, s), b(S(r, -t)))]
    out["J"] = ideal_closure(ctx, gens)
    return out


def verify_lemsub3_congruences(ctx, sigma, r, s, t, a0, findings=None, probe=None) -> bool:
    """Check the entry formulas and the three congruences mod J.

    ``probe`` (a dict) accumulates the sign probe: how often the minus reading
    and the plus reading of the second display line of ``tau_tr`` hold, and how
    often the two readings differ at all.  Only the minus reading is part of
    the verdict; a failing plus reading is recorded as a probe finding.
    """
    _distinct_hb(ctx.n, r, s, t)
    if r in (s, -s) or t in (r, -r, s, -s):
        raise InvalidIndices(f"need r != +-s and t != +-r, +-s, got {(r, s, t)}")
    v = lemsub3_values(ctx, sigma, r, s, t, a0)
    params = {"r": r, "s": s, "t": t, "a0": ctx.fmt(a0)}
    ck = _Checker(ctx, "lemsub3", params, findings)
    ck.eq("tt_line1", v["tt_line1"], v["tt"])
    ck.eq("tt_line2", v["tt_line2"], v["tt"])
    ck.eq("tr_line1", v["tr_line1"], v["tr"])
    ck.eq("tr_line2", v["tr_line2_minus"], v["tr"])
    J = v["J"]
    m, b = ctx.mul, ctx.bar
    ck.true("tt_congruence", ctx.sub(v["tt"], ctx.one) in J)
    ck.true("tr_congruence", ctx.sub(v["tr"], m(b(_e(ctx, sigma, r, s)), b(a0))) in J)
    ck.true("product_congruence", ctx.sub(m(v["tt"], b(v["tr"])), m(_e(ctx, sigma, r, s), a0)) in J)
    if probe is not None:
        minus_ok = v["tr_line2_minus"] == v["tr"]
        plus_ok = v["tr_line2_plus"] == v["tr"]
        probe["cases"] = probe.get("cases", 0) + 1
        probe["minus_holds"] = probe.get("minus_holds", 0) + int(minus_ok)
        probe["plus_holds"] = probe.get("plus_holds", 0) + int(plus_ok)
        probe["readings_differ"] = probe.get("readings_differ", 0) + int(v["tr_line2_minus"] != v["tr_line2_plus"])
        if not plus_ok and "first_plus_failure" not in probe:
            probe["first_plus_failure"] = {"params": params, "sigma": matrix_to_json(ctx, sigma),
                                           "tau_tr": ctx.fmt(v["tr"]), "plus_reading": ctx.fmt(v["tr_line2_plus"])}
    return ck.ok


def sign_probe_verdict(probe: dict) -> str:
    """Summarise the probe: which reading of the second display line is valid."""
    if not probe.get("cases"):
        return "untested"
    minus = probe["minus_holds"] == probe["cases"]
    plus = probe["plus_holds"] == probe["cases"]
    if minus and plus:
        return "both readings hold (the two readings coincide on every tested case)"
    if minus:
        return "minus reading holds, plus reading fails"
    if plus:
        return "plus reading holds, minus reading fails"
    return "neither reading holds"


# -- the first reduction step of the sandwich argument ------------------------------------------------------

def esd_matrix(ctx, j, v, x=None):
    """``e + v e_j^t - e_{-j} lambda^{(eps(j)-1)/2} v~ + x e^{-j,j}`` without preconditions."""
    return t_esd(ctx, j, np.asarray(v, dtype=np.intp), ctx.zero if x is None else x, None, False)


def _outer(ctx, u, w):
    return ctx.mul_t[np.asarray(u)[:, None], np.asarray(w)[None, :]]


def verify_thm1_step1(ctx, sigma, r, s, t, b, c, P, findings=None, probe=None) -> bool:
    """Check every displayed identity of the first reduction step for one ``(sigma, r, s, t, b, c)``.

    The long-root factor of the psi factorisation is evaluated with the
    conjugate of the product ``zeta_{-t,r} c``.  ``probe`` (a dict) counts how
    often the literal reading, which conjugates ``zeta_{-t,r}`` alone, also gives
    the right matrix.
    """
    n = ctx.n
    _distinct_hb(n, r, s, t)
    if not (r > 0 and s > 0 and r != s) or t in (r, -r, s, -s):
        raise InvalidIndices(f"need r != s positive and t != +-r, +-s, got {(r, s, t)}")
    m, br, lp = ctx.mul, ctx.bar, ctx.lambda_power
    S = lambda i, j: _e(ctx, sigma, i, j)
    si = minv(ctx, sigma)
    Sp = lambda i, j: _e(ctx, si, i, j)
    e = identity(ctx)
    et = eps(t)
    ck = _Checker(ctx, "thm1_step1", {"r": r, "s": s, "t": t, "b": ctx.fmt(b), "c": ctx.fmt(c)}, findings)
    P_ = lambda i: pos(n, i)

    def unit(i):
        return e[:, P_(i)].copy()

    # u' and u
    up = ctx.sub_t[ctx.mul_t[unit(-r), br(S(s, s))], ctx.mul_t[unit(-s), br(S(r, s))]]
    up2 = ctx.sub_t[ctx.mul_t[unit(-r), Sp(-s, -s)], ctx.mul_t[unit(-s), Sp(-s, -r)]]
    ck.eq("u_prime", up2, up)
    upb = ctx.mul_t[up, b]
    u = ctx.matmul(si, upb[:, None])[:, 0]
    ck.true("u_minus_s_zero", int(u[P_(-s)]) == ctx.zero)
    ck.true("u_in_I", all(int(u[P_(i)]) in P.ideal for i in theta_hb(n)))
    ck.true("Q_u_in_omega_min", form_Q(ctx, u) in omega_min(P.delta, P.ideal))
    # xi and the closed forms of the conjugated ESD transvection
    mu_ = ctx.neg_t[u]
    T_neg = esd_matrix(ctx, -s, mu_)
    xi = ctx.matmul(ctx.matmul(sigma, T_neg), si)
    cs = sigma[:, P_(s)]
    lb = ctx.lam_bar
    su = ctx.matmul(sigma, u[:, None])[:, 0]
    f1 = ctx.add_t[ctx.sub_t[e, _outer(ctx, su, polarity(ctx, cs))], ctx.mul_t[lb, _outer(ctx, cs, polarity(ctx, su))]]
    f2 = ctx.add_t[ctx.sub_t[e, _outer(ctx, upb, polarity(ctx, cs))], ctx.mul_t[lb, _outer(ctx, cs, polarity(ctx, upb))]]
    ck.eq("xi_closed_form", xi, f1)
    ck.eq("xi_closed_form_uprime", xi, f2)
    # tau and zeta
    tau = ctx.matmul(t_short(ctx, t, r, ctx.neg(m(S(t, s), S(s, s), br(b)))),
                     t_short(ctx, t, s, m(S(t, s), S(r, s), br(b))))
    zeta = ctx.matmul(xi, tau)
    ck.eq("zeta_row_t", zeta[P_(t)], e[P_(t)])
    ck.eq("zeta_col_minus_t", zeta[:, P_(-t)], e[:, P_(-t)])
    lt = lp((et + 1) // 2)
    w = ctx.sub_t[cs, ctx.mul_t[unit(t), S(t, s)]]
    col = ctx.add_t[unit(r), ctx.mul_t[w, m(S(s, s), br(b))]]
    cms = ctx.sub(m(br(S(r, s)), br(S(-r, s)), b, ctx.lam), m(S(t, s), S(s, s), br(b), br(S(r, s)), br(S(-t, s)), b, lt))
    cmr = ctx.add(ctx.neg(m(br(S(s, s)), br(S(-r, s)), b, ctx.lam)), m(S(t, s), S(s, s), br(b), br(S(s, s)), br(S(-t, s)), b, lt))
    col = ctx.add_t[col, ctx.add_t[ctx.mul_t[unit(-s), cms], ctx.mul_t[unit(-r), cmr]]]
    ck.eq("zeta_col_r", zeta[:, P_(r)], col)
    # the arrow step
    g = t_short(ctx, r, t, ctx.neg(c))
    T_pos = esd_matrix(ctx, -s, u)
    st = arrow_step(ctx, ArrowState(T_pos, zeta), g)
    phi, psi = st.a, st.b
    ut, umr = int(u[P_(t)]), int(u[P_(-r)])
    h = m(ut, br(umr), c)
    phi_f = _build(ctx, [("extra", s, (ctx.zero, ctx.add(ctx.neg(h), m(br(h), lb)))),
                         ("short", (s, -r), m(lb, br(ut), br(c))),
                         ("short", (s, t), ctx.neg(m(br(umr), c)))])
    ck.eq("phi", phi, phi_f)
    zr = zeta[:, P_(r)]
    zc = ctx.mul_t[zr, c]
    ck.eq("psi_esd", psi, ctx.matmul(g, esd_matrix(ctx, t, zc)))
    v = ctx.mul_t[ctx.sub_t[zr, unit(r)], c]
    x = m(lp((et - 1) // 2), br(c), _e(ctx, zeta, -r, r), c)
    ck.eq("psi_shifted_esd", psi, esd_matrix(ctx, t, v, x))
    z_mt = _e(ctx, zeta, -t, r)
    # the display conjugates only zeta_{-t,r}; the factorisation needs the conjugate of zeta_{-t,r} c
    tail = ctx.sub(m(z_mt, c), m(lp(et), br(m(z_mt, c))))
    tail_literal = ctx.sub(m(z_mt, c), m(lp(et), br(z_mt), c))
    head = hplus(ctx, hpow(ctx, form_Q(ctx, v), et), (ctx.zero, x), et)
    psi_f = identity(ctx)
    for i in theta_hb(n):
        if i not in (t, -t):
            psi_f = ctx.matmul(psi_f, t_short(ctx, i, t, m(ctx.sub(_e(ctx, zeta, i, r), e[P_(i), P_(r)]), c)))
    psi_f = ctx.matmul(ctx.matmul(psi_f, t_extra(ctx, -t, (ctx.zero, tail))), t_extra(ctx, -t, head))
    ck.eq("psi_factorised", psi, psi_f)
    if probe is not None:
        lit = identity(ctx)
        for i in theta_hb(n):
            if i not in (t, -t):
                lit = ctx.matmul(lit, t_short(ctx, i, t, m(ctx.sub(_e(ctx, zeta, i, r), e[P_(i), P_(r)]), c)))
        lit = ctx.matmul(ctx.matmul(lit, t_extra(ctx, -t, (ctx.zero, tail_literal))), t_extra(ctx, -t, head))
        probe["cases"] = probe.get("cases", 0) + 1
        probe["literal_holds"] = probe.get("literal_holds", 0) + int(np.array_equal(lit, psi))
        probe["readings_differ"] = probe.get("readings_differ", 0) + int(tail != tail_literal)
    # the combined factorisation of phi psi
    six = _build(ctx, [("extra", s, (ctx.zero, ctx.add(ctx.neg(h), m(br(h), lb)))),
                       ("short", (s, -r), m(lb, br(ut), br(c))),
                       ("short", (s, t), m(ctx.sub(_e(ctx, zeta, s, r), br(umr)), c))])
    for i in theta_hb(n):
        if i not in (s, t, -t):
            six = ctx.matmul(six, t_short(ctx, i, t, m(ctx.sub(_e(ctx, zeta, i, r), e[P_(i), P_(r)]), c)))
    six = ctx.matmul(ctx.matmul(six, t_extra(ctx, -t, (ctx.zero, tail))), t_extra(ctx, -t, head))
    ck.eq("phi_psi_factorised", ctx.matmul(phi, psi), six)
    # the final Q reduction, with an existential witness y
    base = hpow(ctx, hcirc(ctx, form_Q(ctx, sigma[:, P_(s)]), m(S(s, s), br(b), c)), et)
    Y = ideal_closure(ctx, [m(S(-r, s), br(b), c), m(S(t, s), br(b), c)])
    witness = None
    for y in sorted(Y.elements):
        if hplus(ctx, base, (ctx.zero, ctx.sub(y, m(br(y), lp(et)))), et) == head:
            witness = y
            break
    ck.true("Q_reduction_witness", witness is not None, detail={"head": [ctx.fmt(z) for z in head]})
    return ck.ok


def step1_params(ctx, ideal_elems, b_elems=None):
    n = ctx.n
    hb = theta_hb(n)
    b_elems = sorted(ideal_elems if b_elems is None else b_elems)
    for r, s in itertools.permutations(range(1, n + 1), 2):
        for t in hb:
            if t in (r, -r, s, -s):
                continue
            for b in b_elems:
                for c in sorted(ideal_elems):
                    yield r, s, t, b, c


# -- the spreading lemma --------------------------------------------------------------

def verify_spreading(H, x, r, s, m, P, check_normalised=True) -> bool:
    """If ``T_{r,+-s}(x a)`` lies in H for all a in I^m, then so does every ``T_ij(x a)``, a in I^(m+3)."""
    from .subgroup_engine import eu_generators
    ctx = H.ctx
    _distinct_hb(ctx.n, r, s)
    if r in (s, -s):
        raise InvalidIndices("need r != +-s")
    if check_normalised:
        gens = eu_generators(P)
        for g in gens:
            gi = minv(ctx, g)
            for h in H.generators:
                if ctx.matmul(ctx.matmul(g, h), gi) not in H:
                    raise PreconditionViolated("normalised", "H is not normalised by the level generators")
    Im = ideal_power(P.ideal, m)
    hyp = all(t_short(ctx, r, k, ctx.mul(x, a)) in H for k in (s, -s) for a in Im.elements)
    if not hyp:
        return True
    I3 = ideal_power(P.ideal, m + 3)
    hb = theta_hb(ctx.n)
    return all(t_short(ctx, i, j, ctx.mul(x, a)) in H
               for i in hb for j in hb if i not in (j, -j) for a in I3.elements)
