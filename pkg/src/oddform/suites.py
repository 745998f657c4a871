"""Suite runners behind the command line: each turns a ScenarioConfig into a RunReport."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import proofcheck as pc
from .config import ScenarioConfig, case_rng
from .errors import BudgetExceeded, InvalidInvolution, MalformedSpec, NotUnitary, OddFormError
from .formideal import (
    all_odd_form_ideals,
    check_off,
    ideal_closure,
    ideal_power,
    off_colon,
    off_from_config,
    off_star,
)
from .heisenberg import is_form_param, param_from_config
from .levels import (
    LevelReport,
    all_in_cu,
    all_in_nu,
    conjugation_invariance_check,
    k_exponent,
    lower_level,
    minimality_check,
    sandwich_check,
    upper_level,
)
from .orders import expected_eu_order
from .relations import RELATIONS, check_relation, cases, run_form_identities
from .ring import make_ctx
from .subgroup_engine import (
    DEFAULT_BUDGET,
    GroupSet,
    closure,
    eu_generators,
    full_eu_generators,
    normal_closure,
    packable,
)
from .unitary import (
    identity,
    is_unitary_l36,
    matrix_from_json,
    minv,
    random_product,
    random_transvection,
    t_short,
    theta_hb,
)

SUITES = ("validate", "relations", "closure", "levels", "sandwich", "proofcheck")
LEMMAS = ("lemsub2", "lemsub3", "thm1-step1", "spreading", "lemredux")
LEMREDUX_MAX_STEPS = 4


@dataclass
class RunReport:
    suite: str
    seed: int
    counts: dict = field(default_factory=lambda: {"pass": 0, "fail": 0, "skip": 0})
    findings: list = field(default_factory=list)
    result: dict = field(default_factory=dict)
    version: str = __version__
    wall_time: float | None = None

    def passed(self, k: int = 1):
        self.counts["pass"] += k

    def failed(self, finding=None, k: int = 1):
        self.counts["fail"] += k
        if finding is not None:
            self.findings.append(finding)

    def skipped(self, k: int = 1):
        self.counts["skip"] += k

    def record(self, ok: bool, finding=None):
        if ok:
            self.passed()
        else:
            self.failed(finding)
        return ok

    @property
    def exit_code(self) -> int:
        return 0 if self.counts["fail"] == 0 else 1

    def to_json(self, timing: bool = False) -> dict:
        out = {"suite": self.suite, "seed": self.seed, "counts": dict(self.counts),
               "findings": self.findings, "result": self.result, "version": self.version}
        if timing and self.wall_time is not None:
            out["wall_time"] = round(self.wall_time, 3)
        return out

    def dumps(self, timing: bool = False) -> str:
        return json.dumps(self.to_json(timing), sort_keys=True, indent=2)


def _error_finding(exc) -> dict:
    out = {"error": type(exc).__name__, "message": str(exc), "verdict": False}
    if isinstance(exc, BudgetExceeded):
        out.update({"budget_hit": True, "partial_size": exc.partial_size, "budget": exc.budget})
    return out


# -- building the objects a config describes -------------------------------------------

@dataclass
class Scenario:
    cfg: ScenarioConfig
    ctx: object
    D: object
    P: object


def build(cfg: ScenarioConfig, validate: bool = True) -> Scenario:
    ctx = make_ctx(cfg.ring, validate=validate)
    D = param_from_config(ctx, cfg.delta)
    P = off_from_config(D, cfg.ideal, cfg.omega)
    return Scenario(cfg, ctx, D, P)


def _budget(sc: Scenario, override=None) -> int:
    if override is not None:
        return int(override)
    sub = sc.cfg.subgroup or {}
    return int(sub.get("budget", sc.cfg.budget or DEFAULT_BUDGET))


def ambient_generators(sc: Scenario, which: str = "eu-full") -> list:
    if which == "eu-full":
        return full_eu_generators(sc.ctx, sc.D)
    if which == "eu-level":
        return eu_generators(sc.P)
    raise MalformedSpec(f"unknown ambient {which!r}")


def seed_matrices(sc: Scenario) -> list:
    """The seed of the subgroup config: a list of matrices or one of the named generator sets."""
    sub = sc.cfg.subgroup or {}
    seed = sub.get("seed", "eu-full")
    if seed == "trivial":
        return []
    if isinstance(seed, str):
        return ambient_generators(sc, seed)
    if isinstance(seed, dict) and "random_transvections" in seed:
        rng = case_rng(sc.cfg.seed, "subgroup.seed")
        return [random_transvection(sc.ctx, sc.D, rng, sc.P, nontrivial=True)
                for _ in range(int(seed["random_transvections"]))]
    if not isinstance(seed, list):
        raise MalformedSpec("subgroup seed must be a list of matrices or a generator set name")
    return [matrix_from_json(sc.ctx, m) for m in seed]


def build_subgroup(sc: Scenario, budget=None) -> GroupSet:
    """The subgroup described by the config: generated by the seed, or its normal closure."""
    sub = sc.cfg.subgroup or {}
    seeds = seed_matrices(sc)
    for s in seeds:
        if not is_unitary_l36(sc.ctx, s, sc.D):
            raise NotUnitary("a subgroup seed matrix is not unitary for the configured form parameter")
    mode = sub.get("mode", "closure")
    b = _budget(sc, budget)
    if mode == "closure":
        return closure(sc.ctx, seeds, b)
    if mode == "normal":
        return normal_closure(sc.ctx, seeds, ambient_generators(sc, sub.get("ambient", "eu-full")), b)
    raise MalformedSpec(f"unknown subgroup mode {mode!r}")


def sample_subgroup(sc: Scenario, words: int, length: int = 8) -> np.ndarray:
    """Seeds plus random words in the seeds: a sample of the subgroup, for rings too large to enumerate."""
    seeds = seed_matrices(sc)
    if not seeds:
        return identity(sc.ctx)[None]
    letters = seeds + [minv(sc.ctx, s) for s in seeds]
    out = [identity(sc.ctx)] + list(seeds)
    for k in range(words):
        rng = case_rng(sc.cfg.seed, "subgroup.words", k)
        w = identity(sc.ctx)
        for i in rng.integers(0, len(letters), size=length):
            w = sc.ctx.matmul(w, letters[int(i)])
        out.append(w)
    return np.stack(out)


# -- validate -----------------------------------------------------------------------------

def run_validate(cfg: ScenarioConfig, validate: bool = True) -> RunReport:
    rep = RunReport("validate", cfg.seed)
    verdicts, ops = {}, {}
    steps = ("context", "delta", "odd_form_ideal", "subgroup_seed")
    try:
        ctx = make_ctx(cfg.ring, validate=validate)
        verdicts["context"] = True
        D = param_from_config(ctx, cfg.delta)
        verdicts["delta"] = bool(is_form_param(ctx, D.elements))
        if verdicts["delta"]:
            P = off_from_config(D, cfg.ideal, cfg.omega)
            check_off(P)
            verdicts["odd_form_ideal"] = True
            ops = ideal_operations(P, cfg.suite)
        if verdicts["delta"] and cfg.subgroup is not None and isinstance(cfg.subgroup.get("seed"), list):
            sc = Scenario(cfg, ctx, D, P)
            verdicts["subgroup_seed"] = all(is_unitary_l36(ctx, s, D) for s in seed_matrices(sc))
    except InvalidInvolution as exc:
        rep.failed(_error_finding(exc))
    except MalformedSpec:
        raise
    except OddFormError as exc:
        rep.failed(_error_finding(exc))
    for k in steps:
        if k in verdicts:
            rep.record(verdicts[k], {"check": k, "verdict": False})
        elif k != "subgroup_seed" or (cfg.subgroup or {}).get("seed") is not None:
            rep.skipped()
    rep.result = {"verdicts": verdicts}
    if ops:
        rep.result["ideal_operations"] = ops
    return rep


def ideal_operations(P, suite: dict) -> dict:
    """Power, star and colon of the configured level, when the suite asks for them."""
    ctx = P.ctx
    out = {}
    if "power" in suite:
        k = int(suite["power"])
        out["power"] = {"k": k, "ideal": [ctx.fmt(x) for x in sorted(ideal_power(P.ideal, k).elements)]}
    for name, op in (("star", off_star), ("colon", off_colon)):
        if name in suite:
            J = ideal_closure(ctx, [ctx.parse(g) for g in suite[name]])
            out[name] = op(P, J).to_config()
    return out


# -- relations ------------------------------------------------------------------------------

def run_relations_suite(cfg: ScenarioConfig, samples: int | None = None, validate: bool = True) -> RunReport:
    """The transvection relations (exhaustive, or ``samples`` tuples per relation) plus the form identities."""
    rep = RunReport("relations", cfg.seed)
    sc = build(cfg, validate)
    ctx, D = sc.ctx, sc.D
    per = {}
    for name in RELATIONS:
        ps = cases(ctx, D, name)
        if samples is not None and len(ps) > samples:
            idx = case_rng(cfg.seed, f"relations.{name}").integers(0, len(ps), size=samples)
            ps = [ps[k] for k in idx]
        r = check_relation(ctx, D, name, ps)
        per[name] = {"cases": r.counts[name], "failures": r.total_failures}
        rep.passed(r.counts[name] - r.total_failures)
        for f in r.failures:
            rep.failed(f)
    urng = case_rng(cfg.seed, "relations.unitary")
    units = [random_product(ctx, D, urng, 6) for _ in range(4)]
    fi = run_form_identities(ctx, D, samples or 512, case_rng(cfg.seed, "relations.form"), units)
    for name, k in fi.counts.items():
        bad = sum(1 for f in fi.failures if f["relation"] == name)
        per[name] = {"cases": k, "failures": bad}
        rep.passed(k - bad)
    for f in fi.failures:
        rep.failed(f)
    rep.result = {"relations": per, "mode": "exhaustive" if samples is None else "sampled"}
    return rep


# -- closure -----------------------------------------------------------------------------------

def run_closure(cfg: ScenarioConfig, budget=None, validate: bool = True) -> RunReport:
    rep = RunReport("closure", cfg.seed)
    sc = build(cfg, validate)
    sub = cfg.subgroup or {}
    try:
        G = build_subgroup(sc, budget)
    except MalformedSpec:
        raise
    except OddFormError as exc:
        rep.failed(_error_finding(exc))
        rep.result = {"order": None, "budget_hit": isinstance(exc, BudgetExceeded)}
        return rep
    rep.passed()
    res = {"order": len(G), "budget_hit": False, "fingerprint": G.fingerprint()}
    if sub.get("seed", "eu-full") == "eu-full" and sub.get("mode", "closure") == "closure":
        kind = (cfg.delta or {}).get("kind", "max")
        expected = expected_eu_order(sc.ctx, kind)
        if expected is not None:
            res["expected_order"] = expected
            rep.record(len(G) == expected, {"check": "order_oracle", "order": len(G),
                                            "expected": expected, "verdict": False})
    rep.result = res
    return rep


# -- levels and sandwich ----------------------------------------------------------------------

def _subgroup_or_sample(sc: Scenario, rep: RunReport, budget=None):
    """An enumerated subgroup when the ring allows it, else a sample; ``None`` on budget exhaustion."""
    sub = sc.cfg.subgroup or {}
    if sub.get("mode") == "sample" or not packable(sc.ctx):
        return sample_subgroup(sc, int(sub.get("words", 64))), "sampled"
    try:
        return build_subgroup(sc, budget), "exact"
    except MalformedSpec:
        raise
    except OddFormError as exc:
        rep.failed(_error_finding(exc))
        rep.result = {"budget_hit": isinstance(exc, BudgetExceeded)}
        return None, None


def _taus(sc: Scenario, count: int) -> list:
    return [random_transvection(sc.ctx, sc.D, case_rng(sc.cfg.seed, "levels.tau", k)) for k in range(count)]


def run_levels(cfg: ScenarioConfig, budget=None, validate: bool = True) -> RunReport:
    rep = RunReport("levels", cfg.seed)
    sc = build(cfg, validate)
    H, mode = _subgroup_or_sample(sc, rep, budget)
    if H is None:
        return rep
    checks, findings = {}, []
    U = upper_level(H, sc.D)
    checks["upper_is_odd_form_ideal"] = _valid_off(U)
    checks["H_in_NU"] = all_in_nu(H, U)
    checks["H_in_CU"] = all_in_cu(H, U)
    lower = None
    if mode == "exact":
        amb = full_eu_generators(sc.ctx, sc.D)
        lower = lower_level(H, amb, sc.D, _budget(sc, budget), findings)
        checks["lower_is_odd_form_ideal"] = _valid_off(lower)
        checks["lower_in_upper"] = lower.ideal.elements <= U.ideal.elements and \
            lower.omega.elements <= U.omega.elements
        checks["conjugation_invariance"] = conjugation_invariance_check(
            H, _taus(sc, int(cfg.suite.get("taus", 10))), sc.D)
        checks["minimality"] = minimality_check(H, sc.D, all_odd_form_ideals(sc.D))
    for k, ok in checks.items():
        rep.record(ok, {"check": k, "verdict": False})
    for f in findings:
        rep.failed(f)
    out = LevelReport(lower, U, checks, {}, mode).to_json()
    del out["details"]
    out["order"] = len(H)
    rep.result = out
    return rep


def _valid_off(P) -> bool:
    try:
        check_off(P)
        return True
    except OddFormError:
        return False


def default_k(cfg: ScenarioConfig) -> int:
    s = cfg.suite
    if "k" in s:
        return int(s["k"])
    if "d" in s:
        return k_exponent(cfg.ring["n"], int(s["d"]), s.get("k_mode", "chain"))
    return k_exponent(cfg.ring["n"], 1, "single")


def run_sandwich(cfg: ScenarioConfig, budget=None, validate: bool = True) -> RunReport:
    rep = RunReport("sandwich", cfg.seed)
    sc = build(cfg, validate)
    k = default_k(cfg)
    H, mode = _subgroup_or_sample(sc, rep, budget)
    if H is None:
        return rep
    if mode == "exact":
        amb = full_eu_generators(sc.ctx, sc.D)
        lr = sandwich_check(H, sc.D, k, amb, budget=_budget(sc, budget))
    else:
        U = upper_level(H, sc.D)
        lr = LevelReport(None, U, {"H_in_CU": all_in_cu(H, U)}, {"k": k}, "sampled")
    for name, ok in lr.checks.items():
        rep.record(ok, {"check": name, "verdict": False})
    for f in lr.details.pop("findings", []):
        rep.failed(f)
    out = lr.to_json()
    out["order"] = len(H)
    rep.result = out
    return rep


# -- proofcheck -------------------------------------------------------------------------------------

def _sigmas(sc: Scenario, count: int) -> list:
    """The fixed sigma set of an exhaustive sweep: the identity and seeded random products."""
    out = [identity(sc.ctx)]
    for k in range(count):
        out.append(random_product(sc.ctx, sc.D, case_rng(sc.cfg.seed, "proofcheck.sigma", k), 6))
    return out


def _lemsub2_choices(n: int) -> tuple:
    return ("n3_case_i", "n3_case_ii") if n == 3 else ("n4_case_i", "n4_case_ii")


def _lemsub2_shapes(ctx, choice):
    """Index tuples of one chain (a-values left out)."""
    seen, out = set(), []
    for p in pc.lemsub2_params(ctx, choice, [ctx.zero]):
        p = {k: v for k, v in p.items() if k != "a"}
        key = tuple(sorted(p.items(), key=lambda kv: kv[0]))
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def _lemsub3_triples(n):
    hb = theta_hb(n)
    return [(r, s, t) for r in hb for s in hb for t in hb if r not in (s, -s) and t not in (r, -r, s, -s)]


def _spreading_cases(ctx, P):
    hb = theta_hb(ctx.n)
    return [(x, r, s, m) for x in range(ctx.q) for r in hb for s in hb if r not in (s, -s) for m in (0, 1, 2)]


class _Tally:
    def __init__(self, rep):
        self.rep = rep
        self.per = {}

    def add(self, lemma, ok, findings):
        c = self.per.setdefault(lemma, {"cases": 0, "failures": 0})
        c["cases"] += 1
        if ok:
            self.rep.passed()
        else:
            c["failures"] += 1
            self.rep.failed()
            self.rep.findings.extend(findings)


def run_proofcheck(cfg: ScenarioConfig, samples: int | None = None, budget=None,
                   validate: bool = True) -> RunReport:
    """Instance checks of the proof identities: exhaustive parameter sweeps over a
    seeded sigma set, or ``samples`` seeded (sigma, parameter) draws per lemma."""
    rep = RunReport("proofcheck", cfg.seed)
    sc = build(cfg, validate)
    ctx, D, P = sc.ctx, sc.D, sc.P
    lemmas = cfg.suite.get("lemmas", list(LEMMAS))
    unknown = set(lemmas) - set(LEMMAS)
    if unknown:
        raise MalformedSpec(f"unknown lemmas {sorted(unknown)}")
    ideal = sorted(P.ideal.elements)
    tally = _Tally(rep)
    sign_probe, psi_probe = {}, {}
    exhaustive = samples is None
    sigmas = _sigmas(sc, int(cfg.suite.get("sigmas", 2))) if exhaustive else None

    def draw(lemma, k):
        rng = case_rng(cfg.seed, f"proofcheck.{lemma}", k)
        return rng, random_product(ctx, D, rng, 6)

    if "lemsub2" in lemmas:
        for choice in _lemsub2_choices(ctx.n):
            name = f"lemsub2.{choice}"
            if exhaustive:
                for sigma in sigmas:
                    for p in pc.lemsub2_params(ctx, choice, ideal):
                        f = []
                        tally.add(name, pc.verify_lemsub2_arrows(ctx, sigma, choice, p, P, f), f)
            else:
                shapes = _lemsub2_shapes(ctx, choice)
                na = 5 if choice == "n3_case_ii" else 4
                for k in range(samples):
                    rng, sigma = draw(name, k)
                    p = dict(shapes[int(rng.integers(len(shapes)))])
                    p["a"] = [ideal[int(i)] for i in rng.integers(0, len(ideal), size=na)]
                    f = []
                    tally.add(name, pc.verify_lemsub2_arrows(ctx, sigma, choice, p, P, f), f)

    if "lemsub3" in lemmas:
        triples = _lemsub3_triples(ctx.n)
        if exhaustive:
            for sigma in sigmas:
                for r, s, t in triples:
                    for a0 in range(ctx.q):
                        f = []
                        tally.add("lemsub3", pc.verify_lemsub3_congruences(ctx, sigma, r, s, t, a0, f, sign_probe), f)
        else:
            for k in range(samples):
                rng, sigma = draw("lemsub3", k)
                r, s, t = triples[int(rng.integers(len(triples)))]
                a0 = int(rng.integers(ctx.q))
                f = []
                tally.add("lemsub3", pc.verify_lemsub3_congruences(ctx, sigma, r, s, t, a0, f, sign_probe), f)

    if "thm1-step1" in lemmas:
        params = list(pc.step1_params(ctx, ideal))
        if exhaustive:
            for sigma in sigmas:
                for p in params:
                    f = []
                    tally.add("thm1-step1", pc.verify_thm1_step1(ctx, sigma, *p, P, f, psi_probe), f)
        else:
            for k in range(samples):
                rng, sigma = draw("thm1-step1", k)
                p = params[int(rng.integers(len(params)))]
                f = []
                tally.add("thm1-step1", pc.verify_thm1_step1(ctx, sigma, *p, P, f, psi_probe), f)

    if "lemredux" in lemmas:
        count = samples if samples is not None else int(cfg.suite.get("chains", 64))
        for k in range(count):
            rng, a = draw("lemredux", k)
            b = random_product(ctx, D, rng, 6)
            steps = 1 + k % LEMREDUX_MAX_STEPS
            gs = [random_product(ctx, D, rng, 3) for _ in range(steps)]
            start = pc.ArrowState(a, b)
            end = pc.arrow_chain(ctx, start, gs)
            dec = pc.lemredux_decompose(ctx, start, gs)
            res = pc.check_decomposition(ctx, dec, start, gs, ctx.matmul(end.a, end.b))
            ok = all(res.values())
            tally.add("lemredux", ok, [{"lemma": "lemredux", "params": {"case": k, "steps": steps},
                                        "lhs": res, "rhs": None, "verdict": False}])

    if "spreading" in lemmas:
        if packable(ctx):
            amb = full_eu_generators(ctx, D)
            seed = t_short(ctx, 1, 2, ctx.one)
            groups = {"normal_closure_T12": normal_closure(ctx, [seed], amb, _budget(sc, budget)),
                      "trivial": closure(ctx, [])}
            for gname, G in groups.items():
                for x, r, s, m in _spreading_cases(ctx, P):
                    ok = pc.verify_spreading(G, x, r, s, m, P)
                    tally.add("spreading", ok, [{"lemma": "spreading", "params": {
                        "H": gname, "x": ctx.fmt(x), "r": r, "s": s, "m": m}, "verdict": False}])
        else:
            rep.skipped()
            tally.per["spreading"] = {"cases": 0, "failures": 0, "skipped": "subgroup not enumerable"}

    probes = {}
    if sign_probe:
        probes["sign"] = {"verdict": pc.sign_probe_verdict(sign_probe), **sign_probe}
    if psi_probe:
        lit = psi_probe["literal_holds"] == psi_probe["cases"]
        probes["psi_display"] = {"verdict": "literal reading holds" if lit else "literal reading fails",
                                 **psi_probe}
    rep.result = {"lemmas": tally.per, "probes": probes, "mode": "exhaustive" if exhaustive else "sampled"}
    return rep


RUNNERS = {
    "validate": run_validate,
    "relations": run_relations_suite,
    "closure": run_closure,
    "levels": run_levels,
    "sandwich": run_sandwich,
    "proofcheck": run_proofcheck,
}


def run_suite(name: str, cfg: ScenarioConfig, samples=None, budget=None, validate=True) -> RunReport:
    t0 = time.perf_counter()
    if name == "validate":
        rep = run_validate(cfg, validate)
    elif name in ("relations", "proofcheck"):
        kw = {"budget": budget} if name == "proofcheck" else {}
        rep = RUNNERS[name](cfg, samples, validate=validate, **kw)
    elif name in RUNNERS:
        rep = RUNNERS[name](cfg, budget, validate)
    else:
        raise MalformedSpec(f"unknown suite {name!r}")
    rep.wall_time = time.perf_counter() - t0
    return rep
