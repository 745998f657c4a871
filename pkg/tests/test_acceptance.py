"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed as they happen (visible with ``-s``) and again in the
terminal summary.
"""

import json
import os
import resource
import subprocess
import sys
import time

import numpy as np

from oddform.config import ScenarioConfig, case_rng, preset_config
from oddform.errors import NotInParameter
from oddform.formideal import full_off
from oddform.heisenberg import delta_max, delta_min
from oddform.levels import k_exponent
from oddform.orders import sp_order
from oddform.ring import preset
from oddform.suites import run_levels, run_proofcheck, run_relations_suite, run_sandwich, run_suite
from oddform.unitary import (
    conjugate_esd_formula_check,
    esd_factorization,
    identity,
    is_unitary_def,
    is_unitary_l36,
    matrix_to_json,
    q_test_vectors,
    random_product,
    t_esd,
    t_extra,
)

from oracles import esd_cases

RESULTS = []


def record(num, title, ok, detail=""):
    line = f"criterion {num} [{'PASS' if ok else 'FAIL'}] {title}" + (f": {detail}" if detail else "")
    RESULTS.append(line)
    print(line)
    return ok


# -- 1 ------------------------------------------------------------------------------------

def test_criterion_1_relations():
    t0 = time.perf_counter()
    parts = []
    fails = 0
    for name, kw in (("F2", {}), ("F2", {"n": 4}), ("Z4", {}), ("G3", {})):
        rep = run_relations_suite(preset_config(name, **kw), samples=None)
        res = rep.result
        assert res["mode"] == "exhaustive"
        fails += rep.counts["fail"]
        parts.append(f"{name} n={kw.get('n', 3)}: {rep.counts['pass']} pass")
    elapsed = time.perf_counter() - t0
    ok = fails == 0 and elapsed < 60
    record(1, "relation suite exhaustive", ok, f"{'; '.join(parts)}; {fails} failures; {elapsed:.1f}s")
    assert ok


# -- 2 ------------------------------------------------------------------------------------

def _membership_agreement(ctx, count, seed):
    Ds = (delta_max(ctx), delta_min(ctx))
    V, exhaustive = q_test_vectors(ctx, 4096, case_rng(seed, "acceptance.vectors"))
    disagree = members = 0
    for k in range(count):
        rng = case_rng(seed, "acceptance.membership", k)
        s = random_product(ctx, Ds[0], rng, int(rng.integers(0, 9)))
        for D in Ds:
            a = is_unitary_def(ctx, s, D, vectors=V)
            b = is_unitary_l36(ctx, s, D)
            disagree += a != b
            members += a
    return disagree, members, 2 * count, exhaustive


def test_criterion_2_membership_equivalence():
    f2 = _membership_agreement(preset("F2"), 10_000, 0)
    z4 = _membership_agreement(preset("Z4"), 1_000, 0)
    ok = f2[0] == 0 and z4[0] == 0 and f2[3]
    detail = (f"F2 {f2[2]} checks ({f2[1]} members), {f2[0]} disagreements; "
              f"Z4 {z4[2]} checks ({z4[1]} members), {z4[0]} disagreements")
    record(2, "membership criteria agree", ok, detail)
    assert ok


# -- 3 ------------------------------------------------------------------------------------

def test_criterion_3_esd():
    ctx = preset("F2")
    fails, cases, conj = 0, 0, 0
    for D in (delta_max(ctx), delta_min(ctx)):
        P = full_off(D)
        conj_set = [identity(ctx)] + [random_product(ctx, D, case_rng(0, "acceptance.esd", k), 6)
                                      for k in range(8)]
        for j, u, x in esd_cases(ctx, P):
            cases += 1
            if not np.array_equal(t_esd(ctx, j, u, x, P, check_factorization=False),
                                  esd_factorization(ctx, j, u, x)):
                fails += 1
            if x == ctx.zero:
                for s in conj_set:
                    conj += 1
                    fails += not conjugate_esd_formula_check(ctx, s, j, u, P)
    ok = fails == 0 and cases > 0
    record(3, "ESD factorization and conjugation formula", ok,
           f"{cases} valid (j,u,x) over both parameters, {conj} conjugation checks, {fails} failures")
    assert ok


# -- 4 ------------------------------------------------------------------------------------

def test_criterion_4_closure(tmp_path):
    cfg = tmp_path / "f2.json"
    cfg.write_text(preset_config("F2").dumps())
    outs, times = [], []
    for threads in ("1", "4", "8"):
        for _ in range(3):
            env = dict(os.environ, ODDFORM_THREADS=threads)
            t0 = time.perf_counter()
            res = subprocess.run([sys.executable, "-m", "oddform.cli", "closure", "--config", str(cfg)],
                                 capture_output=True, env=env, check=False)
            times.append(time.perf_counter() - t0)
            assert res.returncode == 0, res.stderr
            outs.append(res.stdout)
    peak_mb = resource.getrusage(resource.RUSAGE_CHILDREN).ru_maxrss / 1024
    rep = json.loads(outs[0])
    order = rep["result"]["order"]
    identical = all(o == outs[0] for o in outs)
    ok = identical and order == sp_order(3, 2) and max(times) < 300 and peak_mb < 2048
    record(4, "closure order deterministic and matches the classical formula", ok,
           f"order {order} (expected {sp_order(3, 2)}), {len(outs)} runs at threads 1/4/8 "
           f"byte-identical={identical}, slowest {max(times):.1f}s, peak {peak_mb:.0f} MB")
    assert ok


# -- 5 and 6 -------------------------------------------------------------------------------

SUBGROUPS = {
    "trivial": {"seed": "trivial"},
    "full EU": {"seed": "eu-full"},
    **{f"normal closure #{k}": {"seed": {"random_transvections": 1}, "mode": "normal",
                                "ambient": "eu-full"} for k in range(3)},
}


def _cfg(name, k):
    sub = SUBGROUPS[name]
    seed = 100 + list(SUBGROUPS).index(name)
    return preset_config("F2", subgroup=sub, seed=seed, suite={"taus": 10, "k": k})


def test_criterion_5_level_laws():
    lines, ok = [], True
    for name in SUBGROUPS:
        rep = run_levels(_cfg(name, 12))
        res = rep.result
        good = rep.counts["fail"] == 0 and res["mode"] == "exact" and len(res["checks"]) == 7
        ok &= good
        lines.append(f"{name} (order {res['order']}): {sum(res['checks'].values())}/{len(res['checks'])}")
    record(5, "level laws over F2", ok, "; ".join(lines))
    assert ok


def test_criterion_6_sandwich():
    t0 = time.perf_counter()
    lines, ok = [], True
    for name in SUBGROUPS:
        rep = run_sandwich(_cfg(name, 12))
        res = rep.result
        d = res["details"]
        good = (rep.counts["fail"] == 0 and res["mode"] == "exact"
                and set(res["checks"]) == {"eu_in_H", "H_in_CU", "lower_in_upper", "reformulations_agree"})
        ok &= good
        lines.append(f"{name}: checks {sum(res['checks'].values())}/4, "
                     f"elementary inside / star in lower / upper in colon = "
                     f"{d['elementary_inside']}/{d['star_in_lower']}/{d['upper_in_colon']}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 600
    record(6, "sandwich instances with k=12", ok, "; ".join(lines) + f"; {elapsed:.0f}s")
    assert ok


# -- 7 ------------------------------------------------------------------------------------

def test_criterion_7_exponents():
    got = {
        "single n=3": k_exponent(3, 1, "single"),
        "single n=4": k_exponent(4, 1, "single"),
        "chain n=3": [k_exponent(3, d) for d in (1, 2, 3)],
        "chain n=4": [k_exponent(4, d) for d in (1, 2, 3)],
        "chain n=5": [k_exponent(5, d) for d in (1, 2, 3)],
    }
    want = {
        "single n=3": 12, "single n=4": 10,
        "chain n=3": [0, 12, (12 ** 3 - 1) // 11 - 1],
        "chain n=4": [0, 10, (10 ** 3 - 1) // 9 - 1],
        "chain n=5": [0, 10, 110],
    }
    ok = got == want and want["chain n=3"][2] == 156
    record(7, "exponent rules", ok, json.dumps(got))
    assert ok


# -- 8 ------------------------------------------------------------------------------------

def test_criterion_8_proofcheck():
    runs = [
        ("F2 exhaustive", preset_config("F2"), None),
        ("F2 n=4 sampled", preset_config("F2", n=4), 300),
        ("Z4 sampled", preset_config("Z4", seed=1), 1000),
        ("G3 sampled", preset_config("G3", seed=1), 1000),
    ]
    ok, lines, probes = True, [], {}
    for label, cfg, samples in runs:
        rep = run_proofcheck(cfg, samples=samples)
        again = run_proofcheck(cfg, samples=samples) if samples else None
        lem = rep.result["lemmas"]
        good = rep.counts["fail"] == 0
        if label.startswith("F2 n=3") or label == "F2 exhaustive":
            good &= all(lem[k]["cases"] > 0 for k in lem)
        else:
            good &= all(lem[k]["cases"] >= samples for k in lem if k != "spreading")
        if again is not None:
            good &= again.dumps() == rep.dumps()
        ok &= good
        lines.append(f"{label}: {rep.counts['pass']} pass, {rep.counts['fail']} fail")
        probes[label] = rep.result["probes"].get("sign", {}).get("verdict")
    # the sign probe: the minus reading must hold everywhere
    ok &= all(v is None or v.startswith(("both", "minus reading holds")) for v in probes.values())
    record(8, "proof identities", ok, "; ".join(lines) + f"; sign probe: {probes}")
    assert ok


# -- 9 ------------------------------------------------------------------------------------

def test_criterion_9_negative_controls():
    corrupted = ScenarioConfig.from_dict({"ring": {"kind": "modular", "m": 4}, "involution": "identity",
                                         "lambda": "3", "mu": "1", "n": 3})
    v = run_suite("validate", corrupted)
    r = run_suite("relations", corrupted, samples=200, validate=False)
    corrupted_ok = v.counts["fail"] > 0 and r.counts["fail"] > 0

    f2 = preset("F2")
    long_root = t_extra(f2, 1, (0, 1), delta_max(f2))
    try:
        t_extra(f2, 1, (0, 1), delta_min(f2))
        raised = False
    except NotInParameter:
        raised = True
    predicates = not is_unitary_def(f2, long_root, delta_min(f2)) and not is_unitary_l36(f2, long_root, delta_min(f2))
    misuse = preset_config("F2", delta={"kind": "min"}, subgroup={"seed": [matrix_to_json(f2, long_root)]})
    mv = run_suite("validate", misuse)
    mc = run_suite("closure", misuse)
    misuse_ok = raised and predicates and mv.counts["fail"] > 0 and mc.counts["fail"] > 0
    ok = corrupted_ok and misuse_ok
    record(9, "negative controls produce findings", ok,
           f"corrupted mu: validate {v.counts['fail']} and relations {r.counts['fail']} findings; "
           f"Delta_min misuse: constructor raised={raised}, predicates reject={predicates}, "
           f"validate {mv.counts['fail']} and closure {mc.counts['fail']} findings")
    assert ok
