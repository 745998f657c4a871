import itertools

import numpy as np
import pytest

from oddform.errors import InvalidIndices, PreconditionViolated
from oddform.formideal import all_odd_form_ideals, full_off
from oddform.heisenberg import delta_max, delta_min
from oddform.proofcheck import (
    ArrowState,
    arrow_chain,
    arrow_step,
    check_decomposition,
    comm,
    evaluate_word,
    lemredux_decompose,
    lemsub2_params,
    sign_probe_verdict,
    step1_params,
    verify_lemsub2_arrows,
    verify_lemsub3_congruences,
    verify_spreading,
    verify_thm1_step1,
)
from oddform.ring import preset
from oddform.subgroup_engine import closure, full_eu_generators, normal_closure
from oddform.unitary import identity, minv, random_product, t_short


def test_arrow_step_definition(z4, rng):
    D = delta_max(z4)
    a, b, g = (random_product(z4, D, rng, 3) for _ in range(3))
    st = arrow_step(z4, ArrowState(a, b), g)
    ai = minv(z4, a)
    assert np.array_equal(st.a, z4.matmul(z4.matmul(ai, g), z4.matmul(a, minv(z4, g))))
    assert np.array_equal(st.b, comm(z4, g, b))
    e = identity(z4)
    st = arrow_step(z4, ArrowState(e, e), g)
    assert np.array_equal(st.a, e) and np.array_equal(st.b, e)


@pytest.mark.parametrize("length", [0, 1, 2, 3, 4])
def test_lemredux_decomposition(g3, length):
    rng = np.random.default_rng(length)
    D = delta_max(g3)
    st = ArrowState(random_product(g3, D, rng, 3), random_product(g3, D, rng, 3))
    gs = [random_product(g3, D, rng, 2) for _ in range(length)]
    end = arrow_chain(g3, st, gs)
    dec = lemredux_decompose(g3, st, gs)
    res = check_decomposition(g3, dec, st, gs, g3.matmul(end.a, end.b))
    assert res == {"count": True, "reconstruct": True, "words": True}
    assert len(dec.factors) == 2 ** length


def test_evaluate_word(z4, rng):
    D = delta_max(z4)
    a, g = random_product(z4, D, rng, 3), random_product(z4, D, rng, 3)
    w = (("a", -1), ("g1", 1), ("a", 1))
    expect = z4.matmul(z4.matmul(minv(z4, a), g), a)
    assert np.array_equal(evaluate_word(z4, w, {"a": a, "g1": g}), expect)
    assert np.array_equal(evaluate_word(z4, (), {}), identity(z4))


@pytest.mark.parametrize("choice", ["n3_case_i", "n3_case_ii"])
def test_lemsub2_f2_sweep(f2, choice, rng):
    D = delta_max(f2)
    P = full_off(D)
    sigmas = [identity(f2)] + [random_product(f2, D, rng, 6) for _ in range(2)]
    params = list(lemsub2_params(f2, choice, P.ideal.elements))
    for sigma in sigmas:
        for p in params[::7]:
            findings = []
            assert verify_lemsub2_arrows(f2, sigma, choice, p, P, findings), findings[:1]


@pytest.mark.parametrize("choice", ["n3_case_i", "n3_case_ii"])
def test_lemsub2_sampled_z4_g3(choice):
    for name in ("Z4", "G3"):
        ctx = preset(name)
        D = delta_max(ctx)
        rng = np.random.default_rng(11)
        for P in all_odd_form_ideals(D)[-2:]:
            params = list(lemsub2_params(ctx, choice, [0, 1]))
            for k in rng.integers(0, len(params), size=20):
                p = dict(params[k])
                p["a"] = [int(x) for x in rng.choice(sorted(P.ideal.elements), size=len(p["a"]))]
                sigma = random_product(ctx, D, rng, 5)
                assert verify_lemsub2_arrows(ctx, sigma, choice, p, P)


@pytest.mark.parametrize("choice", ["n4_case_i", "n4_case_ii"])
def test_lemsub2_n4(choice):
    ctx = preset("F2", n=4)
    D = delta_max(ctx)
    P = full_off(D)
    rng = np.random.default_rng(4)
    params = list(lemsub2_params(ctx, choice, P.ideal.elements))
    for k in rng.integers(0, len(params), size=40):
        sigma = random_product(ctx, D, rng, 6)
        assert verify_lemsub2_arrows(ctx, sigma, choice, params[k], P)


def test_lemsub2_bad_indices(f2):
    P = full_off(delta_max(f2))
    e = identity(f2)
    bad = {"r": 1, "s": -1, "t": 2, "a": [1, 1, 1, 1], "pm": 1}
    with pytest.raises(InvalidIndices):
        verify_lemsub2_arrows(f2, e, "n3_case_i", bad, P)
    with pytest.raises(InvalidIndices):
        verify_lemsub2_arrows(f2, e, "n4_case_i", {"r": 1, "s": 2, "t": 3, "a": [1] * 4, "u": 1}, P)
    with pytest.raises(InvalidIndices):
        verify_lemsub2_arrows(f2, e, "n3_case_i", {"r": 1, "s": 2, "t": 7, "a": [1] * 4, "pm": 1}, P)


def test_lemsub3_and_sign_probe():
    for name in ("F2", "Z4", "G3"):
        ctx = preset(name)
        D = delta_max(ctx)
        rng = np.random.default_rng(8)
        probe = {}
        hb = [1, 2, 3, -3, -2, -1]
        triples = [(r, s, t) for r, s, t in itertools.product(hb, repeat=3)
                   if r not in (s, -s) and t not in (r, -r, s, -s)]
        for k in range(60):
            r, s, t = triples[k % len(triples)]
            sigma = random_product(ctx, D, rng, 5)
            a0 = int(rng.integers(ctx.q))
            findings = []
            assert verify_lemsub3_congruences(ctx, sigma, r, s, t, a0, findings, probe), findings[:1]
        assert probe["minus_holds"] == probe["cases"] == 60
        verdict = sign_probe_verdict(probe)
        if name == "F2":
            assert probe["readings_differ"] == 0
            assert verdict.startswith("both")
        else:
            assert probe["readings_differ"] > 0
            assert verdict == "minus reading holds, plus reading fails"
            assert "first_plus_failure" in probe
    assert sign_probe_verdict({}) == "untested"


def test_lemsub3_bad_indices(f2):
    with pytest.raises(InvalidIndices):
        verify_lemsub3_congruences(f2, identity(f2), 1, 1, 2, 1)


def test_step1_f2_exhaustive_params(f2, rng):
    for D in (delta_max(f2), delta_min(f2)):
        P = full_off(D)
        for sigma in [identity(f2), random_product(f2, D, rng, 6)]:
            for r, s, t, b, c in step1_params(f2, P.ideal.elements):
                findings = []
                assert verify_thm1_step1(f2, sigma, r, s, t, b, c, P, findings), findings[:1]


def test_step1_sampled_and_display_probe():
    ctx = preset("G3")
    D = delta_max(ctx)
    rng = np.random.default_rng(9)
    Ps = all_odd_form_ideals(D)
    probe = {}
    for _ in range(40):
        P = Ps[int(rng.integers(len(Ps)))]
        params = list(step1_params(ctx, P.ideal.elements))
        r, s, t, b, c = params[int(rng.integers(len(params)))]
        sigma = random_product(ctx, D, rng, 5)
        assert verify_thm1_step1(ctx, sigma, r, s, t, b, c, P, probe=probe)
    assert probe["cases"] == 40
    assert probe["literal_holds"] <= probe["cases"]


def test_step1_bad_indices(f2):
    P = full_off(delta_max(f2))
    with pytest.raises(InvalidIndices):
        verify_thm1_step1(f2, identity(f2), -1, 2, 3, 1, 1, P)
    with pytest.raises(InvalidIndices):
        verify_thm1_step1(f2, identity(f2), 1, 2, 2, 1, 1, P)


def test_spreading(f2):
    D = delta_max(f2)
    P = full_off(D)
    amb = full_eu_generators(f2, D)
    H = normal_closure(f2, [t_short(f2, 1, 2, 1)], amb)
    hb = [1, 2, 3, -3, -2, -1]
    for r in hb:
        for s in hb:
            if r not in (s, -s):
                assert verify_spreading(H, 1, r, s, 0, P)
    trivial = closure(f2, [])
    assert verify_spreading(trivial, 1, 1, 2, 0, P)
    with pytest.raises(InvalidIndices):
        verify_spreading(H, 1, 1, -1, 0, P)
    not_normal = closure(f2, [t_short(f2, 1, 2, 1)])
    with pytest.raises(PreconditionViolated):
        verify_spreading(not_normal, 1, 1, 2, 0, P)
