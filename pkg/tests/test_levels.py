import numpy as np
import pytest

from oddform.errors import BadArguments
from oddform.formideal import all_odd_form_ideals, full_off, off_subset, whole_ideal, zero_off
from oddform.heisenberg import delta_max
from oddform.levels import (
    all_in_cu,
    conjugation_invariance_check,
    k_exponent,
    lower_level,
    minimality_check,
    sandwich_check,
    upper_level,
)
from oddform.subgroup_engine import closure, eu_generators, full_eu_generators, normal_closure
from oddform.unitary import identity, random_product, t_short


def test_k_exponent_values():
    assert k_exponent(3, 1, "chain") == 0
    assert k_exponent(3, 2, "chain") == 12
    assert k_exponent(3, 3, "chain") == 156
    assert k_exponent(4, 2, "chain") == 10
    assert k_exponent(5, 3, "chain") == 110
    assert k_exponent(3, 5, "single") == 12
    assert k_exponent(4, 1, "single") == 10
    for d in range(1, 6):
        assert 12 * (k_exponent(3, d) + 1) == k_exponent(3, d + 1)
    with pytest.raises(BadArguments):
        k_exponent(2, 1)
    with pytest.raises(BadArguments):
        k_exponent(3, 0)
    with pytest.raises(BadArguments):
        k_exponent(3, 1, "other")


def test_upper_level_examples(f2, z4):
    for ctx in (f2, z4):
        D = delta_max(ctx)
        assert upper_level([identity(ctx)], D) == zero_off(D)
        assert upper_level(full_eu_generators(ctx, D), D) == full_off(D)


def test_upper_level_below_generating_level(z4):
    """One element of EU(P) has upper level inside P."""
    D = delta_max(z4)
    for P in all_odd_form_ideals(D):
        gens = eu_generators(P)
        if not gens:
            continue
        h = gens[0]
        for g in gens[1:4]:
            h = z4.matmul(h, g)
        assert off_subset(upper_level([h], D), P)
        assert all_in_cu([h], upper_level([h], D))


def test_lower_level_examples(f2, f2_full_eu):
    D = delta_max(f2)
    amb = full_eu_generators(f2, D)
    assert lower_level(closure(f2, []), amb, D) == zero_off(D)
    assert lower_level(f2_full_eu, amb, D) == full_off(D)


@pytest.fixture(scope="module")
def f2_normal_t12(f2):
    amb = full_eu_generators(f2, delta_max(f2))
    return normal_closure(f2, [t_short(f2, 1, 2, 1)], amb), amb


def test_lower_contains_generating_level(f2, f2_normal_t12):
    D = delta_max(f2)
    H, amb = f2_normal_t12
    for P in all_odd_form_ideals(D):
        gens = eu_generators(P)
        if gens and all(g in H for g in gens):
            assert off_subset(P, lower_level(H, amb, D))


def test_sandwich_full_group(f2, f2_full_eu):
    D = delta_max(f2)
    rep = sandwich_check(f2_full_eu, D, 0, full_eu_generators(f2, D), I=whole_ideal(f2))
    assert rep.sandwich_ok, rep.checks
    assert rep.upper == rep.lower == full_off(D)
    assert set(rep.checks) == {"eu_in_H", "H_in_CU", "lower_in_upper", "reformulations_agree"}


def test_sandwich_trivial_group(f2):
    D = delta_max(f2)
    rep = sandwich_check(closure(f2, []), D, 12, full_eu_generators(f2, D))
    assert rep.sandwich_ok
    assert rep.upper == zero_off(D)


def test_sandwich_normal_closure(f2, f2_normal_t12):
    D = delta_max(f2)
    H, amb = f2_normal_t12
    rep = sandwich_check(H, D, 12, amb)
    assert rep.sandwich_ok, rep.checks
    js = rep.to_json()
    assert js["mode"] == "exact" and js["lower"] is not None


def test_conjugation_invariance_and_minimality(f2, f2_normal_t12):
    D = delta_max(f2)
    H, amb = f2_normal_t12
    rng = np.random.default_rng(5)
    taus = [random_product(f2, D, rng, 3) for _ in range(3)]
    assert conjugation_invariance_check(H, taus, D)
    assert minimality_check(H, D)


def test_non_normal_subgroup_levels(f2):
    """A subgroup that is not normal still sits below its upper level's congruence group."""
    D = delta_max(f2)
    H = closure(f2, [t_short(f2, 1, 2, 1), t_short(f2, 2, 3, 1)])
    U = upper_level(H, D)
    assert all_in_cu(H, U)
    assert minimality_check(H, D)
