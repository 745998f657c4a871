import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oddform.errors import GeneratorOutsideOmegaMax, NotAnIdeal
from oddform.formideal import (
    Ideal,
    OddFormIdeal,
    all_ideals,
    all_odd_form_ideals,
    check_off,
    full_off,
    ideal_closure,
    ideal_power,
    ideal_product,
    ideal_quotient,
    is_ideal,
    make_off,
    off_colon,
    off_from_config,
    off_star,
    off_subset,
    omega_max,
    omega_min,
    tilde_ideal,
    whole_ideal,
    zero_ideal,
    zero_off,
)
from oddform.heisenberg import delta_max, delta_min, hcirc, is_submodule, subgroup_closure
from oddform.ring import PRESETS, preset


def test_ideal_closure_examples(f2, z4, g3):
    assert ideal_closure(z4, [2]).elements == {0, 2}
    assert ideal_closure(z4, []).elements == {0}
    assert ideal_closure(g3, [g3.parse("1+w")]).is_whole()


def test_power_product_quotient(z4, g3):
    two = ideal_closure(z4, [2])
    R = whole_ideal(z4)
    assert ideal_power(two, 2).elements == {0}
    assert ideal_power(two, 0) == R
    assert ideal_product(two, R) == two
    assert ideal_quotient(zero_ideal(z4), two).elements == {0, 2}
    assert ideal_quotient(two, R) == two
    assert ideal_quotient(R, two) == R
    for A in all_ideals(g3):
        assert ideal_power(A, 3).elements <= ideal_power(A, 2).elements


def test_tilde_ideal(f2, z4):
    assert tilde_ideal(delta_max(f2), zero_ideal(f2)) == {0, 1}
    assert tilde_ideal(delta_max(z4), ideal_closure(z4, [2])) == {0, 1, 2, 3}
    for ctx in (f2, z4):
        for A in all_ideals(ctx):
            assert A.elements <= tilde_ideal(delta_max(ctx), A)


def test_omega_bounds(f2, z4):
    D = delta_max(z4)
    assert omega_min(D, zero_ideal(z4)) == {(0, 0)}
    assert omega_min(delta_max(f2), whole_ideal(f2)) == delta_max(f2).elements
    two = ideal_closure(z4, [2])
    assert omega_max(D, two) == {(x, y) for x, y in D.elements if y in (0, 2)}


def test_make_off_examples(f2, z4):
    Df = delta_max(f2)
    assert zero_off(Df).is_zero()
    assert make_off(f2, Df, whole_ideal(f2)) == full_off(Df)
    Dz = delta_max(z4)
    P = make_off(z4, Dz, ideal_closure(z4, [2]), [(2, 2)])
    check_off(P)
    assert all(hcirc(z4, (2, 2), r) in P.omega for r in range(4))
    with pytest.raises(GeneratorOutsideOmegaMax):
        make_off(z4, Dz, ideal_closure(z4, [2]), [(1, 1)])


def test_not_an_ideal(z4):
    D = delta_max(z4)
    with pytest.raises(NotAnIdeal):
        OddFormIdeal(D, Ideal(z4, [0, 1]), omega_min(D, zero_ideal(z4)))


def test_star_and_colon_examples(z4):
    D = delta_max(z4)
    two = ideal_closure(z4, [2])
    R = whole_ideal(z4)
    P = make_off(z4, D, two, [(2, 2)])
    assert off_star(P, R) == P
    assert off_star(P, zero_ideal(z4)).is_zero()
    assert off_colon(P, R) == P
    assert off_colon(zero_off(D), R).is_zero()
    S = off_star(P, two)
    assert S.ideal.elements == {0}
    seeds = list(omega_min(D, zero_ideal(z4))) + [hcirc(z4, w, j) for w in P.omega for j in two]
    assert S.omega.elements == subgroup_closure(z4, seeds, circ=True)


def test_subset_examples(f2):
    D = delta_max(f2)
    P = full_off(D)
    assert off_subset(P, P)
    assert off_subset(zero_off(D), P)


def test_config_round_trip(z4):
    D = delta_max(z4)
    P = off_from_config(D, {"gens": ["2"]}, {"gens": [["2", "2"]]})
    assert P.ideal.elements == {0, 2}
    assert off_from_config(D, None, None) == full_off(D)


@pytest.mark.parametrize("name,kind", [(n, k) for n in sorted(PRESETS) for k in ("min", "max")])
def test_every_enumerated_level_is_an_odd_form_ideal(name, kind):
    ctx = preset(name)
    D = delta_max(ctx) if kind == "max" else delta_min(ctx)
    offs = all_odd_form_ideals(D)
    assert offs
    for P in offs:
        check_off(P)
        assert is_ideal(ctx, P.ideal.elements)
        assert is_submodule(ctx, P.omega.elements)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_star_colon_adjunction(name):
    ctx = preset(name)
    D = delta_max(ctx)
    offs = all_odd_form_ideals(D)
    ideals = all_ideals(ctx)
    for U, L in itertools.product(offs, repeat=2):
        for K in ideals:
            assert off_subset(off_star(U, K), L) == off_subset(U, off_colon(L, K))


@settings(max_examples=40, deadline=None)
@given(name=st.sampled_from(sorted(PRESETS)), data=st.data())
def test_omega_bounds_are_monotone(name, data):
    ctx = preset(name)
    ideals = all_ideals(ctx)
    A = data.draw(st.sampled_from(ideals))
    B = ideal_closure(ctx, A.elements | data.draw(st.sampled_from(ideals)).elements)
    D = delta_max(ctx)
    assert omega_min(D, A) <= omega_min(D, B)
    assert omega_max(D, A) <= omega_max(D, B)
    for J in ideals:
        P = data.draw(st.sampled_from(all_odd_form_ideals(D)))
        assert off_subset(off_star(P, J), P)
