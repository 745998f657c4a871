import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oddform.errors import BadIndices, NotInParameter, PreconditionViolated
from oddform.formideal import full_off
from oddform.heisenberg import delta_max, delta_min
from oddform.ring import PRESETS, preset
from oddform.unitary import (
    basis,
    conjugate_esd_formula_check,
    eps,
    esd_factorization,
    form_B,
    form_Q,
    identity,
    is_unitary_def,
    is_unitary_l36,
    matrix_from_json,
    matrix_to_json,
    minv,
    minv_batch,
    polarity,
    pos,
    random_product,
    t_esd,
    t_extra,
    t_short,
    theta,
    theta_hb,
    unit_matrix,
)

from oracles import esd_cases


def long_root(ctx):
    """e + e^{1,-1}."""
    return (identity(ctx) + unit_matrix(ctx, 1, -1)) % ctx.q if ctx.q == 2 else None


def test_index_map():
    n = 3
    assert theta(n) == [1, 2, 3, 0, -3, -2, -1]
    assert [pos(n, i) for i in theta(n)] == list(range(7))
    assert [eps(i) for i in theta_hb(n)] == [1, 1, 1, -1, -1, -1]
    with pytest.raises(BadIndices):
        pos(n, 4)


def test_form_examples(f2):
    assert form_B(f2, basis(f2, 1), basis(f2, -1)) == 1
    assert form_B(f2, basis(f2, 0), basis(f2, 0)) == f2.mu
    assert form_Q(f2, basis(f2, 0)) == (1, 0)
    assert form_Q(f2, basis(f2, 1) + basis(f2, -1)) == (0, 1)
    p = polarity(f2, basis(f2, 1))
    assert p[-1] == 1 and p[:-1].sum() == 0


def test_minv_examples(f2, z4, rng):
    assert np.array_equal(minv(f2, identity(f2)), identity(f2))
    for x in range(4):
        assert np.array_equal(minv(z4, t_short(z4, 1, 2, x)), t_short(z4, 1, 2, z4.neg(x)))
    D = delta_max(z4)
    s = random_product(z4, D, rng, 5)
    assert np.array_equal(z4.matmul(s, minv(z4, s)), identity(z4))
    S = np.stack([random_product(z4, D, rng, 5) for _ in range(8)])
    Si = minv_batch(z4, S)
    assert (z4.matmul(S, Si) == identity(z4)).all()


def test_membership_examples(f2):
    s = long_root(f2)
    e = identity(f2)
    for pred in (is_unitary_def, is_unitary_l36):
        assert pred(f2, e, delta_max(f2))
        assert not pred(f2, s, delta_min(f2))
        assert pred(f2, s, delta_max(f2))


def test_random_products_are_unitary(z4, rng):
    D = delta_max(z4)
    for length in range(7):
        assert is_unitary_l36(z4, random_product(z4, D, rng, length), D)


def test_t_short_examples(z4, z4_lam3):
    assert np.array_equal(t_short(z4, 1, 2, 0), identity(z4))
    expect = (identity(z4) + unit_matrix(z4, 1, 2) - unit_matrix(z4, -2, -1)) % 4
    assert np.array_equal(t_short(z4, 1, 2, 1), expect)
    c = z4_lam3
    lam_inv = c.lambda_power(-1)
    expect = identity(c) + 3 * unit_matrix(c, 1, -2) - c.mul(lam_inv, 3) * unit_matrix(c, 2, -1)
    assert np.array_equal(t_short(c, 1, -2, 3), expect % 4)
    with pytest.raises(BadIndices):
        t_short(z4, 1, -1, 1)


def test_t_extra_examples(f2):
    assert np.array_equal(t_extra(f2, 1, (0, 0)), identity(f2))
    assert np.array_equal(t_extra(f2, 1, (0, 1), delta_max(f2)), long_root(f2))
    with pytest.raises(NotInParameter):
        t_extra(f2, 1, (0, 1), delta_min(f2))


def test_t_esd_examples(f2):
    e = identity(f2)
    assert np.array_equal(t_esd(f2, 1, np.zeros(7, dtype=np.intp), 0), e)
    u = basis(f2, 2)
    assert np.array_equal(t_esd(f2, 1, u, 0), t_short(f2, 2, 1, 1))
    with pytest.raises(PreconditionViolated):
        t_esd(f2, 1, basis(f2, 1), 0)


@pytest.mark.parametrize("kind", ["max", "min"])
def test_esd_factorization_exhaustive_f2(f2, kind):
    D = delta_max(f2) if kind == "max" else delta_min(f2)
    P = full_off(D)
    cases = list(esd_cases(f2, P))
    assert cases
    for j, u, x in cases:
        assert np.array_equal(t_esd(f2, j, u, x, P, check_factorization=False), esd_factorization(f2, j, u, x))


def test_conjugation_formula(f2, z4, rng):
    assert conjugate_esd_formula_check(f2, identity(f2), 1, basis(f2, 2))
    D = delta_max(f2)
    s = random_product(f2, D, rng, 4)
    assert conjugate_esd_formula_check(f2, s, 1, basis(f2, 2))
    Dz = delta_max(z4)
    P = full_off(Dz)
    cases = [c for c in esd_cases(z4, P) if c[2] == 0]
    for k in rng.integers(0, len(cases), size=60):
        j, u, x = cases[k]
        s = random_product(z4, Dz, rng, 5)
        assert conjugate_esd_formula_check(z4, s, j, u, P)


def test_matrix_json_round_trip(g3, rng):
    s = random_product(g3, delta_max(g3), rng, 5)
    assert np.array_equal(matrix_from_json(g3, matrix_to_json(g3, s)), s)


@settings(max_examples=30, deadline=None)
@given(name=st.sampled_from(sorted(PRESETS)), seed=st.integers(0, 2 ** 32 - 1))
def test_polarity_and_preservation(name, seed):
    ctx = preset(name)
    D = delta_max(ctx)
    rng = np.random.default_rng(seed)
    s = random_product(ctx, D, rng, 4)
    si = minv(ctx, s)
    u, v = (rng.integers(0, ctx.q, size=ctx.dim).astype(np.intp) for _ in range(2))
    su = ctx.matmul(s, u[:, None])[:, 0]
    sv = ctx.matmul(s, v[:, None])[:, 0]
    assert np.array_equal(polarity(ctx, su), ctx.matmul(polarity(ctx, u)[None, :], si)[0])
    assert np.array_equal(polarity(ctx, ctx.add_t[u, v]), ctx.add_t[polarity(ctx, u), polarity(ctx, v)])
    assert form_B(ctx, su, sv) == form_B(ctx, u, v)
    assert form_B(ctx, u, v) == ctx.mul(ctx.bar(form_B(ctx, v, u)), ctx.lam)
