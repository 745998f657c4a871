import numpy as np
import pytest

from oddform.heisenberg import delta_max, delta_min
from oddform.relations import RELATIONS, check_relation, run_form_identities, run_relations
from oddform.ring import preset
from oddform.unitary import random_product

from conftest import corrupted_ctx


@pytest.mark.parametrize("kind", ["max", "min"])
def test_all_relations_exhaustive_f2(f2, kind):
    D = delta_max(f2) if kind == "max" else delta_min(f2)
    rep = run_relations(f2, D)
    assert rep.total_failures == 0
    assert set(rep.counts) == set(RELATIONS)
    assert all(v > 0 for v in rep.counts.values())


def test_relations_z4_and_lambda3(z4, z4_lam3):
    for ctx in (z4, z4_lam3):
        rep = run_relations(ctx, delta_max(ctx))
        assert rep.total_failures == 0, rep.failures[:3]


def test_relations_sampled_g3(g3):
    rep = run_relations(g3, delta_max(g3), samples=200, rng=np.random.default_rng(1))
    assert rep.total_failures == 0
    assert all(v == 200 for v in rep.counts.values())


def test_relations_n4_sampled():
    ctx = preset("F2", n=4)
    rep = run_relations(ctx, delta_max(ctx), samples=300, rng=np.random.default_rng(2))
    assert rep.total_failures == 0


def test_bad_relation_name(f2):
    with pytest.raises(KeyError):
        check_relation(f2, delta_max(f2), "S9")


@pytest.mark.parametrize("name", ["F2", "Z4", "G3"])
def test_form_identities_hold(name, rng):
    ctx = preset(name)
    D = delta_max(ctx)
    us = [random_product(ctx, D, rng, 4) for _ in range(3)]
    rep = run_form_identities(ctx, D, samples=256, rng=rng, unitary_samples=us)
    assert rep.total_failures == 0
    assert rep.counts["polarity"] > 0


def test_corrupted_mu_is_detected():
    ctx = corrupted_ctx()
    rep = run_form_identities(ctx, delta_max(ctx), samples=256, rng=np.random.default_rng(0))
    kinds = {f["relation"] for f in rep.failures}
    assert "B_hermitian" in kinds
