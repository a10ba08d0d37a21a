import numpy as np
import pytest

import proflim as pl


def test_gallery_axioms_all_exact(euclid, poly, matrix, cross, wiener,
                                  symplectic, rng):
    for g in (euclid, poly, matrix, cross, wiener, symplectic):
        rep = pl.verify_family(g.family, points_per_chain=30, rng=rng)
        assert rep.passed, rep.summary()
        assert rep.worst().max_residual <= 1e-9


def test_proj_inj_guards(euclid):
    fam = euclid.family
    with pytest.raises(pl.FamilyMismatch):
        fam.proj(3, 1)  # wrong direction
    with pytest.raises(pl.DimensionMismatch):
        fam.proj(1, 3)(np.zeros(5))
    assert fam.proj(2, 2).matrix.shape == (2, 2)


def test_proj_composition_through_stored_pairs(cross):
    fam = cross.family
    # ("I", "L") is not stored directly; it must compose through J or K
    mp = fam.proj("I", "L")
    assert mp.domain_dim == 2 and mp.codomain_dim == 0
    ij = fam.inj("L", "I")
    assert ij(np.zeros(0)).shape == (2,)


def test_retraction_on_every_comparable_pair(matrix, rng):
    fam = matrix.family
    for J in range(1, 9):
        for K in range(J, 9):
            x = rng.standard_normal(fam.dim(J))
            back = fam.proj(J, K)(fam.inj(K, J)(x))
            assert np.array_equal(back, x)


def test_profinite_map_swap_and_diffeomorphism(cross, rng):
    fam = cross.family
    swap = cross["swap"]
    pairs = [("I", "J"), ("I", "K"), ("J", "L"), ("K", "L"), ("I", "L")]
    rep = pl.check_profinite_map(swap, pairs, rng=rng)
    assert rep.passed, rep.summary()
    assert pl.is_profinite_diffeomorphism(swap, swap, fam.poset.elements, rng=rng)
    ident = pl.compose_profinite_maps(swap, swap)
    x = rng.standard_normal(2)
    assert np.allclose(ident.level_map("L")(x), x)


def test_profinite_map_order_violation_detected(euclid, poly, rng):
    bad = pl.ProfiniteMap(
        source=euclid.family, target=euclid.family,
        index_map=lambda n: 10 - n,  # reverses the order
        level_map=lambda n: pl.identity_map(euclid.family.dim(n)))
    rep = pl.check_profinite_map(bad, [(1, 2)], rng=rng)
    assert not rep.passed


def test_compose_mismatched_families_raises(euclid, poly):
    f = pl.ProfiniteMap(euclid.family, euclid.family, lambda n: n,
                        lambda n: pl.identity_map(n))
    g = pl.ProfiniteMap(poly.family, poly.family, lambda n: n,
                        lambda n: pl.identity_map(n + 1))
    with pytest.raises(pl.FamilyMismatch):
        pl.compose_profinite_maps(f, g)


def test_tangent_family_doubles_dims_and_verifies(euclid, rng):
    tf = pl.tangent_family(euclid.family)
    assert tf.dim(3) == 6
    rep = pl.verify_family(tf, points_per_chain=20, rng=rng)
    assert rep.passed, rep.summary()
    # tangent projection acts blockwise: (x, v) -> (proj x, Dproj v)
    pt = rng.standard_normal(6)
    out = tf.proj(2, 3)(pt)
    base = euclid.family.proj(2, 3)
    assert np.allclose(out[:2], base(pt[:3]))
    assert np.allclose(out[2:], base.matrix @ pt[3:])


def test_cotangent_push_up_oracle(euclid):
    # covector (2, -1) at level 2 pushes up along dproj^T to (2, -1, 0)
    push_up, push_down = pl.cotangent_maps(euclid.family, 2, 3, np.zeros(3))
    assert np.array_equal(push_up(np.array([2.0, -1.0])), np.array([2.0, -1.0, 0.0]))
    # and the reverse transpose drops the padding coordinate
    assert np.array_equal(push_down(np.array([2.0, -1.0, 7.0])), np.array([2.0, -1.0]))


def test_fibration_tangent_bundle(euclid, rng):
    tf = pl.tangent_family(euclid.family)
    data = pl.FibrationData(
        total=tf, base=euclid.family,
        bundle_proj=lambda J: pl.selection_map(2 * euclid.family.dim(J),
                                               range(euclid.family.dim(J))),
        name="tangent bundle")
    rep = pl.verify_fibration(data, [(1, 2), (2, 4), (0, 3)], rng=rng)
    assert rep.passed, rep.summary()


def test_sample_chains_increasing(euclid, rng):
    for chain in pl.sample_chains(euclid.family.poset, rng, count=10, length=3):
        for a, b in zip(chain, chain[1:]):
            assert euclid.family.poset.leq(a, b)
