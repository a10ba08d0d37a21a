import json

import numpy as np
import pytest

import proflim as pl


def test_index_round_trip():
    assert pl.decode_index(pl.encode_index(frozenset({0.5, 0.25}))) == frozenset({0.25, 0.5})
    assert pl.encode_index(3) == 3
    assert pl.encode_index("L") == "L"
    with pytest.raises(pl.DescriptorError):
        pl.encode_index((1, 2))
    with pytest.raises(pl.DescriptorError):
        pl.decode_index({"set": [1], "junk": 2})


def test_poset_round_trips(euclid, cross, wiener):
    for poset in (euclid.family.poset, cross.family.poset, wiener.family.poset):
        doc = pl.poset_to_descriptor(poset)
        back = pl.poset_from_descriptor(json.loads(json.dumps(doc)))
        els = list(poset.elements)
        assert sorted(map(poset.key, back.elements)) == sorted(map(poset.key, els))
        for a in els:
            for b in els:
                assert back.leq(a, b) == poset.leq(a, b)


def test_poset_descriptor_kinds(euclid, cross, wiener):
    assert pl.poset_to_descriptor(euclid.family.poset)["kind"] == "chain"
    assert pl.poset_to_descriptor(cross.family.poset)["kind"] == "finite"
    assert pl.poset_to_descriptor(wiener.family.poset)["kind"] == "subsets"
    with pytest.raises(pl.DescriptorError):
        pl.poset_from_descriptor({"kind": "mystery"})
    with pytest.raises(pl.DescriptorError):
        pl.poset_to_descriptor(pl.subset_poset())  # oracle poset, no elements


def test_family_round_trip_verifies(tmp_path, euclid, rng):
    path = tmp_path / "euclid.json"
    pl.dump_family(euclid.family, path)
    fam = pl.load_family(path)
    assert fam.dim(7) == 7
    report = pl.verify_family(fam, points_per_chain=4, rng=rng)
    assert report.passed
    x = rng.standard_normal(3)
    assert np.allclose(fam.inj(9, 3)(x), euclid.family.inj(9, 3)(x))


def test_family_round_trip_cross(tmp_path, cross, rng):
    path = tmp_path / "cross.json"
    pl.dump_family(cross.family, path)
    fam = pl.load_family(path)
    assert pl.verify_family(fam, points_per_chain=4, rng=rng).passed
    assert np.array_equal(fam.proj("J", "L")(np.array([1.0, 2.0])), [1.0])
    assert np.array_equal(fam.proj("K", "L")(np.array([1.0, 2.0])), [2.0])


def test_descriptor_is_sorted_and_versioned(tmp_path, euclid):
    path = tmp_path / "euclid.json"
    pl.dump_family(euclid.family, path)
    text = path.read_text()
    doc = json.loads(text)
    assert doc["schema_version"] == pl.SCHEMA_VERSION
    assert text == json.dumps(doc, sort_keys=True, indent=2) + "\n"
    assert [lv["dim"] for lv in doc["levels"]] == list(range(11))


def test_truncation_map_kind():
    doc = {
        "schema_version": 1,
        "name": "trunc",
        "poset": {"kind": "chain", "elements": [1, 2]},
        "levels": [{"index": 1, "dim": 1}, {"index": 2, "dim": 3}],
        "projections": [{"from": 2, "to": 1, "kind": "truncation",
                         "payload": {"indices": [2]}}],
        "injections": [{"from": 1, "to": 2, "kind": "truncation",
                        "payload": {"indices": [2]}}],
    }
    fam = pl.family_from_descriptor(doc)
    assert np.array_equal(fam.proj(1, 2)(np.array([5.0, 6.0, 7.0])), [7.0])
    assert np.array_equal(fam.inj(2, 1)(np.array([4.0])), [0.0, 0.0, 4.0])
    assert pl.verify_family(fam, points_per_chain=3).passed


def test_pl_interpolation_map_kind():
    doc = {
        "schema_version": 1,
        "name": "pl",
        "poset": {"kind": "subsets", "pool": [0.5, 1.0]},
        "levels": [{"index": {"set": []}, "dim": 0},
                   {"index": {"set": [0.5]}, "dim": 1},
                   {"index": {"set": [1.0]}, "dim": 1},
                   {"index": {"set": [0.5, 1.0]}, "dim": 2}],
        "projections": [{"from": {"set": [0.5, 1.0]}, "to": {"set": [0.5]},
                         "kind": "truncation", "payload": {"indices": [0]}}],
        "injections": [{"from": {"set": [0.5]}, "to": {"set": [0.5, 1.0]},
                        "kind": "pl-interpolation",
                        "payload": {"targets": [0.5, 1.0], "knots": [0.5]}}],
    }
    fam = pl.family_from_descriptor(doc)
    lifted = fam.inj(frozenset({0.5, 1.0}), frozenset({0.5}))(np.array([2.0]))
    assert np.array_equal(lifted, [2.0, 2.0])  # constant past the last knot


def test_named_gallery_descriptor_round_trip(tmp_path, rng):
    doc = pl.gallery_reference_descriptor("symplectic", {"max_pairs": 2})
    path = tmp_path / "symp.json"
    path.write_text(json.dumps(doc))
    fam = pl.load_family(path)
    assert fam.dim(2) == 4
    assert pl.verify_family(fam, points_per_chain=3, rng=rng).passed


def test_family_descriptor_errors(euclid):
    with pytest.raises(pl.DescriptorError):
        pl.family_from_descriptor({"schema_version": 99, "poset": {}, "levels": []})
    with pytest.raises(pl.DescriptorError):
        pl.family_from_descriptor({
            "poset": {"kind": "chain", "elements": [1, 2]},
            "levels": [{"index": 1, "dim": 1}, {"index": 2, "dim": 2}],
            "projections": [{"from": 2, "to": 1, "kind": "warp", "payload": {}}],
            "injections": []})
    # missing dimension declaration surfaces on use
    fam = pl.family_from_descriptor({
        "poset": {"kind": "chain", "elements": [1, 2]},
        "levels": [{"index": 1, "dim": 1}],
        "projections": [], "injections": []})
    with pytest.raises(pl.DescriptorError):
        fam.dim(2)


def test_thread_descriptors(euclid, rng):
    t = pl.thread_from_descriptor(euclid, {"kind": "named", "name": "three_four"})
    assert np.array_equal(t(2), [3.0, 4.0])

    s = pl.thread_from_descriptor(euclid, {"kind": "sequence",
                                           "values": [1.0, 2.0, 3.0]})
    assert np.array_equal(s(3), [1.0, 2.0, 3.0])
    with pytest.raises(pl.DescriptorError):
        s(4)

    sp = pl.thread_from_descriptor(euclid, {
        "kind": "section-point", "section": [2],
        "values": [[2, [7.0, 8.0]]]})
    assert np.array_equal(sp(2), [7.0, 8.0])
    assert np.array_equal(sp(4), [7.0, 8.0, 0.0, 0.0])

    with pytest.raises(pl.DescriptorError):
        pl.thread_from_descriptor(euclid, {"kind": "named", "name": "metrics"})
    with pytest.raises(pl.DescriptorError):
        pl.thread_from_descriptor(euclid, {"kind": "interpretive-dance"})
    with pytest.raises(pl.DescriptorError):
        pl.thread_from_descriptor(euclid.family, {"kind": "named", "name": "origin"})


def test_form_descriptors(euclid, symplectic, rng):
    omega = pl.form_from_descriptor(symplectic, {"kind": "named-gallery"})
    assert omega is symplectic["omega"]
    built = pl.form_from_descriptor(None, {"kind": "named-gallery",
                                           "family": "odd-symplectic",
                                           "kwargs": {"max_dim": 3},
                                           "extra": "omega"})
    assert built.degree == 2

    doc = {"kind": "expressions", "degree": 1,
           "levels": [{"index": 2, "comps": ["x1*x1", "sin(x0)"]}]}
    form = pl.form_from_descriptor(euclid.family, doc)
    x = np.array([0.3, 2.0])
    assert np.allclose(form.comps(2, x), [4.0, np.sin(0.3)])
    with pytest.raises(pl.ExpressionError):
        form.comps(3, np.zeros(3))  # no components declared there

    with pytest.raises(pl.DescriptorError):
        pl.form_from_descriptor(euclid.family, {"kind": "expressions", "degree": 1,
                                                "levels": [{"index": 2,
                                                            "comps": ["x0"]}]})
    with pytest.raises(pl.DescriptorError):
        pl.form_from_descriptor(symplectic, {"kind": "named-gallery",
                                             "extra": "hamiltonian"})
    with pytest.raises(pl.DescriptorError):
        pl.form_from_descriptor(euclid.family, {"kind": "what"})


def test_measure_csv(tmp_path):
    path = tmp_path / "weights.csv"
    path.write_text("index,weight\n# comment line\n1,0.5\n2,0.25\ntail,0.125\n")
    mu = pl.load_measure_csv(path)
    assert mu.weights == {1: 0.5, 2: 0.25}
    assert mu.tail_mass == 0.125
    assert mu.total_mass == 0.875

    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,3\n")
    with pytest.raises(pl.DescriptorError):
        pl.load_measure_csv(bad)

    stringy = tmp_path / "set.csv"
    stringy.write_text("J,1.0\n")
    mu2 = pl.load_measure_csv(stringy)
    assert mu2.weights == {"J": 1.0}
