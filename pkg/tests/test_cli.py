import json
import os
import subprocess
import sys

import numpy as np
import pytest

import proflim.cli as cli
from conftest import FIXTURE_DIR


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_verify_gallery_exit_zero(capsys):
    code, out, err = run(capsys, "verify", "--family", "euclid_tower",
                         "--max-level", "6", "--samples", "5")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] is True
    assert doc["schema_version"] == 1
    assert err == ""


def test_verify_cross_and_symplectic(capsys):
    assert run(capsys, "verify", "--family", "cross_family", "--samples", "5")[0] == 0
    code, out, _ = run(capsys, "verify", "--family", "symplectic_even_tower",
                       "--max-level", "3", "--samples", "10")
    assert code == 0
    titles = [r["title"] for r in json.loads(out)["reports"]]
    assert any("tame form" in t for t in titles)  # omega audited alongside axioms


def test_verify_unknown_family_exit_two(capsys):
    code, out, err = run(capsys, "verify", "--family", "klein_bottle")
    assert code == 2
    assert "euclid" in err  # usage error lists the gallery


def test_verify_missing_descriptor_exit_two(capsys):
    code, _, err = run(capsys, "verify", "--family", "not/there.json")
    assert code == 2
    assert "no such descriptor" in err


def test_corrupted_descriptor_fails_naming_retraction(capsys):
    fixture = os.path.join(FIXTURE_DIR, "corrupted_family.json")
    code, out, err = run(capsys, "verify", "--family", fixture, "--samples", "10")
    assert code == 1
    assert json.loads(out)["passed"] is False
    assert "retraction" in err
    assert "e-03" in err  # the planted defect sits around 1e-3


def test_usage_errors_exit_two(capsys):
    assert run(capsys, "verify")[0] == 2                      # missing --family
    assert run(capsys, "frobnicate")[0] == 2                  # unknown subcommand
    assert run(capsys, "gallery", "describe")[0] == 2         # missing name
    assert run(capsys, "verify", "--family", "cross_family",
               "--max-level", "3")[0] == 2                    # cross has no size knob


def test_reports_byte_identical_under_seed(capsys):
    args = ("symplectic", "--pairs", "2", "--samples", "20", "--seed", "3")
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    wa = ("wiener", "--samples", "30000", "--seed", "5")
    _, w1, _ = run(capsys, *wa)
    _, w2, _ = run(capsys, *wa)
    assert w1 == w2
    _, w3, _ = run(capsys, "wiener", "--samples", "30000", "--seed", "6")
    assert w1 != w3  # sampled residuals move with the seed


def test_distance_five_sixths(capsys):
    code, out, _ = run(capsys, "distance", "--family", "euclid_tower",
                       "--max-level", "10",
                       "--x", '{"kind": "named", "name": "origin"}',
                       "--y", '{"kind": "named", "name": "three_four"}')
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["d_inf"] - 5.0 / 6.0) <= 1e-12
    assert doc["converged"] is True
    assert doc["history"] == sorted(doc["history"])


def test_distance_with_measure(capsys, tmp_path):
    weights = tmp_path / "mu.csv"
    weights.write_text("index,weight\n1,0.5\n2,0.25\ntail,0.125\n")
    code, out, _ = run(capsys, "distance", "--family", "euclid_tower",
                       "--max-level", "4",
                       "--x", '{"kind": "named", "name": "origin"}',
                       "--y", '{"kind": "named", "name": "three_four"}',
                       "--measure", str(weights))
    assert code == 0
    doc = json.loads(out)
    want = 0.5 * (3.0 / 4.0) + 0.25 * (5.0 / 6.0)
    assert abs(doc["d_mu"] - want) <= 1e-12
    assert doc["d_mu_tail_bound"] == 0.125


def test_distance_inline_sequence_threads(capsys):
    code, out, _ = run(capsys, "distance", "--family", "euclid_tower",
                       "--max-level", "3", "--metric", "discrete",
                       "--x", '{"kind": "sequence", "values": [1, 0, 0]}',
                       "--y", '{"kind": "sequence", "values": [1, 0, 0]}')
    assert code == 0
    assert json.loads(out)["d_inf"] == 0.0


def test_flow_csv_contract(capsys):
    code, out, _ = run(capsys, "flow", "--family", "symplectic_even_tower",
                       "--level", "2", "--H", "oscillator",
                       "--dt", "1e-3", "--steps", "200")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "step,t,x0,x1,x2,x3,H"
    assert len(lines) == 202
    energies = np.array([float(l.split(",")[-1]) for l in lines[1:]])
    assert np.max(np.abs(energies - energies[0])) < 1e-6


def test_flow_json_summary(capsys):
    code, out, _ = run(capsys, "flow", "--family", "symplectic_even_tower",
                       "--level", "1", "--steps", "100", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["energy_drift"] < 1e-6
    assert len(doc["final_state"]) == 2


def test_flow_expression_hamiltonian(capsys):
    code, out, _ = run(capsys, "flow", "--family", "symplectic_even_tower",
                       "--level", "1", "--H", "(sqr(x0) + sqr(x1))/2",
                       "--steps", "50", "--format", "json")
    assert code == 0
    assert json.loads(out)["energy_drift"] < 1e-6


def test_flow_bad_inputs_exit_two(capsys):
    assert run(capsys, "flow", "--family", "symplectic_even_tower",
               "--level", "2", "--x0", "1,0")[0] == 2      # wrong dimension
    assert run(capsys, "flow", "--family", "symplectic_even_tower",
               "--level", "1", "--x0", "a,b")[0] == 2      # not numbers
    assert run(capsys, "flow", "--family", "euclid_tower",
               "--level", "2")[0] == 2                     # no symplectic form


def test_wiener_audit_passes(capsys):
    code, out, err = run(capsys, "wiener", "--samples", "30000", "--seed", "0")
    assert code == 0, err
    doc = json.loads(out)
    names = [c["name"] for r in doc["reports"] for c in r["checks"]]
    assert "pl-injection cocycle and retraction" in names
    assert "marginal variance matches t" in names


def test_wiener_custom_times(capsys):
    code, out, _ = run(capsys, "wiener", "--times", "0.5,1.0,2.0",
                       "--samples", "30000")
    assert code == 0
    assert json.loads(out)["pool"] == [0.5, 1.0, 2.0]


def test_symplectic_audit_passes(capsys):
    code, out, _ = run(capsys, "symplectic", "--pairs", "3", "--samples", "30")
    assert code == 0
    doc = json.loads(out)
    assert doc["rank_profile"]["3"]["rank"] == 6
    titles = [r["title"] for r in doc["reports"]]
    assert "momentum map" in titles


def test_gallery_list_describe_export(capsys):
    code, out, _ = run(capsys, "gallery", "list")
    assert code == 0
    assert set(out.split()) == {"cross", "euclid", "jet", "matrix", "odd-symplectic",
                                "poly", "symplectic", "wiener"}

    code, out, _ = run(capsys, "gallery", "describe", "euclid")
    assert code == 0
    doc = json.loads(out)
    assert doc["levels"][3] == {"index": 3, "dim": 3}
    assert "metrics" in doc["extras"]

    code, out, _ = run(capsys, "gallery", "export", "matrix")
    assert code == 0
    desc = json.loads(out)
    fam = __import__("proflim").family_from_descriptor(desc)
    assert fam.dim(4) == 16

    code, out, _ = run(capsys, "gallery", "export", "wiener")
    assert code == 0
    assert json.loads(out)["projections"][0]["kind"] == "named-gallery"


def test_verify_with_form_descriptor(capsys, tmp_path):
    levels = [{"index": n, "comps": ["1"] * n} for n in range(0, 7)]
    form = tmp_path / "ones.json"
    form.write_text(json.dumps({"kind": "expressions", "degree": 1,
                                "levels": levels}))
    code, out, _ = run(capsys, "verify", "--family", "euclid_tower",
                       "--max-level", "6", "--samples", "5",
                       "--form", str(form))
    assert code == 0
    titles = [r["title"] for r in json.loads(out)["reports"]]
    assert any("tame form" in t for t in titles)


def test_out_dir_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("PROFLIM_OUT_DIR", str(tmp_path / "runs"))
    code, out, _ = run(capsys, "gallery", "describe", "cross",
                       "--out", "cross.json")
    assert code == 0
    assert out == ""  # routed to the file
    target = tmp_path / "runs" / "cross.json"
    assert json.loads(target.read_text())["name"] == "cross"
    # absolute paths are left alone
    abs_target = tmp_path / "abs.json"
    run(capsys, "gallery", "describe", "cross", "--out", str(abs_target))
    assert abs_target.exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "proflim.cli", "gallery", "list"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "euclid" in proc.stdout
    proc2 = subprocess.run([sys.executable, "-m", "proflim.cli", "nope"],
                           capture_output=True, text=True)
    assert proc2.returncode == 2
