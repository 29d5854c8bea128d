import json
import os

import numpy as np
import pytest

import gtverify as gtv

DATA = os.environ.get("GTV_DATA_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "data"))


def test_sym_eig_identity():
    vals, vecs = gtv.sym_eig(np.eye(3))
    assert np.allclose(vals, 1.0)
    assert np.allclose(vecs @ vecs.T, np.eye(3))


def test_positive_definite_and_condition():
    ok, lam = gtv.is_positive_definite(np.diag([1.0, 4.0]))
    assert ok and lam == pytest.approx(1.0)
    assert gtv.condition_number(np.diag([1.0, 100.0])) == pytest.approx(100.0)
    with pytest.raises(gtv.NumericError):
        gtv.condition_number(np.diag([1.0, 0.0]))


def test_pump_dc_gain():
    p = gtv.pump_statespace()
    dc = p["C"][0, 0] / (1.0 - p["A"][0, 0])
    assert dc == pytest.approx(1.2, abs=1e-4)


def test_fixture_set_and_interconnect():
    pts = gtv.load_fixture_set(os.path.join(DATA, "appendix_d"))
    assert set(pts) == {"idle", "mcr", "mcm", "top"}
    idle = pts["idle"]
    assert idle["equilibrium"]["NH_eq"] == 39315.0
    assert idle["plant"]["A"][0, 0] == pytest.approx(1.9746)
    # plant NH companion block alone is Schur
    assert gtv.spectral_radius(idle["plant"]["A"][:2, :2]) < 1.0
    acl = gtv.interconnect_closed_loop(idle["plant"], idle["controller"])
    assert acl.shape == (16, 16)


def test_solve_and_check_common_lyapunov():
    verts = [{"A": np.array([[0.5]])}, {"A": np.array([[0.9]])}]
    r = gtv.solve_lmi("common", verts)
    assert r["status"] == "feasible"
    chk = gtv.check_certificate("common", verts, r["P"])
    assert chk["pass"]
    bad = gtv.solve_lmi("common", [{"A": np.array([[1.0]])}])
    assert bad["status"] == "infeasible"


def test_autocode_check_round_trip():
    r = gtv.solve_lmi("invariance", [{"A": np.array([[0.5]]), "B": np.array([[0.5]])}], xi=0.5)
    assert r["status"] == "feasible"
    src = gtv.autocode(
        np.array([[0.5]]), np.array([[0.5]]), np.array([[1.0]]), np.array([[0.0]]),
        r["P"], r["xi"], bound=1.0,
    )
    assert "PROOF_TACTIC" in src
    rep = gtv.check_annotations(src, bound=1.0)
    assert rep["pass"]
    # a grown coefficient must break at least one obligation
    assert "0.5 * x_0" in src
    rep_bad = gtv.check_annotations(src.replace("0.5 * x_0", "0.9 * x_0", 1), bound=1.0)
    assert not rep_bad["pass"]


def test_simulate_fixed_point():
    cfg = json.dumps({"duration": 20, "equilibrium": "idle", "pla_profile": [[0, 0.0]]})
    csv = gtv.simulate_csv(cfg, DATA)
    lines = csv.strip().splitlines()
    assert lines[0].startswith("step,time,NH_pct")
    assert len(lines) == 21
    first = lines[1].split(",")
    assert float(first[2]) == pytest.approx(77.5153)


def test_census_and_saturate():
    c = gtv.varying_entry_census([np.zeros((2, 2)), np.zeros((2, 2))])
    assert c["zero"] == 4 and c["total"] == 4
    assert gtv.saturate(0.05, 0.07, 0.098) == 0.07
