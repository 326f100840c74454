import math
import os
from pathlib import Path

import pytest

import hetnetlab as hl

CONFIGS = Path(os.environ.get("HETNET_CONFIG_DIR", Path(__file__).parents[2] / "configs"))


def test_derived_constants():
    c = hl.derive_constants([2.0, 1.0], [3.3, 4.7])
    assert c["alpha"] == pytest.approx(2.0)
    assert c["beta"] == pytest.approx(0.5)
    assert c["mu"] == pytest.approx(1.65)
    assert c["rho"] == pytest.approx(1.325)


def test_time_of_flight_scalar():
    t = hl.time_of_flight([0.1], [2.0])
    assert t == pytest.approx(math.log(10.0) / 2.0, rel=1e-12)


def test_wedge_defect_matches_membership():
    x = [0.3, 0.05]
    lam = [2.0, 1.0]
    d = hl.wedge_defect(x, lam)
    assert 0.0 < d < 1.0
    assert hl.wedge_membership(x, lam, 0.5) == (d < 0.25)


def test_validate_network_config():
    rep = hl.validate_network(CONFIGS / "two_node_scalar.json")
    assert rep["passed"] is True
    assert hl.principal_sequence(CONFIGS / "two_node_scalar.json") == ["p1", "p2"]


def test_omega_orbit_scalar_closed_form():
    rep = hl.omega_orbit(CONFIGS / "two_node_scalar.json", norm=0.1, loops=3)
    for k, xn in enumerate(rep["x_norms"]):
        assert xn == pytest.approx(0.1 ** (2.25**k), rel=1e-9)


def test_measure_estimate_reasonable():
    est = hl.estimate_wedge_ratio([2.0, 1.0], [3.3, 4.7], eps=0.5, delta=0.01, n=20000, seed=5)
    assert est["ratio"] <= est["bound"] + 3.0 * est["half_width"] + 1e-12
    assert est["half_width"] > 0.0


def test_lemma_sweep():
    rep = hl.check_lemmas(2000, 3)
    assert rep["passed"] is True
    assert rep["violations"] == 0


def test_glv_validate_and_itinerary():
    rep = hl.glv_validate(CONFIGS / "may_leonard.json")
    assert rep["passed"] is True
    node = rep["network"]["equilibria"][0]
    mu = node["contracting"][0] / node["expanding"][0]
    assert mu == pytest.approx(3.0, rel=1e-12)

    it = hl.glv_itinerary(
        CONFIGS / "may_leonard.json", [1.0, 0.012, 0.01], t_max=120.0, eps=0.2
    )
    labels = [v["label"] for v in it["visits"]]
    assert labels[:3] == ["xi1", "xi2", "xi3"]
