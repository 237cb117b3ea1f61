import json
import math

import pytest

import dyadlab


def test_phi_and_cd():
    assert dyadlab.phi(1.0) == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-12)
    assert dyadlab.c_d(5) == pytest.approx(dyadlab.phi(0.5) / 6, abs=1e-12)
    with pytest.raises(dyadlab.InvalidArgument):
        dyadlab.phi(2.0)
    with pytest.raises(ValueError):
        dyadlab.c_d(3)


def test_measure_from_points():
    mu = dyadlab.from_points([[0.1, 0.1], [0.1, 0.1], [0.9, 0.2]], [1.0, 1.0, 2.0], dim=2, depth=4)
    assert len(mu) == 2
    assert mu.total_mass() == pytest.approx(4.0)
    assert dyadlab.entropy(mu.normalized(), 4) == pytest.approx(1.0)
    coords = sorted(c for c, _ in mu.leaves())
    assert coords == [(1, 1), (14, 3)]


def test_generators_and_counts():
    c = dyadlab.cantor_product(2, 2, 8)
    assert dyadlab.box_count(c, 8) == 4 ** 4
    assert dyadlab.frostman_fit(c, 2, 8)["s"] == pytest.approx(1.0, abs=0.05)
    assert dyadlab.train_track(8, 12, 0).is_trivial()
    assert dyadlab.robust_entropy_of_masses([0.25] * 4, 2.0) == pytest.approx(1.0)


def test_measure_file_round_trip(tmp_path):
    mu = dyadlab.random_digit_cantor(3, 6, 7)
    path = str(tmp_path / "mu.txt")
    dyadlab.save_measure(path, mu)
    back = dyadlab.load_measure(path)
    assert back.leaves() == mu.leaves()


def test_sigma_for_f():
    profile = json.dumps({"kind": "trivial_half", "d": 2})
    f = json.dumps({"xs": [0.0, 0.5, 1.0], "ys": [0.0, 1.0, 1.0]})
    assert dyadlab.sigma_for_f(profile, f, 0.25, 64) == pytest.approx(0.25)
    with pytest.raises(dyadlab.ParseError):
        dyadlab.sigma_for_f("{", f, 0.25)


def test_run_experiment():
    cfg = {"scenario": "cantor",
           "generator": {"kind": "cantor_product", "params": {"ratio": 0.25, "d": 2}},
           "depth": 10}
    (r,) = dyadlab.run_experiment(json.dumps(cfg))
    assert not r["degenerate"]
    assert r["pins"] and r["exponent"] == r["pins"][0]["exponent"]
    assert r["target"] == pytest.approx(dyadlab.phi(min(r["frostman_t"], 1.0)) - 0.12)
    with pytest.raises(dyadlab.ParseError):
        dyadlab.run_experiment(json.dumps({"scenario": "x"}))
