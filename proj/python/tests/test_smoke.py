import json
import math
import os
import subprocess

import numpy as np
import pytest

import vortsphere as vs


def test_roundtrip_and_operators():
    z = vs.random_field(12, 1, 6, seed=3)
    mu, lon, vals = z.values()
    assert vals.shape == (len(mu), len(lon))
    x3 = vs.coordinate_field(8, 2)
    assert np.allclose((vs.green(x3) - 0.5 * x3).coeffs(), 0.0, atol=1e-16)
    assert abs(vs.inner(z, vs.jacobian(vs.green(z), z))) < 1e-11
    assert vs.energy(x3) == pytest.approx(0.5 * vs.inner(x3, vs.green(x3)))


def test_coefficients_roundtrip(tmp_path):
    z = vs.random_field(6, seed=5)
    c = z.coeffs()
    assert c.shape == (49,)
    again = vs.SpectralField.from_coeffs(6, c)
    assert vs.l2_norm(again - z) == 0.0
    path = str(tmp_path / "z.txt")
    vs.save_coeffs(path, z)
    assert vs.l2_norm(vs.load_coeffs(path) - z) < 1e-15


def test_wave_tracks_exact_solution():
    cfg = vs.SimConfig()
    cfg.J, cfg.dt, cfg.t_end, cfg.diag_every = 12, 1e-2, 0.5, 10
    w = vs.make_rh_wave(2, vs.unit_x1x3(12), 1.0)
    recs = vs.simulate(w.exact(0.0), cfg)
    assert recs[-1]["t"] == pytest.approx(0.5)
    assert vs.l2_norm(recs[-1]["zeta"] - w.exact(0.5)) < 1e-8
    assert w.beta == pytest.approx(-1.0 / 3.0)


def test_distances_and_steady_state():
    z = vs.random_field(8, 1, 4, seed=9)
    turned = vs.rotate(z, [0, 0, 1], 0.7)
    assert vs.orbit_distance(turned, z, "H")["distance"] < 1e-8
    assert vs.lp_distance(turned, z) > 0.1
    # sampled class distance is quadrature-limited, far below the plain distance
    assert vs.class_distance(turned, z) < 1e-2 * vs.lp_distance(turned, z)
    st = vs.solve_fixed_point("cubic", 0.3, [0, 0, 1], vs.random_field(12, 1, 4, seed=2))
    assert st.converged and st.residual < 1e-8
    assert vs.zonality_defect(st.zeta, [0, 0, 1]) < 1e-6


def test_probe_and_stability():
    r = vs.extremality_probe(vs.linear_field(12, [1, 0, 0.5]), "min", samples=8)
    assert r["passed"] and r["violations"] == 0
    out = vs.run_stability(json.dumps({
        "perturbation": {"delta": 1e-3},
        "sim": {"J": 10, "dt": 1e-2, "t_end": 0.2},
        "distance_every": 5,
    }))
    assert out["columns"] == ["plain_L2"]
    assert not out["blew_up"]
    assert max(d[0] for d in out["distances"]) < 2e-3


def test_errors_are_python_exceptions():
    with pytest.raises(ValueError):
        vs.run_stability('{"bogus": 1}')
    with pytest.raises(ValueError):
        vs.orbit_distance(vs.SpectralField(4), vs.SpectralField(4), "Q")
    with pytest.raises(IndexError):
        vs.SpectralField(3)[(4, 0)]


CLI = os.environ.get("VORTSPHERE_CLI")


@pytest.mark.skipif(not CLI, reason="VORTSPHERE_CLI not set")
def test_cli_exit_codes(tmp_path):
    run = lambda *a: subprocess.run([CLI, *a], capture_output=True, text=True)
    assert run().returncode == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"sim": {"dtt": 1}}')
    r = run("simulate", "--config", str(bad))
    assert r.returncode == 1 and "unknown key" in r.stderr
    good = tmp_path / "good.json"
    good.write_text('{"sim": {"J": 8, "dt": 0.01, "t_end": 0.1}}')
    out = tmp_path / "sim"
    r = run("simulate", "--config", str(good), "--seed", "4", "--output", str(out))
    assert r.returncode == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 4 and manifest["status"] == "ok"
    assert manifest["config_hash"].startswith("fnv1a64:")
    blow = tmp_path / "blow.json"
    blow.write_text('{"base_state": {"kind": "rh-wave", "degree": 3, "amplitude": 50},'
                    '"perturbation": {"delta": 1}, "sim": {"J": 16, "dt": 0.5, "t_end": 400}}')
    r = run("stability", "--config", str(blow), "--output", str(tmp_path / "blow"))
    assert r.returncode == 2
