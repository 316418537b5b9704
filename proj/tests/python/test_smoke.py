import json
import math
import os
import subprocess

import pytest

import optomech as om


def bench(drive=0.71):
    return om.ModelParams(1.0, 10.0, 0.3, 0.1, 10.0, complex(drive, 0.0))


def test_params_validate():
    with pytest.raises(om.DomainError):
        om.ModelParams(1.0, 10.0, 0.3, 0.0, 10.0, 0j)
    p = bench()
    assert p.with_field("g", 0.5).g == 0.5
    assert "omega_c=1" in repr(p)


def test_steady_states_and_stability():
    states = om.steady_states(bench(3.0))
    assert [s.branch_id for s in states] == [0, 1, 2]
    stable = [om.classify(s, bench(3.0)).stable for s in states]
    assert stable == [True, False, True]
    assert states[0].n == pytest.approx(abs(states[0].alpha0) ** 2)


def test_linear_cavity_is_coherent():
    p = om.ModelParams(1.3, 10.0, 0.0, 0.4, 10.0, 0.7 - 0.2j)
    (s,) = om.steady_states(p)
    assert s.n == pytest.approx(abs(0.7 - 0.2j) ** 2 / (0.4**2 + 1.3**2), rel=1e-13)
    (r,) = om.g2_reports(p, "corrected")
    assert r.g2_covariance == 1.0
    assert not r.antibunched


def test_covariance_solves_lyapunov():
    p = bench()
    s = om.steady_states(p)[0]
    A = om.drift_matrix(s, p)
    D = om.diffusion_matrix(s, p)
    C = om.covariance(s, p)
    for i in range(2):
        for j in range(2):
            lhs = sum(A[i][k] * C[k][j] + C[i][k] * A[j][k] for k in range(2))
            assert abs(lhs - D[i][j]) <= 1e-12 * (1 + abs(D[i][j]))


def test_vacuum_report():
    (r,) = om.g2_reports(om.ModelParams(1.0, 10.0, 0.3, 0.1, 10.0, 0j))
    assert r.status == "vacuum"
    assert math.isnan(r.g2_covariance)


def test_verify_report():
    report = om.verify(bench())
    assert report["schema_version"] == 1
    assert report["closed_form_vs_lyapunov"] <= 1e-9
    assert math.isfinite(report["eq24_vs_lyapunov"])
    assert math.isfinite(report["eq26_vs_eq21"])


def test_simulate_is_seeded():
    p = bench(0.4)
    a = om.simulate(p, dt=1e-3, t_end=2.0, n_traj=100, seed=5)
    b = om.simulate(p, dt=1e-3, t_end=2.0, n_traj=100, seed=5)
    assert a == b
    assert a["discard_fraction"] == 0.0
    assert a["g2"] is not None


def test_run_cli_in_process():
    code, out, err = om.run_cli(
        ["--omega_c", "1", "--omega_m", "10", "--g", "0.3", "--gamma1", "0.1",
         "--gamma2", "10", "--drive_re", "0.5", "--format", "json", "--reproducible", "g2"]
    )
    assert code == 0, err
    doc = json.loads(out)
    assert "generated_at" not in doc
    assert doc["rows"][0]["branch_id"] == 0
    code, _, err = om.run_cli(["--omega_m", "10", "steady"])
    assert code == 2
    assert "omega_c" in err


@pytest.mark.skipif("OPTOMECH_CLI" not in os.environ, reason="CLI binary path not provided")
def test_cli_binary_exit_codes(tmp_path):
    cli = os.environ["OPTOMECH_CLI"]
    cfg = tmp_path / "bench.cfg"
    cfg.write_text("omega_c = 1\nomega_m = 10\ng = 0.3\ngamma1 = 0.1\ngamma2 = 10\ndrive_re = 3\n")
    ok = subprocess.run([cli, "--config", str(cfg), "steady"], capture_output=True, text=True)
    assert ok.returncode == 0
    assert len(ok.stdout.strip().splitlines()) == 4
    bad = subprocess.run([cli, "--config", str(cfg), "--gamma1", "-1", "steady"],
                         capture_output=True, text=True)
    assert bad.returncode == 2
