import json
import os

import numpy as np
import pytest

from ssmrom.cli import main


def run_cli(args):
    return main(args)


def test_usage_error_exit_code():
    assert run_cli(["definitely-not-a-command"]) == 1


def test_missing_model_is_model_error(tmp_path):
    code = run_cli(["eig", "--model", str(tmp_path / "nope.txt"),
                    "--out", str(tmp_path)])
    assert code == 2


def test_validate_good_and_bad(tmp_path, capsys):
    assert run_cli(["validate", "--example", "oscillator3d",
                    "--constraint", "cubic"]) == 0
    # duplicated constraint row written into a model file
    from ssmrom.modelio import save_system
    from ssmrom.model import SecondOrderSystem
    from ssmrom.models import build_example
    from ssmrom.polytensor import MultiPolynomial

    sys0 = build_example("oscillator3d:cubic").sys
    G0 = np.vstack([sys0.G0, sys0.G0])
    g2 = MultiPolynomial(
        3, 2,
        {e: np.concatenate([v, v]) for e, v in sys0.g_nl.terms.items()},
    )
    bad = SecondOrderSystem(M=sys0.M, C=sys0.C, K=sys0.K, f_nl=sys0.f_nl,
                            G0=G0, g_nl=g2)
    path = tmp_path / "bad.txt"
    save_system(path, bad)
    code = run_cli(["validate", "--model", str(path)])
    assert code != 0
    out = capsys.readouterr().out
    assert "rank" in out


def test_eig_csv_contains_published_pair(tmp_path):
    out = tmp_path / "eig"
    assert run_cli(["eig", "--example", "oscillator3d",
                    "--constraint", "spherical", "--out", str(out)]) == 0
    rows = (out / "spectrum.csv").read_text().strip().splitlines()
    assert rows[0] == "index,re,im,class"
    finite = [r.split(",") for r in rows[1:] if r.endswith("finite")]
    res = [float(r[1]) for r in finite]
    ims = [float(r[2]) for r in finite]
    assert any(abs(a + 0.02) < 1e-3 and abs(abs(b) - 1.9999) < 1e-3
               for a, b in zip(res, ims))
    n_inf = sum(1 for r in rows[1:] if r.endswith("infinite"))
    assert n_inf == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "eig"
    assert "wall_time_s" in manifest
    assert manifest["parameters"]["seed"] == 0


def test_eig_outputs_are_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert run_cli(["eig", "--example", "pendulum_slider",
                        "--out", str(out)]) == 0
    assert (out1 / "spectrum.csv").read_bytes() == (
        out2 / "spectrum.csv"
    ).read_bytes()


def test_ssm_and_resonance_outputs(tmp_path):
    out = tmp_path / "ssm"
    assert run_cli(["ssm", "--example", "oscillator3d",
                    "--constraint", "cubic", "--order", "5",
                    "--out", str(out)]) == 0
    text = (out / "ssm.txt").read_text()
    assert "[W]" in text and "[R]" in text
    assert "order 5" in text
    res = (out / "resonance.txt").read_text()
    assert "relative spectral quotient" in res


def test_backbone_csv(tmp_path):
    out = tmp_path / "bb"
    assert run_cli(["backbone", "--example", "oscillator3d",
                    "--order", "7", "--dofs", "x1",
                    "--rho", "0.01,0.2", "--out", str(out)]) == 0
    rows = (out / "backbone.csv").read_text().strip().splitlines()
    assert rows[0] == "rho,omega,amplitude"
    first = [float(x) for x in rows[1].split(",")]
    assert abs(first[1] - 2.0) < 1e-2


def test_frc_csv_with_sn_markers(tmp_path):
    out = tmp_path / "frc"
    code = run_cli(["frc", "--example", "oscillator3d", "--order", "5",
                    "--eps", "0.02", "--omega", "1.85:2.1",
                    "--dofs", "x1", "--step", "0.005", "--out", str(out)])
    assert code == 0
    rows = (out / "frc_branch0.csv").read_text().strip().splitlines()
    assert rows[0].startswith("omega,rho1,amp_dof0,stable,special")
    assert any(r.endswith("SN") for r in rows[1:])


def test_simulate_rom_csv(tmp_path):
    out = tmp_path / "sim"
    assert run_cli(["simulate", "--example", "oscillator3d", "--kind",
                    "rom", "--order", "5", "--rho", "0.1",
                    "--t-end", "5.0", "--out", str(out)]) == 0
    assert (out / "rom_trajectory.csv").exists()


def test_inverr_csv(tmp_path):
    out = tmp_path / "ie"
    assert run_cli(["inverr", "--example", "pendulum_slider",
                    "--pairs", "1,2", "--orders", "3",
                    "--rho", "0.2,0.5", "--out", str(out)]) == 0
    rows = (out / "invariance_error.csv").read_text().strip().splitlines()
    assert rows[0] == "varrho,order,error"
    assert len(rows) == 3


def test_numerical_failure_exit_code(tmp_path):
    # selecting a non-existent master pair is a numerical-domain error
    code = run_cli(["ssm", "--example", "pendulum", "--pairs", "7",
                    "--out", str(tmp_path)])
    assert code == 3
