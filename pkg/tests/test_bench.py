import os

from ssmrom.bench import CASES, run_case, run_suite


def test_case_registry_ids_unique():
    ids = [c.id for c in CASES]
    assert len(ids) == len(set(ids))
    assert "chain-speedup" in ids


def test_every_check_carries_provenance():
    for case in CASES:
        for key, expected, tol, kind, provenance in case.checks:
            assert provenance in ("published", "derived", "trivial")
            assert kind in ("abs", "rel", "max", "min", "eq")


def test_run_single_case_and_report(tmp_path):
    report = run_suite("pendulum-closed-form", out_dir=str(tmp_path))
    assert len(report.results) == 1
    r = report.results[0]
    assert r.passed, r.failures
    assert r.wall_s >= 0.0
    assert "lam_osc" in r.measured
    assert os.path.exists(tmp_path / "bench_report.md")
    assert os.path.exists(tmp_path / "bench_report.csv")
    assert "pendulum-closed-form" in report.summary()


def test_failed_check_is_reported():
    bad = type(CASES[0])(
        id="always-fails",
        func=lambda: {"x": 5.0},
        checks=[("x", 1.0, 1e-6, "abs", "derived"),
                ("missing_key", 1.0, 1e-6, "abs", "derived")],
    )
    result = run_case(bad)
    assert not result.passed
    assert len(result.failures) == 2


def test_case_error_becomes_failure():
    def boom():
        raise RuntimeError("deliberate")

    bad = type(CASES[0])(id="raises", func=boom, checks=[])
    result = run_case(bad)
    assert not result.passed
    assert "deliberate" in result.error
