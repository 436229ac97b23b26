import numpy as np
import pytest

from ssmrom.model import ModelError, SecondOrderSystem, assemble_first_order
from ssmrom.models import build_example
from ssmrom.spectral import (
    SpectralError,
    resonance_report,
    select_master,
    solve_pencil,
    spectrum_equivalence_check,
)


@pytest.fixture(scope="module")
def cubic():
    ex = build_example("oscillator3d:cubic")
    return ex, solve_pencil(ex.dae)


def test_unconstrained_linear_oscillator_unit_eigs():
    sys = SecondOrderSystem(M=np.eye(1), C=np.zeros((1, 1)), K=np.eye(1))
    spec = solve_pencil(assemble_first_order(sys))
    lam = np.sort_complex(spec.finite_eigenvalues)
    assert lam == pytest.approx([-1j, 1j], abs=1e-12)
    assert spec.infinite_count == 0


def test_oscillator_dae_spectrum(cubic):
    _, spec = cubic
    lam = spec.finite_eigenvalues
    osc = lam[lam.imag > 0]
    osc = osc[np.argsort(-osc.real)]
    assert osc[0] == pytest.approx(complex(-0.02, 1.9999), abs=1e-3)
    assert osc[1] == pytest.approx(complex(-0.15, 2.9962), abs=1e-3)
    assert spec.infinite_count == 3
    assert len(spec.finite) == 4  # 2 (n - n_c) finite eigenvalues


def test_eigen_residuals_and_biorthogonality(cubic):
    ex, spec = cubic
    A, B = ex.dae.A, ex.dae.B
    V = np.column_stack([v for _, v, _ in spec.finite])
    U = np.column_stack([u for _, _, u in spec.finite])
    for lam, v, u in spec.finite:
        assert np.linalg.norm(A @ v - lam * (B @ v)) / np.linalg.norm(v) < 1e-10
        assert np.linalg.norm(u @ A - lam * (u @ B)) / np.linalg.norm(u) < 1e-10
    gram = U.T @ B @ V
    assert np.max(np.abs(gram - np.eye(4))) < 1e-9


def test_sorting_by_decreasing_real_part(cubic):
    _, spec = cubic
    re = spec.finite_eigenvalues.real
    assert np.all(np.diff(re) <= 1e-14)


def test_constraint_modes_orthogonal_to_configuration(cubic):
    ex, spec = cubic
    xs = spec.infinite_vectors[ex.dae.layout.x, :]
    norms = np.linalg.norm(spec.infinite_vectors, axis=0)
    assert np.max(np.linalg.norm(xs, axis=0) / norms) < 1e-8


def test_normalization_phase_convention(cubic):
    ex, spec = cubic
    for lam, v, _ in spec.finite:
        x = v[ex.dae.layout.x]
        j = np.argmax(np.abs(x))
        assert abs(np.angle(x[j])) < 1e-9
        assert x[j].real > 0


def test_select_master_basic(cubic):
    _, spec = cubic
    master = select_master(spec, [1])
    assert master.m == 1
    assert master.lambdas[0] == pytest.approx(complex(-0.02, 1.9999), abs=1e-3)
    assert master.lam_vec[1] == np.conj(master.lam_vec[0])
    assert master.complement.size == 2


def test_select_master_rejects_zero_mode():
    ex = build_example("pendulum", c=0.1)
    spec = solve_pencil(ex.dae)
    # only one underdamped pair exists; the zero mode is not selectable
    pairs = spec.conjugate_pairs()
    assert len(pairs) == 1
    with pytest.raises(SpectralError):
        select_master(spec, [2])


def test_select_master_slider_flags_1_to_3():
    ex = build_example("pendulum_slider")
    spec = solve_pencil(ex.dae)
    master = select_master(spec, [1, 2])
    assert master.m == 2
    # lambda_2 ~ 3 lambda_1 appears among the selection's inner resonances
    assert any(
        i == 2 and l == (3, 0) and j == (0, 0)
        for i, l, j in master.inner_resonances
    )


def test_resonance_report_quotients_and_r(cubic):
    _, spec = cubic
    master = select_master(spec, [1])
    rep = resonance_report(spec, master, order=5, omega=2.0)
    # complement real part -0.15, master -0.02 -> quotient 7
    assert rep.sigma == 7
    assert rep.sigma_abs == 7
    assert rep.violations == []
    assert rep.external_r == [1]
    # near-identity family flagged at every enumerated order
    assert any(i == 1 and l == (2,) and j == (1,) for i, l, j in rep.inner)


def test_resonance_report_well_separated_empty():
    sys = SecondOrderSystem(
        M=np.eye(2), C=np.diag([0.02, 0.03]), K=np.diag([1.0, 17.3])
    )
    spec = solve_pencil(assemble_first_order(sys))
    master = select_master(spec, [1])
    rep = resonance_report(spec, master, order=3)
    assert rep.violations == []
    # only the self (near-identity) family appears
    assert all(i == 1 for i, _, _ in rep.inner)


def test_resonance_r_absent_off_resonance(cubic):
    _, spec = cubic
    master = select_master(spec, [1])
    rep = resonance_report(spec, master, order=3, omega=1.2345)
    assert rep.external_r is None


def test_equivalence_check_requires_linear_constraints(cubic):
    ex, _ = cubic
    with pytest.raises(ModelError):
        spectrum_equivalence_check(ex.sys, alpha=5.0)


def test_equivalence_check_passes_linearized(cubic):
    ex, _ = cubic
    lin = SecondOrderSystem(
        M=ex.sys.M, C=ex.sys.C, K=ex.sys.K, f_nl=ex.sys.f_nl,
        G0=ex.sys.G0, g_nl=None, forcing=ex.sys.forcing,
    )
    rep = spectrum_equivalence_check(lin, alpha=5.0)
    assert rep.passed
    assert rep.spurious.size == 1
    assert rep.spurious[0] == pytest.approx(-5.0, abs=1e-8)
    assert len(rep.matched) == 4


def test_equivalence_check_unconstrained_vacuous():
    ex = build_example("oscillator3d:none")
    rep = spectrum_equivalence_check(ex.sys, alpha=5.0)
    assert rep.passed
    assert rep.spurious.size == 0


def test_spectrum_csv_rows(cubic):
    _, spec = cubic
    rows = spec.to_rows()
    assert len(rows) == 7
    assert rows[0][3] == "finite"
    assert rows[-1][3] == "infinite"
