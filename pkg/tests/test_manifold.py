import numpy as np
import pytest

from ssmrom.manifold import (
    ManifoldError,
    autonomous_residual_coefficients,
    compute_autonomous_ssm,
    compute_nonautonomous_leading,
    conj_exps,
    evaluate_manifold,
    reduced_vector_field,
)
from ssmrom.model import SecondOrderSystem, assemble_first_order
from ssmrom.models import build_example
from ssmrom.spectral import select_master, solve_pencil


@pytest.fixture(scope="module")
def osc_none():
    ex = build_example("oscillator3d:none")
    spec = solve_pencil(ex.dae)
    master = select_master(spec, [1])
    ssm = compute_autonomous_ssm(ex.dae, master, 9)
    return ex, spec, master, ssm


def test_conj_exps():
    assert conj_exps((2, 1, 0, 3)) == (1, 2, 3, 0)


def test_linear_system_reduces_to_linear_part():
    sys = SecondOrderSystem(
        M=np.eye(2), C=np.diag([0.02, 0.04]), K=np.diag([1.0, 9.0])
    )
    dae = assemble_first_order(sys)
    spec = solve_pencil(dae)
    master = select_master(spec, [1])
    ssm = compute_autonomous_ssm(dae, master, 5)
    # W = linear embedding, R = diagonal linear part, no higher terms
    assert all(sum(e) == 1 for e in ssm.W.terms)
    assert all(sum(e) == 1 for e in ssm.R.terms)
    lam = master.lam_vec
    for d in range(2):
        e = tuple(1 if i == d else 0 for i in range(2))
        assert ssm.R.terms[e][d] == pytest.approx(lam[d])


def test_tangency_to_master_subspace(osc_none):
    _, _, master, ssm = osc_none
    delta = 1e-4
    p = np.array([delta, delta], dtype=complex)
    z = evaluate_manifold(ssm, p)
    lin = master.V[:, 0] * delta + master.V[:, 1] * delta
    assert np.linalg.norm(z - lin) < 10 * delta**2


def test_fixed_point_at_origin(osc_none):
    _, _, _, ssm = osc_none
    p0 = np.zeros(2, dtype=complex)
    assert np.linalg.norm(evaluate_manifold(ssm, p0)) == 0.0
    assert np.linalg.norm(reduced_vector_field(ssm, p0)) == 0.0


def test_manifold_evaluation_is_real(osc_none):
    _, _, _, ssm = osc_none
    p = ssm.polar_point([0.2], [0.7])
    z = evaluate_manifold(ssm, p)
    assert np.max(np.abs(z.imag)) < 1e-12 * max(1.0, np.max(np.abs(z.real)))


def test_invariance_residual_vanishes_through_order(osc_none):
    ex, _, _, ssm = osc_none
    res = autonomous_residual_coefficients(ssm, ex.dae)
    for k, v in res.items():
        if k <= ssm.order:
            assert v < 1e-9, f"degree {k} residual {v}"


def test_conjugate_symmetry_of_coefficients(osc_none):
    _, _, _, ssm = osc_none
    for e, v in ssm.W.terms.items():
        vbar = ssm.W.terms[conj_exps(e)]
        assert np.max(np.abs(vbar - np.conj(v))) < 1e-12 * max(
            1.0, np.max(np.abs(v))
        )


def test_normal_form_keeps_only_resonant_monomials(osc_none):
    _, _, _, ssm = osc_none
    # m = 1: resonant monomials in row 0 are p^(j+1) pbar^j
    for e, v in ssm.R.terms.items():
        if sum(e) < 2:
            continue
        if v[0] != 0:
            assert e[0] == e[1] + 1
        if v[1] != 0:
            assert e[1] == e[0] + 1


def test_reduced_field_polar_form_matches(osc_none):
    _, _, _, ssm = osc_none
    from ssmrom.romdyn import polar_form

    pol = polar_form(ssm)
    rho, th = 0.17, 1.234
    p = ssm.polar_point([rho], [th])
    pdot = reduced_vector_field(ssm, p)[0]
    # rho_dot + i rho theta_dot = e^{-i th} pdot
    val = np.exp(-1j * th) * pdot
    rd, td = pol.rates([rho], [th])
    assert val.real == pytest.approx(rd[0], abs=1e-12)
    assert val.imag == pytest.approx(rho * td[0], abs=1e-12)


def test_error_scaling_with_radius(osc_none):
    # invariance error decays like rho^(order+1) at small radius
    ex, _, _, ssm = osc_none
    from ssmrom.diagnostics import invariance_error

    r1, r2 = 0.02, 0.04
    e1 = invariance_error(ssm, ex.dae, r1)
    e2 = invariance_error(ssm, ex.dae, r2)
    slope = np.log(e2 / e1) / np.log(r2 / r1)
    assert slope >= ssm.order


def test_nonautonomous_resonant_projection(osc_none):
    ex, spec, master, ssm = osc_none
    nssm = compute_nonautonomous_leading(ssm, ex.dae, omega=2.0, r=[1])
    assert nssm.s_plus[0] != 0
    assert nssm.s_plus[1] == 0
    assert nssm.s_minus[1] == np.conj(nssm.s_plus[0])
    # forced linear-level residual: the solved X0, S0 satisfy
    # (i w B - A) x+ = Fext/2 - B V s+
    L = 1j * 2.0 * ex.dae.B - ex.dae.A
    rhs = ex.dae.fext_shape / 2.0 - ex.dae.B @ (master.V @ nssm.s_plus)
    assert np.linalg.norm(L @ nssm.x_plus - rhs) < 1e-10


def test_nonautonomous_off_resonance_is_linear_frf(osc_none):
    ex, _, _, ssm = osc_none
    nssm = compute_nonautonomous_leading(ssm, ex.dae, omega=0.45)
    assert np.all(nssm.s_plus == 0)
    L = 1j * 0.45 * ex.dae.B - ex.dae.A
    x_expected = np.linalg.solve(L, ex.dae.fext_shape / 2.0)
    assert nssm.x_plus == pytest.approx(x_expected)


def test_order_too_low_rejected(osc_none):
    ex, _, master, _ = osc_none
    with pytest.raises(ValueError):
        compute_autonomous_ssm(ex.dae, master, 1)


def test_near_singular_complement_raises():
    # an artificial 2-dof system with lambda_2 ~ 2 lambda_1 where the
    # second mode is NOT selected: the degree-2 solve hits the complement
    sys = SecondOrderSystem(
        M=np.eye(2),
        C=np.diag([0.002, 0.004]),
        K=np.diag([1.0, 4.0 + 1e-9]),
        f_nl=None,
    )
    # add a coupling nonlinearity so F is nonzero
    from ssmrom.polytensor import MultiPolynomial

    terms = {(2, 0, 0, 0): [0.0, 1.0], (1, 1, 0, 0): [1.0, 0.0]}
    sys = SecondOrderSystem(
        M=sys.M, C=sys.C, K=sys.K, f_nl=MultiPolynomial(4, 2, terms)
    )
    dae = assemble_first_order(sys)
    spec = solve_pencil(dae)
    master = select_master(spec, [1])
    with pytest.raises(ManifoldError):
        compute_autonomous_ssm(dae, master, 3)
