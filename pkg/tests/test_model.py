import numpy as np
import pytest

from ssmrom.model import (
    HarmonicForcing,
    ModelError,
    SecondOrderSystem,
    assemble_first_order,
    index1_reduce,
    maggi_reduce,
    validate_system,
)
from ssmrom.models import build_example
from ssmrom.polytensor import MultiPolynomial


@pytest.fixture
def oscillator_cubic():
    return build_example("oscillator3d:cubic")


def test_unconstrained_assembly_blocks():
    ex = build_example("oscillator3d:none")
    sys, dae = ex.sys, ex.dae
    n = sys.n
    assert dae.N == 2 * n
    assert np.allclose(dae.A[:n, :n], -sys.K)
    assert np.allclose(dae.B[:n, :n], sys.C)
    assert np.allclose(dae.B[:n, n:], sys.M)
    assert np.allclose(dae.B[n:, :n], sys.M)
    assert np.allclose(dae.A[n:, n:], sys.M)


def test_constrained_assembly_structure(oscillator_cubic):
    dae = oscillator_cubic.dae
    sys = oscillator_cubic.sys
    assert dae.N == 7
    # multiplier rows of B are zero
    assert np.allclose(dae.B[6], 0.0)
    assert np.allclose(dae.A[6, :3], sys.G0)
    assert np.allclose(dae.A[:3, 6], -sys.G0[0])
    # constraint nonlinearity present: F row 7 carries -x1^3 - x2^3
    e1 = (3, 0, 0, 0, 0, 0, 0)
    assert dae.F.terms[e1][6] == pytest.approx(-1.0)


def test_constraint_coupling_term(oscillator_cubic):
    # -(G_nl)^T mu in the force rows: g = x3 - x1^3 - x2^3,
    # G_nl = (-3x1^2, -3x2^2, 0), so F row x1 has +3 x1^2 mu
    dae = oscillator_cubic.dae
    e = (2, 0, 0, 0, 0, 0, 1)
    assert dae.F.terms[e][0] == pytest.approx(3.0)


def test_linear_system_has_no_F():
    sys = SecondOrderSystem(M=np.eye(2), C=0.1 * np.eye(2), K=np.eye(2))
    dae = assemble_first_order(sys)
    assert dae.F is None


def test_linearization_matches_pencil(oscillator_cubic):
    # assembled (A, B) equal the pencil built directly from M, C, K, G0
    sys = oscillator_cubic.sys
    dae = oscillator_cubic.dae
    n, n_c = sys.n, sys.n_c
    A = np.zeros((7, 7))
    B = np.zeros((7, 7))
    A[:n, :n] = -sys.K
    A[:n, 2 * n:] = -sys.G0.T
    A[n:2 * n, n:2 * n] = sys.M
    A[2 * n:, :n] = sys.G0
    B[:n, :n] = sys.C
    B[:n, n:2 * n] = sys.M
    B[n:2 * n, :n] = sys.M
    assert np.array_equal(dae.A, A)
    assert np.array_equal(dae.B, B)


def test_redundant_constraints_rejected():
    sys = build_example("oscillator3d:cubic").sys
    G0 = np.vstack([sys.G0, sys.G0])
    g2 = MultiPolynomial(
        3, 2,
        {e: np.concatenate([v, v]) for e, v in sys.g_nl.terms.items()},
    )
    bad = SecondOrderSystem(
        M=sys.M, C=sys.C, K=sys.K, f_nl=sys.f_nl, G0=G0, g_nl=g2
    )
    with pytest.raises(ModelError, match="redundant"):
        assemble_first_order(bad)


def test_validate_passes_on_good_model(oscillator_cubic):
    rep = validate_system(oscillator_cubic.sys)
    assert rep.ok
    assert rep.g0_full_rank and rep.pencil_regular and rep.mass_spd


def test_validate_flags_duplicated_constraint():
    sys = build_example("oscillator3d:cubic").sys
    G0 = np.vstack([sys.G0, sys.G0])
    g2 = MultiPolynomial(
        3, 2,
        {e: np.concatenate([v, v]) for e, v in sys.g_nl.terms.items()},
    )
    bad = SecondOrderSystem(
        M=sys.M, C=sys.C, K=sys.K, f_nl=sys.f_nl, G0=G0, g_nl=g2
    )
    rep = validate_system(bad)
    assert not rep.ok
    assert not rep.g0_full_rank


def test_validate_flags_linear_term_in_fnl():
    terms = {(1, 0, 0, 0): [1.0, 0.0]}
    f_bad = MultiPolynomial(4, 2, terms)
    sys = SecondOrderSystem(
        M=np.eye(2), C=0.1 * np.eye(2), K=np.eye(2), f_nl=f_bad
    )
    rep = validate_system(sys)
    assert not rep.nonlinearity_degree_ok


# ----------------------------------------------------------------------
# Maggi reduction
# ----------------------------------------------------------------------
def test_maggi_dimension(oscillator_cubic):
    ode = maggi_reduce(oscillator_cubic.sys, alpha=5.0)
    assert ode.dim == 2 * 3 - 1


def test_maggi_unconstrained_is_identity():
    ex = build_example("oscillator3d:none")
    ode = maggi_reduce(ex.sys, alpha=5.0)
    assert ode.dim == 6
    z = np.concatenate([[0.01, -0.02, 0.03], [0.1, 0.0, -0.1]])
    # e equals xdot for the identity completion
    assert np.allclose(ode.xdot_of(z[:3], z[3:]), z[3:])


def test_maggi_inverse_identities(oscillator_cubic):
    sys = oscillator_cubic.sys
    ode = maggi_reduce(sys, alpha=5.0)
    x = np.array([0.05, -0.03, 0.02])
    Gam, Gch = ode._gammas(x)
    G = sys.G_eval(x)
    assert np.max(np.abs(G @ Gam)) < 1e-12
    assert np.max(np.abs(Gch @ G + Gam @ ode.Gcheck - np.eye(3))) < 1e-12


def test_maggi_linear_constraint_constant_coefficients():
    sys = build_example("oscillator3d:cubic").sys
    lin = SecondOrderSystem(
        M=sys.M, C=sys.C, K=sys.K, f_nl=sys.f_nl, G0=sys.G0, g_nl=None,
        forcing=sys.forcing,
    )
    ode = maggi_reduce(lin, alpha=5.0)
    z1 = np.zeros(5)
    z2 = np.concatenate([[0.1, -0.2, 0.05], [0.3, 0.1]])
    B1, A1, _ = ode.coefficient_matrices(z1)
    B2, A2, _ = ode.coefficient_matrices(z2)
    assert np.allclose(B1, B2)
    assert np.allclose(A1, A2)


def test_maggi_alpha_collision_rejected(oscillator_cubic):
    # |lambda_1| ~ 2.0 for the slow pair
    with pytest.raises(ModelError):
        maggi_reduce(oscillator_cubic.sys, alpha=abs(
            complex(-0.02, 1.99990000239)
        ))


# ----------------------------------------------------------------------
# index-1 reduction
# ----------------------------------------------------------------------
def test_index1_linear_constraint_drift():
    # zero nonlinearity, linear constraint, consistent IC
    M = np.eye(2)
    K = np.diag([4.0, 9.0])
    C = 0.01 * np.eye(2)
    G0 = np.array([[1.0, -1.0]])
    sys = SecondOrderSystem(M=M, C=C, K=K, G0=G0)
    ode = index1_reduce(sys, 20.0, 20.0)
    from scipy.integrate import solve_ivp

    y0 = np.array([0.1, 0.1, 0.0, 0.0])  # on the constraint, at rest
    sol = solve_ivp(lambda t, y: ode.rhs(t, y), (0, 50.0), y0,
                    rtol=1e-9, atol=1e-11, method="Radau")
    g = sol.y[0] - sol.y[1]
    assert np.max(np.abs(g)) < 1e-7


def test_index1_stabilization_decay():
    # inconsistent IC: ||g|| follows the stabilized dynamics
    # gdd + a gd + b g = 0 with a = b = 20 (overdamped roots)
    M = np.eye(2)
    K = np.diag([4.0, 9.0])
    sys = SecondOrderSystem(M=M, C=np.zeros((2, 2)), K=K,
                            G0=np.array([[1.0, -1.0]]))
    alpha = beta = 20.0
    ode = index1_reduce(sys, alpha, beta)
    from scipy.integrate import solve_ivp

    d0 = 0.05
    y0 = np.array([0.1 + d0, 0.1, 0.0, 0.0])
    t_eval = np.linspace(0, 2.0, 60)
    sol = solve_ivp(lambda t, y: ode.rhs(t, y), (0, 2.0), y0,
                    rtol=1e-10, atol=1e-12, t_eval=t_eval, method="Radau")
    g = sol.y[0] - sol.y[1]
    # scalar linear ODE solution with g(0) = d0, gdot(0) = 0
    r = np.roots([1.0, alpha, beta])
    c2 = d0 * r[0] / (r[0] - r[1])
    c1 = d0 - c2
    g_exact = c1 * np.exp(r[0] * t_eval) + c2 * np.exp(r[1] * t_eval)
    assert np.max(np.abs(g - g_exact.real)) < 1e-6


def test_index1_multiplier_residual(oscillator_cubic):
    # recovered mu satisfies the second-order balance
    sys = oscillator_cubic.sys
    ode = index1_reduce(sys, 20.0, 20.0)
    rng = np.random.default_rng(5)
    from ssmrom.fullsim import consistent_ic

    x0, xd0 = consistent_ic(sys, 0.2 * rng.standard_normal(3),
                            0.2 * rng.standard_normal(3))
    y = np.concatenate([x0, xd0])
    t = 0.37
    rhs = ode.rhs(t, y)
    mu = ode.multipliers(t, y)
    xdd = rhs[3:]
    res = (sys.M @ xdd + sys.C @ xd0 + sys.K @ x0
           + sys.f_eval(x0, xd0) + sys.G_eval(x0).T @ mu)
    assert np.max(np.abs(res)) < 1e-9


def test_forcing_validation():
    with pytest.raises(ModelError):
        HarmonicForcing(shape=np.ones(2), epsilon=-0.1)
