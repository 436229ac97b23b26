import numpy as np
import pytest

from ssmrom.models import build_example
from ssmrom.recast import (
    BinOp,
    Func,
    Num,
    ParseError,
    RecastError,
    TrigMechanicalSystem,
    Var,
    parse_expression,
    polynomialize,
    verify_recast,
)


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------
def test_parse_sin():
    tree = parse_expression("sin(phi)")
    assert isinstance(tree, Func) and tree.name == "sin"
    assert isinstance(tree.arg, Var) and tree.arg.name == "phi"


def test_parse_pendulum_rhs():
    tree = parse_expression("-c*w - sin(phi)")
    env = {"c": 0.1, "w": 2.0, "phi": 0.3}
    assert tree.eval(env) == pytest.approx(-0.1 * 2.0 - np.sin(0.3))


def test_parse_slider_constraint_term():
    tree = parse_expression("0.5*l*cos(phi2)")
    assert tree.eval({"l": 2.0, "phi2": 0.7}) == pytest.approx(np.cos(0.7))


def test_parse_precedence():
    tree = parse_expression("2 + 3 * 4 ^ 2")
    assert tree.eval({}) == pytest.approx(50.0)
    tree = parse_expression("-2^2")          # unary binds looser than ^
    assert tree.eval({}) == pytest.approx(-4.0)


def test_parse_reports_offsets():
    with pytest.raises(ParseError) as err:
        parse_expression("a + (b * c")
    assert "byte" in str(err.value)
    with pytest.raises(ParseError):
        parse_expression("foo(x)")           # unknown function
    with pytest.raises(ParseError):
        parse_expression("a + q", known={"a"})


def test_tree_differentiation():
    tree = parse_expression("sin(x)*x^2")
    d = tree.diff("x")
    for v in (0.3, -1.2):
        expected = np.cos(v) * v**2 + np.sin(v) * 2 * v
        assert d.eval({"x": v}) == pytest.approx(expected)


# ----------------------------------------------------------------------
# polynomialization
# ----------------------------------------------------------------------
def test_pendulum_recast_structure():
    ex = build_example("pendulum", c=0.1)
    dae, plan = ex.dae, ex.plan
    assert dae.N == 4
    assert not plan.identity
    assert list(plan.angles) == ["phi"]
    # one differential and one algebraic closure
    assert len(plan.differential_closures) == 1
    assert len(plan.algebraic_closures) == 1
    # origin is a fixed point: no constant terms anywhere
    if dae.F is not None:
        assert all(sum(e) >= 2 for e in dae.F.terms)


def test_slider_recast_is_15_dimensional():
    ex = build_example("pendulum_slider")
    assert ex.dae.N == 15
    assert ex.dae.layout.n == 5
    assert ex.dae.layout.n_c == 3
    assert ex.dae.layout.n_aux == 1


def test_already_polynomial_identity_plan():
    sys = TrigMechanicalSystem(
        coords=["x"], speeds=["v"], multipliers=[],
        M=np.array([[1.0]]),
        lhs=[BinOp("+", BinOp("*", Num(0.1), Var("v")),
                   BinOp("^", Var("x"), Num(3.0)))],
        shape=np.array([1.0]),
    )
    dae, plan = polynomialize(sys)
    assert plan.identity
    assert dae.N == 2
    assert dae.F.terms[(3, 0)][0] == pytest.approx(-1.0)


def test_nested_transcendental_rejected():
    sys = TrigMechanicalSystem(
        coords=["x"], speeds=["v"], multipliers=[],
        M=np.array([[1.0]]),
        lhs=[Func("sin", Func("sin", Var("x")))],
    )
    with pytest.raises(RecastError):
        polynomialize(sys)


def test_constant_offset_rejected():
    sys = TrigMechanicalSystem(
        coords=["x"], speeds=["v"], multipliers=[],
        M=np.array([[1.0]]),
        lhs=[BinOp("+", Var("x"), Num(1.0))],
    )
    with pytest.raises(RecastError, match="offset"):
        polynomialize(sys)


def test_recast_spectrum_artifacts():
    # one extra zero and one extra infinite eigenvalue per recast angle
    from ssmrom.spectral import solve_pencil

    ex = build_example("pendulum", c=0.1)
    spec = solve_pencil(ex.dae)
    lam = spec.finite_eigenvalues
    assert np.sum(np.abs(lam) < 1e-10) == 1
    assert spec.infinite_count == 1


# ----------------------------------------------------------------------
# co-simulation
# ----------------------------------------------------------------------
def test_pendulum_cosimulation_exact():
    ex = build_example("pendulum", c=0.1)
    dev, sol_r, _ = verify_recast(
        lambda t, y: ex.reference_ode(t, y), ex.dae, ex.plan, ex.trig,
        np.array([1.0]), np.array([0.0]), (0.0, 10.0),
    )
    assert dev < 1e-6
    # auxiliary variables track sin/1-cos along the trajectory
    phi = sol_r.y[0]
    us, uc = sol_r.y[2], sol_r.y[3]
    drift = np.abs(us - np.sin(phi)) + np.abs(uc - (1 - np.cos(phi)))
    assert np.max(drift) < 1e-8


def test_pendulum_cosimulation_large_angle():
    # the closure is exact, not a Taylor truncation
    ex = build_example("pendulum", c=0.1)
    dev, _, _ = verify_recast(
        lambda t, y: ex.reference_ode(t, y), ex.dae, ex.plan, ex.trig,
        np.array([3.0]), np.array([0.0]), (0.0, 10.0),
    )
    assert dev < 1e-6


def test_zero_ic_stays_zero():
    ex = build_example("pendulum", c=0.1)
    dev, sol_r, _ = verify_recast(
        lambda t, y: ex.reference_ode(t, y), ex.dae, ex.plan, ex.trig,
        np.array([0.0]), np.array([0.0]), (0.0, 5.0),
    )
    assert dev == 0.0
    assert np.max(np.abs(sol_r.y)) == 0.0
