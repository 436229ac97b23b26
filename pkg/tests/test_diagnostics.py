import numpy as np
import pytest

from ssmrom.diagnostics import (
    invariance_error,
    orbit_residual,
    sample_sphere,
    trajectory_compare,
)
from ssmrom.manifold import (
    compute_autonomous_ssm,
    compute_nonautonomous_leading,
)
from ssmrom.model import SecondOrderSystem, assemble_first_order
from ssmrom.models import build_example
from ssmrom.spectral import select_master, solve_pencil


@pytest.fixture(scope="module")
def slider():
    ex = build_example("pendulum_slider")
    spec = solve_pencil(ex.dae)
    master = select_master(spec, [1, 2])
    return ex, master


def test_sampling_grids():
    P = sample_sphere(2, 1.5, 4, 6)
    assert P.shape == (4 * 36, 4)
    # every sample sits on the sphere and is conjugate paired
    r = np.sqrt(np.abs(P[:, 0]) ** 2 + np.abs(P[:, 2]) ** 2)
    assert r == pytest.approx(np.full(P.shape[0], 1.5))
    assert P[:, 1] == pytest.approx(np.conj(P[:, 0]))
    P1 = sample_sphere(1, 0.7, 4, 8)
    assert P1.shape == (8, 2)
    assert np.abs(P1[:, 0]) == pytest.approx(np.full(8, 0.7))


def test_invariance_error_linear_system_machine_zero():
    sys = SecondOrderSystem(
        M=np.eye(2), C=np.diag([0.02, 0.04]), K=np.diag([1.0, 9.0])
    )
    dae = assemble_first_order(sys)
    spec = solve_pencil(dae)
    ssm = compute_autonomous_ssm(dae, select_master(spec, [1]), 5)
    assert invariance_error(ssm, dae, 0.5) < 1e-12


def test_invariance_error_power_law(slider):
    ex, master = slider
    ssm = compute_autonomous_ssm(ex.dae, master, 3)
    v = np.array([0.1, 0.2, 0.4, 0.8])
    errs = np.array([invariance_error(ssm, ex.dae, x) for x in v])
    slope = np.polyfit(np.log(v), np.log(errs), 1)[0]
    assert slope >= 3.0


def test_invariance_error_monotone_in_order(slider):
    ex, master = slider
    errs = []
    for order in (3, 5, 7):
        ssm = compute_autonomous_ssm(ex.dae, master, order)
        errs.append(invariance_error(ssm, ex.dae, 1.0))
    assert errs[1] < errs[0] and errs[2] < errs[1]


def test_invariance_error_summation_order_invariant(slider):
    # reindexing the sampling grids must not change the average
    ex, master = slider
    ssm = compute_autonomous_ssm(ex.dae, master, 3)
    from ssmrom.diagnostics import _residual_batch

    P = sample_sphere(2, 0.5, 5, 8)
    norms = _residual_batch(ssm, ex.dae, P)
    rng = np.random.default_rng(0)
    perm = rng.permutation(P.shape[0])
    norms2 = _residual_batch(ssm, ex.dae, P[perm])
    assert np.sum(norms) == pytest.approx(np.sum(norms2), rel=1e-12)


def test_orbit_residual_trivial_zero():
    ex = build_example("oscillator3d:none")
    spec = solve_pencil(ex.dae)
    ssm = compute_autonomous_ssm(ex.dae, select_master(spec, [1]), 5)
    nssm = compute_nonautonomous_leading(ssm, ex.dae, 2.0, r=[1])
    hist = orbit_residual(nssm, ex.dae, np.zeros(2), [1], 0.0, 2.0)
    assert hist.max < 1e-10 * np.linalg.norm(ex.dae.A)


def test_orbit_residual_scales_linearly_in_epsilon():
    ex = build_example("oscillator3d:none")
    spec = solve_pencil(ex.dae)
    ssm = compute_autonomous_ssm(ex.dae, select_master(spec, [1]), 11)
    nssm = compute_nonautonomous_leading(ssm, ex.dae, 2.0, r=[1])
    from ssmrom.romdyn import frc_continue

    br = frc_continue(nssm, (1.80, 2.15), 0.03, step=0.005)[0]
    sn = max((s for s in br.special_points if s["type"] == "SN"),
             key=lambda s: np.hypot(*s["y"]))
    h1 = orbit_residual(nssm, ex.dae, sn["y"], [1], 0.03, sn["omega"])
    h2 = orbit_residual(nssm, ex.dae, sn["y"], [1], 0.005, sn["omega"])
    # same orbit, smaller eps: residual drops by ~eps ratio at leading order
    ratio = h1.max / h2.max
    assert 3.0 < ratio < 12.0


def test_trajectory_compare_identical_is_zero():
    t = np.linspace(0, 1, 50)
    Z = np.column_stack([np.sin(3 * t), np.cos(2 * t)])
    m = trajectory_compare(t, Z, t, Z)
    assert m.rel_sup == 0.0
    assert m.rel_rms == 0.0


def test_trajectory_compare_interpolates_different_grids():
    t1 = np.linspace(0, 1, 77)
    t2 = np.linspace(0, 1, 191)
    f = lambda t: np.column_stack([np.sin(3 * t), t**2])
    m = trajectory_compare(t1, f(t1), t2, f(t2))
    assert m.rel_sup < 1e-3


def test_trajectory_compare_detects_offset():
    t = np.linspace(0, 1, 60)
    A = np.column_stack([np.sin(3 * t)])
    B = A + 0.05
    m = trajectory_compare(t, A, t, B, dofs=[0])
    assert m.rel_sup == pytest.approx(0.05 / np.max(np.abs(B)), rel=1e-6)


def test_off_manifold_ic_attracted():
    # a perturbed IC is attracted to the slow manifold: the off-manifold
    # component (complement-mode content relative to the manifold point
    # over the projected reduced coordinates) decays at the fast rate
    ex = build_example("oscillator3d:none")
    spec = solve_pencil(ex.dae)
    master = select_master(spec, [1])
    ssm = compute_autonomous_ssm(ex.dae, master, 9)
    from ssmrom.fullsim import simulate_index1
    from ssmrom.model import index1_reduce

    p0 = ssm.polar_point([0.15], [0.3])
    z0 = ssm.evaluate(p0).real
    z0_off = z0.copy()
    z0_off[2] += 0.03      # push along a fast mode
    ode = index1_reduce(ex.sys)
    te = np.linspace(0, 40.0, 400)
    full = simulate_index1(ode, z0_off, (0, 40.0), t_eval=te)
    Z = np.hstack([full.x, full.xd])
    B = ex.dae.B
    Uc = np.column_stack(
        [u for k, (_, _, u) in enumerate(spec.finite) if k >= 2]
    )
    dist = np.zeros(te.size)
    for k in range(te.size):
        p_hat = master.U.T @ (B @ Z[k])
        on_manifold = ssm.W.eval(p_hat).real
        dist[k] = np.linalg.norm(Uc.T @ (B @ (Z[k] - on_manifold)))
    early = np.max(dist[te < 3.0])
    late = np.max(dist[te > 30.0])
    assert late < 0.05 * early
