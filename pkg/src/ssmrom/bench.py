"""Reproduction harness: runs the headline experiments end to end and
reports pass/fail with timings.

Each case is a function returning a dict of measured values; the
registry attaches expectations with provenance tags:

* published -- value taken from the source system's reported results,
* derived   -- computed here by an independent oracle,
* trivial   -- structural fact.

Reduced-coordinate amplitudes from the published tables are translated
into this package's normalization through a one-parameter scale fit of
the cubic radial coefficient (the eigenvector scale of the source data
is not recoverable otherwise); physical-coordinate quantities are
compared directly.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .diagnostics import invariance_error, orbit_residual, trajectory_compare
from .fullsim import consistent_ic, simulate_index1, steady_state_orbit
from .manifold import compute_autonomous_ssm, compute_nonautonomous_leading
from .model import SecondOrderSystem, index1_reduce
from .models import build_example
from .romdyn import (
    backbone,
    branch_switch,
    fixed_point_at,
    frc_continue,
    integrate_rom,
    polar_form,
)
from .spectral import resonance_report, select_master, solve_pencil

__all__ = ["BenchCase", "BenchReport", "run_suite", "CASES"]

# published cubic radial coefficients used as scale-fit anchors
RADIAL_CUBIC = {
    "oscillator3d:none": -0.2387,
    "oscillator3d:cubic": -0.02188,
    "oscillator3d:spherical": -0.05085,
    "pendulum_chain": -0.004259,
}

OSC_ROM_TABLES = {
    "oscillator3d:none": (
        {1: -0.02, 3: -0.2387, 5: 1.08, 7: -4.408, 9: 27.75, 11: -71.08,
         13: 50.58},
        {0: 2.0, 2: -1.206, 4: -0.3417, 6: -4.035, 8: -23.49, 10: 121.5,
         12: -1370.0},
    ),
    "oscillator3d:cubic": (
        {1: -0.02, 3: -0.02188, 5: 0.02972, 7: -1.029, 9: 5.913, 11: -27.97,
         13: 214.2},
        {0: 2.0, 2: 0.8168, 4: -8.958, 6: 3.485, 8: -66.98, 10: -7.963,
         12: -882.8},
    ),
    "oscillator3d:spherical": (
        {1: -0.02, 3: -0.05085, 5: 0.2779, 7: -1.945, 9: 5.725, 11: 26.99,
         13: 1068.0},
        {0: 2.0, 2: 4.421, 4: -3.666, 6: -88.02, 8: 1341.0, 10: -12060.0,
         12: 55620.0},
    ),
}


def _ssm_for(example, pairs, order, tol_res=0.05):
    ex = build_example(example)
    spec = solve_pencil(ex.dae)
    master = select_master(spec, pairs, tol_res=tol_res)
    ssm = compute_autonomous_ssm(ex.dae, master, order)
    return ex, spec, master, ssm


def scale_from_published(ssm, published_cubic):
    """|sigma| with p_here = sigma * p_published, fitted from the cubic
    radial coefficient of the single-pair reduced dynamics."""
    ours = polar_form(ssm).radial_series()[3]
    s2 = published_cubic / ours
    if s2 <= 0:
        raise RuntimeError("cubic coefficient sign mismatch in scale fit")
    return float(np.sqrt(s2))


# ----------------------------------------------------------------------
# case functions (shared with the acceptance tests)
# ----------------------------------------------------------------------
def case_eig_oscillator():
    out = {}
    t0 = time.time()
    for name in ("oscillator3d:cubic", "oscillator3d:spherical"):
        ex = build_example(name)
        spec = solve_pencil(ex.dae)
        lam = spec.finite_eigenvalues
        osc = lam[lam.imag > 0]
        osc = osc[np.argsort(-osc.real)]
        key = name.split(":")[1]
        out[f"{key}_lam1"] = complex(osc[0])
        out[f"{key}_lam2"] = complex(osc[1])
        out[f"{key}_inf"] = spec.infinite_count
    out["runtime_s"] = time.time() - t0
    return out


def case_eig_slider():
    t0 = time.time()
    ex = build_example("pendulum_slider")
    spec = solve_pencil(ex.dae)
    lam = spec.finite_eigenvalues
    osc = lam[lam.imag > 0]
    osc = osc[np.argsort(-osc.real)]
    return {
        "lam1": complex(osc[0]),
        "lam2": complex(osc[1]),
        "zero_count": int(np.sum(np.abs(lam) < 1e-8)),
        "infinite": spec.infinite_count,
        "runtime_s": time.time() - t0,
    }


def case_pendulum_closed_form(c=0.1):
    ex = build_example("pendulum", c=c)
    spec = solve_pencil(ex.dae)
    lam = spec.finite_eigenvalues
    osc = lam[lam.imag > 0]
    exact = complex(-c / 2.0, np.sqrt(1 - c**2 / 4.0))
    return {
        "lam_osc": complex(osc[0]),
        "exact": exact,
        "error": float(abs(osc[0] - exact)),
        "zero_count": int(np.sum(np.abs(lam) < 1e-10)),
        "infinite": spec.infinite_count,
    }


def case_theorem4(alpha=5.0):
    from .spectral import spectrum_equivalence_check

    exc = build_example("oscillator3d:cubic")
    lin = SecondOrderSystem(
        M=exc.sys.M, C=exc.sys.C, K=exc.sys.K, f_nl=exc.sys.f_nl,
        G0=exc.sys.G0, g_nl=None, forcing=exc.sys.forcing,
    )
    rep = spectrum_equivalence_check(lin, alpha=alpha)
    return {
        "max_eig_mismatch": rep.max_eig_mismatch,
        "spurious_count": int(rep.spurious.size),
        "spurious_at_minus_alpha": bool(rep.spurious_ok),
        "vector_mismatch": rep.max_vector_mismatch,
        "passed": rep.passed,
    }


def case_rom_coefficients():
    """O(13) polar tables of the three oscillator variants against the
    published values, after one scale fit per variant."""
    out = {}
    signs = []
    for name, (prho, pth) in OSC_ROM_TABLES.items():
        _, _, _, ssm = _ssm_for(name, [1], 13)
        pol = polar_form(ssm)
        rs, fs = pol.radial_series(), pol.frequency_series()
        s2 = prho[3] / rs[3]
        key = name.split(":")[1]
        out[f"{key}_scale_sq"] = float(s2)
        out[f"{key}_rho1"] = float(rs[1])
        out[f"{key}_freq0"] = float(fs[0])
        out[f"{key}_th2_scaled"] = float(fs[2] * s2)
        worst = 0.0
        for k, val in prho.items():
            if k == 1:
                continue
            ours = rs[k] * s2 ** ((k - 1) // 2)
            worst = max(worst, abs(ours - val) / abs(val))
        for k, val in pth.items():
            if k == 0:
                continue
            ours = fs[k] * s2 ** (k // 2)
            worst = max(worst, abs(ours - val) / abs(val))
        out[f"{key}_worst_rel"] = float(worst)
        signs.append(np.sign(fs[2]))
    out["th2_sign_pattern"] = tuple(int(s) for s in signs)
    return out


# ----------------------------------------------------------------------
# conservative backbone oracle (shooting on the undamped full system)
# ----------------------------------------------------------------------
def _undamped(sys):
    return SecondOrderSystem(
        M=sys.M, C=0 * sys.C, K=sys.K, f_nl=sys.f_nl, G0=sys.G0,
        g_nl=sys.g_nl, forcing=sys.forcing,
    )


def _solve_constrained_coord(sys, x1, x2):
    x3 = 0.0
    for _ in range(60):
        x = np.array([x1, x2, x3])
        g = sys.g_eval(x)[0]
        if abs(g) < 1e-14:
            break
        x3 -= g / sys.G_eval(x)[0, 2]
    return x3


def conservative_orbit(sys, ode, a, T_guess, free_guess):
    """Rest-to-rest shooting for one conservative periodic orbit.

    Starts from rest at x1 = a; the free configuration entries and the
    half period solve for vanishing velocities at the far turning point
    (time reversibility then closes the orbit).  Returns the orbit's
    peak |x1|, its frequency and the converged unknowns."""
    nc = sys.n_c

    def make_ic(u):
        if nc == 0:
            x0 = np.array([a, u[0], u[1]])
        else:
            x0 = np.array([a, u[0], _solve_constrained_coord(sys, a, u[0])])
        return np.concatenate([x0, np.zeros(3)])

    def integrate(v, dense=False):
        return solve_ivp(
            lambda t, y: ode.rhs(t, y), (0.0, v[-1]), make_ic(v[:-1]),
            rtol=1e-10, atol=1e-12, method="DOP853", dense_output=dense,
        )

    def resid(v):
        y = integrate(v).y[:, -1]
        return y[3:6] if nc == 0 else np.array([y[3], y[4]])

    v = np.array(list(free_guess) + [T_guess])
    for _ in range(10):
        r = resid(v)
        if np.linalg.norm(r) < 1e-9 * max(a, 0.01):
            break
        J = np.zeros((len(r), len(v)))
        h = 1e-7
        for k in range(len(v)):
            dv = np.zeros_like(v)
            dv[k] = h
            J[:, k] = (resid(v + dv) - resid(v - dv)) / (2 * h)
        v = v + np.linalg.lstsq(J, -r, rcond=None)[0]
    sol = integrate(v, dense=True)
    ts = np.linspace(0.0, v[-1], 300)
    amp = float(np.max(np.abs(sol.sol(ts)[0])))
    return amp, np.pi / v[-1], v, float(np.linalg.norm(resid(v)))


def case_backbone_conservative(levels=17):
    """Damped backbones against shooting orbits of the undamped systems.

    Rest displacements span the window whose orbit amplitudes stay inside
    the converged backbone range."""
    rho_max_pub = {"oscillator3d:none": 0.33, "oscillator3d:cubic": 0.33,
                   "oscillator3d:spherical": 0.22}
    out = {}
    t0 = time.time()
    for name, rho_pub in rho_max_pub.items():
        ex, _, _, ssm = _ssm_for(name, [1], 13)
        sigma = scale_from_published(ssm, RADIAL_CUBIC[name])
        rr = np.linspace(0.01, sigma * rho_pub, 80)
        bb = backbone(ssm, rr, dof=0)
        A_max = bb.amplitude[-1]
        usys = _undamped(ex.sys)
        uode = index1_reduce(usys, 20.0, 20.0)
        pairs = []
        v_prev = None
        for a in np.linspace(0.05 * A_max, 0.70 * A_max, levels):
            om_rom = float(np.interp(a, bb.amplitude, bb.omega))
            guess = (
                list(v_prev[:-1]) if v_prev is not None
                else ([0.0] if usys.n_c else [0.0, 0.0])
            )
            amp, om_c, v_prev, res = conservative_orbit(
                usys, uode, a, np.pi / om_rom, guess
            )
            if amp <= A_max and res < 1e-7:
                om_r = float(np.interp(amp, bb.amplitude, bb.omega))
                pairs.append((amp, om_c, om_r))
        key = name.split(":")[1]
        out[f"{key}_levels"] = len(pairs)
        out[f"{key}_worst_rel"] = max(
            abs(r - c) / c for _, c, r in pairs
        )
    out["runtime_s"] = time.time() - t0
    return out


def case_invariance_trajectory():
    """Same-IC comparison of the mapped reduced trajectory against the
    full index-1 simulation over three slow periods."""
    out = {}
    for name, rho_pub, theta in (
        ("oscillator3d:none", 0.35, 0.5),
        ("oscillator3d:cubic", 0.35, 0.5),
    ):
        ex, _, _, ssm = _ssm_for(name, [1], 13)
        sigma = scale_from_published(ssm, RADIAL_CUBIC[name])
        p0 = ssm.polar_point([sigma * rho_pub], [theta])
        z0 = ssm.evaluate(p0).real
        n = ex.sys.n
        x0, xd0 = consistent_ic(ex.sys, z0[:n], z0[n:2 * n])
        ode = index1_reduce(ex.sys, 20.0, 20.0)
        Ts = 3 * 2 * np.pi / 1.9999
        te = np.linspace(0.0, Ts, 500)
        rom = integrate_rom(ssm, p0, (0.0, Ts), t_eval=te)
        Z = rom.physical(ssm)
        full = simulate_index1(
            ode, np.concatenate([x0, xd0]), (0.0, Ts), t_eval=te
        )
        mets = trajectory_compare(te, Z[:, :n].real, full.t, full.x)
        out[name.split(":")[1] + "_rel_sup"] = mets.rel_sup

    ex, _, _, ssm = _ssm_for("pendulum_chain", [1], 13)
    sigma = scale_from_published(ssm, RADIAL_CUBIC["pendulum_chain"])
    p0 = ssm.polar_point([sigma * 0.8], [3.0])
    z0 = ssm.evaluate(p0).real
    lay = ex.dae.layout
    x0, xd0 = consistent_ic(ex.full, z0[lay.x], z0[lay.xd])
    ode = index1_reduce(ex.full, 20.0, 20.0)
    Ts = 3 * 2 * np.pi / 1.994
    te = np.linspace(0.0, Ts, 400)
    rom = integrate_rom(ssm, p0, (0.0, Ts), t_eval=te)
    Z = rom.physical(ssm)
    full = simulate_index1(
        ode, np.concatenate([x0, xd0]), (0.0, Ts), t_eval=te,
        tol=1e-8, method="BDF", frozen_jacobian=True,
    )
    dofs = [0, ex.dof_names["phi41"], ex.dof_names["y41"]]
    mets = trajectory_compare(te, Z[:, :ex.full.n].real, full.t, full.x,
                              dofs=dofs)
    out["chain_rel_sup"] = mets.rel_sup
    out["chain_g_drift"] = float(full.g_norm.max())
    return out


def case_inverr_powerlaw():
    """Invariance-error scaling of the slider's 4-dimensional manifold."""
    ex = build_example("pendulum_slider")
    spec = solve_pencil(ex.dae)
    master = select_master(spec, [1, 2])
    out = {}
    varrho = np.array([0.1, 0.18, 0.3, 0.55, 1.0])
    ssm3 = compute_autonomous_ssm(ex.dae, master, 3)
    sigma = float(np.sqrt(2.125e-3 / polar_form(ssm3).radial_series(1)[3]))
    for order in (3, 5):
        ssm = compute_autonomous_ssm(ex.dae, master, order)
        errs = np.array(
            [invariance_error(ssm, ex.dae, v) for v in varrho]
        )
        out[f"slope_order{order}"] = float(
            np.polyfit(np.log(varrho), np.log(errs), 1)[0]
        )
    rho_ref = sigma * 1.0   # published varrho = 1 in this normalization
    errs_at_one = []
    for order in (3, 5, 7, 9):
        ssm = compute_autonomous_ssm(ex.dae, master, order)
        errs_at_one.append(invariance_error(ssm, ex.dae, rho_ref))
    out["errors_at_rho1"] = tuple(float(e) for e in errs_at_one)
    out["monotone_at_rho1"] = bool(
        all(errs_at_one[i + 1] < errs_at_one[i]
            for i in range(len(errs_at_one) - 1))
    )
    out["order3_sufficient_at_rho1"] = bool(errs_at_one[0] <= 0.01)
    out["scale"] = sigma
    return out


def _slider_forced(order, omega_ref=1.8522):
    ex = build_example("pendulum_slider")
    spec = solve_pencil(ex.dae)
    master = select_master(spec, [1, 2])
    ssm = compute_autonomous_ssm(ex.dae, master, order)
    rep = resonance_report(spec, master, 3, omega=omega_ref)
    nssm = compute_nonautonomous_leading(ssm, ex.dae, omega_ref,
                                         r=rep.external_r)
    return ex, nssm, rep.external_r


def case_frc_slider(omegas=(1.74, 1.78, 1.82, 1.92, 1.97), eps=0.08,
                    delta=1e-4, tol=1e-8):
    """O(7) reduced FRC of the slider against steady-state integration of
    the trigonometric full model, sampled away from the fold window."""
    ex, nssm, r = _slider_forced(7)
    ode = index1_reduce(ex.full)
    worst_x1 = worst_phi = 0.0
    rows = []
    for om in omegas:
        pt = fixed_point_at(nssm, om, eps, dofs=(0, 4))
        orb = steady_state_orbit(ode, om, eps, delta=delta, tol=tol,
                                 max_cycles=4000, frozen_jacobian=True)
        if not orb.converged:
            raise RuntimeError(f"steady state did not converge at {om}")
        rel_x1 = abs(pt.amplitudes[0] - orb.amplitude(0)) / orb.amplitude(0)
        rel_phi = abs(pt.amplitudes[4] - orb.amplitude(4)) / orb.amplitude(4)
        worst_x1 = max(worst_x1, rel_x1)
        worst_phi = max(worst_phi, rel_phi)
        rows.append((om, pt.amplitudes[0], orb.amplitude(0), rel_x1,
                     pt.amplitudes[4], orb.amplitude(4), rel_phi))
    return {"worst_x1_rel": worst_x1, "worst_phi2_rel": worst_phi,
            "rows": rows}


def case_frc_oscillator(omegas=(1.90, 1.95, 2.00, 2.05, 2.10), eps=0.01,
                        delta=1e-4, tol=1e-8):
    ex, _, master, ssm = _ssm_for("oscillator3d:none", [1], 3)
    nssm = compute_nonautonomous_leading(ssm, ex.dae, 2.0, r=[1])
    ode = index1_reduce(ex.sys)
    worst = 0.0
    rows = []
    for om in omegas:
        pt = fixed_point_at(nssm, om, eps, dofs=(0,))
        orb = steady_state_orbit(ode, om, eps, delta=delta, tol=tol,
                                 max_cycles=4000)
        rel = abs(pt.amplitudes[0] - orb.amplitude(0)) / orb.amplitude(0)
        worst = max(worst, rel)
        rows.append((om, pt.amplitudes[0], orb.amplitude(0), rel))
    return {"worst_rel": worst, "rows": rows}


def case_residual_at_sn(eps=0.03, order=11):
    """The forced-invariance residual must flag the leading-order
    truncation at moderate forcing: its maximum along the high-amplitude
    fold orbit exceeds the 0.01 threshold."""
    ex, _, master, ssm = _ssm_for("oscillator3d:none", [1], order)
    nssm = compute_nonautonomous_leading(ssm, ex.dae, 2.0, r=[1])
    br = frc_continue(nssm, (1.80, 2.15), eps, dofs=(0,), step=0.005)[0]
    sns = [s for s in br.special_points if s["type"] == "SN"]
    if not sns:
        raise RuntimeError("no saddle-node detected on the forced branch")
    sn = max(sns, key=lambda s: np.hypot(*s["y"]))
    hist = orbit_residual(nssm, ex.dae, sn["y"], [1], eps, sn["omega"])
    hist_small = orbit_residual(nssm, ex.dae, sn["y"], [1], eps / 6.0,
                                sn["omega"])
    return {
        "sn_omega": sn["omega"],
        "max_residual": hist.max,
        "max_residual_small_eps": hist_small.max,
        "n_sn": len(sns),
    }


def case_divider_structure(forcing=5.0):
    ex = build_example("divider_rom", forcing=forcing)
    rom = ex.rom
    br = frc_continue(rom, (44.3, 46.4), epsilon=1.0, r=[0.5, 1.0],
                      step=0.01, max_step=0.05)[0]
    bps = [s for s in br.special_points if s["type"] == "BP"]
    rho1_main = max(p.rho[0] for p in br.points)
    st = np.array([p.stable for p in br.points])
    out = {
        "n_bp": len(bps),
        "bp_omegas": tuple(round(s["omega"], 4) for s in bps),
        "rho1_main_max": float(rho1_main),
        "main_stability_changes": int(np.sum(st[1:] != st[:-1])),
    }
    if len(bps) == 2:
        lo, hi = sorted(s["omega"] for s in bps)
        out["window_brackets_resonance"] = bool(lo < 45.3 < hi)
        # unstable exactly between the branch points
        mid = [p for p in br.points if lo + 1e-3 < p.omega < hi - 1e-3]
        out["unstable_inside"] = bool(all(not p.stable for p in mid))
        sec = branch_switch(rom, br, bp_index=0, step=0.005)
        sns = [s for s in sec.special_points if s["type"] == "SN"]
        st2 = np.array([p.stable for p in sec.points])
        out["secondary_rho1_max"] = float(max(p.rho[0] for p in sec.points))
        out["secondary_n_sn"] = len(sns)
        out["secondary_stability_changes"] = int(np.sum(st2[1:] != st2[:-1]))
        out["secondary_fundamental_ratio"] = float(
            sec.fundamental_frequency(45.4) / 45.4
        )
        out["main_fundamental_ratio"] = float(
            br.fundamental_frequency(45.4) / 45.4
        )
    return out


def case_recast_exactness(c=0.1):
    from .recast import verify_recast

    ex = build_example("pendulum", c=c)
    dev, _, _ = verify_recast(
        lambda t, y: ex.reference_ode(t, y), ex.dae, ex.plan, ex.trig,
        np.array([1.0]), np.array([0.0]), (0.0, 10.0),
    )
    dev_large, _, _ = verify_recast(
        lambda t, y: ex.reference_ode(t, y), ex.dae, ex.plan, ex.trig,
        np.array([3.0]), np.array([0.0]), (0.0, 10.0),
    )
    return {"deviation": dev, "deviation_large_angle": dev_large}


def _chain_sweep_one(args):
    omega, eps, delta, tol = args
    ex = build_example("pendulum_chain")
    ode = index1_reduce(ex.full, 20.0, 20.0)
    orb = steady_state_orbit(ode, omega, eps, delta=delta, tol=tol,
                             method="BDF", frozen_jacobian=True)
    return (omega, orb.cycles, orb.converged,
            orb.amplitude(ex.dof_names["phi41"]))


def case_chain_speedup(eps=0.6, n_freq=21, delta=1e-3, tol=1e-5):
    """Wall-time ratio of the O(5) reduced FRC against the sequential
    steady-state integration sweep over 21 uniformly spaced frequencies.

    The sweep runs the stiff integrator at a tolerance comparable to the
    source experiment's default-tolerance variable-order run; steady-state
    quality is governed by the cycle-convergence criterion, not by the
    step tolerance."""
    t0 = time.time()
    ex, spec, master, ssm = _ssm_for("pendulum_chain", [1], 5)
    nssm = compute_nonautonomous_leading(ssm, ex.dae, 2.0, r=[1])
    br = frc_continue(nssm, (1.8, 2.2), eps,
                      dofs=(ex.dof_names["phi41"],), step=0.005)[0]
    rom_time = time.time() - t0

    omegas = np.linspace(1.8, 2.2, n_freq)
    t0 = time.time()
    args = [(float(om), eps, delta, tol) for om in omegas]
    rows = [_chain_sweep_one(a) for a in args]
    sweep_time = time.time() - t0

    amps_rom = np.array(
        [p.amplitudes[ex.dof_names["phi41"]] for p in br.points]
    )
    oms_rom = br.omegas()
    comp = []
    for om, cycles, conv, amp in rows:
        a_rom = float(np.interp(om, oms_rom, amps_rom))
        comp.append((om, amp, a_rom, cycles, conv))
    return {
        "rom_time_s": rom_time,
        "sweep_time_s": sweep_time,
        "speedup": sweep_time / rom_time,
        "all_converged": bool(all(r[4] for r in comp)),
        "rows": comp,
    }


# ----------------------------------------------------------------------
# registry and runner
# ----------------------------------------------------------------------
@dataclass
class BenchCase:
    id: str
    func: object
    checks: list              # (key, expected, tol, kind, provenance)
    timeout: float = 1800.0


def _close(value, expected, tol):
    if isinstance(expected, bool):
        return bool(value) == expected
    if isinstance(expected, complex):
        return abs(value - expected) <= tol
    if isinstance(expected, tuple):
        return tuple(value) == expected
    return abs(value - expected) <= tol


def _check_kind(value, expected, tol, kind):
    if kind == "abs":
        return _close(value, expected, tol)
    if kind == "rel":
        return abs(value - expected) <= tol * abs(expected)
    if kind == "max":
        return value <= expected
    if kind == "min":
        return value >= expected
    if kind == "eq":
        return _close(value, expected, 0)
    raise ValueError(kind)


CASES = [
    BenchCase(
        "eig-oscillator-dae", case_eig_oscillator,
        [
            ("cubic_lam1", complex(-0.02, 1.9999), 1e-3, "abs", "published"),
            ("cubic_lam2", complex(-0.15, 2.9962), 1e-3, "abs", "published"),
            ("spherical_lam1", complex(-0.02, 1.9999), 1e-3, "abs",
             "published"),
            ("cubic_inf", 3, 0, "eq", "published"),
            ("spherical_inf", 3, 0, "eq", "published"),
            ("runtime_s", 2.0, None, "max", "derived"),
        ],
    ),
    BenchCase(
        "eig-slider-dae", case_eig_slider,
        [
            ("lam1", complex(-0.0047, 1.8522), 1e-3, "abs", "published"),
            ("lam2", complex(-0.0513, 5.5561), 1e-3, "abs", "published"),
            ("zero_count", 1, 0, "eq", "published"),
            ("infinite", 10, 0, "eq", "published"),
            ("runtime_s", 1.0, None, "max", "derived"),
        ],
    ),
    BenchCase(
        "pendulum-closed-form", case_pendulum_closed_form,
        [
            ("error", 1e-10, None, "max", "published"),
            ("zero_count", 1, 0, "eq", "published"),
            ("infinite", 1, 0, "eq", "published"),
        ],
    ),
    BenchCase(
        "maggi-spectrum-equivalence", case_theorem4,
        [
            ("max_eig_mismatch", 1e-8, None, "max", "published"),
            ("spurious_count", 1, 0, "eq", "published"),
            ("spurious_at_minus_alpha", True, 0, "eq", "published"),
        ],
    ),
    BenchCase(
        "rom-coefficients", case_rom_coefficients,
        [
            ("none_th2_scaled", -1.206, 0.01, "rel", "published"),
            ("none_rho1", -0.02, 0.01, "rel", "published"),
            ("none_worst_rel", 0.01, None, "max", "published"),
            ("th2_sign_pattern", (-1, 1, 1), 0, "eq", "published"),
        ],
    ),
    BenchCase(
        "backbone-conservative", case_backbone_conservative,
        [
            ("none_worst_rel", 0.01, None, "max", "derived"),
            ("cubic_worst_rel", 0.01, None, "max", "derived"),
            ("spherical_worst_rel", 0.01, None, "max", "derived"),
            ("none_levels", 15, None, "min", "derived"),
            ("runtime_s", 300.0, None, "max", "derived"),
        ],
    ),
    BenchCase(
        "invariance-trajectory", case_invariance_trajectory,
        [
            ("none_rel_sup", 0.01, None, "max", "published"),
            ("cubic_rel_sup", 0.01, None, "max", "published"),
            ("chain_rel_sup", 0.01, None, "max", "published"),
        ],
    ),
    BenchCase(
        "inverr-powerlaw", case_inverr_powerlaw,
        [
            ("slope_order3", 3.0, None, "min", "derived"),
            ("slope_order5", 5.0, None, "min", "derived"),
            ("monotone_at_rho1", True, 0, "eq", "published"),
            ("order3_sufficient_at_rho1", True, 0, "eq", "published"),
        ],
    ),
    BenchCase(
        "frc-slider", case_frc_slider,
        [
            ("worst_x1_rel", 0.02, None, "max", "published"),
            ("worst_phi2_rel", 0.02, None, "max", "published"),
        ],
    ),
    BenchCase(
        "frc-oscillator", case_frc_oscillator,
        [("worst_rel", 0.02, None, "max", "published")],
    ),
    BenchCase(
        "residual-at-sn", case_residual_at_sn,
        [("max_residual", 0.01, None, "min", "published")],
    ),
    BenchCase(
        "divider-structure", case_divider_structure,
        [
            ("n_bp", 2, 0, "eq", "published"),
            ("rho1_main_max", 1e-10, None, "max", "published"),
            ("window_brackets_resonance", True, 0, "eq", "published"),
            ("unstable_inside", True, 0, "eq", "published"),
            ("secondary_n_sn", 1, 0, "eq", "published"),
            ("secondary_fundamental_ratio", 0.5, 1e-12, "abs", "published"),
        ],
    ),
    BenchCase(
        "recast-exactness", case_recast_exactness,
        [
            ("deviation", 1e-6, None, "max", "published"),
            ("deviation_large_angle", 1e-6, None, "max", "derived"),
        ],
    ),
    BenchCase(
        "chain-speedup", case_chain_speedup,
        [
            ("speedup", 10.0, None, "min", "published"),
            ("all_converged", True, 0, "eq", "derived"),
        ],
        timeout=7200.0,
    ),
]


@dataclass
class CaseResult:
    id: str
    passed: bool
    wall_s: float
    measured: dict
    failures: list = field(default_factory=list)
    error: str = ""


@dataclass
class BenchReport:
    results: list

    @property
    def all_passed(self):
        return all(r.passed for r in self.results)

    def summary(self):
        lines = []
        for r in self.results:
            tag = "PASS" if r.passed else "FAIL"
            lines.append(f"[{tag}] {r.id:28s} {r.wall_s:9.2f}s")
            for f in r.failures:
                lines.append(f"        {f}")
            if r.error:
                lines.append(f"        error: {r.error}")
        lines.append(
            f"{sum(r.passed for r in self.results)}/{len(self.results)} "
            "cases passed"
        )
        return "\n".join(lines)

    def to_markdown(self):
        lines = ["| case | result | wall time (s) |", "|---|---|---|"]
        for r in self.results:
            lines.append(
                f"| {r.id} | {'pass' if r.passed else 'FAIL'} "
                f"| {r.wall_s:.2f} |"
            )
        return "\n".join(lines)


def run_case(case: BenchCase) -> CaseResult:
    t0 = time.time()
    try:
        measured = case.func()
    except Exception as exc:
        return CaseResult(
            id=case.id, passed=False, wall_s=time.time() - t0,
            measured={}, error=f"{type(exc).__name__}: {exc}",
        )
    wall = time.time() - t0
    failures = []
    for key, expected, tol, kind, provenance in case.checks:
        value = measured.get(key)
        if value is None:
            failures.append(f"{key}: missing")
            continue
        if not _check_kind(value, expected, tol, kind):
            failures.append(
                f"{key}: measured {value!r}, expected {kind} "
                f"{expected!r} [{provenance}]"
            )
    if wall > case.timeout:
        failures.append(f"timeout: {wall:.0f}s > {case.timeout:.0f}s")
    return CaseResult(
        id=case.id, passed=not failures, wall_s=wall,
        measured=measured, failures=failures,
    )


def run_suite(filter_text="", out_dir=".") -> BenchReport:
    """Run all (or filtered) cases; write markdown and CSV reports.

    ``SSMROM_THREADS`` > 1 runs independent cases concurrently (each
    case's internal determinism is unaffected); timing-sensitive cases
    stay meaningful only in the default sequential mode."""
    selected = [c for c in CASES if not filter_text or filter_text in c.id]
    workers = int(os.environ.get("SSMROM_THREADS", "1"))
    if workers > 1 and len(selected) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_case, selected))
    else:
        results = [run_case(c) for c in selected]
    report = BenchReport(results=results)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "bench_report.md"), "w") as fh:
        fh.write(report.to_markdown() + "\n")
    with open(os.path.join(out_dir, "bench_report.csv"), "w") as fh:
        fh.write("case,passed,wall_s\n")
        for r in results:
            fh.write(f"{r.id},{int(r.passed)},{r.wall_s:.3f}\n")
    return report
