"""Acceptance suite: one test per criterion, at the stated tolerances.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or
via the bench harness, which shares the same case functions).  Several
cases drive full-order reference simulations and take minutes; the
complete suite is the package's exit gate and runs in roughly 30-60
minutes on a laptop-class machine.
"""

import time

import numpy as np
import pytest

from ssmrom import bench


def _verdict(num, ok, detail):
    print(f"[criterion {num:>2}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


# ----------------------------------------------------------------------
# 1. spectrum reproduction, 1e-3 absolute, 3 constraint modes, < 1 s
# ----------------------------------------------------------------------
def test_criterion_01_spectrum_reproduction():
    m = bench.case_eig_oscillator()
    ok = (
        abs(m["cubic_lam1"] - complex(-0.02, 1.9999)) < 1e-3
        and abs(m["cubic_lam2"] - complex(-0.15, 2.9962)) < 1e-3
        and abs(m["spherical_lam1"] - complex(-0.02, 1.9999)) < 1e-3
        and abs(m["spherical_lam2"] - complex(-0.15, 2.9962)) < 1e-3
        and m["cubic_inf"] == 3
        and m["spherical_inf"] == 3
    )
    s = bench.case_eig_slider()
    ok = ok and (
        abs(s["lam1"] - complex(-0.0047, 1.8522)) < 1e-3
        and abs(s["lam2"] - complex(-0.0513, 5.5561)) < 1e-3
    )
    ok = ok and m["runtime_s"] < 2.0 and s["runtime_s"] < 1.0
    _verdict(
        1, ok,
        f"cubic {m['cubic_lam1']:.4f}/{m['cubic_lam2']:.4f}, "
        f"slider {s['lam1']:.4f}/{s['lam2']:.4f}, "
        f"{m['cubic_inf']} constraint modes, "
        f"runtimes {m['runtime_s']:.2f}s/{s['runtime_s']:.2f}s",
    )


# ----------------------------------------------------------------------
# 2. closed-form recast pendulum spectrum to 1e-10
# ----------------------------------------------------------------------
def test_criterion_02_pendulum_closed_form():
    m = bench.case_pendulum_closed_form(c=0.1)
    ok = (
        m["error"] < 1e-10
        and m["zero_count"] == 1
        and m["infinite"] == 1
    )
    _verdict(
        2, ok,
        f"lambda = {m['lam_osc']:.12f}, closed-form error {m['error']:.2e}, "
        f"{m['zero_count']} zero + {m['infinite']} infinite",
    )


# ----------------------------------------------------------------------
# 3. ODE-reformulation spectrum equivalence at alpha = 5
# ----------------------------------------------------------------------
def test_criterion_03_maggi_equivalence():
    m = bench.case_theorem4(alpha=5.0)
    ok = (
        m["max_eig_mismatch"] < 1e-8
        and m["spurious_count"] == 1
        and m["spurious_at_minus_alpha"]
    )
    _verdict(
        3, ok,
        f"finite-spectrum mismatch {m['max_eig_mismatch']:.2e}, "
        f"{m['spurious_count']} spurious eigenvalue at -alpha",
    )


# ----------------------------------------------------------------------
# 4. reduced-dynamics coefficients, 1% after one scale fit, sign pattern
# ----------------------------------------------------------------------
def test_criterion_04_rom_coefficients():
    m = bench.case_rom_coefficients()
    ok = (
        abs(m["none_th2_scaled"] - (-1.206)) < 0.01 * 1.206
        and abs(m["none_rho1"] - (-0.02)) < 0.01 * 0.02
        and m["th2_sign_pattern"] == (-1, 1, 1)
    )
    _verdict(
        4, ok,
        f"frequency-shift coefficient {m['none_th2_scaled']:.4f} "
        f"(target -1.206), sign pattern {m['th2_sign_pattern']}, "
        f"worst table deviation {m['none_worst_rel']:.2%}",
    )


# ----------------------------------------------------------------------
# 5. damped backbone vs conservative shooting oracle, 1%, < 5 min
# ----------------------------------------------------------------------
def test_criterion_05_backbone_conservative():
    m = bench.case_backbone_conservative()
    ok = (
        m["none_worst_rel"] < 0.01
        and m["cubic_worst_rel"] < 0.01
        and m["spherical_worst_rel"] < 0.01
        and min(m["none_levels"], m["cubic_levels"],
                m["spherical_levels"]) >= 15
        and m["runtime_s"] < 300.0
    )
    _verdict(
        5, ok,
        f"worst frequency mismatches "
        f"{m['none_worst_rel']:.3%}/{m['cubic_worst_rel']:.3%}/"
        f"{m['spherical_worst_rel']:.3%} at >= 15 levels, "
        f"{m['runtime_s']:.0f}s",
    )


# ----------------------------------------------------------------------
# 6. trajectory invariance, < 1e-2 over three slow periods
# ----------------------------------------------------------------------
def test_criterion_06_invariance_trajectory():
    m = bench.case_invariance_trajectory()
    ok = (
        m["none_rel_sup"] < 1e-2
        and m["cubic_rel_sup"] < 1e-2
        and m["chain_rel_sup"] < 1e-2
    )
    _verdict(
        6, ok,
        f"relative sup deviations: oscillator {m['none_rel_sup']:.2e} "
        f"(free) / {m['cubic_rel_sup']:.2e} (constrained), "
        f"chain {m['chain_rel_sup']:.2e}",
    )


# ----------------------------------------------------------------------
# 7. invariance-error power law and order thresholds
# ----------------------------------------------------------------------
def test_criterion_07_invariance_error_power_law():
    m = bench.case_inverr_powerlaw()
    ok = (
        m["slope_order3"] >= 3.0
        and m["slope_order5"] >= 5.0
        and m["monotone_at_rho1"]
        and m["order3_sufficient_at_rho1"]
    )
    _verdict(
        7, ok,
        f"log-log slopes {m['slope_order3']:.2f} (order 3), "
        f"{m['slope_order5']:.2f} (order 5); monotone in order; "
        f"order-3 error at unit radius "
        f"{m['errors_at_rho1'][0]:.2e} <= 0.01",
    )


# ----------------------------------------------------------------------
# 8. FRC accuracy at sampled frequencies + residual flags truncation
# ----------------------------------------------------------------------
def test_criterion_08a_frc_slider():
    m = bench.case_frc_slider()
    ok = m["worst_x1_rel"] < 0.02 and m["worst_phi2_rel"] < 0.02
    _verdict(
        8, ok,
        f"slider FRC vs steady state: worst x1 {m['worst_x1_rel']:.2%}, "
        f"worst phi2 {m['worst_phi2_rel']:.2%} over 5 frequencies",
    )


def test_criterion_08b_frc_oscillator():
    m = bench.case_frc_oscillator()
    ok = m["worst_rel"] < 0.02
    _verdict(
        8, ok,
        f"oscillator FRC vs steady state: worst {m['worst_rel']:.2%} "
        "over 5 frequencies",
    )


def test_criterion_08c_residual_flags_truncation():
    m = bench.case_residual_at_sn(eps=0.03, order=11)
    ok = m["max_residual"] > 0.01
    _verdict(
        8, ok,
        f"fold-orbit residual {m['max_residual']:.4f} > 0.01 at "
        f"forcing 0.03 (drops to {m['max_residual_small_eps']:.4f} "
        "at one-sixth forcing)",
    )


# ----------------------------------------------------------------------
# 9. 1:2 bifurcation structure (structure only, synthetic forcing)
# ----------------------------------------------------------------------
def test_criterion_09_divider_structure():
    m = bench.case_divider_structure()
    ok = (
        m["n_bp"] == 2
        and m["rho1_main_max"] < 1e-10
        and m["window_brackets_resonance"]
        and m["unstable_inside"]
        and m["secondary_rho1_max"] > 1.0
        and m["secondary_n_sn"] == 1
        and m["secondary_stability_changes"] >= 1
        and m["secondary_fundamental_ratio"] == pytest.approx(0.5)
        and m["main_fundamental_ratio"] == pytest.approx(1.0)
    )
    _verdict(
        9, ok,
        f"branch points at {m['bp_omegas']} bracketing 45.3, main branch "
        f"rho1 <= {m['rho1_main_max']:.1e}, secondary carries "
        f"{m['secondary_n_sn']} fold and runs at half the forcing "
        "frequency",
    )


# ----------------------------------------------------------------------
# 10. recast exactness over 10 time units from phi(0) = 1
# ----------------------------------------------------------------------
def test_criterion_10_recast_exactness():
    m = bench.case_recast_exactness(c=0.1)
    ok = m["deviation"] < 1e-6
    _verdict(
        10, ok,
        f"co-simulation deviation {m['deviation']:.2e} "
        f"({m['deviation_large_angle']:.2e} from phi0 = 3)",
    )


# ----------------------------------------------------------------------
# 11. reduced FRC at least 10x faster than the steady-state sweep
# ----------------------------------------------------------------------
def test_criterion_11_chain_speedup():
    m = bench.case_chain_speedup()
    ok = m["speedup"] >= 10.0 and m["all_converged"]
    _verdict(
        11, ok,
        f"reduced FRC {m['rom_time_s']:.1f}s vs sweep "
        f"{m['sweep_time_s']:.0f}s over 21 frequencies: "
        f"{m['speedup']:.0f}x",
    )
