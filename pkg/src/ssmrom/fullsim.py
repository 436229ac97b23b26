"""Full-order reference simulation of constrained systems.

Uses the stabilized index-1 explicit ODE with multiplier recovery.
Initial conditions are projected onto the constraint set (nearest-point
Newton on g, velocity projected onto the constraint null space), and
steady-state periodic orbits are extracted by integrating from the
unforced equilibrium and testing cycle-to-cycle convergence:

    ||z(iT) - z((i-1)T)|| / ||z((i-1)T)|| < delta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .model import ExplicitODE

__all__ = [
    "FullTrajectory",
    "PeriodicOrbit",
    "FullSimError",
    "consistent_ic",
    "simulate_index1",
    "steady_state_orbit",
]

DEFAULT_RTOL = 1e-8


class FullSimError(RuntimeError):
    pass


@dataclass
class FullTrajectory:
    t: np.ndarray
    x: np.ndarray            # (nt, n)
    xd: np.ndarray           # (nt, n)
    mu: np.ndarray           # (nt, n_c)
    g_norm: np.ndarray
    gdot_norm: np.ndarray

    def states(self):
        return np.hstack([self.x, self.xd])


def consistent_ic(sys, x_guess, xdot_guess, tol=1e-12, maxit=60):
    """Project a guess onto the constraint set.

    Gauss-Newton nearest-point iteration on g(x) = 0, then the velocity
    is projected onto the kernel of G at the converged point.
    """
    x = np.asarray(x_guess, dtype=float).copy()
    xd = np.asarray(xdot_guess, dtype=float).copy()
    n_c = sys.n_c
    if n_c == 0:
        return x, xd
    scale = max(1.0, float(np.linalg.norm(x)))
    for _ in range(maxit):
        g = sys.g_eval(x)
        if np.linalg.norm(g) < tol * scale:
            break
        G = sys.G_eval(x)
        try:
            corr = G.T @ np.linalg.solve(G @ G.T, g)
        except np.linalg.LinAlgError as exc:
            raise FullSimError("constraint Jacobian rank-deficient") from exc
        x = x - corr
    else:
        raise FullSimError("consistent-IC Newton did not converge")
    G = sys.G_eval(x)
    xd = xd - G.T @ np.linalg.solve(G @ G.T, G @ xd)
    return x, xd


def _frozen_jacobian(ode, y0, eps, omega, t=0.0):
    """Forward-difference Jacobian of the index-1 right-hand side at one
    state; passing it to an implicit stepper freezes the Newton matrix.
    Step-error control is unaffected, only Newton convergence speed."""
    f0 = ode.rhs(t, y0, eps, omega)
    n2 = y0.size
    J = np.zeros((n2, n2))
    h = 1e-7
    for k in range(n2):
        dy = np.zeros(n2)
        dy[k] = h * max(1.0, abs(y0[k]))
        J[:, k] = (ode.rhs(t, y0 + dy, eps, omega) - f0) / dy[k]
    return J


def simulate_index1(
    ode: ExplicitODE,
    ic,
    t_span,
    eps=0.0,
    omega=0.0,
    tol=DEFAULT_RTOL,
    t_eval=None,
    method="Radau",
    atol=None,
    frozen_jacobian=False,
) -> FullTrajectory:
    """Adaptive implicit integration of the stabilized index-1 ODE with
    multiplier recovery at the output times."""
    n = ode.n
    ic = np.asarray(ic, dtype=float)
    if ic.shape != (2 * n,):
        raise ValueError("ic must stack (x0, xdot0)")
    if atol is None:
        atol = tol * 1e-2
    kwargs = {}
    if frozen_jacobian and method in ("Radau", "BDF"):
        kwargs["jac"] = _frozen_jacobian(ode, ic, eps, omega, t_span[0])
    sol = solve_ivp(
        lambda t, y: ode.rhs(t, y, eps, omega),
        t_span,
        ic,
        method=method,
        rtol=tol,
        atol=atol,
        t_eval=t_eval,
        dense_output=False,
        **kwargs,
    )
    if not sol.success:
        raise FullSimError(f"integration failed: {sol.message}")
    nt = sol.t.size
    mu = np.zeros((nt, ode.n_c))
    g_n = np.zeros(nt)
    gd_n = np.zeros(nt)
    for k in range(nt):
        y = sol.y[:, k]
        mu[k] = ode.multipliers(sol.t[k], y, eps, omega)
        g_n[k], gd_n[k] = ode.constraint_violation(y)
    return FullTrajectory(
        t=sol.t,
        x=sol.y[:n].T.copy(),
        xd=sol.y[n:].T.copy(),
        mu=mu,
        g_norm=g_n,
        gdot_norm=gd_n,
    )


@dataclass
class PeriodicOrbit:
    omega: float
    epsilon: float
    converged: bool
    cycles: int
    t: np.ndarray             # one forcing period, dense
    x: np.ndarray
    xd: np.ndarray
    delta: float
    history: np.ndarray       # per-cycle convergence measure

    def amplitude(self, dof):
        return float(np.max(np.abs(self.x[:, dof])))


def steady_state_orbit(
    ode: ExplicitODE,
    omega,
    epsilon,
    delta=1e-3,
    max_cycles=2000,
    tol=DEFAULT_RTOL,
    method="BDF",
    n_sample=256,
    ic=None,
    frozen_jacobian=False,
) -> PeriodicOrbit:
    """Integrate from the unforced equilibrium until two successive
    forcing cycles differ by less than `delta` in relative norm, then
    sample the converged cycle densely.

    One continuous stiff integration (the stepper keeps its history
    across cycle checks).  Returns with ``converged=False`` when
    `max_cycles` is exceeded (slow transients near resonance)."""
    from scipy.integrate import BDF, LSODA, Radau

    stepper_cls = {"BDF": BDF, "Radau": Radau, "LSODA": LSODA}[method]
    n = ode.n
    T = 2 * np.pi / omega
    y0 = np.zeros(2 * n) if ic is None else np.asarray(ic, dtype=float).copy()
    kwargs = {}
    if frozen_jacobian and method in ("Radau", "BDF"):
        kwargs["jac"] = _frozen_jacobian(ode, y0, epsilon, omega)
    stepper = stepper_cls(
        lambda t, yy: ode.rhs(t, yy, epsilon, omega),
        0.0,
        y0,
        t_bound=(max_cycles + 2) * T,
        rtol=tol,
        atol=tol * 1e-2,
        **kwargs,
    )

    hist = []
    converged = False
    cycles = 0
    y_prev = y0.copy()
    boundary = 1
    # phase 1: march against the cycle-convergence criterion; each step's
    # dense output covers [t_old, t], so boundaries are interpolated by
    # the step that crossed them
    while not converged and boundary <= max_cycles:
        msg = stepper.step()
        if stepper.status != "running":
            raise FullSimError(f"integration failed: {msg}")
        dense = stepper.dense_output()
        while boundary * T <= stepper.t and boundary <= max_cycles:
            y_new = dense(boundary * T)
            prev_norm = np.linalg.norm(y_prev)
            diff = np.linalg.norm(y_new - y_prev)
            measure = diff / prev_norm if prev_norm > 0 else (
                0.0 if diff == 0 else np.inf
            )
            hist.append(measure)
            y_prev = y_new
            cycles = boundary
            boundary += 1
            if measure < delta:
                converged = True
                break

    # phase 2: densely sample one further cycle
    samples = list(np.linspace(cycles * T, (cycles + 1) * T, n_sample))
    t_rel = np.array(samples) - cycles * T
    states = []
    dense = stepper.dense_output()
    while samples and samples[0] <= stepper.t:
        states.append(dense(samples.pop(0)))
    while samples:
        msg = stepper.step()
        if stepper.status != "running":
            raise FullSimError(f"integration failed: {msg}")
        dense = stepper.dense_output()
        while samples and samples[0] <= stepper.t:
            states.append(dense(samples.pop(0)))
    Y = np.array(states) if states else y_prev[None, :]
    return PeriodicOrbit(
        omega=float(omega),
        epsilon=float(epsilon),
        converged=converged,
        cycles=cycles,
        t=t_rel[: len(Y)],
        x=Y[:, :n].copy(),
        xd=Y[:, n:].copy(),
        delta=float(delta),
        history=np.array(hist),
    )
