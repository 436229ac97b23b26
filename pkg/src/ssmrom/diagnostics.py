"""A-posteriori accuracy measures for reduced models.

``invariance_error`` samples the residual of the autonomous invariance
equation on spheres of radius varrho in parametrization space and
averages its norm (normalized by the phase-space dimension).  It needs
no full-system simulation and locates the convergence boundary of the
expansion.  ``orbit_residual`` evaluates the forced invariance equation
along a periodic orbit of the reduced model, flagging inaccurate
leading-order forcing approximations.  ``trajectory_compare`` aligns a
mapped reduced trajectory with a full-order one.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm

import numpy as np

__all__ = [
    "ErrorCurve",
    "ResidualHistory",
    "ComparisonMetrics",
    "invariance_error",
    "sample_sphere",
    "orbit_residual",
    "trajectory_compare",
]


@dataclass
class ErrorCurve:
    varrho: np.ndarray
    error: np.ndarray
    order: int
    n_alpha: int
    n_theta: int


@dataclass
class ResidualHistory:
    t: np.ndarray
    norm: np.ndarray

    @property
    def max(self):
        return float(np.max(self.norm))


@dataclass
class ComparisonMetrics:
    rel_sup: float
    rel_rms: float
    per_dof_sup: np.ndarray


def sample_sphere(m, varrho, n_alpha, n_theta):
    """Sample points on the sphere of radius varrho in C^{2m}
    parametrization space (conjugate-paired).

    For m = 2 the polar angle alpha in [0, pi/2] splits the radius over
    the two mode amplitudes; for m = 1 the alpha grid collapses and the
    sample set is a circle."""
    if m == 1:
        th = 2 * np.pi * np.arange(n_theta) / n_theta
        P = np.zeros((n_theta, 2), dtype=complex)
        P[:, 0] = varrho * np.exp(1j * th)
        P[:, 1] = np.conj(P[:, 0])
        return P
    if m == 2:
        al = np.pi * np.arange(n_alpha) / (2 * (n_alpha - 1))
        th = 2 * np.pi * np.arange(n_theta) / n_theta
        A, T1, T2 = np.meshgrid(al, th, th, indexing="ij")
        r1 = varrho * np.cos(A).ravel()
        r2 = varrho * np.sin(A).ravel()
        e1 = np.exp(1j * T1.ravel())
        e2 = np.exp(1j * T2.ravel())
        P = np.zeros((r1.size, 4), dtype=complex)
        P[:, 0] = r1 * e1
        P[:, 1] = np.conj(P[:, 0])
        P[:, 2] = r2 * e2
        P[:, 3] = np.conj(P[:, 2])
        return P
    # uniform polar-angle generalization for m > 2
    rng = np.random.default_rng(0)
    npts = n_alpha * n_theta**2
    X = rng.standard_normal((npts, m)) + 1j * rng.standard_normal((npts, m))
    X = varrho * X / np.linalg.norm(X, axis=1)[:, None]
    P = np.zeros((npts, 2 * m), dtype=complex)
    P[:, 0::2] = X
    P[:, 1::2] = np.conj(X)
    return P


def _residual_batch(ssm, dae, P):
    """||Res||_2 of the autonomous invariance equation at each sample."""
    W, R = ssm.W, ssm.R
    N = W.output_dim
    m2 = W.input_dim
    Wp = W.eval_many(P)
    Rp = R.eval_many(P)
    DW = W.jacobian().eval_many(P).reshape(-1, N, m2)
    lhs = np.einsum("snc,sc->sn", DW, Rp) @ dae.B.T
    rhs = Wp @ dae.A.T
    if dae.F is not None:
        rhs = rhs + dae.F.eval_many(Wp)
    return np.linalg.norm(lhs - rhs, axis=1)


def invariance_error(ssm, dae, varrho, n_alpha=10, n_theta=30):
    """Averaged invariance error on the sphere of radius `varrho`,
    normalized by the phase-space dimension."""
    if varrho <= 0:
        raise ValueError("varrho must be positive")
    m = ssm.m
    P = sample_sphere(m, varrho, n_alpha, n_theta)
    norms = _residual_batch(ssm, dae, P)
    N = ssm.W.output_dim
    if m == 1:
        return float(np.sum(norms) / (N * n_theta))
    return float(np.sum(norms) / (N * n_alpha * n_theta**2))


def error_curve(ssm, dae, varrhos, n_alpha=10, n_theta=30) -> ErrorCurve:
    errs = [invariance_error(ssm, dae, v, n_alpha, n_theta) for v in varrhos]
    return ErrorCurve(
        varrho=np.asarray(varrhos, dtype=float),
        error=np.array(errs),
        order=ssm.order,
        n_alpha=n_alpha,
        n_theta=n_theta,
    )


def orbit_residual(ssm, dae, y, r, epsilon, omega, n_t=256) -> ResidualHistory:
    """Residual of the forced invariance equation along one fundamental
    period of the rotating-frame fixed point `y` (stacked Re/Im of the
    positive-frequency coordinates)."""
    if ssm.x_plus is None:
        raise ValueError("non-autonomous part not computed")
    m = ssm.m
    y = np.asarray(y, dtype=float)
    q = y[:m] + 1j * y[m:]
    rf = np.array([float(x) for x in r])
    L = 1
    from fractions import Fraction

    L = lcm(*[Fraction(x).denominator for x in r])
    ts = np.linspace(0.0, L * 2 * np.pi / omega, n_t)
    P = np.zeros((n_t, 2 * m), dtype=complex)
    for j in range(m):
        rot = q[j] * np.exp(1j * rf[j] * omega * ts)
        P[:, 2 * j] = rot
        P[:, 2 * j + 1] = np.conj(rot)
    W, R = ssm.W, ssm.R
    N = W.output_dim
    phase = np.exp(1j * omega * ts)[:, None]

    Wp = W.eval_many(P)
    Weps = Wp + epsilon * (phase * ssm.x_plus[None, :]) + epsilon * (
        np.conj(phase) * ssm.x_minus[None, :]
    )
    Rp = R.eval_many(P) + epsilon * (
        phase * ssm.s_plus[None, :] + np.conj(phase) * ssm.s_minus[None, :]
    )
    DW = W.jacobian().eval_many(P).reshape(-1, N, 2 * m)
    dphi = epsilon * omega * (
        1j * phase * ssm.x_plus[None, :]
        - 1j * np.conj(phase) * ssm.x_minus[None, :]
    )
    lhs = (np.einsum("snc,sc->sn", DW, Rp) + dphi) @ dae.B.T
    rhs = Weps @ dae.A.T
    if dae.F is not None:
        rhs = rhs + dae.F.eval_many(Weps)
    rhs = rhs + epsilon * np.cos(omega * ts)[:, None] * dae.fext_shape[None, :]
    norm = np.linalg.norm(lhs - rhs, axis=1)
    return ResidualHistory(t=ts, norm=norm.real.astype(float))


def trajectory_compare(t_rom, Z_rom, t_full, Z_full, dofs=None):
    """Time-aligned relative sup and RMS deviation over selected dofs.

    Trajectories on different grids are aligned by interpolation onto
    the overlapping time window of the first grid."""
    Z_rom = np.atleast_2d(Z_rom)
    Z_full = np.atleast_2d(Z_full)
    if dofs is not None:
        Z_rom = Z_rom[:, dofs]
        Z_full = Z_full[:, dofs]
    lo = max(t_rom[0], t_full[0])
    hi = min(t_rom[-1], t_full[-1])
    keep = (t_rom >= lo) & (t_rom <= hi)
    tq = t_rom[keep]
    A = Z_rom[keep]
    Bm = np.column_stack(
        [np.interp(tq, t_full, Z_full[:, j]) for j in range(Z_full.shape[1])]
    )
    diff = A - Bm
    scale = np.max(np.abs(Bm), axis=0)
    scale[scale == 0] = 1.0
    per_dof = np.max(np.abs(diff), axis=0) / scale
    rel_sup = float(np.max(np.abs(diff)) / np.max(np.abs(Bm)))
    rel_rms = float(
        np.sqrt(np.mean(diff**2)) / np.sqrt(np.mean(Bm**2))
    )
    return ComparisonMetrics(
        rel_sup=rel_sup, rel_rms=rel_rms, per_dof_sup=per_dof
    )
