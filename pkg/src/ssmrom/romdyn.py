"""Analysis of the reduced dynamics on the manifold.

Periodic responses of the full system appear as fixed points of the
reduced dynamics in a frame co-rotating with the forcing: coordinate j
rotates at the rational multiple r_j of the forcing frequency, so every
monomial of the normal-form R becomes autonomous after the transform.
Fixed points are continued in the forcing frequency by pseudo-arclength
with fold (sign change of the frequency tangent) and branch-point (sign
change of the bordered-Jacobian determinant) detection, plus algebraic
branch switching through the second null vector at a branch point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np
from scipy.integrate import solve_ivp

from .manifold import pair_swap

__all__ = [
    "PolarROM",
    "BackboneCurve",
    "FRCPoint",
    "FRCBranch",
    "ReducedTrajectory",
    "RomDynError",
    "polar_form",
    "backbone",
    "frc_continue",
    "branch_switch",
    "integrate_rom",
]


class RomDynError(RuntimeError):
    pass


# ----------------------------------------------------------------------
# polar form
# ----------------------------------------------------------------------
@dataclass
class PolarROM:
    """Reduced dynamics in polar coordinates p_j = rho_j e^{i theta_j}.

    Each entry of `terms` is (mode i, rho powers, phase integers, c):
    the complex coefficient c contributes
        rho_dot_i     += prod_j rho_j^powers * Re(c e^{i phase . theta})
        theta_dot_i   += prod_j rho_j^powers * Im(c e^{i phase . theta}) / rho_i
    """

    m: int
    terms: list

    def rates(self, rho, theta):
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        rd = np.zeros(self.m)
        td = np.zeros(self.m)
        for i, powers, phase, c in self.terms:
            amp = np.prod(rho ** np.asarray(powers))
            ph = c * np.exp(1j * np.dot(phase, theta))
            rd[i] += amp * ph.real
            if rho[i] != 0:
                td[i] += amp * ph.imag / rho[i]
        return rd, td

    def radial_series(self, i=0):
        """(power, coefficient) pairs of rho_dot_i for a single-mode ROM
        (all phase-free terms)."""
        out = {}
        for mode, powers, phase, c in self.terms:
            if mode != i or any(phase):
                continue
            out[powers[i]] = out.get(powers[i], 0.0) + c.real
        return dict(sorted(out.items()))

    def frequency_series(self, i=0):
        """(power of rho, coefficient) pairs of theta_dot_i; powers are
        one lower than the matching rho_dot powers."""
        out = {}
        for mode, powers, phase, c in self.terms:
            if mode != i or any(phase):
                continue
            out[powers[i] - 1] = out.get(powers[i] - 1, 0.0) + c.imag
        return dict(sorted(out.items()))


def polar_form(ssm) -> PolarROM:
    """Polar-coordinate tables of the (normal-form style) reduced
    dynamics."""
    m = ssm.m
    terms = []
    for e, vec in ssm.R.terms.items():
        powers = tuple(e[2 * j] + e[2 * j + 1] for j in range(m))
        dvec = [e[2 * j] - e[2 * j + 1] for j in range(m)]
        for i in range(m):
            c = vec[2 * i]
            if c == 0:
                continue
            phase = tuple(
                dvec[j] - (1 if j == i else 0) for j in range(m)
            )
            terms.append((i, powers, phase, complex(c)))
    return PolarROM(m=m, terms=terms)


@dataclass
class BackboneCurve:
    rho: np.ndarray
    omega: np.ndarray
    amplitude: np.ndarray | None = None     # physical amplitude per rho
    dof: int | None = None
    order: int | None = None


def backbone(ssm, rho_grid, dof=None, n_phase=128) -> BackboneCurve:
    """Damped backbone: instantaneous frequency omega(rho) of the
    single-pair reduced dynamics; optionally the peak physical amplitude
    of one dof over the phase sweep."""
    if ssm.m != 1:
        raise RomDynError(
            "backbone curves require a single master pair; coupled polar "
            "dynamics has no single instantaneous frequency"
        )
    rho_grid = np.asarray(rho_grid, dtype=float)
    freq = polar_form(ssm).frequency_series(0)
    omega = np.zeros_like(rho_grid)
    for k, c in freq.items():
        omega = omega + c * rho_grid**k
    amp = None
    if dof is not None:
        theta = np.linspace(0, 2 * np.pi, n_phase, endpoint=False)
        amp = np.zeros_like(rho_grid)
        for i, r in enumerate(rho_grid):
            P = np.zeros((n_phase, 2), dtype=complex)
            P[:, 0] = r * np.exp(1j * theta)
            P[:, 1] = np.conj(P[:, 0])
            Z = ssm.W.eval_many(P)
            amp[i] = np.max(np.abs(Z[:, dof].real))
    return BackboneCurve(
        rho=rho_grid, omega=omega, amplitude=amp, dof=dof, order=ssm.order
    )


# ----------------------------------------------------------------------
# rotating-frame fixed points
# ----------------------------------------------------------------------
class _RotatingROM:
    """Autonomous rotating-frame vector field of the forced reduced
    dynamics, in stacked real coordinates y = (Re q, Im q)."""

    def __init__(self, ssm, r, epsilon):
        self.ssm = ssm
        self.m = ssm.m
        self.eps = float(epsilon)
        if r is None:
            r = [Fraction(1)] * self.m
        self.r = [Fraction(x) for x in r]
        self.rfloat = np.array([float(x) for x in self.r])

        # every monomial of R must be phase-matching in this frame
        for e, vec in ssm.R.terms.items():
            for i in range(self.m):
                if vec[2 * i] == 0 or sum(e) < 2:
                    continue
                mismatch = (
                    sum(
                        (e[2 * j] - e[2 * j + 1]) * self.r[j]
                        for j in range(self.m)
                    )
                    - self.r[i]
                )
                if mismatch != 0:
                    raise RomDynError(
                        f"monomial {e} is not phase-matching for r = "
                        f"{[str(x) for x in self.r]}"
                    )
        self.s = np.zeros(self.m, dtype=complex)
        if self.eps != 0.0:
            if ssm.s_plus is None:
                raise RomDynError("non-autonomous part missing; compute S0")
            for i in range(self.m):
                si = ssm.s_plus[2 * i]
                if si != 0 and self.r[i] != 1:
                    raise RomDynError(
                        "forced master direction must rotate at the forcing "
                        "frequency (r_i = 1)"
                    )
                self.s[i] = si
        # partial derivatives of the positive-frequency components
        self._dR = [
            [ssm.R.component(2 * i).partial(c) for c in range(2 * self.m)]
            for i in range(self.m)
        ]

    def embed(self, y):
        q = y[: self.m] + 1j * y[self.m:]
        p = np.zeros(2 * self.m, dtype=complex)
        p[0::2] = q
        p[1::2] = np.conj(q)
        return q, p

    def value(self, y, omega):
        q, p = self.embed(y)
        val = self.ssm.R.eval(p)[0::2]
        val = val - 1j * self.rfloat * omega * q + self.eps * self.s
        return np.concatenate([val.real, val.imag])

    def jac_y(self, y, omega):
        q, p = self.embed(y)
        m = self.m
        A = np.zeros((m, m), dtype=complex)   # d val_i / d q_j
        Bc = np.zeros((m, m), dtype=complex)  # d val_i / d conj(q_j)
        for i in range(m):
            for j in range(m):
                A[i, j] = self._dR[i][2 * j].eval(p)[0]
                Bc[i, j] = self._dR[i][2 * j + 1].eval(p)[0]
            A[i, i] -= 1j * self.rfloat[i] * omega
        J = np.zeros((2 * m, 2 * m))
        J[:m, :m] = (A + Bc).real
        J[:m, m:] = -(A - Bc).imag
        J[m:, :m] = (A + Bc).imag
        J[m:, m:] = (A - Bc).real
        return J

    def jac_omega(self, y, omega):
        q, _ = self.embed(y)
        d = -1j * self.rfloat * q
        return np.concatenate([d.real, d.imag])

    def newton(self, y, omega, tol=1e-11, maxit=40):
        y = y.copy()
        for _ in range(maxit):
            g = self.value(y, omega)
            if np.linalg.norm(g) < tol:
                return y
            try:
                step = np.linalg.solve(self.jac_y(y, omega), -g)
            except np.linalg.LinAlgError:
                return None
            lam = 1.0
            g0 = np.linalg.norm(g)
            for _ in range(8):
                y_try = y + lam * step
                if np.linalg.norm(self.value(y_try, omega)) < g0:
                    break
                lam *= 0.5
            y = y + lam * step
        if np.linalg.norm(self.value(y, omega)) < 1e-8:
            return y
        return None


@dataclass
class FRCPoint:
    omega: float
    y: np.ndarray                        # (2m,) rotating-frame coordinates
    rho: np.ndarray
    theta: np.ndarray
    stable: bool
    floquet: np.ndarray                  # rotating-frame Jacobian eigenvalues
    amplitudes: dict = field(default_factory=dict)
    residual: float = 0.0


@dataclass
class FRCBranch:
    points: list
    special_points: list                 # dicts: type SN/BP, omega, y, index
    r: list
    epsilon: float
    trivial: bool = False
    closed: bool = False

    def omegas(self):
        return np.array([p.omega for p in self.points])

    def amplitude(self, dof):
        return np.array([p.amplitudes.get(dof, np.nan) for p in self.points])

    def rho_arrays(self):
        return np.array([p.rho for p in self.points])

    def fundamental_frequency(self, omega):
        """Fundamental response frequency: Omega over the least common
        multiple of the active-mode denominators of r."""
        active = [
            j
            for j in range(len(self.r))
            if any(p.rho[j] > 1e-8 for p in self.points)
        ]
        if not active:
            return omega
        L = lcm(*[Fraction(self.r[j]).denominator for j in active])
        return omega / L


def _orbit_amplitudes(ssm, rom, y, omega, dofs, n_phase=128):
    if not dofs or ssm.W is None:
        return {}
    q, _ = rom.embed(y)
    L = lcm(*[f.denominator for f in rom.r])
    ts = np.linspace(0, L * 2 * np.pi / omega, n_phase, endpoint=False)
    P = np.zeros((n_phase, 2 * rom.m), dtype=complex)
    for j in range(rom.m):
        rot = np.exp(1j * rom.rfloat[j] * omega * ts)
        P[:, 2 * j] = q[j] * rot
        P[:, 2 * j + 1] = np.conj(q[j] * rot)
    Z = ssm.W.eval_many(P).real
    if rom.eps != 0.0 and ssm.x_plus is not None:
        phase = np.exp(1j * omega * ts)[:, None]
        Z = Z + (rom.eps * (phase * ssm.x_plus[None, :])).real
        Z = Z + (rom.eps * (np.conj(phase) * ssm.x_minus[None, :])).real
    out = {}
    for d in dofs:
        out[d] = float(np.max(np.abs(Z[:, d])))
    return out


def _make_point(rom, ssm, y, omega, dofs, stab_tol=1e-9):
    J = rom.jac_y(y, omega)
    ev = np.linalg.eigvals(J)
    stable = bool(np.max(ev.real) < stab_tol)
    q, _ = rom.embed(y)
    return FRCPoint(
        omega=float(omega),
        y=y.copy(),
        rho=np.abs(q),
        theta=np.angle(q),
        stable=stable,
        floquet=ev,
        amplitudes=_orbit_amplitudes(ssm, rom, y, omega, dofs),
        residual=float(np.linalg.norm(rom.value(y, omega))),
    )


def _tangent(rom, y, omega, prev=None):
    m2 = 2 * rom.m
    Mx = np.zeros((m2, m2 + 1))
    Mx[:, :m2] = rom.jac_y(y, omega)
    Mx[:, m2] = rom.jac_omega(y, omega)
    _, _, Vh = np.linalg.svd(Mx)
    t = Vh[-1]
    if prev is not None and np.dot(t, prev) < 0:
        t = -t
    return t


def _correct(rom, Ypred, t, tol=1e-11, maxit=12):
    m2 = 2 * rom.m
    Y = Ypred.copy()
    for _ in range(maxit):
        g = rom.value(Y[:m2], Y[m2])
        h = np.dot(t, Y - Ypred)
        res = np.concatenate([g, [h]])
        if np.linalg.norm(res) < tol:
            return Y
        J = np.zeros((m2 + 1, m2 + 1))
        J[:m2, :m2] = rom.jac_y(Y[:m2], Y[m2])
        J[:m2, m2] = rom.jac_omega(Y[:m2], Y[m2])
        J[m2, :] = t
        try:
            step = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            return None
        Y = Y + step
        if not np.isfinite(Y).all():
            return None
    return None


def _bordered_det(rom, Y, t):
    m2 = 2 * rom.m
    J = np.zeros((m2 + 1, m2 + 1))
    J[:m2, :m2] = rom.jac_y(Y[:m2], Y[m2])
    J[:m2, m2] = rom.jac_omega(Y[:m2], Y[m2])
    J[m2, :] = t
    sign, logd = np.linalg.slogdet(J)
    return sign * np.exp(min(logd, 300.0))


def _bisect_special(rom, Y0, Y1, test, tol_omega=1e-6, maxit=60):
    """Bisect along the chord between consecutive branch points for a
    sign change of `test` (feeds on corrected points)."""
    t = Y1 - Y0
    nrm = np.linalg.norm(t)
    if nrm == 0:
        return Y0
    t = t / nrm
    f0 = test(Y0)
    a, b = 0.0, 1.0
    Ya, Yb = Y0, Y1
    for _ in range(maxit):
        if abs(Yb[-1] - Ya[-1]) < tol_omega:
            break
        mid = 0.5 * (a + b)
        Ypred = Y0 + mid * (Y1 - Y0)
        Ymid = _correct(rom, Ypred, t)
        if Ymid is None:
            break
        if test(Ymid) * f0 > 0:
            a, Ya = mid, Ymid
        else:
            b, Yb = mid, Ymid
    return 0.5 * (Ya + Yb)


def fixed_point_at(ssm, omega, epsilon, dofs=(), r=None, y0=None):
    """Solve the rotating-frame fixed point at a single frequency.

    Convenient for spot comparisons where the response is unique; use
    :func:`frc_continue` across folds."""
    if r is None:
        r = ssm.external_r
    rom = _RotatingROM(ssm, r, epsilon)
    if y0 is None:
        q0 = np.zeros(rom.m, dtype=complex)
        for i in range(rom.m):
            if rom.s[i] != 0:
                q0[i] = (
                    epsilon
                    * rom.s[i]
                    / (1j * rom.rfloat[i] * omega - ssm.master.lam_vec[2 * i])
                )
        y0 = np.concatenate([q0.real, q0.imag])
    y = rom.newton(np.asarray(y0, dtype=float), omega)
    if y is None:
        raise RomDynError(f"no fixed point found at omega = {omega:g}")
    return _make_point(rom, ssm, y, omega, dofs)


def frc_continue(
    ssm,
    omega_range,
    epsilon,
    dofs=(),
    r=None,
    step=0.01,
    max_step=0.05,
    min_step=1e-6,
    max_points=20000,
    y0=None,
) -> list:
    """Continue rotating-frame fixed points over the forcing frequency.

    Returns a list with the main branch (use :func:`branch_switch` to
    follow bifurcating branches).  Folds are recorded as ``SN`` special
    points, simple branch points as ``BP``.
    """
    lo, hi = float(omega_range[0]), float(omega_range[1])
    if r is None:
        r = ssm.external_r
    rom = _RotatingROM(ssm, r, epsilon)
    m2 = 2 * rom.m

    if epsilon == 0.0:
        pts = []
        for om in np.linspace(lo, hi, 41):
            pts.append(_make_point(rom, ssm, np.zeros(m2), om, dofs))
        return [
            FRCBranch(points=pts, special_points=[], r=rom.r,
                      epsilon=0.0, trivial=True)
        ]

    # initial solution at the low end from the linear response
    if y0 is None:
        q0 = np.zeros(rom.m, dtype=complex)
        for i in range(rom.m):
            if rom.s[i] != 0:
                q0[i] = (
                    epsilon
                    * rom.s[i]
                    / (1j * rom.rfloat[i] * lo - ssm.master.lam_vec[2 * i])
                )
        y = np.concatenate([q0.real, q0.imag])
    else:
        y = np.asarray(y0, dtype=float).copy()
    y = rom.newton(y, lo)
    if y is None:
        raise RomDynError("failed to locate an initial fixed point")

    Y = np.concatenate([y, [lo]])
    t = _tangent(rom, y, lo)
    if t[m2] < 0:
        t = -t

    branch = _continue_from(
        rom, ssm, Y, t, (lo, hi), dofs, step, max_step, min_step, max_points
    )
    return [branch]


def _continue_from(
    rom, ssm, Y, t, omega_range, dofs, step, max_step, min_step, max_points
):
    lo, hi = omega_range
    m2 = 2 * rom.m
    pts = [_make_point(rom, ssm, Y[:m2], Y[m2], dofs)]
    Ystore = [Y.copy()]
    special = []
    h = step
    det_prev = _bordered_det(rom, Y, t)
    t_prev = t
    closed = False
    arclen = 0.0
    while len(pts) < max_points:
        Ypred = Ystore[-1] + h * t_prev
        Ynew = _correct(rom, Ypred, t_prev)
        if Ynew is None:
            h *= 0.5
            if h < min_step:
                break
            continue
        t_new = _tangent(rom, Ynew[:m2], Ynew[m2], prev=t_prev)
        det_new = _bordered_det(rom, Ynew, t_new)

        # fold: frequency tangent changes sign
        if t_new[m2] * t_prev[m2] < 0:
            Ysn = _refine_fold(rom, Ystore[-1], Ynew)
            if Ysn is not None:
                special.append(
                    dict(type="SN", omega=float(Ysn[m2]), y=Ysn[:m2].copy(),
                         index=len(pts))
                )
        # branch point: bordered determinant changes sign
        if det_new * det_prev < 0:
            Ybp = _bisect_special(
                rom,
                Ystore[-1],
                Ynew,
                lambda Yq: _bordered_det(rom, Yq, t_prev),
            )
            special.append(
                dict(type="BP", omega=float(Ybp[m2]), y=Ybp[:m2].copy(),
                     index=len(pts))
            )

        step_len = float(np.linalg.norm(Ynew - Ystore[-1]))
        arclen += step_len
        pts.append(_make_point(rom, ssm, Ynew[:m2], Ynew[m2], dofs))
        Ystore.append(Ynew.copy())
        t_prev, det_prev = t_new, det_new
        h = min(h * 1.3, max_step)
        if Ynew[m2] > hi or Ynew[m2] < lo:
            break
        # closed-curve detection: back near the start after leaving it
        if arclen > 10 * step and np.linalg.norm(Ynew - Ystore[0]) < max(
            1.5 * step_len, step
        ):
            closed = True
            break
    branch = FRCBranch(
        points=pts, special_points=_dedupe_special(special),
        r=rom.r, epsilon=rom.eps, closed=closed,
    )
    return branch


def _dedupe_special(special, omega_tol=5e-4):
    """Merge repeated records of the same special point (closed curves and
    symmetric copies revisit them) and absorb fold records that coincide
    with a branch point (at a symmetric branch point the frequency is
    extremal along the bifurcating branch, so the fold test also fires)."""
    out = []
    bp_omegas = [s["omega"] for s in special if s["type"] == "BP"]
    for s in special:
        if s["type"] == "SN" and any(
            abs(s["omega"] - ob) < 50 * omega_tol for ob in bp_omegas
        ):
            continue
        dup = False
        for q in out:
            if q["type"] == s["type"] and abs(q["omega"] - s["omega"]) < omega_tol:
                dup = True
                break
        if not dup:
            out.append(s)
    return out


def _refine_fold(rom, Y0, Y1, tol=1e-10, maxit=30):
    """Newton on the fold system G = 0, J_y w = 0, |w|^2 = 1."""
    m2 = 2 * rom.m
    Y = 0.5 * (Y0 + Y1)
    J = rom.jac_y(Y[:m2], Y[m2])
    _, _, Vh = np.linalg.svd(J)
    w = Vh[-1]

    def F(z):
        y, om, w = z[:m2], z[m2], z[m2 + 1:]
        Jy = rom.jac_y(y, om)
        return np.concatenate(
            [rom.value(y, om), Jy @ w, [(w @ w - 1.0) / 2.0]]
        )

    z = np.concatenate([Y, w])
    for _ in range(maxit):
        res = F(z)
        if np.linalg.norm(res) < tol:
            return z[: m2 + 1]
        # finite-difference Jacobian of the extended system (small)
        nz = len(z)
        Jf = np.zeros((nz, nz))
        hfd = 1e-7
        for k in range(nz):
            dz = np.zeros(nz)
            dz[k] = hfd
            Jf[:, k] = (F(z + dz) - F(z - dz)) / (2 * hfd)
        try:
            z = z + np.linalg.solve(Jf, -res)
        except np.linalg.LinAlgError:
            return None
    return None


def branch_switch(
    ssm,
    branch: FRCBranch,
    bp_index=0,
    dofs=(),
    step=0.01,
    delta=1e-3,
    omega_range=None,
    max_points=20000,
) -> FRCBranch:
    """Restart continuation along the second null direction at a detected
    branch point; both directions are followed and merged."""
    bps = [s for s in branch.special_points if s["type"] == "BP"]
    if not bps:
        raise RomDynError("branch has no detected branch points")
    bp = bps[bp_index]
    rom = _RotatingROM(ssm, branch.r, branch.epsilon)
    m2 = 2 * rom.m
    Ybp = np.concatenate([bp["y"], [bp["omega"]]])

    Mx = np.zeros((m2, m2 + 1))
    Mx[:, :m2] = rom.jac_y(Ybp[:m2], Ybp[m2])
    Mx[:, m2] = rom.jac_omega(Ybp[:m2], Ybp[m2])
    _, sv, Vh = np.linalg.svd(Mx)
    null_count = int(np.sum(sv < 1e-6 * max(sv[0], 1.0))) + 1
    if null_count > 2:
        raise RomDynError("degenerate branch point (null space > 2)")
    v1, v2 = Vh[-1], Vh[-2]
    t_branch = _tangent(rom, Ybp[:m2], Ybp[m2])
    # combination orthogonal to the through-branch tangent
    psi = v2 - np.dot(v2, t_branch) * t_branch
    if np.linalg.norm(psi) < 1e-8:
        psi = v1 - np.dot(v1, t_branch) * t_branch
    psi /= np.linalg.norm(psi)

    if omega_range is None:
        om = branch.omegas()
        omega_range = (float(np.min(om)), float(np.max(om)))

    halves = []
    for sgn in (+1.0, -1.0):
        Ypred = Ybp + sgn * delta * psi
        Ynew = _correct(rom, Ypred, psi * sgn)
        if Ynew is None:
            continue
        t0 = _tangent(rom, Ynew[:m2], Ynew[m2])
        if np.dot(t0, sgn * psi) < 0:
            t0 = -t0
        half = _continue_from(
            rom, ssm, Ynew, t0, omega_range, dofs,
            step, step * 5, 1e-7, max_points
        )
        if half.closed:
            return half
        halves.append(half)
    if not halves:
        raise RomDynError("branch switching failed to leave the main branch")
    if len(halves) == 1:
        return halves[0]
    pts = halves[0].points[::-1] + halves[1].points
    offset = len(halves[0].points)
    special = _dedupe_special(
        [dict(s, index=offset - 1 - s["index"])
         for s in halves[0].special_points]
        + [dict(s, index=offset + s["index"])
           for s in halves[1].special_points]
    )
    return FRCBranch(
        points=pts, special_points=special, r=branch.r, epsilon=branch.epsilon
    )


# ----------------------------------------------------------------------
# reduced-model time integration
# ----------------------------------------------------------------------
@dataclass
class ReducedTrajectory:
    t: np.ndarray
    p: np.ndarray            # (nt, 2m) complex reduced coordinates
    truncated: bool = False
    message: str = ""

    def physical(self, ssm, epsilon=0.0, omega=0.0):
        Z = ssm.W.eval_many(self.p).real
        if epsilon != 0.0 and ssm.x_plus is not None:
            ph = np.exp(1j * omega * self.t)[:, None]
            Z = Z + (epsilon * (ph * ssm.x_plus[None, :])).real
            Z = Z + (epsilon * (np.conj(ph) * ssm.x_minus[None, :])).real
        return Z


def integrate_rom(
    ssm,
    p0,
    t_span,
    epsilon=0.0,
    omega=0.0,
    t_eval=None,
    rtol=1e-10,
    atol=1e-12,
    blowup=None,
) -> ReducedTrajectory:
    """Integrate p' = R(p) + eps S0(Omega t); stops with a diagnostic if
    the trajectory leaves the (estimated) convergence ball."""
    m = ssm.m
    p0 = np.asarray(p0, dtype=complex)
    q0 = p0[0::2]
    if blowup is None:
        blowup = 50.0 * max(np.max(np.abs(q0)), 1.0)

    def rhs(t, y):
        p = np.zeros(2 * m, dtype=complex)
        p[0::2] = y[:m] + 1j * y[m:]
        p[1::2] = np.conj(p[0::2])
        v = ssm.reduced_rhs(p, omega * t, epsilon)[0::2]
        return np.concatenate([v.real, v.imag])

    def escape(t, y):
        return np.max(np.hypot(y[:m], y[m:])) - blowup

    escape.terminal = True
    y0 = np.concatenate([q0.real, q0.imag])
    sol = solve_ivp(
        rhs, t_span, y0, t_eval=t_eval, rtol=rtol, atol=atol,
        events=escape, dense_output=False, method="RK45",
    )
    q = sol.y[:m] + 1j * sol.y[m:]
    p = np.zeros((sol.t.size, 2 * m), dtype=complex)
    p[:, 0::2] = q.T
    p[:, 1::2] = np.conj(q.T)
    truncated = bool(sol.status == 1)
    return ReducedTrajectory(
        t=sol.t,
        p=p,
        truncated=truncated,
        message="trajectory left the reduced-model domain" if truncated else "",
    )
