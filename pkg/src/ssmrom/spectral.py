"""Spectral analysis of the linear pencil (A, B).

Solves the generalized eigenvalue problem A v = lambda B v together with
transpose-left vectors u^T A = lambda u^T B, separates finite modes from
the infinite-magnitude constraint modes created by the singular rows of
B, and runs the resonance bookkeeping that drives the manifold solver:

* relative / absolute spectral quotients (decay-rate ratios),
* near-resonances between candidate monomials and the complement spectrum,
* inner resonances among the selected master eigenvalues,
* best rational fit of the master frequencies to a forcing frequency.

Eigenvectors are normalized so that u^T B v = 1 and the largest
displacement component of v is real and positive, which makes reduced
coordinates reproducible run to run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct

import numpy as np
import scipy.linalg as sla

from .model import FirstOrderDAE, ModelError, SecondOrderSystem, maggi_reduce
from .polytensor import monomials_upto

__all__ = [
    "Spectrum",
    "MasterSubspace",
    "ResonanceReport",
    "EquivalenceReport",
    "SpectralError",
    "solve_pencil",
    "select_master",
    "resonance_report",
    "spectrum_equivalence_check",
]

INF_CLASSIFY_RTOL = 1e-8   # |beta| below this times ||B|| counts as infinite
DEFAULT_TOL_RES = 0.05     # relative near-resonance tolerance


class SpectralError(RuntimeError):
    pass


@dataclass
class Spectrum:
    """Finite eigentriples (lambda, v, u) sorted by decreasing Re lambda,
    plus the count and right vectors of the infinite (constraint) modes."""

    finite: list           # [(lambda, v, u), ...]
    infinite_count: int
    infinite_vectors: np.ndarray   # (N, infinite_count)
    layout: object
    normalization: str = "uT_B_v=1, largest displacement real positive"

    @property
    def finite_eigenvalues(self):
        return np.array([lam for lam, _, _ in self.finite])

    def conjugate_pairs(self):
        """Underdamped conjugate pairs as indices into `finite`, ordered by
        decreasing real part (pair 1 = slowest)."""
        pairs = []
        used = set()
        for i, (lam, _, _) in enumerate(self.finite):
            if i in used or lam.imag <= 0:
                continue
            for j, (lam2, _, _) in enumerate(self.finite):
                if j not in used and j != i and abs(lam2 - np.conj(lam)) < 1e-8 * max(abs(lam), 1e-30):
                    pairs.append((i, j))
                    used.update((i, j))
                    break
        return pairs

    def to_rows(self):
        """Rows (index, re, im, class) for CSV export."""
        rows = []
        for k, (lam, _, _) in enumerate(self.finite):
            rows.append((k + 1, lam.real, lam.imag, "finite"))
        for k in range(self.infinite_count):
            rows.append((len(self.finite) + k + 1, np.inf, np.inf, "infinite"))
        return rows


def solve_pencil(dae: FirstOrderDAE, refine=True) -> Spectrum:
    """Solve the generalized eigenproblem of the pencil (A, B).

    Eigenvalues with |beta| below ``1e-8 * ||B||`` are classified as
    infinite-magnitude constraint modes; the remaining eigenpairs are
    returned sorted by decreasing real part with exactly conjugate pairs.
    """
    A, B = dae.A, dae.B
    N = A.shape[0]
    if not dae.pencil_regular():
        raise SpectralError("pencil (A, B) is not regular")

    ab, vl, vr = sla.eig(
        A, B, left=True, right=True, homogeneous_eigvals=True
    )
    alphas, betas = ab[0], ab[1]
    bnorm = np.linalg.norm(B, ord="fro")
    finite_mask = np.abs(betas) > INF_CLASSIFY_RTOL * bnorm

    lam = np.full(N, np.nan + 0j)
    lam[finite_mask] = alphas[finite_mask] / betas[finite_mask]

    # transpose-left vectors: scipy returns vl with vl^H A = w vl^H B,
    # so conj(vl) satisfies the transpose convention u^T A = w u^T B.
    finite = []
    for i in np.nonzero(finite_mask)[0]:
        v = vr[:, i].copy()
        u = np.conj(vl[:, i])
        finite.append([lam[i], v, u])

    if refine:
        for trip in finite:
            _refine_pair(A, B, trip)

    finite.sort(key=lambda t: (-t[0].real, abs(t[0].imag), -t[0].imag))
    _pair_conjugates(finite)
    for trip in finite:
        _normalize_pair(B, trip, dae.layout)

    inf_idx = np.nonzero(~finite_mask)[0]
    return Spectrum(
        finite=[tuple(t) for t in finite],
        infinite_count=int(len(inf_idx)),
        infinite_vectors=vr[:, inf_idx].copy(),
        layout=dae.layout,
    )


def _refine_pair(A, B, trip):
    """One bordered-Newton step on (v, lambda) and (u, lambda) to push the
    eigen-residual toward machine precision."""
    lam, v, u = trip
    for _ in range(2):
        L = A - lam * B
        w = np.conj(v)
        M = np.block([[L, (-B @ v)[:, None]], [w[None, :], np.zeros((1, 1))]])
        rhs = np.concatenate([-(L @ v), [0.0]])
        try:
            sol = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            break
        v = v + sol[:-1]
        lam = lam + sol[-1]
    for _ in range(2):
        L = (A - lam * B).T
        w = np.conj(u)
        M = np.block(
            [[L, (-(B.T) @ u)[:, None]], [w[None, :], np.zeros((1, 1))]]
        )
        rhs = np.concatenate([-(L @ u), [0.0]])
        try:
            sol = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            break
        u = u + sol[:-1]
    trip[0], trip[1], trip[2] = lam, v, u


def _pair_conjugates(finite, rtol=1e-7):
    """Force exact conjugate pairing of complex eigentriples."""
    used = set()
    for i, (lam, v, u) in enumerate(finite):
        if i in used or abs(lam.imag) <= rtol * abs(lam) or lam.imag < 0:
            continue
        best, bestd = None, np.inf
        for j, (lam2, _, _) in enumerate(finite):
            if j in used or j == i:
                continue
            d = abs(lam2 - np.conj(lam))
            if d < bestd:
                best, bestd = j, d
        if best is not None and bestd < rtol * max(abs(lam), 1.0):
            finite[best][0] = np.conj(lam)
            finite[best][1] = np.conj(v)
            finite[best][2] = np.conj(u)
            used.update((i, best))


def _normalize_pair(B, trip, layout):
    lam, v, u = trip
    v = v / np.linalg.norm(v)
    s = u @ (B @ v)
    if abs(s) < 1e-14:
        raise SpectralError("degenerate eigenpair, u^T B v vanished")
    u = u / s
    x = v[layout.x]
    j = int(np.argmax(np.abs(x))) if x.size else 0
    if x.size and np.abs(x[j]) > 1e-12:
        phase = np.exp(-1j * np.angle(x[j]))
        v = v * phase
        u = u / phase
    if abs(lam.imag) <= 1e-12 * max(abs(lam), 1.0):
        # real eigenvalue: keep the vectors real
        lam = complex(lam.real, 0.0)
        if np.max(np.abs(v.imag)) < 1e-6 * np.max(np.abs(v.real) + 1e-300):
            v = v.real.astype(complex)
        if np.max(np.abs(u.imag)) < 1e-6 * np.max(np.abs(u.real) + 1e-300):
            u = u.real.astype(complex)
        s = u @ (B @ v)
        if abs(s) > 1e-14:
            u = u / s
    trip[0], trip[1], trip[2] = lam, v, u


@dataclass
class MasterSubspace:
    """Selected master pairs with eigenvectors and resonance metadata.

    Coordinate layout is interleaved: parametrization coordinate 2j maps
    to pair j's eigenvalue with positive imaginary part and coordinate
    2j+1 to its conjugate.
    """

    pair_labels: list              # 1-based labels into conjugate_pairs()
    lambdas: np.ndarray            # (m,) eigenvalues with Im > 0
    lam_vec: np.ndarray            # (2m,) interleaved with conjugates
    V: np.ndarray                  # (N, 2m) right vectors
    U: np.ndarray                  # (N, 2m) transpose-left vectors
    complement: np.ndarray         # finite eigenvalues outside the subspace
    layout: object
    tol_res: float = DEFAULT_TOL_RES
    inner_resonances: list = field(default_factory=list)
    external_r: list | None = None

    @property
    def m(self):
        return len(self.lambdas)

    def is_resonant(self, exps, direction):
        """Near-resonance of monomial `exps` with master `direction`.

        The frequency part decides membership in the normal form:
        |Im(exps . lam_vec - lam_vec[direction])| < tol_res |lam_vec[d]|.
        The real-part mismatch is pure damping that vanishes in the
        conservative limit, so it must not unflag the family at high
        orders.
        """
        s = complex(np.dot(exps, self.lam_vec))
        lam_d = self.lam_vec[direction]
        return abs(s.imag - lam_d.imag) < self.tol_res * abs(lam_d)

    def complement_clearance(self, exps):
        """Distance of exps . lam_vec to the nearest complement eigenvalue,
        relative to that eigenvalue's magnitude."""
        if self.complement.size == 0:
            return np.inf
        s = complex(np.dot(exps, self.lam_vec))
        d = np.abs(s - self.complement) / np.maximum(
            np.abs(self.complement), 1e-30
        )
        return float(np.min(d))


def select_master(
    spectrum: Spectrum, pair_indices, tol_res=DEFAULT_TOL_RES
) -> MasterSubspace:
    """Select conjugate pairs (1-based labels, pair 1 = slowest) as the
    master subspace.  Only underdamped pairs qualify: constraint modes,
    overdamped and spurious zero modes are rejected."""
    pairs = spectrum.conjugate_pairs()
    chosen = []
    for label in pair_indices:
        if not (1 <= label <= len(pairs)):
            raise SpectralError(
                f"pair index {label} out of range; {len(pairs)} underdamped "
                "conjugate pairs available (infinite and zero modes are "
                "not selectable)"
            )
        chosen.append(pairs[label - 1])

    m = len(chosen)
    N = spectrum.finite[0][1].shape[0]
    lambdas = np.zeros(m, dtype=complex)
    lam_vec = np.zeros(2 * m, dtype=complex)
    V = np.zeros((N, 2 * m), dtype=complex)
    U = np.zeros((N, 2 * m), dtype=complex)
    taken = set()
    for j, (ip, im_) in enumerate(chosen):
        lam, v, u = spectrum.finite[ip]
        if lam.real >= 0 or lam.imag <= 0:
            raise SpectralError("selected mode is not an underdamped pair")
        lambdas[j] = lam
        lam_vec[2 * j] = lam
        lam_vec[2 * j + 1] = np.conj(lam)
        V[:, 2 * j] = v
        V[:, 2 * j + 1] = np.conj(v)
        U[:, 2 * j] = u
        U[:, 2 * j + 1] = np.conj(u)
        taken.update((ip, im_))

    complement = np.array(
        [lam for k, (lam, _, _) in enumerate(spectrum.finite) if k not in taken]
    )
    master = MasterSubspace(
        pair_labels=list(pair_indices),
        lambdas=lambdas,
        lam_vec=lam_vec,
        V=V,
        U=U,
        complement=complement,
        layout=spectrum.layout,
        tol_res=tol_res,
    )
    master.inner_resonances = _inner_resonances(master, order=3)
    return master


def _int_quotient(num, den):
    """Integer part (toward zero) of the positive ratio num/den."""
    if den == 0:
        return 0
    r = num / den
    return int(r) if r > 0 else 0


def _inner_resonances(master, order):
    """(target i, l, j) with lambda_i ~ l.lambda + j.conj(lambda); the
    frequency parts decide, consistent with the normal-form bookkeeping."""
    m = master.m
    found = []
    lam = master.lambdas
    for total in range(2, order + 1):
        for lj in iproduct(*[range(total + 1)] * (2 * m)):
            if sum(lj) != total:
                continue
            l, j = lj[:m], lj[m:]
            comb = np.dot(l, lam) + np.dot(j, np.conj(lam))
            for i in range(m):
                if abs(lam[i].imag - comb.imag) < master.tol_res * abs(lam[i]):
                    found.append((i + 1, tuple(l), tuple(j)))
    return found


@dataclass
class ResonanceReport:
    sigma: int                 # relative spectral quotient
    sigma_abs: int             # absolute spectral quotient
    order: int
    capped: bool               # enumeration cap hit below sigma
    tol_res: float
    violations: list           # [(exps, complement eigenvalue), ...]
    inner: list                # [(target i, l, j), ...]
    external_r: list | None    # rational vector or None

    @property
    def clean(self):
        return not self.violations


def resonance_report(
    spectrum: Spectrum, master: MasterSubspace, order: int, omega=None
) -> ResonanceReport:
    """Non-resonance diagnostics for a chosen master subspace.

    Enumerates candidate monomials up to ``min(order, quotient)`` against
    the complement spectrum, lists inner resonances up to `order`, and,
    when a forcing frequency is supplied, fits the best rational vector
    relating the master frequencies to it.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    re_master_max = float(np.max(master.lambdas.real))
    comp = master.complement
    if comp.size:
        sigma = _int_quotient(float(np.min(comp.real)), re_master_max)
    else:
        sigma = 0
    all_re_min = min(
        float(np.min(comp.real)) if comp.size else 0.0,
        float(np.min(master.lambdas.real)),
    )
    sigma_abs = _int_quotient(all_re_min, re_master_max)

    cap = min(order, max(sigma, sigma_abs))
    capped = cap < max(sigma, sigma_abs)
    violations = []
    if comp.size:
        for deg in range(2, cap + 1):
            for exps in monomials_upto(2 * master.m, deg):
                if sum(exps) != deg:
                    continue
                s = complex(np.dot(exps, master.lam_vec))
                d = np.abs(s - comp)
                hits = np.nonzero(d < master.tol_res * np.abs(comp))[0]
                for h in hits:
                    violations.append((exps, comp[h]))

    inner = _inner_resonances(master, order)

    r = None
    if omega is not None and omega > 0:
        # physically meaningful locking uses small rationals (1:1, 1:2,
        # 1:3 and their inverses); large numerators or denominators would
        # declare spurious resonances at generic frequencies
        r = []
        for lam in master.lambdas:
            frac = Fraction(lam.imag / omega).limit_denominator(4)
            if (
                frac == 0
                or frac.numerator > 4
                or abs(lam - 1j * float(frac) * omega)
                > master.tol_res * abs(lam)
            ):
                r = None
                break
            r.append(frac)
    return ResonanceReport(
        sigma=sigma,
        sigma_abs=sigma_abs,
        order=order,
        capped=capped,
        tol_res=master.tol_res,
        violations=violations,
        inner=inner,
        external_r=r,
    )


@dataclass
class EquivalenceReport:
    """Spectral match between the DAE pencil and the Maggi ODE pencil."""

    matched: list              # [(lambda_dae, lambda_ode), ...]
    max_eig_mismatch: float
    spurious: np.ndarray       # ODE eigenvalues outside the matched group
    alpha: float
    spurious_ok: bool
    max_vector_mismatch: float
    tol: float

    @property
    def passed(self):
        return (
            self.max_eig_mismatch < self.tol
            and self.spurious_ok
            and self.max_vector_mismatch < 1e-6
        )


def spectrum_equivalence_check(
    sys: SecondOrderSystem, alpha: float, tol=1e-8
) -> EquivalenceReport:
    """Verify that the Maggi ODE reproduces the DAE's finite spectrum and
    carries n_c extra eigenvalues at -alpha, with matching displacement
    blocks of the eigenvectors.  Linear constraints only."""
    if sys.g_nl is not None and sys.g_nl.terms:
        raise ModelError(
            "spectrum equivalence check requires linear constraints; "
            "pass a system with g_nl dropped"
        )
    from .model import assemble_first_order

    dae = assemble_first_order(sys)
    spec = solve_pencil(dae)
    ode = maggi_reduce(sys, alpha)
    Am, Bm = ode.linear_pencil()
    w, vecs = sla.eig(Am, Bm)

    n = sys.n
    dae_lams = spec.finite_eigenvalues
    used = set()
    matched = []
    mism = 0.0
    vec_mism = 0.0
    for k, (lam, v, _) in enumerate(spec.finite):
        cand = [(abs(w[i] - lam), i) for i in range(len(w)) if i not in used]
        d, i = min(cand)
        used.add(i)
        matched.append((lam, w[i]))
        mism = max(mism, d / max(abs(lam), 1.0))
        x_dae = v[dae.layout.x]
        x_ode = vecs[:n, i]
        na, nb = np.linalg.norm(x_dae), np.linalg.norm(x_ode)
        if na > 1e-12 and nb > 1e-12:
            a = x_dae / na
            b = x_ode / nb
            phase = np.vdot(b, a)
            phase = phase / abs(phase) if abs(phase) > 0 else 1.0
            vec_mism = max(vec_mism, float(np.linalg.norm(a - phase * b)))

    spurious = np.array([w[i] for i in range(len(w)) if i not in used])
    spurious_ok = spurious.size == sys.n_c and bool(
        np.all(np.abs(spurious + alpha) < 1e-6 * max(alpha, 1.0))
    )
    return EquivalenceReport(
        matched=matched,
        max_eig_mismatch=float(mism),
        spurious=spurious,
        alpha=alpha,
        spurious_ok=spurious_ok,
        max_vector_mismatch=vec_mism,
        tol=tol,
    )
