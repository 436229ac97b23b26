"""Invariant-manifold construction by order-by-order solution of the
invariance equation

    B D_p W(p) R(p) = A W(p) + F(W(p)).

The parametrization W and reduced dynamics R are expanded in homogeneous
polynomials of the reduced coordinates p in C^{2m} (interleaved conjugate
pairs).  At each degree the coefficient of every monomial solves a linear
system whose operator is ``(a . lam) B - A``; when that operator is
near-singular because the monomial frequency hits a master eigenvalue,
the monomial is assigned to R instead (normal-form style) and the
manifold coefficient is solved in the complement through a bordered
system with biorthogonality constraints.  Near-singularity against a
non-master eigenvalue is a genuine non-resonance violation and raises.

Leading-order forcing corrections are computed from the same operators
at the forcing frequency:

    z = W(p) + eps X0(phi),      p' = R(p) + eps S0(phi),

with X0, S0 carrying one harmonic e^{+-i phi} each and S0 supported only
on master directions whose eigenvalue is close to +-i Omega.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .polytensor import MultiPolynomial, monomial_index, monomials_upto

__all__ = [
    "SSMExpansion",
    "ManifoldError",
    "compute_autonomous_ssm",
    "compute_nonautonomous_leading",
    "evaluate_manifold",
    "reduced_vector_field",
    "autonomous_residual_coefficients",
]

REALITY_TOL = 1e-12


class ManifoldError(RuntimeError):
    pass


def conj_exps(e):
    """Exponent tuple under the conjugate-pair swap (2j <-> 2j+1)."""
    out = list(e)
    for j in range(0, len(e) - 1, 2):
        out[j], out[j + 1] = out[j + 1], out[j]
    return tuple(out)


def pair_swap(d):
    return d + 1 if d % 2 == 0 else d - 1


@dataclass
class SSMExpansion:
    """Polynomial manifold parametrization and reduced dynamics.

    W maps C^{2m} -> C^N (None for preloaded reduced models without a
    physical embedding); R maps C^{2m} -> C^{2m} and contains the linear
    part plus resonant monomials only.  x_plus/x_minus and s_plus/s_minus
    are the coefficients of e^{+i phi} / e^{-i phi} in the leading-order
    forcing corrections, filled by :func:`compute_nonautonomous_leading`.
    """

    master: object
    order: int
    W: MultiPolynomial | None
    R: MultiPolynomial
    x_plus: np.ndarray | None = None
    x_minus: np.ndarray | None = None
    s_plus: np.ndarray | None = None
    s_minus: np.ndarray | None = None
    omega: float | None = None
    style: str = "normal-form"
    epsilon_linear: bool = True
    external_r: list | None = None
    _w_packed: dict = field(default_factory=dict, repr=False)

    @property
    def m(self):
        return self.master.m

    def has_forcing(self):
        return self.s_plus is not None

    def evaluate(self, p, phi=0.0, epsilon=0.0):
        """Physical point z = W(p) + eps X0(phi); complex vector whose
        imaginary part is at reality-tolerance level for conjugate-paired
        p."""
        if self.W is None:
            raise ManifoldError("this reduced model has no physical map W")
        z = self.W.eval(np.asarray(p, dtype=complex))
        if epsilon != 0.0:
            if self.x_plus is None:
                raise ManifoldError("non-autonomous part not computed")
            z = z + epsilon * (
                self.x_plus * np.exp(1j * phi) + self.x_minus * np.exp(-1j * phi)
            )
        return z

    def reduced_rhs(self, p, phi=0.0, epsilon=0.0):
        """p' = R(p) + eps S0(phi)."""
        out = self.R.eval(np.asarray(p, dtype=complex))
        if epsilon != 0.0:
            if self.s_plus is None:
                raise ManifoldError("non-autonomous part not computed")
            out = out + epsilon * (
                self.s_plus * np.exp(1j * phi)
                + self.s_minus * np.exp(-1j * phi)
            )
        return out

    def polar_point(self, rho, theta):
        """p from polar amplitudes/phases (arrays of length m)."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        p = np.zeros(2 * self.m, dtype=complex)
        p[0::2] = rho * np.exp(1j * theta)
        p[1::2] = rho * np.exp(-1j * theta)
        return p


def _degree_exps(nvars, order):
    by_deg = {}
    for e in monomials_upto(nvars, order):
        by_deg.setdefault(sum(e), []).append(e)
    return by_deg


def compute_autonomous_ssm(dae, master, order, singular_tol=1e-6):
    """Solve the invariance equation through total degree `order`.

    Raises ManifoldError when a monomial frequency lands on a complement
    eigenvalue within `singular_tol` (relative): the coefficient operator
    is then genuinely near-singular and the monomial is not flagged as a
    master resonance; enlarge the master subspace or the resonance
    tolerance in that case.  Clearances between `singular_tol` and the
    resonance tolerance merely amplify coefficients and are allowed, as
    in densely-spaced spectra.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    A, B = dae.A, dae.B
    N = A.shape[0]
    m2 = 2 * master.m
    lam_vec = master.lam_vec
    V, U = master.V, master.U
    BV = B @ V
    UB = U.T @ B

    by_deg = _degree_exps(m2, order)
    pos_in_deg = {
        k: {e: i for i, e in enumerate(exps)} for k, exps in by_deg.items()
    }

    W = {1: V.T.copy()}          # degree -> (n_k, N), rows follow by_deg[k]
    # degree-1 rows of by_deg[1] are e_d in var order 0..2m-1
    deg1_rows = {e.index(1): i for i, e in enumerate(by_deg[1])}
    W1 = np.zeros((m2, N), dtype=complex)
    for d in range(m2):
        W1[deg1_rows[d]] = V[:, d]
    W[1] = W1
    R = {1: {}}
    for d in range(m2):
        e = tuple(1 if i == d else 0 for i in range(m2))
        vec = np.zeros(m2, dtype=complex)
        vec[d] = lam_vec[d]
        R[1][e] = vec

    inner_terms = {}

    def refresh_inner():
        inner_terms.clear()
        for k, Wk in W.items():
            for i, e in enumerate(by_deg[k]):
                row = Wk[i]
                if np.any(row != 0):
                    inner_terms[e] = row

    for k in range(2, order + 1):
        exps_k = by_deg[k]
        n_k = len(exps_k)
        # F(W) restricted to degree k uses only W below degree k
        refresh_inner()
        if dae.F is not None:
            inner = MultiPolynomial(m2, N, inner_terms, max_degree=k)
            comp = dae.F.compose(inner, k)
            Fk = np.zeros((n_k, N), dtype=complex)
            for i, e in enumerate(exps_k):
                v = comp.terms.get(e)
                if v is not None:
                    Fk[i] = v
        else:
            Fk = np.zeros((n_k, N), dtype=complex)

        # cross terms sum_{j=2}^{k-1} D W_j R_{k+1-j} at degree k
        cross = np.zeros((n_k, N), dtype=complex)
        for j in range(2, k):
            Rsrc = R.get(k + 1 - j, {})
            if not Rsrc:
                continue
            Wj = W[j]
            for b, rvec in Rsrc.items():
                for c in np.nonzero(rvec)[0]:
                    rc = rvec[c]
                    for ia, a in enumerate(by_deg[j]):
                        ac = a[c]
                        if ac == 0:
                            continue
                        t = list(a)
                        t[c] -= 1
                        tgt = tuple(x + y for x, y in zip(t, b))
                        cross[pos_in_deg[k][tgt]] += ac * rc * Wj[ia]

        Wk = np.zeros((n_k, N), dtype=complex)
        Rk = {}
        done = set()
        for i, a in enumerate(exps_k):
            if i in done:
                continue
            abar = conj_exps(a)
            ibar = pos_in_deg[k][abar]
            s = complex(np.dot(a, lam_vec))
            clearance = master.complement_clearance(a)
            res_dirs = [
                d for d in range(m2) if master.is_resonant(a, d)
            ]
            if clearance < singular_tol:
                raise ManifoldError(
                    f"monomial {a} resonates with a non-master eigenvalue "
                    f"(clearance {clearance:.3g}); enlarge tol_res or the "
                    "master subspace"
                )
            rhs = Fk[i] - B @ cross[i]
            L = s * B - A
            if not res_dirs:
                w = np.linalg.solve(L, rhs)
                r = None
            else:
                na = len(res_dirs)
                Mb = np.zeros((N + na, N + na), dtype=complex)
                Mb[:N, :N] = L
                Mb[:N, N:] = BV[:, res_dirs]
                Mb[N:, :N] = UB[res_dirs, :]
                rhs_b = np.concatenate([rhs, np.zeros(na)])
                sol = np.linalg.solve(Mb, rhs_b)
                w = sol[:N]
                r = np.zeros(m2, dtype=complex)
                r[res_dirs] = sol[N:]
            Wk[i] = w
            if r is not None and np.any(r != 0):
                Rk[a] = r
            done.add(i)
            if ibar != i:
                Wk[ibar] = np.conj(w)
                if r is not None and np.any(r != 0):
                    rbar = np.zeros(m2, dtype=complex)
                    for d in np.nonzero(r)[0]:
                        rbar[pair_swap(d)] = np.conj(r[d])
                    Rk[abar] = rbar
                done.add(ibar)
            else:
                Wk[i] = 0.5 * (w + np.conj(w))
                if a in Rk:
                    r = Rk[a]
                    rbar = np.zeros(m2, dtype=complex)
                    for d in np.nonzero(r)[0]:
                        rbar[pair_swap(d)] = np.conj(r[d])
                    Rk[a] = 0.5 * (r + rbar)
        W[k] = Wk
        R[k] = Rk

    w_terms = {}
    for k, Wk in W.items():
        for i, e in enumerate(by_deg[k]):
            if np.any(Wk[i] != 0):
                w_terms[e] = Wk[i]
    r_terms = {}
    for k, Rk in R.items():
        for e, vec in Rk.items():
            r_terms[e] = vec
    Wpoly = MultiPolynomial(m2, N, w_terms, max_degree=order)
    Rpoly = MultiPolynomial(m2, m2, r_terms, max_degree=order)
    ssm = SSMExpansion(master=master, order=order, W=Wpoly, R=Rpoly)
    ssm._w_packed = {k: (by_deg[k], W[k]) for k in W}
    return ssm


def compute_nonautonomous_leading(ssm, dae, omega, r=None, singular_tol=1e-6):
    """Fill X0, S0 for forcing frequency `omega` (rational vector `r`
    records which harmonic each master pair locks to).

    Solves ``(i omega B - A) x+ = Fext/2 - B V s+`` with s+ supported on
    the master directions whose eigenvalue is within the resonance
    tolerance of i omega; raises when i omega hits a non-master
    eigenvalue instead.
    """
    A, B = dae.A, dae.B
    N = A.shape[0]
    master = ssm.master
    lam_vec = master.lam_vec
    m2 = 2 * master.m

    target = 1j * omega
    res_dirs = [
        d
        for d in range(m2)
        if abs(lam_vec[d] - target) < master.tol_res * abs(lam_vec[d])
    ]
    comp = master.complement
    if comp.size:
        dmin = np.min(np.abs(comp - target) / np.maximum(np.abs(comp), 1e-30))
        if dmin < singular_tol:
            raise ManifoldError(
                "forcing frequency resonates with a non-master eigenvalue"
            )

    rhs = dae.fext_shape.astype(complex) / 2.0
    L = target * B - A
    if not res_dirs:
        x_plus = np.linalg.solve(L, rhs)
        s_plus = np.zeros(m2, dtype=complex)
    else:
        na = len(res_dirs)
        BV = B @ master.V
        UB = master.U.T @ B
        Mb = np.zeros((N + na, N + na), dtype=complex)
        Mb[:N, :N] = L
        Mb[:N, N:] = BV[:, res_dirs]
        Mb[N:, :N] = UB[res_dirs, :]
        sol = np.linalg.solve(Mb, np.concatenate([rhs, np.zeros(na)]))
        x_plus = sol[:N]
        s_plus = np.zeros(m2, dtype=complex)
        s_plus[res_dirs] = sol[N:]

    x_minus = np.conj(x_plus)
    s_minus = np.zeros(m2, dtype=complex)
    for d in np.nonzero(s_plus)[0]:
        s_minus[pair_swap(d)] = np.conj(s_plus[d])

    return SSMExpansion(
        master=master,
        order=ssm.order,
        W=ssm.W,
        R=ssm.R,
        x_plus=x_plus,
        x_minus=x_minus,
        s_plus=s_plus,
        s_minus=s_minus,
        omega=float(omega),
        external_r=r,
        _w_packed=ssm._w_packed,
    )


def evaluate_manifold(ssm, p, phi=0.0, epsilon=0.0):
    """z = W(p) + eps X0(phi); real to reality tolerance for conjugate-
    paired p."""
    return ssm.evaluate(p, phi, epsilon)


def reduced_vector_field(ssm, p, phi=0.0, epsilon=0.0):
    """p' = R(p) + eps S0(phi)."""
    return ssm.reduced_rhs(p, phi, epsilon)


def autonomous_residual_coefficients(ssm, dae, through_order=None):
    """Taylor coefficients of B D_pW R - A W - F(W) per degree.

    Returns dict degree -> max |coefficient|.  Through `through_order`
    (default: the expansion order) these must vanish to solver tolerance.
    """
    order = through_order or ssm.order
    W, R = ssm.W, ssm.R
    m2 = W.input_dim
    N = W.output_dim
    terms = {}

    # B * D_pW * R
    for eW, vW in W.terms.items():
        for c in range(m2):
            if eW[c] == 0:
                continue
            de = tuple(x - 1 if i == c else x for i, x in enumerate(eW))
            base = dae.B @ (eW[c] * vW)
            for eR, vR in R.terms.items():
                if vR[c] == 0:
                    continue
                tgt = tuple(x + y for x, y in zip(de, eR))
                if sum(tgt) > order:
                    continue
                terms[tgt] = terms.get(tgt, 0) + base * vR[c]
    # - A W
    for eW, vW in W.terms.items():
        if sum(eW) > order:
            continue
        terms[eW] = terms.get(eW, 0) - dae.A @ vW
    # - F(W)
    if dae.F is not None:
        comp = dae.F.compose(W, order)
        for e, v in comp.terms.items():
            terms[e] = terms.get(e, 0) - v

    out = {}
    for e, v in terms.items():
        d = sum(e)
        out[d] = max(out.get(d, 0.0), float(np.max(np.abs(v))))
    return out
