"""Constrained mechanical systems and their first-order reformulations.

A system is posed at the displacement level as

    M x'' + C x' + K x + f_nl(x, x') + G(x)^T mu = eps * f_shape * cos(Omega t)
    g(x) = G0 x + g_nl(x) = 0

with full-rank constraint Jacobian and g(0) = 0, so the phase-space origin
is a fixed point of the unforced system.  Three derived forms are produced
here:

* a first-order differential-algebraic system on z = (x, x', mu) with a
  singular coefficient matrix on the left (used for spectral analysis and
  manifold computation),
* an implicit ODE on (x, e) obtained by expressing velocities through
  generalized speeds on the constraint null space (Maggi reduction), and
* an explicit, stabilized index-1 ODE on (x, x') with multiplier recovery
  (used by the full-order reference simulator).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .polytensor import MultiPolynomial

__all__ = [
    "HarmonicForcing",
    "SecondOrderSystem",
    "DAELayout",
    "FirstOrderDAE",
    "ImplicitODE",
    "ExplicitODE",
    "MechanicalCallables",
    "ModelError",
    "ValidationReport",
    "assemble_first_order",
    "validate_system",
    "maggi_reduce",
    "index1_reduce",
]


class ModelError(ValueError):
    """Raised for ill-posed system definitions (rank, degree, parameters)."""


@dataclass(frozen=True)
class HarmonicForcing:
    """Constant spatial force shape times ``cos(Omega t)``.

    ``epsilon = 0`` is the autonomous limit.  The amplitude stored here is
    a default; analysis routines take epsilon explicitly.
    """

    shape: np.ndarray
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "shape", np.asarray(self.shape, dtype=float).copy()
        )
        if self.epsilon < 0:
            raise ModelError("forcing amplitude epsilon must be >= 0")


@dataclass(frozen=True)
class SecondOrderSystem:
    """Second-order constrained system with polynomial nonlinearities.

    f_nl maps (x, x') in R^{2n} to R^n; g_nl maps R^n to R^{n_c}.  Both
    must have no constant or linear part.  Either may be None (zero map).
    """

    M: np.ndarray
    C: np.ndarray
    K: np.ndarray
    f_nl: MultiPolynomial | None = None
    G0: np.ndarray | None = None
    g_nl: MultiPolynomial | None = None
    forcing: HarmonicForcing | None = None

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        C = np.asarray(self.C, dtype=float)
        K = np.asarray(self.K, dtype=float)
        n = M.shape[0]
        if M.shape != (n, n) or C.shape != (n, n) or K.shape != (n, n):
            raise ModelError("M, C, K must be square matrices of equal size")
        object.__setattr__(self, "M", M.copy())
        object.__setattr__(self, "C", C.copy())
        object.__setattr__(self, "K", K.copy())
        G0 = self.G0
        if G0 is not None:
            G0 = np.atleast_2d(np.asarray(G0, dtype=float))
            if G0.shape[1] != n:
                raise ModelError("G0 must have n columns")
            object.__setattr__(self, "G0", G0.copy())
        if self.f_nl is not None and self.f_nl.input_dim != 2 * n:
            raise ModelError("f_nl must take (x, xdot) of dimension 2n")
        if self.f_nl is not None and self.f_nl.output_dim != n:
            raise ModelError("f_nl must produce n components")
        if self.g_nl is not None:
            if G0 is None:
                raise ModelError("g_nl given without G0")
            if self.g_nl.input_dim != n or self.g_nl.output_dim != G0.shape[0]:
                raise ModelError("g_nl must map R^n -> R^{n_c}")
        if self.forcing is not None and self.forcing.shape.shape != (n,):
            raise ModelError("forcing shape must have length n")

    @property
    def n(self):
        return self.M.shape[0]

    @property
    def n_c(self):
        return 0 if self.G0 is None else self.G0.shape[0]

    # ------------------------------------------------------------------
    # pointwise evaluators used by the reformulations
    # ------------------------------------------------------------------
    def f_eval(self, x, xd):
        if self.f_nl is None:
            return np.zeros(self.n)
        return self.f_nl.eval(np.concatenate([x, xd])).real

    def g_eval(self, x):
        if self.G0 is None:
            return np.zeros(0)
        g = self.G0 @ x
        if self.g_nl is not None:
            g = g + self.g_nl.eval(x).real
        return g

    def G_eval(self, x):
        if self.G0 is None:
            return np.zeros((0, self.n))
        G = self.G0.copy()
        if self.g_nl is not None:
            G = G + self.g_nl.jacobian_at(x).real
        return G

    def Gdot_eval(self, x, xd):
        """d/dt of the constraint Jacobian along (x, xd)."""
        if self.G0 is None or self.g_nl is None:
            return np.zeros((self.n_c, self.n))
        J = self.g_nl.jacobian()  # rows n_c*n, inputs x
        out = np.zeros((self.n_c, self.n))
        for v in range(self.n):
            out += J.partial(v).eval(x).real.reshape(self.n_c, self.n) * xd[v]
        return out

    def fext_shape(self):
        if self.forcing is None:
            return np.zeros(self.n)
        return self.forcing.shape


@dataclass(frozen=True)
class MechanicalCallables:
    """Duck-typed constrained system with closed-form nonlinearities.

    Same contract as :class:`SecondOrderSystem` evaluators but with
    arbitrary (e.g. trigonometric) functions; used for full-order
    reference models whose constraints are not polynomial.
    """

    n: int
    n_c: int
    M: np.ndarray
    C: np.ndarray
    K: np.ndarray
    f: callable          # f(x, xd) -> R^n nonlinear force
    g: callable          # g(x) -> R^{n_c}
    G: callable          # G(x) -> (n_c, n)
    Gdot: callable       # Gdot(x, xd) -> (n_c, n)
    shape: np.ndarray = None

    def f_eval(self, x, xd):
        return self.f(x, xd)

    def g_eval(self, x):
        return self.g(x)

    def G_eval(self, x):
        return self.G(x)

    def Gdot_eval(self, x, xd):
        return self.Gdot(x, xd)

    def fext_shape(self):
        if self.shape is None:
            return np.zeros(self.n)
        return np.asarray(self.shape, dtype=float)


@dataclass(frozen=True)
class DAELayout:
    """Index ranges of the first-order state z = (x, xdot, mu, aux)."""

    n: int
    n_c: int
    n_aux: int = 0

    @property
    def N(self):
        return 2 * self.n + self.n_c + 2 * self.n_aux

    @property
    def x(self):
        return slice(0, self.n)

    @property
    def xd(self):
        return slice(self.n, 2 * self.n)

    @property
    def mu(self):
        return slice(2 * self.n, 2 * self.n + self.n_c)

    @property
    def aux(self):
        return slice(2 * self.n + self.n_c, self.N)


@dataclass(frozen=True)
class FirstOrderDAE:
    """First-order form  B z' = A z + F(z) + eps * fext_shape * cos(Omega t).

    For purely mechanical systems B carries the singular block structure
    with zero rows for the multiplier equations; recast systems append
    auxiliary states (sin/1-cos pairs) after the multipliers.
    """

    A: np.ndarray
    B: np.ndarray
    F: MultiPolynomial | None
    fext_shape: np.ndarray
    layout: DAELayout

    def __post_init__(self):
        N = self.layout.N
        if self.A.shape != (N, N) or self.B.shape != (N, N):
            raise ModelError("A, B must be (N, N) matrices")
        if self.fext_shape.shape != (N,):
            raise ModelError("fext_shape must have length N")
        if self.F is not None and (
            self.F.input_dim != N or self.F.output_dim != N
        ):
            raise ModelError("F must map R^N -> R^N")

    @property
    def N(self):
        return self.layout.N

    def F_eval(self, z):
        if self.F is None:
            return np.zeros(self.N, dtype=complex)
        return self.F.eval(z)

    def pencil_regular(self, rng=None, probes=4):
        """Probe det(lambda B - A) at random lambda values."""
        rng = np.random.default_rng(0 if rng is None else rng)
        scale = max(np.abs(self.A).max(), np.abs(self.B).max(), 1.0)
        for _ in range(probes):
            lam = complex(rng.standard_normal(), rng.standard_normal())
            s = np.linalg.svd(lam * self.B - self.A, compute_uv=False)
            if s[-1] > 1e-10 * scale:
                return True
        return False


def _embed_fnl_terms(f_nl, n, n_c, N, n_aux=0):
    """Pad f_nl exponents from (x, xd) space into z = (x, xd, mu, aux)."""
    terms = {}
    pad = (0,) * (n_c + 2 * n_aux)
    for e, v in f_nl.terms.items():
        vec = np.zeros(N, dtype=complex)
        vec[:n] = -v
        terms[e + pad] = vec
    return terms


def assemble_first_order(sys: SecondOrderSystem) -> FirstOrderDAE:
    """Build the first-order DAE on z = (x, xdot, mu).

    The nonlinear part collects -f_nl(x, xdot) - G_nl(x)^T mu in the force
    rows and g_nl(x) in the constraint rows.
    """
    n, n_c = sys.n, sys.n_c
    layout = DAELayout(n, n_c)
    N = layout.N
    if n_c > 0:
        if np.linalg.matrix_rank(sys.G0, tol=1e-10 * max(1, abs(sys.G0).max())) < n_c:
            raise ModelError("redundant constraints: G0 is rank-deficient")

    A = np.zeros((N, N))
    B = np.zeros((N, N))
    A[:n, :n] = -sys.K
    B[:n, :n] = sys.C
    B[:n, n:2 * n] = sys.M
    A[n:2 * n, n:2 * n] = sys.M
    B[n:2 * n, :n] = sys.M
    if n_c > 0:
        A[:n, 2 * n:] = -sys.G0.T
        A[2 * n:, :n] = sys.G0

    terms = {}
    if sys.f_nl is not None:
        terms.update(_embed_fnl_terms(sys.f_nl, n, n_c, N))
    if sys.g_nl is not None:
        # constraint rows: +g_nl(x)
        for e, v in sys.g_nl.terms.items():
            key = e + (0,) * (n + n_c)
            vec = terms.get(key)
            if vec is None:
                vec = np.zeros(N, dtype=complex)
            else:
                vec = vec.copy()
            vec[2 * n:] += v
            terms[key] = vec
        # force rows: -(G_nl(x))^T mu, from term-wise differentiation of g_nl
        for e, v in sys.g_nl.terms.items():
            for j in range(n):
                if e[j] == 0:
                    continue
                de = tuple(x - 1 if i == j else x for i, x in enumerate(e))
                for c in range(n_c):
                    if v[c] == 0:
                        continue
                    key = de + (0,) * n + tuple(
                        1 if i == c else 0 for i in range(n_c)
                    )
                    vec = terms.get(key)
                    if vec is None:
                        vec = np.zeros(N, dtype=complex)
                    else:
                        vec = vec.copy()
                    vec[j] -= e[j] * v[c]
                    terms[key] = vec

    F = MultiPolynomial(N, N, terms) if terms else None
    fext = np.zeros(N)
    fext[:n] = sys.fext_shape()
    return FirstOrderDAE(A=A, B=B, F=F, fext_shape=fext, layout=layout)


@dataclass
class ValidationReport:
    """Report-only checks of the modelling assumptions."""

    g0_rank: int
    g0_full_rank: bool
    pencil_regular: bool
    mass_spd: bool
    min_fnl_degree: int | None
    min_gnl_degree: int | None
    nonlinearity_degree_ok: bool
    messages: list = field(default_factory=list)

    @property
    def ok(self):
        return (
            self.g0_full_rank
            and self.pencil_regular
            and self.mass_spd
            and self.nonlinearity_degree_ok
        )


def validate_system(sys: SecondOrderSystem, seed=0) -> ValidationReport:
    """Check constraint rank, pencil regularity, SPD mass and minimum
    nonlinearity degree.  Never raises; returns a report."""
    msgs = []
    n_c = sys.n_c
    if n_c > 0:
        rank = int(np.linalg.matrix_rank(sys.G0))
        full = rank == n_c
        if not full:
            msgs.append(f"G0 rank {rank} < n_c = {n_c} (redundant constraints)")
    else:
        rank, full = 0, True

    try:
        sla.cholesky(sys.M)
        spd = bool(np.allclose(sys.M, sys.M.T))
        if not np.allclose(sys.M, sys.M.T):
            msgs.append("mass matrix not symmetric")
    except sla.LinAlgError:
        spd = False
        msgs.append("mass matrix not positive definite")

    if full:
        try:
            dae = assemble_first_order(sys)
            regular = dae.pencil_regular(rng=seed)
        except ModelError:
            regular = False
    else:
        regular = False
    if not regular:
        msgs.append("pencil (A, B) appears irregular")

    def _mindeg(p):
        return None if p is None or not p.terms else p.min_term_degree()

    dmin_f = _mindeg(sys.f_nl)
    dmin_g = _mindeg(sys.g_nl)
    deg_ok = (dmin_f is None or dmin_f >= 2) and (dmin_g is None or dmin_g >= 2)
    if not deg_ok:
        msgs.append("nonlinearities contain constant or linear terms")

    return ValidationReport(
        g0_rank=rank,
        g0_full_rank=full,
        pencil_regular=regular,
        mass_spd=spd,
        min_fnl_degree=dmin_f,
        min_gnl_degree=dmin_g,
        nonlinearity_degree_ok=deg_ok,
        messages=msgs,
    )


# ----------------------------------------------------------------------
# Maggi reduction to an implicit ODE on (x, e)
# ----------------------------------------------------------------------
def constraint_completion(G0):
    """Orthonormal completion: rows of Gcheck span the orthogonal
    complement of the row space of G0, so [G0; Gcheck] is invertible."""
    Z = sla.null_space(G0)  # (n, n - n_c), orthonormal columns
    return Z.T


@dataclass
class ImplicitODE:
    """State-dependent implicit ODE  B(z) z' = A(z) z + F(z) + eps Fext.

    State z = (x, e) with generalized speeds e of dimension n - n_c.
    For linear constraints the coefficient matrices are constant.
    """

    sys: SecondOrderSystem
    alpha: float
    Gcheck: np.ndarray

    @property
    def dim(self):
        return 2 * self.sys.n - self.sys.n_c

    def _gammas(self, x):
        """Gamma(x), Gamma_check(x) from inverting [G(x); Gcheck]."""
        n, n_c = self.sys.n, self.sys.n_c
        X = np.vstack([self.sys.G_eval(x), self.Gcheck])
        Xinv = np.linalg.inv(X)
        return Xinv[:, n_c:], Xinv[:, :n_c]  # Gamma (n, n-n_c), Gcheck_inv part

    def _gamma_dots(self, x, xd):
        """Time derivatives of the inverse blocks along (x, xd)."""
        n, n_c = self.sys.n, self.sys.n_c
        X = np.vstack([self.sys.G_eval(x), self.Gcheck])
        Xinv = np.linalg.inv(X)
        Xdot = np.vstack([self.sys.Gdot_eval(x, xd), np.zeros_like(self.Gcheck)])
        D = -Xinv @ Xdot @ Xinv
        return D[:, n_c:], D[:, :n_c]  # Gamma_dot, Gammacheck_dot

    def xdot_of(self, x, e):
        Gam, Gch = self._gammas(x)
        return Gam @ e - self.alpha * (Gch @ self.sys.g_eval(x))

    def coefficient_matrices(self, z):
        """(Bz, Az, Fz) evaluated at state z = (x, e), unforced part."""
        s = self.sys
        n, n_c = s.n, s.n_c
        x, e = z[:n], z[n:]
        Gam, Gch = self._gammas(x)
        G = s.G_eval(x)
        xd = Gam @ e - self.alpha * (Gch @ s.g_eval(x))

        Bz = np.zeros((self.dim, self.dim))
        Bz[:n, :n] = np.eye(n)
        Bz[n:, :n] = Gam.T @ s.C - self.alpha * (Gam.T @ s.M @ Gch @ G)
        Bz[n:, n:] = Gam.T @ s.M @ Gam

        Az = np.zeros((self.dim, self.dim))
        if n_c > 0:
            Az[:n, :n] = -self.alpha * (Gch @ s.G0)
        Az[:n, n:] = Gam
        Az[n:, :n] = -Gam.T @ s.K

        Gam_dot, Gch_dot = self._gamma_dots(x, xd)
        g = s.g_eval(x)
        gnl = g - (s.G0 @ x if n_c > 0 else 0.0)
        Fz = np.zeros(self.dim)
        if n_c > 0:
            Fz[:n] = -self.alpha * (Gch @ gnl)
        Fz[n:] = (
            -Gam.T @ s.f_eval(x, xd)
            - Gam.T @ s.M @ (Gam_dot @ e)
            + self.alpha * (Gam.T @ s.M @ (Gch_dot @ g))
        )
        return Bz, Az, Fz

    def rhs(self, t, z, eps=0.0, omega=0.0):
        Bz, Az, Fz = self.coefficient_matrices(z)
        n = self.sys.n
        rhs = Az @ z + Fz
        if eps != 0.0:
            x = z[:n]
            Gam, _ = self._gammas(x)
            fe = np.zeros(self.dim)
            fe[n:] = Gam.T @ self.sys.fext_shape() * np.cos(omega * t)
            rhs = rhs + eps * fe
        return np.linalg.solve(Bz, rhs)

    def linear_pencil(self):
        """Constant matrices of the linearization at the origin."""
        z0 = np.zeros(self.dim)
        Bz, Az, _ = self.coefficient_matrices(z0)
        return Az, Bz


def maggi_reduce(sys: SecondOrderSystem, alpha: float) -> ImplicitODE:
    """Reformulate the constrained system as an implicit ODE on (x, e).

    `alpha` is the constraint-stabilization rate; it must stay away from
    the magnitudes of the finite system eigenvalues so the reduction does
    not collide with physical dynamics.
    """
    if alpha <= 0:
        raise ModelError("alpha must be positive")
    if sys.n_c == 0:
        return ImplicitODE(sys=sys, alpha=alpha, Gcheck=np.eye(sys.n))
    # alpha collision check against the finite spectrum
    quad = alpha**2 * sys.M - alpha * sys.C + sys.K
    if np.linalg.cond(quad) > 1e12:
        raise ModelError("alpha coincides with a system eigenvalue")
    from .spectral import solve_pencil  # local import avoids a cycle

    spec = solve_pencil(assemble_first_order(sys))
    mags = np.array([abs(lam) for lam, _, _ in spec.finite])
    if mags.size and np.min(np.abs(mags - alpha)) < 1e-8 * max(alpha, 1.0):
        raise ModelError("alpha coincides with a finite eigenvalue magnitude")
    return ImplicitODE(sys=sys, alpha=alpha, Gcheck=constraint_completion(sys.G0))


# ----------------------------------------------------------------------
# Index-1 reduction with stabilization to an explicit ODE on (x, xdot)
# ----------------------------------------------------------------------
@dataclass
class ExplicitODE:
    """Explicit second-order ODE with multiplier recovery.

    The constraint g = 0 is replaced by g'' + alpha g' + beta g = 0,
    eliminating the multipliers through the mass-weighted projector.
    Consistent initial conditions keep the constraint drift bounded.
    """

    sys: object          # SecondOrderSystem or MechanicalCallables
    alpha: float
    beta: float

    def __post_init__(self):
        self._M = np.asarray(self.sys.M, dtype=float)
        self._diag_mass = bool(
            np.count_nonzero(self._M - np.diag(np.diag(self._M))) == 0
        )
        if self._diag_mass:
            self._minv = 1.0 / np.diag(self._M)
            self._Mlu = None
        else:
            self._minv = None
            self._Mlu = sla.lu_factor(self._M)
        self._shape = self.sys.fext_shape()

    @property
    def n(self):
        return self.sys.n

    @property
    def n_c(self):
        return self.sys.n_c

    def _minv_apply(self, v):
        if self._diag_mass:
            return (v.T * self._minv).T if v.ndim == 2 else v * self._minv
        return sla.lu_solve(self._Mlu, v, check_finite=False)

    def _fhat(self, t, x, xd, eps, omega):
        s = self.sys
        f = -(s.C @ xd) - (s.K @ x) - s.f_eval(x, xd)
        if eps != 0.0:
            f = f + (eps * np.cos(omega * t)) * self._shape
        return f

    def _solve_mu(self, t, x, xd, eps, omega):
        s = self.sys
        fhat = self._fhat(t, x, xd, eps, omega)
        if self.n_c == 0:
            return fhat, np.zeros(0), None
        G = s.G_eval(x)
        g = s.g_eval(x)
        c = -self.alpha * (G @ xd) - self.beta * g - s.Gdot_eval(x, xd) @ xd
        Minv_f = self._minv_apply(fhat)
        Minv_GT = self._minv_apply(G.T)
        S = G @ Minv_GT
        try:
            mu = -np.linalg.solve(S, c - G @ Minv_f)
        except np.linalg.LinAlgError as exc:
            raise ModelError(
                f"constraint Jacobian rank drop at t = {t:g}"
            ) from exc
        return fhat, mu, G

    def rhs(self, t, y, eps=0.0, omega=0.0):
        n = self.n
        x, xd = y[:n], y[n:]
        fhat, mu, G = self._solve_mu(t, x, xd, eps, omega)
        if self.n_c:
            fhat = fhat - G.T @ mu
        xdd = self._minv_apply(fhat)
        return np.concatenate([xd, xdd])

    def multipliers(self, t, y, eps=0.0, omega=0.0):
        n = self.n
        _, mu, _ = self._solve_mu(t, y[:n], y[n:], eps, omega)
        return mu

    def constraint_violation(self, y):
        n = self.n
        x, xd = y[:n], y[n:]
        g = self.sys.g_eval(x)
        gd = self.sys.G_eval(x) @ xd if self.n_c else np.zeros(0)
        return np.linalg.norm(g), np.linalg.norm(gd)


def index1_reduce(sys, alpha: float = 20.0, beta: float = 20.0) -> ExplicitODE:
    """Stabilized index-1 explicit ODE for a constrained system.

    Accepts a :class:`SecondOrderSystem` or any object exposing the same
    evaluator contract (see :class:`MechanicalCallables`).
    """
    if alpha <= 0 or beta <= 0:
        raise ModelError("stabilization parameters must be positive")
    return ExplicitODE(sys=sys, alpha=alpha, beta=beta)
