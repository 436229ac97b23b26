"""Factory for the built-in benchmark systems.

Each builder returns an :class:`ExampleModel` bundling the polynomial
first-order DAE (analysis path), a full-order mechanical description for
the reference simulator, and, where available, a minimal-coordinate ODE
for independent validation.

Built-in names:

``oscillator3d[:none|cubic|spherical]``
    Three-dof spatial oscillator with quadratic/cubic coupling, optionally
    restricted to a cubic or spherical surface.
``pendulum``
    Damped pendulum, rewritten as a 4-state polynomial DAE.
``pendulum_slider``
    Slider with a suspended rigid rod; near 1:3 internal resonance.
``pendulum_chain``
    Slider carrying a chain of hinged rods (default 41 bodies).
``divider_rom``
    Reduced dynamics of a 1:2 internally resonant two-beam assembly,
    preloaded with published polar coefficients; forcing amplitude of the
    resonant mode is a synthetic user parameter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    HarmonicForcing,
    MechanicalCallables,
    ModelError,
    SecondOrderSystem,
    assemble_first_order,
)
from .polytensor import MultiPolynomial
from .recast import (
    BinOp,
    Func,
    Num,
    TrigMechanicalSystem,
    Var,
    polynomialize,
)

__all__ = ["ExampleSpec", "ExampleModel", "build_example", "shift_equilibrium"]

EXAMPLE_NAMES = (
    "oscillator3d",
    "pendulum",
    "pendulum_slider",
    "pendulum_chain",
    "divider_rom",
)


@dataclass
class ExampleSpec:
    """Name plus parameter overrides; defaults reproduce the published
    parameter sets."""

    name: str
    overrides: dict = field(default_factory=dict)


@dataclass
class ExampleModel:
    name: str
    params: dict
    dae: object                      # FirstOrderDAE
    sys: object = None               # SecondOrderSystem (polynomial path)
    full: object = None              # system for index-1 full simulation
    trig: object = None              # TrigMechanicalSystem (if recast)
    plan: object = None              # RecastPlan (if recast)
    reference_ode: object = None     # callable(t, y, eps, omega)
    reference_dim: int = 0
    dof_names: dict = field(default_factory=dict)
    multiplier_recovery: object = None
    rom: object = None               # preloaded ROM (divider only)


def build_example(spec, **overrides) -> ExampleModel:
    """Build a named example.  `spec` is an ExampleSpec or a name string;
    keyword overrides update the default parameters."""
    if isinstance(spec, ExampleSpec):
        name, params = spec.name, dict(spec.overrides)
    else:
        name, params = str(spec), {}
    params.update(overrides)

    constraint = None
    if ":" in name:
        name, constraint = name.split(":", 1)
    if name == "oscillator3d":
        return _oscillator3d(constraint or params.pop("constraint", "none"), **params)
    if name == "pendulum":
        return _pendulum(**params)
    if name == "pendulum_slider":
        return _pendulum_slider(**params)
    if name == "pendulum_chain":
        return _pendulum_chain(**params)
    if name == "divider_rom":
        return _divider_rom(**params)
    raise ModelError(
        f"unknown example {name!r}; available: {', '.join(EXAMPLE_NAMES)}"
    )


# ----------------------------------------------------------------------
# spatial oscillator with a path constraint
# ----------------------------------------------------------------------
def _oscillator3d(
    constraint="none",
    zeta=(0.01, 0.05, 0.05),
    omega=(2.0, 3.0, 5.0),
    f1=1.0,
):
    z1, z2, z3 = zeta
    w1, w2, w3 = omega
    wsq = np.array([w1**2, w2**2, w3**2])
    ssum = wsq.sum() / 2.0

    M = np.eye(3)
    C = np.diag([2 * z1 * w1, 2 * z2 * w2, 2 * z3 * w3])
    K = np.diag(wsq)

    def e(*pairs):
        # exponent tuple over (x1, x2, x3, xd1, xd2, xd3)
        v = [0] * 6
        for idx, p in pairs:
            v[idx] += p
        return tuple(v)

    terms = {}

    def add(exps, row, coef):
        vec = terms.setdefault(exps, np.zeros(3, dtype=complex))
        vec[row] += coef

    for i in range(3):
        others = [j for j in range(3) if j != i]
        add(e((i, 2)), i, 1.5 * wsq[i])
        for j in others:
            add(e((j, 2)), i, 0.5 * wsq[i])
            add(e((i, 1), (j, 1)), i, wsq[j])
        for j in range(3):
            add(e((i, 1), (j, 2)), i, ssum)

    f_nl = MultiPolynomial(6, 3, terms)
    forcing = HarmonicForcing(shape=np.array([f1, 0.0, 0.0]))

    if constraint in (None, "none"):
        G0, g_nl = None, None
    elif constraint == "cubic":
        G0 = np.array([[0.0, 0.0, 1.0]])
        g_nl = MultiPolynomial(
            3, 1, {(3, 0, 0): [-1.0], (0, 3, 0): [-1.0]}
        )
    elif constraint == "spherical":
        G0 = np.array([[0.0, 0.0, -2.0]])
        g_nl = MultiPolynomial(
            3, 1, {(2, 0, 0): [1.0], (0, 2, 0): [1.0], (0, 0, 2): [1.0]}
        )
    else:
        raise ModelError(f"unknown oscillator constraint {constraint!r}")

    sys = SecondOrderSystem(
        M=M, C=C, K=K, f_nl=f_nl, G0=G0, g_nl=g_nl, forcing=forcing
    )
    return ExampleModel(
        name=f"oscillator3d:{constraint or 'none'}",
        params=dict(zeta=zeta, omega=omega, f1=f1, constraint=constraint),
        dae=assemble_first_order(sys),
        sys=sys,
        full=sys,
        dof_names={"x1": 0, "x2": 1, "x3": 2},
    )


# ----------------------------------------------------------------------
# simple pendulum
# ----------------------------------------------------------------------
def _pendulum(c=0.1, f1=1.0):
    trig = TrigMechanicalSystem(
        coords=["phi"],
        speeds=["w"],
        multipliers=[],
        M=np.array([[1.0]]),
        lhs=[
            BinOp("+", BinOp("*", Num(c), Var("w")), Func("sin", Var("phi")))
        ],
        constraints=[],
        shape=np.array([f1]),
    )
    dae, plan = polynomialize(trig)

    def reference_ode(t, y, eps=0.0, omega=0.0):
        phi, w = y
        return np.array(
            [w, -c * w - np.sin(phi) + eps * f1 * np.cos(omega * t)]
        )

    return ExampleModel(
        name="pendulum",
        params=dict(c=c, f1=f1),
        dae=dae,
        trig=trig,
        plan=plan,
        reference_ode=reference_ode,
        reference_dim=2,
        dof_names={"phi": 0},
    )


# ----------------------------------------------------------------------
# pendulum on a slider, near 1:3 internal resonance
# ----------------------------------------------------------------------
def _pendulum_slider(
    m1=1.0,
    m2=1.0,
    c1=0.02,
    c2=0.02,
    k1=7.48,
    k2=1.0,
    g=9.8,
    l=1.0,
    J2=None,
    f1=1.0,
):
    if J2 is None:
        J2 = m2 * l**2 / 12.0  # uniform rod about its center
    hl = 0.5 * l

    # hatted variables: y2 -> y2h + l/2, mu1 -> mu1h + (m1+m2) g,
    # mu3 -> mu3h + m2 g; constants cancel identically.
    x1, y1, x2, y2h, phi2 = (Var(s) for s in ("x1", "y1", "x2", "y2h", "phi2"))
    vx1, w2 = Var("vx1"), Var("w2")
    mu1h, mu2, mu3h = Var("mu1h"), Var("mu2"), Var("mu3h")

    def mul(*args):
        tree = args[0]
        for a in args[1:]:
            tree = BinOp("*", tree, a)
        return tree

    def add(*args):
        tree = args[0]
        for a in args[1:]:
            tree = BinOp("+", tree, a)
        return tree

    def sub(a, b):
        return BinOp("-", a, b)

    lhs = [
        add(mul(Num(c1), vx1), mul(Num(k1), x1), mul(Num(-1.0), mu2)),
        sub(mu1h, mu3h),
        mu2,
        mu3h,
        add(
            mul(Num(c2), w2),
            mul(Num(k2), phi2),
            mul(Num(-hl), mu2, Func("cos", phi2)),
            mul(Num(hl), add(mu3h, Num(m2 * g)), Func("sin", phi2)),
        ),
    ]
    constraints = [
        y1,
        sub(sub(x2, x1), mul(Num(hl), Func("sin", phi2))),
        add(sub(y2h, y1), mul(Num(hl), sub(Num(1.0), Func("cos", phi2)))),
    ]
    trig = TrigMechanicalSystem(
        coords=["x1", "y1", "x2", "y2h", "phi2"],
        speeds=["vx1", "vy1", "vx2", "vy2h", "w2"],
        multipliers=["mu1h", "mu2", "mu3h"],
        M=np.diag([m1, m1, m2, m2, J2]),
        lhs=lhs,
        constraints=constraints,
        shape=np.array([f1, 0, 0, 0, 0]),
    )
    dae, plan = polynomialize(trig)

    # full-order trig model for the index-1 reference simulation
    def f_full(x, xd):
        out = np.zeros(5)
        out[4] = hl * m2 * g * np.sin(x[4])
        return out

    def g_full(x):
        return np.array(
            [
                x[1],
                x[2] - x[0] - hl * np.sin(x[4]),
                x[3] - x[1] + hl * (1.0 - np.cos(x[4])),
            ]
        )

    def G_full(x):
        G = np.zeros((3, 5))
        G[0, 1] = 1.0
        G[1, 0], G[1, 2], G[1, 4] = -1.0, 1.0, -hl * np.cos(x[4])
        G[2, 1], G[2, 3], G[2, 4] = -1.0, 1.0, hl * np.sin(x[4])
        return G

    def Gdot_full(x, xd):
        Gd = np.zeros((3, 5))
        Gd[1, 4] = hl * np.sin(x[4]) * xd[4]
        Gd[2, 4] = hl * np.cos(x[4]) * xd[4]
        return Gd

    full = MechanicalCallables(
        n=5,
        n_c=3,
        M=np.diag([m1, m1, m2, m2, J2]),
        C=np.diag([c1, 0, 0, 0, c2]),
        K=np.diag([k1, 0, 0, 0, k2]),
        f=f_full,
        g=g_full,
        G=G_full,
        Gdot=Gdot_full,
        shape=np.array([f1, 0, 0, 0, 0]),
    )

    mt = m1 + m2

    def reference_ode(t, y, eps=0.0, omega=0.0):
        q1, p2, v1, w = y
        cp, sp = np.cos(p2), np.sin(p2)
        Mm = np.array([[mt, hl * m2 * cp], [hl * m2 * cp, J2 + m2 * hl**2]])
        rhs = np.array(
            [
                hl * m2 * sp * w**2
                - c1 * v1
                - k1 * q1
                + eps * f1 * np.cos(omega * t),
                -c2 * w - k2 * p2 - hl * m2 * g * sp,
            ]
        )
        acc = np.linalg.solve(Mm, rhs)
        return np.array([v1, w, acc[0], acc[1]])

    def multiplier_recovery(t, y, eps=0.0, omega=0.0):
        """mu2, mu3h from back-substitution into the particle equations."""
        q1, p2, v1, w = y
        dy = reference_ode(t, y, eps, omega)
        a1, aw = dy[2], dy[3]
        cp, sp = np.cos(p2), np.sin(p2)
        x2dd = a1 + hl * (cp * aw - sp * w**2)
        y2hdd = hl * (-sp * aw - cp * w**2)
        return np.array([-m2 * x2dd, -m2 * y2hdd])

    return ExampleModel(
        name="pendulum_slider",
        params=dict(m1=m1, m2=m2, c1=c1, c2=c2, k1=k1, k2=k2, g=g, l=l,
                    J2=J2, f1=f1),
        dae=dae,
        trig=trig,
        plan=plan,
        full=full,
        reference_ode=reference_ode,
        reference_dim=4,
        multiplier_recovery=multiplier_recovery,
        dof_names={"x1": 0, "y1": 1, "x2": 2, "y2h": 3, "phi2": 4},
    )


# ----------------------------------------------------------------------
# chain of pendulums on a slider
# ----------------------------------------------------------------------
def _pendulum_chain(
    n=41,
    m1=0.61,
    m_rod=0.02,
    c1=0.22,
    c=0.02,
    k1=6.5,
    k=4.1,
    l=0.03,
    J=None,
    f1=1.0,
):
    if n < 2:
        raise ModelError("pendulum_chain requires n >= 2")
    if J is None:
        J = m_rod * l**2 / 12.0
    hl = 0.5 * l
    masses = [m1] + [m_rod] * (n - 1)
    g = 9.8

    # coordinate names and index helpers
    coords = ["x1", "y1"]
    speeds = ["vx1", "vy1"]
    for i in range(2, n + 1):
        coords += [f"x{i}", f"y{i}", f"phi{i}"]
        speeds += [f"vx{i}", f"vy{i}", f"w{i}"]
    nq = len(coords)

    def ix(i):
        return 0 if i == 1 else 2 + 3 * (i - 2)

    def iy(i):
        return 1 if i == 1 else 3 + 3 * (i - 2)

    def iphi(i):
        return 4 + 3 * (i - 2)

    mus = [f"mu{j}" for j in range(1, 2 * n)]
    n_c = 2 * n - 1

    def V(name):
        return Var(name)

    def mul(*args):
        tree = args[0]
        for a in args[1:]:
            tree = BinOp("*", tree, a)
        return tree

    def add(*args):
        tree = args[0]
        for a in args[1:]:
            tree = BinOp("+", tree, a)
        return tree

    def lin(*pairs):
        # sum of coef * Var terms
        parts = [mul(Num(float(cf)), V(nm)) for cf, nm in pairs if cf != 0]
        if not parts:
            return Num(0.0)
        return add(*parts) if len(parts) > 1 else parts[0]

    # supported weight above joint j: W[i] = sum_{j=i..n} m_j g
    W = np.zeros(n + 2)
    for i in range(n, 0, -1):
        W[i] = W[i + 1] + masses[i - 1] * g

    # unshifted equations of motion; gravity constants removed by the
    # multiplier/elevation shift applied below through mu* and y*.
    lhs = [None] * nq
    lhs[ix(1)] = add(lin((c1, "vx1"), (k1, "x1")), mul(Num(-1.0), V("mu2")))
    lhs[iy(1)] = add(Num(-masses[0] * g), V("mu1"), mul(Num(-1.0), V("mu3")))
    for i in range(2, n + 1):
        mi = masses[i - 1]
        # x_i row: mu_{2(i-1)} - mu_{2i}
        terms = [V(f"mu{2 * (i - 1)}")]
        if i < n:
            terms.append(mul(Num(-1.0), V(f"mu{2 * i}")))
        lhs[ix(i)] = add(*terms) if len(terms) > 1 else terms[0]
        # y_i row: -m g + mu_{2i-1} - mu_{2i+1}
        terms = [Num(-mi * g), V(f"mu{2 * i - 1}")]
        if i < n:
            terms.append(mul(Num(-1.0), V(f"mu{2 * i + 1}")))
        lhs[iy(i)] = add(*terms)
        # phi_i row
        if i == n:
            damp = lin((c, f"w{n}"), (-c, f"w{n - 1}")) if n > 2 else lin((c, f"w{n}"))
            stiff = lin((k, f"phi{n}"), (-k, f"phi{n - 1}")) if n > 2 else lin((k, f"phi{n}"))
            if n == 2:
                damp = lin((c, "w2"))
                stiff = lin((k, "phi2"))
        elif i == 2:
            damp = lin((2 * c, "w2"), (-c, "w3"))
            stiff = lin((2 * k, "phi2"), (-k, "phi3"))
        else:
            damp = lin((2 * c, f"w{i}"), (-c, f"w{i - 1}"), (-c, f"w{i + 1}"))
            stiff = lin((2 * k, f"phi{i}"), (-k, f"phi{i - 1}"), (-k, f"phi{i + 1}"))
        mu_cos = [V(f"mu{2 * (i - 1)}")]
        mu_sin = [V(f"mu{2 * i - 1}")]
        if i < n:
            mu_cos.append(V(f"mu{2 * i}"))
            mu_sin.append(V(f"mu{2 * i + 1}"))
        cos_term = mul(
            Num(-hl),
            add(*mu_cos) if len(mu_cos) > 1 else mu_cos[0],
            Func("cos", V(f"phi{i}")),
        )
        sin_term = mul(
            Num(hl),
            add(*mu_sin) if len(mu_sin) > 1 else mu_sin[0],
            Func("sin", V(f"phi{i}")),
        )
        lhs[iphi(i)] = add(damp, stiff, cos_term, sin_term)

    constraints = [V("y1")]
    constraints.append(
        add(V("x2"), mul(Num(-hl), Func("sin", V("phi2"))), mul(Num(-1.0), V("x1")))
    )
    constraints.append(
        add(V("y2"), mul(Num(-hl), Func("cos", V("phi2"))), mul(Num(-1.0), V("y1")))
    )
    for i in range(2, n):
        constraints.append(
            add(
                V(f"x{i + 1}"),
                mul(Num(-hl), Func("sin", V(f"phi{i + 1}"))),
                mul(Num(-1.0), V(f"x{i}")),
                mul(Num(-hl), Func("sin", V(f"phi{i}"))),
            )
        )
        constraints.append(
            add(
                V(f"y{i + 1}"),
                mul(Num(-hl), Func("cos", V(f"phi{i + 1}"))),
                mul(Num(-1.0), V(f"y{i}")),
                mul(Num(-hl), Func("cos", V(f"phi{i}"))),
            )
        )

    # shift rest state to the origin: y_i = yhat_i + l/2 + (i-2) l and
    # mu_{2i-1} = muhat_{2i-1} + W[i]
    subs = {}
    for i in range(2, n + 1):
        subs[f"y{i}"] = BinOp("+", V(f"y{i}"), Num(hl + (i - 2) * l))
    for i in range(1, n + 1):
        subs[f"mu{2 * i - 1}"] = BinOp("+", V(f"mu{2 * i - 1}"), Num(W[i]))
    lhs = [t.subst(subs) for t in lhs]
    constraints = [t.subst(subs) for t in constraints]

    Mdiag = np.zeros(nq)
    Mdiag[ix(1)] = Mdiag[iy(1)] = m1
    for i in range(2, n + 1):
        Mdiag[ix(i)] = Mdiag[iy(i)] = masses[i - 1]
        Mdiag[iphi(i)] = J
    shape = np.zeros(nq)
    shape[ix(1)] = f1

    trig = TrigMechanicalSystem(
        coords=coords,
        speeds=speeds,
        multipliers=mus,
        M=np.diag(Mdiag),
        lhs=lhs,
        constraints=constraints,
        shape=shape,
    )
    dae, plan = polynomialize(trig)

    # vectorized full-order trig model (hatted coordinates)
    Cmat = np.zeros((nq, nq))
    Kmat = np.zeros((nq, nq))
    Cmat[ix(1), ix(1)] = c1
    Kmat[ix(1), ix(1)] = k1
    # rotational stiffness/damping: phi_2 sprung to the slider, each
    # further hinge couples adjacent angles
    for i in range(2, n + 1):
        pi = iphi(i)
        if i == 2:
            Kmat[pi, pi] += k
            Cmat[pi, pi] += c
        else:
            Kmat[pi, pi] += k
            Cmat[pi, pi] += c
            Kmat[pi, iphi(i - 1)] -= k
            Cmat[pi, iphi(i - 1)] -= c
            Kmat[iphi(i - 1), pi] -= k
            Cmat[iphi(i - 1), pi] -= c
            Kmat[iphi(i - 1), iphi(i - 1)] += k
            Cmat[iphi(i - 1), iphi(i - 1)] += c

    phi_idx = np.array([iphi(i) for i in range(2, n + 1)])
    wsum = np.array([W[i] + W[i + 1] for i in range(2, n + 1)])

    def f_full(x, xd):
        out = np.zeros(nq)
        out[phi_idx] = hl * np.sin(x[phi_idx]) * wsum
        return out

    # constraint structure, precomputed once: constant entries plus
    # trig-dependent entries at (row, angle-column) pairs
    rows_x = np.arange(1, n)          # constraints g2, g4, ... (x-type)
    x_next = np.array([ix(i + 1) for i in range(1, n)])
    x_prev = np.array([ix(i) for i in range(1, n)])
    phi_next = np.array([iphi(i + 1) for i in range(1, n)])
    y_next = np.array([iy(i + 1) for i in range(1, n)])
    y_prev = np.array([iy(i) for i in range(1, n)])

    Gconst = np.zeros((n_c, nq))
    Gconst[0, iy(1)] = 1.0
    Gconst[2 * rows_x - 1, x_next] = 1.0
    Gconst[2 * rows_x - 1, x_prev] = -1.0
    Gconst[2 * rows_x, y_next] = 1.0
    Gconst[2 * rows_x, y_prev] = -1.0
    # sin-type rows get -hl cos(phi) entries, cos-type rows +hl sin(phi)
    rc, cc = [], []     # rows/cols of the -hl cos(phi) entries
    rs, cs = [], []     # rows/cols of the +hl sin(phi) entries
    for i in range(1, n):
        rc.append(2 * i - 1)
        cc.append(iphi(i + 1))
        rs.append(2 * i)
        cs.append(iphi(i + 1))
        if i >= 2:
            rc.append(2 * i - 1)
            cc.append(iphi(i))
            rs.append(2 * i)
            cs.append(iphi(i))
    rc = np.array(rc); cc = np.array(cc)
    rs = np.array(rs); cs = np.array(cs)
    rows_y2 = 2 * rows_x
    phi_prev_list = np.array([iphi(i) for i in range(2, n)])
    rows_x2_prev = 2 * np.arange(2, n) - 1
    rows_y2_prev = 2 * np.arange(2, n)

    def g_full(x):
        g = np.zeros(n_c)
        g[0] = x[iy(1)]
        g[2 * rows_x - 1] = x[x_next] - x[x_prev] - hl * np.sin(x[phi_next])
        g[rows_y2] = x[y_next] - x[y_prev] + hl * (1 - np.cos(x[phi_next]))
        if phi_prev_list.size:
            g[rows_x2_prev] -= hl * np.sin(x[phi_prev_list])
            g[rows_y2_prev] += hl * (1 - np.cos(x[phi_prev_list]))
        return g

    def G_full(x):
        G = Gconst.copy()
        G[rc, cc] = -hl * np.cos(x[cc])
        G[rs, cs] = hl * np.sin(x[cs])
        return G

    def Gdot_full(x, xd):
        Gd = np.zeros((n_c, nq))
        Gd[rc, cc] = hl * np.sin(x[cc]) * xd[cc]
        Gd[rs, cs] = hl * np.cos(x[cs]) * xd[cs]
        return Gd

    full = MechanicalCallables(
        n=nq,
        n_c=n_c,
        M=np.diag(Mdiag),
        C=Cmat,
        K=Kmat,
        f=f_full,
        g=g_full,
        G=G_full,
        Gdot=Gdot_full,
        shape=shape,
    )

    dofs = {"x1": ix(1), f"phi{n}": iphi(n), f"y{n}": iy(n)}
    return ExampleModel(
        name="pendulum_chain",
        params=dict(n=n, m1=m1, m_rod=m_rod, c1=c1, c=c, k1=k1, k=k, l=l,
                    J=J, f1=f1),
        dae=dae,
        trig=trig,
        plan=plan,
        full=full,
        dof_names=dofs,
    )


# ----------------------------------------------------------------------
# 1:2 frequency-divider reduced dynamics (published coefficients)
# ----------------------------------------------------------------------
def _divider_rom(forcing=5.0):
    """Preloaded 4-dimensional reduced dynamics with a 1:2 inner
    resonance.  `forcing` is a synthetic amplitude of the resonant-mode
    projection of the load; published data does not fix it."""
    from .manifold import SSMExpansion
    from .spectral import MasterSubspace

    lam1 = complex(-0.03669, 22.66)
    lam2 = complex(-0.1468, 45.34)
    r1 = {
        (1, 0, 0, 0): lam1,
        (2, 1, 0, 0): complex(-5.642e-5, 2.635e-4),
        (1, 0, 1, 1): complex(-1.332e-8, -1.7e-6),
        (0, 1, 1, 0): complex(2.972e-4, -8.97e-3),
    }
    r3 = {
        (0, 0, 1, 0): lam2,
        (0, 0, 2, 1): complex(-7.761e-5, 3.538e-4),
        (1, 1, 1, 0): complex(-5.164e-9, -3.462e-7),
        (2, 0, 0, 0): complex(-3.027e-5, -9.135e-4),
    }

    def conj_exps(e):
        return (e[1], e[0], e[3], e[2])

    terms = {}
    for e, cval in r1.items():
        vec = terms.setdefault(e, np.zeros(4, dtype=complex))
        vec[0] += cval
        vec2 = terms.setdefault(conj_exps(e), np.zeros(4, dtype=complex))
        vec2[1] += np.conj(cval)
    for e, cval in r3.items():
        vec = terms.setdefault(e, np.zeros(4, dtype=complex))
        vec[2] += cval
        vec2 = terms.setdefault(conj_exps(e), np.zeros(4, dtype=complex))
        vec2[3] += np.conj(cval)
    R = MultiPolynomial(4, 4, terms)

    master = MasterSubspace(
        pair_labels=[1, 2],
        lambdas=np.array([lam1, lam2]),
        lam_vec=np.array([lam1, np.conj(lam1), lam2, np.conj(lam2)]),
        V=None,
        U=None,
        complement=np.array([]),
        layout=None,
    )
    s_plus = np.zeros(4, dtype=complex)
    s_plus[2] = forcing
    s_minus = np.zeros(4, dtype=complex)
    s_minus[3] = np.conj(forcing)
    rom = SSMExpansion(
        master=master,
        order=3,
        W=None,
        R=R,
        x_plus=None,
        x_minus=None,
        s_plus=s_plus,
        s_minus=s_minus,
        omega=45.34,
    )
    return ExampleModel(
        name="divider_rom",
        params=dict(forcing=forcing),
        dae=None,
        rom=rom,
    )


# ----------------------------------------------------------------------
# static equilibrium shift for polynomial systems
# ----------------------------------------------------------------------
def _shift_poly(p, offset):
    """Re-expand p(x + offset, xd) exactly; offset pads with zeros if
    shorter than input_dim."""
    from itertools import product as iproduct
    from math import comb

    off = np.zeros(p.input_dim)
    off[: len(offset)] = offset
    terms = {}
    for e, v in p.terms.items():
        shifted_vars = [i for i in range(p.input_dim) if e[i] > 0 and off[i] != 0]
        if not shifted_vars:
            terms[e] = terms.get(e, 0) + v
            continue
        ranges = [range(e[i] + 1) for i in shifted_vars]
        for picks in iproduct(*ranges):
            factor = 1.0
            ne = list(e)
            for i, kkeep in zip(shifted_vars, picks):
                k = e[i]
                factor *= comb(k, kkeep) * off[i] ** (k - kkeep)
                ne[i] = kkeep
            terms[tuple(ne)] = terms.get(tuple(ne), 0) + factor * v
    return MultiPolynomial(p.input_dim, p.output_dim, terms,
                           max_degree=p.max_degree)


def shift_equilibrium(sys: SecondOrderSystem, load) -> SecondOrderSystem:
    """Shift a statically loaded system so the origin is a fixed point.

    Solves  K x + f_nl(x, 0) + G(x)^T mu = load,  g(x) = 0  by Newton,
    then recenters all polynomials and absorbs the static multipliers
    into the constraint coupling.
    """
    load = np.asarray(load, dtype=float)
    n, n_c = sys.n, sys.n_c
    if not np.any(load):
        return sys

    x = np.zeros(n)
    mu = np.zeros(n_c)
    for _ in range(60):
        G = sys.G_eval(x)
        res_f = sys.K @ x + sys.f_eval(x, np.zeros(n)) - load
        if n_c:
            res_f = res_f + G.T @ mu
        res_g = sys.g_eval(x)
        res = np.concatenate([res_f, res_g])
        if np.linalg.norm(res) < 1e-12 * max(1.0, np.linalg.norm(load)):
            break
        # Jacobian blocks by finite differences on the polynomial force
        Jff = sys.K.copy()
        h = 1e-7
        for j in range(n):
            dx = np.zeros(n)
            dx[j] = h
            Jff[:, j] += (
                sys.f_eval(x + dx, np.zeros(n)) - sys.f_eval(x - dx, np.zeros(n))
            ) / (2 * h)
            if n_c:
                Jff[:, j] += (
                    (sys.G_eval(x + dx) - sys.G_eval(x - dx)).T @ mu
                ) / (2 * h)
        if n_c:
            Jac = np.block([[Jff, G.T], [G, np.zeros((n_c, n_c))]])
        else:
            Jac = Jff
        try:
            step = np.linalg.solve(Jac, -res)
        except np.linalg.LinAlgError as exc:
            raise ModelError("static equilibrium solve failed") from exc
        x = x + step[:n]
        if n_c:
            mu = mu + step[n:]
    else:
        raise ModelError("static equilibrium Newton did not converge")

    # recenter constraints first: new g(xh) = g(x* + xh)
    if n_c:
        g_total_terms = {}
        for j in range(n):
            e = tuple(1 if i == j else 0 for i in range(n))
            col = sys.G0[:, j]
            if np.any(col):
                g_total_terms[e] = col.astype(complex)
        gpoly = MultiPolynomial(n, n_c, g_total_terms)
        if sys.g_nl is not None:
            gpoly = gpoly + sys.g_nl
        gsh = _shift_poly(gpoly, x)
        const = gsh.terms.get((0,) * n)
        if const is not None and np.max(np.abs(const)) > 1e-9:
            raise ModelError("constraint not satisfied at static solution")
        G0_new = np.zeros((n_c, n))
        gnl_terms = {}
        for e, v in gsh.terms.items():
            d = sum(e)
            if d == 0:
                continue
            if d == 1:
                G0_new[:, e.index(1)] += v.real
            else:
                gnl_terms[e] = v
        g_nl_new = MultiPolynomial(n, n_c, gnl_terms) if gnl_terms else None
    else:
        G0_new, g_nl_new = None, None

    # force-side shift: f_nl(x*+xh, xd) + G_nl(x*+xh)^T mu* contributes
    # new linear (stiffness) and nonlinear parts
    fshift_terms = {}
    if sys.f_nl is not None:
        fZ = _shift_poly(sys.f_nl, x)
        for e, v in fZ.terms.items():
            fshift_terms[e] = fshift_terms.get(e, 0) + v
    if n_c and sys.g_nl is not None:
        Gnl = sys.g_nl.jacobian()  # rows n_c * n over x
        GnlS = _shift_poly(Gnl, x)
        for e, v in GnlS.terms.items():
            vec = np.zeros(n, dtype=complex)
            for c in range(n_c):
                vec += mu[c] * v[c * n:(c + 1) * n]
            if np.any(vec != 0):
                key = e + (0,) * n
                fshift_terms[key] = fshift_terms.get(key, 0) + vec
    # split into constant / linear / nonlinear over (x, xd)
    K_new = sys.K.copy()
    fnl_terms = {}
    for e, v in fshift_terms.items():
        ex = e if len(e) == 2 * n else e + (0,) * n
        d = sum(ex)
        if d == 0:
            continue  # cancels against load and static coupling
        if d == 1 and sum(ex[:n]) == 1:
            K_new[:, ex.index(1)] += v.real
        elif d == 1:
            # velocity-linear term joins damping
            raise ModelError("unexpected velocity-linear term after shift")
        else:
            fnl_terms[ex] = v
    f_nl_new = (
        MultiPolynomial(2 * n, n, fnl_terms) if fnl_terms else None
    )
    return SecondOrderSystem(
        M=sys.M,
        C=sys.C,
        K=K_new,
        f_nl=f_nl_new,
        G0=G0_new,
        g_nl=g_nl_new,
        forcing=sys.forcing,
    )
