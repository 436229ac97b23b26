"""Rewriting trigonometric mechanical systems as polynomial DAEs.

For every state angle ``phi`` that appears inside sin/cos, two auxiliary
states are introduced,

    u_s = sin(phi),      u_c = 1 - cos(phi),

together with one differential closure  u_s' = (1 - u_c) phi'  and one
algebraic closure  u_s^2 + (1 - u_c)^2 = 1.  The 1 - cos convention keeps
the origin a fixed point of the rewritten system.  The closure is exact,
not a Taylor approximation, so the recast system reproduces the original
dynamics for arbitrarily large angles.

The module also contains a small infix expression parser (grammar:
``^`` > unary ``-`` > ``* /`` > ``+ -``, function calls ``sin(.)`` and
``cos(.)``) used to state equations of motion as text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import DAELayout, FirstOrderDAE, ModelError
from .polytensor import MultiPolynomial

__all__ = [
    "ExpressionTree",
    "Num",
    "Var",
    "BinOp",
    "Neg",
    "Func",
    "ParseError",
    "RecastError",
    "RecastPlan",
    "TrigMechanicalSystem",
    "parse_expression",
    "polynomialize",
    "verify_recast",
]


class ParseError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class RecastError(ValueError):
    pass


# ----------------------------------------------------------------------
# expression trees
# ----------------------------------------------------------------------
class ExpressionTree:
    """Base node.  Subclasses: Num, Var, Neg, BinOp(+ - * / ^), Func."""

    def eval(self, env):
        raise NotImplementedError

    def diff(self, name):
        raise NotImplementedError

    def subst(self, mapping):
        """Replace variables by trees: mapping name -> ExpressionTree."""
        raise NotImplementedError

    def variables(self):
        out = set()
        self._collect_vars(out)
        return out

    def _collect_vars(self, out):
        pass

    def trig_args(self):
        """Variable names appearing inside sin/cos, and whether any
        transcendental has a non-variable argument."""
        angles, bad = set(), []
        self._collect_trig(angles, bad)
        return angles, bad

    def _collect_trig(self, angles, bad):
        pass

    def to_polynomial(self, var_order):
        """Expand into dict exponent-tuple -> float over `var_order`.
        Raises RecastError if any transcendental node remains."""
        raise NotImplementedError


@dataclass(frozen=True)
class Num(ExpressionTree):
    value: float

    def eval(self, env):
        return self.value

    def diff(self, name):
        return Num(0.0)

    def subst(self, mapping):
        return self

    def to_polynomial(self, var_order):
        if self.value == 0:
            return {}
        return {(0,) * len(var_order): float(self.value)}

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var(ExpressionTree):
    name: str

    def eval(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise RecastError(f"unbound variable {self.name!r}")

    def diff(self, name):
        return Num(1.0 if name == self.name else 0.0)

    def subst(self, mapping):
        return mapping.get(self.name, self)

    def _collect_vars(self, out):
        out.add(self.name)

    def to_polynomial(self, var_order):
        try:
            i = var_order.index(self.name)
        except ValueError:
            raise RecastError(f"variable {self.name!r} not in declared state")
        e = tuple(1 if j == i else 0 for j in range(len(var_order)))
        return {e: 1.0}

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg(ExpressionTree):
    arg: ExpressionTree

    def eval(self, env):
        return -self.arg.eval(env)

    def diff(self, name):
        return Neg(self.arg.diff(name))

    def subst(self, mapping):
        return Neg(self.arg.subst(mapping))

    def _collect_vars(self, out):
        self.arg._collect_vars(out)

    def _collect_trig(self, angles, bad):
        self.arg._collect_trig(angles, bad)

    def to_polynomial(self, var_order):
        return {e: -c for e, c in self.arg.to_polynomial(var_order).items()}

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class BinOp(ExpressionTree):
    op: str        # one of + - * / ^
    left: ExpressionTree
    right: ExpressionTree

    def eval(self, env):
        a = self.left.eval(env)
        b = self.right.eval(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        if self.op == "^":
            return a ** b
        raise RecastError(f"unknown operator {self.op!r}")

    def diff(self, name):
        a, b = self.left, self.right
        da, db = a.diff(name), b.diff(name)
        if self.op in "+-":
            return BinOp(self.op, da, db)
        if self.op == "*":
            return BinOp("+", BinOp("*", da, b), BinOp("*", a, db))
        if self.op == "/":
            num = BinOp("-", BinOp("*", da, b), BinOp("*", a, db))
            return BinOp("/", num, BinOp("^", b, Num(2.0)))
        if self.op == "^":
            if not isinstance(b, Num):
                raise RecastError("only constant integer powers supported")
            k = b.value
            return BinOp(
                "*", Num(k), BinOp("*", BinOp("^", a, Num(k - 1)), da)
            )
        raise RecastError(f"unknown operator {self.op!r}")

    def subst(self, mapping):
        return BinOp(self.op, self.left.subst(mapping), self.right.subst(mapping))

    def _collect_vars(self, out):
        self.left._collect_vars(out)
        self.right._collect_vars(out)

    def _collect_trig(self, angles, bad):
        self.left._collect_trig(angles, bad)
        self.right._collect_trig(angles, bad)

    def to_polynomial(self, var_order):
        if self.op in "+-":
            out = dict(self.left.to_polynomial(var_order))
            for e, c in self.right.to_polynomial(var_order).items():
                out[e] = out.get(e, 0.0) + (c if self.op == "+" else -c)
            return {e: c for e, c in out.items() if c != 0.0}
        if self.op == "*":
            pa = self.left.to_polynomial(var_order)
            pb = self.right.to_polynomial(var_order)
            out = {}
            for ea, ca in pa.items():
                for eb, cb in pb.items():
                    e = tuple(x + y for x, y in zip(ea, eb))
                    out[e] = out.get(e, 0.0) + ca * cb
            return {e: c for e, c in out.items() if c != 0.0}
        if self.op == "/":
            if not isinstance(self.right, Num) or self.right.value == 0:
                raise RecastError("division only by nonzero constants")
            return {
                e: c / self.right.value
                for e, c in self.left.to_polynomial(var_order).items()
            }
        if self.op == "^":
            if not isinstance(self.right, Num):
                raise RecastError("only constant integer powers supported")
            k = self.right.value
            if k != int(k) or k < 0:
                raise RecastError("powers must be non-negative integers")
            out = {(0,) * len(var_order): 1.0}
            base = self.left.to_polynomial(var_order)
            for _ in range(int(k)):
                nxt = {}
                for ea, ca in out.items():
                    for eb, cb in base.items():
                        e = tuple(x + y for x, y in zip(ea, eb))
                        nxt[e] = nxt.get(e, 0.0) + ca * cb
                out = nxt
            return out
        raise RecastError(f"unknown operator {self.op!r}")

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Func(ExpressionTree):
    name: str      # sin or cos
    arg: ExpressionTree

    def eval(self, env):
        v = self.arg.eval(env)
        return math.sin(v) if self.name == "sin" else math.cos(v)

    def diff(self, name):
        da = self.arg.diff(name)
        if self.name == "sin":
            return BinOp("*", Func("cos", self.arg), da)
        return Neg(BinOp("*", Func("sin", self.arg), da))

    def subst(self, mapping):
        return Func(self.name, self.arg.subst(mapping))

    def _collect_vars(self, out):
        self.arg._collect_vars(out)

    def _collect_trig(self, angles, bad):
        inner_angles, inner_bad = self.arg.trig_args()
        if inner_angles or inner_bad:
            bad.append(self)      # nested transcendental
        elif isinstance(self.arg, Var):
            angles.add(self.arg.name)
        else:
            bad.append(self)      # sin of a compound expression
        self.arg._collect_trig(angles, bad)

    def to_polynomial(self, var_order):
        raise RecastError(
            f"transcendental {self.name}(...) left after substitution"
        )

    def __str__(self):
        return f"{self.name}({self.arg})"


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------
_FUNCS = ("sin", "cos")


def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] in ".eE" or (
                text[j] in "+-" and j > i and text[j - 1] in "eE"
            )):
                j += 1
            try:
                val = float(text[i:j])
            except ValueError:
                raise ParseError(f"bad number {text[i:j]!r}", i)
            tokens.append(("num", val, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.advance()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    # grammar: expr -> term (("+"|"-") term)*
    #          term -> unary (("*"|"/") unary)*
    #          unary -> "-" unary | power
    #          power -> atom ("^" unary)?
    #          atom -> num | name | name "(" expr ")" | "(" expr ")"
    def expr(self):
        node = self.term()
        while self.peek()[0] in "+-":
            op = self.advance()[0]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] in "*/":
            op = self.advance()[0]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            exponent = self.unary()
            if not isinstance(exponent, Num):
                tok = self.peek()
                raise ParseError("exponent must be a number", tok[2])
            node = BinOp("^", node, exponent)
        return node

    def atom(self):
        kind, val, off = self.advance()
        if kind == "num":
            return Num(val)
        if kind == "name":
            if self.peek()[0] == "(":
                if val not in _FUNCS:
                    raise ParseError(f"unknown function {val!r}", off)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Func(val, arg)
            return Var(val)
        if kind == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected token {val!r}", off)


def parse_expression(text, known=None) -> ExpressionTree:
    """Parse infix text into an expression tree.

    When `known` (an iterable of names) is given, any other identifier
    raises a ParseError with its byte offset.
    """
    parser = _Parser(text)
    tree = parser.expr()
    end = parser.advance()
    if end[0] != "end":
        raise ParseError(f"trailing input {end[1]!r}", end[2])
    if known is not None:
        known = set(known)
        unknown = tree.variables() - known
        if unknown:
            name = sorted(unknown)[0]
            off = text.find(name)
            raise ParseError(f"unknown identifier {name!r}", max(off, 0))
    return tree


# ----------------------------------------------------------------------
# recasting
# ----------------------------------------------------------------------
@dataclass
class RecastPlan:
    """Record of the auxiliary-variable rewrite.

    angles maps each recast angle to its (u_sin, u_cos) names; the listed
    closures are the equations appended to the system."""

    angles: dict = field(default_factory=dict)
    differential_closures: list = field(default_factory=list)
    algebraic_closures: list = field(default_factory=list)
    substitutions: dict = field(default_factory=dict)

    @property
    def identity(self):
        return not self.angles

    def aux_values(self, angle_values):
        """(u_s, u_c) pairs from angle values, in declaration order."""
        out = []
        for phi in self.angles:
            v = angle_values[phi]
            out.extend([math.sin(v), 1.0 - math.cos(v)])
        return np.array(out)


@dataclass
class TrigMechanicalSystem:
    """Second-order system stated with expression trees.

    Equation i reads  sum_j M[i, j] q_j'' + lhs[i] = shape[i] eps cos(W t)
    where lhs may reference coordinates, speeds and multipliers by name
    and contain sin/cos of single coordinates.  Constraints are trees over
    the coordinates only.
    """

    coords: list
    speeds: list
    multipliers: list
    M: np.ndarray
    lhs: list
    constraints: list = field(default_factory=list)
    shape: np.ndarray = None

    def __post_init__(self):
        n = len(self.coords)
        self.M = np.asarray(self.M, dtype=float)
        if self.M.shape != (n, n):
            raise RecastError("mass matrix shape mismatch")
        if len(self.speeds) != n or len(self.lhs) != n:
            raise RecastError("speeds / equations must match coordinates")
        if len(self.multipliers) != len(self.constraints):
            raise RecastError("one multiplier per constraint required")
        if self.shape is None:
            self.shape = np.zeros(n)
        self.shape = np.asarray(self.shape, dtype=float)


def _split_poly(poly, nvars):
    """Split an exponent dict into (constant, linear row, nonlinear dict)."""
    const = 0.0
    lin = np.zeros(nvars)
    nonlin = {}
    for e, c in poly.items():
        d = sum(e)
        if d == 0:
            const += c
        elif d == 1:
            lin[e.index(1)] += c
        else:
            nonlin[e] = nonlin.get(e, 0.0) + c
    return const, lin, nonlin


def polynomialize(system: TrigMechanicalSystem):
    """Rewrite a trigonometric mechanical system as a polynomial DAE.

    Returns (FirstOrderDAE, RecastPlan).  Raises RecastError when a
    transcendental argument is not a single coordinate (e.g. sin(sin x)),
    or when a constant offset survives (origin not a fixed point).
    """
    n = len(system.coords)
    n_c = len(system.constraints)

    angles = []
    for tree in list(system.lhs) + list(system.constraints):
        got, bad = tree.trig_args()
        if bad:
            raise RecastError(
                f"unsupported transcendental argument in {bad[0]}"
            )
        for a in got:
            if a not in system.coords:
                raise RecastError(
                    f"sin/cos argument {a!r} is not a coordinate"
                )
            if a not in angles:
                angles.append(a)
    angles.sort(key=system.coords.index)

    plan = RecastPlan()
    subs = {}
    for phi in angles:
        us, uc = f"u_s_{phi}", f"u_c_{phi}"
        plan.angles[phi] = (us, uc)
        subs[phi] = (
            Var(us),
            BinOp("-", Num(1.0), Var(uc)),
        )
        phid = system.speeds[system.coords.index(phi)]
        plan.differential_closures.append(
            f"d({us})/dt = (1 - {uc}) * {phid}"
        )
        plan.algebraic_closures.append(f"{us}^2 + (1 - {uc})^2 = 1")
        plan.substitutions[f"sin({phi})"] = us
        plan.substitutions[f"cos({phi})"] = f"1 - {uc}"

    def rewrite(tree):
        if isinstance(tree, Func):
            arg = rewrite(tree.arg)
            if isinstance(arg, Var) and arg.name in plan.angles:
                us_t, cos_t = subs[arg.name]
                return us_t if tree.name == "sin" else cos_t
            raise RecastError(f"cannot recast {tree}")
        if isinstance(tree, BinOp):
            return BinOp(tree.op, rewrite(tree.left), rewrite(tree.right))
        if isinstance(tree, Neg):
            return Neg(rewrite(tree.arg))
        return tree

    aux_names = [name for pair in plan.angles.values() for name in pair]
    zorder = (
        list(system.coords)
        + list(system.speeds)
        + list(system.multipliers)
        + aux_names
    )
    n_aux = len(angles)
    layout = DAELayout(n, n_c, n_aux=n_aux)
    N = layout.N

    A = np.zeros((N, N))
    B = np.zeros((N, N))
    fterms = {}

    def add_fterm(e, row, value):
        vec = fterms.get(e)
        if vec is None:
            vec = np.zeros(N, dtype=complex)
            fterms[e] = vec
        vec[row] += value

    # force rows: M qdd + lhs = eps shape cos  ->  B zdot = A z + F
    B[:n, n:2 * n] = system.M
    for i, tree in enumerate(system.lhs):
        poly = rewrite(tree).to_polynomial(zorder)
        const, lin, nonlin = _split_poly(poly, N)
        if abs(const) > 1e-12:
            raise RecastError(
                f"equation {i} has constant offset {const:g}; shift the "
                "equilibrium to the origin first"
            )
        # damping columns move to B (they multiply zdot of coordinates)
        B[i, :n] += lin[n:2 * n]
        A[i, :n] -= lin[:n]
        A[i, 2 * n:] -= lin[2 * n:]
        for e, c in nonlin.items():
            add_fterm(e, i, -c)

    # kinematic identity rows
    B[n:2 * n, :n] = system.M
    A[n:2 * n, n:2 * n] = system.M

    # constraint rows
    for k, tree in enumerate(system.constraints):
        poly = rewrite(tree).to_polynomial(zorder)
        const, lin, nonlin = _split_poly(poly, N)
        if abs(const) > 1e-12:
            raise RecastError(
                f"constraint {k} not satisfied at the origin "
                f"(offset {const:g})"
            )
        if np.any(lin[n:2 * n]) or np.any(lin[2 * n:2 * n + n_c]):
            raise RecastError("constraints must be configuration-level")
        row = 2 * n + k
        A[row, :] = lin
        for e, c in nonlin.items():
            add_fterm(e, row, c)

    # auxiliary closures
    for a, phi in enumerate(angles):
        i_us = 2 * n + n_c + 2 * a
        i_uc = i_us + 1
        i_phid = n + system.coords.index(phi)
        # d(u_s)/dt = (1 - u_c) * phid
        B[i_us, i_us] = 1.0
        A[i_us, i_phid] = 1.0
        e = [0] * N
        e[i_phid] = 1
        e[i_uc] = 1
        add_fterm(tuple(e), i_us, -1.0)
        # algebraic: 0 = 2 u_c - u_s^2 - u_c^2
        A[i_uc, i_uc] = 2.0
        e = [0] * N
        e[i_us] = 2
        add_fterm(tuple(e), i_uc, -1.0)
        e = [0] * N
        e[i_uc] = 2
        add_fterm(tuple(e), i_uc, -1.0)

    F = MultiPolynomial(N, N, fterms) if fterms else None
    fext = np.zeros(N)
    fext[:n] = system.shape
    dae = FirstOrderDAE(A=A, B=B, F=F, fext_shape=fext, layout=layout)
    return dae, plan


def recast_initial_state(dae, plan, system, q, qd):
    """Full recast state z from original coordinates and velocities."""
    env = dict(zip(system.coords, q))
    z = np.zeros(dae.N)
    n = len(system.coords)
    z[:n] = q
    z[n:2 * n] = qd
    z[dae.layout.aux] = plan.aux_values(env)
    return z


def verify_recast(original_rhs, dae, plan, system, q0, qd0, t_span, rtol=1e-10):
    """Co-simulate the original ODE and the recast system; return the
    maximum deviation of the shared states.

    Only unconstrained recast systems are supported here (the constrained
    ones are exercised through the full-order simulator).
    """
    from scipy.integrate import solve_ivp

    if dae.layout.n_c != 0:
        raise RecastError("verify_recast handles unconstrained systems only")
    n = dae.layout.n
    Minv = np.linalg.inv(system.M)
    angle_vel = [
        n + system.coords.index(phi) - n for phi in plan.angles
    ]  # velocity slot within qd

    def rhs(t, y):
        q, qd, u = y[:n], y[n:2 * n], y[2 * n:]
        z = np.concatenate([q, qd, u])
        force = (dae.A[:n] @ z).astype(float)
        if dae.F is not None:
            force = force + dae.F.eval(z).real[:n]
        force = force - dae.B[:n, :n] @ qd
        qdd = Minv @ force
        udot = np.zeros_like(u)
        for a, _ in enumerate(plan.angles):
            us, uc = u[2 * a], u[2 * a + 1]
            phid = qd[angle_vel[a]]
            udot[2 * a] = (1.0 - uc) * phid
            udot[2 * a + 1] = us * phid
        return np.concatenate([qd, qdd, udot])

    z0 = np.concatenate(
        [q0, qd0, plan.aux_values(dict(zip(system.coords, q0)))]
    )
    t_eval = np.linspace(t_span[0], t_span[1], 400)
    sol_r = solve_ivp(
        rhs, t_span, z0, t_eval=t_eval, rtol=rtol, atol=1e-12, method="RK45"
    )
    sol_o = solve_ivp(
        original_rhs,
        t_span,
        np.concatenate([q0, qd0]),
        t_eval=t_eval,
        rtol=rtol,
        atol=1e-12,
        method="RK45",
    )
    if not (sol_r.success and sol_o.success):
        raise RecastError("co-simulation failed to integrate")
    dev = np.max(np.abs(sol_r.y[: 2 * n] - sol_o.y[: 2 * n]))
    return float(dev), sol_r, sol_o
