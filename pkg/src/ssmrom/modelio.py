"""Human-readable model-definition files.

Sections: ``[matrices]`` (dimensions, M, C, K dense row-major),
``[polynomials]`` (term lists: exponent tuple -> coefficients),
``[constraints]`` (G0 plus nonlinear terms), ``[forcing]`` and an
optional informational ``[recast-plan]``.  Numbers are written with
17 significant digits so files round-trip exactly.
"""

from __future__ import annotations

import numpy as np

from .model import HarmonicForcing, ModelError, SecondOrderSystem
from .polytensor import MultiPolynomial

__all__ = ["save_system", "load_system", "format_matrix", "parse_matrix"]

FMT = "%.17g"


def format_matrix(M):
    return "; ".join(
        " ".join(FMT % v for v in row) for row in np.atleast_2d(M)
    )


def parse_matrix(text):
    rows = [r.strip() for r in text.split(";") if r.strip()]
    return np.array([[float(v) for v in r.split()] for r in rows])


def _format_poly(p: MultiPolynomial):
    lines = []
    for e, v in p.sorted_terms():
        exps = " ".join(str(x) for x in e)
        if np.any(np.abs(v.imag) > 0):
            coefs = " ".join(
                (FMT + "%+.17gj") % (c.real, c.imag) for c in v
            )
        else:
            coefs = " ".join(FMT % c.real for c in v)
        lines.append(f"  {exps} -> {coefs}")
    return lines


def _parse_poly_lines(lines, input_dim, output_dim):
    terms = {}
    for ln in lines:
        left, right = ln.split("->")
        exps = tuple(int(x) for x in left.split())
        vals = []
        for tok in right.split():
            vals.append(complex(tok) if "j" in tok else float(tok))
        terms[exps] = np.array(vals, dtype=complex)
    return MultiPolynomial(input_dim, output_dim, terms)


def save_system(path, sys: SecondOrderSystem, recast_plan=None):
    """Write a second-order system definition file."""
    n, n_c = sys.n, sys.n_c
    out = []
    out.append("[matrices]")
    out.append(f"n = {n}")
    out.append(f"n_c = {n_c}")
    out.append("M = " + format_matrix(sys.M))
    out.append("C = " + format_matrix(sys.C))
    out.append("K = " + format_matrix(sys.K))
    out.append("")
    out.append("[polynomials]")
    if sys.f_nl is not None and sys.f_nl.terms:
        out.append("f_nl:")
        out.extend(_format_poly(sys.f_nl))
    out.append("")
    out.append("[constraints]")
    if n_c:
        out.append("G0 = " + format_matrix(sys.G0))
        if sys.g_nl is not None and sys.g_nl.terms:
            out.append("g_nl:")
            out.extend(_format_poly(sys.g_nl))
    out.append("")
    out.append("[forcing]")
    if sys.forcing is not None:
        out.append("shape = " + " ".join(FMT % v for v in sys.forcing.shape))
        out.append(("epsilon = " + FMT) % sys.forcing.epsilon)
    out.append("")
    if recast_plan is not None and recast_plan.angles:
        out.append("[recast-plan]")
        for phi, (us, uc) in recast_plan.angles.items():
            out.append(f"angle {phi} -> {us} {uc}")
        for c in recast_plan.differential_closures:
            out.append("diff " + c)
        for c in recast_plan.algebraic_closures:
            out.append("alg " + c)
        out.append("")
    with open(path, "w") as fh:
        fh.write("\n".join(out))


def load_system(path) -> SecondOrderSystem:
    """Read a second-order system definition file."""
    with open(path) as fh:
        text = fh.read()
    sections = {}
    current = None
    for raw in text.splitlines():
        line = raw.rstrip()
        if not line.strip():
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            sections[current] = []
        elif current is not None:
            sections[current].append(line)
        else:
            raise ModelError(f"content before first section: {line!r}")

    if "matrices" not in sections:
        raise ModelError("model file lacks a [matrices] section")
    kv = {}
    for ln in sections["matrices"]:
        key, val = ln.split("=", 1)
        kv[key.strip()] = val.strip()
    n = int(kv["n"])
    n_c = int(kv.get("n_c", "0"))
    M = parse_matrix(kv["M"])
    C = parse_matrix(kv["C"])
    K = parse_matrix(kv["K"])

    f_nl = None
    lines = sections.get("polynomials", [])
    if lines:
        if not lines[0].strip().startswith("f_nl"):
            raise ModelError("unknown polynomial block")
        body = [ln for ln in lines[1:] if "->" in ln]
        if body:
            f_nl = _parse_poly_lines(body, 2 * n, n)

    G0, g_nl = None, None
    lines = sections.get("constraints", [])
    i = 0
    while i < len(lines):
        ln = lines[i]
        if ln.strip().startswith("G0"):
            G0 = parse_matrix(ln.split("=", 1)[1])
            i += 1
        elif ln.strip().startswith("g_nl"):
            body = []
            i += 1
            while i < len(lines) and "->" in lines[i]:
                body.append(lines[i])
                i += 1
            g_nl = _parse_poly_lines(body, n, n_c)
        else:
            i += 1

    forcing = None
    lines = sections.get("forcing", [])
    if lines:
        fkv = {}
        for ln in lines:
            key, val = ln.split("=", 1)
            fkv[key.strip()] = val.strip()
        shape = np.array([float(v) for v in fkv["shape"].split()])
        forcing = HarmonicForcing(
            shape=shape, epsilon=float(fkv.get("epsilon", "0"))
        )

    return SecondOrderSystem(
        M=M, C=C, K=K, f_nl=f_nl, G0=G0, g_nl=g_nl, forcing=forcing
    )
