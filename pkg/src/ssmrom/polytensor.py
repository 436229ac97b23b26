"""Sparse multivariate polynomial algebra over complex coefficient vectors.

A polynomial map C^d -> C^q is stored as a dict from exponent tuples
(one non-negative integer per input variable) to coefficient vectors of
length q.  This representation carries every nonlinearity in the package:
internal forces, constraint functions, manifold parametrizations and
reduced dynamics.  Values are immutable after construction and safe to
share between threads.

Truncation is always by total degree.  Monomial convention:
``x**k = prod_i x_i**k_i``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "MultiPolynomial",
    "poly_eval",
    "poly_compose",
    "poly_jacobian",
    "monomials_upto",
    "monomial_index",
]

_ZERO_TOL = 0.0  # only exact-zero coefficient vectors are dropped


def _grlex_key(exps):
    # graded lexicographic: ascending total degree, then lex with x_1 highest
    return (sum(exps), tuple(-e for e in exps))


@lru_cache(maxsize=None)
def monomials_upto(nvars, deg):
    """All exponent tuples in `nvars` variables with total degree <= `deg`,
    in graded-lexicographic order."""
    out = []

    def rec(prefix, remaining, budget):
        if remaining == 1:
            for e in range(budget + 1):
                out.append(prefix + (e,))
            return
        for e in range(budget + 1):
            rec(prefix + (e,), remaining - 1, budget - e)

    if nvars == 0:
        return (tuple(),)
    rec(tuple(), nvars, deg)
    out.sort(key=_grlex_key)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(nvars, deg):
    """Map exponent tuple -> position in ``monomials_upto(nvars, deg)``."""
    return {e: i for i, e in enumerate(monomials_upto(nvars, deg))}


@lru_cache(maxsize=None)
def _product_table(nvars, deg):
    """table[i, j] = packed index of monomial_i * monomial_j, or -1 if the
    product exceeds total degree `deg`."""
    monos = monomials_upto(nvars, deg)
    index = monomial_index(nvars, deg)
    n = len(monos)
    table = np.full((n, n), -1, dtype=np.int64)
    degs = np.array([sum(e) for e in monos])
    for i, ei in enumerate(monos):
        di = degs[i]
        for j, ej in enumerate(monos):
            if di + degs[j] > deg:
                continue
            table[i, j] = index[tuple(a + b for a, b in zip(ei, ej))]
    return table


def _packed_mul(a, b, nvars, deg):
    """Multiply two packed coefficient vectors (length = #monomials <= deg)."""
    table = _product_table(nvars, deg)
    out = np.zeros_like(a)
    nz = np.nonzero(a)[0]
    for i in nz:
        row = table[i]
        ok = row >= 0
        np.add.at(out, row[ok], a[i] * b[ok])
    return out


class MultiPolynomial:
    """Polynomial map C^input_dim -> C^output_dim with sparse term storage.

    Parameters
    ----------
    input_dim, output_dim : int
        Dimensions of the domain and codomain.
    terms : dict or iterable of (exponents, coefficients), optional
        Exponent tuples of length `input_dim` mapping to coefficient
        vectors of length `output_dim`.  Scalar coefficients are accepted
        when ``output_dim == 1``.  Exact-zero vectors are dropped.
    max_degree : int, optional
        Declared truncation degree.  Defaults to the largest stored term
        degree (0 for an empty polynomial).
    """

    __slots__ = ("input_dim", "output_dim", "terms", "max_degree", "_compiled")

    def __init__(self, input_dim, output_dim, terms=None, max_degree=None):
        self.input_dim = int(input_dim)
        self.output_dim = int(output_dim)
        clean = {}
        if terms is not None:
            items = terms.items() if isinstance(terms, dict) else terms
            for exps, coef in items:
                exps = tuple(int(e) for e in exps)
                if len(exps) != self.input_dim:
                    raise ValueError(
                        f"exponent tuple {exps} has length {len(exps)}, "
                        f"expected {self.input_dim}"
                    )
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                vec = np.atleast_1d(np.asarray(coef, dtype=complex))
                if vec.shape != (self.output_dim,):
                    raise ValueError(
                        f"coefficient shape {vec.shape} does not match "
                        f"output_dim {self.output_dim}"
                    )
                if exps in clean:
                    clean[exps] = clean[exps] + vec
                else:
                    clean[exps] = vec.copy()
        clean = {e: v for e, v in clean.items() if np.any(v != _ZERO_TOL)}
        self.terms = clean
        found = max((sum(e) for e in clean), default=0)
        self.max_degree = found if max_degree is None else int(max_degree)
        if self.max_degree < found:
            raise ValueError("stored term degree exceeds declared max_degree")
        self._compiled = None

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    @classmethod
    def zero(cls, input_dim, output_dim):
        return cls(input_dim, output_dim, {})

    @classmethod
    def identity(cls, dim):
        """The identity map x -> x."""
        terms = {}
        for i in range(dim):
            e = tuple(1 if j == i else 0 for j in range(dim))
            v = np.zeros(dim, dtype=complex)
            v[i] = 1.0
            terms[e] = v
        return cls(dim, dim, terms)

    @classmethod
    def linear(cls, matrix):
        """The linear map x -> A x for a (q, d) matrix A."""
        A = np.asarray(matrix, dtype=complex)
        q, d = A.shape
        terms = {}
        for j in range(d):
            col = A[:, j]
            if np.any(col != 0):
                e = tuple(1 if k == j else 0 for k in range(d))
                terms[e] = col
        return cls(d, q, terms)

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return (
            f"MultiPolynomial(C^{self.input_dim} -> C^{self.output_dim}, "
            f"{len(self.terms)} terms, max_degree={self.max_degree})"
        )

    def min_term_degree(self):
        return min((sum(e) for e in self.terms), default=0)

    def degree_slice(self, k):
        """New polynomial keeping only the degree-`k` homogeneous part."""
        return MultiPolynomial(
            self.input_dim,
            self.output_dim,
            {e: v for e, v in self.terms.items() if sum(e) == k},
            max_degree=self.max_degree,
        )

    def truncated(self, deg):
        """Drop all terms with total degree above `deg`."""
        return MultiPolynomial(
            self.input_dim,
            self.output_dim,
            {e: v for e, v in self.terms.items() if sum(e) <= deg},
            max_degree=deg,
        )

    def sorted_terms(self):
        """Terms in graded-lexicographic canonical order."""
        return sorted(self.terms.items(), key=lambda kv: _grlex_key(kv[0]))

    # ------------------------------------------------------------------
    # algebra
    # ------------------------------------------------------------------
    def __add__(self, other):
        if (
            other.input_dim != self.input_dim
            or other.output_dim != self.output_dim
        ):
            raise ValueError("dimension mismatch in polynomial addition")
        terms = {e: v.copy() for e, v in self.terms.items()}
        for e, v in other.terms.items():
            terms[e] = terms.get(e, 0) + v
        return MultiPolynomial(
            self.input_dim,
            self.output_dim,
            terms,
            max_degree=max(self.max_degree, other.max_degree),
        )

    def scaled(self, factor):
        return MultiPolynomial(
            self.input_dim,
            self.output_dim,
            {e: factor * v for e, v in self.terms.items()},
            max_degree=self.max_degree,
        )

    def component(self, i):
        """Scalar polynomial of output component `i`."""
        terms = {}
        for e, v in self.terms.items():
            if v[i] != 0:
                terms[e] = np.array([v[i]])
        return MultiPolynomial(self.input_dim, 1, terms)

    def partial(self, var):
        """Partial derivative with respect to input variable `var`."""
        terms = {}
        for e, v in self.terms.items():
            k = e[var]
            if k == 0:
                continue
            de = tuple(x - 1 if i == var else x for i, x in enumerate(e))
            terms[de] = terms.get(de, 0) + k * v
        return MultiPolynomial(
            self.input_dim,
            self.output_dim,
            terms,
            max_degree=max(self.max_degree - 1, 0),
        )

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------
    def _compile(self):
        # flat factor arrays so single-point evaluation is a few numpy calls
        if self._compiled is not None:
            return self._compiled
        items = self.sorted_terms()
        nterms = len(items)
        coefs = np.zeros((nterms, self.output_dim), dtype=complex)
        var_idx, exp_val, bounds = [], [], [0]
        for t, (e, v) in enumerate(items):
            coefs[t] = v
            for i, k in enumerate(e):
                if k > 0:
                    var_idx.append(i)
                    exp_val.append(k)
            bounds.append(len(var_idx))
        self._compiled = (
            coefs,
            np.array(var_idx, dtype=np.intp),
            np.array(exp_val, dtype=np.int64),
            np.array(bounds, dtype=np.intp),
        )
        return self._compiled

    def eval(self, x):
        """Evaluate at a single point; returns a complex vector."""
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.input_dim,):
            raise ValueError(
                f"argument has shape {x.shape}, expected ({self.input_dim},)"
            )
        if not self.terms:
            return np.zeros(self.output_dim, dtype=complex)
        coefs, var_idx, exp_val, bounds = self._compile()
        if len(var_idx) == 0:
            vals = np.ones(len(coefs), dtype=complex)
        else:
            factors = x[var_idx] ** exp_val
            vals = np.ones(len(coefs), dtype=complex)
            seg = np.nonzero(bounds[1:] > bounds[:-1])[0]
            prods = np.multiply.reduceat(factors, bounds[:-1][seg])
            vals[seg] = prods
        return coefs.T @ vals

    def eval_many(self, X):
        """Evaluate at many points.  X is (npts, input_dim); returns
        (npts, output_dim)."""
        X = np.asarray(X, dtype=complex)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise ValueError("X must be (npts, input_dim)")
        if not self.terms:
            return np.zeros((X.shape[0], self.output_dim), dtype=complex)
        items = self.sorted_terms()
        E = np.array([e for e, _ in items])
        C = np.array([v for _, v in items])
        mono = np.ones((X.shape[0], len(items)), dtype=complex)
        for v in range(self.input_dim):
            ev = E[:, v]
            nz = ev > 0
            if np.any(nz):
                mono[:, nz] *= X[:, v][:, None] ** ev[nz][None, :]
        return mono @ C

    # ------------------------------------------------------------------
    # calculus / composition
    # ------------------------------------------------------------------
    def jacobian(self):
        """Matrix-valued Jacobian, flattened row-major.

        Output component ``r * input_dim + c`` holds d(self_r)/d(x_c).
        """
        q, d = self.output_dim, self.input_dim
        terms = {}
        for e, v in self.terms.items():
            for c in range(d):
                k = e[c]
                if k == 0:
                    continue
                de = tuple(x - 1 if i == c else x for i, x in enumerate(e))
                vec = terms.setdefault(de, np.zeros(q * d, dtype=complex))
                vec[np.arange(q) * d + c] += k * v
        return MultiPolynomial(
            d, q * d, terms, max_degree=max(self.max_degree - 1, 0)
        )

    def jacobian_at(self, x):
        """Jacobian matrix (output_dim, input_dim) evaluated at a point."""
        flat = self.jacobian().eval(x)
        return flat.reshape(self.output_dim, self.input_dim)

    def compose(self, inner, truncation):
        """Taylor coefficients of self(inner(p)) truncated by total degree.

        `inner.output_dim` must equal ``self.input_dim``.  Exact whenever
        the degree of the composition does not exceed `truncation`.
        """
        if inner.output_dim != self.input_dim:
            raise ValueError(
                "inner.output_dim must match outer.input_dim for composition"
            )
        nv = inner.input_dim
        deg = int(truncation)
        monos = monomials_upto(nv, deg)
        index = monomial_index(nv, deg)
        npk = len(monos)

        # packed scalar series for each needed inner component
        packed = {}

        def inner_component(i):
            if i not in packed:
                vec = np.zeros(npk, dtype=complex)
                for e, v in inner.terms.items():
                    if sum(e) <= deg and v[i] != 0:
                        vec[index[e]] = v[i]
                packed[i] = vec
            return packed[i]

        power_cache = {}

        def inner_power(i, k):
            key = (i, k)
            if key not in power_cache:
                if k == 1:
                    power_cache[key] = inner_component(i)
                else:
                    power_cache[key] = _packed_mul(
                        inner_power(i, k - 1), inner_component(i), nv, deg
                    )
            return power_cache[key]

        acc = np.zeros((npk, self.output_dim), dtype=complex)
        one = np.zeros(npk, dtype=complex)
        one[index[(0,) * nv]] = 1.0
        prod_cache = {}
        for e, v in self.terms.items():
            factors = tuple((i, k) for i, k in enumerate(e) if k > 0)
            prod = prod_cache.get(factors)
            if prod is None:
                prod = one
                for i, k in factors:
                    prod = _packed_mul(prod, inner_power(i, k), nv, deg)
                prod_cache[factors] = prod
            nz = np.nonzero(v)[0]
            acc[:, nz] += prod[:, None] * v[nz]

        terms = {
            monos[r]: acc[r]
            for r in range(npk)
            if np.any(np.abs(acc[r]) > 0.0)
        }
        return MultiPolynomial(nv, self.output_dim, terms, max_degree=deg)


# ----------------------------------------------------------------------
# functional aliases
# ----------------------------------------------------------------------
def poly_eval(p, x):
    """Evaluate `p` at point `x` (see :meth:`MultiPolynomial.eval`)."""
    return p.eval(x)


def poly_compose(outer, inner, truncation):
    """Truncated Taylor composition outer(inner(p))."""
    return outer.compose(inner, truncation)


def poly_jacobian(p):
    """Row-major flattened Jacobian of `p`."""
    return p.jacobian()
