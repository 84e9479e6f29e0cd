"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Iterable, Mapping

import numpy as np

from .jets import JetAlgebra

Exponent = tuple[int, ...]


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        return Fraction(c).limit_denominator(10**12)
    return Fraction(c)


class Polynomial:
    """Polynomial in ``nvars`` real variables, ``{exponent: Fraction}``."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | None = None):
        self.nvars = nvars
        self.terms: dict[Exponent, Fraction] = {}
        if terms:
            for e, c in terms.items():
                e = tuple(int(v) for v in e)
                if len(e) != nvars:
                    raise ValueError(f"exponent {e} has wrong length for {nvars} vars")
                c = _frac(c)
                if c:
                    self.terms[e] = self.terms.get(e, Fraction(0)) + c
            self.terms = {e: c for e, c in self.terms.items() if c}

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, nvars: int, c=1) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Polynomial":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    @classmethod
    def random(cls, nvars: int, degree: int, rng: np.random.Generator,
               denominator: int = 100) -> "Polynomial":
        """Random polynomial with rational coefficients in [-1, 1]."""
        from .jets import _graded_exponents

        terms = {}
        for e in _graded_exponents(nvars, degree):
            terms[e] = Fraction(int(rng.integers(-denominator, denominator + 1)),
                                denominator)
        return cls(nvars, terms)

    # -- arithmetic --------------------------------------------------------

    def copy(self) -> "Polynomial":
        p = Polynomial(self.nvars)
        p.terms = dict(self.terms)
        return p

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("polynomials in different numbers of variables")
            return other
        return Polynomial.constant(self.nvars, other)

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, Fraction(0)) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        p = Polynomial(self.nvars)
        p.terms = out
        return p

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        p = Polynomial(self.nvars)
        p.terms = {e: -c for e, c in self.terms.items()}
        return p

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            c = _frac(other)
            p = Polynomial(self.nvars)
            if c:
                p.terms = {e: v * c for e, v in self.terms.items()}
            return p
        other = self._coerce(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        p = Polynomial(self.nvars)
        p.terms = {e: c for e, c in out.items() if c}
        return p

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.nvars, other)
        return self.nvars == other.nvars and self.terms == other.terms

    def __repr__(self) -> str:
        return f"Polynomial({self.nvars}, {len(self.terms)} terms, deg {self.degree})"

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    # -- calculus ----------------------------------------------------------

    def diff(self, i: int) -> "Polynomial":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                d = list(e)
                d[i] -= 1
                out[tuple(d)] = c * e[i]
        p = Polynomial(self.nvars)
        p.terms = out
        return p

    def gradient(self) -> list["Polynomial"]:
        return [self.diff(i) for i in range(self.nvars)]

    def hessian(self) -> list[list["Polynomial"]]:
        g = self.gradient()
        return [[g[i].diff(j) for j in range(self.nvars)] for i in range(self.nvars)]

    def laplacian(self) -> "Polynomial":
        out = Polynomial(self.nvars)
        for i in range(self.nvars):
            out = out + self.diff(i).diff(i)
        return out

    def euler(self) -> "Polynomial":
        """Apply ``sum_i x_i d/dx_i`` (multiplies each term by its degree)."""
        p = Polynomial(self.nvars)
        p.terms = {e: c * sum(e) for e, c in self.terms.items() if sum(e)}
        return p

    def apply_linear_field(self, matrix) -> "Polynomial":
        """Apply the vector field ``V(x) = M x`` with integer/rational ``M``."""
        out = Polynomial(self.nvars)
        grads = self.gradient()
        for i in range(self.nvars):
            comp = Polynomial(self.nvars)
            for j in range(self.nvars):
                if matrix[i][j]:
                    comp = comp + Polynomial.variable(self.nvars, j) * matrix[i][j]
            if not comp.is_zero() and not grads[i].is_zero():
                out = out + comp * grads[i]
        return out

    # -- evaluation --------------------------------------------------------

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.terms:
            return np.zeros((0, self.nvars), dtype=int), np.zeros(0)
        exps = np.array(list(self.terms.keys()), dtype=int)
        coef = np.array([float(c) for c in self.terms.values()])
        return exps, coef

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        exps, coef = self.to_arrays()
        if len(coef) == 0:
            out = np.zeros(len(pts))
        else:
            mon = np.prod(pts[:, None, :] ** exps[None, :, :], axis=-1)
            out = mon @ coef
        return out if np.ndim(points) > 1 else out[0]

    def jet_at(self, point, alg: JetAlgebra, order: int | None = None) -> np.ndarray:
        """Taylor coefficients of the polynomial expanded at ``point``."""
        if alg.nvars != self.nvars:
            raise ValueError("jet algebra has the wrong number of variables")
        k = alg.order if order is None else order
        p = np.asarray(point, dtype=float)
        out = alg.zeros((), k)
        m = alg.size(k)
        for e, c in self.terms.items():
            cf = float(c)
            # (p + u)^e = prod_i sum_{b_i <= e_i} C(e_i, b_i) p_i^(e_i-b_i) u_i^b_i
            ranges = [range(min(ei, k) + 1) for ei in e]
            for b in _product_bounded(ranges, k):
                idx = alg.index[b]
                if idx >= m:
                    continue
                w = cf
                for ei, bi, pi in zip(e, b, p):
                    w *= comb(ei, bi) * pi ** (ei - bi)
                out[idx] += w
        return out

    def to_json(self) -> dict[str, str]:
        """Sparse exponent -> coefficient map with string keys/values."""
        return {
            ",".join(str(v) for v in e): str(c)
            for e, c in sorted(self.terms.items())
        }

    @classmethod
    def from_json(cls, nvars: int, data: Mapping[str, str]) -> "Polynomial":
        return cls(nvars, {tuple(int(v) for v in k.split(",")): Fraction(c)
                           for k, c in data.items()})


def _product_bounded(ranges, total: int) -> Iterable[Exponent]:
    """Cartesian product of ranges restricted to sum <= total."""

    def rec(i, acc, s):
        if i == len(ranges):
            yield tuple(acc)
            return
        for b in ranges[i]:
            if s + b > total:
                break
            acc.append(b)
            yield from rec(i + 1, acc, s + b)
            acc.pop()

    yield from rec(0, [], 0)
