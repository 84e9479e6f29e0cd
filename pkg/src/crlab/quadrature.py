"""Exact integration on the odd spheres S^{2n+1} in C^{n+1} = R^{2n+2}.

Integrals of polynomials against the round measure are rational multiples of
``pi^(n+1)``; :func:`sphere_monomial_integral` returns that rational factor.
:func:`sphere_cubature` builds a product rule (equispaced torus angles times
a collapsed Gauss-Jacobi rule on the simplex of squared moduli) that is exact
for polynomials up to a requested degree, which lets nonlinear pointwise
integrands be integrated without expanding them symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, pi

import numpy as np
from scipy.special import roots_jacobi


@dataclass(frozen=True)
class SphereIntegral:
    """``coefficient * pi**pi_power``, kept exact."""

    coefficient: Fraction
    pi_power: int

    def __float__(self) -> float:
        return float(self.coefficient) * pi ** self.pi_power

    def __add__(self, other: "SphereIntegral") -> "SphereIntegral":
        if other.pi_power != self.pi_power:
            raise ValueError("integrals on different spheres")
        return SphereIntegral(self.coefficient + other.coefficient, self.pi_power)


@lru_cache(maxsize=None)
def _half_integer_gamma_ratio(k: int) -> Fraction:
    # Gamma(k + 1/2) / sqrt(pi) = (2k)! / (4^k k!)
    return Fraction(factorial(2 * k), 4 ** k * factorial(k))


def sphere_monomial_integral(exponent: tuple[int, ...]) -> Fraction:
    """Rational factor of ``int_{S^{m-1}} x^a dsigma`` for even ``m``.

    Uses ``int x^a = 2 prod Gamma((a_i+1)/2) / Gamma((|a|+m)/2)``; odd
    exponents integrate to zero.
    """
    m = len(exponent)
    if m % 2:
        raise ValueError("only even ambient dimension (odd spheres) is supported")
    if any(a % 2 for a in exponent):
        return Fraction(0)
    ks = [a // 2 for a in exponent]
    num = Fraction(2)
    for k in ks:
        num *= _half_integer_gamma_ratio(k)
    return num / factorial(sum(ks) + m // 2 - 1)


def sphere_area(n: int) -> SphereIntegral:
    return SphereIntegral(Fraction(2, factorial(n)), n + 1)


def integrate_sphere_polynomial(poly) -> SphereIntegral:
    """Exact integral of a :class:`~crlab.polynomial.Polynomial` over S^{2n+1}."""
    total = Fraction(0)
    for e, c in poly.terms.items():
        total += c * sphere_monomial_integral(e)
    return SphereIntegral(total, poly.nvars // 2)


@dataclass(frozen=True)
class Cubature:
    points: np.ndarray  # (Q, 2n+2) on the unit sphere
    weights: np.ndarray  # (Q,), summing to the area
    degree: int

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def _simplex_rule(n: int, degree: int):
    """Nodes/weights on {t in R^n, t_i >= 0, sum t <= 1} exact to ``degree``."""
    if n == 0:
        return np.zeros((1, 0)), np.ones(1)
    q = degree // 2 + 1
    rules = []
    for j in range(n):
        alpha = n - 1 - j
        s, w = roots_jacobi(q, alpha, 0)
        u = (s + 1) / 2
        w = w / 2 ** (alpha + 1)
        rules.append((u, w))
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    us = np.stack([g.ravel() for g in grids], axis=1)
    ws = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    t = np.zeros_like(us)
    rest = np.ones(len(us))
    for j in range(n):
        t[:, j] = rest * us[:, j]
        rest = rest * (1 - us[:, j])
    return t, ws


@lru_cache(maxsize=None)
def sphere_cubature(n: int, degree: int) -> Cubature:
    """Product rule on S^{2n+1} exact for ambient polynomials of ``degree``."""
    t, wt = _simplex_rule(n, degree // 2)
    t_full = np.concatenate([t, 1 - t.sum(axis=1, keepdims=True)], axis=1)
    t_full = np.clip(t_full, 0.0, None)
    q = degree + 1
    ang = 2 * np.pi * np.arange(q) / q
    phis = np.stack(
        [g.ravel() for g in np.meshgrid(*([ang] * (n + 1)), indexing="ij")], axis=1
    )
    r = np.sqrt(t_full)  # (T, n+1)
    pts = np.empty((len(t_full), len(phis), 2 * n + 2))
    pts[:, :, 0::2] = r[:, None, :] * np.cos(phis)[None, :, :]
    pts[:, :, 1::2] = r[:, None, :] * np.sin(phis)[None, :, :]
    w = (2 * np.pi ** (n + 1)) * wt[:, None] * np.full(len(phis), 1.0 / len(phis))
    return Cubature(pts.reshape(-1, 2 * n + 2), w.reshape(-1), degree)
