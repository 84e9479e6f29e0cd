"""Galerkin spectra of the sub-Laplacian, the Webster Laplacian and the Paneitz
operator on the odd spheres.

The trial space is spanned by real and imaginary parts of the reduced
monomials ``z^a zbar^b`` (``p + q <= N``, never both ``z_{n+1}`` and its
conjugate), which restrict to a basis of the polynomials of degree ``<= N``
on the sphere.  All three operators preserve the charge vector ``a - b``, so
the matrices are assembled block by block.  Gram and stiffness entries are
exact rationals (the common factor ``pi^(n+1)`` is dropped); only the final
orthonormalisation and eigen-solve run in floating point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from .defaults import DEFAULTS
from .models import Model
from .polynomial import Polynomial

SPECTRAL_OPERATORS = ("sublaplacian", "riemannian_laplacian", "paneitz_C")
OPERATOR_ALIASES = {"paneitz": "paneitz_C", "C": "paneitz_C", "laplacian": "sublaplacian"}

Monomial = tuple[tuple[int, ...], tuple[int, ...]]


class SpectralError(RuntimeError):
    pass


def canonical_operator(name: str) -> str:
    name = OPERATOR_ALIASES.get(name, name)
    if name not in SPECTRAL_OPERATORS:
        raise SpectralError(f"unknown spectral operator {name!r}")
    return name


# -- complex monomial calculus -----------------------------------------------------


def _bideg(m: Monomial) -> tuple[int, int]:
    return sum(m[0]), sum(m[1])


def apply_complex(op: str, n: int, vec: dict[Monomial, int]) -> dict[Monomial, int]:
    """Apply an operator to a combination of monomials ``z^a zbar^b``.

    In complex coordinates the sub-Laplacian acts by
    ``(p+q)(p+q+2n) - (p-q)^2`` on the monomial plus the lowering term
    ``-4 sum_k a_k b_k z^(a-e_k) zbar^(b-e_k)``; ``xi`` acts by ``i (p - q)``.
    """
    op = canonical_operator(op)
    if op == "paneitz_C":
        once = apply_complex("sublaplacian", n, vec)
        twice = apply_complex("sublaplacian", n, once)
        for m, c in vec.items():
            p, q = _bideg(m)
            twice[m] = twice.get(m, 0) - 4 * n * n * (p - q) ** 2 * c
        return {m: c for m, c in twice.items() if c}
    out: dict[Monomial, int] = {}
    for (a, b), c in vec.items():
        p, q = sum(a), sum(b)
        diag = (p + q) * (p + q + 2 * n) - (p - q) ** 2
        if op == "riemannian_laplacian":
            diag += (p - q) ** 2
        out[(a, b)] = out.get((a, b), 0) + diag * c
        for k in range(n + 1):
            if a[k] and b[k]:
                a2 = a[:k] + (a[k] - 1,) + a[k + 1:]
                b2 = b[:k] + (b[k] - 1,) + b[k + 1:]
                out[(a2, b2)] = out.get((a2, b2), 0) - 4 * a[k] * b[k] * c
    return {m: c for m, c in out.items() if c}


def monomial_pairing(n: int, m1: Monomial, m2: Monomial) -> Fraction:
    """``int_S m1 * conj(m2)`` divided by ``pi^(n+1)``."""
    A = tuple(x + y for x, y in zip(m1[0], m2[1]))
    B = tuple(x + y for x, y in zip(m1[1], m2[0]))
    if A != B:
        return Fraction(0)
    num = 1
    for v in A:
        num *= factorial(v)
    return Fraction(2 * num, factorial(n + sum(A)))


@lru_cache(maxsize=None)
def complex_monomial_poly(n: int, m: Monomial) -> tuple[Polynomial, Polynomial]:
    """Real and imaginary parts of ``z^a zbar^b`` in ambient coordinates."""
    nv = 2 * n + 2
    re, im = Polynomial.constant(nv, 1), Polynomial(nv)
    a, b = m
    for k in range(n + 1):
        x, y = Polynomial.variable(nv, 2 * k), Polynomial.variable(nv, 2 * k + 1)
        for sign, count in ((1, a[k]), (-1, b[k])):
            for _ in range(count):
                yy = y * sign
                re, im = re * x - im * yy, re * yy + im * x
    return re, im


# -- basis --------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisFunction:
    monomial: Monomial
    part: str  # "re" or "im"

    @property
    def bidegree(self) -> tuple[int, int]:
        return _bideg(self.monomial)

    @property
    def degree(self) -> int:
        return sum(self.bidegree)

    def poly(self, n: int) -> Polynomial:
        re, im = complex_monomial_poly(n, self.monomial)
        return re if self.part == "re" else im


@dataclass(frozen=True)
class SpectralBasis:
    n: int
    N: int
    blocks: tuple[tuple[tuple[int, ...], tuple[Monomial, ...]], ...]  # (charge, monomials)

    @property
    def functions(self) -> list[BasisFunction]:
        out = []
        for charge, mons in self.blocks:
            parts = ("re",) if not any(charge) else ("re", "im")
            for part in parts:
                out.extend(BasisFunction(m, part) for m in mons)
        return out

    def __len__(self) -> int:
        return len(self.functions)

    def gram(self) -> list[list[Fraction]]:
        """Exact Gram matrix of the real basis (in units of pi^(n+1))."""
        fs = self.functions
        out = []
        for f1 in fs:
            row = []
            for f2 in fs:
                row.append(_real_pairing(self.n, f1, f2, {f2.monomial: 1}))
            out.append(row)
        return out


def _real_pairing(n: int, f1: BasisFunction, f2: BasisFunction,
                  image: dict[Monomial, int]) -> Fraction:
    """``int f1 * Re/Im(image)`` where ``image`` is the complex image of ``f2``'s monomial."""
    if f1.part != f2.part:
        return Fraction(0)
    m1 = f1.monomial
    tot = Fraction(0)
    c1 = tuple(x - y for x, y in zip(*m1))
    for m, c in image.items():
        val = monomial_pairing(n, m1, m)
        if not val:
            continue
        if not any(c1):
            # real monomials: int m1 * m
            tot += c * val
        else:
            tot += Fraction(c, 2) * val
    return tot


def reduced_monomials(n: int, N: int) -> list[Monomial]:
    out = []
    for deg in range(N + 1):
        for p in range(deg + 1):
            q = deg - p
            for a in _compositions(p, n + 1):
                for b in _compositions(q, n + 1):
                    if a[n] and b[n]:
                        continue
                    out.append((a, b))
    return out


def _compositions(total: int, parts: int):
    for cut in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, comp = -1, []
        for c in cut + (total + parts - 1,):
            comp.append(c - prev - 1)
            prev = c
        yield tuple(comp)


def build_basis(n: int, N: int) -> SpectralBasis:
    if N < 1:
        raise SpectralError("degree cap N must be >= 1")
    groups: dict[tuple[int, ...], list[Monomial]] = {}
    for m in reduced_monomials(n, N):
        charge = tuple(x - y for x, y in zip(*m))
        if charge < tuple(0 for _ in charge):
            continue  # represented by its conjugate
        groups.setdefault(charge, []).append(m)
    blocks = tuple((c, tuple(ms)) for c, ms in sorted(groups.items()))
    return SpectralBasis(n, N, blocks)


# -- assembly ----------------------------------------------------------------------


@dataclass
class SpectralMatrix:
    operator: str
    n: int
    N: int
    basis: SpectralBasis
    matrix: np.ndarray  # symmetric, orthonormalised basis coordinates
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns, orthonormal coordinates
    to_basis: np.ndarray  # maps orthonormal coordinates to basis coefficients
    symmetry_error: float
    gram_min_eigenvalue: float
    bidegrees: list[tuple[int, int]] = field(default_factory=list)

    def clusters(self, gap: float | None = None) -> list[dict]:
        """Eigenvalues grouped within ``gap`` with multiplicities and bidegrees."""
        gap = DEFAULTS.multiplicity_gap if gap is None else gap
        out: list[dict] = []
        for i, v in enumerate(self.eigenvalues):
            if out and abs(v - out[-1]["values"][-1]) <= gap:
                out[-1]["values"].append(float(v))
                out[-1]["bidegrees"].update(_both(self.bidegrees[i]))
            else:
                out.append({"values": [float(v)], "bidegrees": set(_both(self.bidegrees[i]))})
        return [
            {
                "value": float(np.mean(c["values"])),
                "multiplicity": len(c["values"]),
                "bidegrees": sorted(c["bidegrees"]),
            }
            for c in out
        ]

    def eigenfunction(self, k: int) -> Polynomial:
        """Eigenvector ``k`` as an ambient polynomial (float coefficients)."""
        coef = self.to_basis @ self.eigenvectors[:, k]
        out = Polynomial(2 * self.n + 2)
        for c, f in zip(coef, self.basis.functions):
            if abs(c) > 1e-13:
                out = out + f.poly(self.n) * float(c)
        return out


def _both(bd: tuple[int, int]) -> tuple[tuple[int, int], ...]:
    # a real eigenfunction of bidegree (p, q) also carries the conjugate (q, p)
    p, q = bd
    return ((p, q),) if p == q else ((q, p), (p, q))


def _block_matrices(n: int, op: str, monos: tuple[Monomial, ...], charge) -> tuple:
    f_re = [BasisFunction(m, "re") for m in monos]
    G = [[_real_pairing(n, a, b, {b.monomial: 1}) for b in f_re] for a in f_re]
    images = [apply_complex(op, n, {m: 1}) for m in monos]
    K = [[_real_pairing(n, a, b, img) for b, img in zip(f_re, images)] for a in f_re]
    return G, K


def _orthonormalise(G: np.ndarray) -> tuple[np.ndarray, float]:
    d = np.sqrt(np.diag(G))
    Gs = G / np.outer(d, d)
    w, V = np.linalg.eigh(Gs)
    if w.min() <= DEFAULTS.gram_threshold:
        raise SpectralError(f"Gram matrix is degenerate (min eigenvalue {w.min():.3g})")
    L = (V / np.sqrt(w)) @ V.T  # Gs^{-1/2}
    return L / d[:, None], float(w.min())


def assemble(model: Model, operator: str, N: int) -> SpectralMatrix:
    """Galerkin matrix of ``operator`` on the degree ``<= N`` slice of the sphere."""
    if not model.is_sphere:
        raise SpectralError("spectra are only available on sphere models")
    op = canonical_operator(operator)
    if N < 1 or N > DEFAULTS.max_degree:
        raise SpectralError(f"degree cap must be in 1..{DEFAULTS.max_degree}")
    return _assemble_cached(model.n, op, N)


@lru_cache(maxsize=None)
def _assemble_cached(n: int, op: str, N: int) -> SpectralMatrix:
    basis = build_basis(n, N)
    total = len(basis)
    evals, bideg = [], []
    sym_err, gmin = 0.0, np.inf
    offset = 0
    blocks_out = []
    for charge, monos in basis.blocks:
        G, K = _block_matrices(n, op, monos, charge)
        Gf = np.array([[float(v) for v in row] for row in G])
        Kf = np.array([[float(v) for v in row] for row in K])
        L, gm = _orthonormalise(Gf)
        gmin = min(gmin, gm)
        M = L.T @ Kf @ L
        scale = max(1.0, float(np.max(np.abs(M))))
        sym_err = max(sym_err, float(np.max(np.abs(M - M.T))) / scale)
        M = 0.5 * (M + M.T)
        w, V = np.linalg.eigh(M)
        degs = np.array([sum(m[0]) + sum(m[1]) for m in monos])
        s = sum(charge)
        coef = L @ V
        bd = []
        for k in range(len(w)):
            mag = np.abs(coef[:, k]) * np.sqrt(np.diag(Gf))
            top = int(degs[mag > 1e-8 * mag.max()].max())
            bd.append(((top + s) // 2, (top - s) // 2))
        copies = 1 if not any(charge) else 2
        for _ in range(copies):
            blocks_out.append((offset, M, L, V, w, bd))
            offset += len(monos)
    assert offset == total
    matrix = np.zeros((total, total))
    to_basis = np.zeros((total, total))
    vecs = np.zeros((total, total))
    col = 0
    for start, M, L, V, w, bd in blocks_out:
        k = len(w)
        sl = slice(start, start + k)
        matrix[sl, sl] = M
        to_basis[sl, sl] = L
        vecs[sl, col:col + k] = V
        evals.extend(w)
        bideg.extend(bd)
        col += k
    order = np.argsort(np.array(evals), kind="stable")
    return SpectralMatrix(op, n, N, basis, matrix, np.array(evals)[order], vecs[:, order],
                          to_basis, sym_err, gmin, [bideg[i] for i in order])


def first_eigenvalue(sm: SpectralMatrix) -> tuple[float, list[Polynomial]]:
    """Smallest positive eigenvalue and an eigenbasis, constants excluded."""
    gap = DEFAULTS.multiplicity_gap
    pos = np.nonzero(sm.eigenvalues > gap)[0]
    if not len(pos):
        raise SpectralError("no positive eigenvalue in the assembled slice")
    lam = sm.eigenvalues[pos[0]]
    idx = [i for i in pos if abs(sm.eigenvalues[i] - lam) <= gap]
    return float(lam), [sm.eigenfunction(i) for i in idx]


def bigraded_eigenvalue(op: str, n: int, p: int, q: int) -> int:
    """Closed-form eigenvalue of an operator on the bidegree (p, q) harmonics."""
    op = canonical_operator(op)
    lam = (p + q) * (p + q + 2 * n) - (p - q) ** 2
    if op == "sublaplacian":
        return lam
    if op == "riemannian_laplacian":
        return lam + (p - q) ** 2
    return lam * lam - 4 * n * n * (p - q) ** 2


def harmonic_dimension(n: int, p: int, q: int) -> int:
    """Real dimension count of H_{p,q} in C^{n+1} (complex dimension)."""
    from math import comb

    m = n + 1
    def d(a, b):
        if a < 0 or b < 0:
            return 0
        return comb(a + m - 1, a) * comb(b + m - 1, b)
    return d(p, q) - d(p - 1, q - 1)


def predicted_spectrum(op: str, n: int, N: int) -> list[tuple[int, int]]:
    """``(value, multiplicity)`` pairs from the bigraded formula, merged by value."""
    acc: dict[int, int] = {}
    for p in range(N + 1):
        for q in range(N + 1 - p):
            v = bigraded_eigenvalue(op, n, p, q)
            acc[v] = acc.get(v, 0) + harmonic_dimension(n, p, q)
    return sorted(acc.items())


# -- pointwise fit oracle ------------------------------------------------------------


@dataclass
class FitOracle:
    eigenvalues: np.ndarray
    fit_residual: float
    points: int


def fit_oracle(model: Model, operator: str, N: int, seed: int = 0,
               points: int | None = None) -> FitOracle:
    """Eigenvalues of the operator matrix fitted from pointwise applications.

    Each basis function is pushed through the jet engine at random points and
    the images are expanded back in the basis by least squares.
    """
    from .connection import PointGeometry
    from .models import sample_points
    from .operators import apply_batch

    op = canonical_operator(operator)
    if op == "paneitz_C":
        raise SpectralError("the fit oracle covers second order operators only")
    basis = build_basis(model.n, N)
    polys = [f.poly(model.n) for f in basis.functions]
    B = len(polys)
    count = points if points is not None else 3 * B
    pts = sample_points(model, count, seed)
    V = np.zeros((count, B))
    W = np.zeros((count, B))
    for i, p in enumerate(pts):
        geo = PointGeometry(model, p, order=3)
        jets = np.stack([P.jet_at(p, geo.alg) for P in polys])
        V[i] = jets[:, 0]
        W[i] = apply_batch(geo, jets, op)
    X, *_ = np.linalg.lstsq(V, W, rcond=None)
    resid = float(np.max(np.abs(V @ X - W))) / max(1.0, float(np.max(np.abs(W))))
    ev = np.sort(np.linalg.eigvals(X).real)
    return FitOracle(ev, resid, count)
