"""Truncated multivariate Taylor jets.

A jet of order ``k`` in ``d`` variables is stored as a numpy array whose last
axis holds the Taylor coefficients of all monomials of total degree ``<= k``,
in graded order.  Because the ordering is graded, truncating a jet to a lower
order is a prefix slice, and the order of an array is recovered from its
length.  Leading axes are free batch axes, so a tensor field of jets is just
an array of shape ``(N, N, ..., M)``.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from math import comb

import numpy as np


class JetOrderError(ValueError):
    """Raised when a computation needs more derivatives than a jet carries."""


def _graded_exponents(nvars: int, order: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []
    for deg in range(order + 1):
        block = [
            e
            for e in itertools.product(range(deg + 1), repeat=nvars)
            if sum(e) == deg
        ]
        block.sort(reverse=True)
        out.extend(block)
    return out


class JetAlgebra:
    """Index tables for jets in ``nvars`` variables up to ``order``."""

    def __init__(self, nvars: int, order: int):
        if nvars < 1 or order < 0:
            raise ValueError("need nvars >= 1 and order >= 0")
        self.nvars = nvars
        self.order = order
        self.exponents = np.array(_graded_exponents(nvars, order), dtype=int)
        self.degrees = self.exponents.sum(axis=1)
        self.index = {tuple(e): i for i, e in enumerate(self.exponents)}
        self.sizes = [comb(nvars + k, k) for k in range(order + 1)]
        self._order_of_size = {m: k for k, m in enumerate(self.sizes)}
        # factorials of exponents, used to convert coefficients to derivatives
        fact = np.ones(len(self.exponents))
        for i, e in enumerate(self.exponents):
            f = 1.0
            for a in e:
                for t in range(2, a + 1):
                    f *= t
            fact[i] = f
        self.factorials = fact
        self._deriv_tables = self._build_deriv_tables()
        self._prod_tables: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    # -- bookkeeping -------------------------------------------------------

    def size(self, k: int) -> int:
        if k < 0:
            raise JetOrderError(f"jet order {k} < 0: derivative budget exhausted")
        if k > self.order:
            raise JetOrderError(f"jet order {k} exceeds algebra order {self.order}")
        return self.sizes[k]

    def order_of(self, a: np.ndarray) -> int:
        try:
            return self._order_of_size[a.shape[-1]]
        except KeyError:
            raise ValueError(f"array of length {a.shape[-1]} is not a jet") from None

    def truncate(self, a: np.ndarray, k: int) -> np.ndarray:
        if self.order_of(a) < k:
            raise JetOrderError(
                f"need order {k}, jet only carries order {self.order_of(a)}"
            )
        return a[..., : self.size(k)]

    def zeros(self, shape: tuple[int, ...], k: int) -> np.ndarray:
        return np.zeros(tuple(shape) + (self.size(k),))

    def constant(self, value, k: int) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        out = np.zeros(value.shape + (self.size(k),))
        out[..., 0] = value
        return out

    def variable(self, mu: int, k: int, center: float = 0.0) -> np.ndarray:
        """Jet of the coordinate function ``x_mu`` expanded at ``center``."""
        out = self.zeros((), k)
        out[0] = center
        if k >= 1:
            e = [0] * self.nvars
            e[mu] = 1
            out[self.index[tuple(e)]] = 1.0
        return out

    @staticmethod
    def value(a: np.ndarray) -> np.ndarray:
        return a[..., 0]

    # -- derivatives -------------------------------------------------------

    def _build_deriv_tables(self):
        tables = []
        for mu in range(self.nvars):
            src = np.zeros(len(self.exponents), dtype=int)
            fac = np.zeros(len(self.exponents))
            for i, e in enumerate(self.exponents):
                if self.degrees[i] >= self.order:
                    continue
                up = list(e)
                up[mu] += 1
                src[i] = self.index[tuple(up)]
                fac[i] = up[mu]
            tables.append((src, fac))
        return tables

    def partial(self, a: np.ndarray, mu: int) -> np.ndarray:
        """Partial derivative in variable ``mu``; the order drops by one."""
        k = self.order_of(a) - 1
        m = self.size(k)
        src, fac = self._deriv_tables[mu]
        return a[..., src[:m]] * fac[:m]

    def gradient(self, a: np.ndarray) -> np.ndarray:
        """All partials, stacked on a new axis before the coefficient axis."""
        return np.stack([self.partial(a, mu) for mu in range(self.nvars)], axis=-2)

    # -- products ----------------------------------------------------------

    def _products(self, k: int):
        if k not in self._prod_tables:
            m = self.size(k)
            ia, ib, ic = [], [], []
            exps = self.exponents[:m]
            for i in range(m):
                for j in range(m):
                    if self.degrees[i] + self.degrees[j] > k:
                        continue
                    ia.append(i)
                    ib.append(j)
                    ic.append(self.index[tuple(exps[i] + exps[j])])
            ia, ib, ic = (np.asarray(v, dtype=int) for v in (ia, ib, ic))
            order = np.argsort(ic, kind="stable")
            ia, ib, ic = ia[order], ib[order], ic[order]
            starts = np.searchsorted(ic, np.arange(m))
            self._prod_tables[k] = (ia, ib, starts)
        return self._prod_tables[k]

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Truncated product, order = min of the operand orders."""
        k = min(self.order_of(a), self.order_of(b))
        ia, ib, starts = self._products(k)
        x = a[..., ia] * b[..., ib]
        return np.add.reduceat(x, starts, axis=-1)

    def contract(self, spec: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """``einsum(spec)`` on the batch axes with jet products on the last axis.

        ``spec`` names only the batch axes, e.g. ``"ijl,lr->ijr"``.
        """
        k = min(self.order_of(a), self.order_of(b))
        ia, ib, starts = self._products(k)
        lhs, out = spec.split("->")
        sa, sb = lhs.split(",")
        x = np.einsum(f"{sa}p,{sb}p->{out}p", a[..., ia], b[..., ib])
        return np.add.reduceat(x, starts, axis=-1)

    def power(self, a: np.ndarray, p: int) -> np.ndarray:
        out = self.constant(np.ones(a.shape[:-1]), self.order_of(a))
        for _ in range(p):
            out = self.mul(out, a)
        return out

    def _nilpotent_series(self, a: np.ndarray, coeffs) -> np.ndarray:
        """Sum_j coeffs[j] * delta**j where delta = a - a(0)."""
        k = self.order_of(a)
        delta = a.copy()
        delta[..., 0] = 0.0
        out = self.zeros(a.shape[:-1], k)
        term = self.constant(np.ones(a.shape[:-1]), k)
        for j in range(k + 1):
            out = out + coeffs[j][..., None] * term
            term = self.mul(term, delta)
        return out

    def reciprocal(self, a: np.ndarray) -> np.ndarray:
        a0 = a[..., 0]
        if np.any(np.abs(a0) < 1e-300):
            raise ZeroDivisionError("jet reciprocal of a vanishing value")
        k = self.order_of(a)
        coeffs = [(-1.0) ** j / a0 ** (j + 1) for j in range(k + 1)]
        return self._nilpotent_series(a, coeffs)

    def sqrt(self, a: np.ndarray) -> np.ndarray:
        a0 = a[..., 0]
        if np.any(a0 <= 0):
            raise ValueError("jet sqrt needs a positive value")
        k = self.order_of(a)
        coeffs = []
        for j in range(k + 1):
            binom = 1.0
            for t in range(j):
                binom *= (0.5 - t) / (t + 1)
            coeffs.append(binom * a0 ** (0.5 - j))
        return self._nilpotent_series(a, coeffs)

    # -- vector fields -----------------------------------------------------

    def apply_fields(self, fields: np.ndarray, a: np.ndarray) -> np.ndarray:
        """Apply vector fields to a batch of jets.

        ``fields`` has shape ``(N, d, M)`` (coefficients of N fields in the
        coordinate basis), ``a`` has shape ``batch + (M',)``.  Returns an
        array of shape ``(N,) + batch + (M'',)`` holding ``E_i(a)``, with the
        order reduced by one.
        """
        grad = self.gradient(a)  # batch + (d, m)
        k = self.order_of(grad)
        f = self.truncate(fields, k)
        batch = grad.shape[:-2]
        flat = grad.reshape((-1,) + grad.shape[-2:])
        ia, ib, starts = self._products(k)
        x = np.einsum("imp,bmp->ibp", f[..., ia], flat[..., ib])
        out = np.add.reduceat(x, starts, axis=-1)
        return out.reshape((fields.shape[0],) + batch + (out.shape[-1],))

    def derivatives(self, a: np.ndarray) -> np.ndarray:
        """Convert Taylor coefficients to partial-derivative values."""
        m = a.shape[-1]
        return a * self.factorials[:m]


@lru_cache(maxsize=None)
def jet_algebra(nvars: int, order: int) -> JetAlgebra:
    return JetAlgebra(nvars, order)
