"""Scalar fields, pointwise tensor values and the U(n) type decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jets import JetOrderError
from .models import Model, ModelError, check_point, frame_at
from .polynomial import Polynomial


@dataclass(frozen=True)
class ScalarField:
    """A smooth function on a model.

    On spheres the field is an ambient polynomial restricted to the sphere.
    On groups it is a truncated Taylor jet in exponential coordinates around
    ``base``.
    """

    model: Model
    poly: Polynomial | None = None
    base: np.ndarray | None = None
    coeffs: np.ndarray | None = None

    def __post_init__(self):
        if self.poly is not None:
            if not self.model.is_sphere:
                raise ModelError("polynomial fields attach only to sphere models")
            if self.poly.nvars != self.model.nvars:
                raise ModelError("polynomial has the wrong number of variables")
        else:
            if self.model.is_sphere:
                raise ModelError("jet fields attach only to group models")
            if self.base is None or self.coeffs is None:
                raise ModelError("jet fields need a base point and coefficients")

    @property
    def is_polynomial(self) -> bool:
        return self.poly is not None

    @classmethod
    def polynomial(cls, model: Model, poly: Polynomial) -> "ScalarField":
        return cls(model, poly=poly)

    @classmethod
    def jet(cls, model: Model, base, coeffs) -> "ScalarField":
        base = check_point(model, base)
        coeffs = np.asarray(coeffs, dtype=float)
        model.algebra().order_of(coeffs)
        return cls(model, base=base, coeffs=coeffs)

    @classmethod
    def random(cls, model: Model, rng: np.random.Generator, base=None,
               degree: int | None = None) -> "ScalarField":
        """Random polynomial (sphere) or random jet at ``base`` (groups)."""
        from .defaults import DEFAULTS

        if model.is_sphere:
            d = DEFAULTS.sphere_field_degree if degree is None else degree
            return cls.polynomial(model, Polynomial.random(model.nvars, d, rng))
        alg = model.algebra()
        k = alg.order if degree is None else min(degree, alg.order)
        c = np.zeros(alg.size(alg.order))
        c[: alg.size(k)] = rng.uniform(-1.0, 1.0, alg.size(k))
        return cls.jet(model, np.zeros(model.nvars) if base is None else base, c)

    def jet_at(self, p, order: int | None = None) -> np.ndarray:
        """Taylor coefficients in model coordinates around ``p``."""
        alg = self.model.algebra(order)
        p = check_point(self.model, p)
        if self.poly is not None:
            return self.poly.jet_at(p, alg)
        if not np.allclose(p, self.base, atol=0, rtol=0):
            raise ModelError("a jet field can only be evaluated at its base point")
        k = alg.order
        if self.model.algebra().order_of(self.coeffs) < k:
            raise JetOrderError("jet field carries fewer orders than requested")
        return self.coeffs[: alg.size(k)]

    def value(self, p) -> float:
        if self.poly is not None:
            return float(self.poly(check_point(self.model, p)))
        return float(self.jet_at(p, 0)[0])

    def to_json(self) -> dict:
        if self.poly is not None:
            return {"representation": "polynomial", "terms": self.poly.to_json()}
        return {
            "representation": "jet",
            "base": [float(v) for v in self.base],
            "coefficients": [float(v) for v in self.coeffs],
        }


def derive(f: ScalarField, direction, p) -> float:
    """Directional derivative ``df(X)`` at ``p``.

    ``direction`` is either a frame index (0..2n, the Reeb field last) or a
    tangent vector in model coordinates.
    """
    model = f.model
    p = check_point(model, p)
    if isinstance(direction, (int, np.integer)):
        if not 0 <= direction < model.N:
            raise ModelError(f"frame index {direction} out of range")
        vec = frame_at(model, p, order=1).values()[direction]
    else:
        vec = np.asarray(direction, dtype=float)
        if vec.shape != (model.nvars,):
            raise ModelError("direction has the wrong dimension")
        if model.is_sphere and abs(vec @ p) > 1e-10:
            raise ModelError("direction is not tangent to the sphere")
    if f.poly is not None:
        grad = np.array([g(p) if not g.is_zero() else 0.0 for g in f.poly.gradient()])
        return float(grad @ vec)
    alg = model.algebra(1)
    jet = f.jet_at(p, 1)
    lin = np.array([jet[alg.index[tuple(int(i == mu) for i in range(model.nvars))]]
                    for mu in range(model.nvars)])
    return float(lin @ vec)


# -- tensor values ----------------------------------------------------------

SLOT_TYPES = ("horizontal", "full")


@dataclass(frozen=True)
class TensorValue:
    """Frame components of a tensor at a point."""

    components: np.ndarray
    slots: tuple[str, ...]
    n: int

    def __post_init__(self):
        comp = np.asarray(self.components, dtype=float)
        object.__setattr__(self, "components", comp)
        if comp.ndim != len(self.slots):
            raise ValueError("component array rank does not match the valence")
        for s, d in zip(self.slots, comp.shape):
            if s not in SLOT_TYPES:
                raise ValueError(f"unknown slot type {s!r}")
            want = 2 * self.n if s == "horizontal" else 2 * self.n + 1
            if d != want:
                raise ValueError(f"{s} slot needs dimension {want}, got {d}")

    @property
    def valence(self) -> int:
        return len(self.slots)

    def horizontal(self) -> "TensorValue":
        h = 2 * self.n
        idx = tuple(slice(0, h) for _ in self.slots)
        return TensorValue(self.components[idx], ("horizontal",) * self.valence, self.n)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.components ** 2)))

    def symmetry_residual(self, kind: str, J: np.ndarray | None = None) -> float:
        t = self.components
        if kind == "symmetric":
            return float(np.max(np.abs(t - t.T)))
        if kind == "antisymmetric":
            return float(np.max(np.abs(t + t.T)))
        if self.slots != ("horizontal", "horizontal") or J is None:
            raise ValueError("J-type checks need a horizontal 2-tensor and J")
        up = upsilon(t, J)
        if kind == "J-invariant":
            return float(np.max(np.abs(up - t)))
        if kind == "J-anti-invariant":
            return float(np.max(np.abs(up + t)))
        raise ValueError(f"unknown symmetry {kind!r}")


def upsilon(t: np.ndarray, J: np.ndarray) -> np.ndarray:
    """``(Upsilon t)(X, Y) = t(JX, JY)`` in frame components."""
    # t(J e_a, J e_b) = J[c, a] J[d, b] t[c, d]
    return J.T @ t @ J


def decompose_11_m11(t: TensorValue, J: np.ndarray) -> tuple[TensorValue, TensorValue]:
    """Split a horizontal 2-tensor into its J-invariant and J-anti-invariant parts."""
    if t.slots != ("horizontal", "horizontal"):
        raise ValueError("decomposition needs two horizontal slots")
    up = upsilon(t.components, J)
    plus = 0.5 * (t.components + up)
    minus = 0.5 * (t.components - up)
    return TensorValue(plus, t.slots, t.n), TensorValue(minus, t.slots, t.n)
