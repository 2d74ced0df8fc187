"""Rigid deformations of the unit square: rotation about the origin plus
translation, phi(x) = R(alpha) x + t. Three parameters, independent of
any grid resolution."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])


@dataclass(frozen=True)
class RigidDeformation:
    alpha: float = 0.0
    t0: float = 0.0
    t1: float = 0.0

    @classmethod
    def identity(cls) -> "RigidDeformation":
        return cls(0.0, 0.0, 0.0)

    @property
    def translation(self):
        return np.array([self.t0, self.t1])

    def rotation(self):
        c, s = math.cos(self.alpha), math.sin(self.alpha)
        return np.array([[c, -s], [s, c]])

    def apply(self, x0, x1):
        """Transform coordinate arrays; returns (y0, y1)."""
        c, s = math.cos(self.alpha), math.sin(self.alpha)
        return c * x0 - s * x1 + self.t0, s * x0 + c * x1 + self.t1

    def apply_points(self, pts):
        pts = np.asarray(pts, dtype=float)
        y0, y1 = self.apply(pts[..., 0], pts[..., 1])
        return np.stack([y0, y1], axis=-1)

    def inverse(self) -> "RigidDeformation":
        c, s = math.cos(-self.alpha), math.sin(-self.alpha)
        return RigidDeformation(-self.alpha,
                                -(c * self.t0 - s * self.t1),
                                -(s * self.t0 + c * self.t1))

    def parameters(self):
        return np.array([self.alpha, self.t0, self.t1])

    @classmethod
    def from_parameters(cls, params) -> "RigidDeformation":
        a, t0, t1 = (float(v) for v in params)
        return cls(a, t0, t1)


def compose(outer: RigidDeformation, inner: RigidDeformation) -> RigidDeformation:
    """compose(a, b) applies b first: result(x) = a(b(x)).

    Rotations add; the inner translation is rotated by the outer angle.
    Exactly associative to machine precision, unlike the registration
    refinement built on top of it.
    """
    c, s = math.cos(outer.alpha), math.sin(outer.alpha)
    return RigidDeformation(
        outer.alpha + inner.alpha,
        c * inner.t0 - s * inner.t1 + outer.t0,
        s * inner.t0 + c * inner.t1 + outer.t1)


def deformation_distance(a: RigidDeformation, b: RigidDeformation) -> float:
    """max over the domain of |a(x) - b(x)|.

    The pointwise difference is affine in x, so the maximum sits at one
    of the four domain corners; evaluating there is exact.
    """
    da = a.apply_points(_CORNERS) - b.apply_points(_CORNERS)
    return float(np.max(np.hypot(da[:, 0], da[:, 1])))


def deformations_approx_eq(a: RigidDeformation, b: RigidDeformation,
                           tol: float) -> bool:
    """Sub-pixel agreement: nowhere does the displacement differ by tol
    (one fine-grid spacing, typically) or more."""
    return deformation_distance(a, b) < tol
