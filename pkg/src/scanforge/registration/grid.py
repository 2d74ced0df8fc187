"""Scalar fields on nested uniform grids over the unit square.

Level ``l`` means a (2^l + 1) x (2^l + 1) node grid with spacing
``h = 1/2^l``; ``values[row, col]`` sits at coordinates
``(x0, x1) = (col*h, row*h)``. Restriction and prolongation connect
adjacent levels and are exact on constant and bilinear fields at
interior nodes.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np


class GridError(ValueError):
    pass


def level_side(level: int) -> int:
    return (1 << level) + 1


class GridImage:
    __slots__ = ("values",)

    def __init__(self, values):
        v = np.asarray(values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise GridError(f"grid must be square, got shape {v.shape}")
        n = v.shape[0] - 1
        if n < 1 or n & (n - 1):
            raise GridError(f"side must be 2^l + 1, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise GridError("grid values must be finite")
        self.values = v

    @property
    def side(self) -> int:
        return self.values.shape[0]

    @property
    def level(self) -> int:
        return (self.side - 1).bit_length() - 1

    @property
    def h(self) -> float:
        return 1.0 / (self.side - 1)

    def copy(self) -> "GridImage":
        return GridImage(self.values.copy())

    @classmethod
    def from_function(cls, fn: Callable, level: int) -> "GridImage":
        """Sample fn(x0, x1) (vectorized) at the level's nodes."""
        x0, x1 = node_coords(level)
        return cls(fn(x0, x1))

    def __repr__(self):
        return f"GridImage(level={self.level}, side={self.side})"


@lru_cache(maxsize=32)
def node_coords(level: int):
    """(x0, x1) coordinate arrays of shape (side, side); x0 varies
    along columns, x1 along rows."""
    side = level_side(level)
    ax = np.linspace(0.0, 1.0, side)
    x0, x1 = np.meshgrid(ax, ax, indexing="xy")
    x0.setflags(write=False)
    x1.setflags(write=False)
    return x0, x1


@lru_cache(maxsize=32)
def quadrature_weights(level: int):
    """Tensor-product trapezoidal weights scaled by cell area.

    1/4 at corners, 1/2 on edges, 1 inside, times h^2; they sum to
    exactly 1 (= |domain|) and integrate nodal bilinear fields exactly.
    """
    side = level_side(level)
    w1 = np.ones(side)
    w1[0] = w1[-1] = 0.5
    w = np.outer(w1, w1) / (side - 1) ** 2
    w.setflags(write=False)
    return w


def restrict(f: GridImage) -> GridImage:
    """One level down: full 1/16 [1 2 1; 2 4 2; 1 2 1] stencil at interior
    coarse nodes, injection of the coincident fine node on the boundary."""
    if f.level < 1:
        raise GridError("cannot restrict below level 0")
    F = f.values
    cs = level_side(f.level - 1)
    out = np.empty((cs, cs))
    out[1:-1, 1:-1] = (
        4.0 * F[2:-2:2, 2:-2:2]
        + 2.0 * (F[1:-3:2, 2:-2:2] + F[3:-1:2, 2:-2:2]
                 + F[2:-2:2, 1:-3:2] + F[2:-2:2, 3:-1:2])
        + (F[1:-3:2, 1:-3:2] + F[1:-3:2, 3:-1:2]
           + F[3:-1:2, 1:-3:2] + F[3:-1:2, 3:-1:2])
    ) / 16.0
    out[0, :] = F[0, ::2]
    out[-1, :] = F[-1, ::2]
    out[:, 0] = F[::2, 0]
    out[:, -1] = F[::2, -1]
    return GridImage(out)


def prolongate(f: GridImage) -> GridImage:
    """One level up: copy coincident nodes, average 2 neighbours on new
    edge nodes, average 4 on new cell centers."""
    C = f.values
    fs = 2 * (f.side - 1) + 1
    out = np.empty((fs, fs))
    out[::2, ::2] = C
    out[1::2, ::2] = 0.5 * (C[:-1, :] + C[1:, :])
    out[::2, 1::2] = 0.5 * (C[:, :-1] + C[:, 1:])
    out[1::2, 1::2] = 0.25 * (C[:-1, :-1] + C[:-1, 1:]
                              + C[1:, :-1] + C[1:, 1:])
    return GridImage(out)


def restrict_to(f: GridImage, level: int) -> GridImage:
    if level > f.level:
        raise GridError(f"cannot restrict up from {f.level} to {level}")
    g = f
    while g.level > level:
        g = restrict(g)
    return g
