"""Synthetic frame series with ground truth, and the series pipeline.

Frame series semantics: ``phi[i,j]`` maps frame j back onto frame i,
``f_j(phi[i,j](x)) ~= f_i(x)``. The generator inverts that relation
analytically, so frames carry no resampling error: frame i samples the
base pattern at ``phi[0,i]^-1`` of the node coordinates, plus white
noise. Per-frame drifts are calibrated to the sub-pixel motions seen
between consecutive micrographs (rotations around 4e-4 rad, translations
around 1e-3 of the domain).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ..ops import Operator
from .deform import (RigidDeformation, compose, deformation_distance)
from .flow import GradientFlowConfig, MultilevelConfig, register_pair, refine
from .grid import GridImage, node_coords


@dataclass(frozen=True)
class DriftSpec:
    level: int = 8
    alpha_std: float = 4e-4
    t_std: float = 1.5e-3
    snr: float = 10.0           # pattern std over noise std; inf disables noise

    def __post_init__(self):
        if self.level < 2:
            raise ValueError("need level >= 2")
        if self.snr <= 0:
            raise ValueError("snr must be positive")
        if self.alpha_std < 0 or self.t_std < 0:
            raise ValueError("drift magnitudes must be non-negative")


@dataclass
class SeriesGroundTruth:
    drifts: list[RigidDeformation]          # true phi[i, i+1], length n-1
    cumulative: list[RigidDeformation]      # true phi[0, i], length n
    noise_std: float
    seed: int


def base_pattern(level: int) -> GridImage:
    """Lattice-like mixture of incommensurate waves; structured at every
    frequency the multilevel scheme sees, with no rotational symmetry."""
    return GridImage.from_function(_pattern_at, level)


def generate_series(n: int, spec: DriftSpec = DriftSpec(), seed: int = 0):
    """n noisy frames drifting away from frame 0; deterministic per seed.

    Returns (frames, SeriesGroundTruth). The cumulative ground truth
    composes the per-frame drifts: phi[0,i] = drift[i-1] o ... o drift[0].
    """
    if n < 2:
        raise ValueError("a series needs at least two frames")
    rng = np.random.default_rng(seed)
    pattern = base_pattern(spec.level)
    noise_std = float(np.std(pattern.values)) / spec.snr \
        if math.isfinite(spec.snr) else 0.0

    drifts = [RigidDeformation(float(rng.normal(0.0, spec.alpha_std)),
                               float(rng.normal(0.0, spec.t_std)),
                               float(rng.normal(0.0, spec.t_std)))
              for _ in range(n - 1)]
    cumulative = [RigidDeformation.identity()]
    for d in drifts:
        cumulative.append(compose(d, cumulative[-1]))

    x0, x1 = node_coords(spec.level)
    frames = []
    for i in range(n):
        inv = cumulative[i].inverse()
        y0, y1 = inv.apply(x0, x1)
        vals = _pattern_at(y0, y1)
        if noise_std > 0:
            vals = vals + rng.normal(0.0, noise_std, size=vals.shape)
        frames.append(GridImage(vals))
    return frames, SeriesGroundTruth(drifts, cumulative, noise_std, seed)


def _pattern_at(x0, x1):
    return (0.55
            + 0.25 * np.sin(2 * np.pi * 6 * x0) * np.sin(2 * np.pi * 6 * x1)
            + 0.12 * np.sin(2 * np.pi * 11 * (x0 + 0.3 * x1) + 0.7)
            + 0.08 * np.cos(2 * np.pi * 17 * (x1 - 0.2 * x0) + 1.3))


def preprocess_series(frames, ml: MultilevelConfig = MultilevelConfig(),
                      gf: GradientFlowConfig = GradientFlowConfig(),
                      parallel: bool = False,
                      timings: list | None = None):
    """Neighbour deformations phi[i, i+1] for every consecutive pair.

    Pure per pair, so the parallel path (a thread pool) returns exactly
    the sequential result. Pass ``timings`` to record per-pair wall
    times, usable to calibrate a Trace cost model.
    """
    if len(frames) < 2:
        raise ValueError("a series needs at least two frames")

    def one(i):
        start = time.perf_counter()
        phi = register_pair(frames[i], frames[i + 1], None, ml, gf)
        return phi, time.perf_counter() - start

    if parallel:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(one, range(len(frames) - 1)))
    else:
        results = [one(i) for i in range(len(frames) - 1)]
    if timings is not None:
        timings.extend(t for _, t in results)
    return [phi for phi, _ in results]


@dataclass(frozen=True)
class Link:
    """Scan element: a deformation together with the frame span it maps.

    ``Link(i, j, phi)`` aligns frame j onto frame i. The span indices of
    the identity element are None so it composes with anything.
    """
    lo: int | None
    hi: int | None
    phi: RigidDeformation

    @property
    def is_identity(self) -> bool:
        return self.lo is None


IDENTITY_LINK = Link(None, None, RigidDeformation.identity())


def neighbour_links(phis) -> list[Link]:
    return [Link(i, i + 1, phi) for i, phi in enumerate(phis)]


class SpanMismatchError(ValueError):
    pass


class SeriesRegistrar:
    """Frame store plus configs; hands out the scan operator.

    The operator captures this object, so the multilevel machinery and
    frames are built once and reused across applications; instances are
    read-only after construction and safe to share across workers.
    """

    def __init__(self, frames, ml: MultilevelConfig = MultilevelConfig(),
                 gf: GradientFlowConfig = GradientFlowConfig()):
        self.frames = list(frames)
        self.ml = ml
        self.gf = gf

    def frame(self, i: int) -> GridImage:
        return self.frames[i]

    @property
    def fine_spacing(self) -> float:
        return self.frames[0].h

    def combine(self, a: Link, b: Link) -> Link:
        if a.is_identity:
            return b
        if b.is_identity:
            return a
        if a.hi != b.lo:
            raise SpanMismatchError(f"cannot join span ({a.lo},{a.hi}) "
                                    f"with ({b.lo},{b.hi})")
        phi = refine(a.phi, b.phi, self.frames[a.lo], self.frames[b.hi],
                     self.ml, self.gf)
        return Link(a.lo, b.hi, phi)

    def operator(self) -> Operator[Link]:
        def approx(a: Link, b: Link, tol: float) -> bool:
            if a.is_identity or b.is_identity:
                return a.is_identity == b.is_identity
            if (a.lo, a.hi) != (b.lo, b.hi):
                return False
            return deformation_distance(a.phi, b.phi) < \
                (tol if tol > 0 else self.fine_spacing)
        return Operator(IDENTITY_LINK, self.combine, approx,
                        name="registration-refine")


def mean_aligned(frames, cumulative) -> GridImage:
    """Average of the frames after aligning each onto frame 0."""
    from .metrics import apply_deformation
    if len(frames) != len(cumulative):
        raise ValueError("need one deformation per frame")
    acc = np.zeros_like(frames[0].values)
    for f, phi in zip(frames, cumulative):
        acc += apply_deformation(f, phi).values
    return GridImage(acc / len(frames))
