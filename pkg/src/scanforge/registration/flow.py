"""Gradient flow with Armijo widening and the multilevel driver.

The flow is plain descent on the three rigid parameters (no smoother is
involved in the rigid case), discretized by forward Euler with a step
size chosen per iteration. A step tau is admissible when

    (Phi(tau) - Phi(0)) / (tau * Phi'(0)) > sigma      and  tau <= tau_max

i.e. the realized energy decay is at least sigma times the first-order
prediction. Widening doubles an admissible step while both conditions
hold and halves an inadmissible one down to a floor of 1e-12 * tau_max;
the search starts from the previously accepted step (tau_max/8 on the
first iteration) so the step size tracks the landscape across
iterations.

None of the stopping parameters below come from a published source;
they are engineering defaults and every one can be overridden.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .deform import RigidDeformation, compose
from .grid import GridImage, restrict_to
from .metrics import energy, energy_gradient


@dataclass(frozen=True)
class GradientFlowConfig:
    epsilon: float = 1e-7        # stop when the energy decrease falls below
    iter_max: int = 200          # per-level iteration cap
    tau_max: float = 1.0
    sigma: float = 0.5
    lam: float = 0.1             # Dirichlet penalty weight

    def __post_init__(self):
        if not (0.0 < self.sigma < 1.0):
            raise ValueError("need 0 < sigma < 1")
        if self.epsilon <= 0 or self.tau_max <= 0:
            raise ValueError("epsilon and tau_max must be positive")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if self.iter_max < 1:
            raise ValueError("iter_max must be at least 1")


@dataclass(frozen=True)
class MultilevelConfig:
    coarsest: int = 6
    finest: int = 8

    def __post_init__(self):
        if not (0 <= self.coarsest < self.finest):
            raise ValueError("need 0 <= coarsest < finest")


def _step(phi: RigidDeformation, direction, tau: float) -> RigidDeformation:
    return RigidDeformation.from_parameters(phi.parameters()
                                            + tau * direction)


def _armijo(energy_fn, phi, direction, slope0, config,
            tau_start=None):
    """Widening line search; returns (tau, new_energy) or None."""
    if slope0 >= 0.0:
        return None
    e0 = energy_fn(phi)
    tau_min = 1e-12 * config.tau_max
    tau = min(tau_start if tau_start else config.tau_max / 8.0,
              config.tau_max)

    def admissible(t):
        e = energy_fn(_step(phi, direction, t))
        return (e - e0) / (t * slope0) > config.sigma, e

    ok, e = admissible(tau)
    if ok:
        while tau * 2.0 <= config.tau_max:
            ok2, e2 = admissible(tau * 2.0)
            if not ok2:
                break
            tau, e = tau * 2.0, e2
        return tau, e
    while tau > tau_min:
        tau /= 2.0
        ok, e = admissible(tau)
        if ok:
            return tau, e
    return None


def armijo_step(energy_fn, phi: RigidDeformation, direction, slope0: float,
                config: GradientFlowConfig,
                tau_start: float | None = None) -> float | None:
    """Step size satisfying both admissibility conditions, or None when
    the direction is not a descent direction / no admissible step exists."""
    found = _armijo(energy_fn, phi, direction, slope0, config, tau_start)
    return None if found is None else found[0]


def gradient_flow(r: GridImage, t: GridImage,
                  phi0: RigidDeformation | None = None,
                  config: GradientFlowConfig = GradientFlowConfig(),
                  trace: list | None = None) -> RigidDeformation:
    """Minimize the registration energy from phi0; returns the last
    accepted deformation.

    Accepted iterates have non-increasing energy by construction. The
    flow stops on the epsilon criterion, the iteration cap, or when no
    admissible step remains (which is a normal termination).
    """
    if r.level != t.level:
        raise ValueError(f"level mismatch: {r.level} vs {t.level}")
    phi = phi0 if phi0 is not None else RigidDeformation.identity()

    def efn(p):
        return energy(r, t, p, config.lam)

    e = efn(phi)
    if trace is not None:
        trace.append((phi, e))
    tau_prev = None
    for _ in range(config.iter_max):
        grad = energy_gradient(r, t, phi, config.lam)
        direction = -grad
        slope0 = float(np.dot(grad, direction))
        found = _armijo(efn, phi, direction, slope0, config, tau_prev)
        if found is None:
            break
        tau, e_new = found
        phi = _step(phi, direction, tau)
        tau_prev = tau
        decrease = e - e_new
        e = e_new
        if trace is not None:
            trace.append((phi, e))
        if decrease < config.epsilon:
            break
    return phi


def register_pair(f_ref: GridImage, f_tmpl: GridImage,
                  phi0: RigidDeformation | None = None,
                  ml: MultilevelConfig = MultilevelConfig(),
                  gf: GradientFlowConfig = GradientFlowConfig()
                  ) -> RigidDeformation:
    """Estimate phi with f_tmpl o phi ~= f_ref by coarse-to-fine flow.

    Both images are restricted down to the coarsest level, then the flow
    runs level by level, carrying the rigid parameters across levels
    unchanged (they are grid independent). The default initial guess is
    the identity, adequate when consecutive frames barely move.
    """
    if f_ref.level != f_tmpl.level:
        raise ValueError("images must share the finest level")
    if ml.finest != f_ref.level:
        raise ValueError(f"images are level {f_ref.level}, config wants "
                         f"finest {ml.finest}")
    phi = phi0 if phi0 is not None else RigidDeformation.identity()
    pyramid = []
    r_lvl, t_lvl = f_ref, f_tmpl
    for level in range(ml.finest, ml.coarsest - 1, -1):
        pyramid.append((r_lvl, t_lvl))
        if level > ml.coarsest:
            r_lvl, t_lvl = restrict_to(r_lvl, level - 1), restrict_to(t_lvl, level - 1)
    for r_lvl, t_lvl in reversed(pyramid):
        phi = gradient_flow(r_lvl, t_lvl, phi, gf)
    return phi


def refine(phi_ij: RigidDeformation, phi_jk: RigidDeformation,
           f_i: GridImage, f_k: GridImage,
           ml: MultilevelConfig = MultilevelConfig(),
           gf: GradientFlowConfig = GradientFlowConfig()
           ) -> RigidDeformation:
    """Registration of non-adjacent frames, seeded by the composition of
    two deformations that share the middle frame. This is the scan
    operator of the series pipeline; re-parenthesizing its evaluations
    changes results only below pixel scale."""
    return register_pair(f_i, f_k, compose(phi_jk, phi_ij), ml, gf)
