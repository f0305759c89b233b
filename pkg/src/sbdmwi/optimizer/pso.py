"""Latin hypercube design and inertia-weight PSO kinematics."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import qmc

from sbdmwi.scenario.tumor import SearchSpace, TumorDescriptor

__all__ = ["PsoParams", "SwarmState", "lhs_sample", "lhs_unit", "pso_step"]


def lhs_unit(n: int, dim: int, rng) -> np.ndarray:
    """``n`` Latin hypercube points in ``[0, 1]^dim``."""
    if n < 1:
        raise ValueError("need at least one sample")
    return qmc.LatinHypercube(d=dim, seed=rng).random(n)


def lhs_sample(space: SearchSpace, n: int, seed) -> list[TumorDescriptor]:
    """Latin hypercube design over the search box, as descriptors."""
    unit = lhs_unit(n, space.dim, np.random.default_rng(seed))
    return [space.descriptor(u) for u in unit]


@dataclass(frozen=True)
class PsoParams:
    inertia: float = 0.7298
    c1: float = 1.49618
    c2: float = 1.49618
    vmax: float = 0.5

    def __post_init__(self):
        if self.vmax <= 0:
            raise ValueError("vmax must be positive")


@dataclass(frozen=True, eq=False)
class SwarmState:
    """Positions, velocities and attractors of a swarm in ``[0, 1]^K``."""

    positions: np.ndarray
    velocities: np.ndarray
    pbest: np.ndarray
    gbest: np.ndarray
    iteration: int = 0

    @property
    def size(self) -> int:
        return self.positions.shape[0]


def pso_step(state: SwarmState, params: PsoParams, rng: np.random.Generator) -> SwarmState:
    """One velocity and position update.

    Velocities are clipped to ``+-vmax`` per dimension; positions leaving the
    unit box are clamped and the offending velocity component is zeroed.
    """
    x = state.positions
    shape = x.shape
    r1 = rng.random(shape)
    r2 = rng.random(shape)
    v = (
        params.inertia * state.velocities
        + params.c1 * r1 * (state.pbest - x)
        + params.c2 * r2 * (state.gbest[None, :] - x)
    )
    v = np.clip(v, -params.vmax, params.vmax)
    new = x + v
    hit = (new < 0.0) | (new > 1.0)
    new = np.clip(new, 0.0, 1.0)
    v[hit] = 0.0
    return replace(state, positions=new, velocities=v, iteration=state.iteration + 1)
