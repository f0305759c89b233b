"""Surrogate-assisted swarm loop and the plain swarm baseline.

Both loops work on a black-box ``fun(unit_point) -> cost`` defined on
``[0, 1]^K``; :func:`run_sbd` and :func:`run_ea` wrap them around an
evaluation context and a search space.
"""

from __future__ import annotations

import io
import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from sbdmwi.objective import EvalContext, cost, eta_saving
from sbdmwi.optimizer.pso import PsoParams, SwarmState, lhs_unit, pso_step
from sbdmwi.scenario.tumor import SearchSpace, TumorDescriptor
from sbdmwi.surrogate import TrainingSet, fit

logger = logging.getLogger(__name__)

__all__ = [
    "Estimate",
    "RunReport",
    "SbdConfig",
    "global_best_update",
    "minimize_ea",
    "minimize_sbd",
    "ranking_R",
    "run_ea",
    "run_sbd",
    "sbd_agent_select",
]


@dataclass(frozen=True)
class SbdConfig:
    """Swarm size ``P``, iterations ``I``, initial design size ``B0`` and PSO knobs."""

    P: int = 16
    I: int = 200
    B0: int = 40
    seed: int = 0
    inertia: float = 0.7298
    c1: float = 1.49618
    c2: float = 1.49618
    vmax: float = 0.5
    swarm_pick: str = "random"
    fit_starts: int = 20
    fit_budget: int = 2000

    def __post_init__(self):
        if self.P < 1 or self.I < 0 or self.B0 < 2:
            raise ValueError("need P >= 1, I >= 0 and B0 >= 2")
        if self.P > self.B0:
            raise ValueError("swarm size cannot exceed the initial design")
        if self.swarm_pick not in ("random", "best"):
            raise ValueError("swarm_pick must be 'random' or 'best'")

    @property
    def pso(self) -> PsoParams:
        return PsoParams(self.inertia, self.c1, self.c2, self.vmax)


class Estimate(NamedTuple):
    """Cost estimate of one point: exact members carry ``sigma = 0``."""

    value: float
    sigma: float
    exact: bool


def sbd_agent_select(phi_hat, sigma) -> int:
    """Index minimising the lower confidence value ``phi_hat - sigma``."""
    return int(np.argmin(np.asarray(phi_hat) - np.asarray(sigma)))


def ranking_R(a: Estimate, b: Estimate) -> int:
    """Pick the more promising of two points (0 for ``a``, 1 for ``b``).

    Two points of the same kind compare by ``value - sigma`` with ties going
    to ``a``. In the mixed case the predicted point wins only if its
    pessimistic value ``value + sigma`` beats the exact cost of the other.
    """
    if a.exact == b.exact:
        return 0 if a.value - a.sigma <= b.value - b.sigma else 1
    if a.exact:
        return 1 if b.value + b.sigma < a.value else 0
    return 0 if a.value + a.sigma < b.value else 1


def global_best_update(candidates: list[Estimate], previous_exact: bool) -> int:
    """Index into ``candidates`` (previous best first) minimising ``value + w*sigma``.

    ``w`` is +1 when the previous global best was evaluated full-wave and -1
    otherwise.
    """
    w = 1.0 if previous_exact else -1.0
    scores = [c.value + w * c.sigma for c in candidates]
    return int(np.argmin(scores))


@dataclass
class RunReport:
    """Outcome of one optimisation run.

    ``trace`` rows are ``(iteration, global-best cost, exact flag, B_i)``;
    the cost is a prediction when the flag is 0.
    """

    method: str
    config: SbdConfig
    best_unit: np.ndarray
    best_cost: float
    full_wave: int
    extra_evaluations: int
    trace: list[tuple[int, float, bool, int]]
    wall_time: float
    best_descriptor: TumorDescriptor | None = None
    notes: list[str] = field(default_factory=list)
    training: TrainingSet | None = field(default=None, repr=False)

    @property
    def budget(self) -> int:
        """Full-wave budget ``T = P * I`` of the plain swarm."""
        return self.config.P * self.config.I

    @property
    def eta(self) -> float | None:
        try:
            return eta_saving(self.full_wave, self.budget)
        except ValueError:
            return None

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "best_cost", "exact", "full_wave"])
        for it, val, exact, b in self.trace:
            w.writerow([it, repr(float(val)), int(exact), b])
        return buf.getvalue()

    def summary_text(self) -> str:
        eta = self.eta
        lines = [
            f"method = {self.method}",
            f"best_cost = {self.best_cost!r}",
            f"best_unit = {' '.join(repr(float(v)) for v in self.best_unit)}",
        ]
        if self.best_descriptor is not None:
            lines.append(f"best_descriptor = {' '.join(repr(float(v)) for v in self.best_descriptor.to_vector())}")
        lines += [
            f"full_wave_evaluations = {self.full_wave}",
            f"extra_evaluations = {self.extra_evaluations}",
            f"budget_T = {self.budget}",
            f"eta = {'n/a' if eta is None else repr(eta)}",
            f"wall_time_s = {self.wall_time:.3f}",
        ]
        lines += [f"{k} = {v}" for k, v in asdict(self.config).items()]
        lines += [f"note = {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def _evaluate_many(fun, points: np.ndarray, workers: int) -> np.ndarray:
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(fun, points)), dtype=float)
    return np.array([fun(p) for p in points], dtype=float)


def _init_swarm(dim: int, cfg: SbdConfig):
    """Shared initialisation of both loops (design, swarm pick, velocities)."""
    ss_init, ss_pso = np.random.SeedSequence(cfg.seed).spawn(2)
    rng = np.random.default_rng(ss_init)
    design = lhs_unit(cfg.B0, dim, rng)
    pick = rng.choice(cfg.B0, size=cfg.P, replace=False)
    vel = rng.uniform(-0.1, 0.1, size=(cfg.P, dim))
    return design, pick, vel, np.random.default_rng(ss_pso)


def default_model_factory(cfg: SbdConfig):
    def factory(ts: TrainingSet, previous):
        return fit(ts, n_starts=cfg.fit_starts, budget=cfg.fit_budget, seed=[cfg.seed, len(ts)], warm_start=previous)

    return factory


def minimize_sbd(
    fun: Callable[[np.ndarray], float],
    dim: int,
    cfg: SbdConfig,
    *,
    model_factory=None,
    workers: int = 1,
) -> RunReport:
    """Surrogate-assisted swarm minimisation of ``fun`` over ``[0, 1]^dim``.

    ``model_factory(training_set, previous_model)`` must return an object
    with a batch ``predict(points) -> (values, sigmas)``.
    """
    t0 = time.perf_counter()
    factory = model_factory or default_model_factory(cfg)
    design, pick, vel, rng = _init_swarm(dim, cfg)

    ts = TrainingSet(dim, capacity=cfg.B0 + cfg.I)
    for x, y in zip(design, _evaluate_many(fun, design, workers)):
        ts.add(x, y)
    model = factory(ts, None)
    if cfg.swarm_pick == "best":
        pick = np.argsort(ts.y, kind="stable")[: cfg.P]
    x0 = design[pick].copy()
    best0 = int(np.argmin(ts.y))
    state = SwarmState(x0, vel, x0.copy(), ts.x[best0].copy(), iteration=1)
    trace = [(0, float(ts.y[best0]), True, len(ts))]

    def estimates(points: np.ndarray) -> list[Estimate]:
        values, sigmas = model.predict(points)
        out = []
        for p, v, s in zip(points, values, sigmas):
            k = ts.index_of(p)
            out.append(Estimate(float(ts.y[k]), 0.0, True) if k is not None else Estimate(float(v), float(s), False))
        return out

    for i in range(1, cfg.I + 1):
        prev_exact = state.gbest in ts
        # (a)-(b): most promising agent by lower confidence bound
        est = estimates(state.positions)
        star = sbd_agent_select([e.value for e in est], [e.sigma for e in est])
        # (c): full-wave evaluation only when it could beat the incumbent
        if not est[star].exact and est[star].value - est[star].sigma <= ts.min_cost:
            point = state.positions[star]
            ts.add(point, fun(point))
            model = factory(ts, model)
            est = estimates(state.positions)
        # (d): personal bests
        pb_est = estimates(state.pbest)
        pbest = state.pbest.copy()
        for p in range(state.size):
            if ranking_R(pb_est[p], est[p]) == 1:
                pbest[p] = state.positions[p]
                pb_est[p] = est[p]
        # (e): global best over the previous one and all personal bests
        pool = np.vstack([state.gbest[None, :], pbest])
        cand = estimates(state.gbest[None, :]) + pb_est
        g = global_best_update(cand, prev_exact)
        gbest = pool[g].copy()
        trace.append((i, cand[g].value, cand[g].exact, len(ts)))
        # (f): move the swarm
        state = pso_step(SwarmState(state.positions, state.velocities, pbest, gbest, i), cfg.pso, rng)

    # output: the final global best, re-evaluated full-wave if it was only
    # predicted, competing with the best sample actually evaluated
    notes = []
    extra = 0
    best_unit = state.gbest.copy()
    k = ts.index_of(best_unit)
    if k is not None:
        best_cost = float(ts.y[k])
    else:
        best_cost = float(fun(best_unit))
        extra = 1
        notes.append("final global best was a surrogate prediction; re-evaluated full-wave")
    k = int(np.argmin(ts.y))
    if ts.y[k] < best_cost:
        best_unit, best_cost = ts.x[k].copy(), float(ts.y[k])
        notes.append("best training sample beats the final global best and is returned instead")
    logger.info("sbd done: B_I=%d best=%.6g", len(ts), best_cost)
    return RunReport(
        "sbd", cfg, best_unit, best_cost, len(ts), extra, trace, time.perf_counter() - t0, notes=notes,
        training=ts,
    )


def minimize_ea(fun: Callable[[np.ndarray], float], dim: int, cfg: SbdConfig, *, workers: int = 1) -> RunReport:
    """Plain swarm baseline: every agent evaluated full-wave every iteration.

    The initial swarm is drawn exactly as in :func:`minimize_sbd` (the design
    itself is not evaluated), so ``trace[0]`` carries no cost.
    """
    t0 = time.perf_counter()
    design, pick, vel, rng = _init_swarm(dim, cfg)
    x0 = design[pick].copy()
    state = SwarmState(x0, vel, x0.copy(), x0[0].copy(), iteration=1)
    pbest_val = np.full(cfg.P, np.inf)
    gbest_val = np.inf
    count = 0
    trace = [(0, np.nan, False, 0)]
    for i in range(1, cfg.I + 1):
        vals = _evaluate_many(fun, state.positions, workers)
        count += cfg.P
        better = vals < pbest_val
        pbest = np.where(better[:, None], state.positions, state.pbest)
        pbest_val = np.where(better, vals, pbest_val)
        pool_val = np.concatenate([[gbest_val], pbest_val])
        g = int(np.argmin(pool_val))
        gbest = state.gbest.copy() if g == 0 else pbest[g - 1].copy()
        gbest_val = float(pool_val[g])
        trace.append((i, gbest_val, True, count))
        state = pso_step(SwarmState(state.positions, state.velocities, pbest, gbest, i), cfg.pso, rng)
    return RunReport("ea", cfg, state.gbest.copy(), gbest_val, count, 0, trace, time.perf_counter() - t0)


def _context_objective(ctx: EvalContext, space: SearchSpace):
    if ctx.measurements is None:
        raise ValueError("context has no measurements")

    def fun(unit):
        return cost(ctx, space.descriptor(unit))

    return fun


def run_sbd(ctx: EvalContext, space: SearchSpace, cfg: SbdConfig, *, model_factory=None, workers: int = 1) -> RunReport:
    """Surrogate-assisted inversion of the measurements held by ``ctx``."""
    rep = minimize_sbd(_context_objective(ctx, space), space.dim, cfg, model_factory=model_factory, workers=workers)
    rep.best_descriptor = space.descriptor(rep.best_unit)
    return rep


def run_ea(ctx: EvalContext, space: SearchSpace, cfg: SbdConfig, *, workers: int = 1) -> RunReport:
    """Plain swarm inversion with ``P * I`` full-wave evaluations."""
    rep = minimize_ea(_context_objective(ctx, space), space.dim, cfg, workers=workers)
    rep.best_descriptor = space.descriptor(rep.best_unit)
    return rep
