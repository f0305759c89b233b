"""Swarm optimisers: plain PSO baseline and the surrogate-assisted loop."""

from sbdmwi.optimizer.loop import (
    Estimate,
    RunReport,
    SbdConfig,
    global_best_update,
    minimize_ea,
    minimize_sbd,
    ranking_R,
    run_ea,
    run_sbd,
    sbd_agent_select,
)
from sbdmwi.optimizer.pso import PsoParams, SwarmState, lhs_sample, lhs_unit, pso_step

__all__ = [
    "Estimate",
    "PsoParams",
    "RunReport",
    "SbdConfig",
    "SwarmState",
    "global_best_update",
    "lhs_sample",
    "lhs_unit",
    "minimize_ea",
    "minimize_sbd",
    "pso_step",
    "ranking_R",
    "run_ea",
    "run_sbd",
    "sbd_agent_select",
]
