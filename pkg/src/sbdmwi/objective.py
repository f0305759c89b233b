"""Candidate evaluation: differential currents, data mismatch and metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from sbdmwi.em.forward import differential_field_data, incident_fields
from sbdmwi.em.geometry import Grid, ImagingSetup, PermittivityMap
from sbdmwi.em.green import GreenOperators, factor_system
from sbdmwi.errors import GeometryError, IllConditionedError, InvalidCandidate, MeasurementError
from sbdmwi.scenario.tumor import TumorDescriptor, decode_map

__all__ = [
    "INVALID_COST",
    "EvalContext",
    "MeasurementSet",
    "build_context",
    "cost",
    "differential_contrast",
    "differential_currents",
    "eta_saving",
    "predicted_data",
    "xi_error",
    "zeta_and_detect",
]

# Cost assigned to candidates that cannot be decoded or solved: ten times the
# cost of an empty reconstruction.
INVALID_COST = 10.0


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Measured differential data, one row of ``M`` receivers per view."""

    data: np.ndarray = field(repr=False)
    frequency: float
    provenance: str = ""

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[1] != data.shape[0] - 1:
            raise MeasurementError(f"expected (V, V-1) data, got shape {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_views(self) -> int:
        return self.data.shape[0]

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.data) ** 2))


@dataclass(frozen=True, eq=False)
class EvalContext:
    """Everything precomputed for repeated cost evaluations.

    Built once per inversion and read-only afterwards, so evaluations of
    different candidates may run in parallel threads.
    """

    setup: ImagingSetup
    grid: Grid
    reference: PermittivityMap
    tau_n: np.ndarray = field(repr=False)
    operators: GreenOperators = field(repr=False)
    measurements: MeasurementSet | None = field(repr=False)
    e_inc: np.ndarray = field(repr=False)

    @property
    def background(self) -> tuple[float, float]:
        return (self.setup.eps_b, self.setup.sigma_b)

    def with_measurements(self, meas: MeasurementSet) -> EvalContext:
        _check_measurements(self.setup, meas)
        return EvalContext(self.setup, self.grid, self.reference, self.tau_n, self.operators, meas, self.e_inc)


def _check_measurements(setup: ImagingSetup, meas: MeasurementSet):
    if meas.n_views != setup.n_antennas:
        raise MeasurementError(f"measurements have {meas.n_views} views, setup has {setup.n_antennas}")
    if not np.isclose(meas.frequency, setup.frequency, rtol=1e-12):
        raise MeasurementError("measurement frequency differs from the setup")


def build_context(
    setup: ImagingSetup,
    reference: PermittivityMap,
    measurements: MeasurementSet | None = None,
    operators: GreenOperators | None = None,
) -> EvalContext:
    """Precompute the reference Green's operators and incident fields."""
    grid = reference.grid
    setup.check_grid(grid)
    tau_n = reference.contrast(setup)
    if operators is None:
        operators = GreenOperators.build(setup, grid, tau_n)
    elif operators.grid != grid or not np.array_equal(operators.reference_contrast, tau_n):
        raise GeometryError("operators were built for a different reference scenario")
    if measurements is not None:
        _check_measurements(setup, measurements)
    e_inc = incident_fields(setup, grid)
    e_inc.setflags(write=False)
    return EvalContext(setup, grid, reference, tau_n, operators, measurements, e_inc)


def _candidate_contrast(ctx: EvalContext, desc: TumorDescriptor):
    trial = decode_map(desc, ctx.reference, ctx.background)
    tau = trial.contrast(ctx.setup)
    return tau, tau - ctx.tau_n


def differential_currents(ctx: EvalContext, desc: TumorDescriptor) -> np.ndarray:
    """Differential equivalent currents ``T_delta [I - G_B T]^-1 E_inc`` per view.

    Raises
    ------
    InvalidCandidate
        For undecodable descriptors or an ill-conditioned state equation.
    """
    tau, tau_delta = _candidate_contrast(ctx, desc)
    out = np.zeros_like(ctx.e_inc)
    support = np.flatnonzero(tau_delta)
    if support.size == 0:
        return out
    try:
        lu_piv, _ = factor_system(ctx.operators.g_b_internal, tau)
    except IllConditionedError as exc:
        raise InvalidCandidate(str(exc)) from exc
    total = linalg.lu_solve(lu_piv, ctx.e_inc.T, check_finite=False).T
    out[:, support] = tau_delta[support] * total[:, support]
    return out


def predicted_data(ctx: EvalContext, desc: TumorDescriptor) -> np.ndarray:
    """Differential field at the receivers produced by a candidate tumor."""
    return differential_field_data(ctx.operators, differential_currents(ctx, desc))


def cost(ctx: EvalContext, desc: TumorDescriptor, *, penalize: bool = True) -> float:
    """Normalised differential-data mismatch.

    Invalid candidates cost :data:`INVALID_COST` unless ``penalize`` is
    false, in which case :class:`InvalidCandidate` propagates.
    """
    meas = ctx.measurements
    if meas is None:
        raise MeasurementError("context has no measurements")
    denom = meas.energy
    if not denom > 0.0:
        raise MeasurementError("measured differential data are identically zero")
    try:
        data = predicted_data(ctx, desc)
    except InvalidCandidate:
        if penalize:
            return INVALID_COST
        raise
    return float(np.sum(np.abs(data - meas.data) ** 2) / denom)


def differential_contrast(pmap: PermittivityMap, reference: PermittivityMap, setup: ImagingSetup) -> np.ndarray:
    """``tau - tau_N`` between a map and its reference."""
    if pmap.grid != reference.grid:
        raise GeometryError("maps live on different grids")
    return pmap.contrast(setup) - reference.contrast(setup)


def xi_error(tau_delta, tau_delta_true, region: str, true_mask) -> float:
    """Mean normalised contrast error over ``region``.

    ``region`` is ``"all"`` (whole grid), ``"internal"`` (true tumor cells)
    or ``"external"`` (all the other cells).
    """
    tau_delta = np.asarray(tau_delta)
    tau_delta_true = np.asarray(tau_delta_true)
    true_mask = np.asarray(true_mask, dtype=bool)
    if tau_delta.shape != tau_delta_true.shape or true_mask.shape != tau_delta.shape:
        raise GeometryError("contrast vectors and mask must share a grid")
    if region == "all":
        sel = np.ones_like(true_mask)
    elif region == "internal":
        sel = true_mask
    elif region == "external":
        sel = ~true_mask
    else:
        raise ValueError(f"unknown region {region!r}")
    if not sel.any():
        raise ValueError(f"region {region!r} is empty")
    err = np.abs(tau_delta[sel] - tau_delta_true[sel]) / np.abs(tau_delta_true[sel] + 1.0)
    return float(np.mean(err))


def zeta_and_detect(center, true_center, true_radius: float, chi: float) -> tuple[float, bool]:
    """Barycentre distance and the detection verdict ``zeta <= radius + chi``."""
    if chi < 0:
        raise ValueError("chi must be non-negative")
    zeta = float(np.hypot(center[0] - true_center[0], center[1] - true_center[1]))
    return zeta, zeta <= true_radius + chi


def eta_saving(full_wave_count: int, budget: int) -> float:
    """Fraction of full-wave evaluations saved against a budget ``P * I``."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    if not 0 < full_wave_count <= budget:
        raise ValueError("full-wave count must lie in (0, budget]")
    return 1.0 - full_wave_count / budget
