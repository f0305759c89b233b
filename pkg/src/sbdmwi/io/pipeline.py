"""Library side of the command-line tools: simulate, invert, metrics, export."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sbdmwi.em.forward import add_awgn, forward_solve
from sbdmwi.em.geometry import Grid, ImagingSetup, PermittivityMap
from sbdmwi.errors import FormatError, GeometryError
from sbdmwi.io.config import RunConfig
from sbdmwi.io.formats import export_csv, read_gridmap, read_meas, write_gridmap, write_meas
from sbdmwi.objective import MeasurementSet, build_context, differential_contrast, eta_saving, xi_error, zeta_and_detect
from sbdmwi.optimizer.loop import RunReport, run_ea, run_sbd
from sbdmwi.scenario.phantoms import ideal_phantom, segmented_phantom
from sbdmwi.scenario.tumor import SearchSpace, TumorDescriptor, check_breast_box, contour_centroid, decode_map

logger = logging.getLogger(__name__)

__all__ = [
    "Simulation",
    "build_phantom",
    "compute_metrics",
    "export_map",
    "invert",
    "read_keyvalue",
    "search_space",
    "simulate",
    "write_inversion",
    "write_simulation",
]


@dataclass(frozen=True, eq=False)
class Simulation:
    """Synthetic measurements plus ground truth on the inverse grid."""

    measurements: MeasurementSet
    reference: PermittivityMap
    actual: PermittivityMap
    truth: dict


def build_phantom(cfg: RunConfig, setup: ImagingSetup, grid: Grid) -> PermittivityMap:
    """Reference (tumor-free) breast map of the configured kind."""
    if cfg.phantom == "ideal":
        return ideal_phantom(setup, grid, cfg.breast_radius, cfg.table.adipose)
    return segmented_phantom(setup, grid, cfg.breast_radius, cfg.table, seed=cfg.phantom_seed)


def simulate(cfg: RunConfig, seed: int | None = None) -> Simulation:
    """Differential data from forward solves on the fine grid.

    Noise is added to the total receiver field of the tumorous breast; the
    reference field is simulated noiselessly and subtracted.
    """
    seed = cfg.seed if seed is None else seed
    if not cfg.allow_inverse_crime and cfg.n_forward < 2 * cfg.n_inverse:
        raise GeometryError(
            f"forward grid ({cfg.n_forward}) must be at least twice as fine as the inverse grid ({cfg.n_inverse})"
        )
    setup = cfg.setup
    fine = cfg.forward_grid
    ref_f = build_phantom(cfg, setup, fine)
    truth = cfg.truth
    act_f = ref_f if truth is None else truth.insert(ref_f, setup_background(setup))
    ref_fields = forward_solve(setup, fine, ref_f)
    if act_f == ref_f:
        act_total = ref_fields.total_at_receivers
    else:
        act_total = forward_solve(setup, fine, act_f).total_at_receivers
    noisy = add_awgn(act_total, cfg.snr_db, seed)
    meas = MeasurementSet(noisy - ref_fields.total_at_receivers, setup.frequency, f"synthetic seed={seed} snr_db={cfg.snr_db}")

    coarse = cfg.inverse_grid
    ref_i = build_phantom(cfg, setup, coarse)
    act_i = ref_i if truth is None else truth.insert(ref_i, setup_background(setup))
    info = {"tumor": cfg.tumor}
    if truth is not None:
        info.update(
            tumor_x=truth.center[0], tumor_y=truth.center[1], tumor_radius=truth.radius,
            tumor_eps=truth.eps_psi, tumor_sigma=truth.sigma_psi,
        )
    return Simulation(meas, ref_i, act_i, info)


def setup_background(setup: ImagingSetup) -> tuple[float, float]:
    return (setup.eps_b, setup.sigma_b)


def _g(x) -> str:
    return format(float(x), ".17g") if isinstance(x, (float, np.floating)) else str(x)


def write_keyvalue(path, values: dict) -> None:
    Path(path).write_text("".join(f"{k} = {_g(v)}\n" for k, v in values.items()))


def read_keyvalue(path) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected 'key = value'")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def write_simulation(sim: Simulation, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    f = sim.measurements.frequency
    paths = {
        "meas": out / "meas.txt",
        "reference": out / "reference.gridmap",
        "actual": out / "actual.gridmap",
        "truth": out / "truth.txt",
    }
    write_meas(paths["meas"], sim.measurements)
    write_gridmap(paths["reference"], sim.reference, f)
    write_gridmap(paths["actual"], sim.actual, f)
    write_keyvalue(paths["truth"], sim.truth)
    return paths


def search_space(cfg: RunConfig, reference: PermittivityMap, setup: ImagingSetup) -> SearchSpace:
    """Box bounds with the barycentre confined to the breast's bounding box."""
    support = reference.support(*setup_background(setup))
    if not support.any():
        raise GeometryError("reference map has no breast region")
    c = reference.grid.centers[support]
    box = (c[:, 0].min(), c[:, 0].max(), c[:, 1].min(), c[:, 1].max())
    check_breast_box(box, reference.grid)
    return SearchSpace.default(
        box, n_arcs=cfg.n_arcs, eps_range=cfg.eps_range, sigma_range=cfg.sigma_range, d_range=cfg.d_range
    )


def _check_headers(cfg: RunConfig, meas: MeasurementSet, reference: PermittivityMap, ref_freq: float):
    diffs = []
    if meas.n_views != cfg.n_antennas:
        diffs.append(f"views: measurements {meas.n_views} vs config {cfg.n_antennas}")
    if not np.isclose(meas.frequency, cfg.frequency, rtol=1e-12, atol=0):
        diffs.append(f"frequency: measurements {meas.frequency:g} Hz vs config {cfg.frequency:g} Hz")
    if not np.isclose(ref_freq, cfg.frequency, rtol=1e-12, atol=0):
        diffs.append(f"frequency: reference map {ref_freq:g} Hz vs config {cfg.frequency:g} Hz")
    if reference.grid.n_per_side != cfg.n_inverse:
        diffs.append(f"cells per side: reference map {reference.grid.n_per_side} vs config {cfg.n_inverse}")
    if not np.isclose(reference.grid.side_length, cfg.side_length, rtol=1e-12, atol=0):
        diffs.append(f"side length: reference map {reference.grid.side_length:g} m vs config {cfg.side_length:g} m")
    if diffs:
        raise FormatError("header mismatch:\n  " + "\n  ".join(diffs))


def invert(
    cfg: RunConfig,
    meas: MeasurementSet,
    reference: PermittivityMap,
    *,
    reference_frequency: float | None = None,
    method: str | None = None,
    seed: int | None = None,
) -> tuple[RunReport, PermittivityMap]:
    """Run the configured optimiser and decode the best descriptor."""
    method = method or cfg.method
    _check_headers(cfg, meas, reference, cfg.frequency if reference_frequency is None else reference_frequency)
    setup = cfg.setup
    ctx = build_context(setup, reference, meas)
    space = search_space(cfg, reference, setup)
    opt = cfg.optimizer(seed)
    if method == "sbd":
        report = run_sbd(ctx, space, opt, workers=cfg.workers)
    elif method == "ea":
        report = run_ea(ctx, space, opt, workers=cfg.workers)
    else:
        raise ValueError(f"unknown method {method!r}")
    recon = decode_map(report.best_descriptor, reference, setup_background(setup))
    return report, recon


def write_inversion(report: RunReport, recon: PermittivityMap, frequency: float, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"trace": out / "trace.csv", "summary": out / "summary.txt", "map": out / "reconstructed.gridmap"}
    paths["trace"].write_text(report.trace_csv())
    paths["summary"].write_text(report.summary_text())
    write_gridmap(paths["map"], recon, frequency)
    if report.training is not None:
        paths["training"] = out / "training.csv"
        report.training.to_csv(paths["training"])
    return paths


def compute_metrics(
    setup: ImagingSetup,
    recon: PermittivityMap,
    reference: PermittivityMap,
    actual: PermittivityMap,
    truth: dict,
    chi: float,
    center=None,
    summary: dict | None = None,
) -> dict:
    """Integral errors, localisation and detection (plus budget figures from a summary).

    ``center`` is the reconstructed barycentre; when absent it is read from
    the ``best_descriptor`` entry of ``summary``, which also gives the area
    centroid of the decoded contour (``zeta_centroid``).
    """
    true_mask = (actual.eps_r != reference.eps_r) | (actual.sigma != reference.sigma)
    if not true_mask.any():
        raise GeometryError("truth map has no tumor region")
    tau_true = differential_contrast(actual, reference, setup)
    tau_rec = differential_contrast(recon, reference, setup)
    out = {
        "xi_tot": xi_error(tau_rec, tau_true, "all", true_mask),
        "xi_int": xi_error(tau_rec, tau_true, "internal", true_mask),
        "xi_ext": xi_error(tau_rec, tau_true, "external", true_mask),
    }
    true_center = (float(truth["tumor_x"]), float(truth["tumor_y"]))
    true_radius = float(truth["tumor_radius"])
    if summary is not None and "best_descriptor" in summary:
        desc = TumorDescriptor.from_vector([float(v) for v in summary["best_descriptor"].split()])
        if center is None:
            center = desc.center
        out["zeta_centroid"] = zeta_and_detect(contour_centroid(desc), true_center, true_radius, chi)[0]
    if center is not None:
        zeta, detected = zeta_and_detect(center, true_center, true_radius, chi)
        out.update(zeta=zeta, chi=chi, detected=detected)
    if summary is not None and "full_wave_evaluations" in summary:
        b_i = int(summary["full_wave_evaluations"])
        budget = int(summary["budget_T"])
        out["full_wave_evaluations"] = b_i
        out["budget_T"] = budget
        try:
            out["eta"] = eta_saving(b_i, budget)
        except ValueError:
            out["eta"] = "n/a"
    return out


def export_map(gridmap_path, out_dir) -> tuple[Path, Path]:
    pmap, _ = read_gridmap(gridmap_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(gridmap_path).stem
    eps_path, sig_path = out / f"{stem}_eps.csv", out / f"{stem}_sigma.csv"
    export_csv(pmap, eps_path, sig_path)
    return eps_path, sig_path


def load_inputs(meas_path, reference_path):
    meas = read_meas(meas_path)
    reference, freq = read_gridmap(reference_path)
    return meas, reference, freq
