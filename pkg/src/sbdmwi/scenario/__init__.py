"""Phantoms, tumor parametrization and decoding."""

from sbdmwi.scenario.phantoms import (
    NOMINAL_TUMOR,
    TISSUE_TABLES,
    EllipseTumor,
    TissueTable,
    ideal_phantom,
    perturb_tumor,
    segmented_phantom,
)
from sbdmwi.scenario.tumor import (
    SearchSpace,
    TumorDescriptor,
    contour_points,
    decode_map,
    rasterize_tumor,
)

__all__ = [
    "NOMINAL_TUMOR",
    "TISSUE_TABLES",
    "EllipseTumor",
    "SearchSpace",
    "TissueTable",
    "TumorDescriptor",
    "contour_points",
    "decode_map",
    "ideal_phantom",
    "perturb_tumor",
    "rasterize_tumor",
    "segmented_phantom",
]
