"""File formats, configuration and the command-line pipeline."""

from sbdmwi.io.config import RunConfig, load_config, parse_frequency, parse_length
from sbdmwi.io.formats import (
    export_csv,
    format_gridmap,
    format_meas,
    parse_gridmap,
    parse_meas,
    read_csv_matrix,
    read_gridmap,
    read_meas,
    write_gridmap,
    write_meas,
)

__all__ = [
    "RunConfig",
    "export_csv",
    "format_gridmap",
    "format_meas",
    "load_config",
    "parse_frequency",
    "parse_gridmap",
    "parse_length",
    "parse_meas",
    "read_csv_matrix",
    "read_gridmap",
    "read_meas",
    "write_gridmap",
    "write_meas",
]
