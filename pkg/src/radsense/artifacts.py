"""File formats for heatmaps, occupancy reports and debug dumps."""
from __future__ import annotations

import json

import numpy as np

from radsense.sensing import Heatmap, OccupancyReport

PGM_MAX = 65535


def heatmap_to_csv(h: Heatmap) -> str:
    xs, ys = h.grid.cell_centers()
    lines = ["x_meters,y_meters,value"]
    for iy, y in enumerate(ys):
        row = h.values[iy]
        lines.extend(f"{x:.17g},{y:.17g},{v:.17g}" for x, v in zip(xs, row))
    return "\n".join(lines) + "\n"


def read_heatmap_csv(text: str) -> np.ndarray:
    """Rows of (x, y, value) in file order."""
    return np.loadtxt(text.splitlines(), delimiter=",", skiprows=1, ndmin=2)


def heatmap_to_pgm(h: Heatmap) -> tuple[bytes, str]:
    """16-bit binary PGM plus its sidecar text.

    Values are scaled linearly so the maximum maps to 65535; the first image
    row is the highest-y grid row.
    """
    peak = float(h.values.max()) if h.values.size else 0.0
    scale = peak / PGM_MAX if peak > 0 else 0.0
    if scale > 0:
        pixels = np.rint(h.values / scale)
    else:
        pixels = np.zeros_like(h.values)
    pixels = np.clip(pixels, 0, PGM_MAX).astype(">u2")[::-1]
    height, width = pixels.shape
    header = f"P5\n{width} {height}\n{PGM_MAX}\n".encode("ascii")
    x0, _, y0, _ = h.grid.extent
    sidecar = (
        f"scale {scale:.17g}\n"
        f"value = pixel * scale\n"
        f"max_value {peak:.17g}\n"
        f"origin {x0:.17g} {y0:.17g}\n"
        f"cell_size {h.grid.cell_size:.17g}\n"
        f"row_order top_row_is_max_y\n"
    )
    return header + pixels.tobytes(), sidecar


def read_pgm(data: bytes) -> np.ndarray:
    """Parse a binary 16-bit PGM as written by :func:`heatmap_to_pgm`."""
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    width, height = (int(v) for v in parts[1].split())
    if int(parts[2]) != PGM_MAX:
        raise ValueError("expected a 16-bit PGM")
    return np.frombuffer(parts[3], dtype=">u2").reshape(height, width)


def report_to_json(report: OccupancyReport, scenario_name: str = "") -> str:
    doc = {"scenario": scenario_name, **report.to_dict()}
    return json.dumps(doc, indent=2) + "\n"
