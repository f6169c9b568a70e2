"""Background subtraction, bistatic ellipse mapping, fusion and lot scoring."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from radsense import _kernels
from radsense.channel import SampledCir
from radsense.constants import SPEED_OF_LIGHT
from radsense.scene import Grid, Node, ParkingLot

PER_LINK = "per-link-normalized"
FUSED = "fused"

# Gaussian terms beyond this many sigmas are dropped (exp(-50) ~ 2e-22).
KERNEL_CUTOFF_SIGMAS = 10.0
DEFAULT_MARGIN = 3.0


class SensingError(ValueError):
    pass


@dataclass(frozen=True)
class DifferentialCir:
    sample_rate: float
    start_time: float
    values: np.ndarray
    tx_id: str = ""
    rx_id: str = ""

    @property
    def ranges(self) -> np.ndarray:
        """Range sum ``c * t_n`` for every sample."""
        t = self.start_time + np.arange(len(self.values)) / self.sample_rate
        return SPEED_OF_LIGHT * t


@dataclass(frozen=True)
class Heatmap:
    grid: Grid
    values: np.ndarray  # shape grid.shape, indexed [iy, ix]
    kind: str = PER_LINK
    link: tuple[str, str] = ("", "")


@dataclass(frozen=True)
class LotDecision:
    id: str
    score: float
    occupied: bool


@dataclass(frozen=True)
class OccupancyReport:
    lots: tuple[LotDecision, ...]
    threshold: float
    scenario_id: str = ""
    grid: Grid | None = None

    def to_dict(self) -> dict:
        out = {
            "scenario_id": self.scenario_id,
            "threshold": self.threshold,
            "lots": [{"id": d.id, "score": d.score, "occupied": d.occupied} for d in self.lots],
        }
        if self.grid is not None:
            g = self.grid
            out["grid"] = {"origin": list(g.origin), "cell_size": g.cell_size,
                           "width": g.width, "height": g.height, "z": g.z}
        return out


def subtract(observed: SampledCir, reference: SampledCir) -> DifferentialCir:
    """Observed minus reference CIR, sample by sample."""
    checks = (
        ("tx_id", observed.tx_id, reference.tx_id),
        ("rx_id", observed.rx_id, reference.rx_id),
        ("sample_rate", observed.sample_rate, reference.sample_rate),
        ("start_time", observed.start_time, reference.start_time),
        ("num_samples", len(observed.values), len(reference.values)),
    )
    for name, a, b in checks:
        if a != b:
            raise SensingError(f"cannot subtract CIRs: {name} differs ({a!r} vs {b!r})")
    return DifferentialCir(observed.sample_rate, observed.start_time,
                           observed.values - reference.values, observed.tx_id, observed.rx_id)


def kernel_sigma(sample_rate: float) -> float:
    """Default ellipse band width: half the range resolution, c / (2 f_s)."""
    return SPEED_OF_LIGHT / (2.0 * sample_rate)


def ellipse_layer(d: DifferentialCir, tx: Node, rx: Node, grid: Grid,
                  sigma: float | None = None, eps: float = 1e-9) -> Heatmap:
    """Map one link's differential CIR onto the grid as a family of ellipses.

    Each sample with range sum above the tx-rx baseline adds a Gaussian band
    (weight ``|value|^2``) around the ellipse with the nodes as foci.  The
    layer is scaled to max 1 unless it is all zero.
    """
    ptx = np.asarray(tx.position, dtype=float)
    prx = np.asarray(rx.position, dtype=float)
    baseline = float(np.linalg.norm(ptx - prx))
    if baseline <= 1e-6:
        raise SensingError("ellipse layer needs distinct tx and rx")
    if sigma is None:
        sigma = kernel_sigma(d.sample_rate)

    weights = np.abs(d.values) ** 2
    weights[d.ranges < baseline + eps] = 0.0
    link = (tx.id, rx.id)
    if not np.any(weights > 0):
        return Heatmap(grid, np.zeros(grid.shape), PER_LINK, link)

    xs, ys = grid.cell_centers()
    layer = _kernels.ellipse_accumulate(xs, ys, float(grid.z), ptx, prx, float(d.start_time),
                                        float(d.sample_rate), weights, float(sigma),
                                        KERNEL_CUTOFF_SIGMAS * sigma)
    peak = layer.max()
    if peak > 0:
        layer = layer / peak
    return Heatmap(grid, layer, PER_LINK, link)


def fuse(layers: Iterable[Heatmap]) -> Heatmap:
    """Sum per-link layers in (tx_id, rx_id) order."""
    layers = sorted(layers, key=lambda h: h.link)
    if not layers:
        raise SensingError("nothing to fuse")
    grid = layers[0].grid
    total = np.zeros(grid.shape)
    for h in layers:
        if h.grid != grid:
            raise SensingError(f"grid mismatch in layer {h.link}")
        total += h.values
    return Heatmap(grid, total, FUSED)


def points_in_polygon(x: np.ndarray, y: np.ndarray, polygon: Sequence) -> np.ndarray:
    """Even-odd rule membership test, vectorized over points."""
    poly = np.asarray(polygon, dtype=float)
    inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
    for (x1, y1), (x2, y2) in zip(poly, np.roll(poly, -1, axis=0)):
        straddle = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= straddle & (x < xc)
    return inside


def _distance_to_polygon_edges(x, y, polygon) -> np.ndarray:
    poly = np.asarray(polygon, dtype=float)
    best = np.full(np.broadcast(x, y).shape, np.inf)
    for a, b in zip(poly, np.roll(poly, -1, axis=0)):
        ab = b - a
        t = np.clip(((x - a[0]) * ab[0] + (y - a[1]) * ab[1]) / ab.dot(ab), 0.0, 1.0)
        best = np.minimum(best, np.hypot(x - a[0] - t * ab[0], y - a[1] - t * ab[1]))
    return best


def region_mask(grid: Grid, polygon: Sequence, dilation: float = 0.0) -> np.ndarray:
    """Cells whose centers lie inside ``polygon`` or within ``dilation`` of it."""
    xs, ys = grid.cell_centers()
    gx, gy = np.meshgrid(xs, ys)
    mask = points_in_polygon(gx, gy, polygon)
    if dilation > 0:
        mask |= _distance_to_polygon_edges(gx, gy, polygon) <= dilation
    return mask


def footprint_contrast(h: Heatmap, polygons: Sequence, dilation: float) -> list[float]:
    """Mean inside each dilated polygon over the mean outside all of them."""
    masks = [region_mask(h.grid, p, dilation) for p in polygons]
    background = ~np.logical_or.reduce(masks)
    bg = h.values[background].mean()
    return [float(h.values[m].mean() / bg) if bg > 0 else float("inf") for m in masks]


def score_lots(h: Heatmap, lots: Sequence[ParkingLot]) -> dict[str, float]:
    """Mean heatmap value over the cells whose centers fall inside each lot."""
    scores = {}
    for lot in lots:
        mask = region_mask(h.grid, lot.polygon)
        if not mask.any():
            raise SensingError(f"lot {lot.id!r} covers no grid cell centers")
        scores[lot.id] = float(h.values[mask].mean())
    return scores


def detect(scores: Mapping[str, float], threshold: float, scenario_id: str = "",
           grid: Grid | None = None) -> OccupancyReport:
    if threshold < 0:
        raise SensingError("threshold must be non-negative")
    decisions = tuple(LotDecision(k, float(v), bool(v > threshold)) for k, v in scores.items())
    return OccupancyReport(decisions, float(threshold), scenario_id, grid)


def calibrate_threshold(empty_scene_heatmap: Heatmap, lots: Sequence[ParkingLot],
                        margin: float = DEFAULT_MARGIN) -> float:
    """``margin`` times the largest lot score seen on the empty scene."""
    scores = score_lots(empty_scene_heatmap, lots)
    return float(margin * max(scores.values(), default=0.0))
