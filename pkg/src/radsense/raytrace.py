"""Specular multipath enumeration by the image (mirror) method."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from radsense import _kernels
from radsense.constants import GEOM_TOL, SPEED_OF_LIGHT
from radsense.scene import Node, Surface

DEFAULT_MAX_ORDER = 2


@dataclass(frozen=True)
class PropagationPath:
    order: int
    reflection_points: tuple[tuple[float, float, float], ...]
    surfaces_hit: tuple[Surface, ...]
    surface_ids: tuple[int, ...]
    total_length: float
    incidence_angles: tuple[float, ...]
    tx: tuple[float, float, float]
    rx: tuple[float, float, float]

    @property
    def segment_list(self) -> np.ndarray:
        """Polyline tx -> reflection points -> rx, shape (order + 2, 3)."""
        return np.array([self.tx, *self.reflection_points, self.rx], dtype=float)

    @property
    def delay(self) -> float:
        return self.total_length / SPEED_OF_LIGHT


class Geometry:
    """Surfaces packed into flat arrays for the kernels."""

    def __init__(self, surfaces: Sequence[Surface]):
        self.surfaces = tuple(surfaces)
        n = len(self.surfaces)
        vmax = max((len(s.vertices) for s in self.surfaces), default=3)
        self.normals = np.zeros((n, 3))
        self.origins = np.zeros((n, 3))
        self.edge_pts = np.zeros((n, vmax, 3))
        self.edge_in = np.zeros((n, vmax, 3))
        self.nedges = np.zeros(n, dtype=np.int64)
        for i, s in enumerate(self.surfaces):
            nrm = s.normal
            p = s.points
            self.normals[i] = nrm
            self.origins[i] = s.centroid
            self.nedges[i] = len(p)
            for e in range(len(p)):
                inward = np.cross(nrm, p[(e + 1) % len(p)] - p[e])
                inward /= np.linalg.norm(inward)
                if np.dot(s.centroid - p[e], inward) < 0:
                    inward = -inward
                self.edge_pts[i, e] = p[e]
                self.edge_in[i, e] = inward
        self._seq_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def __len__(self):
        return len(self.surfaces)

    @property
    def arrays(self):
        return self.normals, self.origins, self.edge_pts, self.edge_in, self.nedges

    def sequences(self, max_order: int) -> tuple[np.ndarray, np.ndarray]:
        """All surface sequences up to ``max_order`` without immediate repeats.

        Ordered by length, then lexicographically.  Returns ``(seqs, orders)``
        with ``seqs`` padded by -1.
        """
        if max_order not in self._seq_cache:
            rows = []
            n = len(self.surfaces)
            for k in range(max_order + 1):
                for seq in itertools.product(range(n), repeat=k):
                    if any(a == b for a, b in zip(seq, seq[1:])):
                        continue
                    rows.append(seq)
            width = max(max_order, 1)
            seqs = np.full((len(rows), width), -1, dtype=np.int64)
            orders = np.zeros(len(rows), dtype=np.int64)
            for m, seq in enumerate(rows):
                seqs[m, :len(seq)] = seq
                orders[m] = len(seq)
            self._seq_cache[max_order] = (seqs, orders)
        return self._seq_cache[max_order]


def as_geometry(geometry: Geometry | Iterable[Surface]) -> Geometry:
    return geometry if isinstance(geometry, Geometry) else Geometry(list(geometry))


def _position(p) -> np.ndarray:
    if isinstance(p, Node):
        p = p.position
    return np.asarray(p, dtype=float)


def mirror_point(p, s: Surface) -> np.ndarray:
    """Reflect ``p`` across the plane of ``s``."""
    p = np.asarray(p, dtype=float)
    n = s.normal
    return p - 2.0 * np.dot(p - s.centroid, n) * n


def occluded(a, b, geometry, ignore: Iterable = ()) -> bool:
    """True iff the open segment (a, b) crosses a surface not in ``ignore``.

    ``ignore`` holds Surface objects or indices into ``geometry``.  Crossings
    within 1e-9 m outside a polygon edge still count as hits.
    """
    g = as_geometry(geometry)
    skip = set()
    for item in ignore:
        if isinstance(item, (int, np.integer)):
            skip.add(int(item))
        else:
            skip.update(i for i, s in enumerate(g.surfaces) if s is item or s == item)
    keep = [s for i, s in enumerate(g.surfaces) if i not in skip]
    if not keep:
        return False
    sub = Geometry(keep)
    a = _position(a)[None]
    b = _position(b)[None]
    res = _kernels.occluded_segments(a, b, np.full((1, 2), -1, dtype=np.int64), *sub.arrays, GEOM_TOL)
    return bool(res[0])


def enumerate_paths(geometry, tx, rx, max_order: int = DEFAULT_MAX_ORDER) -> list[PropagationPath]:
    """All unoccluded specular paths of order 0..max_order from ``tx`` to ``rx``.

    Paths come out by ascending order, then by surface sequence.
    """
    g = as_geometry(geometry)
    ptx, prx = _position(tx), _position(rx)
    if np.linalg.norm(ptx - prx) <= 1e-6:
        raise ValueError("tx and rx must be distinct positions")
    seqs, orders = g.sequences(max_order)
    valid, points, lengths = _kernels.trace_sequences(*g.arrays, seqs, orders, ptx, prx, GEOM_TOL)

    out = []
    for m in np.flatnonzero(valid):
        k = int(orders[m])
        ids = tuple(int(i) for i in seqs[m, :k])
        chain = np.vstack([ptx, points[m, :k], prx])
        angles = []
        for j, sid in enumerate(ids):
            d_in = chain[j + 1] - chain[j]
            cos_i = abs(np.dot(d_in, g.normals[sid])) / np.linalg.norm(d_in)
            angles.append(float(np.arccos(min(cos_i, 1.0))))
        out.append(PropagationPath(
            order=k,
            reflection_points=tuple(tuple(float(v) for v in points[m, j]) for j in range(k)),
            surfaces_hit=tuple(g.surfaces[i] for i in ids),
            surface_ids=ids,
            total_length=float(lengths[m]),
            incidence_angles=tuple(angles),
            tx=tuple(float(v) for v in ptx),
            rx=tuple(float(v) for v in prx),
        ))
    return out


def paths_to_json(links: dict[tuple[str, str], list[PropagationPath]]) -> str:
    """Debug dump of per-link paths (order, reflection points, length)."""
    doc = [
        {
            "tx": tx_id,
            "rx": rx_id,
            "paths": [
                {"order": p.order, "surfaces": list(p.surface_ids),
                 "reflection_points": [list(q) for q in p.reflection_points],
                 "length": p.total_length}
                for p in paths
            ],
        }
        for (tx_id, rx_id), paths in sorted(links.items())
    ]
    return json.dumps(doc, indent=1)
