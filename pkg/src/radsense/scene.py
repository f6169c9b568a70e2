"""Scenario data model: geometry, materials, nodes, radio parameters, grid, lots.

Scenario files are JSON documents with the top-level keys ``materials``,
``surfaces``, ``targets``, ``nodes``, ``radio``, ``grid`` and ``lots``
(plus an optional ``name``).  Lengths are in meters, frequencies in Hz,
power in dBm and angles in radians.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from radsense.constants import SPEED_OF_LIGHT

Point3 = tuple[float, float, float]
Point2 = tuple[float, float]

TOP_LEVEL_KEYS = ("name", "materials", "surfaces", "targets", "nodes", "radio", "grid", "lots")
POLARIZATIONS = ("perpendicular",)


class ScenarioError(ValueError):
    """Raised when a scenario file cannot be parsed or violates an invariant."""


@dataclass(frozen=True)
class Material:
    name: str
    rel_permittivity: float = 1.0
    rel_permeability: float = 1.0
    perfect_reflector: bool = False

    def __post_init__(self):
        if self.perfect_reflector:
            return
        if not self.rel_permittivity >= 1.0:
            raise ScenarioError(
                f"material {self.name!r}: invariant rel_permittivity >= 1 violated "
                f"(got {self.rel_permittivity})")
        if not self.rel_permeability >= 1.0:
            raise ScenarioError(
                f"material {self.name!r}: invariant rel_permeability >= 1 violated "
                f"(got {self.rel_permeability})")


# Configuration defaults, overridable per scenario.
DEFAULT_MATERIALS = (
    Material("concrete", 5.31),
    Material("glass", 6.27),
    Material("metal", perfect_reflector=True),
)


@dataclass(frozen=True)
class Surface:
    """Planar convex polygon with a material.

    Surfaces reflect on both sides.  ``vertices`` are ordered around the
    boundary; orientation does not matter.
    """

    vertices: tuple[Point3, ...]
    material: Material
    is_target_face: bool = False
    name: str = ""

    @cached_property
    def points(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    @cached_property
    def _newell(self) -> np.ndarray:
        p = self.points
        q = np.roll(p, -1, axis=0)
        return np.array([
            np.sum((p[:, 1] - q[:, 1]) * (p[:, 2] + q[:, 2])),
            np.sum((p[:, 2] - q[:, 2]) * (p[:, 0] + q[:, 0])),
            np.sum((p[:, 0] - q[:, 0]) * (p[:, 1] + q[:, 1])),
        ])

    @property
    def area(self) -> float:
        return 0.5 * float(np.linalg.norm(self._newell))

    @cached_property
    def normal(self) -> np.ndarray:
        """Unit plane normal (right-hand rule over the vertex order)."""
        nv = self._newell
        return nv / np.linalg.norm(nv)

    @cached_property
    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def validate(self, label: str = "surface"):
        if len(self.vertices) < 3:
            raise ScenarioError(f"{label}: invariant 'at least 3 vertices' violated")
        if not np.all(np.isfinite(self.points)):
            raise ScenarioError(f"{label}: non-finite vertex coordinate")
        if self.area <= 1e-12:
            raise ScenarioError(f"{label}: invariant 'non-degenerate polygon (area > 1e-12 m^2)' violated")
        n = self.normal
        dist = (self.points - self.centroid) @ n
        if np.max(np.abs(dist)) > 1e-9:
            raise ScenarioError(
                f"{label}: invariant 'vertices coplanar within 1e-9 m' violated "
                f"(max deviation {np.max(np.abs(dist)):.3g} m)")
        p = self.points
        edges = np.roll(p, -1, axis=0) - p
        turn = np.cross(edges, np.roll(edges, -1, axis=0)) @ n
        if np.any(turn < -1e-12):
            raise ScenarioError(f"{label}: invariant 'convex polygon' violated")


@dataclass(frozen=True)
class TargetObject:
    """Oriented box standing for a target (e.g. a vehicle).

    ``dimensions`` are (width, depth, height) along the box's local x, y, z
    axes; ``yaw`` rotates the box about the vertical axis through ``center``.
    """

    id: str
    center: Point3
    dimensions: Point3
    yaw: float = 0.0
    material: Material = DEFAULT_MATERIALS[2]

    def __post_init__(self):
        if not all(d > 0 for d in self.dimensions):
            raise ScenarioError(f"target {self.id!r}: invariant 'dimensions > 0' violated")

    def corners(self) -> np.ndarray:
        """Box corners, shape (8, 3): bottom 4 then top 4, counter-clockwise."""
        w, d, h = (0.5 * v for v in self.dimensions)
        local = np.array([
            [-w, -d, -h], [w, -d, -h], [w, d, -h], [-w, d, -h],
            [-w, -d, h], [w, -d, h], [w, d, h], [-w, d, h],
        ])
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return local @ rot.T + np.asarray(self.center, dtype=float)

    def footprint(self) -> np.ndarray:
        """Ground-plane outline, shape (4, 2)."""
        return self.corners()[:4, :2]

    def faces(self) -> list[Surface]:
        """Front (+y), right (+x), back (-y), left (-x) and top faces; no bottom."""
        k = self.corners()
        order = {
            "front": (3, 2, 6, 7),
            "right": (2, 1, 5, 6),
            "back": (1, 0, 4, 5),
            "left": (0, 3, 7, 4),
            "top": (4, 5, 6, 7),
        }
        return [
            Surface(tuple(tuple(float(v) for v in k[i]) for i in idx), self.material,
                    is_target_face=True, name=f"{self.id}:{side}")
            for side, idx in order.items()
        ]


@dataclass(frozen=True)
class Node:
    id: str
    position: Point3


@dataclass(frozen=True)
class RadioModel:
    center_frequency: float
    bandwidth: float
    tx_power: float = 0.0
    antenna_gain: float = 0.0
    num_samples: int = 512
    max_reflection_order: int = 2
    polarization: str = "perpendicular"

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ScenarioError("radio: invariant 'bandwidth > 0' violated")
        if not self.center_frequency > self.bandwidth / 2:
            raise ScenarioError("radio: invariant 'center_frequency > bandwidth/2' violated")
        if not self.num_samples >= 2:
            raise ScenarioError("radio: invariant 'num_samples >= 2' violated")
        if not 0 <= self.max_reflection_order <= 3:
            raise ScenarioError("radio: invariant 'max_reflection_order in [0, 3]' violated")
        if self.polarization not in POLARIZATIONS:
            raise ScenarioError(f"radio: unsupported polarization {self.polarization!r}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.center_frequency


@dataclass(frozen=True)
class Grid:
    """Equidistant 2D sensing grid at height ``z``.

    Cell (ix, iy) has its center at ``origin + (ix + 0.5, iy + 0.5) * cell_size``.
    Arrays over the grid are indexed ``[iy, ix]``.
    """

    origin: Point2
    cell_size: float
    width: int
    height: int
    z: float = 1.0

    def __post_init__(self):
        if not (self.cell_size > 0 and self.width >= 1 and self.height >= 1):
            raise ScenarioError("grid: invariant 'cell_size > 0 and at least one cell' violated")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def extent(self) -> tuple[float, float, float, float]:
        x0, y0 = self.origin
        return (x0, x0 + self.width * self.cell_size, y0, y0 + self.height * self.cell_size)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        x0, y0 = self.origin
        xs = x0 + (np.arange(self.width) + 0.5) * self.cell_size
        ys = y0 + (np.arange(self.height) + 0.5) * self.cell_size
        return xs, ys

    def with_cell_size(self, cell_size: float) -> "Grid":
        """Same extent (rounded up to whole cells) at a different resolution."""
        x0, x1, y0, y1 = self.extent
        w = int(math.ceil((x1 - x0) / cell_size - 1e-9))
        h = int(math.ceil((y1 - y0) / cell_size - 1e-9))
        return Grid(self.origin, cell_size, w, h, self.z)

    def contains(self, x: float, y: float) -> bool:
        x0, x1, y0, y1 = self.extent
        return x0 - 1e-9 <= x <= x1 + 1e-9 and y0 - 1e-9 <= y <= y1 + 1e-9


@dataclass(frozen=True)
class ParkingLot:
    id: str
    polygon: tuple[Point2, ...]


@dataclass(frozen=True)
class Scenario:
    radio: RadioModel
    grid: Grid
    nodes: tuple[Node, ...]
    surfaces: tuple[Surface, ...] = ()
    targets: tuple[TargetObject, ...] = ()
    lots: tuple[ParkingLot, ...] = ()
    materials: tuple[Material, ...] = DEFAULT_MATERIALS
    name: str = ""

    @property
    def scenario_id(self) -> str:
        return hashlib.sha256(serialize_scenario(self).encode()).hexdigest()[:16]

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def replace(self, **changes) -> "Scenario":
        s = dataclasses.replace(self, **changes)
        validate_scenario(s)
        return s

    def with_radio(self, **changes) -> "Scenario":
        return self.replace(radio=dataclasses.replace(self.radio, **changes))


def validate_scenario(s: Scenario) -> None:
    """Check cross-object invariants; raise ScenarioError naming the violation."""
    for i, surf in enumerate(s.surfaces):
        surf.validate(f"surfaces[{i}]")
    ids = [t.id for t in s.targets]
    if len(set(ids)) != len(ids):
        raise ScenarioError("targets: invariant 'unique target ids' violated")
    node_ids = [n.id for n in s.nodes]
    if len(set(node_ids)) != len(node_ids):
        raise ScenarioError("nodes: invariant 'unique node ids' violated")
    pos = np.array([n.position for n in s.nodes], dtype=float).reshape(-1, 3)
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            if np.linalg.norm(pos[i] - pos[j]) <= 1e-6:
                raise ScenarioError(
                    f"nodes: invariant 'node positions pairwise distinct' violated "
                    f"({node_ids[i]!r}, {node_ids[j]!r})")
    for n in s.nodes:
        if not s.grid.contains(n.position[0], n.position[1]):
            raise ScenarioError(
                f"grid: invariant 'grid covers all node ground projections' violated by node {n.id!r}")
    lot_ids = [lot.id for lot in s.lots]
    if len(set(lot_ids)) != len(lot_ids):
        raise ScenarioError("lots: invariant 'unique lot ids' violated")
    for lot in s.lots:
        if len(lot.polygon) < 3:
            raise ScenarioError(f"lot {lot.id!r}: polygon needs at least 3 vertices")
        if not all(s.grid.contains(x, y) for x, y in lot.polygon):
            raise ScenarioError(
                f"lot {lot.id!r}: invariant 'lot polygons lie within grid extent' violated")


def expand_geometry(s: Scenario) -> tuple[Surface, ...]:
    """Static surfaces followed by the 5 faces of each target, targets sorted by id."""
    out = list(s.surfaces)
    for t in sorted(s.targets, key=lambda t: t.id):
        out.extend(t.faces())
    return tuple(out)


def reference_scene(s: Scenario) -> Scenario:
    """The empty reference scene: same scenario with all targets removed."""
    return dataclasses.replace(s, targets=())


# -- parsing / serialization --------------------------------------------------

def _point(value: Any, dim: int, where: str) -> tuple[float, ...]:
    if not (isinstance(value, (list, tuple)) and len(value) == dim):
        raise ScenarioError(f"{where}: expected a list of {dim} numbers")
    try:
        out = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{where}: expected numbers") from None
    if not all(math.isfinite(v) for v in out):
        raise ScenarioError(f"{where}: non-finite coordinate")
    return out


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ScenarioError(f"{where}: missing required key {key!r}")
    return obj[key]


def _check_keys(obj: Any, allowed: Iterable[str], where: str) -> dict:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where}: expected an object")
    extra = set(obj) - set(allowed)
    if extra:
        raise ScenarioError(f"{where}: unknown key(s) {sorted(extra)}")
    return obj


def _default_grid(nodes: Sequence[Node], margin: float = 1.0, cell: float = 0.1) -> Grid:
    pos = np.array([n.position for n in nodes], dtype=float).reshape(-1, 3)
    lo = np.floor(pos[:, :2].min(axis=0) - margin)
    hi = np.ceil(pos[:, :2].max(axis=0) + margin)
    w, h = (int(round(v)) for v in (hi - lo) / cell)
    return Grid((float(lo[0]), float(lo[1])), cell, w, h, float(np.mean(pos[:, 2])))


def scenario_from_dict(doc: dict) -> Scenario:
    _check_keys(doc, TOP_LEVEL_KEYS, "scenario")

    library = {m.name: m for m in DEFAULT_MATERIALS}
    for i, m in enumerate(doc.get("materials", [])):
        where = f"materials[{i}]"
        _check_keys(m, ("name", "rel_permittivity", "rel_permeability", "perfect_reflector"), where)
        library[str(_require(m, "name", where))] = Material(
            name=str(m["name"]),
            rel_permittivity=float(m.get("rel_permittivity", 1.0)),
            rel_permeability=float(m.get("rel_permeability", 1.0)),
            perfect_reflector=bool(m.get("perfect_reflector", False)),
        )

    def material(name: Any, where: str) -> Material:
        if name not in library:
            raise ScenarioError(f"{where}: unknown material reference {name!r}")
        return library[name]

    surfaces = []
    for i, sd in enumerate(doc.get("surfaces", [])):
        where = f"surfaces[{i}]"
        _check_keys(sd, ("vertices", "material", "name"), where)
        verts = _require(sd, "vertices", where)
        if not isinstance(verts, list):
            raise ScenarioError(f"{where}.vertices: expected a list")
        surfaces.append(Surface(
            tuple(_point(v, 3, f"{where}.vertices[{j}]") for j, v in enumerate(verts)),
            material(_require(sd, "material", where), where),
            name=str(sd.get("name", "")),
        ))

    targets = []
    for i, td in enumerate(doc.get("targets", [])):
        where = f"targets[{i}]"
        _check_keys(td, ("id", "center", "dimensions", "yaw", "material"), where)
        targets.append(TargetObject(
            id=str(_require(td, "id", where)),
            center=_point(_require(td, "center", where), 3, f"{where}.center"),
            dimensions=_point(_require(td, "dimensions", where), 3, f"{where}.dimensions"),
            yaw=float(td.get("yaw", 0.0)),
            material=material(td.get("material", "metal"), where),
        ))

    nodes = []
    for i, nd in enumerate(_require(doc, "nodes", "scenario")):
        where = f"nodes[{i}]"
        _check_keys(nd, ("id", "position"), where)
        nodes.append(Node(str(_require(nd, "id", where)),
                          _point(_require(nd, "position", where), 3, f"{where}.position")))
    if len(nodes) < 2:
        raise ScenarioError("nodes: at least 2 nodes are required")

    rd = _check_keys(_require(doc, "radio", "scenario"),
                     [f.name for f in dataclasses.fields(RadioModel)], "radio")
    try:
        radio = RadioModel(
            center_frequency=float(_require(rd, "center_frequency", "radio")),
            bandwidth=float(_require(rd, "bandwidth", "radio")),
            tx_power=float(rd.get("tx_power", 0.0)),
            antenna_gain=float(rd.get("antenna_gain", 0.0)),
            num_samples=int(rd.get("num_samples", 512)),
            max_reflection_order=int(rd.get("max_reflection_order", 2)),
            polarization=str(rd.get("polarization", "perpendicular")),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"radio: {exc}") from None

    if "grid" in doc:
        gd = _check_keys(doc["grid"], ("origin", "cell_size", "width", "height", "z"), "grid")
        z = gd.get("z")
        if z is None:
            z = float(np.mean([n.position[2] for n in nodes]))
        grid = Grid(
            origin=_point(_require(gd, "origin", "grid"), 2, "grid.origin"),
            cell_size=float(_require(gd, "cell_size", "grid")),
            width=int(_require(gd, "width", "grid")),
            height=int(_require(gd, "height", "grid")),
            z=float(z),
        )
    else:
        grid = _default_grid(nodes)

    lots = []
    for i, ld in enumerate(doc.get("lots", [])):
        where = f"lots[{i}]"
        _check_keys(ld, ("id", "polygon"), where)
        poly = _require(ld, "polygon", where)
        if not isinstance(poly, list):
            raise ScenarioError(f"{where}.polygon: expected a list")
        lots.append(ParkingLot(str(_require(ld, "id", where)),
                               tuple(_point(p, 2, f"{where}.polygon[{j}]") for j, p in enumerate(poly))))

    s = Scenario(
        radio=radio, grid=grid, nodes=tuple(nodes), surfaces=tuple(surfaces),
        targets=tuple(targets), lots=tuple(lots), materials=tuple(library.values()),
        name=str(doc.get("name", "")),
    )
    validate_scenario(s)
    return s


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario-file content."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(doc)


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "name": s.name,
        "materials": [dataclasses.asdict(m) for m in s.materials],
        "surfaces": [
            {"name": f.name, "vertices": [list(v) for v in f.vertices], "material": f.material.name}
            for f in s.surfaces
        ],
        "targets": [
            {"id": t.id, "center": list(t.center), "dimensions": list(t.dimensions),
             "yaw": t.yaw, "material": t.material.name}
            for t in s.targets
        ],
        "nodes": [{"id": n.id, "position": list(n.position)} for n in s.nodes],
        "radio": dataclasses.asdict(s.radio),
        "grid": {"origin": list(s.grid.origin), "cell_size": s.grid.cell_size,
                 "width": s.grid.width, "height": s.grid.height, "z": s.grid.z},
        "lots": [{"id": lot.id, "polygon": [list(p) for p in lot.polygon]} for lot in s.lots],
    }


def serialize_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2)


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario from a file path or a bundled scenario name."""
    p = Path(path)
    if not p.exists() and not p.suffix:
        p = bundled_scenario_path(str(path))
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {str(path)!r}: {exc.strerror}") from None
    return parse_scenario(text)


def bundled_scenario_path(name: str) -> Path:
    return Path(str(resources.files("radsense") / "scenarios" / f"{name}.json"))
