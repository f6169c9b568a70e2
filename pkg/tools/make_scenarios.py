"""Regenerate the bundled scenario files under src/radsense/scenarios/.

The garage layout is illustrative: a 30 m x 20 m deck with a 2.6 m ceiling,
21 base stations on a uniform 7 x 3 lattice (one per lattice cell, at the
cell center) at 1 m height, two rows of ten 2.5 m x 5 m
lots and two parked vehicles.
"""
import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "radsense" / "scenarios"

RADIO = {
    "center_frequency": 26e9,
    "bandwidth": 400e6,
    "tx_power": 22.0,
    "antenna_gain": 0.0,
    "num_samples": 512,
    "max_reflection_order": 2,
    "polarization": "perpendicular",
}

CAR = [1.8, 4.5, 1.5]


def box_room(lx, ly, lz, with_ceiling=True, with_walls=True):
    surfaces = [{"name": "floor", "material": "concrete",
                 "vertices": [[0, 0, 0], [lx, 0, 0], [lx, ly, 0], [0, ly, 0]]}]
    if with_ceiling:
        surfaces.append({"name": "ceiling", "material": "concrete",
                         "vertices": [[0, 0, lz], [lx, 0, lz], [lx, ly, lz], [0, ly, lz]]})
    if with_walls:
        surfaces += [
            {"name": "wall_south", "material": "concrete",
             "vertices": [[0, 0, 0], [lx, 0, 0], [lx, 0, lz], [0, 0, lz]]},
            {"name": "wall_east", "material": "concrete",
             "vertices": [[lx, 0, 0], [lx, ly, 0], [lx, ly, lz], [lx, 0, lz]]},
            {"name": "wall_north", "material": "concrete",
             "vertices": [[lx, ly, 0], [0, ly, 0], [0, ly, lz], [lx, ly, lz]]},
            {"name": "wall_west", "material": "concrete",
             "vertices": [[0, ly, 0], [0, 0, 0], [0, 0, lz], [0, ly, lz]]},
        ]
    return surfaces


def lattice_nodes(prefix, lx, ly, nx, ny, height=1.0):
    """Nodes at the cell centers of an nx x ny partition of the footprint."""
    width = len(str(nx * ny))
    return [
        {"id": f"{prefix}{j * nx + i + 1:0{width}d}",
         "position": [lx * (2 * i + 1) / (2 * nx), ly * (2 * j + 1) / (2 * ny), height]}
        for j in range(ny) for i in range(nx)
    ]


def lot(lot_id, x0, y0, w=2.5, d=5.0):
    return {"id": lot_id, "polygon": [[x0, y0], [x0 + w, y0], [x0 + w, y0 + d], [x0, y0 + d]]}


def parking_garage():
    lx, ly, lz = 30.0, 20.0, 2.6
    nodes = lattice_nodes("bs", lx, ly, 7, 3)
    lots = [lot(f"A{i + 1:02d}", 2.5 + 2.5 * i, 4.0) for i in range(10)]
    lots += [lot(f"B{i + 1:02d}", 2.5 + 2.5 * i, 11.0) for i in range(10)]
    return {
        "name": "parking_garage",
        "materials": [],
        "surfaces": box_room(lx, ly, lz),
        "targets": [
            {"id": "car1", "center": [8.75, 6.5, 0.75], "dimensions": CAR, "yaw": 0.0, "material": "metal"},
            {"id": "car2", "center": [18.75, 13.5, 0.75], "dimensions": CAR, "yaw": 0.0, "material": "metal"},
        ],
        "nodes": nodes,
        "radio": RADIO,
        "grid": {"origin": [0.0, 0.0], "cell_size": 0.1, "width": 300, "height": 200, "z": 1.0},
        "lots": lots,
    }


def single_target():
    nodes = lattice_nodes("n", 12.0, 10.0, 3, 2)
    return {
        "name": "single_target",
        "materials": [],
        "surfaces": box_room(12.0, 10.0, 3.0, with_ceiling=False, with_walls=False),
        "targets": [{"id": "car", "center": [6.0, 5.0, 0.75], "dimensions": CAR, "yaw": 0.0,
                     "material": "metal"}],
        "nodes": nodes,
        "radio": RADIO,
        "grid": {"origin": [0.0, 0.0], "cell_size": 0.1, "width": 120, "height": 100, "z": 1.0},
        "lots": [lot("L1", 4.75, 2.5), lot("L2", 8.25, 2.5)],
    }


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    for build in (parking_garage, single_target):
        doc = build()
        (OUT / f"{doc['name']}.json").write_text(json.dumps(doc, indent=1) + "\n")
        print("wrote", OUT / f"{doc['name']}.json")
