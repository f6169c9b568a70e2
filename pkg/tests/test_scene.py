import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import METAL, rect, small_scenario
from radsense.scene import (Grid, Material, ParkingLot, RadioModel, ScenarioError,
                            TargetObject, bundled_scenario_path, expand_geometry, load_scenario,
                            parse_scenario, reference_scene, scenario_to_dict,
                            serialize_scenario)

MINIMAL = {
    "nodes": [{"id": "a", "position": [0, 0, 1]}, {"id": "b", "position": [3, 0, 1]}],
    "radio": {"center_frequency": 26e9, "bandwidth": 400e6, "tx_power": 22},
}


def test_bundled_parking_garage_matches_radio_table():
    s = load_scenario("parking_garage")
    assert s.radio.center_frequency == 26e9
    assert s.radio.bandwidth == 400e6
    assert s.radio.tx_power == 22.0
    assert s.radio.antenna_gain == 0.0
    assert len(s.nodes) == 21
    assert all(n.position[2] == 1.0 for n in s.nodes)
    assert len(s.targets) == 2
    assert s.grid.z == 1.0


def test_bundled_garage_nodes_form_uniform_lattice():
    s = load_scenario(bundled_scenario_path("parking_garage"))
    xs = sorted({round(n.position[0], 9) for n in s.nodes})
    ys = sorted({round(n.position[1], 9) for n in s.nodes})
    assert len(xs) == 7 and len(ys) == 3
    assert np.allclose(np.diff(xs), 30 / 7)
    assert np.allclose(np.diff(ys), 20 / 3)


def test_minimal_scenario_parses():
    s = parse_scenario(json.dumps(MINIMAL))
    assert s.surfaces == ()
    assert len(s.nodes) == 2
    # default grid covers the nodes at their height
    assert s.grid.contains(0, 0) and s.grid.contains(3, 0)
    assert s.grid.z == 1.0


def test_low_permittivity_rejected():
    doc = dict(MINIMAL, materials=[{"name": "foam", "rel_permittivity": 0.5}])
    with pytest.raises(ScenarioError, match="rel_permittivity >= 1"):
        parse_scenario(json.dumps(doc))


def test_perfect_reflector_ignores_permittivity():
    Material("pec", 0.1, 0.1, perfect_reflector=True)


def test_syntax_error_reports_position():
    with pytest.raises(ScenarioError, match=r"line 2, column \d+"):
        parse_scenario('{\n  "nodes": [,]\n}')


def test_unknown_material_reference():
    doc = dict(MINIMAL, surfaces=[{"vertices": [[0, 1, 0], [1, 1, 0], [1, 1, 1]], "material": "unobtainium"}])
    with pytest.raises(ScenarioError, match="unknown material reference 'unobtainium'"):
        parse_scenario(json.dumps(doc))


@pytest.mark.parametrize("vertices, message", [
    ([[0, 1, 0], [1, 1, 0], [1, 1, 1], [0, 1.1, 1]], "coplanar"),
    ([[0, 0, 0], [2, 0, 0], [1, 0.2, 0], [2, 2, 0], [0, 2, 0]], "convex"),
    ([[0, 0, 0], [1, 0, 0], [2, 0, 0]], "non-degenerate"),
])
def test_bad_polygons_rejected(vertices, message):
    doc = dict(MINIMAL, surfaces=[{"vertices": vertices, "material": "concrete"}])
    with pytest.raises(ScenarioError, match=message):
        parse_scenario(json.dumps(doc))


@pytest.mark.parametrize("radio, message", [
    ({"center_frequency": 26e9, "bandwidth": 0}, "bandwidth > 0"),
    ({"center_frequency": 1e8, "bandwidth": 4e8}, "center_frequency > bandwidth/2"),
    ({"center_frequency": 26e9, "bandwidth": 4e8, "num_samples": 1}, "num_samples >= 2"),
    ({"center_frequency": 26e9, "bandwidth": 4e8, "max_reflection_order": 4}, r"\[0, 3\]"),
])
def test_radio_invariants(radio, message):
    with pytest.raises(ScenarioError, match=message):
        parse_scenario(json.dumps(dict(MINIMAL, radio=radio)))


def test_duplicate_node_positions_rejected():
    doc = dict(MINIMAL, nodes=[{"id": "a", "position": [0, 0, 1]}, {"id": "b", "position": [0, 0, 1 + 1e-7]}])
    with pytest.raises(ScenarioError, match="pairwise distinct"):
        parse_scenario(json.dumps(doc))


def test_grid_must_cover_nodes_and_lots():
    doc = dict(MINIMAL, grid={"origin": [0.5, -1], "cell_size": 0.1, "width": 10, "height": 10})
    with pytest.raises(ScenarioError, match="node ground projections"):
        parse_scenario(json.dumps(doc))
    doc = dict(MINIMAL, lots=[{"id": "L", "polygon": [[0, 0], [1, 0], [1, 50]]}])
    with pytest.raises(ScenarioError, match="within grid extent"):
        parse_scenario(json.dumps(doc))


def test_unknown_key_rejected():
    with pytest.raises(ScenarioError, match="unknown key"):
        parse_scenario(json.dumps(dict(MINIMAL, extras=1)))


def test_reference_scene_removes_targets_only():
    s = load_scenario("parking_garage")
    ref = reference_scene(s)
    assert len(s.targets) == 2 and ref.targets == ()
    assert ref.surfaces == s.surfaces and ref.nodes == s.nodes and ref.radio == s.radio
    assert ref.grid == s.grid and ref.lots == s.lots
    assert reference_scene(ref) == ref


def test_reference_scene_fixed_point_without_targets():
    s = small_scenario()
    assert reference_scene(s) == s


def test_reference_scene_drops_five_faces_per_target():
    car = TargetObject("car", (1.0, 2.0, 0.75), (1.8, 4.5, 1.5))
    s = small_scenario(surfaces=[rect(-5, 5, 3, 3, 0, 3)], targets=[car])
    assert len(expand_geometry(s)) - len(expand_geometry(reference_scene(s))) == 5
    assert reference_scene(s).surfaces == s.surfaces


def test_expand_geometry_counts_and_order():
    walls = [rect(-5, 5, 3, 3, 0, 3), rect(-5, 5, -3, -3, 0, 3),
             rect(-5, -5, -3, 3, 0, 3), rect(5, 5, -3, 3, 0, 3)]
    cars = [TargetObject("b", (1.0, 0.5, 0.75), (1.8, 4.5, 1.5)),
            TargetObject("a", (-2.0, 0.5, 0.75), (1.8, 4.5, 1.5))]
    geo = expand_geometry(small_scenario(surfaces=walls, targets=cars[:1]))
    assert len(geo) == 9
    geo = expand_geometry(small_scenario(surfaces=walls, targets=cars))
    assert geo[:4] == tuple(walls)
    assert [f.name for f in geo[4:]] == [f"{t}:{side}" for t in "ab"
                                        for side in ("front", "right", "back", "left", "top")]
    assert all(f.is_target_face for f in geo[4:])
    assert expand_geometry(small_scenario()) == ()


def test_target_faces_are_valid_and_open_at_bottom():
    car = TargetObject("car", (0.0, 0.0, 0.75), (1.8, 4.5, 1.5), yaw=0.4)
    faces = car.faces()
    for f in faces:
        f.validate()
    assert min(min(v[2] for v in f.vertices) for f in faces) == pytest.approx(0.0)
    assert not any(all(abs(v[2]) < 1e-12 for v in f.vertices) for f in faces)
    areas = sorted(f.area for f in faces)
    assert areas == pytest.approx(sorted([1.8 * 1.5] * 2 + [4.5 * 1.5] * 2 + [1.8 * 4.5]))


def test_yaw_rotates_side_normals():
    a = TargetObject("car", (0.0, 0.0, 0.75), (1.8, 4.5, 1.5), yaw=0.0).faces()
    b = TargetObject("car", (0.0, 0.0, 0.75), (1.8, 4.5, 1.5), yaw=math.pi / 2).faces()
    rot = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    for fa, fb in zip(a[:4], b[:4]):
        na, nb = fa.normal, fb.normal
        assert abs(na[2]) < 1e-12
        # same axis after a quarter turn (orientation sign is immaterial for two-sided faces)
        assert abs(abs(np.dot(rot @ na, nb)) - 1.0) < 1e-12
    assert np.allclose(np.abs(a[4].normal), [0, 0, 1])


def test_grid_with_cell_size_keeps_extent():
    g = Grid((0.0, 0.0), 0.1, 300, 200, 1.0)
    g2 = g.with_cell_size(0.25)
    assert (g2.width, g2.height) == (120, 80)
    assert g2.extent == pytest.approx(g.extent)


def test_round_trip_bundled():
    for name in ("parking_garage", "single_target"):
        s = load_scenario(name)
        assert parse_scenario(serialize_scenario(s)) == s


finite = st.floats(-50, 50, allow_nan=False)


@st.composite
def scenarios(draw):
    n_nodes = draw(st.integers(2, 5))
    nodes = [(float(i) * 1.5, draw(st.floats(0, 5)), draw(st.floats(0.5, 2.0))) for i in range(n_nodes)]
    walls = []
    for _ in range(draw(st.integers(0, 3))):
        y = draw(finite)
        walls.append(rect(-10, draw(st.floats(-9, 10)), y, y, 0, draw(st.floats(0.5, 4))))
    targets = [TargetObject(f"t{i}", (draw(st.floats(0, 5)), draw(st.floats(0, 5)), 0.75),
                            (draw(st.floats(0.5, 3)), draw(st.floats(0.5, 5)), 1.5),
                            draw(st.floats(-math.pi, math.pi)), METAL)
               for i in range(draw(st.integers(0, 2)))]
    radio = RadioModel(draw(st.floats(1e9, 60e9)), draw(st.floats(10e6, 800e6)),
                       draw(st.floats(-10, 40)), draw(st.floats(0, 10)),
                       draw(st.integers(2, 1024)), draw(st.integers(0, 3)))
    cell = draw(st.floats(0.05, 0.5))
    n_cells = int(math.ceil(9.0 / cell))
    grid = Grid((-1.0, -1.0), cell, n_cells, n_cells, draw(st.floats(0, 3)))
    lots = [ParkingLot("L1", ((0.0, 0.0), (1.0, 0.0), (1.0, 2.0)))]
    return small_scenario(nodes=nodes, surfaces=walls, targets=targets, lots=lots, radio=radio, grid=grid)


@settings(max_examples=60, deadline=None)
@given(scenarios())
def test_round_trip_identity(s):
    assert parse_scenario(serialize_scenario(s)) == s
    assert reference_scene(reference_scene(s)) == reference_scene(s)
    assert len(expand_geometry(s)) == len(s.surfaces) + 5 * len(s.targets)


@settings(max_examples=30, deadline=None)
@given(scenarios(), st.floats(1e9, 60e9))
def test_expand_count_ignores_radio_and_nodes(s, fc):
    s2 = s.replace(radio=RadioModel(fc, 100e6), nodes=s.nodes[:2])
    assert len(expand_geometry(s2)) == len(expand_geometry(s))


def test_scenario_dict_has_schema_keys():
    d = scenario_to_dict(load_scenario("single_target"))
    assert {"materials", "surfaces", "targets", "nodes", "radio", "grid", "lots"} <= set(d)
