from math import atan2, cos, sin

import numpy as np
import pytest
import shapely
from hypothesis import given, settings, strategies as st
from shapely.geometry import Point, Polygon

from strategies import delaunay_maps, random_closed_walk, relabel
from ymloops.errors import (
    Disconnected, EmptyLoop, MalformedRotation, NonPlanar, NotOnGraph, WrongDegree,
)
from ymloops.planar_map import (
    DRAWINGS, LoopWord, area_vector, build_map, crossing_frames, crossing_report,
    example_drawing, example_faces, face_polygon, frame_from_halves, genericize,
    map_from_drawing, reduce_subloop, split_loop, standard_example, subdivide_edge,
)


def _left_probe(line, eps=1e-4):
    """A point just left of the middle of the first segment of a polyline."""
    (x0, y0), (x1, y1) = line[0], line[1]
    mx, my = (x0 + x1) / 2, (y0 + y1) / 2
    ang = atan2(y1 - y0, x1 - x0)
    return Point(mx - eps * sin(ang), my + eps * cos(ang))


def _face_regions(drawing, pm):
    return {f: shapely.make_valid(Polygon(face_polygon(drawing, pm, f)))
            for f in pm.bounded_faces}


def _check_faces_against_geometry(drawing, pm):
    regions = _face_regions(drawing, pm)
    for k, line in drawing.polylines.items():
        probe = _left_probe(line)
        inside = [f for f, r in regions.items() if r.contains(probe)]
        expected = pm.left_face(k)
        if expected == pm.unbounded_face:
            assert inside == [], (k, inside)
        else:
            assert inside == [expected], (k, expected, inside)
    # bounded faces tile the hull of the drawing without overlap
    total = sum(r.area for r in regions.values())
    union = shapely.union_all(list(regions.values()))
    assert union.area == pytest.approx(total, rel=1e-9)


@pytest.mark.parametrize("name", sorted(DRAWINGS))
def test_catalog_faces_match_geometry(name):
    drawing = example_drawing(name)
    pm = map_from_drawing(drawing)
    assert pm.euler_characteristic() == 2
    _check_faces_against_geometry(drawing, pm)
    for loop in drawing.loops.values():
        pm.check_loop(pm.loop_from_steps(loop))


@settings(max_examples=40, deadline=None)
@given(delaunay_maps())
def test_random_triangulations_match_geometry(case):
    drawing, pm = case
    assert pm.euler_characteristic() == 2
    # every bounded face of a triangulation is a triangle
    assert all(len(pm.faces[f]) == 3 for f in pm.bounded_faces)
    _check_faces_against_geometry(drawing, pm)


@settings(max_examples=40, deadline=None)
@given(delaunay_maps(), st.integers(0, 2**32 - 1))
def test_every_half_edge_on_one_face(case, seed):
    _, pm = case
    seen = [h for cyc in pm.faces for h in cyc]
    assert sorted(seen) == sorted(pm.half_edges)
    for f in pm.face_ids:
        boundary = pm.positive_boundary(f)
        assert all(pm.left_face(s) == f for s in boundary)
        assert all(pm.head(a) == pm.tail(b) for a, b in zip(boundary, boundary[1:] + boundary[:1]))


@settings(max_examples=40, deadline=None)
@given(delaunay_maps(), st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_loop_rotation_and_inverse_stay_closed(case, seed, length):
    _, pm = case
    rng = np.random.default_rng(seed)
    loop = random_closed_walk(pm, rng, length)
    pm.check_loop(loop)
    pm.check_loop(loop.inverse())
    for i in range(len(loop.steps)):
        pm.check_loop(loop.rotated(i, pm.tail(loop.steps[i])))


def test_figure_eight_frame():
    pm, loop, _ = standard_example("figure_eight")
    faces = example_faces("figure_eight", pm)
    (frame,) = crossing_frames(pm, loop)
    assert frame.chirality == "ccw"
    unb = pm.unbounded_face
    # F1 and F3 are the outside, F2 the second lobe, F4 the first
    assert frame.faces == (unb, faces["t2"], unb, faces["t1"])
    first, second = split_loop(loop, frame)
    assert first.steps + second.steps == loop.steps


def test_double_wound_frame():
    pm, loop, _ = standard_example("double_wound")
    faces = example_faces("double_wound", pm)
    (frame,) = crossing_frames(pm, loop)
    unb = pm.unbounded_face
    assert sorted(frame.faces) == sorted([faces["a"], faces["s"], faces["a"], unb])


@pytest.mark.parametrize("name, count", [
    ("simple", 0), ("figure_eight", 1), ("double_wound", 1), ("fig2_example", 4),
    ("lasso_example", 3),
])
def test_crossing_counts(name, count):
    pm, loop, _ = standard_example(name)
    report = crossing_report(pm, loop)
    assert len(report.frames) == count
    assert report.rejected == ()


def test_frame_rejects_bad_halves():
    pm, loop, _ = standard_example("figure_eight")
    rot = pm.rotation(0)
    with pytest.raises(WrongDegree):
        frame_from_halves(pm, 0, rot[0], rot[2], rot[1], rot[3])
    cw = frame_from_halves(pm, 0, rot[3], rot[2], rot[1], rot[0])
    assert cw.chirality == "cw"
    pm1, _, _ = standard_example("simple")
    with pytest.raises(WrongDegree):
        frame_from_halves(pm1, 0, *pm1.rotation(0), *pm1.rotation(0))


def test_non_straight_visit_is_rejected():
    pm, _, _ = standard_example("figure_eight")
    # going around the first lobe and then backwards around the second
    loop = pm.loop_from_steps([1, -2])
    report = crossing_report(pm, loop)
    assert report.frames == ()
    assert report.rejected[0][0] == 0


def test_build_map_guards():
    with pytest.raises(NonPlanar):
        build_map({0: [2, 4, 3, 5]}, {1: [2, 3], 2: [4, 5]}, 2)
    with pytest.raises(MalformedRotation):
        build_map({0: [2, 3]}, {1: [2, 4]}, 2)
    with pytest.raises(MalformedRotation):
        build_map({0: [2, 3], 1: [2, 4]}, {1: [2, 3]}, 2)
    with pytest.raises(Disconnected):
        build_map({0: [2, 3], 1: [4, 5]}, {1: [2, 3], 2: [4, 5]}, 2)


def test_loop_guards():
    pm, _, _ = standard_example("figure_eight")
    with pytest.raises(EmptyLoop):
        pm.check_loop(LoopWord(0, ()))
    with pytest.raises(NotOnGraph):
        pm.check_loop(LoopWord(0, (7,)))


def test_area_vector_defaults_and_guards():
    pm, _, _ = standard_example("fig2_example")
    areas = area_vector(pm)
    assert set(areas) == set(pm.bounded_faces)
    assert all(a == 1.0 for a in areas.values())


def test_subdivide_edge_keeps_faces():
    pm, loop, areas = standard_example("figure_eight")
    new, data = subdivide_edge(pm, 1)
    assert new.euler_characteristic() == 2
    assert len(new.face_ids) == len(pm.face_ids)
    new_loop = data.transform_loop(loop, new)
    new.check_loop(new_loop)
    assert len(new_loop.steps) == len(loop.steps) + 1
    assert data.transform_areas(areas) == {data.face_map[f]: a for f, a in areas.items()}


@pytest.mark.parametrize("name", ["figure_eight", "double_wound", "lasso_example"])
def test_genericize_builds_circle(name):
    pm, loop, _ = standard_example(name)
    for fr in crossing_frames(pm, loop):
        new, data = genericize(pm, fr.vertex)
        assert new.euler_characteristic() == 2
        assert len(data.circle_faces) == 4
        assert len(set(data.circle_faces)) == 4
        new_loop = data.transform_loop(loop, new)
        new.check_loop(new_loop)
        frames = {f.vertex for f in crossing_frames(new, new_loop)}
        assert fr.vertex in frames
        (generic,) = [f for f in crossing_frames(new, new_loop) if f.vertex == fr.vertex]
        # after the surgery the four sectors at the crossing are distinct circle faces
        assert set(generic.faces) == set(data.circle_faces)


def test_reduce_subloop_merges_faces():
    pm, loop, areas = standard_example("fig2_example", F1=0.3, F2=0.5, F3=0.7, F4=1.1, kink=0.2)
    frame = next(f for f in crossing_frames(pm, loop) if f.vertex == loop.base)
    for sub in split_loop(loop, frame):
        child, child_loop, merge = reduce_subloop(pm, sub)
        child.check_loop(child_loop)
        merged = merge.merge_areas(areas)
        assert set(merged) == set(child.bounded_faces)
        # merging only adds areas together
        assert sum(merged.values()) <= sum(areas.values()) + 1e-12
        assert crossing_report(child, child_loop).rejected == ()


@settings(max_examples=25, deadline=None)
@given(delaunay_maps(max_points=8), st.integers(0, 2**32 - 1))
def test_relabelled_map_keeps_structure(case, seed):
    _, pm = case
    rng = np.random.default_rng(seed)
    loop = random_closed_walk(pm, rng, 6)
    new, new_loop, face_map = relabel(pm, loop, rng)
    new.check_loop(new_loop)
    assert face_map[pm.unbounded_face] == new.unbounded_face
    for f in pm.face_ids:
        assert len(new.faces[face_map[f]]) == len(pm.faces[f])
    assert len(crossing_frames(new, new_loop)) == len(crossing_frames(pm, loop))
