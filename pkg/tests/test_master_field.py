from math import exp

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strategies import delaunay_maps, random_closed_walk, relabel
from ymloops.errors import InconsistentSystem, NonConvergent, UnderdeterminedSystem
from ymloops.master_field import canonical_key, master_value, mc_oracle
from ymloops.mm_verify import face_coefficients
from ymloops.planar_map import (
    crossing_frames, example_faces, reduce_subloop, split_loop, standard_example,
)

# Values frozen from the crossing-equation solver after agreeing with the
# N=128 Monte Carlo estimate (16 samples) to within 2 standard errors.
FROZEN = {
    "fig2_example": 0.13397261382771414,
    "lasso_example": 0.22088349810760977,
}


@pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
def test_simple_loop(t):
    pm, loop, areas = standard_example("simple", t=t)
    res = master_value(pm, loop, areas)
    assert res.real == pytest.approx(exp(-t / 2), abs=1e-10)
    face = example_faces("simple", pm)["t"]
    assert res.derivative[face] == pytest.approx(-0.5 * res.real)


def test_figure_eight_derivatives():
    pm, loop, areas = standard_example("figure_eight", t1=0.7, t2=1.6)
    res = master_value(pm, loop, areas)
    for f in pm.bounded_faces:
        assert res.derivative[f].real == pytest.approx(-0.5 * res.real, abs=1e-8)
    assert not res.imag_flag


@pytest.mark.parametrize("t", [0.4, 1.0, 1.7])
def test_double_wound_zero_annulus(t):
    pm, loop, areas = standard_example("double_wound", s=t, a=0.0)
    assert master_value(pm, loop, areas).real == pytest.approx(exp(-t) * (1 - t), abs=1e-8)


@pytest.mark.parametrize("name", sorted(FROZEN))
def test_frozen_values(name):
    pm, loop, areas = standard_example(name)
    assert master_value(pm, loop, areas).real == pytest.approx(FROZEN[name], abs=1e-8)


@pytest.mark.parametrize("name", sorted(FROZEN))
def test_frozen_values_against_large_n(name):
    pm, loop, areas = standard_example(name)
    mc = mc_oracle(pm, loop, areas, N=128, samples=16, seed=1)
    assert abs(FROZEN[name] - mc.value) <= 3 * (mc.stderr + 0.02)


def test_fig2_depth_and_memo():
    pm, loop, areas = standard_example("fig2_example")
    res = master_value(pm, loop, areas)
    assert res.depth == 2
    assert res.memo["hits"] > 0
    assert res.diagnostics["rank"] == len(pm.bounded_faces)


@pytest.mark.parametrize("name", ["fig2_example", "lasso_example", "double_wound"])
def test_root_satisfies_crossing_equations(name):
    # the returned derivatives solve each crossing row with independently
    # computed sub-loop values
    pm, loop, areas = standard_example(name)
    res = master_value(pm, loop, areas)
    for frame in crossing_frames(pm, loop):
        lhs = sum(c * res.derivative[f] for f, c in face_coefficients(pm, frame).items())
        parts = []
        for sub in split_loop(loop, frame):
            child, child_loop, merge = reduce_subloop(pm, sub)
            parts.append(master_value(child, child_loop, merge.merge_areas(areas)).real)
        assert lhs.real == pytest.approx(parts[0] * parts[1], abs=1e-7)


def test_zero_areas():
    pm, loop, areas = standard_example("fig2_example")
    res = master_value(pm, loop, {f: 0.0 for f in areas})
    assert res.value == 1.0


def test_negative_area_rejected():
    pm, loop, areas = standard_example("simple")
    with pytest.raises(ValueError):
        master_value(pm, loop, {f: -1.0 for f in areas})


def test_non_simple_visit_is_underdetermined():
    pm, _, areas = standard_example("figure_eight")
    with pytest.raises(UnderdeterminedSystem):
        master_value(pm, pm.loop_from_steps([1, -2]), areas)


def test_too_few_steps_do_not_converge():
    pm, loop, areas = standard_example("double_wound", s=3.0, a=0.0)
    with pytest.raises(NonConvergent):
        master_value(pm, loop, areas, steps=4)


def test_coarse_steps_break_overdetermined_rows():
    # with more rows than faces, a coarse integration leaves the rows inconsistent
    pm, loop, areas = standard_example("lasso_example", F1=3.0, F2=3.0, F3=3.0, F4=3.0)
    with pytest.raises(InconsistentSystem):
        master_value(pm, loop, areas, steps=4)


def test_key_ignores_loop_start():
    pm, loop, areas = standard_example("fig2_example")
    key, _ = canonical_key(pm, loop, areas)
    for i in range(len(loop.steps)):
        rotated = loop.rotated(i, pm.tail(loop.steps[i]))
        assert canonical_key(pm, rotated, areas)[0] == key


def test_key_separates_different_loops():
    keys = set()
    for name in ("simple", "figure_eight", "double_wound", "fig2_example", "lasso_example"):
        pm, loop, _ = standard_example(name)
        keys.add(canonical_key(pm, loop)[0])
    assert len(keys) == 5


@settings(max_examples=30, deadline=None)
@given(delaunay_maps(max_points=8), st.integers(0, 2**32 - 1))
def test_key_ignores_relabelling(case, seed):
    _, pm = case
    rng = np.random.default_rng(seed)
    loop = random_closed_walk(pm, rng, 7)
    areas = {f: float(rng.uniform(0.1, 2.0)) for f in pm.bounded_faces}
    new, new_loop, face_map = relabel(pm, loop, rng)
    new_areas = {face_map[f]: a for f, a in areas.items()}
    key, faces = canonical_key(pm, loop, areas)
    new_key, new_faces = canonical_key(new, new_loop, new_areas)
    assert key == new_key
    assert [areas[f] for f in faces] == [new_areas[f] for f in new_faces]
