"""Large-N Wilson loop values from the crossing equations.

The value of a loop is integrated along the ray ``s * areas`` for ``s`` in
``[0, 1]`` starting from 1.  At each point the face-area derivatives come from
a linear system: one row per crossing (alternating signs around the crossing,
right side the product of the two sub-loop values) and one unit row per
bounded face that shares a once-traversed edge with the unbounded face
(right side ``-value / 2``).  Sub-loops are reduced to their own maps and
integrated jointly, since their areas scale with the same ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, exp
from typing import Mapping

import numpy as np

from .errors import InconsistentSystem, NonConvergent, UnderdeterminedSystem
from .group_core import GroupSpec
from .mm_verify import face_coefficients, shared_unbounded_edges
from .planar_map import LoopWord, PlanarMap, crossing_report, reduce_subloop, split_loop
from .ym_measure import WilsonEstimate, wilson_estimate

DEFAULT_STEPS = 256
CONVERGENCE_TOL = 1e-8
CONSISTENCY_TOL = 1e-8
IMAG_TOL = 1e-6


# ---------------------------------------------------------------------------
# canonical keys

def _walk_labels(pm: PlanarMap, loop: LoopWord, start: int):
    """Relabel halves, edges and vertices in the order a walk from ``start`` meets them."""
    n = len(loop.steps)
    half = {}
    vertex = {}
    word = []
    next_edge = 0

    def label_vertex(v):
        if v not in vertex:
            vertex[v] = len(vertex)

    for i in range(n):
        s = loop.steps[(start + i) % n]
        label_vertex(pm.tail(s))
        t, h = pm.tail_half(s), pm.head_half(s)
        if t not in half:
            half[t], half[h] = 2 * next_edge, 2 * next_edge + 1
            next_edge += 1
        word.append(half[t] // 2 + 1 if half[t] % 2 == 0 else -(half[t] // 2 + 1))
        label_vertex(pm.head(s))
    # edges the loop never uses, reached by scanning rotations from labelled vertices
    queue = sorted(vertex, key=vertex.get)
    qi = 0
    while qi < len(queue):
        v = queue[qi]
        qi += 1
        rot = pm.rotation(v)
        labelled = [i for i, h in enumerate(rot) if h in half]
        first = min(labelled, key=lambda i: half[rot[i]]) if labelled else 0
        for j in range(len(rot)):
            h = rot[(first + j) % len(rot)]
            if h in half:
                continue
            o = pm.opp(h)
            half[h], half[o] = 2 * next_edge, 2 * next_edge + 1
            next_edge += 1
            w = pm.vertex_of(o)
            if w not in vertex:
                label_vertex(w)
                queue.append(w)
    return half, vertex, tuple(word)


def _encode(pm: PlanarMap, half, vertex, word):
    rotations = [None] * len(vertex)
    for v, rot in pm.rotations:
        labels = [half[h] for h in rot]
        i = labels.index(min(labels))
        rotations[vertex[v]] = tuple(labels[i:] + labels[:i])
    faces = sorted(pm.face_ids, key=lambda f: min(half[h] for h in pm.faces[f]))
    unbounded = min(half[h] for h in pm.faces[pm.unbounded_face])
    key = (len(vertex), len(pm.edges), tuple(rotations), word, unbounded)
    return key, [f for f in faces if f != pm.unbounded_face]


def canonical_key(pm: PlanarMap, loop: LoopWord, areas: Mapping[int, float] | None = None):
    """Key invariant under relabelling and cyclic rotation of the loop.

    Returns ``(key, faces)`` where ``faces`` lists the bounded faces in the
    canonical order; when several rotations give the same key the one with
    the smallest area tuple is used, so equal keys with equal area tuples
    describe the same loop functional.
    """
    best = None
    for start in range(len(loop.steps)):
        half, vertex, word = _walk_labels(pm, loop, start)
        key, faces = _encode(pm, half, vertex, word)
        rank = (key, tuple(float(areas[f]) for f in faces) if areas is not None else ())
        if best is None or rank < best[0]:
            best = (rank, faces)
    return best[0][0], best[1]


# ---------------------------------------------------------------------------
# recursion graph

@dataclass
class _Node:
    pm: PlanarMap
    loop: LoopWord
    areas: dict
    faces: list                 # bounded faces, column order
    leaf_area: float | None     # set for a loop around a single face
    rows: list = field(default_factory=list)       # (coefficient vector, kind, payload)
    depth: int = 0


@dataclass(frozen=True)
class MasterFieldResult:
    """Value at the requested areas with the solved area derivatives."""

    value: complex
    derivative: dict
    imag_flag: bool
    diagnostics: dict
    depth: int
    memo: dict

    @property
    def real(self) -> float:
        return float(np.real(self.value))


class _Graph:
    def __init__(self):
        self.nodes: dict = {}
        self.hits = 0

    def add(self, pm: PlanarMap, loop: LoopWord, areas: Mapping[int, float]):
        key, faces = canonical_key(pm, loop, areas)
        node_id = (key, tuple(float(areas[f]) for f in faces))
        if node_id in self.nodes:
            self.hits += 1
            return node_id
        report = crossing_report(pm, loop)
        if report.rejected:
            v, why = report.rejected[0]
            raise UnderdeterminedSystem(f"loop {loop.steps} has a non-simple visit at {v}: {why}")
        frames = report.frames
        uses = {}
        for s in loop.steps:
            uses[abs(s)] = uses.get(abs(s), 0) + 1
        leaf = None
        if not frames and len(faces) == 1 and all(c == 1 for c in uses.values()):
            leaf = float(areas[faces[0]])
        node = _Node(pm, loop, {f: float(areas[f]) for f in faces}, faces, leaf)
        self.nodes[node_id] = node
        if leaf is not None:
            return node_id
        column = {f: i for i, f in enumerate(faces)}
        for fr in frames:
            vec = np.zeros(len(faces))
            for f, c in face_coefficients(pm, fr).items():
                vec[column[f]] += c
            children = []
            for sub in split_loop(loop, fr):
                child_map, child_loop, merge = reduce_subloop(pm, sub)
                children.append(self.add(child_map, child_loop, merge.merge_areas(areas)))
            node.rows.append((vec, "crossing", tuple(children)))
        for f in faces:
            if any(uses.get(k, 0) == 1 for k in shared_unbounded_edges(pm, f)):
                vec = np.zeros(len(faces))
                vec[column[f]] = 1.0
                node.rows.append((vec, "unbounded", None))
        node.depth = 1 + max((self.nodes[c].depth for _, kind, ch in node.rows
                              if kind == "crossing" for c in ch), default=0)
        if node.rows:
            matrix = np.array([r[0] for r in node.rows])
            rank = np.linalg.matrix_rank(matrix)
        else:
            rank = 0
        if rank < len(faces):
            raise UnderdeterminedSystem(
                f"loop {loop.steps}: {len(node.rows)} equations of rank {rank} "
                f"for {len(faces)} bounded faces")
        return node_id


def _solve_node(node: _Node, value: complex, values: Mapping, s: float):
    matrix = np.array([r[0] for r in node.rows])
    rhs = np.empty(len(node.rows), dtype=complex)
    for i, (_, kind, children) in enumerate(node.rows):
        if kind == "crossing":
            rhs[i] = values[children[0]] * values[children[1]]
        else:
            rhs[i] = -0.5 * value
    grad, *_ = np.linalg.lstsq(matrix, rhs, rcond=None)
    residual = float(np.max(np.abs(matrix @ grad - rhs))) if len(rhs) else 0.0
    return grad, residual


def _integrate(graph: _Graph, root, steps: int, check: bool):
    order = sorted(graph.nodes, key=lambda k: graph.nodes[k].depth)
    active = [k for k in order if graph.nodes[k].leaf_area is None]
    index = {k: i for i, k in enumerate(active)}
    direction = {k: np.array([graph.nodes[k].areas[f] for f in graph.nodes[k].faces])
                 for k in active}
    worst = [0.0]

    def values_at(s, state):
        vals = {}
        for k in order:
            node = graph.nodes[k]
            vals[k] = exp(-0.5 * s * node.leaf_area) if node.leaf_area is not None \
                else state[index[k]]
        return vals

    def rhs(s, state, at_step):
        vals = values_at(s, state)
        out = np.empty(len(active), dtype=complex)
        for k in active:
            grad, res = _solve_node(graph.nodes[k], vals[k], vals, s)
            if at_step and check:
                worst[0] = max(worst[0], res)
                if res > CONSISTENCY_TOL:
                    raise InconsistentSystem(
                        f"loop {graph.nodes[k].loop.steps}: residual {res:.2e} at s={s:.4f}")
            out[index[k]] = direction[k] @ grad
        return out

    state = np.ones(len(active), dtype=complex)
    dt = 1.0 / steps
    for i in range(steps):
        s = i * dt
        k1 = rhs(s, state, True)
        k2 = rhs(s + dt / 2, state + dt / 2 * k1, False)
        k3 = rhs(s + dt / 2, state + dt / 2 * k2, False)
        k4 = rhs(s + dt, state + dt * k3, False)
        state = state + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    rhs(1.0, state, True)
    vals = values_at(1.0, state)
    return vals, worst[0]


def master_value(pm: PlanarMap, loop: LoopWord, areas: Mapping[int, float],
                 steps: int = DEFAULT_STEPS, check_convergence: bool = True) -> MasterFieldResult:
    """Large-N value of ``tr hol(loop)`` at the given face areas."""
    pm.check_loop(loop)
    areas = {f: float(areas[f]) for f in pm.bounded_faces}
    if any(a < 0 for a in areas.values()):
        raise ValueError("areas must be nonnegative")
    graph = _Graph()
    root = graph.add(pm, loop, areas)
    node = graph.nodes[root]
    if all(a == 0.0 for a in areas.values()):
        return MasterFieldResult(1.0 + 0j, {}, False, {"steps": 0}, node.depth,
                                 {"nodes": len(graph.nodes), "hits": graph.hits})
    vals, worst = _integrate(graph, root, steps, True)
    delta = 0.0
    if check_convergence:
        fine, _ = _integrate(graph, root, 2 * steps, False)
        delta = abs(fine[root] - vals[root])
        if delta > CONVERGENCE_TOL:
            raise NonConvergent(f"halving the step moved the value by {delta:.2e}")
    value = complex(vals[root])
    if node.leaf_area is not None:
        derivative = {node.faces[0]: -0.5 * value.real}
        rank = 1
        rows = 0
    else:
        grad, _ = _solve_node(node, vals[root], vals, 1.0)
        derivative = {f: complex(g) for f, g in zip(node.faces, grad)}
        rows = len(node.rows)
        rank = int(np.linalg.matrix_rank(np.array([r[0] for r in node.rows])))
    diagnostics = {"steps": steps, "halving_delta": float(delta),
                   "max_consistency_residual": worst, "rows": rows, "rank": rank,
                   "imag": float(value.imag)}
    return MasterFieldResult(value, derivative, abs(value.imag) > IMAG_TOL, diagnostics,
                             node.depth, {"nodes": len(graph.nodes), "hits": graph.hits})


def mc_oracle(pm: PlanarMap, loop: LoopWord, areas: Mapping[int, float], N: int = 512,
              samples: int = 4, seed: int = 0, steps: int | None = None) -> WilsonEstimate:
    """Large-N Monte Carlo estimate of ``tr hol(loop)`` for cross-checks.

    Fluctuations of the trace shrink like ``1/N``, so a handful of samples
    suffice.  The walk uses ``max(8, ceil(16 t))`` steps for the largest area
    unless ``steps`` is given; its relative bias is about ``t^2 / (24 m)``.
    """
    if steps is None:
        steps = max(8, ceil(16 * max(areas.values(), default=0.0)))
    return wilson_estimate(pm, areas, [loop], GroupSpec(N), max(samples, 2), seed=seed,
                           steps=steps, chunk=1)
