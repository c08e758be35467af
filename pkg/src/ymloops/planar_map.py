"""Combinatorial planar maps, loop words, crossings and surgery.

A map is a rotation system: every vertex lists its half-edges in
counterclockwise order, and every edge is a pair ``(h0, h1)`` of half-edges.
Traversing edge ``k`` positively (signed id ``+k``) leaves the vertex of
``h0`` and arrives at the vertex of ``h1``; ``-k`` goes the other way.

Faces are traced with the rule ``succ(h) = rot_succ(opp(h))``, which keeps the
face on the right of every traced half-edge.  Face ids are ``0..F-1`` in order
of the smallest half-edge id on the boundary.  A marker half-edge picks the
unbounded face.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import atan2, cos, pi, sin
from typing import Iterable, Mapping, Sequence

from .errors import (
    Disconnected,
    EmptyLoop,
    MalformedRotation,
    NonPlanar,
    NotOnGraph,
    UnknownName,
    WrongDegree,
)


@dataclass(frozen=True)
class LoopWord:
    """A closed walk given by its base vertex and signed edge ids."""

    base: int
    steps: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(int(s) for s in self.steps))

    def __len__(self):
        return len(self.steps)

    def rotated(self, start: int, base: int) -> "LoopWord":
        """The same cyclic word starting at step ``start`` (based at ``base``)."""
        n = len(self.steps)
        start %= n
        return LoopWord(base, self.steps[start:] + self.steps[:start])

    def inverse(self) -> "LoopWord":
        return LoopWord(self.base, tuple(-s for s in reversed(self.steps)))


@dataclass(frozen=True)
class PlanarMap:
    """Immutable rotation system with traced faces.

    Build instances with :func:`build_map`, which validates the input.
    """

    rotations: tuple[tuple[int, tuple[int, ...]], ...]
    edges: tuple[tuple[int, tuple[int, int]], ...]
    faces: tuple[tuple[int, ...], ...]
    unbounded_face: int
    _vertex_of: dict = field(init=False, repr=False, compare=False)
    _rot_index: dict = field(init=False, repr=False, compare=False)
    _rotation: dict = field(init=False, repr=False, compare=False)
    _edge_of: dict = field(init=False, repr=False, compare=False)
    _pair: dict = field(init=False, repr=False, compare=False)
    _face_of: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vertex_of, rot_index, rotation = {}, {}, {}
        for v, rot in self.rotations:
            rotation[v] = rot
            for i, h in enumerate(rot):
                vertex_of[h] = v
                rot_index[h] = i
        edge_of, pair = {}, {}
        for k, (h0, h1) in self.edges:
            pair[k] = (h0, h1)
            edge_of[h0] = (k, 0)
            edge_of[h1] = (k, 1)
        face_of = {h: f for f, cyc in enumerate(self.faces) for h in cyc}
        for name, val in [("_vertex_of", vertex_of), ("_rot_index", rot_index),
                          ("_rotation", rotation), ("_edge_of", edge_of),
                          ("_pair", pair), ("_face_of", face_of)]:
            object.__setattr__(self, name, val)

    # -- basic lookups -----------------------------------------------------
    @property
    def vertices(self) -> list[int]:
        return [v for v, _ in self.rotations]

    @property
    def edge_ids(self) -> list[int]:
        return [k for k, _ in self.edges]

    @property
    def face_ids(self) -> list[int]:
        return list(range(len(self.faces)))

    @property
    def bounded_faces(self) -> list[int]:
        return [f for f in range(len(self.faces)) if f != self.unbounded_face]

    @property
    def half_edges(self) -> list[int]:
        return sorted(self._vertex_of)

    def rotation(self, v: int) -> tuple[int, ...]:
        return self._rotation[v]

    def degree(self, v: int) -> int:
        return len(self._rotation[v])

    def edge_pair(self, k: int) -> tuple[int, int]:
        return self._pair[k]

    def has_edge(self, k: int) -> bool:
        return k in self._pair

    def vertex_of(self, h: int) -> int:
        return self._vertex_of[h]

    def opp(self, h: int) -> int:
        k, side = self._edge_of[h]
        return self._pair[k][1 - side]

    def rot_succ(self, h: int) -> int:
        rot = self._rotation[self._vertex_of[h]]
        return rot[(self._rot_index[h] + 1) % len(rot)]

    def rot_pred(self, h: int) -> int:
        rot = self._rotation[self._vertex_of[h]]
        return rot[(self._rot_index[h] - 1) % len(rot)]

    def rot_index(self, h: int) -> int:
        return self._rot_index[h]

    def face_of(self, h: int) -> int:
        """Face on the right of half-edge ``h`` read as leaving its vertex."""
        return self._face_of[h]

    def signed_of(self, h: int) -> int:
        """Signed edge that leaves the vertex of ``h`` along ``h``."""
        k, side = self._edge_of[h]
        return k if side == 0 else -k

    # -- signed edges --------------------------------------------------------
    def tail_half(self, s: int) -> int:
        h0, h1 = self._pair[abs(s)]
        return h0 if s > 0 else h1

    def head_half(self, s: int) -> int:
        h0, h1 = self._pair[abs(s)]
        return h1 if s > 0 else h0

    def tail(self, s: int) -> int:
        return self._vertex_of[self.tail_half(s)]

    def head(self, s: int) -> int:
        return self._vertex_of[self.head_half(s)]

    def left_face(self, s: int) -> int:
        return self._face_of[self.head_half(s)]

    def right_face(self, s: int) -> int:
        return self._face_of[self.tail_half(s)]

    def positive_boundary(self, f: int) -> tuple[int, ...]:
        """Signed edges around face ``f`` with the face on the left."""
        return tuple(-self.signed_of(h) for h in reversed(self.faces[f]))

    # -- loops -----------------------------------------------------------------
    def check_loop(self, loop: LoopWord) -> None:
        """Raise unless ``loop`` is a nonempty closed walk on this map."""
        if len(loop.steps) == 0:
            raise EmptyLoop("loop word has no steps")
        for s in loop.steps:
            if s == 0 or abs(s) not in self._pair:
                raise NotOnGraph(f"edge {s} is not an edge of the map")
        at = loop.base
        if at not in self._rotation:
            raise NotOnGraph(f"base vertex {at} is not a vertex of the map")
        for i, s in enumerate(loop.steps):
            if self.tail(s) != at:
                raise NotOnGraph(f"step {i} ({s}) does not start at vertex {at}")
            at = self.head(s)
        if at != loop.base:
            raise NotOnGraph(f"loop ends at {at}, not at its base {loop.base}")

    def loop_from_steps(self, steps: Sequence[int]) -> LoopWord:
        if len(steps) == 0:
            raise EmptyLoop("loop word has no steps")
        if abs(steps[0]) not in self._pair:
            raise NotOnGraph(f"edge {steps[0]} is not an edge of the map")
        loop = LoopWord(self.tail(steps[0]), tuple(steps))
        self.check_loop(loop)
        return loop

    def euler_characteristic(self) -> int:
        return len(self.rotations) - len(self.edges) + len(self.faces)


def build_map(vertices: Mapping[int, Sequence[int]], edges: Mapping[int, Sequence[int]],
              unbounded_marker: int) -> PlanarMap:
    """Validate a rotation system, trace its faces and pick the unbounded face.

    ``vertices`` maps vertex id to its counterclockwise rotation of half-edge
    ids; ``edges`` maps positive edge id to ``(h0, h1)``.
    """
    if not vertices:
        raise MalformedRotation("a map needs at least one vertex")
    seen: dict[int, int] = {}
    for v, rot in vertices.items():
        for h in rot:
            if h in seen:
                raise MalformedRotation(f"half-edge {h} appears at vertices {seen[h]} and {v}")
            seen[h] = v
    paired: dict[int, int] = {}
    for k, pair in edges.items():
        if int(k) != k or k <= 0:
            raise MalformedRotation(f"edge ids must be positive integers, got {k!r}")
        if len(pair) != 2 or pair[0] == pair[1]:
            raise MalformedRotation(f"edge {k} must pair two distinct half-edges")
        for h in pair:
            if h in paired:
                raise MalformedRotation(f"half-edge {h} belongs to edges {paired[h]} and {k}")
            paired[h] = k
    missing = set(seen) ^ set(paired)
    if missing:
        raise MalformedRotation(f"half-edges not both in a rotation and an edge: {sorted(missing)}")
    if not edges:
        raise MalformedRotation("a map needs at least one edge")
    if unbounded_marker not in seen:
        raise MalformedRotation(f"unbounded marker {unbounded_marker} is not a half-edge")

    rotations = tuple(sorted((int(v), tuple(int(h) for h in rot)) for v, rot in vertices.items()))
    edge_list = tuple(sorted((int(k), (int(p[0]), int(p[1]))) for k, p in edges.items()))
    for v, rot in rotations:
        if not rot:
            raise Disconnected(f"vertex {v} is isolated")
    _check_connected(rotations, edge_list)

    draft = PlanarMap(rotations, edge_list, (), 0)
    faces = _trace_faces(draft)
    face_of = {h: f for f, cyc in enumerate(faces) for h in cyc}
    pm = PlanarMap(rotations, edge_list, faces, face_of[unbounded_marker])
    chi = pm.euler_characteristic()
    if chi != 2:
        raise NonPlanar(f"V - E + F = {chi}, expected 2")
    return pm


def _check_connected(rotations, edge_list):
    vertex_of = {h: v for v, rot in rotations for h in rot}
    adj: dict[int, set[int]] = {v: set() for v, _ in rotations}
    for _, (h0, h1) in edge_list:
        a, b = vertex_of[h0], vertex_of[h1]
        adj[a].add(b)
        adj[b].add(a)
    start = rotations[0][0]
    stack, reached = [start], {start}
    while stack:
        for w in adj[stack.pop()]:
            if w not in reached:
                reached.add(w)
                stack.append(w)
    if len(reached) != len(adj):
        raise Disconnected(f"vertices {sorted(set(adj) - reached)} are not reachable")


def _trace_faces(pm: PlanarMap) -> tuple[tuple[int, ...], ...]:
    cycles = []
    done: set[int] = set()
    for h in pm.half_edges:
        if h in done:
            continue
        cyc, x = [], h
        while x not in done:
            done.add(x)
            cyc.append(x)
            x = pm.rot_succ(pm.opp(x))
        if x != h:
            raise MalformedRotation("face tracing did not close up")
        cycles.append(tuple(cyc))
    # each cycle starts at its smallest half-edge already, since we scan in order
    cycles.sort(key=min)
    return tuple(cycles)


def area_vector(pm: PlanarMap, areas: Mapping[int, float] | None = None,
                default: float = 1.0) -> dict[int, float]:
    """Areas indexed by exactly the bounded faces, filled with ``default``."""
    areas = dict(areas or {})
    out = {}
    for f in pm.bounded_faces:
        a = float(areas.pop(f, default))
        if a < 0:
            raise ValueError(f"face {f} has negative area {a}")
        out[f] = a
    if areas:
        raise ValueError(f"areas given for faces that are not bounded faces: {sorted(areas)}")
    return out


# ---------------------------------------------------------------------------
# crossings

@dataclass(frozen=True)
class CrossingFrame:
    """Labels of a simple crossing.

    ``halves`` are the outgoing half-edges e1..e4 at ``vertex`` and ``edges``
    the same directions as signed edge ids.  ``faces[i]`` lies between e_{i+1}
    and e_{i+2} (so ``faces[0]`` is F1, between e1 and e2).  ``start`` is the
    loop-word index of the step leaving along e1 and ``s0`` the index of the
    step leaving along e2.  ``chirality`` is ``"ccw"`` when e1, e2, e3, e4 run
    counterclockwise in the rotation.
    """

    vertex: int
    halves: tuple[int, int, int, int]
    edges: tuple[int, int, int, int]
    faces: tuple[int, int, int, int]
    start: int
    s0: int
    chirality: str


@dataclass(frozen=True)
class CrossingReport:
    frames: tuple[CrossingFrame, ...]
    rejected: tuple[tuple[int, str], ...]


def _visits(pm: PlanarMap, loop: LoopWord):
    """Per vertex: list of (index, in-half, out-half) for each pass."""
    n = len(loop.steps)
    out: dict[int, list[tuple[int, int, int]]] = {}
    for i in range(n):
        prev, nxt = loop.steps[i - 1], loop.steps[i]
        v = pm.tail(nxt)
        out.setdefault(v, []).append((i, pm.head_half(prev), pm.tail_half(nxt)))
    return out


def frame_from_halves(pm: PlanarMap, vertex: int, e1: int, e2: int, e3: int, e4: int,
                      start: int = 0, s0: int = 0) -> CrossingFrame:
    """Label a 4-valent vertex from its outgoing half-edges e1..e4."""
    rot = pm.rotation(vertex)
    if len(rot) != 4:
        raise WrongDegree(f"vertex {vertex} has {len(rot)} half-edges, need 4")
    halves = (e1, e2, e3, e4)
    if sorted(halves) != sorted(rot):
        raise WrongDegree(f"half-edges {halves} are not the four half-edges at {vertex}")
    idx = [pm.rot_index(h) for h in halves]
    if all((idx[(i + 1) % 4] - idx[i]) % 4 == 1 for i in range(4)):
        chirality = "ccw"
        faces = tuple(pm.face_of(halves[(i + 1) % 4]) for i in range(4))
    elif all((idx[(i + 1) % 4] - idx[i]) % 4 == 3 for i in range(4)):
        chirality = "cw"
        faces = tuple(pm.face_of(halves[i]) for i in range(4))
    else:
        raise WrongDegree(f"half-edges {halves} are not in cyclic order at {vertex}")
    edges = tuple(pm.signed_of(h) for h in halves)
    return CrossingFrame(vertex, halves, edges, faces, start, s0, chirality)


def crossing_report(pm: PlanarMap, loop: LoopWord) -> CrossingReport:
    """Frames for every simple crossing, plus vertices that fail the test."""
    pm.check_loop(loop)
    frames, rejected = [], []
    for v, visits in sorted(_visits(pm, loop).items()):
        if len(visits) < 2:
            continue
        if pm.degree(v) != 4:
            rejected.append((v, f"visited {len(visits)} times at degree {pm.degree(v)}"))
            continue
        if len(visits) != 2:
            rejected.append((v, f"visited {len(visits)} times"))
            continue
        (i1, in1, out1), (i2, in2, out2) = visits
        straight = all((pm.rot_index(o) - pm.rot_index(i)) % 4 == 2
                       for i, o in ((in1, out1), (in2, out2)))
        if not straight or len({in1, out1, in2, out2}) != 4:
            rejected.append((v, "passes are not straight across"))
            continue
        frames.append(frame_from_halves(pm, v, out1, out2, in1, in2, start=i1, s0=i2))
    return CrossingReport(tuple(frames), tuple(rejected))


def crossing_frames(pm: PlanarMap, loop: LoopWord) -> list[CrossingFrame]:
    """All simple crossings of ``loop``, labelled e1..e4 / F1..F4."""
    return list(crossing_report(pm, loop).frames)


def split_loop(loop: LoopWord, frame: CrossingFrame) -> tuple[LoopWord, LoopWord]:
    """Cut ``loop`` at its crossing into the part up to the first return and the rest."""
    n = len(loop.steps)
    word = loop.steps[frame.start:] + loop.steps[:frame.start]
    cut = (frame.s0 - frame.start) % n
    return LoopWord(frame.vertex, word[:cut]), LoopWord(frame.vertex, word[cut:])


def based_at(loop: LoopWord, frame: CrossingFrame) -> LoopWord:
    """``loop`` rotated to begin with the step along e1."""
    return loop.rotated(frame.start, frame.vertex)


# ---------------------------------------------------------------------------
# sub-loop reduction

@dataclass(frozen=True)
class FaceMerge:
    """Parent face -> child face, with area aggregation."""

    parent_to_child: Mapping[int, int]
    child_unbounded: int

    def merge_areas(self, parent_areas: Mapping[int, float]) -> dict[int, float]:
        """Sum parent areas into the child's bounded faces."""
        out: dict[int, float] = {}
        for pf, cf in self.parent_to_child.items():
            if cf == self.child_unbounded:
                continue
            out[cf] = out.get(cf, 0.0) + float(parent_areas.get(pf, 0.0))
        return out


def _free_reduce(word: Iterable[int]) -> list[int]:
    out: list[int] = []
    for s in word:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(s)
    return out


def reduce_subloop(pm: PlanarMap, sub: LoopWord) -> tuple[PlanarMap, LoopWord, FaceMerge]:
    """Restrict the map to the edges ``sub`` uses and smooth degree-2 vertices.

    Smoothing merges the two arcs at a degree-2 vertex into one edge, keeping
    the id of the incoming arc; its edge variable is the product of the two
    arc variables.  Vertices other than the base are smoothed first.
    """
    if len(sub.steps) == 0:
        raise EmptyLoop("cannot reduce an empty loop")
    pm.check_loop(sub)
    kept = {abs(s) for s in sub.steps}

    # union-find over parent faces across deleted edges
    parent = list(range(len(pm.faces)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k in pm.edge_ids:
        if k not in kept:
            a, b = pm.face_of(pm.edge_pair(k)[0]), pm.face_of(pm.edge_pair(k)[1])
            parent[find(a)] = find(b)

    rotations = {}
    for v, rot in pm.rotations:
        r = [h for h in rot if abs(pm.signed_of(h)) in kept]
        if r:
            rotations[v] = r
    edges = {k: pm.edge_pair(k) for k in kept}
    half_vertex = {h: v for v, rot in rotations.items() for h in rot}
    word = list(sub.steps)

    def tail_half(s):
        return edges[abs(s)][0] if s > 0 else edges[abs(s)][1]

    def head_half(s):
        return edges[abs(s)][1] if s > 0 else edges[abs(s)][0]

    def signed_from_half(h):
        for k, (h0, h1) in edges.items():
            if h == h0:
                return k
            if h == h1:
                return -k
        raise KeyError(h)

    changed = True
    while changed:
        changed = False
        candidates = sorted(rotations, key=lambda v: (v == sub.base, v))
        for w in candidates:
            rot = rotations[w]
            if len(rot) != 2 or len(rotations) == 1:
                continue
            sa_out, sb_out = signed_from_half(rot[0]), signed_from_half(rot[1])
            if abs(sa_out) == abs(sb_out):
                continue
            new_word = _smooth_word(word, -sa_out, sb_out)
            if new_word is None:
                continue
            sa, sb = -sa_out, sb_out  # sa arrives at w, sb leaves w
            t_half, h_half = tail_half(sa), head_half(sb)
            ka, kb = abs(sa), abs(sb)
            del edges[kb]
            edges[ka] = (t_half, h_half)
            del rotations[w]
            half_vertex.pop(rot[0])
            half_vertex.pop(rot[1])
            word = [ka if s == "+" else -ka if s == "-" else s for s in new_word]
            changed = True
            break

    marker = None
    cls_unb = find(pm.unbounded_face)
    for h in sorted(half_vertex):
        if find(pm.face_of(h)) == cls_unb:
            marker = h
            break
    child = build_map(rotations, edges, marker)
    base = child.tail(word[0])
    child_loop = LoopWord(base, tuple(word))
    child.check_loop(child_loop)

    cls_to_child: dict[int, int] = {}
    for h in sorted(half_vertex):
        cls_to_child.setdefault(find(pm.face_of(h)), child.face_of(h))
    mapping = {f: cls_to_child[find(f)] for f in pm.face_ids}
    return child, child_loop, FaceMerge(mapping, child.unbounded_face)


def _smooth_word(word, sa, sb):
    """Replace every pass (sa, sb) by '+' and (-sb, -sa) by '-' in a cyclic word.

    Returns ``None`` if some occurrence of either edge is not part of such a
    pass (then the vertex cannot be smoothed without changing the loop).
    """
    n = len(word)
    ka, kb = abs(sa), abs(sb)
    # rotate so that no pass wraps around the end
    shift = 0
    while shift < n and abs(word[shift]) == kb and abs(word[shift - 1]) == ka:
        shift += 1
    w = word[shift:] + word[:shift]
    out, i = [], 0
    while i < n:
        s = w[i]
        if s == sa and i + 1 < n and w[i + 1] == sb:
            out.append("+")
            i += 2
        elif s == -sb and i + 1 < n and w[i + 1] == -sa:
            out.append("-")
            i += 2
        elif abs(s) in (ka, kb):
            return None
        else:
            out.append(s)
            i += 1
    return out


# ---------------------------------------------------------------------------
# surgery

@dataclass(frozen=True)
class SurgeryData:
    """How an operation rewrote the map.

    ``edge_words[k]`` is the new signed-edge word replacing ``+k``;
    ``face_map`` sends each old face to the new face that keeps its area;
    ``new_faces`` lists faces created by the operation (area 0 by default);
    ``circle_faces[i]`` (genericize only) is the small face inside the sector
    between old half-edges ``rotation[i]`` and ``rotation[i+1]`` at the vertex.
    """

    edge_words: Mapping[int, tuple[int, ...]]
    face_map: Mapping[int, int]
    new_faces: tuple[int, ...] = ()
    circle_faces: tuple[int, ...] = ()
    circle_parent: Mapping[int, int] = field(default_factory=dict)
    new_vertices: tuple[int, ...] = ()

    def transform_word(self, steps: Sequence[int]) -> tuple[int, ...]:
        out: list[int] = []
        for s in steps:
            w = self.edge_words[abs(s)]
            out.extend(w if s > 0 else [-x for x in reversed(w)])
        return tuple(out)

    def transform_loop(self, loop: LoopWord, new_map: PlanarMap) -> LoopWord:
        steps = self.transform_word(loop.steps)
        return LoopWord(new_map.tail(steps[0]), steps)

    def transform_areas(self, areas: Mapping[int, float],
                        extra: Mapping[int, float] | None = None) -> dict[int, float]:
        out = {}
        for f, a in areas.items():
            out[self.face_map[f]] = float(a)
        for f in self.new_faces:
            out.setdefault(f, 0.0)
        for f, a in (extra or {}).items():
            out[f] = float(a)
        return out


def _next_ids(pm: PlanarMap):
    return (max(pm.vertices) + 1, max(pm.edge_ids) + 1, max(pm.half_edges) + 1)


def _rotation_dict(pm: PlanarMap):
    return {v: list(rot) for v, rot in pm.rotations}, {k: list(p) for k, p in pm.edges}


def subdivide_edge(pm: PlanarMap, k: int) -> tuple[PlanarMap, SurgeryData]:
    """Split edge ``k`` into ``k`` followed by a new edge through a new vertex."""
    if not pm.has_edge(k):
        raise NotOnGraph(f"edge {k} is not an edge of the map")
    nv, ne, nh = _next_ids(pm)
    rot, edges = _rotation_dict(pm)
    h0, h1 = pm.edge_pair(k)
    a, b = nh, nh + 1
    edges[k] = [h0, a]
    edges[ne] = [b, h1]
    rot[nv] = [a, b]
    marker = pm.faces[pm.unbounded_face][0]
    new = build_map(rot, edges, marker)
    words = {e: (e,) for e in pm.edge_ids}
    words[k] = (k, ne)
    face_map = {f: new.face_of(pm.faces[f][0]) for f in pm.face_ids}
    return new, SurgeryData(words, face_map, new_vertices=(nv,))


def genericize(pm: PlanarMap, v: int) -> tuple[PlanarMap, SurgeryData]:
    """Put a small quadrilateral of new edges around vertex ``v``.

    Each of the four half-edges at ``v`` is cut by a new vertex; the inner
    pieces become spokes and the four new vertices are joined in rotation
    order.  Old faces keep their area in the outer remnant; the four new
    faces between ``v`` and the circle get area 0 unless the caller assigns
    some.
    """
    rot0 = pm.rotation(v)
    if len(rot0) != 4:
        raise WrongDegree(f"vertex {v} has {len(rot0)} half-edges, need 4")
    nv, ne, nh = _next_ids(pm)
    rot, edges = _rotation_dict(pm)
    words = {e: [e] for e in pm.edge_ids}
    w_ids = [nv + i for i in range(4)]
    spoke_ids = [ne + i for i in range(4)]
    circle_ids = [ne + 4 + i for i in range(4)]
    s_half = [nh + i for i in range(4)]        # spoke end at w_i, pointing to v
    r_half = [nh + 4 + i for i in range(4)]    # remainder start at w_i
    c_out = [nh + 8 + i for i in range(4)]     # circle edge i at w_i
    c_in = [nh + 12 + i for i in range(4)]     # circle edge i at w_{i+1}

    for i, h in enumerate(rot0):
        k, side = pm._edge_of[h]
        edges[spoke_ids[i]] = [h, s_half[i]]
        pair = edges[k]
        pair[side] = r_half[i]
        spoke = spoke_ids[i]
        if side == 0:
            words[k] = [spoke] + words[k]
        else:
            words[k] = words[k] + [-spoke]
    for i in range(4):
        edges[circle_ids[i]] = [c_out[i], c_in[(i + 1) % 4]]
        rot[w_ids[i]] = [r_half[i], c_out[i], s_half[i], c_in[i]]
    # rotation at v is unchanged: its half-edges now start the spokes

    def far(i):
        o = pm.opp(rot0[i])
        return r_half[rot0.index(o)] if o in rot0 else o

    marker = pm.faces[pm.unbounded_face][0]
    if marker in rot0:
        marker = far((rot0.index(marker) - 1) % 4)
    new = build_map(rot, edges, marker)

    face_map = {}
    for f in pm.face_ids:
        outer = [h for h in pm.faces[f] if h not in rot0]
        if outer:
            face_map[f] = new.face_of(outer[0])
    for i in range(4):
        f = pm.face_of(rot0[(i + 1) % 4])
        face_map.setdefault(f, new.face_of(far(i)))
    circle = tuple(new.face_of(rot0[(i + 1) % 4]) for i in range(4))
    circle_parent = {circle[i]: pm.face_of(rot0[(i + 1) % 4]) for i in range(4)}
    data = SurgeryData({k: tuple(w) for k, w in words.items()}, face_map, circle, circle,
                       circle_parent, tuple(w_ids))
    return new, data


# ---------------------------------------------------------------------------
# catalog of example maps, built from straight-line drawings

@dataclass(frozen=True)
class Drawing:
    """Coordinates of a map: vertex points and one polyline per edge."""

    points: Mapping[int, tuple[float, float]]
    polylines: Mapping[int, tuple[tuple[float, float], ...]]
    loops: Mapping[str, tuple[int, ...]]
    face_refs: Mapping[str, int]


def map_from_drawing(drawing: Drawing) -> PlanarMap:
    """Rotation system read off a planar straight-line drawing.

    Edge ``k`` gets half-edges ``2k`` (start of its polyline) and ``2k+1``
    (end).  Rotations sort half-edges by the angle of their first segment;
    the unbounded face is the one whose traced boundary has positive signed
    area (faces are traced with the face on the right).
    """
    rot: dict[int, list[tuple[float, int]]] = {v: [] for v in drawing.points}
    edges = {}
    for k, line in drawing.polylines.items():
        a, b = _vertex_at(drawing, line[0]), _vertex_at(drawing, line[-1])
        h0, h1 = 2 * k, 2 * k + 1
        edges[k] = (h0, h1)
        rot[a].append((atan2(line[1][1] - line[0][1], line[1][0] - line[0][0]), h0))
        rot[b].append((atan2(line[-2][1] - line[-1][1], line[-2][0] - line[-1][0]), h1))
    rotations = {v: [h for _, h in sorted(r)] for v, r in rot.items()}
    some = next(iter(edges.values()))[0]
    draft = build_map(rotations, edges, some)
    best = None
    for f, cyc in enumerate(draft.faces):
        area = _signed_area(_face_polygon(drawing, draft, cyc))
        if best is None or area > best[0]:
            best = (area, cyc[0])
    return build_map(rotations, edges, best[1])


def _vertex_at(drawing, p):
    for v, q in drawing.points.items():
        if abs(q[0] - p[0]) < 1e-12 and abs(q[1] - p[1]) < 1e-12:
            return v
    raise ValueError(f"polyline endpoint {p} is not a vertex")


def _face_polygon(drawing, pm, cyc):
    pts = []
    for h in cyc:
        s = pm.signed_of(h)
        line = drawing.polylines[abs(s)]
        line = line if s > 0 else tuple(reversed(line))
        pts.extend(line[:-1])
    return pts


def face_polygon(drawing: Drawing, pm: PlanarMap, f: int) -> list[tuple[float, float]]:
    """Boundary polygon of face ``f`` in the drawing's coordinates."""
    return _face_polygon(drawing, pm, pm.faces[f])


def _signed_area(pts):
    s = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
        s += x0 * y1 - x1 * y0
    return s / 2


def _arc(cx, cy, r, a0, a1, n=12):
    return [(cx + r * cos(a0 + (a1 - a0) * j / n), cy + r * sin(a0 + (a1 - a0) * j / n))
            for j in range(n + 1)]


def _snap(line, start, end):
    line = list(line)
    line[0], line[-1] = start, end
    return tuple(line)


def _drawing_simple():
    v = (0.0, 0.0)
    return Drawing({0: v}, {1: (v, (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), v)},
                   {"L": (1,)}, {"t": 1})


def _drawing_figure_eight():
    v = (0.0, 0.0)
    lines = {1: (v, (1.0, 1.0), (2.0, 0.0), (1.0, -1.0), v),
             2: (v, (-1.0, 1.0), (-2.0, 0.0), (-1.0, -1.0), v)}
    return Drawing({0: v}, lines, {"L": (1, 2)}, {"t1": -1, "t2": 2})


def _drawing_double_wound():
    v = (0.0, 0.0)
    outer = (v, (2.0, -2.0), (4.0, 2.0), (0.0, 5.0), (-4.0, 2.0), (-2.0, -1.0), v)
    inner = (v, (2.0, 1.0), (1.0, 2.5), (-1.0, 2.5), (-2.0, 1.5), (-1.0, 1.0), v)
    return Drawing({0: v}, {1: outer, 2: inner}, {"L": (1, 2)}, {"a": 1, "s": 2})


def _drawing_two_loops():
    v, w = (0.0, 0.0), (-1.0, 1.0)
    a1 = _snap(_arc(0, 1, 1, -pi / 2, pi), v, w)
    a2 = _snap(_arc(0, 1, 1, pi, 3 * pi / 2), w, v)
    b1 = _snap(_arc(-1, 0, 1, 0, pi / 2), v, w)
    b2 = _snap(_arc(-1, 0, 1, pi / 2, 2 * pi, 18), w, v)
    return Drawing({0: v, 1: w}, {1: a1, 2: a2, 3: b1, 4: b2},
                   {"L1": (1, 2), "L2": (3, 4)}, {"t1": 1, "t2": 2, "t3": 4})


def _pacman_lines():
    v, p, q = (0.0, 0.0), (0.0, 1.0), (-1.0, 0.0)
    a = _snap([v] + _arc(0, 0, 1, 0, pi / 2), v, p)
    b = _snap(_arc(0, 0, 1, pi / 2, pi), p, q)
    c = _snap(_arc(0, 0, 1, pi, 3 * pi / 2) + [v], q, v)
    d = (v, p)
    e = _snap([p] + _arc(0, 0, 2, pi / 2, -pi, 24) + [q], p, q)
    f = (q, v)
    return {0: v, 1: p, 2: q}, {1: a, 2: b, 3: c, 4: d, 5: e, 6: f}


def _drawing_lasso_example():
    pts, lines = _pacman_lines()
    return Drawing(pts, lines, {"L": (1, 2, 3, 4, 5, 6)},
                   {"F1": 1, "F2": 2, "F3": 3, "F4": -5})


def _drawing_fig2():
    pts, lines = _pacman_lines()
    p, q, k = pts[1], pts[2], (0.0, -2.0)
    pts = dict(pts)
    pts[3] = k
    outer_east = _arc(0, 0, 2, pi / 2, -pi / 4, 12)
    outer_west = _arc(0, 0, 2, -3 * pi / 4, -pi, 6)
    lines = dict(lines)
    lines[5] = tuple([p] + outer_east + [(0.5, -1.5), k])
    lines[7] = (k, (-0.5, -2.5), (0.0, -3.0), (0.5, -2.5), k)
    lines[8] = tuple([k, (-0.5, -1.5)] + outer_west + [q])
    return Drawing(pts, lines, {"L": (1, 2, 3, 4, 5, 7, 8, 6)},
                   {"F1": 1, "F2": 2, "F3": 3, "F4": -5, "kink": 7})


def _drawing_wheel():
    v, u, p2, p3, p4, w = (0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (1.0, 1.0)
    lines = {
        1: (v, u), 2: (v, p2), 3: (v, p3), 4: (v, p4),
        5: (w, u), 6: (w, p2), 7: (u, (2.0, 0.5), w),
        8: _snap(_arc(0, 0, 1, pi / 2, pi), p2, p3),
        9: _snap(_arc(0, 0, 1, pi, 3 * pi / 2), p3, p4),
        10: _snap(_arc(0, 0, 1, 3 * pi / 2, 2 * pi), p4, u),
    }
    return Drawing({0: v, 1: u, 2: p2, 3: p3, 4: p4, 5: w}, lines,
                   {"L": (1, -5, 6, -2)},
                   {"F1": -5, "F2": 8, "F3": 9, "F4": 10, "F5": 7})


DRAWINGS = {
    "simple": _drawing_simple,
    "figure_eight": _drawing_figure_eight,
    "double_wound": _drawing_double_wound,
    "two_loops_at_vertex": _drawing_two_loops,
    "fig2_example": _drawing_fig2,
    "lasso_example": _drawing_lasso_example,
    "wheel": _drawing_wheel,
}

_DEFAULT_PARAMS = {
    "simple": {"t": 1.0},
    "figure_eight": {"t1": 1.0, "t2": 1.0},
    "double_wound": {"s": 1.0, "a": 1.0},
    "two_loops_at_vertex": {"t1": 1.0, "t2": 1.0, "t3": 1.0},
    "fig2_example": {"F1": 1.0, "F2": 1.0, "F3": 1.0, "F4": 1.0, "kink": 1.0},
    "lasso_example": {"F1": 1.0, "F2": 1.0, "F3": 1.0, "F4": 1.0},
    "wheel": {"F1": 1.0, "F2": 1.0, "F3": 1.0, "F4": 1.0, "F5": 1.0},
}


def example_drawing(name: str) -> Drawing:
    if name not in DRAWINGS:
        raise UnknownName(f"unknown example {name!r}; choose from {sorted(DRAWINGS)}")
    return DRAWINGS[name]()


def example_faces(name: str, pm: PlanarMap | None = None) -> dict[str, int]:
    """Parameter name -> face id for a catalog example."""
    drawing = example_drawing(name)
    pm = pm or map_from_drawing(drawing)
    return {p: pm.left_face(s) for p, s in drawing.face_refs.items()}


def standard_example(name: str, **params: float):
    """A catalog map with its loop(s) and areas.

    Returns ``(map, loop, areas)``; for ``two_loops_at_vertex`` the middle
    entry is a pair of loops.  Area parameters per name:

    - ``simple``: ``t``
    - ``figure_eight``: ``t1`` (first lobe), ``t2`` (second lobe)
    - ``double_wound``: ``s`` (inner disk), ``a`` (annulus)
    - ``two_loops_at_vertex``: ``t1``, ``t2`` (shared lens), ``t3``
    - ``fig2_example``: ``F1``..``F4`` around the base crossing and ``kink``
    - ``lasso_example``: ``F1``..``F4`` around the base crossing
    - ``wheel``: ``F1``..``F5``
    """
    drawing = example_drawing(name)
    defaults = dict(_DEFAULT_PARAMS[name])
    unknown = set(params) - set(defaults)
    if unknown:
        raise UnknownName(f"unknown parameters for {name}: {sorted(unknown)}")
    defaults.update(params)
    pm = map_from_drawing(drawing)
    faces = example_faces(name, pm)
    areas = area_vector(pm, {faces[p]: defaults[p] for p in faces})
    loops = {n: pm.loop_from_steps(steps) for n, steps in drawing.loops.items()}
    if name == "two_loops_at_vertex":
        return pm, (loops["L1"], loops["L2"]), areas
    return pm, loops["L"], areas


EXAMPLE_NAMES = ("simple", "figure_eight", "double_wound", "two_loops_at_vertex",
                 "fig2_example")
