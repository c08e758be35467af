"""Lasso sampling of the Yang-Mills measure on a planar map.

Every bounded face ``F`` gets a loop variable: a lasso that runs from the base
vertex along the spanning tree, once around ``F`` with ``F`` on its left, and
back.  The lasso variables are independent heat-kernel samples with times
equal to the face areas, so Wilson loops are estimated by rewriting each loop
as a word in the lassos and multiplying sampled matrices.

Words over edges are tuples of signed edge ids.  Words over lassos are tuples
of ``(face, exponent)`` pairs with exponent ``+1`` or ``-1``.  The holonomy
of a word is the product of its letters in reverse order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import sqrt
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    AmbiguousPath,
    BaseMismatch,
    Disconnected,
    MissingSymbol,
    TriangularSolveFailed,
)
from .group_core import GroupSpec, dagger, heat_sample, ntrace
from .planar_map import LoopWord, PlanarMap, _free_reduce

LassoLetter = tuple[int, int]


@dataclass(frozen=True)
class SpanningTree:
    edges: frozenset[int]
    root: int
    parent_edge: Mapping[int, int]  # vertex -> signed edge arriving from its parent

    def path_from_root(self, pm: PlanarMap, v: int) -> tuple[int, ...]:
        """Signed tree edges leading from the root to ``v``."""
        out = []
        while v != self.root:
            s = self.parent_edge[v]
            out.append(s)
            v = pm.tail(s)
        return tuple(reversed(out))

    def path(self, pm: PlanarMap, a: int, b: int) -> tuple[int, ...]:
        """Reduced tree path from ``a`` to ``b``."""
        up = [-s for s in reversed(self.path_from_root(pm, a))]
        return tuple(_free_reduce(up + list(self.path_from_root(pm, b))))


def spanning_tree(pm: PlanarMap, edges: Iterable[int] | None = None,
                  root: int | None = None) -> SpanningTree:
    """Breadth-first spanning tree from the lowest vertex id, or a given edge set."""
    root = min(pm.vertices) if root is None else root
    allowed = set(pm.edge_ids) if edges is None else set(edges)
    if edges is not None:
        unknown = allowed - set(pm.edge_ids)
        if unknown:
            raise Disconnected(f"tree edges {sorted(unknown)} are not edges of the map")
        if len(allowed) != len(pm.vertices) - 1:
            raise Disconnected(f"a spanning tree needs {len(pm.vertices) - 1} edges, got {len(allowed)}")
    parent_edge: dict[int, int] = {}
    used: set[int] = set()
    seen = {root}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for h in pm.rotation(v):
            s = pm.signed_of(h)
            if abs(s) not in allowed or abs(s) in used:
                continue
            w = pm.head(s)
            if w in seen:
                continue
            seen.add(w)
            used.add(abs(s))
            parent_edge[w] = s
            queue.append(w)
    if len(seen) != len(pm.vertices) or (edges is not None and used != allowed):
        raise Disconnected("edges do not form a spanning tree of the map")
    return SpanningTree(frozenset(used), root, parent_edge)


@dataclass(frozen=True)
class LassoBasis:
    """Face-indexed lasso words and the order for solving edge variables.

    ``distinguished[F]`` is the non-tree signed edge with ``F`` on its left
    that leads towards the unbounded face; ``order`` lists bounded faces so
    that each lasso only involves distinguished edges of earlier faces and
    its own.
    """

    base: int
    words: Mapping[int, tuple[int, ...]]
    distinguished: Mapping[int, int]
    depth: Mapping[int, int]
    order: tuple[int, ...]
    tree: SpanningTree


def lasso_basis(pm: PlanarMap, tree: SpanningTree | None = None,
                base: int | None = None) -> LassoBasis:
    tree = tree or spanning_tree(pm)
    base = tree.root if base is None else base
    if base not in pm.vertices:
        raise BaseMismatch(f"base {base} is not a vertex of the map")
    cotree = [k for k in pm.edge_ids if k not in tree.edges]
    bounded = pm.bounded_faces
    if len(cotree) != len(bounded):
        raise AmbiguousPath(f"{len(cotree)} non-tree edges for {len(bounded)} bounded faces")
    # dual tree: faces joined across non-tree edges, rooted at the unbounded face.
    # With F - 1 dual edges, reaching every face means the dual graph is a tree,
    # so each face has a unique path to the unbounded face.
    adjacent: dict[int, list[int]] = {f: [] for f in pm.face_ids}
    for k in cotree:
        left, right = pm.left_face(k), pm.right_face(k)
        if left == right:
            raise AmbiguousPath(f"non-tree edge {k} has the same face on both sides")
        adjacent[left].append(-k)   # crossing -k from the right face reaches the left one
        adjacent[right].append(k)
    depth = {pm.unbounded_face: 0}
    distinguished: dict[int, int] = {}
    queue = deque([pm.unbounded_face])
    while queue:
        f = queue.popleft()
        for s in sorted(adjacent[f], key=abs):
            # s has f on its right, so the face across is left of s
            g = pm.left_face(s)
            if g in depth:
                continue
            depth[g] = depth[f] + 1
            distinguished[g] = s if pm.left_face(s) == g else -s
            queue.append(g)
    if len(depth) != len(pm.faces):
        raise AmbiguousPath("some bounded faces have no path to the unbounded face")

    words = {}
    for f in bounded:
        e = distinguished[f]
        boundary = list(pm.positive_boundary(f))
        i = boundary.index(e)
        around = boundary[i:] + boundary[:i]
        to_tail = tree.path(pm, base, pm.tail(e))
        words[f] = tuple(_free_reduce(list(to_tail) + around + [-s for s in reversed(to_tail)]))
    order = tuple(sorted(bounded, key=lambda f: (-depth[f], f)))
    return LassoBasis(base, words, distinguished, {f: depth[f] for f in bounded}, order, tree)


def _invert_lasso_word(word):
    return tuple((f, -e) for f, e in reversed(word))


def _reduce_lasso_word(word):
    out: list[LassoLetter] = []
    for f, e in word:
        if out and out[-1] == (f, -e):
            out.pop()
        else:
            out.append((f, e))
    return tuple(out)


def _cotree_in_lassos(pm: PlanarMap, basis: LassoBasis) -> dict[int, tuple[LassoLetter, ...]]:
    """Each non-tree edge (positive id) as a word over lassos, in the tree gauge."""
    tree = basis.tree.edges
    expressed: dict[int, tuple[LassoLetter, ...]] = {}

    def expand(signed_word):
        out = []
        for s in signed_word:
            if abs(s) in tree:
                continue
            w = expressed[abs(s)]
            out.extend(w if s > 0 else _invert_lasso_word(w))
        return out

    for f in basis.order:
        e = basis.distinguished[f]
        word = [s for s in basis.words[f] if abs(s) not in tree]
        hits = [i for i, s in enumerate(word) if abs(s) == abs(e)]
        if len(hits) != 1:
            raise TriangularSolveFailed(f"lasso of face {f} uses its edge {e} {len(hits)} times")
        i = hits[0]
        try:
            before, after = expand(word[:i]), expand(word[i + 1:])
        except KeyError as exc:
            raise TriangularSolveFailed(f"lasso of face {f} needs edge {exc} before it is solved")
        # word = before . e . after, so e = before^-1 . lasso . after^-1
        w = _invert_lasso_word(before) + ((f, 1),) + _invert_lasso_word(after)
        w = _reduce_lasso_word(w)
        expressed[abs(e)] = w if word[i] > 0 else _invert_lasso_word(w)
    return expressed


def loop_in_lassos(pm: PlanarMap, loop: LoopWord, basis: LassoBasis,
                   conjugate: bool = False) -> tuple[LassoLetter, ...]:
    """Rewrite ``loop`` as a reduced word over lasso generators.

    With ``conjugate=True`` a loop based elsewhere is first conjugated by the
    tree path from the base, which leaves traces unchanged.
    """
    pm.check_loop(loop)
    steps = list(loop.steps)
    if loop.base != basis.base:
        if not conjugate:
            raise BaseMismatch(f"loop is based at {loop.base}, basis at {basis.base}")
        path = list(basis.tree.path(pm, basis.base, loop.base))
        steps = path + steps + [-s for s in reversed(path)]
    expressed = _cotree_in_lassos(pm, basis)
    out = []
    for s in steps:
        if abs(s) in basis.tree.edges:
            continue
        w = expressed[abs(s)]
        out.extend(w if s > 0 else _invert_lasso_word(w))
    return _reduce_lasso_word(out)


def _letter(symbol):
    if isinstance(symbol, tuple):
        return symbol[0], symbol[1] < 0
    return abs(symbol), symbol < 0


def holonomy(word: Sequence, values: Mapping, identity=None) -> np.ndarray:
    """Product of the letters' values in reverse order, inverse for negative letters.

    ``values`` maps symbols to unitary matrices (or stacks of them with a
    leading sample axis); ``identity`` is needed only for the empty word.
    """
    out = None
    for symbol in word:
        key, inverse = _letter(symbol)
        if key not in values:
            raise MissingSymbol(f"no value for symbol {key}")
        u = values[key]
        u = dagger(u) if inverse else u
        out = u if out is None else u @ out
    if out is None:
        if identity is not None:
            return identity
        some = next(iter(values.values()), None)
        if some is None:
            raise MissingSymbol("empty word with no values to infer the identity")
        return np.broadcast_to(np.eye(some.shape[-1], dtype=complex), some.shape).copy()
    return out


def sample_lassos(pm: PlanarMap, areas: Mapping[int, float], spec: GroupSpec,
                  rng: np.random.Generator, size: int | None = None,
                  steps: int | None = None) -> dict[int, np.ndarray]:
    """Independent heat-kernel draws, one per bounded face."""
    return {f: heat_sample(spec, float(areas[f]), rng, steps=steps, size=size)
            for f in pm.bounded_faces}


def edges_from_lassos(pm: PlanarMap, basis: LassoBasis,
                      lassos: Mapping[int, np.ndarray]) -> dict[int, np.ndarray]:
    """Edge variables in the tree gauge whose lasso holonomies equal ``lassos``."""
    some = next(iter(lassos.values()))
    eye = np.broadcast_to(np.eye(some.shape[-1], dtype=complex), some.shape)
    values: dict[int, np.ndarray] = {k: eye.copy() for k in basis.tree.edges}
    for f in basis.order:
        e = basis.distinguished[f]
        word = basis.words[f]
        hits = [i for i, s in enumerate(word) if abs(s) == abs(e)]
        if len(hits) != 1:
            raise TriangularSolveFailed(f"lasso of face {f} uses its edge {e} {len(hits)} times")
        i = hits[0]
        try:
            before = holonomy(word[:i], values, eye)
            after = holonomy(word[i + 1:], values, eye)
        except MissingSymbol as exc:
            raise TriangularSolveFailed(f"lasso of face {f}: {exc}")
        # hol(lasso) = after . x . before
        x = dagger(after) @ lassos[f] @ dagger(before)
        values[abs(e)] = x if word[i] > 0 else dagger(x)
    for f in basis.order:
        err = np.max(np.abs(holonomy(basis.words[f], values, eye) - lassos[f]))
        if not err <= 1e-8:
            raise TriangularSolveFailed(f"lasso of face {f} reproduced with error {err:.2e}")
    return values


def apply_gauge(config: Mapping[int, np.ndarray], gauge: Mapping[int, np.ndarray],
                pm: PlanarMap) -> dict[int, np.ndarray]:
    """Transform edge variables by ``a_e -> g(head)^-1 a_e g(tail)``."""
    out = {}
    for k, a in config.items():
        out[k] = dagger(gauge[pm.head(k)]) @ a @ gauge[pm.tail(k)]
    return out


# ---------------------------------------------------------------------------
# Monte Carlo

@dataclass(frozen=True)
class WilsonEstimate:
    """Mean of the real part, its standard error, and the imaginary diagnostic."""

    value: float
    stderr: float
    imag: float
    imag_stderr: float
    samples: int

    def __iter__(self):
        return iter((self.value, self.stderr))


def shard_generators(seed: int, shards: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(shards)]


def shard_sizes(samples: int, shards: int) -> list[int]:
    base, extra = divmod(samples, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


def default_chunk(spec: GroupSpec) -> int:
    return max(1, min(20000, 2_000_000 // (spec.N * spec.N * 4)))


def trace_product(words: Sequence[Sequence[LassoLetter]], values: Mapping,
                  identity) -> np.ndarray:
    out = None
    for w in words:
        tr = ntrace(holonomy(w, values, identity))
        out = tr if out is None else out * tr
    return out


def run_chunks(samples: int, seed: int, shards: int, spec: GroupSpec,
               chunk: int | None, draw: Callable[[np.random.Generator, int], np.ndarray]):
    """Concatenate ``draw(rng, size)`` over shards and chunks, in a fixed order."""
    chunk = chunk or default_chunk(spec)
    parts = []
    for rng, n in zip(shard_generators(seed, shards), shard_sizes(samples, shards)):
        done = 0
        while done < n:
            size = min(chunk, n - done)
            parts.append(np.asarray(draw(rng, size)))
            done += size
    return np.concatenate(parts, axis=-1) if parts else np.zeros(0)


def summarize(values: np.ndarray) -> WilsonEstimate:
    n = values.shape[-1]
    re, im = values.real, values.imag
    se = lambda x: float(np.std(x, ddof=1) / sqrt(n)) if n > 1 else 0.0
    return WilsonEstimate(float(np.mean(re)), se(re), float(np.mean(im)), se(im), n)


def wilson_estimate(pm: PlanarMap, areas: Mapping[int, float], loops: Sequence[LoopWord],
                    spec: GroupSpec, samples: int, seed: int = 0, shards: int = 1,
                    steps: int | None = None, tree: SpanningTree | None = None,
                    chunk: int | None = None) -> WilsonEstimate:
    """Monte Carlo estimate of the product of normalized traces of the loops."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    basis = lasso_basis(pm, tree)
    words = [loop_in_lassos(pm, loop, basis, conjugate=True) for loop in loops]
    if all(float(areas[f]) == 0.0 for f in pm.bounded_faces):
        return WilsonEstimate(1.0, 0.0, 0.0, 0.0, samples)

    def draw(rng, size):
        lassos = sample_lassos(pm, areas, spec, rng, size, steps)
        return trace_product(words, lassos, spec.identity(size))

    return summarize(run_chunks(samples, seed, shards, spec, chunk, draw))


OFFSETS = (-1.0, -0.5, 0.0, 0.5, 1.0)


def coupled_heat_path(spec: GroupSpec, t: float, h: float, rng: np.random.Generator,
                      size: int, steps: int | None = None) -> dict[float, np.ndarray]:
    """Heat samples at times ``t + o*h`` for o in OFFSETS, built by increments.

    The draw at ``t - h`` is multiplied by independent ``h/2`` increments, so
    each entry has the right law and neighbouring entries share randomness.
    """
    out = {OFFSETS[0]: heat_sample(spec, t - h, rng, steps=steps, size=size)}
    for prev, o in zip(OFFSETS, OFFSETS[1:]):
        out[o] = heat_sample(spec, h / 2, rng, size=size) @ out[prev]
    return out
