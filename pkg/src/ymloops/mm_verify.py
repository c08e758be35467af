"""Numerical checks of the Makeenko-Migdal identities.

Area derivatives are central differences with common random numbers: for each
differentiated face one heat sample at ``t - h`` is pushed forward by
independent ``h/2`` increments, so the estimates at ``t - h .. t + h`` share
their randomness and the differences have small variance.  The same draws
give a second derivative estimate at step ``h/2``; the gap between the two
bounds the truncation error and is reported as ``allowance``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    EdgeMultiplicity,
    EdgeNotOnUnbounded,
    GridTooCoarse,
    NotExtendedInvariant,
    PatternMismatch,
    StepTooLarge,
    WrongDegree,
)
from .group_core import (
    GroupSpec,
    dagger,
    haar_unitary,
    heat_sample,
    mixed_fd,
    ntrace,
    u1_heat_density,
    u1_heat_density_dt,
)
from .planar_map import CrossingFrame, LoopWord, PlanarMap, frame_from_halves, split_loop
from .ym_measure import (
    OFFSETS,
    coupled_heat_path,
    holonomy,
    lasso_basis,
    loop_in_lassos,
    run_chunks,
    trace_product,
)


@dataclass(frozen=True)
class MMReport:
    lhs: float
    rhs: float
    residual: float
    sigma: float
    allowance: float
    passed: bool

    @classmethod
    def build(cls, lhs, rhs, sigma, allowance):
        residual = lhs - rhs
        return cls(float(lhs), float(rhs), float(residual), float(sigma), float(allowance),
                   bool(abs(residual) <= 3 * sigma + allowance))

    def as_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "residual": self.residual,
                "sigma": self.sigma, "allowance": self.allowance, "passed": self.passed}


def face_coefficients(pm: PlanarMap, frame: CrossingFrame,
                      face_alias: Mapping[int, int] | None = None) -> dict[int, int]:
    """Alternating signs of the frame faces, accumulated over repeats.

    Unbounded entries are dropped; ``face_alias`` redirects a face to the one
    whose area actually varies (used for zero-area faces after genericizing).
    """
    alias = face_alias or {}
    coeffs: dict[int, int] = {}
    for i, f in enumerate(frame.faces):
        f = alias.get(f, f)
        if f == pm.unbounded_face:
            continue
        coeffs[f] = coeffs.get(f, 0) + (1 if i % 2 == 0 else -1)
    return {f: c for f, c in coeffs.items() if c != 0}


def default_step(areas: Mapping[int, float], faces) -> float:
    faces = list(faces)
    if not faces:
        return 0.05
    return min(0.05, 0.05 * min(float(areas[f]) for f in faces))


def _check_step(areas, faces, h):
    if h <= 0:
        raise StepTooLarge(f"finite-difference step must be positive, got {h}")
    for f in faces:
        if h >= float(areas[f]):
            raise StepTooLarge(f"step {h} does not fit inside face {f} of area {areas[f]}")


@dataclass(frozen=True)
class _Draws:
    """Per-sample arrays from one coupled run.

    ``d_h[f]`` and ``d_half[f]`` are derivative estimates in the area of face
    ``f`` at steps ``h`` and ``h/2``; ``rhs[i]`` is the i-th extra observable
    at the unperturbed areas.
    """

    d_h: dict
    d_half: dict
    rhs: list
    base: np.ndarray

    def combine(self, coeffs):
        size = self.base.shape[-1]
        d_h = sum((c * self.d_h[f] for f, c in coeffs.items()), np.zeros(size, complex))
        d_half = sum((c * self.d_half[f] for f, c in coeffs.items()), np.zeros(size, complex))
        return d_h, d_half


def _coupled_run(pm, areas, faces, observable, rhs_fns, spec, h, samples, seed, shards,
                 steps, chunk):
    """Per-sample area derivatives of ``observable`` for each face in ``faces``."""
    faces = sorted(set(faces))
    _check_step(areas, faces, h)
    rhs_fns = list(rhs_fns)

    def draw(rng, size):
        values = {}
        paths = {}
        for f in pm.bounded_faces:
            if f in faces:
                paths[f] = coupled_heat_path(spec, float(areas[f]), h, rng, size, steps)
                values[f] = paths[f][0.0]
            else:
                values[f] = heat_sample(spec, float(areas[f]), rng, steps=steps, size=size)
        eye = spec.identity(size)
        rows = []
        for f in faces:
            evals = {}
            for o in OFFSETS:
                if o != 0.0:
                    trial = dict(values)
                    trial[f] = paths[f][o]
                    evals[o] = observable(trial, eye)
            rows.append((evals[1.0] - evals[-1.0]) / (2 * h))
            rows.append((evals[0.5] - evals[-0.5]) / h)
        base = observable(values, eye)
        rows.extend(fn(values, eye, base) for fn in rhs_fns)
        rows.append(base)
        zero = np.zeros(size, dtype=complex)
        return np.stack([zero + r for r in rows])

    out = run_chunks(samples, seed, shards, spec, chunk, draw)
    nf = len(faces)
    return _Draws({f: out[2 * i] for i, f in enumerate(faces)},
                  {f: out[2 * i + 1] for i, f in enumerate(faces)},
                  [out[2 * nf + i] for i in range(len(rhs_fns))], out[-1])


def _mean_se(x):
    x = np.real(x)
    return float(np.mean(x)), float(np.std(x, ddof=1) / sqrt(len(x)))


def _report(draws: _Draws, coeffs, rhs) -> MMReport:
    d_h, d_half = draws.combine(coeffs)
    lhs, _ = _mean_se(d_h)
    rhs_mean, _ = _mean_se(rhs)
    _, sigma = _mean_se(d_h - rhs)
    gap, gap_se = _mean_se(d_h - d_half)
    # D_h - D_{h/2} ~ (3/4) C h^2, so the truncation of D_h is about 4/3 of the gap
    allowance = 4.0 / 3.0 * max(0.0, abs(gap) - 2 * gap_se)
    return MMReport.build(lhs, rhs_mean, sigma, allowance)


def _words(pm, loops):
    basis = lasso_basis(pm)
    return [loop_in_lassos(pm, loop, basis, conjugate=True) for loop in loops]


def alt_area_derivative(pm: PlanarMap, areas: Mapping[int, float], loops: Sequence[LoopWord],
                        frame: CrossingFrame, spec: GroupSpec, samples: int,
                        h: float | None = None, seed: int = 0, shards: int = 1,
                        steps: int | None = None, face_alias=None, chunk=None):
    """Alternating sum of area derivatives of E[prod tr hol(loop)] around ``frame``.

    Returns ``(value, sigma, allowance)``.
    """
    coeffs = face_coefficients(pm, frame, face_alias)
    if not coeffs:
        return 0.0, 0.0, 0.0
    h = default_step(areas, coeffs) if h is None else h
    words = _words(pm, loops)
    draws = _coupled_run(pm, areas, coeffs, lambda v, eye: trace_product(words, v, eye),
                         [], spec, h, samples, seed, shards, steps, chunk)
    rep = _report(draws, coeffs, np.zeros_like(draws.base))
    return rep.lhs, rep.sigma, rep.allowance


def mm_residuals(pm: PlanarMap, areas: Mapping[int, float], loop: LoopWord,
                 frames: Sequence[CrossingFrame], spec: GroupSpec, samples: int = 10000,
                 h: float | None = None, seed: int = 0, shards: int = 1,
                 steps: int | None = None, face_alias=None, chunk=None) -> list[MMReport]:
    """:func:`mm_residual` for several crossings of one loop from a single coupled run."""
    frames = list(frames)
    coeffs = [face_coefficients(pm, fr, face_alias) for fr in frames]
    faces = {f for c in coeffs for f in c}
    h = default_step(areas, faces) if h is None else h
    lhs_words = _words(pm, [loop])
    rhs_words = [_words(pm, list(split_loop(loop, fr))) for fr in frames]
    rhs_fns = [(lambda w: (lambda v, eye, base: trace_product(w, v, eye)))(w) for w in rhs_words]
    draws = _coupled_run(pm, areas, faces, lambda v, eye: trace_product(lhs_words, v, eye),
                         rhs_fns, spec, h, samples, seed, shards, steps, chunk)
    return [_report(draws, c, r) for c, r in zip(coeffs, draws.rhs)]


def mm_residual(pm: PlanarMap, areas: Mapping[int, float], loop: LoopWord,
                frame: CrossingFrame, spec: GroupSpec, samples: int = 10000,
                h: float | None = None, seed: int = 0, shards: int = 1,
                steps: int | None = None, face_alias=None, chunk=None) -> MMReport:
    """Both sides of the crossing identity for ``tr hol(loop)``.

    The right side is ``E[tr hol(L1) tr hol(L2)]`` for the two halves of the
    loop split at the crossing.  Faces that appear several times around the
    crossing are differentiated once with the summed sign, which is the same
    as genericizing the vertex with zero-area circle faces.
    """
    return mm_residuals(pm, areas, loop, [frame], spec, samples, h, seed, shards, steps,
                        face_alias, chunk)[0]


def shared_unbounded_edges(pm: PlanarMap, face: int) -> list[int]:
    """Edges with ``face`` on one side and the unbounded face on the other."""
    out = []
    for k in pm.edge_ids:
        sides = {pm.left_face(k), pm.right_face(k)}
        if sides == {face, pm.unbounded_face}:
            out.append(k)
    return out


def unbounded_face_residual(pm: PlanarMap, areas: Mapping[int, float], loop: LoopWord,
                            face: int, spec: GroupSpec, samples: int = 10000,
                            h: float | None = None, seed: int = 0, shards: int = 1,
                            steps: int | None = None, chunk=None) -> MMReport:
    """Compare ``dE/dt_face`` with ``-E/2`` for a face on the outside of the loop."""
    if face == pm.unbounded_face or face not in pm.bounded_faces:
        raise EdgeNotOnUnbounded(f"face {face} is not a bounded face")
    shared = shared_unbounded_edges(pm, face)
    if not shared:
        raise EdgeNotOnUnbounded(f"face {face} shares no edge with the unbounded face")
    counts = {k: sum(1 for s in loop.steps if abs(s) == k) for k in shared}
    if not any(c == 1 for c in counts.values()):
        raise EdgeMultiplicity(f"shared edges of face {face} are traversed {counts} times")
    h = default_step(areas, [face]) if h is None else h
    words = _words(pm, [loop])
    draws = _coupled_run(pm, areas, [face], lambda v, eye: trace_product(words, v, eye),
                         [lambda v, eye, base: -0.5 * base],
                         spec, h, samples, seed, shards, steps, chunk)
    return _report(draws, {face: 1}, draws.rhs[0])


def two_loop_frame(pm: PlanarMap, first: LoopWord, second: LoopWord) -> CrossingFrame:
    """Frame of two loops based at one vertex: the first leaves along e1 and
    comes back along e3, the second leaves along e2 and comes back along e4."""
    if first.base != second.base:
        raise PatternMismatch("the two loops must share their base vertex")
    v = first.base
    e1 = pm.tail_half(first.steps[0])
    e3 = pm.head_half(first.steps[-1])
    e2 = pm.tail_half(second.steps[0])
    e4 = pm.head_half(second.steps[-1])
    try:
        return frame_from_halves(pm, v, e1, e2, e3, e4, 0, len(first.steps))
    except WrongDegree as exc:
        raise PatternMismatch(f"loops do not cross at vertex {v}: {exc}") from exc


def two_loop_residual(pm: PlanarMap, areas: Mapping[int, float], first: LoopWord,
                      second: LoopWord, spec: GroupSpec, samples: int = 10000,
                      h: float | None = None, seed: int = 0, shards: int = 1,
                      steps: int | None = None, chunk=None) -> MMReport:
    """Alternating derivative of ``E[tr hol(L1) tr hol(L2)]`` against
    ``E[tr(hol(L1) hol(L2))] / N^2``."""
    frame = two_loop_frame(pm, first, second)
    coeffs = face_coefficients(pm, frame)
    h = default_step(areas, coeffs) if h is None else h
    words = _words(pm, [first, second])
    joined = _words(pm, [LoopWord(first.base, first.steps + second.steps)])
    scale = 1.0 / spec.N ** 2
    draws = _coupled_run(pm, areas, coeffs, lambda v, eye: trace_product(words, v, eye),
                         [lambda v, eye, base: scale * trace_product(joined, v, eye)],
                         spec, h, samples, seed, shards, steps, chunk)
    return _report(draws, coeffs, draws.rhs[0])


# ---------------------------------------------------------------------------
# exact U(1) check of the local identity

def _spectral_mixed(values):
    """d^2/(d theta1 d theta2) of a real grid function along axes 0 and 1."""
    n = values.shape[0]
    k0 = np.fft.fftfreq(n, d=1.0 / n)
    k1 = np.fft.rfftfreq(n, d=1.0 / n)
    k0[n // 2] = 0.0
    k1[-1] = 0.0 if n % 2 == 0 else k1[-1]
    spectrum = np.fft.rfft2(values, axes=(0, 1))
    extra = (1,) * (values.ndim - 2)
    spectrum *= -(k0.reshape(-1, 1, *extra) * k1.reshape(1, -1, *extra))
    return np.fft.irfft2(spectrum, s=(n, n), axes=(0, 1))


def check_u1_extended_invariance(f: Callable, rng: np.random.Generator, trials: int = 64,
                                 tol: float = 1e-10) -> float:
    """Largest change of ``f`` under the two U(1) extended substitutions."""
    th = rng.uniform(-np.pi, np.pi, size=(4, trials))
    x = rng.uniform(-np.pi, np.pi, size=trials)
    base = f(*th)
    one = f(th[0] + x, th[1], th[2] + x, th[3])
    two = f(th[0], th[1] + x, th[2], th[3] + x)
    dev = float(max(np.max(np.abs(one - base)), np.max(np.abs(two - base))))
    if dev > tol:
        raise NotExtendedInvariant(f"test function changes by {dev:.2e} under extended substitution")
    return dev


@dataclass(frozen=True)
class LocalMMResult:
    lhs: float
    rhs: float
    residual: float
    refined_residual: float
    grid: int


def _local_sides(f, alphas, times, n, tabulate=True):
    """Grid sums of the alternating time derivative and of minus the mixed gradient.

    With ``A_i`` the kernel matrices ``A1[j1,j2] = rho(alpha1 + th_j1 - th_j2)``
    and so on around the cycle, an integral is
    ``sum F[j1,j2,j3,j4] A1[j1,j2] A2[j2,j3] A3[j3,j4] A4[j4,j1] / n^4``.
    Each theta3 slice is contracted over theta4 first.

    With ``tabulate=True`` the (already checked) invariance is used to read
    ``F`` off an n x n table of ``f(u, w, 0, 0)`` with ``u = theta1 - theta3``
    and ``w = theta2 - theta4``; otherwise ``f`` is evaluated on every slice.
    """
    theta = 2 * np.pi * np.arange(n) / n
    diff = theta[:, None] - theta[None, :]
    dens = [u1_heat_density(t, a + diff) for a, t in zip(alphas, times)]
    ddens = [u1_heat_density_dt(t, a + diff) for a, t in zip(alphas, times)]
    a1, a2, a3, a4 = dens
    d1, d2, d3, d4 = ddens
    if tabulate:
        table = np.real(f(theta[:, None], theta[None, :], 0.0, 0.0)) + np.zeros((n, n))
        table_mixed = _spectral_mixed(table)
        j = np.arange(n)
        w_index = (j[:, None] - j[None, :]) % n               # [j2, j4]
    else:
        t1, t2, t4 = np.meshgrid(theta, theta, theta, indexing="ij")
    lhs = 0.0
    rhs = 0.0
    for j3 in range(n):
        # axes of a slice: theta1, theta2, theta4
        if tabulate:
            u_index = ((j - j3) % n)[:, None, None]
            values = table[u_index, w_index[None, :, :]]
            mixed = table_mixed[u_index, w_index[None, :, :]]
        else:
            values = np.real(f(t1, t2, theta[j3], t4))
            mixed = _spectral_mixed(values)

        def over_j4(grid, b3, b4):
            # X[j1,j2] = sum_j4 grid[j1,j2,j4] b3[j3,j4] b4[j4,j1]
            weights = b3[j3][None, :] * b4.T                # [j1, j4]
            return np.matmul(grid, weights[:, :, None])[..., 0]

        plain = over_j4(values, a3, a4)
        outer = a1 * a2[:, j3][None, :]
        lhs += np.sum(plain * (d1 * a2[:, j3][None, :]))
        lhs -= np.sum(plain * (a1 * d2[:, j3][None, :]))
        lhs += np.sum(over_j4(values, d3, a4) * outer)
        lhs -= np.sum(over_j4(values, a3, d4) * outer)
        rhs -= np.sum(over_j4(mixed, a3, a4) * outer)
    norm = float(n) ** 4
    return lhs / norm, rhs / norm


def local_mm_u1_residual(f: Callable, alphas: Sequence[float], times: Sequence[float],
                         n: int = 64, tol: float = 1e-9, rng=None,
                         tabulate: bool = True) -> LocalMMResult:
    """Both sides of the local identity on U(1)^4 by tensor-grid quadrature.

    ``f(theta1, theta2, theta3, theta4)`` must accept broadcast arrays.  Time
    derivatives of the heat kernels are exact; the mixed gradient is a
    spectral derivative on the grid.  The computation is repeated at ``2n``
    and both sides must agree to ``tol``.
    """
    rng = rng or np.random.default_rng(0)
    check_u1_extended_invariance(f, rng)
    lhs, rhs = _local_sides(f, alphas, times, n, tabulate)
    lhs2, rhs2 = _local_sides(f, alphas, times, 2 * n, tabulate)
    gap = max(abs(lhs - lhs2), abs(rhs - rhs2))
    if gap > tol:
        raise GridTooCoarse(f"grid {n} and {2 * n} differ by {gap:.2e}")
    return LocalMMResult(float(lhs), float(rhs), float(abs(lhs - rhs)), float(abs(lhs2 - rhs2)), n)


# ---------------------------------------------------------------------------
# words with the crossing pattern, gradients and extended invariance

@dataclass(frozen=True)
class WilsonWord:
    """``tr hol(first . second)`` where ``first`` leaves along e1 and returns
    along e4, and ``second`` leaves along e2 and returns along e3."""

    first: tuple[int, ...]
    second: tuple[int, ...]
    frame: CrossingFrame

    @classmethod
    def from_loop(cls, pm: PlanarMap, loop: LoopWord, frame: CrossingFrame) -> "WilsonWord":
        first, second = split_loop(loop, frame)
        word = cls(first.steps, second.steps, frame)
        word.check(pm)
        return word

    def check(self, pm: PlanarMap) -> None:
        e1, e2, e3, e4 = self.frame.halves
        ok = (pm.tail_half(self.first[0]) == e1 and pm.head_half(self.first[-1]) == e4
              and pm.tail_half(self.second[0]) == e2 and pm.head_half(self.second[-1]) == e3)
        if not ok:
            raise PatternMismatch("word does not leave along e1, e2 and return along e4, e3")

    @property
    def steps(self) -> tuple[int, ...]:
        return self.first + self.second


def wilson_value(word: WilsonWord, config: Mapping[int, np.ndarray]):
    return ntrace(holonomy(word.steps, config))


def grad_dot_word(pm: PlanarMap, word: WilsonWord, config: Mapping[int, np.ndarray]):
    """Closed form of the mixed gradient in the e1 and e2 variables:
    ``-tr hol(first) * tr hol(second)``."""
    word.check(pm)
    return -ntrace(holonomy(word.first, config)) * ntrace(holonomy(word.second, config))


def insert_at_start(pm: PlanarMap, config: Mapping[int, np.ndarray], signed_edge: int,
                    factor: np.ndarray) -> dict[int, np.ndarray]:
    """Right-multiply the variable of the outgoing ``signed_edge`` by ``factor``.

    For ``+k`` this is ``x_k -> x_k factor``; for ``-k`` the variable of the
    reversed edge is ``x_k^-1``, so ``x_k -> factor^-1 x_k``.
    """
    out = dict(config)
    k = abs(signed_edge)
    out[k] = out[k] @ factor if signed_edge > 0 else dagger(factor) @ out[k]
    return out


def grad_dot_edges_fd(pm: PlanarMap, f: Callable, config: Mapping[int, np.ndarray],
                      frame: CrossingFrame, spec: GroupSpec, i: int = 0, j: int = 1,
                      h: float = 1e-4):
    """Finite-difference mixed gradient of ``f`` in the variables of e_{i+1}, e_{j+1}.

    When both directions live on one edge the two insertions compose.
    """
    ei, ej = frame.edges[i], frame.edges[j]

    def g(s, t):
        return f(insert_at_start(pm, insert_at_start(pm, config, ei, s), ej, t))

    return mixed_fd(g, spec, h)


def grad_edges_fd(pm: PlanarMap, f: Callable, config: Mapping[int, np.ndarray],
                  signed_edge: int, x: np.ndarray, h: float = 1e-4):
    """Derivative of ``f`` along ``exp(sX)`` inserted at the start of an outgoing edge."""
    from .group_core import expm

    p, m = expm(h * x), expm(-h * x)
    return (f(insert_at_start(pm, config, signed_edge, p))
            - f(insert_at_start(pm, config, signed_edge, m))) / (2 * h)


def extended_gauge_check(pm: PlanarMap, f: Callable, frame: CrossingFrame, spec: GroupSpec,
                         trials: int, rng: np.random.Generator) -> float:
    """Largest ``|f - f o substitution|`` over random configurations.

    The substitutions right-multiply the variables of (e1, e3) or (e2, e4) by
    a common random ``x``; repeated edges receive both insertions.
    """
    worst = 0.0
    for _ in range(trials):
        config = {k: haar_unitary(spec, rng) for k in pm.edge_ids}
        x = haar_unitary(spec, rng)
        base = f(config)
        for a, b in ((0, 2), (1, 3)):
            moved = insert_at_start(pm, insert_at_start(pm, config, frame.edges[a], x),
                                    frame.edges[b], x)
            worst = max(worst, float(np.abs(f(moved) - base)))
    return worst
