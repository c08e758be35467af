"""U(N) numerics.

The Lie algebra u(N) carries the scaled inner product ``<X, Y> = N trace(X* Y)``
and ``tr`` always denotes the normalized trace ``trace / N``.  With this
normalization the defining representation satisfies ``sum_X X^2 = -I`` over any
orthonormal basis, so ``E tr(U_t) = exp(-t/2)`` for the heat-kernel process.

Everything here works on single matrices ``(N, N)`` and on stacks
``(..., N, N)``; sampling returns stacks when ``size`` is given.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, factorial, log2, pi, sqrt
from typing import Callable

import numpy as np

from .errors import NonpositiveTime, SizeMismatch

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class GroupSpec:
    """The group U(N)."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"group size must be a positive integer, got {self.N!r}")

    def identity(self, size=None):
        eye = np.eye(self.N, dtype=complex)
        if size is None:
            return eye
        return np.broadcast_to(eye, (size, self.N, self.N)).copy()


def ntrace(a):
    """Normalized trace over the last two axes."""
    a = np.asarray(a)
    return np.trace(a, axis1=-2, axis2=-1) / a.shape[-1]


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def inner(spec: GroupSpec, x, y):
    """``N trace(X* Y)``."""
    return spec.N * np.trace(dagger(x) @ y, axis1=-2, axis2=-1)


def unitary_basis(spec: GroupSpec) -> np.ndarray:
    """Orthonormal basis of u(N) as an array of shape ``(N**2, N, N)``.

    The basis consists of ``i E_kk / sqrt(N)``, then for each ``j < k`` the pair
    ``(E_jk - E_kj) / sqrt(2N)`` and ``i (E_jk + E_kj) / sqrt(2N)``.
    """
    n = spec.N
    out = []
    for k in range(n):
        x = np.zeros((n, n), dtype=complex)
        x[k, k] = 1j / sqrt(n)
        out.append(x)
    scale = 1.0 / sqrt(2 * n)
    for j in range(n):
        for k in range(j + 1, n):
            x = np.zeros((n, n), dtype=complex)
            x[j, k], x[k, j] = scale, -scale
            out.append(x)
            y = np.zeros((n, n), dtype=complex)
            y[j, k] = y[k, j] = 1j * scale
            out.append(y)
    return np.array(out)


def contract_basis(spec: GroupSpec, c) -> np.ndarray:
    """``sum_X X C X`` by direct summation over :func:`unitary_basis`."""
    c = np.asarray(c)
    if c.shape != (spec.N, spec.N):
        raise SizeMismatch(f"expected a {spec.N}x{spec.N} matrix, got shape {c.shape}")
    basis = unitary_basis(spec)
    return np.einsum("aij,jk,akl->il", basis, c, basis)


# ---------------------------------------------------------------------------
# matrix exponential

_PADE_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
               7: 9.504178996162932e-1, 9: 2.097847961257068e0}


def _pade_coeffs(m):
    return [factorial(2 * m - j) * factorial(m)
            / (factorial(2 * m) * factorial(j) * factorial(m - j)) for j in range(m + 1)]


_PADE = {m: _pade_coeffs(m) for m in _PADE_THETA}


def expm(x) -> np.ndarray:
    """Matrix exponential of a stack of matrices.

    Scaling and squaring around a diagonal Pade approximant whose degree
    (3, 5, 7 or 9) is chosen from the largest 1-norm in the stack, following
    Higham's backward-error bounds.  Works on ``(N, N)`` or ``(..., N, N)``.
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    norm = float(np.abs(x).sum(axis=-2).max()) if x.size else 0.0
    if norm == 0.0:
        return np.broadcast_to(np.eye(n, dtype=complex), x.shape).copy()
    squarings = 0
    for m in (3, 5, 7, 9):
        if norm <= _PADE_THETA[m]:
            break
    else:
        m = 9
        squarings = max(0, int(ceil(log2(norm / _PADE_THETA[9]))))
        x = x / 2.0 ** squarings
    b = _PADE[m]
    eye = np.broadcast_to(np.eye(n, dtype=complex), x.shape)
    x2 = x @ x
    powers = [eye, x2]
    for _ in range(2, m // 2 + 1):
        powers.append(powers[-1] @ x2)
    odd = sum(b[2 * k + 1] * powers[k] for k in range(m // 2 + 1))
    u = x @ odd
    v = sum(b[2 * k] * powers[k] for k in range(m // 2 + 1))
    r = _solve(v - u, v + u)
    for _ in range(squarings):
        r = r @ r
    return r


def _solve(a, b):
    # closed-form 2x2 inverse; batched LAPACK calls dominate otherwise
    if a.shape[-1] != 2:
        return np.linalg.solve(a, b)
    a00, a01, a10, a11 = a[..., 0, 0], a[..., 0, 1], a[..., 1, 0], a[..., 1, 1]
    det = a00 * a11 - a01 * a10
    inv = np.empty_like(a)
    inv[..., 0, 0], inv[..., 0, 1] = a11 / det, -a01 / det
    inv[..., 1, 0], inv[..., 1, 1] = -a10 / det, a00 / det
    return inv @ b


def unitarity_defect(u) -> np.ndarray:
    """``max |U* U - I|`` per matrix."""
    u = np.asarray(u)
    eye = np.eye(u.shape[-1])
    return np.abs(dagger(u) @ u - eye).max(axis=(-2, -1))


def reunitarize(u) -> np.ndarray:
    """Project near-unitary matrices onto U(N) (polar factor).

    Matrices with a small defect get Newton-Schulz steps, which converge
    quadratically to the polar factor; anything further away is projected
    through an SVD.
    """
    u = np.asarray(u, dtype=complex)
    defect = unitarity_defect(u)
    if np.all(defect < 1e-3):
        eye = np.eye(u.shape[-1])
        for _ in range(4):
            u = 0.5 * u @ (3.0 * eye - dagger(u) @ u)
            if np.all(unitarity_defect(u) < 1e-14):
                break
        return u
    w, _, vh = np.linalg.svd(u)
    return w @ vh


# ---------------------------------------------------------------------------
# sampling

def random_algebra(spec: GroupSpec, rng: np.random.Generator, size=None) -> np.ndarray:
    """Standard Gaussian element of u(N) w.r.t. the scaled inner product.

    Same law as ``sum_X c_X X`` with iid standard normal ``c_X`` over an
    orthonormal basis, but built entrywise so the cost is O(N^2).
    """
    n = spec.N
    shape = (n, n) if size is None else (size, n, n)
    m = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return (m - dagger(m)) / (2.0 * sqrt(n))


def haar_unitary(spec: GroupSpec, rng: np.random.Generator, size=None) -> np.ndarray:
    """Haar-distributed unitaries (QR of a complex Ginibre matrix, phase-fixed)."""
    n = spec.N
    shape = (n, n) if size is None else (size, n, n)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def default_steps(t: float) -> int:
    """Random-walk steps used for a heat-kernel sample at time ``t``."""
    return max(8, int(ceil(64.0 * t)))


def heat_sample(spec: GroupSpec, t: float, rng: np.random.Generator,
                steps: int | None = None, size: int | None = None) -> np.ndarray:
    """Approximate draw from the heat kernel at time ``t``.

    Geodesic random walk ``prod_j exp(sqrt(t/m) xi_j)`` with ``xi_j`` standard
    Gaussian in u(N).  For N = 1 the walk is exactly Gaussian, so it is drawn
    in one step.  ``t = 0`` gives the identity.
    """
    if t < 0:
        raise ValueError(f"heat time must be nonnegative, got {t}")
    if t == 0:
        return spec.identity(size)
    m = default_steps(t) if steps is None else int(steps)
    if m < 1:
        raise ValueError("steps must be >= 1")
    if spec.N == 1:
        theta = rng.normal(0.0, sqrt(t), size=() if size is None else (size,))
        return np.exp(1j * theta)[..., None, None]
    eps = sqrt(t / m)
    u = expm(eps * random_algebra(spec, rng, size))
    for _ in range(m - 1):
        u = expm(eps * random_algebra(spec, rng, size)) @ u
    return reunitarize(u)


def u1_heat_density(t: float, theta, haar: bool = True):
    """Heat kernel on U(1) at angle ``theta``.

    The wrapped Gaussian ``sum_k (2 pi t)^{-1/2} exp(-(theta + 2 pi k)^2 / (2t))``
    is a density w.r.t. ``d theta``.  With ``haar=True`` (default) it is
    multiplied by ``2 pi`` so it becomes a density w.r.t. the normalized Haar
    measure ``d theta / 2 pi``.
    """
    val = _wrapped(t, theta, derivative=False)
    return 2 * pi * val if haar else val


def u1_heat_density_dt(t: float, theta, haar: bool = True):
    """Exact time derivative of :func:`u1_heat_density` (term-wise)."""
    val = _wrapped(t, theta, derivative=True)
    return 2 * pi * val if haar else val


def _wrapped(t, theta, derivative):
    if t <= 0:
        raise NonpositiveTime(f"heat kernel density needs t > 0, got {t}")
    theta = np.mod(np.asarray(theta, dtype=float) + pi, 2 * pi) - pi
    # beyond kmax every term is below 1e-16 relative to the peak
    kmax = int(ceil((sqrt(2 * t * 37.0) + pi) / (2 * pi))) + 1
    ks = np.arange(-kmax, kmax + 1)
    shifted = theta[..., None] + 2 * pi * ks
    terms = np.exp(-shifted ** 2 / (2 * t)) / sqrt(2 * pi * t)
    if derivative:
        terms = terms * (shifted ** 2 / (2 * t * t) - 1.0 / (2 * t))
    return terms.sum(axis=-1)


def u1_heat_sample(t: float, rng: np.random.Generator, size=None):
    """Exact U(1) heat-kernel angle: ``Normal(0, t)`` reduced to ``[-pi, pi)``."""
    if t < 0:
        raise ValueError(f"heat time must be nonnegative, got {t}")
    x = rng.normal(0.0, sqrt(t), size=size)
    return np.mod(x + pi, 2 * pi) - pi


# ---------------------------------------------------------------------------
# finite-difference differential operators

def _exp_direction(x, s):
    return expm(s * np.asarray(x, dtype=complex))


def grad_fd(f: Callable, a, x, side: str = "right", h: float = 1e-4):
    """Central difference of ``s -> f(a exp(sX))`` at ``s = 0``.

    ``side="right"`` multiplies the exponential on the right of ``a`` (the
    left-invariant derivative); ``side="left"`` uses ``exp(sX) a``.
    """
    plus, minus = _exp_direction(x, h), _exp_direction(x, -h)
    if side == "right":
        return (f(a @ plus) - f(a @ minus)) / (2 * h)
    if side == "left":
        return (f(plus @ a) - f(minus @ a)) / (2 * h)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def laplacian_fd(f: Callable, a, spec: GroupSpec, h: float = 1e-4, side: str = "right"):
    """Sum over the basis of second central differences of ``f``."""
    f0 = f(a)
    total = 0.0
    for x in unitary_basis(spec):
        plus, minus = _exp_direction(x, h), _exp_direction(x, -h)
        if side == "right":
            fp, fm = f(a @ plus), f(a @ minus)
        else:
            fp, fm = f(plus @ a), f(minus @ a)
        total = total + (fp - 2 * f0 + fm) / (h * h)
    return total


def mixed_fd(g: Callable, spec: GroupSpec, h: float = 1e-4):
    """``sum_X d^2/ds dt g(exp(sX), exp(tX))`` at ``s = t = 0``.

    ``g`` receives the two exponentials and decides where to insert them,
    which covers both the plain two-variable case and the substitutions needed
    when one edge carries both crossing variables.
    """
    total = 0.0
    for x in unitary_basis(spec):
        p, m = _exp_direction(x, h), _exp_direction(x, -h)
        total = total + (g(p, p) - g(p, m) - g(m, p) + g(m, m)) / (4 * h * h)
    return total


def grad_dot_fd(f: Callable, a, b, spec: GroupSpec, h: float = 1e-4):
    """``sum_X d^2/ds dt f(a exp(sX), b exp(tX))`` by mixed central differences."""
    return mixed_fd(lambda s, t: f(a @ s, b @ t), spec, h)
