from math import exp, pi

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from ymloops.errors import NonpositiveTime, SizeMismatch
from ymloops.group_core import (
    GroupSpec, contract_basis, dagger, expm, haar_unitary, heat_sample, inner, ntrace,
    random_algebra, reunitarize, u1_heat_density, u1_heat_density_dt, u1_heat_sample,
    unitarity_defect, unitary_basis, grad_fd, laplacian_fd, grad_dot_fd,
)

sizes = st.integers(min_value=1, max_value=6)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(n=sizes, seed=seeds, scale=st.floats(min_value=1e-3, max_value=30.0))
def test_expm_matches_scipy(n, seed, scale):
    rng = np.random.default_rng(seed)
    x = scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    ref = scipy.linalg.expm(x)
    assert np.abs(expm(x) - ref).max() <= 1e-10 * max(1.0, np.abs(ref).max())


@settings(max_examples=40, deadline=None)
@given(n=sizes, seed=seeds, scale=st.floats(min_value=0.0, max_value=50.0))
def test_expm_of_skew_hermitian_is_unitary(n, seed, scale):
    rng = np.random.default_rng(seed)
    x = scale * random_algebra(GroupSpec(n), rng)
    assert unitarity_defect(expm(x)) < 1e-12


def test_expm_stacks_match_single():
    rng = np.random.default_rng(0)
    xs = rng.standard_normal((5, 3, 3)) * np.array([0.01, 0.3, 1.0, 4.0, 20.0])[:, None, None]
    stacked = expm(xs)
    for x, y in zip(xs, stacked):
        assert np.allclose(expm(x), y, atol=1e-12, rtol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_basis_is_orthonormal(n):
    spec = GroupSpec(n)
    basis = unitary_basis(spec)
    assert basis.shape == (n * n, n, n)
    gram = np.array([[inner(spec, x, y) for y in basis] for x in basis])
    assert np.allclose(gram, np.eye(n * n), atol=1e-12)
    assert np.allclose(basis + dagger(basis), 0)


def test_contract_basis_rejects_wrong_size():
    with pytest.raises(SizeMismatch):
        contract_basis(GroupSpec(3), np.eye(2))


def test_group_size_must_be_positive():
    with pytest.raises(ValueError):
        GroupSpec(0)


@settings(max_examples=30, deadline=None)
@given(n=sizes, seed=seeds, eps=st.floats(min_value=1e-9, max_value=1e-4))
def test_reunitarize_restores_unitarity(n, seed, eps):
    rng = np.random.default_rng(seed)
    u = haar_unitary(GroupSpec(n), rng)
    noisy = u + eps * rng.standard_normal((n, n))
    fixed = reunitarize(noisy)
    assert unitarity_defect(fixed) < 1e-10
    assert np.abs(fixed - u).max() < 10 * eps * n


def test_haar_moments():
    # E|tr U|^2 = 1/N^2 for Haar U(N) with the normalized trace
    rng = np.random.default_rng(1)
    for n in (1, 2, 4):
        u = haar_unitary(GroupSpec(n), rng, size=40_000)
        tr = ntrace(u)
        assert abs(tr.mean()) < 0.02
        assert abs(np.mean(np.abs(tr) ** 2) - 1 / n**2) < 0.03 / n


@pytest.mark.parametrize("t", [0.1, 0.7, 3.0])
def test_u1_density_normalized(t):
    total, _ = quad(lambda th: u1_heat_density(t, th, haar=False), -pi, pi, limit=200)
    assert total == pytest.approx(1.0, abs=1e-12)
    haar_total, _ = quad(lambda th: u1_heat_density(t, th) / (2 * pi), -pi, pi, limit=200)
    assert haar_total == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("t", [0.2, 1.0, 2.5])
def test_u1_density_solves_heat_equation(t):
    theta = np.linspace(-pi, pi, 41)
    dt = 1e-5
    fd_t = (u1_heat_density(t + dt, theta) - u1_heat_density(t - dt, theta)) / (2 * dt)
    assert np.allclose(u1_heat_density_dt(t, theta), fd_t, atol=1e-7)
    d = 1e-4
    second = (u1_heat_density(t, theta + d) - 2 * u1_heat_density(t, theta)
              + u1_heat_density(t, theta - d)) / d**2
    assert np.allclose(u1_heat_density_dt(t, theta), 0.5 * second, atol=1e-5)


def test_u1_density_needs_positive_time():
    with pytest.raises(NonpositiveTime):
        u1_heat_density(0.0, 0.3)


def test_u1_sample_matches_density_moment():
    rng = np.random.default_rng(2)
    t = 0.8
    x = u1_heat_sample(t, rng, size=200_000)
    assert np.all((x >= -pi) & (x < pi))
    assert np.mean(np.cos(2 * x)) == pytest.approx(exp(-2 * t), abs=0.01)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("t", [0.3, 1.5])
def test_heat_sample_trace_law(n, t):
    est = ntrace(heat_sample(GroupSpec(n), t, np.random.default_rng(3), size=20_000)).real
    se = est.std() / np.sqrt(est.size)
    assert abs(est.mean() - exp(-t / 2)) < 4 * se + 2e-3


def test_heat_sample_zero_time_is_identity():
    u = heat_sample(GroupSpec(3), 0.0, np.random.default_rng(0), size=4)
    assert np.allclose(u, np.eye(3))


def test_heat_sample_is_seeded():
    spec = GroupSpec(2)
    a = heat_sample(spec, 0.5, np.random.default_rng(9), size=3)
    b = heat_sample(spec, 0.5, np.random.default_rng(9), size=3)
    assert np.array_equal(a, b)


def test_laplacian_of_trace():
    # Delta tr U = -tr U for the normalized trace on U(N)
    spec = GroupSpec(3)
    rng = np.random.default_rng(4)
    a = haar_unitary(spec, rng)
    lap = laplacian_fd(ntrace, a, spec)
    assert lap == pytest.approx(-ntrace(a), abs=1e-6)


def test_grad_dot_of_product_of_traces():
    # sum_X d/ds d/dt tr(A e^{sX} B e^{tX}) = -tr(A) tr(B)
    spec = GroupSpec(3)
    rng = np.random.default_rng(5)
    a, b = haar_unitary(spec, rng), haar_unitary(spec, rng)
    val = grad_dot_fd(lambda x, y: ntrace(x @ y), a, b, spec)
    assert val == pytest.approx(-ntrace(a) * ntrace(b), abs=1e-6)


def test_grad_fd_sides():
    spec = GroupSpec(2)
    rng = np.random.default_rng(6)
    a = haar_unitary(spec, rng)
    x = random_algebra(spec, rng)
    assert grad_fd(ntrace, a, x) == pytest.approx(ntrace(a @ x), abs=1e-8)
    assert grad_fd(ntrace, a, x, side="left") == pytest.approx(ntrace(x @ a), abs=1e-8)
    with pytest.raises(ValueError):
        grad_fd(ntrace, a, x, side="middle")
