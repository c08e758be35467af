"""Exact U(1) check of the local identity by grid quadrature on the 4-torus."""

import numpy as np

from ymloops.mm_verify import local_mm_u1_residual

functions = {
    "cos(a-c+b-d)": lambda a, b, c, d: np.cos(a - c + b - d),
    "cos(2(a-c)+(b-d))": lambda a, b, c, d: np.cos(2 * (a - c) + (b - d)),
    "cos(a-c)cos(2(b-d)) + sin(a-c+b-d)":
        lambda a, b, c, d: np.cos(a - c) * np.cos(2 * (b - d)) + np.sin(a - c + b - d),
}

rng = np.random.default_rng(0)
alphas = rng.uniform(-np.pi, np.pi, 4)
times = rng.uniform(0.5, 2.0, 4)
print("alpha", np.round(alphas, 3), "times", np.round(times, 3))
for label, f in functions.items():
    res = local_mm_u1_residual(f, alphas, times, n=64)
    print(f"{label:36s} lhs {res.lhs:+.12f} rhs {res.rhs:+.12f} residual {res.residual:.1e}")
