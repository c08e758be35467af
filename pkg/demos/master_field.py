"""Large-N values from the crossing equations, checked against U(512) sampling.

The doubly wound loop with an empty annulus has value exp(-t)(1 - t), which
changes sign at t = 1.
"""

from math import exp

from ymloops import master_value, mc_oracle, standard_example

print("doubly wound loop")
for t in (0.5, 1.0, 1.5, 2.0):
    pm, loop, areas = standard_example("double_wound", s=t, a=0.0)
    res = master_value(pm, loop, areas)
    print(f"  t={t}: crossing equations {res.real:+.6f}   exp(-t)(1-t) {exp(-t) * (1 - t):+.6f}")

pm, loop, areas = standard_example("double_wound", s=2.0, a=0.0)
mc = mc_oracle(pm, loop, areas, N=512, samples=4, seed=0)
print(f"  t=2 with U(512) samples: {mc.value:+.4f} +- {mc.stderr:.4f}")

for name in ("fig2_example", "lasso_example"):
    pm, loop, areas = standard_example(name)
    res = master_value(pm, loop, areas)
    print(f"{name}: {res.real:.6f} (recursion depth {res.depth}, {res.memo['nodes']} sub-loops)")
