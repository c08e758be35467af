"""Monte Carlo Wilson loop of a simple loop against exp(-t/2)."""

from math import exp

from ymloops import GroupSpec, standard_example, wilson_estimate

for n in (1, 2, 4):
    print(f"U({n})")
    for t in (0.5, 1.0, 2.0, 4.0):
        pm, loop, areas = standard_example("simple", t=t)
        est = wilson_estimate(pm, areas, [loop], GroupSpec(n), 5000, seed=1)
        print(f"  t={t:<4} estimate {est.value:.4f} +- {est.stderr:.4f}   exp(-t/2) {exp(-t / 2):.4f}")
