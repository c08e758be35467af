"""Both sides of the crossing identity on the catalog loops.

Left side: alternating sum of face-area derivatives of E tr hol(L), from
coupled heat-kernel samples at t +- h.  Right side: E[tr hol(L1) tr hol(L2)]
for the two halves of the loop at the crossing.
"""

from ymloops import GroupSpec, crossing_frames, mm_residuals, standard_example

for name in ("figure_eight", "double_wound", "fig2_example", "lasso_example"):
    pm, loop, areas = standard_example(name)
    frames = crossing_frames(pm, loop)
    for n in (1, 2):
        reports = mm_residuals(pm, areas, loop, frames, GroupSpec(n), 20_000, seed=3)
        for fr, rep in zip(frames, reports):
            print(f"{name:13s} U({n}) vertex {fr.vertex}: lhs {rep.lhs:+.4f} rhs {rep.rhs:+.4f} "
                  f"residual {rep.residual:+.4f} (3 sigma {3 * rep.sigma:.4f}) "
                  f"{'ok' if rep.passed else 'FAIL'}")
