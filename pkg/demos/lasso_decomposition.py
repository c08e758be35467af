"""Rewrite a loop as a word in the face lassos and sample it.

The map has three vertices and six edges; the loop visits every edge once and
crosses itself at each vertex.
"""

from ymloops.planar_map import example_faces, standard_example
from ymloops.ym_measure import lasso_basis, loop_in_lassos, spanning_tree

pm, loop, areas = standard_example("lasso_example")
names = {f: p for p, f in example_faces("lasso_example", pm).items()}

tree = spanning_tree(pm, edges=[3, 4], root=0)
basis = lasso_basis(pm, tree, 0)
print("tree edges:", sorted(tree.edges))
for f in basis.order:
    print(f"  lasso {names[f]}: edges {basis.words[f]}")

word = loop_in_lassos(pm, loop, basis)
pretty = " ".join(names[f] + ("" if e > 0 else "^-1") for f, e in word)
print("loop", loop.steps, "=", pretty)
