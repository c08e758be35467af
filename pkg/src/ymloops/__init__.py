"""Wilson loops of planar Yang-Mills: lasso Monte Carlo, crossing identities and the large-N limit."""

__version__ = "0.1.0"

from .errors import YMError
from .group_core import GroupSpec
from .master_field import MasterFieldResult, canonical_key, master_value, mc_oracle
from .mm_verify import (
    MMReport,
    local_mm_u1_residual,
    mm_residual,
    mm_residuals,
    two_loop_residual,
    unbounded_face_residual,
)
from .planar_map import (
    CrossingFrame,
    LoopWord,
    PlanarMap,
    build_map,
    crossing_frames,
    genericize,
    reduce_subloop,
    split_loop,
    standard_example,
    subdivide_edge,
)
from .ym_measure import lasso_basis, loop_in_lassos, spanning_tree, wilson_estimate

__all__ = [
    "CrossingFrame", "GroupSpec", "LoopWord", "MMReport", "MasterFieldResult", "PlanarMap",
    "YMError", "build_map", "canonical_key", "crossing_frames", "genericize", "lasso_basis",
    "local_mm_u1_residual", "loop_in_lassos", "master_value", "mc_oracle", "mm_residual",
    "mm_residuals", "reduce_subloop", "spanning_tree", "split_loop", "standard_example",
    "subdivide_edge", "two_loop_residual", "unbounded_face_residual", "wilson_estimate",
]
