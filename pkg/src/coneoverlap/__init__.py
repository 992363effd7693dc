"""Certified verification toolkit for the cone-neighborhood decomposition
of R^3 and the uniform overlap of its Minkowski sums."""

from .geom import (
    DEFAULT_SLACK,
    IN,
    OUT,
    UNKNOWN,
    UNKNOWN_BUDGET,
    Annulus,
    Interval,
    Point2,
    Point3,
    Rect2,
    Verdict,
    annulus_contains_rect,
    iv_eval_arg,
    iv_eval_norm,
    rect_contains,
    rect_norm_range,
    rotate,
)
from .cone import (
    ENLARGED,
    STANDARD,
    ConeSlab,
    DecompositionParams,
    RadialInterval,
    SlabParam,
    SlabVariant,
    eps_neighborhood,
    eps_slab_contains,
    index_set,
    rotate_slab_index,
    sector_contains,
    slab_contains,
    slab_distance,
    slab_param_point,
)
from .minkowski import (
    DEFAULT_BUDGET,
    SearchBudget,
    SumSpec,
    eps_sum_contains,
    quick_reject,
    sum_contains_bruteforce,
    sum_contains_certified,
)
from .overlap import (
    Fiber,
    OverlapCount,
    OverlapReport,
    class_contains,
    class_separation_constant,
    fiber,
    k0,
    overlap_count,
    overlap_scan,
)

__version__ = "0.1.0"
