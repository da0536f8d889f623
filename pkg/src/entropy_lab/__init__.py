"""Summation operators on trees: norms, entropy numbers, certified scaling."""

from .certificate import Certificate, entropy_certificate
from .entropy import (
    BoundExpr,
    EntropyEstimate,
    combine_scale,
    combine_sum,
    cover_profile,
    estimates_to_csv,
    greedy_cover_estimate,
    kuhn_value,
    lifshits_combine,
    matrix_norm_upper,
    net_upper,
    packing_lower,
    packing_profile,
    sample_lp_ball,
    sample_lp_sphere,
    schuett,
    volumetric_lower,
)
from .hset import (
    HProfile,
    Schedule,
    TauFn,
    TAU_CONST,
    check_hset_census,
    generate_hset_tree,
    h_eval,
    h_level_target,
    schedule,
    schedule_from_profile,
    slowly_varying_check,
    validate_critical,
)
from .partition import (
    PartitionFamily,
    VertexWeight,
    balanced_partition,
    dyadic_family,
)
from .summation import (
    NormEstimate,
    WeightScheme,
    apply,
    apply_adjoint,
    hardy_bound,
    make_weights,
    norm_oracle,
    operator_matrix,
    weights_for_tree,
)
from .trees import (
    Layering,
    SubtreePartition,
    Tree,
    build_tree,
    full_tree,
    layer_components,
    path_tree,
    random_tree,
)

__all__ = [
    "BoundExpr",
    "Certificate",
    "EntropyEstimate",
    "HProfile",
    "Layering",
    "NormEstimate",
    "PartitionFamily",
    "Schedule",
    "SubtreePartition",
    "TAU_CONST",
    "TauFn",
    "Tree",
    "VertexWeight",
    "WeightScheme",
    "apply",
    "apply_adjoint",
    "balanced_partition",
    "build_tree",
    "check_hset_census",
    "combine_scale",
    "combine_sum",
    "cover_profile",
    "dyadic_family",
    "entropy_certificate",
    "estimates_to_csv",
    "full_tree",
    "generate_hset_tree",
    "greedy_cover_estimate",
    "h_eval",
    "h_level_target",
    "hardy_bound",
    "kuhn_value",
    "layer_components",
    "lifshits_combine",
    "make_weights",
    "matrix_norm_upper",
    "net_upper",
    "norm_oracle",
    "operator_matrix",
    "packing_lower",
    "packing_profile",
    "path_tree",
    "random_tree",
    "sample_lp_ball",
    "sample_lp_sphere",
    "schedule",
    "schedule_from_profile",
    "schuett",
    "slowly_varying_check",
    "validate_critical",
    "volumetric_lower",
    "weights_for_tree",
]

__version__ = "0.1.0"
