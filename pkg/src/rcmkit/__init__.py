"""Relational causal models, abstract ground graphs and relational d-separation."""
from .agg import (
    AbstractGroundGraph,
    IntersectionVariable,
    Variant,
    bar,
    build_agg,
    build_all_aggs,
    co_intersectable,
)
from .dsep import (
    CiQuery,
    agg_d_separated,
    check_adjacency_faithfulness,
    check_orientation_faithfulness,
    d_separated,
    d_separated_batch,
    relational_dsep_oracle,
)
from .errors import (
    BoundError,
    ConstructionError,
    DomainError,
    ModelInstantiationError,
    RcmError,
    SchemaMismatchError,
)
from .rcm import GroundGraph, Rcm, RelationalDependency, ground_graph, validate_model
from .schema import (
    MANY,
    ONE,
    RelationalSchema,
    RelationalVariable,
    enumerate_paths,
    extend,
    intersectable,
    llrsp,
    pivots,
    validate_path,
)
from .skeleton import RelationalSkeleton, enumerate_skeletons, minimal_skeleton, terminal_set

__version__ = "0.1.0"

__all__ = [
    "AbstractGroundGraph",
    "BoundError",
    "CiQuery",
    "ConstructionError",
    "DomainError",
    "GroundGraph",
    "IntersectionVariable",
    "MANY",
    "ModelInstantiationError",
    "ONE",
    "Rcm",
    "RcmError",
    "RelationalDependency",
    "RelationalSchema",
    "RelationalSkeleton",
    "RelationalVariable",
    "SchemaMismatchError",
    "Variant",
    "agg_d_separated",
    "bar",
    "build_agg",
    "build_all_aggs",
    "check_adjacency_faithfulness",
    "check_orientation_faithfulness",
    "co_intersectable",
    "d_separated",
    "d_separated_batch",
    "enumerate_paths",
    "enumerate_skeletons",
    "extend",
    "ground_graph",
    "intersectable",
    "llrsp",
    "minimal_skeleton",
    "pivots",
    "relational_dsep_oracle",
    "terminal_set",
    "validate_model",
    "validate_path",
]
