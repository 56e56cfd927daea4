"""Cluster ensembles with decorrelated features, Uniformity-weighted evidence accumulation."""

from .consensus import (
    WoceResult,
    average_linkage,
    cut_dendrogram,
    eac_matrix,
    run_eac,
    run_woce,
    weac_matrix,
)
from .core import (
    CoAssociationMatrix,
    ConstraintSet,
    DataMatrix,
    Partition,
    ReferenceSet,
    WoceError,
    cluster_sizes,
    validate_partition,
)
from .diversity import uniformity, weight_vector
from .generators import build_schedule, generate_reference_set
from .preprocess import constraint_projection, map_independent

__version__ = "0.1.0"
