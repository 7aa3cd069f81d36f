"""Finite quasigroup (Latin square) approximations of unimodular groups."""
from .groups import (
    AffineLine,
    CompactWindow,
    FiniteGroup,
    GroupModel,
    KindMismatch,
    NeighborhoodSpec,
    RealLine,
    Torus,
    dist,
    inv,
    model_from_spec,
    mul,
)
from .latin import (
    GroupedPartition,
    IntegerAmalgam,
    LatinSquare,
    PartialLatinSquare,
    amalgamation,
    brute_force_realize,
    complete_partial,
    gqq_of,
    loopify,
    realize_amalgamation,
    realize_partial,
    round_to_amalgam,
)
from .partitioning import (
    AtomTooCoarse,
    CoverInfeasible,
    HallViolation,
    Partition,
    atomize,
    build_cover,
    lattice_partition,
    rado_allocate,
    singleton_partition,
    verify_partition,
)
from .pipeline import (
    ApproximationReport,
    ApproxMap,
    ProbeReport,
    approximate_compact,
    approximate_locally_compact,
    loop_approximate,
    unimodularity_probe,
)
from .tensor import (
    LawViolation,
    SupportSets,
    WTensor,
    line_sums,
    support_sets,
    verify_line_laws,
    w_exact,
    w_montecarlo,
)

__version__ = "0.1.0"
