"""Latin squares, integer amalgams, detachment, completion and loops."""
from .amalgam import IntegerAmalgam, RoundingInfeasible, minimal_integral_t, round_to_amalgam
from .completion import complete_partial
from .realize import (
    PaddingInfeasible,
    RealizationFailed,
    brute_force_realize,
    padded_outline,
    realize_amalgamation,
    realize_outline,
    realize_partial,
)
from .squares import (
    EMPTY,
    GroupedPartition,
    LatinSquare,
    NotLatin,
    PartialLatinSquare,
    amalgamation,
    gqq_of,
    is_latin,
    is_partial_latin,
    loop_permutations,
    loopify,
    random_latin_square,
)

__all__ = [
    "EMPTY", "GroupedPartition", "IntegerAmalgam", "LatinSquare", "NotLatin", "PaddingInfeasible",
    "PartialLatinSquare", "RealizationFailed", "RoundingInfeasible", "amalgamation",
    "brute_force_realize", "complete_partial", "gqq_of", "is_latin", "is_partial_latin",
    "loop_permutations", "loopify", "minimal_integral_t", "padded_outline", "random_latin_square",
    "realize_amalgamation", "realize_outline", "realize_partial", "round_to_amalgam",
]
