"""Twin-width tools for totally ordered binary structures."""
from twwlab.core import (
    GRAPH,
    AtomicTypeCode,
    ContractionSequence,
    OrderedStructure,
    Signature,
    TwwError,
    atp,
    red_degree,
    types_count,
    verify_contraction_sequence,
)

__version__ = "0.1.0"
