"""Character error vectors: page-level text extraction metrics that do not need reading order."""

from .charvec import CharDistribution, CharVector, CountUnit, NormalizationPolicy, char_vector, normalize_text, to_distribution
from .decompose import (
    CoteComponents,
    DecompositionReport,
    Dominant,
    TriageVerdict,
    VectorSet,
    build_vectors,
    cote_approx,
    decompose,
    triage,
)
from .geometry import Box, Granularity, PageLayout, Polygon, Region, assign_characters, infer_char_positions, point_in_geometry
from .metrics import JensenShannonDistance, cdd_jsd, cer, spacd, spacer_macro, spacer_micro

__version__ = "0.1.0"

__all__ = [
    "CharDistribution",
    "CharVector",
    "CountUnit",
    "NormalizationPolicy",
    "char_vector",
    "normalize_text",
    "to_distribution",
    "CoteComponents",
    "DecompositionReport",
    "Dominant",
    "TriageVerdict",
    "VectorSet",
    "build_vectors",
    "cote_approx",
    "decompose",
    "triage",
    "Box",
    "Granularity",
    "PageLayout",
    "Polygon",
    "Region",
    "assign_characters",
    "infer_char_positions",
    "point_in_geometry",
    "JensenShannonDistance",
    "cdd_jsd",
    "cer",
    "spacd",
    "spacer_macro",
    "spacer_micro",
]
