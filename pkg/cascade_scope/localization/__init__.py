"""
Localization in physical space and time.

This package contains:
- cutoffs: refined space/time cutoffs with certified constants, cutoff
  families and the periodic partition of unity
- covering: (K1, K2)-coverings (lattice, jittered, adversarial) and their
  grid validation
"""

from .covering import (
    Covering,
    CoveringValidation,
    adversarial_covering,
    default_coords,
    export_covering,
    jittered_covering,
    lattice_covering,
    translate_covering,
    validate_covering,
)
from .cutoffs import (
    CutoffFamily,
    CutoffSample,
    FamilyCertificate,
    PartitionElement,
    SandwichReport,
    SpaceCutoff,
    TimeCutoff,
    certify_family,
    certify_profile,
    family_for_covering,
    make_space_cutoff,
    make_time_cutoff,
    partition_of_unity,
    theorem_constant,
    verify_family_sandwich,
)

__all__ = [
    "Covering",
    "CoveringValidation",
    "CutoffFamily",
    "CutoffSample",
    "FamilyCertificate",
    "PartitionElement",
    "SandwichReport",
    "SpaceCutoff",
    "TimeCutoff",
    "adversarial_covering",
    "certify_family",
    "certify_profile",
    "default_coords",
    "export_covering",
    "family_for_covering",
    "jittered_covering",
    "lattice_covering",
    "make_space_cutoff",
    "make_time_cutoff",
    "partition_of_unity",
    "theorem_constant",
    "translate_covering",
    "validate_covering",
    "verify_family_sandwich",
]
