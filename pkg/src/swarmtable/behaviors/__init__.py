"""Interaction behaviors and relationship policies."""

from .motifs import MOTIFS, Motif, instantiate_motif
from .policies import (
    BEHAVIOR_TAGS,
    RELATIONSHIP_KINDS,
    PolicyContext,
    PolicyPack,
    policy_pack,
    run_policy_validators,
)
from .symbols import (
    SymbolTemplate,
    get_template,
    hausdorff_mm,
    load_font,
    place_strokes,
    symbol_formation,
    symbol_trajectory,
)

__all__ = [
    "MOTIFS",
    "Motif",
    "instantiate_motif",
    "BEHAVIOR_TAGS",
    "RELATIONSHIP_KINDS",
    "PolicyContext",
    "PolicyPack",
    "policy_pack",
    "run_policy_validators",
    "SymbolTemplate",
    "get_template",
    "hausdorff_mm",
    "load_font",
    "place_strokes",
    "symbol_formation",
    "symbol_trajectory",
]
