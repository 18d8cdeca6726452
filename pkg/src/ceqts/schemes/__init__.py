"""Scheme parameters, code templates, polynomial networks and encoders."""

from .encoding import (
    LinearEncoding,
    ShareLayout,
    build_encoding,
    drop_shares,
    encode,
    encode_concat,
    encode_with_reference,
    realize,
)
from .network import UnitNetwork, build_network
from .spec import (
    BASIC,
    CONCAT_FIXED,
    CONCAT_UNIVERSAL,
    FIXED,
    QTS,
    RAMP,
    UNIVERSAL,
    VARIANTS,
    SchemeSpec,
    canonical_variant,
    derive_params,
)
from .staircase import StaircaseAssembly, build_staircase_assembly

__all__ = [
    "BASIC",
    "CONCAT_FIXED",
    "CONCAT_UNIVERSAL",
    "FIXED",
    "QTS",
    "RAMP",
    "UNIVERSAL",
    "VARIANTS",
    "LinearEncoding",
    "SchemeSpec",
    "ShareLayout",
    "StaircaseAssembly",
    "UnitNetwork",
    "build_encoding",
    "build_network",
    "build_staircase_assembly",
    "canonical_variant",
    "derive_params",
    "drop_shares",
    "encode",
    "encode_concat",
    "encode_with_reference",
    "realize",
]
