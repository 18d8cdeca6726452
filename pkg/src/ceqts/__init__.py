"""Exact simulation and verification of communication-efficient quantum
threshold secret sharing over prime-dimension qudits."""

__version__ = "0.1.0"

from .field import FMatrix, field_inverse, mat_inv, mat_mul, rank, submatrix, vandermonde  # noqa: E402
from .recovery import GateSchedule, communication_cost, execute, plan_recovery, recover  # noqa: E402
from .schemes import SchemeSpec, build_staircase_assembly, derive_params, drop_shares, encode, encode_concat  # noqa: E402

__all__ = [
    "FMatrix",
    "GateSchedule",
    "SchemeSpec",
    "__version__",
    "build_staircase_assembly",
    "communication_cost",
    "derive_params",
    "drop_shares",
    "encode",
    "encode_concat",
    "execute",
    "field_inverse",
    "mat_inv",
    "mat_mul",
    "plan_recovery",
    "rank",
    "recover",
    "submatrix",
    "vandermonde",
]
