"""Exact qudit state engine with a sparse backend and an affine-coset backend.

The module-level functions accept either backend and dispatch on type.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from ..errors import ShapeError
from ..field import FMatrix
from .coset import CosetDensity, CosetState
from .density import DensityOperator, dense_fidelity, entropy_from_eigenvalues, max_deviation, relative_deviation
from .sparse import SparseState, max_difference, overlap, state_from_secret, superpose

State = Union[SparseState, CosetState]
Reduced = Union[DensityOperator, CosetDensity]

__all__ = [
    "CosetDensity",
    "CosetState",
    "DensityOperator",
    "SparseState",
    "State",
    "Reduced",
    "apply_ctrl_add",
    "apply_linear",
    "apply_reorder",
    "attach_uniform_registers",
    "fidelity",
    "max_deviation",
    "max_difference",
    "overlap",
    "partial_trace",
    "reduced_deviation",
    "relative_deviation",
    "state_from_secret",
    "superpose",
    "to_sparse",
    "von_neumann_entropy",
]


def apply_linear(state: State, K: FMatrix, indices: Sequence[int]) -> State:
    return state.apply_linear(K, indices)


def apply_ctrl_add(state: State, alpha: int, control: int, target: int) -> State:
    return state.apply_ctrl_add(alpha, control, target)


def apply_reorder(state: State, permutation: Sequence[int]) -> State:
    return state.apply_reorder(permutation)


def attach_uniform_registers(state: State, count: int) -> State:
    return state.attach_uniform_registers(count)


def partial_trace(state: State, keep: Sequence[int]) -> Reduced:
    return state.partial_trace(keep)


def to_sparse(state: State) -> SparseState:
    return state if isinstance(state, SparseState) else state.to_sparse()


def fidelity(rho: Reduced, psi: SparseState) -> float:
    """<psi|rho|psi> for a pure state psi on the same qudits as rho."""
    if psi.n_qudits != rho.n_qudits or psi.q != rho.q:
        raise ShapeError(f"state on {psi.n_qudits} qudits, operator on {rho.n_qudits}")
    words = psi.words.astype(np.int64)
    if isinstance(rho, CosetDensity):
        return rho.fidelity_sparse(words, psi.amps)
    return dense_fidelity(rho, words, psi.amps)


def von_neumann_entropy(rho: Reduced) -> float:
    """-tr(rho log_q rho), in qudits."""
    if isinstance(rho, CosetDensity):
        return rho.entropy()
    return entropy_from_eigenvalues(rho.eigenvalues(), rho.q)


def reduced_deviation(a: Reduced, b: Reduced, relative: bool = False) -> float:
    """Entrywise distance between two reduced operators of either backend."""
    if isinstance(a, CosetDensity) and isinstance(b, CosetDensity):
        return a.relative_deviation(b) if relative else a.max_deviation(b)
    da = a.to_density() if isinstance(a, CosetDensity) else a
    db = b.to_density() if isinstance(b, CosetDensity) else b
    return relative_deviation(da, db) if relative else max_deviation(da, db)
