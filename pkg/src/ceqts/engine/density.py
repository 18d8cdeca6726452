"""Reduced density operators stored sparsely over their support."""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .. import budget
from ..errors import ShapeError
from .words import all_words, format_word, lex_order, unique_rows

PRUNE = 1e-12


class DensityOperator:
    """A density operator on n qudits, kept as a sparse matrix over the basis
    words that carry weight (its support) rather than over all q**n words."""

    __slots__ = ("q", "n_qudits", "basis", "matrix")

    def __init__(self, q: int, n_qudits: int, basis: np.ndarray, matrix):
        basis = np.asarray(basis, dtype=np.int64).reshape(-1, n_qudits)
        matrix = sp.csr_matrix(matrix, dtype=np.complex128)
        if matrix.shape != (basis.shape[0], basis.shape[0]):
            raise ShapeError("matrix shape does not match the support basis")
        matrix.data[np.abs(matrix.data) < PRUNE] = 0
        matrix.eliminate_zeros()
        self.q = q
        self.n_qudits = n_qudits
        self.basis = basis
        self.matrix = matrix

    @classmethod
    def from_entries(cls, q: int, n_qudits: int, row_words, col_words, values) -> "DensityOperator":
        """Build from (row word, column word, value) triples; duplicates are summed."""
        row_words = np.asarray(row_words, dtype=np.int64).reshape(-1, n_qudits)
        col_words = np.asarray(col_words, dtype=np.int64).reshape(-1, n_qudits)
        both = np.concatenate([row_words, col_words])
        basis, inverse = unique_rows(both, q)
        r, c = inverse[: len(row_words)], inverse[len(row_words):]
        m = sp.coo_matrix((np.asarray(values, dtype=np.complex128), (r, c)), shape=(len(basis), len(basis)))
        return cls(q, n_qudits, basis, m.tocsr())

    @classmethod
    def from_dense(cls, q: int, n_qudits: int, dense: np.ndarray) -> "DensityOperator":
        dense = np.asarray(dense, dtype=np.complex128)
        dim = q**n_qudits
        if dense.shape != (dim, dim):
            raise ShapeError(f"expected a {dim}x{dim} matrix")
        live = np.flatnonzero((np.abs(dense) > PRUNE).any(axis=0) | (np.abs(dense) > PRUNE).any(axis=1))
        basis = all_words(n_qudits, q)[live]
        return cls(q, n_qudits, basis, dense[np.ix_(live, live)])

    @property
    def support_size(self) -> int:
        return self.basis.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def trace(self) -> complex:
        return complex(self.matrix.diagonal().sum())

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix.data, self.matrix.data)))

    def max_abs(self) -> float:
        return float(np.abs(self.matrix.data).max()) if self.matrix.nnz else 0.0

    def hermitian_error(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        return float(np.abs(diff.data).max()) if diff.nnz else 0.0

    def support_dense(self) -> np.ndarray:
        budget.require_dense(self.support_size, "dense view of the support")
        return self.matrix.toarray()

    def to_dense(self) -> np.ndarray:
        dim = self.q**self.n_qudits
        budget.require_dense(dim, "full dense density matrix")
        full = np.zeros((dim, dim), dtype=np.complex128)
        if self.support_size:
            weights = np.array([self.q ** (self.n_qudits - 1 - j) for j in range(self.n_qudits)], dtype=np.int64)
            idx = self.basis @ weights if self.n_qudits else np.zeros(self.support_size, dtype=np.int64)
            full[np.ix_(idx, idx)] = self.matrix.toarray()
        return full

    def eigenvalues(self) -> np.ndarray:
        if self.support_size == 0:
            return np.zeros(0)
        return np.linalg.eigvalsh(self.support_dense())

    def entries(self) -> dict[tuple[tuple[int, ...], tuple[int, ...]], complex]:
        coo = self.matrix.tocoo()
        out = {}
        for i, j, v in zip(coo.row, coo.col, coo.data):
            out[(tuple(int(s) for s in self.basis[i]), tuple(int(s) for s in self.basis[j]))] = complex(v)
        return out

    def dump(self) -> str:
        """One line per nonzero entry, `row|col(re,im)`, rows sorted."""
        coo = self.matrix.tocoo()
        lines = []
        for i, j, v in zip(coo.row, coo.col, coo.data):
            lines.append(
                f"{format_word(self.basis[i], self.q)}|{format_word(self.basis[j], self.q)}({v.real:.12f},{v.imag:.12f})"
            )
        return "\n".join(sorted(lines))

    def __repr__(self) -> str:
        return f"DensityOperator(q={self.q}, n_qudits={self.n_qudits}, support={self.support_size}, nnz={self.nnz})"


def _aligned(a: DensityOperator, b: DensityOperator):
    if a.q != b.q or a.n_qudits != b.n_qudits:
        raise ShapeError("density operators act on different spaces")
    basis, inverse = unique_rows(np.concatenate([a.basis, b.basis]), a.q)
    ia, ib = inverse[: a.support_size], inverse[a.support_size:]
    n = len(basis)

    def lift(op, idx):
        coo = op.matrix.tocoo()
        return sp.csr_matrix((coo.data, (idx[coo.row], idx[coo.col])), shape=(n, n))

    return lift(a, ia), lift(b, ib)


def max_deviation(a: DensityOperator, b: DensityOperator) -> float:
    """Largest entrywise |a - b|."""
    ma, mb = _aligned(a, b)
    diff = ma - mb
    return float(np.abs(diff.data).max()) if diff.nnz else 0.0


def relative_deviation(a: DensityOperator, b: DensityOperator) -> float:
    """Largest entrywise |a - b| divided by the largest entry of b.

    Raw entrywise differences shrink like 1/dim on maximally mixed supports, so
    they cannot separate operators on large spaces; the relative form can.
    """
    scale = b.max_abs()
    dev = max_deviation(a, b)
    if scale == 0.0:
        return dev
    return dev / scale


def dense_fidelity(rho: DensityOperator, words: np.ndarray, amps: np.ndarray) -> float:
    """<psi|rho|psi> for a pure state given by (words, amplitudes) on the same qudits."""
    if words.shape[1] != rho.n_qudits:
        raise ShapeError(f"state has {words.shape[1]} qudits, operator has {rho.n_qudits}")
    if rho.support_size == 0 or len(words) == 0:
        return 0.0
    basis, inverse = unique_rows(np.concatenate([rho.basis, words.astype(np.int64)]), rho.q)
    in_rho = inverse[: rho.support_size]
    in_psi = inverse[rho.support_size:]
    vec = np.zeros(len(basis), dtype=np.complex128)
    np.add.at(vec, in_psi, amps)
    sub = vec[in_rho]
    return float(np.real(np.vdot(sub, rho.matrix @ sub)))


def entropy_from_eigenvalues(values: np.ndarray, q: int) -> float:
    lam = np.clip(np.real(values), 0.0, 1.0)
    lam = lam[lam > 1e-15]
    return float(-(lam * np.log(lam)).sum() / math.log(q))


def sorted_basis(op: DensityOperator) -> np.ndarray:
    return op.basis[lex_order(op.basis, op.q)]
