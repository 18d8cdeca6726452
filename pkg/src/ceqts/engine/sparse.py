"""Sparse amplitude-map backend: a state is a table of basis words and amplitudes.

Every gate used by the schemes permutes basis words, so a gate only relabels
rows of the word table and never touches amplitudes.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .. import budget
from ..errors import ShapeError, SingularMatrix, ZeroState
from ..field import FMatrix, check_modulus, mulmod, rank
from .density import DensityOperator
from .words import all_words, check_indices, format_word, lex_order, parse_word, unique_rows, word_dtype

PRUNE = 1e-12
NORM_TOL = 1e-9


def merge_terms(words: np.ndarray, amps: np.ndarray, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Sum amplitudes of repeated words and drop the ones that cancel."""
    uniq, inverse = unique_rows(words, q)
    summed = np.zeros(len(uniq), dtype=np.complex128)
    np.add.at(summed, inverse, amps)
    live = np.abs(summed) >= PRUNE
    return uniq[live], summed[live]


class SparseState:
    """Pure state on n qudits of dimension q, stored as (words, amps).

    `words` has one row per basis word with nonzero amplitude; rows are unique.
    Instances are treated as immutable: every operation returns a new state.
    """

    __slots__ = ("q", "n_qudits", "words", "amps")

    def __init__(self, q: int, n_qudits: int, words: np.ndarray, amps: np.ndarray, *, normalized: bool = True):
        words = np.asarray(words).reshape(-1, n_qudits).astype(word_dtype(q), copy=False)
        amps = np.asarray(amps, dtype=np.complex128).reshape(-1)
        if len(words) != len(amps):
            raise ShapeError("one amplitude per word is required")
        live = np.abs(amps) >= PRUNE
        if not live.all():
            words, amps = words[live], amps[live]
        if normalized:
            norm = float(np.vdot(amps, amps).real)
            if abs(norm - 1.0) > NORM_TOL:
                raise ValueError(f"state norm {norm} is not 1")
        self.q = q
        self.n_qudits = n_qudits
        self.words = words
        self.amps = amps

    @classmethod
    def basis(cls, q: int, word) -> "SparseState":
        symbols = parse_word(word, q)
        return cls(q, len(symbols), np.array([symbols]), np.array([1.0]))

    @property
    def terms(self) -> int:
        return len(self.amps)

    def norm(self) -> float:
        return math.sqrt(float(np.vdot(self.amps, self.amps).real))

    def _with_words(self, words: np.ndarray) -> "SparseState":
        return SparseState(self.q, words.shape[1], words, self.amps, normalized=False)

    def apply_linear(self, K: FMatrix, indices: Sequence[int]) -> "SparseState":
        """Replace the symbols on `indices` by K times them (the U_K gate)."""
        idx = check_indices(indices, self.n_qudits)
        if K.q != self.q:
            raise ShapeError(f"gate modulus {K.q} differs from state modulus {self.q}")
        if K.rows != K.cols or K.rows != len(idx):
            raise ShapeError(f"{K.rows}x{K.cols} gate on {len(idx)} qudits")
        if rank(K) != K.rows:
            raise SingularMatrix("gate matrix is singular, the map would not be unitary")
        out = self.words.copy()
        if idx and self.terms:
            sub = self.words[:, idx].astype(np.int64)
            out[:, idx] = mulmod(sub, K.entries.T, self.q)
        return self._with_words(out)

    def apply_ctrl_add(self, alpha: int, control: int, target: int) -> "SparseState":
        """target += alpha * control (mod q)."""
        control, target = check_indices([control, target], self.n_qudits)
        out = self.words.copy()
        a = int(alpha) % self.q
        if a:
            t = (self.words[:, target].astype(np.int64) + a * self.words[:, control].astype(np.int64)) % self.q
            out[:, target] = t
        return self._with_words(out)

    def apply_reorder(self, permutation: Sequence[int]) -> "SparseState":
        """New qudit i is old qudit permutation[i]."""
        perm = check_indices(permutation, self.n_qudits)
        if len(perm) != self.n_qudits:
            raise ShapeError("reorder needs a full permutation")
        return self._with_words(self.words[:, perm])

    def attach_uniform_registers(self, count: int) -> "SparseState":
        """Tensor on `count` fresh qudits in the uniform superposition."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        if count == 0:
            return self
        budget.require_terms(self.terms * self.q**count, "uniform registers")
        fresh = all_words(count, self.q).astype(self.words.dtype)
        reps = len(fresh)
        words = np.concatenate([np.repeat(self.words, reps, axis=0), np.tile(fresh, (self.terms, 1))], axis=1)
        amps = np.repeat(self.amps, reps) / math.sqrt(reps)
        return SparseState(self.q, self.n_qudits + count, words, amps)

    def partial_trace(self, keep: Sequence[int]) -> DensityOperator:
        """Reduced operator on `keep` (in the given order), tracing out the rest."""
        keep = check_indices(keep, self.n_qudits)
        if not keep:
            raise ValueError("keep must name at least one qudit")
        keep_set = set(keep)
        rest = [i for i in range(self.n_qudits) if i not in keep_set]
        kept, ki = unique_rows(self.words[:, keep], self.q)
        _, ri = unique_rows(self.words[:, rest], self.q)
        n_rest = int(ri.max()) + 1 if len(ri) else 0
        m = sp.csr_matrix((self.amps, (ki, ri)), shape=(len(kept), n_rest))
        rho = m @ m.conj().T
        budget.require_terms(rho.nnz, "reduced density operator")
        return DensityOperator(self.q, len(keep), kept, rho)

    def sorted(self) -> "SparseState":
        order = lex_order(self.words, self.q)
        return SparseState(self.q, self.n_qudits, self.words[order], self.amps[order], normalized=False)

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return {tuple(int(s) for s in w): complex(a) for w, a in zip(self.words, self.amps)}

    def amplitude(self, word) -> complex:
        target = np.array(parse_word(word, self.q), dtype=np.int64)
        hits = np.flatnonzero((self.words.astype(np.int64) == target).all(axis=1))
        return complex(self.amps[hits[0]]) if hits.size else 0j

    def to_vector(self) -> np.ndarray:
        dim = self.q**self.n_qudits
        budget.require_terms(dim, "dense state vector")
        vec = np.zeros(dim, dtype=np.complex128)
        weights = np.array([self.q ** (self.n_qudits - 1 - j) for j in range(self.n_qudits)], dtype=np.int64)
        vec[self.words.astype(np.int64) @ weights] = self.amps
        return vec

    def dump(self) -> str:
        """One line per term, `symbols(re,im)`, sorted lexicographically."""
        s = self.sorted()
        return "\n".join(
            f"{format_word(w, self.q)}({a.real:.12f},{a.imag:.12f})" for w, a in zip(s.words, s.amps)
        )

    def __repr__(self) -> str:
        return f"SparseState(q={self.q}, n_qudits={self.n_qudits}, terms={self.terms})"


def state_from_secret(amplitudes: Mapping | Sequence, q: int) -> SparseState:
    """Normalized secret state from {word: amplitude} (or (word, amplitude) pairs)."""
    q = check_modulus(q)
    items = list(amplitudes.items()) if isinstance(amplitudes, Mapping) else list(amplitudes)
    if not items:
        raise ZeroState("no amplitudes given")
    words = [parse_word(w, q) for w, _ in items]
    width = len(words[0])
    if any(len(w) != width for w in words):
        raise ShapeError("secret words have different lengths")
    merged_words, merged = merge_terms(np.array(words, dtype=np.int64).reshape(-1, width), np.array([a for _, a in items]), q)
    norm = math.sqrt(float(np.vdot(merged, merged).real))
    if norm < PRUNE:
        raise ZeroState("secret vector is zero")
    return SparseState(q, width, merged_words, merged / norm)


def superpose(states: Sequence[SparseState], coefficients: Sequence[complex]) -> SparseState:
    """Normalized linear combination of states on the same qudits."""
    first = states[0]
    if any(s.q != first.q or s.n_qudits != first.n_qudits for s in states):
        raise ShapeError("states act on different spaces")
    words = np.concatenate([s.words.astype(np.int64) for s in states])
    amps = np.concatenate([c * s.amps for s, c in zip(states, coefficients)])
    merged_words, merged = merge_terms(words, amps, first.q)
    norm = math.sqrt(float(np.vdot(merged, merged).real))
    if norm < PRUNE:
        raise ZeroState("linear combination vanishes")
    return SparseState(first.q, first.n_qudits, merged_words, merged / norm)


def max_difference(a: SparseState, b: SparseState) -> float:
    """Largest |amp_a(w) - amp_b(w)| over all basis words."""
    if a.q != b.q or a.n_qudits != b.n_qudits:
        raise ShapeError("states act on different spaces")
    words = np.concatenate([a.words.astype(np.int64), b.words.astype(np.int64)])
    _, diff = merge_terms(words, np.concatenate([a.amps, -b.amps]), a.q)
    return float(np.abs(diff).max()) if len(diff) else 0.0


def overlap(a: SparseState, b: SparseState) -> complex:
    """<a|b>."""
    if a.q != b.q or a.n_qudits != b.n_qudits:
        raise ShapeError("states act on different spaces")
    uniq, inverse = unique_rows(np.concatenate([a.words.astype(np.int64), b.words.astype(np.int64)]), a.q)
    va = np.zeros(len(uniq), dtype=np.complex128)
    vb = np.zeros(len(uniq), dtype=np.complex128)
    va[inverse[: a.terms]] = a.amps
    vb[inverse[a.terms:]] = b.amps
    return complex(np.vdot(va, vb))
