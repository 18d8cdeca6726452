"""Exact affine-coset backend.

Every encoded state in this package has the form

    sum_b alpha_b |c_b + W>,   |c + W> = q**(-dim W / 2) sum_{w in W} |c + w>,

for one subspace W of F_q^N shared by all branches.  Permutation gates that
are linear over F_q map such a state to another of the same form, so the state
is carried as (W, offsets, alphas) and never enumerated.  Reduced operators
are computed combinatorially (see `CosetDensity`).
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .. import budget
from ..errors import ShapeError, SingularMatrix
from ..field import FMatrix, mulmod, rank, rref
from .density import PRUNE, DensityOperator, entropy_from_eigenvalues
from .sparse import SparseState
from .words import all_words, check_indices, unique_rows

NORM_TOL = 1e-9


def reduce_mod(vectors: np.ndarray, basis: np.ndarray, pivots: Sequence[int], q: int) -> np.ndarray:
    """Canonical representatives of `vectors` modulo the row space of an RREF `basis`."""
    vectors = np.asarray(vectors, dtype=np.int64) % q
    if len(pivots) == 0 or vectors.size == 0:
        return vectors
    return (vectors - mulmod(vectors[..., list(pivots)], basis, q)) % q


def _rref_or_empty(a: np.ndarray, width: int, q: int) -> tuple[np.ndarray, list[int]]:
    if a.shape[0] == 0 or width == 0:
        return np.zeros((0, width), dtype=np.int64), []
    return rref(a, q)


def span_words(basis: np.ndarray, q: int) -> np.ndarray:
    """All vectors in the row space of `basis` (q**rows of them)."""
    coeffs = all_words(basis.shape[0], q)
    if basis.shape[0] == 0:
        return np.zeros((1, basis.shape[1]), dtype=np.int64)
    return mulmod(coeffs, basis, q)


class CosetState:
    """Superposition of cosets c_b + W of one subspace W, stored symbolically.

    Invariants checked on construction: W is in reduced row echelon form,
    offsets are zero in every pivot column of W, offsets are distinct and the
    amplitudes have unit norm.
    """

    __slots__ = ("q", "n_qudits", "W", "pivots", "offsets", "alphas", "labels")

    def __init__(self, q: int, n_qudits: int, W: np.ndarray, offsets: np.ndarray, alphas: np.ndarray, labels=None):
        W = np.asarray(W, dtype=np.int64).reshape(-1, n_qudits)
        offsets = np.asarray(offsets, dtype=np.int64).reshape(-1, n_qudits)
        alphas = np.asarray(alphas, dtype=np.complex128).reshape(-1)
        if len(offsets) != len(alphas):
            raise ShapeError("one amplitude per branch is required")
        self.q = q
        self.n_qudits = n_qudits
        self.W = W
        self.pivots = self._check_rref(W)
        self.offsets = offsets
        self.alphas = alphas
        self.labels = None if labels is None else np.asarray(labels, dtype=np.int64).reshape(len(alphas), -1)
        self._check_branches()

    def _check_rref(self, W: np.ndarray) -> list[int]:
        pivots = []
        for i, row in enumerate(W):
            nz = np.flatnonzero(row)
            if nz.size == 0 or row[nz[0]] != 1 or (pivots and nz[0] <= pivots[-1]):
                raise ValueError("subspace generators are not in reduced row echelon form")
            col = W[:, nz[0]]
            if np.count_nonzero(col) != 1:
                raise ValueError("subspace generators are not in reduced row echelon form")
            pivots.append(int(nz[0]))
        return pivots

    def _check_branches(self) -> None:
        if self.pivots and self.offsets[:, self.pivots].any():
            raise ValueError("branch offsets are not canonical coset representatives")
        norm = float(np.vdot(self.alphas, self.alphas).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"branch amplitudes have norm {norm}, expected 1")
        if len(unique_rows(self.offsets, self.q)[0]) != len(self.offsets):
            raise ValueError("two branches share a coset")

    @classmethod
    def build(cls, q: int, n_qudits: int, generators: np.ndarray, offsets: np.ndarray, alphas, labels=None) -> "CosetState":
        """Normalize raw data: row-reduce the generators, canonicalize offsets,
        merge branches landing in the same coset and renormalize."""
        generators = np.asarray(generators, dtype=np.int64).reshape(-1, n_qudits) % q
        W, pivots = _rref_or_empty(generators, n_qudits, q)
        canon = reduce_mod(np.asarray(offsets, dtype=np.int64).reshape(-1, n_qudits), W, pivots, q)
        alphas = np.asarray(alphas, dtype=np.complex128).reshape(-1)
        uniq, inverse = unique_rows(canon, q)
        if len(uniq) != len(canon):
            merged = np.zeros(len(uniq), dtype=np.complex128)
            np.add.at(merged, inverse, alphas)
            first = np.full(len(uniq), -1)
            for i, u in enumerate(inverse):
                if first[u] < 0:
                    first[u] = i
            if labels is not None:
                labels = np.asarray(labels)[first]
            canon, alphas = uniq, merged
            live = np.abs(alphas) >= PRUNE
            canon, alphas = canon[live], alphas[live]
            if labels is not None:
                labels = labels[live]
            norm = math.sqrt(float(np.vdot(alphas, alphas).real))
            if norm < PRUNE:
                raise ValueError("all branches cancelled")
            alphas = alphas / norm
        return cls(q, n_qudits, W, canon, alphas, labels)

    @classmethod
    def from_linear(cls, q: int, secret_map: np.ndarray, random_map: np.ndarray, secret: SparseState) -> "CosetState":
        """Encode x = secret_map @ s + random_map @ r with r uniform, for each
        basis word s of the secret."""
        secret_map = np.asarray(secret_map, dtype=np.int64)
        random_map = np.asarray(random_map, dtype=np.int64).reshape(secret_map.shape[0], -1)
        if secret.q != q or secret.n_qudits != secret_map.shape[1]:
            raise ShapeError(f"secret has {secret.n_qudits} qudits, encoder expects {secret_map.shape[1]}")
        offsets = mulmod(secret.words.astype(np.int64), secret_map.T, q)
        return cls.build(q, secret_map.shape[0], random_map.T, offsets, secret.amps, labels=secret.words)

    @classmethod
    def entangled_with_reference(cls, q: int, secret_map: np.ndarray, random_map: np.ndarray) -> "CosetState":
        """q**(-m/2) sum_s |enc(s)>|s>_ref, with the m reference qudits appended last."""
        secret_map = np.asarray(secret_map, dtype=np.int64)
        n, m = secret_map.shape
        random_map = np.asarray(random_map, dtype=np.int64).reshape(n, -1)
        gens = np.concatenate(
            [
                np.concatenate([random_map.T, np.zeros((random_map.shape[1], m), dtype=np.int64)], axis=1),
                np.concatenate([secret_map.T, np.eye(m, dtype=np.int64)], axis=1),
            ]
        )
        return cls.build(q, n + m, gens, np.zeros((1, n + m), dtype=np.int64), [1.0])

    @property
    def rank(self) -> int:
        return self.W.shape[0]

    @property
    def branches(self) -> int:
        return len(self.alphas)

    def _rebuild(self, W: np.ndarray, offsets: np.ndarray) -> "CosetState":
        return CosetState.build(self.q, W.shape[1], W, offsets, self.alphas, self.labels)

    def apply_linear(self, K: FMatrix, indices: Sequence[int]) -> "CosetState":
        idx = check_indices(indices, self.n_qudits)
        if K.q != self.q:
            raise ShapeError(f"gate modulus {K.q} differs from state modulus {self.q}")
        if K.rows != K.cols or K.rows != len(idx):
            raise ShapeError(f"{K.rows}x{K.cols} gate on {len(idx)} qudits")
        if rank(K) != K.rows:
            raise SingularMatrix("gate matrix is singular, the map would not be unitary")
        W, C = self.W.copy(), self.offsets.copy()
        if idx:
            if len(W):
                W[:, idx] = mulmod(self.W[:, idx], K.entries.T, self.q)
            C[:, idx] = mulmod(self.offsets[:, idx], K.entries.T, self.q)
        return self._rebuild(W, C)

    def apply_ctrl_add(self, alpha: int, control: int, target: int) -> "CosetState":
        control, target = check_indices([control, target], self.n_qudits)
        W, C = self.W.copy(), self.offsets.copy()
        a = int(alpha) % self.q
        W[:, target] = (W[:, target] + a * W[:, control]) % self.q
        C[:, target] = (C[:, target] + a * C[:, control]) % self.q
        return self._rebuild(W, C)

    def apply_reorder(self, permutation: Sequence[int]) -> "CosetState":
        perm = check_indices(permutation, self.n_qudits)
        if len(perm) != self.n_qudits:
            raise ShapeError("reorder needs a full permutation")
        return self._rebuild(self.W[:, perm], self.offsets[:, perm])

    def attach_uniform_registers(self, count: int) -> "CosetState":
        if count < 0:
            raise ValueError("count must be nonnegative")
        if count == 0:
            return self
        n = self.n_qudits + count
        W = np.zeros((self.rank + count, n), dtype=np.int64)
        W[: self.rank, : self.n_qudits] = self.W
        W[self.rank:, self.n_qudits:] = np.eye(count, dtype=np.int64)
        C = np.concatenate([self.offsets, np.zeros((self.branches, count), dtype=np.int64)], axis=1)
        return CosetState.build(self.q, n, W, C, self.alphas, self.labels)

    def to_sparse(self) -> SparseState:
        size = self.q**self.rank
        budget.require_terms(self.branches * size, "coset expansion")
        members = span_words(self.W, self.q)
        words = (self.offsets[:, None, :] + members[None, :, :]) % self.q
        amps = np.repeat(self.alphas / math.sqrt(size), size)
        return SparseState(self.q, self.n_qudits, words.reshape(-1, self.n_qudits), amps)

    def partial_trace(self, keep: Sequence[int]) -> "CosetDensity":
        """Reduced operator on `keep`, computed from (W, offsets) without expansion.

        For a branch pair (b, b') the block is nonzero only when the traced-out
        parts of the two cosets meet; the surviving entries form a translate of
        P x Z, where P is the projection of W onto the kept qudits and Z the
        projection of the part of W that vanishes on the traced-out qudits.
        """
        keep = check_indices(keep, self.n_qudits)
        if not keep:
            raise ValueError("keep must name at least one qudit")
        keep_set = set(keep)
        rest = [i for i in range(self.n_qudits) if i not in keep_set]
        q, nr = self.q, len(rest)
        P, piv_p = _rref_or_empty(self.W[:, keep], len(keep), q)
        reduced, piv = _rref_or_empty(self.W[:, rest + keep], nr + len(keep), q)
        u_rows = [i for i, p in enumerate(piv) if p < nr]
        z_rows = [i for i, p in enumerate(piv) if p >= nr]
        U, piv_u, U_keep = reduced[u_rows, :nr], [piv[i] for i in u_rows], reduced[u_rows, nr:]
        Z, piv_z = reduced[z_rows, nr:], [piv[i] - nr for i in z_rows]

        B = self.branches
        budget.require_terms(B * B, "branch pairs in a reduced operator")
        bi, bj = np.meshgrid(np.arange(B), np.arange(B), indexing="ij")
        bi, bj = bi.ravel(), bj.ravel()
        CR, CK = self.offsets[:, rest], self.offsets[:, keep]
        delta = (CR[bj] - CR[bi]) % q
        coef = delta[:, piv_u] if piv_u else np.zeros((len(delta), 0), dtype=np.int64)
        if piv_u:
            resid = (delta - mulmod(coef, U, q)) % q
        else:
            resid = delta
        ok = ~resid.any(axis=1) if nr else np.ones(len(delta), dtype=bool)
        bi, bj, coef = bi[ok], bj[ok], coef[ok]
        a = CK[bi] % q
        if piv_u:
            a = (a + mulmod(coef, U_keep, q)) % q
        b0 = CK[bj]
        b_hat = reduce_mod(b0, P, piv_p, q)
        p0 = (b0 - b_hat) % q
        a_hat = reduce_mod(a - p0, Z, piv_z, q)
        weights = self.alphas[bi] * np.conj(self.alphas[bj])
        return CosetDensity.from_blocks(q, len(keep), P, piv_p, Z, piv_z, a_hat, b_hat, weights)

    def __repr__(self) -> str:
        return f"CosetState(q={self.q}, n_qudits={self.n_qudits}, rank={self.rank}, branches={self.branches})"


class CosetDensity:
    """rho = q**(-dim P) sum_keys w * sum_{p in P, z in Z} |a + p + z><b + p|.

    Keys (a, b) are canonical: b modulo P and a modulo Z (Z is inside P).
    Blocks with distinct keys have disjoint entry supports, so the weights
    determine every matrix entry.
    """

    __slots__ = ("q", "n_qudits", "P", "piv_p", "Z", "piv_z", "a_keys", "b_keys", "weights")

    def __init__(self, q, n_qudits, P, piv_p, Z, piv_z, a_keys, b_keys, weights):
        self.q = q
        self.n_qudits = n_qudits
        self.P, self.piv_p = P, list(piv_p)
        self.Z, self.piv_z = Z, list(piv_z)
        self.a_keys, self.b_keys, self.weights = a_keys, b_keys, weights

    @classmethod
    def from_blocks(cls, q, n_qudits, P, piv_p, Z, piv_z, a_hat, b_hat, weights) -> "CosetDensity":
        keys = np.concatenate([a_hat, b_hat], axis=1)
        uniq, inverse = unique_rows(keys, q)
        summed = np.zeros(len(uniq), dtype=np.complex128)
        np.add.at(summed, inverse, weights)
        live = np.abs(summed) >= PRUNE
        uniq, summed = uniq[live], summed[live]
        return cls(q, n_qudits, P, piv_p, Z, piv_z, uniq[:, :n_qudits], uniq[:, n_qudits:], summed)

    @property
    def dim_p(self) -> int:
        return len(self.piv_p)

    @property
    def dim_z(self) -> int:
        return len(self.piv_z)

    @property
    def keys(self) -> int:
        return len(self.weights)

    @property
    def scale(self) -> float:
        return float(self.q) ** (-self.dim_p)

    def _diagonal_mask(self) -> np.ndarray:
        return ~(reduce_mod(self.b_keys, self.Z, self.piv_z, self.q) != self.a_keys).any(axis=1)

    def trace(self) -> complex:
        return complex(self.weights[self._diagonal_mask()].sum())

    def purity(self) -> float:
        return float((np.abs(self.weights) ** 2).sum() * float(self.q) ** (self.dim_z - self.dim_p))

    def max_abs(self) -> float:
        return float(np.abs(self.weights).max()) * self.scale if self.keys else 0.0

    def support_nnz(self) -> int:
        return self.keys * self.q ** (self.dim_p + self.dim_z)

    def is_single_coset(self) -> bool:
        return self.keys == 1 and bool(self._diagonal_mask()[0]) and abs(self.weights[0] - 1.0) < 1e-9

    def entropy(self) -> float:
        """Von Neumann entropy in base-q units.

        A single diagonal block is q**(dim P - dim Z) equal eigenvalues, so its
        entropy is dim P - dim Z; anything else goes through a dense eigensolve.
        """
        if self.is_single_coset():
            return float(self.dim_p - self.dim_z)
        return entropy_from_eigenvalues(self.to_density().eigenvalues(), self.q)

    def to_density(self) -> DensityOperator:
        budget.require_terms(self.support_nnz(), "coset density expansion")
        p_words = span_words(self.P, self.q)
        z_words = span_words(self.Z, self.q)
        rows, cols, vals = [], [], []
        for a, b, w in zip(self.a_keys, self.b_keys, self.weights):
            col = (b[None, :] + p_words) % self.q
            row = (a[None, None, :] + p_words[:, None, :] + z_words[None, :, :]) % self.q
            rows.append(row.reshape(-1, self.n_qudits))
            cols.append(np.repeat(col, len(z_words), axis=0))
            vals.append(np.full(len(p_words) * len(z_words), w * self.scale))
        if not rows:
            empty = np.zeros((0, self.n_qudits), dtype=np.int64)
            return DensityOperator.from_entries(self.q, self.n_qudits, empty, empty, [])
        return DensityOperator.from_entries(self.q, self.n_qudits, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))

    def _lookup(self) -> dict[bytes, complex]:
        keys = np.concatenate([self.a_keys, self.b_keys], axis=1).astype(np.int64)
        return {k.tobytes(): complex(w) for k, w in zip(keys, self.weights)}

    def entries_at(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """rho[x, y] for paired word arrays."""
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.n_qudits)
        cols = np.asarray(cols, dtype=np.int64).reshape(-1, self.n_qudits)
        b_hat = reduce_mod(cols, self.P, self.piv_p, self.q)
        p = (cols - b_hat) % self.q
        a_hat = reduce_mod(rows - p, self.Z, self.piv_z, self.q)
        table = self._lookup()
        keys = np.concatenate([a_hat, b_hat], axis=1).astype(np.int64)
        return np.array([table.get(k.tobytes(), 0j) for k in keys]) * self.scale

    def fidelity_sparse(self, words: np.ndarray, amps: np.ndarray) -> float:
        """<psi|rho|psi> for psi given as (words, amplitudes)."""
        words = np.asarray(words, dtype=np.int64).reshape(-1, self.n_qudits)
        if words.shape[1] != self.n_qudits:
            raise ShapeError("state and operator act on different numbers of qudits")
        S = len(words)
        budget.require_terms(S * S, "fidelity entry lookups")
        i, j = np.meshgrid(np.arange(S), np.arange(S), indexing="ij")
        vals = self.entries_at(words[i.ravel()], words[j.ravel()])
        return float(np.real(np.sum(np.conj(amps[i.ravel()]) * vals * amps[j.ravel()])))

    def fidelity_coset(self, offset: np.ndarray, basis: np.ndarray) -> float:
        """<phi|rho|phi> for the uniform superposition phi over offset + span(basis).

        Each block contributes its weight times the number of solutions
        (v, v', p, z) of  o + v = a + p + z,  o + v' = b + p,  which is either
        zero or a power of q.
        """
        q, n = self.q, self.n_qudits
        V, _ = _rref_or_empty(np.asarray(basis, dtype=np.int64).reshape(-1, n), n, q)
        dv, dp, dz = len(V), self.dim_p, self.dim_z
        zeros = lambda r: np.zeros((r, n), dtype=np.int64)  # noqa: E731
        top = np.concatenate([V, zeros(dv), -self.P % q, -self.Z % q]).T
        bottom = np.concatenate([zeros(dv), V, -self.P % q, zeros(dz)]).T
        system = np.concatenate([top, bottom])
        n_vars = system.shape[1]
        sys_rank = len(_rref_or_empty(system, n_vars, q)[1])
        offset = np.asarray(offset, dtype=np.int64).reshape(n)
        total = 0j
        for a, b, w in zip(self.a_keys, self.b_keys, self.weights):
            rhs = np.concatenate([(a - offset) % q, (b - offset) % q])[:, None]
            aug_rank = len(_rref_or_empty(np.concatenate([system, rhs], axis=1), n_vars + 1, q)[1])
            if aug_rank == sys_rank:
                total += w * float(q) ** (n_vars - sys_rank)
        return float(np.real(total) * float(q) ** (-dv - dp))

    def same_structure(self, other: "CosetDensity") -> bool:
        return (
            self.q == other.q
            and self.n_qudits == other.n_qudits
            and np.array_equal(self.P, other.P)
            and np.array_equal(self.Z, other.Z)
        )

    def max_deviation(self, other: "CosetDensity") -> float:
        """Largest entrywise |self - other|."""
        if not self.same_structure(other):
            from .density import max_deviation

            return max_deviation(self.to_density(), other.to_density())
        keys = np.concatenate(
            [
                np.concatenate([self.a_keys, self.b_keys], axis=1),
                np.concatenate([other.a_keys, other.b_keys], axis=1),
            ]
        )
        if len(keys) == 0:
            return 0.0
        _, inverse = unique_rows(keys, self.q)
        diff = np.zeros(int(inverse.max()) + 1, dtype=np.complex128)
        np.add.at(diff, inverse, np.concatenate([self.weights, -other.weights]))
        return float(np.abs(diff).max()) * self.scale

    def relative_deviation(self, other: "CosetDensity") -> float:
        scale = other.max_abs()
        dev = self.max_deviation(other)
        return dev / scale if scale else dev

    def __repr__(self) -> str:
        return f"CosetDensity(q={self.q}, n_qudits={self.n_qudits}, dim_p={self.dim_p}, dim_z={self.dim_z}, keys={self.keys})"
