"""Exact arithmetic and linear algebra over the prime field F_q.

Matrices are small (tens of rows) so everything is plain numpy int64 with a
reduction after each product.  Row reduction pivots on the first nonzero entry
at or below the current row, which keeps every inverse (and hence every gate
schedule) reproducible.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import BadEvaluationPoints, BadModulus, NotInvertible, ShapeError, SingularMatrix

MAX_MODULUS = 2**31


@lru_cache(maxsize=None)
def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def check_modulus(q: int) -> int:
    """Return q as an int, or raise BadModulus if it is not a usable prime."""
    if isinstance(q, bool) or int(q) != q:
        raise BadModulus(f"modulus must be an integer, got {q!r}")
    q = int(q)
    if not is_prime(q):
        raise BadModulus(f"{q} is not prime")
    if q >= MAX_MODULUS:
        raise BadModulus(f"{q} does not fit in a 32-bit word")
    return q


def next_prime(floor: int, strict: bool = False) -> int:
    """Smallest prime p with p >= floor (p > floor when strict)."""
    p = max(2, floor + 1 if strict else floor)
    while not is_prime(p):
        p += 1
    return p


def field_inverse(a: int, q: int) -> int:
    a = int(a) % q
    if a == 0:
        raise NotInvertible(f"0 has no inverse mod {q}")
    return pow(a, -1, q)


def mulmod(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """Matrix product mod q, widening to Python ints if int64 could overflow."""
    inner = a.shape[-1] if a.ndim else 1
    if inner * (q - 1) ** 2 < 2**62:
        return (a.astype(np.int64) @ b.astype(np.int64)) % q
    out = a.astype(object) @ b.astype(object)
    return (out % q).astype(np.int64)


class FMatrix:
    """An immutable matrix over F_q with canonical entries in [0, q)."""

    __slots__ = ("_a", "q")

    def __init__(self, entries, q: int):
        a = np.array(entries, dtype=np.int64)
        if a.ndim == 1:
            a = a.reshape(1, -1) if a.size else a.reshape(0, 0)
        if a.ndim != 2:
            raise ShapeError(f"matrix entries must be 2-dimensional, got shape {a.shape}")
        a %= q
        a.setflags(write=False)
        self._a = a
        self.q = int(q)

    @classmethod
    def identity(cls, size: int, q: int) -> "FMatrix":
        return cls(np.eye(size, dtype=np.int64), q)

    @classmethod
    def zeros(cls, rows: int, cols: int, q: int) -> "FMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), q)

    @property
    def entries(self) -> np.ndarray:
        return self._a

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    def tolist(self) -> list[list[int]]:
        return self._a.tolist()

    def __getitem__(self, key):
        return self._a[key]

    def __matmul__(self, other: "FMatrix") -> "FMatrix":
        return mat_mul(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FMatrix):
            return NotImplemented
        return self.q == other.q and self.shape == other.shape and bool(np.array_equal(self._a, other._a))

    __hash__ = None

    def __repr__(self) -> str:
        return f"FMatrix({self.tolist()}, q={self.q})"

    def __str__(self) -> str:
        width = len(str(self.q - 1))
        return "\n".join("[" + " ".join(f"{v:>{width}}" for v in row) + "]" for row in self.tolist())


def mat_mul(A: FMatrix, B: FMatrix) -> FMatrix:
    if A.q != B.q:
        raise ShapeError(f"moduli differ: {A.q} vs {B.q}")
    if A.cols != B.rows:
        raise ShapeError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")
    return FMatrix(mulmod(A.entries, B.entries, A.q), A.q)


def rref(a: np.ndarray, q: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of a raw integer array; zero rows are dropped.

    Returns the nonzero rows and the pivot column of each.
    """
    a = np.array(a, dtype=np.int64) % q
    if a.ndim != 2:
        raise ShapeError("rref expects a 2-dimensional array")
    n_rows, n_cols = a.shape
    r = 0
    pivots: list[int] = []
    for c in range(n_cols):
        if r == n_rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        inv = pow(int(a[r, c]), -1, q)
        a[r] = a[r] * inv % q
        f = a[:, c].copy()
        f[r] = 0
        if f.any():
            a = (a - np.outer(f, a[r])) % q
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(M: FMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    return len(rref(M.entries, M.q)[1])


def mat_inv(K: FMatrix) -> FMatrix:
    """Inverse by Gauss-Jordan elimination on [K | I]."""
    if K.rows != K.cols:
        raise ShapeError(f"cannot invert a {K.rows}x{K.cols} matrix")
    n, q = K.rows, K.q
    a = np.concatenate([K.entries, np.eye(n, dtype=np.int64)], axis=1)
    for c in range(n):
        nz = np.flatnonzero(a[c:, c])
        if nz.size == 0:
            raise SingularMatrix(f"matrix is singular mod {q} (no pivot in column {c + 1})")
        p = c + int(nz[0])
        if p != c:
            a[[c, p]] = a[[p, c]]
        a[c] = a[c] * pow(int(a[c, c]), -1, q) % q
        f = a[:, c].copy()
        f[c] = 0
        if f.any():
            a = (a - np.outer(f, a[c])) % q
    return FMatrix(a[:, n:], q)


def vandermonde(points: Sequence[int], width: int, q: int, allow_zero: bool = False) -> FMatrix:
    """Matrix with entry (i, j) = points[i]**j mod q for j = 0..width-1.

    Zero points are rejected unless allow_zero is set (the Cleve threshold
    scheme only needs distinct points).
    """
    if width < 1:
        raise ShapeError("width must be at least 1")
    pts = [int(x) % q for x in points]
    if len(set(pts)) != len(pts):
        raise BadEvaluationPoints(f"repeated evaluation point in {list(points)} mod {q}")
    if not allow_zero and 0 in pts:
        raise BadEvaluationPoints(f"zero evaluation point in {list(points)} mod {q}")
    return power_matrix(pts, range(width), q)


def power_matrix(points: Sequence[int], powers: Iterable[int], q: int) -> FMatrix:
    """Rows points[i]**p for the listed powers, with no validity checks."""
    powers = list(powers)
    return FMatrix([[pow(int(x), p, q) for p in powers] for x in points], q)


def _index_set(idx, size: int, what: str) -> list[int]:
    if idx is None:
        return list(range(size))
    chosen = sorted(int(i) for i in idx)
    if len(set(chosen)) != len(chosen):
        raise IndexError(f"repeated {what} index in {list(idx)}")
    for i in chosen:
        if not 1 <= i <= size:
            raise IndexError(f"{what} index {i} outside 1..{size}")
    return [i - 1 for i in chosen]


def submatrix(M: FMatrix, row_set=None, col_set=None) -> FMatrix:
    """The submatrix M_A^B on 1-based row set A and column set B (None = all).

    Indices are taken in ascending order, as in the V_A^B notation.
    """
    rows = _index_set(row_set, M.rows, "row")
    cols = _index_set(col_set, M.cols, "column")
    return FMatrix(M.entries[np.ix_(rows, cols)], M.q)


def span(lo: int, hi: int) -> range:
    """The 1-based window [lo, hi] as a range."""
    return range(lo, hi + 1)


def block(blocks: Sequence[Sequence[FMatrix | np.ndarray]], q: int) -> FMatrix:
    """Assemble a block matrix from FMatrix or raw array pieces."""
    return FMatrix(np.block([[b.entries if isinstance(b, FMatrix) else np.asarray(b) for b in row] for row in blocks]), q)
