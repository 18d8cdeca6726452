"""Staircase code templates: the Vandermonde matrix V and the symbolic matrix Y.

A template entry is ("s", j) for secret symbol s_j, ("r", j) for random symbol
r_j, or None for a structural zero.  Indices are 1-based as in the usual
notation; the codeword of party u is row u of C = V Y.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..errors import BadParameters
from ..field import FMatrix, power_matrix
from .spec import BASIC, FIXED, UNIVERSAL, SchemeSpec

Symbol = Optional[tuple[str, int]]


def symbol_name(sym: Symbol) -> str:
    return "0" if sym is None else f"{sym[0]}{sym[1]}"


@dataclass(frozen=True)
class StaircaseAssembly:
    spec: SchemeSpec
    V: FMatrix
    template: tuple[tuple[Symbol, ...], ...]
    layers: tuple[tuple[int, ...], ...]  # 1-based column numbers per layer
    n_random: int

    @property
    def rows(self) -> int:
        return len(self.template)

    @property
    def cols(self) -> int:
        return len(self.template[0])

    @property
    def pure_parties(self) -> int:
        return self.V.rows

    def entries(self, col: int) -> list[tuple[int, tuple[str, int]]]:
        """Nonzero (row, symbol) pairs of a 1-based column, top to bottom."""
        return [(i + 1, row[col - 1]) for i, row in enumerate(self.template) if row[col - 1] is not None]

    def columns_for(self, d: int) -> int:
        """How many leading columns each accessed party sends when |D| = d."""
        spec = self.spec
        spec.check_d(d)
        if spec.variant == FIXED:
            return spec.m if d == spec.k else 1
        if spec.variant == UNIVERSAL:
            return spec.a[spec.level_of(d) - 1]
        return 2 * spec.k - d

    def grid(self) -> list[list[str]]:
        return [[symbol_name(s) for s in row] for row in self.template]

    def substitute(self, secret, randomness) -> FMatrix:
        """Y with concrete values plugged in."""
        s = [int(x) for x in secret]
        r = [int(x) for x in randomness]
        vals = [[0 if e is None else (s if e[0] == "s" else r)[e[1] - 1] for e in row] for row in self.template]
        return FMatrix(vals, self.spec.q)

    def code_matrix(self, secret, randomness) -> FMatrix:
        return self.V @ self.substitute(secret, randomness)

    def linear_maps(self) -> tuple[np.ndarray, np.ndarray]:
        """(secret_map, random_map) sending (s, r) to the flattened C = V Y.

        Row (u-1)*cols + (j-1) is the entry c_{uj}, so each party's qudits are
        contiguous and parties appear in order.
        """
        q, m = self.spec.q, self.spec.m
        P, cols = self.pure_parties, self.cols
        secret_map = np.zeros((P * cols, m), dtype=np.int64)
        random_map = np.zeros((P * cols, self.n_random), dtype=np.int64)
        V = self.V.entries
        for i, row in enumerate(self.template):
            for j, sym in enumerate(row):
                if sym is None:
                    continue
                target = secret_map if sym[0] == "s" else random_map
                target[j::cols, sym[1] - 1] += V[:, i]
        return secret_map % q, random_map % q

    def with_entry(self, row: int, col: int, sym: Symbol) -> "StaircaseAssembly":
        grid = [list(r) for r in self.template]
        grid[row - 1][col - 1] = sym
        return replace(self, template=tuple(tuple(r) for r in grid))


def _fixed_template(k: int, m: int) -> list[list[Symbol]]:
    rows = m + k - 1
    Y: list[list[Symbol]] = [[None] * m for _ in range(rows)]
    for i in range(m):
        Y[i][0] = ("s", i + 1)
    for i in range(k - 1):
        Y[m + i][0] = ("r", i + 1)
    # row m of columns 2..m carries r_{k-m+1}..r_{k-1}, already used in column 1
    for j in range(1, m):
        Y[m - 1][j] = ("r", k - m + j)
    nxt = k
    for j in range(1, m):
        for i in range(k - 1):
            Y[m + i][j] = ("r", nxt)
            nxt += 1
    return Y


def _universal_template(k: int, m: int, b: tuple[int, ...]) -> list[list[Symbol]]:
    rows = 2 * k - 1
    Y: list[list[Symbol]] = [[None] * m for _ in range(rows)]
    # S: k x (m/k), column-major
    for j in range(m // k):
        for i in range(k):
            Y[i][j] = ("s", j * k + i + 1)
    nxt = 1
    col = 0
    r_blocks: list[list[list[int]]] = []  # r_blocks[l][c] = column c of R_{l+1}
    for level in range(k):
        block = []
        for c in range(b[level]):
            block.append(list(range(nxt, nxt + k - 1)))
            nxt += k - 1
        r_blocks.append(block)
        if level > 0:
            # D_level: (k-level) x b[level], column-major from row `level` of [R_1 .. R_level]
            carried = [column[level - 1] for blk in r_blocks[:level] for column in blk]
            depth = k - level
            for c in range(b[level]):
                for i in range(depth):
                    Y[level + i][col + c] = ("r", carried[c * depth + i])
        for c in range(b[level]):
            for i in range(k - 1):
                Y[k + i][col + c] = ("r", block[c][i])
        col += b[level]
    return Y


def _basic_template(k: int) -> list[list[Symbol]]:
    rows = 2 * k - 1
    Y: list[list[Symbol]] = [[None] * k for _ in range(rows)]
    carried: list[Symbol] = [("s", i + 1) for i in range(k)]
    nxt = 1
    for j in range(k):
        for i in range(k - j):
            Y[j + i][j] = carried[i]
        fresh = [("r", nxt + i) for i in range(k - 1)]
        nxt += k - 1
        for i, sym in enumerate(fresh):
            Y[k + i][j] = sym
        carried = fresh
    return Y


def build_staircase_assembly(spec: SchemeSpec) -> StaircaseAssembly:
    """V and the Y template for a staircase variant.

    Points are used as given; validation happens in derive_params, so a
    deliberately corrupted SchemeSpec still builds.
    """
    k, m, q = spec.k, spec.m, spec.q
    P = 2 * k - 1
    if spec.variant == FIXED:
        Y = _fixed_template(k, m)
        layers = ((1,), tuple(range(2, m + 1))) if m > 1 else ((1,),)
    elif spec.variant == UNIVERSAL:
        b = _full_b(spec)
        Y = _universal_template(k, m, b)
        layers, start = [], 1
        for width in b:
            layers.append(tuple(range(start, start + width)))
            start += width
        layers = tuple(layers)
    elif spec.variant == BASIC:
        Y = _basic_template(k)
        layers = tuple((j,) for j in range(1, k + 1))
    else:
        raise BadParameters(f"{spec.variant} is not a staircase variant")
    V = power_matrix(spec.points[:P], range(len(Y)), q)
    return StaircaseAssembly(
        spec=spec,
        V=V,
        template=tuple(tuple(r) for r in Y),
        layers=layers,
        n_random=m * (k - 1),
    )


def _full_b(spec: SchemeSpec) -> tuple[int, ...]:
    """b_1..b_k for the pure scheme, even when some levels exceed n."""
    k, m = spec.k, spec.m
    a = [m // (k - i + 1) for i in range(1, k + 1)]
    return tuple(a[i] - (a[i - 1] if i else 0) for i in range(k))


def swap_carried_entries(assembly: StaircaseAssembly) -> StaircaseAssembly:
    """Exchange the first two carried entries of the first layer-2+ column
    that has at least two of them (a deliberate encoder defect)."""
    k = assembly.spec.k
    for layer in assembly.layers[1:]:
        for col in layer:
            carried = [(row, sym) for row, sym in assembly.entries(col) if row <= k]
            if len(carried) >= 2:
                (r1, s1), (r2, s2) = carried[0], carried[1]
                return assembly.with_entry(r1, col, s2).with_entry(r2, col, s1)
    raise BadParameters("no column carries two entries from earlier layers")
