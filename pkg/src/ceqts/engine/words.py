"""Helpers for arrays of basis words (one row per word, one column per qudit)."""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np


def word_dtype(q: int):
    if q <= 256:
        return np.uint8
    if q <= 65536:
        return np.uint16
    return np.int64


def fits_int64(width: int, q: int) -> bool:
    return width == 0 or q ** width < 2**62


def row_keys(words: np.ndarray, q: int) -> np.ndarray:
    """Integer key per row, most significant qudit first (lexicographic order)."""
    width = words.shape[1]
    if not fits_int64(width, q):
        raise OverflowError("rows too wide for integer keys")
    if width == 0:
        return np.zeros(words.shape[0], dtype=np.int64)
    weights = np.array([q ** (width - 1 - j) for j in range(width)], dtype=np.int64)
    return words.astype(np.int64) @ weights


def unique_rows(words: np.ndarray, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Sorted unique rows and, for each input row, the index of its unique row."""
    if words.shape[0] == 0:
        return words.copy(), np.zeros(0, dtype=np.int64)
    if fits_int64(words.shape[1], q):
        keys = row_keys(words, q)
        _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        return words[first], inverse.reshape(-1)
    uniq, inverse = np.unique(words, axis=0, return_inverse=True)
    return uniq, inverse.reshape(-1)


def lex_order(words: np.ndarray, q: int) -> np.ndarray:
    if words.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    if fits_int64(words.shape[1], q):
        return np.argsort(row_keys(words, q), kind="stable")
    return np.lexsort(words.T[::-1])


def all_words(width: int, q: int) -> np.ndarray:
    """Every word of the given width in lexicographic order, shape (q**width, width)."""
    if width == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((q,) * width).reshape(width, -1).T
    return grids.astype(np.int64)


def parse_word(word, q: int) -> tuple[int, ...]:
    """Accept a tuple/list of symbols or a digit string (q <= 10)."""
    if isinstance(word, str):
        if "," in word:
            symbols = tuple(int(s) for s in word.split(","))
        else:
            symbols = tuple(int(ch) for ch in word)
    else:
        symbols = tuple(int(s) for s in word)
    for s in symbols:
        if not 0 <= s < q:
            raise ValueError(f"symbol {s} outside [0, {q})")
    return symbols


def format_word(symbols: Iterable[int], q: int) -> str:
    symbols = [int(s) for s in symbols]
    if q <= 10:
        return "".join(str(s) for s in symbols)
    return ",".join(str(s) for s in symbols)


def check_indices(indices: Sequence[int], n: int) -> list[int]:
    idx = [int(i) for i in indices]
    if len(set(idx)) != len(idx):
        raise IndexError(f"repeated qudit index in {idx}")
    for i in idx:
        if not 0 <= i < n:
            raise IndexError(f"qudit index {i} outside 0..{n - 1}")
    return idx


def product_words(q: int, width: int) -> Iterable[tuple[int, ...]]:
    return itertools.product(range(q), repeat=width)
