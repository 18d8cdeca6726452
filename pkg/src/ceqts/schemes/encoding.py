"""Encoders: every scheme here maps (s, r) linearly to the codeword, so an
encoding is a pair of matrices plus the layout of the resulting qudits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .. import budget
from ..engine import CosetState, SparseState
from ..engine.sparse import merge_terms
from ..engine.words import all_words
from ..errors import AccessStructureViolation, ShapeError
from ..field import mulmod
from .network import UnitNetwork, build_network
from .spec import CONCATS, STAIRCASES, SchemeSpec
from .staircase import StaircaseAssembly, build_staircase_assembly

BACKENDS = ("sparse", "coset")


@dataclass(frozen=True)
class ShareLayout:
    """Which global qudits each party holds, layer by layer.

    `environment` collects qudits held by nobody (discarded shares); together
    with the parties it partitions range(n_qudits) minus any `reference`
    qudits, which purify the secret in entanglement tests.
    """

    parties: dict[int, tuple[tuple[int, tuple[int, ...]], ...]]
    environment: tuple[int, ...]
    secret_size: int
    n_qudits: int
    reference: tuple[int, ...] = ()
    threshold: int = 1

    def __post_init__(self):
        seen: list[int] = []
        for layers in self.parties.values():
            for _, idx in layers:
                seen.extend(idx)
        seen.extend(self.environment)
        seen.extend(self.reference)
        if sorted(seen) != list(range(self.n_qudits)):
            raise ShapeError("layout does not partition the qudits")

    @property
    def party_ids(self) -> list[int]:
        return sorted(self.parties)

    def qudits(self, party: int) -> list[int]:
        return [i for _, idx in self.parties[party] for i in idx]

    def layer(self, party: int, layer: int) -> tuple[int, ...]:
        for number, idx in self.parties[party]:
            if number == layer:
                return idx
        return ()

    def share_size(self, party: int) -> int:
        return len(self.qudits(party))

    def qudits_of(self, parties: Sequence[int]) -> list[int]:
        return [i for p in sorted(parties) for i in self.qudits(p)]

    def owner(self, qudit: int) -> Optional[int]:
        for party, layers in self.parties.items():
            if any(qudit in idx for _, idx in layers):
                return party
        return None

    def with_reference(self, count: int) -> "ShareLayout":
        start = self.n_qudits
        return replace(self, n_qudits=start + count, reference=tuple(range(start, start + count)))

    def to_dict(self) -> dict:
        return {
            "parties": {str(p): [[layer, list(idx)] for layer, idx in self.parties[p]] for p in self.party_ids},
            "environment": list(self.environment),
            "reference": list(self.reference),
            "secret_size": self.secret_size,
            "n_qudits": self.n_qudits,
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class LinearEncoding:
    """x = secret_map @ s + random_map @ r over F_q, with r uniform.

    `assembly` or `network` is the structure the maps were derived from; the
    sparse encoder re-evaluates that structure directly rather than using the
    maps, so the two backends are built by independent routes.
    """

    spec: SchemeSpec
    secret_map: np.ndarray
    random_map: np.ndarray
    layout: ShareLayout
    assembly: Optional[StaircaseAssembly] = None
    network: Optional[UnitNetwork] = None
    appended: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))  # extra rows over s
    mutation: Optional[str] = None

    @property
    def n_random(self) -> int:
        return self.random_map.shape[1]

    @property
    def n_qudits(self) -> int:
        return self.secret_map.shape[0]


def _staircase_layout(assembly: StaircaseAssembly) -> ShareLayout:
    spec = assembly.spec
    cols = assembly.cols
    parties = {}
    for u in range(1, spec.n + 1):
        base = (u - 1) * cols
        parties[u] = tuple((i + 1, tuple(base + c - 1 for c in layer)) for i, layer in enumerate(assembly.layers))
    env = tuple(range(spec.n * cols, assembly.pure_parties * cols))
    return ShareLayout(parties, env, spec.m, assembly.pure_parties * cols, threshold=spec.k)


def _network_layout(net: UnitNetwork, threshold: int) -> ShareLayout:
    order = net.physical_wires()
    where = {w: i for i, w in enumerate(order)}
    parties = {
        p: tuple((layer, tuple(where[w] for w in wires)) for layer, wires in sorted(net.parties[p]))
        for p in sorted(net.parties)
    }
    env = tuple(where[w] for w in net.environment)
    return ShareLayout(parties, env, net.m, len(order), threshold=threshold)


def build_encoding(spec: SchemeSpec) -> LinearEncoding:
    if spec.variant in STAIRCASES:
        assembly = build_staircase_assembly(spec)
        secret_map, random_map = assembly.linear_maps()
        return LinearEncoding(spec, secret_map, random_map, _staircase_layout(assembly), assembly=assembly)
    net = build_network(spec)
    forms = net.linear_forms()[net.physical_wires()]
    return LinearEncoding(spec, forms[:, : net.m], forms[:, net.m :], _network_layout(net, spec.threshold), network=net)


def _check_secret(spec: SchemeSpec, secret: SparseState) -> None:
    if secret.q != spec.q or secret.n_qudits != spec.m:
        raise ShapeError(f"secret on {secret.n_qudits} qudits mod {secret.q}; scheme expects {spec.m} mod {spec.q}")


def _structure_words(enc: LinearEncoding, secret_word: Sequence[int], randomness: np.ndarray) -> np.ndarray:
    """Codewords for one secret word and every randomness row, from the
    template or the unit network."""
    q = enc.spec.q
    if enc.assembly is not None:
        asm = enc.assembly
        batch = randomness.shape[0]
        Y = np.zeros((batch, asm.rows, asm.cols), dtype=np.int64)
        for i, row in enumerate(asm.template):
            for j, sym in enumerate(row):
                if sym is None:
                    continue
                Y[:, i, j] = secret_word[sym[1] - 1] if sym[0] == "s" else randomness[:, sym[1] - 1]
        C = np.einsum("ur,brc->buc", asm.V.entries, Y) % q
        words = C.reshape(batch, -1)
    else:
        net = enc.network
        words = net.evaluate(secret_word, randomness)[:, net.physical_wires()]
    if enc.appended.size:
        extra = mulmod(np.asarray(secret_word, dtype=np.int64)[None, :], enc.appended.T, q)
        words = np.concatenate([words, np.repeat(extra, len(words), axis=0)], axis=1)
    return words


def _sparse_encode(enc: LinearEncoding, secret: SparseState, reference: bool = False) -> SparseState:
    q, R = enc.spec.q, enc.n_random
    size = q**R
    budget.require_terms(secret.terms * size, "sparse encoding")
    randomness = all_words(R, q)
    blocks, amps = [], []
    for word, amp in zip(secret.words.astype(np.int64), secret.amps):
        words = _structure_words(enc, word, randomness)
        if reference:
            words = np.concatenate([words, np.repeat(word[None, :], size, axis=0)], axis=1)
        blocks.append(words)
        amps.append(np.full(size, amp / math.sqrt(size)))
    words, amps = merge_terms(np.concatenate(blocks), np.concatenate(amps), q)
    # a defective encoder may map several r to one word; the coset form renormalizes the same way
    norm = math.sqrt(float(np.vdot(amps, amps).real))
    return SparseState(q, words.shape[1], words, amps / norm)


def _all_maps(enc: LinearEncoding) -> tuple[np.ndarray, np.ndarray]:
    secret_map, random_map = enc.secret_map, enc.random_map
    if enc.appended.size:
        secret_map = np.concatenate([secret_map, enc.appended])
        random_map = np.concatenate([random_map, np.zeros((len(enc.appended), enc.n_random), dtype=np.int64)])
    return secret_map, random_map


def realize(enc: LinearEncoding, secret: SparseState, backend: str = "coset"):
    """The encoded state of `secret` under `enc` in the chosen backend."""
    _check_secret(enc.spec, secret)
    if backend == "sparse":
        return _sparse_encode(enc, secret)
    if backend == "coset":
        secret_map, random_map = _all_maps(enc)
        return CosetState.from_linear(enc.spec.q, secret_map, random_map, secret)
    raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")


def encode(spec: SchemeSpec, secret: SparseState, backend: str = "coset"):
    """(state, layout) for any variant."""
    enc = build_encoding(spec)
    return realize(enc, secret, backend), enc.layout


def encode_concat(spec: SchemeSpec, secret: SparseState, backend: str = "coset"):
    if spec.variant not in CONCATS:
        raise ValueError(f"{spec.variant} is not a concatenated scheme")
    return encode(spec, secret, backend)


def encode_with_reference(enc: LinearEncoding, backend: str = "coset"):
    """q^(-m/2) sum_s |enc(s)>|s>_R with the m reference qudits last."""
    q, m = enc.spec.q, enc.spec.m
    layout = enc.layout.with_reference(m)
    if backend == "sparse":
        words = all_words(m, q)
        uniform = SparseState(q, m, words, np.full(len(words), 1 / math.sqrt(len(words))))
        return _sparse_encode(enc, uniform, reference=True), layout
    secret_map, random_map = _all_maps(enc)
    return CosetState.entangled_with_reference(q, secret_map, random_map), layout


def drop_shares(state, layout: ShareLayout, parties_to_drop: Sequence[int]):
    """Move whole shares into the environment; the state itself is untouched
    because discarded shares still purify the remaining ones."""
    drop = sorted(set(parties_to_drop))
    if not drop:
        return state, layout
    unknown = [p for p in drop if p not in layout.parties]
    if unknown:
        raise AccessStructureViolation(f"parties {unknown} hold no share")
    remaining = [p for p in layout.party_ids if p not in drop]
    if len(remaining) < layout.threshold:
        raise AccessStructureViolation(
            f"dropping {drop} leaves {len(remaining)} parties, below the threshold {layout.threshold}"
        )
    moved = tuple(i for p in drop for i in layout.qudits(p))
    parties = {p: layout.parties[p] for p in remaining}
    return state, replace(layout, parties=parties, environment=tuple(sorted(layout.environment + moved)))
