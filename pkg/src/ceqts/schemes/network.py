"""Polynomial-evaluation networks for the threshold, ramp and concatenated schemes.

Each `Unit` is one polynomial block: its coefficients are wires (secret
symbols, fresh random symbols, or shares of earlier units) and share j is the
evaluation at points[j-1].  A share wire is either held by a party, discarded
into the environment, or consumed as a coefficient of a later unit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import BadParameters
from ..field import FMatrix, mulmod, power_matrix
from .spec import CONCAT_FIXED, CONCAT_UNIVERSAL, QTS, RAMP, SchemeSpec


@dataclass(frozen=True)
class Unit:
    name: str
    scheme: int  # 1-based position in a concatenation chain; 0 for inner threshold units
    q: int
    points: tuple[int, ...]
    coeffs: tuple[int, ...]  # wire ids; coefficient c multiplies x**c
    data: tuple[int, ...]  # coefficient positions carrying data; the rest are fresh randomness
    outputs: tuple[int, ...]  # wire id of share j at position j-1

    @property
    def threshold(self) -> int:
        return len(self.coeffs)

    @property
    def pure_size(self) -> int:
        return len(self.points)

    @property
    def random_positions(self) -> tuple[int, ...]:
        return tuple(c for c in range(len(self.coeffs)) if c not in self.data)

    def matrix(self) -> FMatrix:
        """Pure-size x threshold evaluation matrix."""
        return power_matrix(self.points, range(self.threshold), self.q)


@dataclass
class UnitNetwork:
    """Wires, units and the assignment of surviving wires to physical qudits."""

    q: int
    m: int
    wire_kind: list[tuple[str, int]] = field(default_factory=list)  # ("s", j) | ("r", j) | ("share", unit)
    units: list[Unit] = field(default_factory=list)
    parties: dict[int, list[tuple[int, list[int]]]] = field(default_factory=dict)  # party -> [(layer, wires)]
    environment: list[int] = field(default_factory=list)
    n_random: int = 0

    def new_wire(self, kind: str, ref: int) -> int:
        self.wire_kind.append((kind, ref))
        return len(self.wire_kind) - 1

    def secret_wires(self) -> list[int]:
        return [w for w, (kind, _) in enumerate(self.wire_kind) if kind == "s"]

    def fresh(self, count: int) -> list[int]:
        wires = []
        for _ in range(count):
            self.n_random += 1
            wires.append(self.new_wire("r", self.n_random))
        return wires

    def add_unit(self, name: str, scheme: int, points: Sequence[int], coeffs: Sequence[int], data: Sequence[int]) -> Unit:
        outputs = [self.new_wire("share", len(self.units)) for _ in points]
        unit = Unit(name, scheme, self.q, tuple(points), tuple(coeffs), tuple(data), tuple(outputs))
        self.units.append(unit)
        return unit

    def hold(self, party: int, layer: int, wires: Sequence[int]) -> None:
        slots = self.parties.setdefault(party, [])
        for entry in slots:
            if entry[0] == layer:
                entry[1].extend(wires)
                return
        slots.append((layer, list(wires)))

    def physical_wires(self) -> list[int]:
        """Wires in global qudit order: party-major, layer-minor, then environment."""
        order = []
        for party in sorted(self.parties):
            for _, wires in sorted(self.parties[party]):
                order.extend(wires)
        return order + list(self.environment)

    def linear_forms(self) -> np.ndarray:
        """Row w expresses wire w as a combination of (s_1..s_m, r_1..r_R)."""
        width = self.m + self.n_random
        forms = np.zeros((len(self.wire_kind), width), dtype=np.int64)
        for w, (kind, ref) in enumerate(self.wire_kind):
            if kind == "s":
                forms[w, ref - 1] = 1
            elif kind == "r":
                forms[w, self.m + ref - 1] = 1
        for unit in self.units:
            evaluated = mulmod(unit.matrix().entries, forms[list(unit.coeffs)], self.q)
            forms[list(unit.outputs)] = evaluated
        return forms

    def evaluate(self, secret: Sequence[int], randomness: np.ndarray) -> np.ndarray:
        """Wire values for one secret word and a batch of randomness rows, by
        running every polynomial in order (independent of `linear_forms`)."""
        randomness = np.atleast_2d(np.asarray(randomness, dtype=np.int64))
        batch = randomness.shape[0]
        values = np.zeros((batch, len(self.wire_kind)), dtype=np.int64)
        for w, (kind, ref) in enumerate(self.wire_kind):
            if kind == "s":
                values[:, w] = int(secret[ref - 1]) % self.q
            elif kind == "r":
                values[:, w] = randomness[:, ref - 1]
        for unit in self.units:
            coeffs = values[:, list(unit.coeffs)]
            for j, x in enumerate(unit.points):
                acc = np.zeros(batch, dtype=np.int64)
                for c in reversed(range(unit.threshold)):  # Horner
                    acc = (acc * x + coeffs[:, c]) % self.q
                values[:, unit.outputs[j]] = acc
        return values

    def unit_named(self, name: str) -> Unit:
        for unit in self.units:
            if unit.name == name:
                return unit
        raise KeyError(name)

    def units_of(self, scheme: int) -> list[Unit]:
        return [u for u in self.units if u.scheme == scheme]


def _ramp_blocks(
    net: UnitNetwork, name: str, scheme: int, inputs: Sequence[int], block: int, z: int, points: Sequence[int]
) -> list[Unit]:
    if len(inputs) % block:
        raise BadParameters(f"{name}: {len(inputs)} input qudits do not split into blocks of {block}")
    units = []
    for b in range(len(inputs) // block):
        coeffs = list(inputs[b * block : (b + 1) * block]) + net.fresh(z)
        label = name if len(inputs) == block else f"{name}.{b + 1}"
        units.append(net.add_unit(label, scheme, points, coeffs, range(block)))
    return units


def _share(units: Sequence[Unit], j: int) -> list[int]:
    """Share j (1-based) of a multi-block scheme: output j of each block."""
    return [u.outputs[j - 1] for u in units]


def threshold_network(spec: SchemeSpec) -> UnitNetwork:
    k, n = spec.k, spec.n
    net = UnitNetwork(spec.q, 1)
    s = net.new_wire("s", 1)
    coeffs = net.fresh(k - 1) + [s]
    unit = net.add_unit("QTS", 1, spec.points[: 2 * k - 1], coeffs, [k - 1])
    for j in range(1, 2 * k):
        if j <= n:
            net.hold(j, 1, [unit.outputs[j - 1]])
        else:
            net.environment.append(unit.outputs[j - 1])
    return net


def ramp_network(q: int, t: int, z: int, n: int, points: Sequence[int], secret_size: Optional[int] = None) -> UnitNetwork:
    """((t, n; z)) ramp scheme; secrets longer than t-z are split into
    consecutive blocks, and share j collects output j of every block."""
    secret_size = t - z if secret_size is None else secret_size
    net = UnitNetwork(q, secret_size)
    secret = [net.new_wire("s", i + 1) for i in range(secret_size)]
    units = _ramp_blocks(net, "RQSS", 1, secret, t - z, z, points[: t + z])
    for j in range(1, t + z + 1):
        if j <= n:
            net.hold(j, 1, _share(units, j))
        else:
            net.environment.extend(_share(units, j))
    return net


def concat_fixed_network(spec: SchemeSpec) -> UnitNetwork:
    k, n, d, m = spec.k, spec.n, spec.d, spec.m
    net = UnitNetwork(spec.q, m)
    secret = [net.new_wire("s", i + 1) for i in range(m)]
    (ramp,) = _ramp_blocks(net, "RQSS", 1, secret, m, k - 1, spec.points[: d + k - 1])
    for j in range(1, n + 1):
        net.hold(j, 1, [ramp.outputs[j - 1]])
    for c in range(1, d - k + 1):
        surplus = ramp.outputs[n + c - 1]
        cleve = net.add_unit(f"QTS{c}", 0, spec.points[: 2 * k - 1], net.fresh(k - 1) + [surplus], [k - 1])
        for j in range(1, 2 * k):
            if j <= n:
                net.hold(j, 2, [cleve.outputs[j - 1]])
            else:
                net.environment.append(cleve.outputs[j - 1])
    net.environment[:0] = list(ramp.outputs[n + d - k :])
    return net


def concat_universal_network(spec: SchemeSpec) -> UnitNetwork:
    """Chain RQSS_1..RQSS_L, RQSS_i = ((d_i, n+d_i-k; k-1)) with d_i = n+1-i.

    Surplus share n+l of RQSS_i feeds RQSS_{i+l}; the input of RQSS_i is the
    concatenation, over l = 1..i-1 in order, of share n+i-l of RQSS_l.
    """
    k, n, m = spec.k, spec.n, spec.m
    net = UnitNetwork(spec.q, m)
    secret = [net.new_wire("s", i + 1) for i in range(m)]
    schemes: list[list[Unit]] = []
    dropped: list[int] = []
    sizes: list[int] = []  # input size e_i predicted from the recursion
    for i, d_i in enumerate(spec.levels, start=1):
        if i == 1:
            inputs = secret
            sizes.append(m)
        else:
            inputs = [w for l in range(1, i) for w in _share(schemes[l - 1], n + i - l)]
            sizes.append(sum(sizes[l - 1] // (spec.levels[l - 1] - k + 1) for l in range(1, i)))
        if len(inputs) != sizes[-1]:
            raise BadParameters(f"RQSS_{i} receives {len(inputs)} qudits, the recursion predicts {sizes[-1]}")
        units = _ramp_blocks(net, f"RQSS{i}", i, inputs, d_i - k + 1, k - 1, spec.points[: d_i + k - 1])
        schemes.append(units)
        for j in range(1, n + 1):
            net.hold(j, i, _share(units, j))
        for j in range(n + d_i - k + 1, d_i + k):
            dropped.extend(_share(units, j))
    net.environment.extend(dropped)
    return net


def build_network(spec: SchemeSpec) -> UnitNetwork:
    if spec.variant == QTS:
        return threshold_network(spec)
    if spec.variant == RAMP:
        return ramp_network(spec.q, spec.t, spec.z, spec.n, spec.points)
    if spec.variant == CONCAT_FIXED:
        return concat_fixed_network(spec)
    if spec.variant == CONCAT_UNIVERSAL:
        return concat_universal_network(spec)
    raise BadParameters(f"{spec.variant} is not built from polynomial units")


def layer_sizes(net: UnitNetwork, party: int = 1) -> list[int]:
    return [len(wires) for _, wires in sorted(net.parties.get(party, []))]
