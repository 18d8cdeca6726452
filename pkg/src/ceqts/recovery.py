"""Recovery schedules: plan the combiner's gates for an accessed set D and run them.

Two planners cover all variants.  Staircase schemes are decoded column by
column, right to left, then disentangled from the parties outside D.
Polynomial-unit schemes (threshold, ramp, concatenated) are decoded unit by
unit, each unit inverted on the shares in hand and then disentangled against
its missing shares.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .engine import partial_trace
from .errors import AccessStructureViolation, BadParameters, ScheduleError, SingularMatrix
from .field import FMatrix, mat_inv, power_matrix, rank
from .schemes.encoding import ShareLayout, build_encoding
from .schemes.spec import BASIC, CONCAT_FIXED, CONCAT_UNIVERSAL, STAIRCASES, UNIVERSAL, SchemeSpec
from .schemes.staircase import StaircaseAssembly, build_staircase_assembly, symbol_name


@dataclass(frozen=True)
class LinearMap:
    matrix: FMatrix
    indices: tuple[int, ...]
    note: str = ""

    @property
    def qudits(self) -> tuple[int, ...]:
        return self.indices

    def apply(self, state):
        return state.apply_linear(self.matrix, self.indices)


@dataclass(frozen=True)
class CtrlAdd:
    alpha: int
    control: int
    target: int
    note: str = ""

    @property
    def qudits(self) -> tuple[int, ...]:
        return (self.control, self.target)

    def apply(self, state):
        return state.apply_ctrl_add(self.alpha, self.control, self.target)


@dataclass(frozen=True)
class Reorder:
    permutation: tuple[int, ...]
    note: str = ""

    @property
    def qudits(self) -> tuple[int, ...]:
        return self.permutation

    def apply(self, state):
        return state.apply_reorder(self.permutation)


GateStep = Union[LinearMap, CtrlAdd, Reorder]


@dataclass(frozen=True)
class GateSchedule:
    spec: SchemeSpec
    D: tuple[int, ...]
    steps: tuple[GateStep, ...]
    communicated: dict[int, tuple[int, ...]]
    secret_out: tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.D)

    @property
    def cost(self) -> int:
        return sum(len(v) for v in self.communicated.values())

    def sent(self) -> dict[int, int]:
        return {p: len(v) for p, v in sorted(self.communicated.items())}

    def linear_maps(self) -> list[LinearMap]:
        return [s for s in self.steps if isinstance(s, LinearMap)]

    def dump(self) -> str:
        """Steps in order with matrices in row-major decimal and their notes."""
        lines = [
            f"recovery of {self.spec.variant} {self.spec.label()} q={self.spec.q} from D={list(self.D)} (d={self.d})",
            "communicated: " + " ".join(f"{p}:{list(v)}" for p, v in sorted(self.communicated.items())),
        ]
        n_lin = n_add = 0
        for step in self.steps:
            if isinstance(step, LinearMap):
                n_lin += 1
                lines.append(f"K{n_lin} LinearMap on {list(step.indices)}  # {step.note}")
                lines.extend("    " + " ".join(str(int(v)) for v in row) for row in step.matrix.tolist())
            elif isinstance(step, CtrlAdd):
                n_add += 1
                lines.append(f"A{n_add} CtrlAdd L{step.alpha} control={step.control} target={step.target}  # {step.note}")
            else:
                lines.append(f"Reorder {list(step.permutation)}  # {step.note}")
        lines.append(f"secret_out: {list(self.secret_out)}")
        return "\n".join(lines)


@dataclass
class Transcript:
    D: tuple[int, ...]
    d: int
    qudits_received: dict[int, int]
    state: object
    secret_out: tuple[int, ...]
    schedule: GateSchedule
    intermediate: list = field(default_factory=list)

    @property
    def cost(self) -> int:
        return sum(self.qudits_received.values())


def _check_access(spec: SchemeSpec, D: Sequence[int]) -> tuple[int, ...]:
    D = tuple(sorted(set(int(p) for p in D)))
    bad = [p for p in D if not 1 <= p <= spec.n]
    if bad:
        raise BadParameters(f"parties {bad} are not among 1..{spec.n}")
    if len(D) < spec.threshold:
        raise AccessStructureViolation(f"{len(D)} parties cannot recover; the threshold is {spec.threshold}")
    spec.check_d(len(D))
    return D


def _identity(size: int, q: int) -> np.ndarray:
    return np.eye(size, dtype=np.int64) % q


def _invert(M: FMatrix, D: Sequence[int], what: str) -> FMatrix:
    try:
        return mat_inv(M)
    except SingularMatrix:
        raise ScheduleError(f"D={list(D)}: {what} is singular mod {M.q}; the downloaded qudits do not determine it") from None


def download_layers(spec: SchemeSpec, d: int) -> int:
    """Leading layers each accessed party sends (network variants)."""
    spec.check_d(d)
    if spec.variant == CONCAT_FIXED:
        return 1 if d == spec.d or spec.d == spec.k else 2
    if spec.variant == CONCAT_UNIVERSAL:
        return spec.level_of(d)
    return 1


def communicated_qudits(spec: SchemeSpec, D: Sequence[int]) -> dict[int, tuple[int, ...]]:
    """The qudits each party in D sends to the combiner, by the download rule
    of the variant alone (no schedule is planned)."""
    D = _check_access(spec, D)
    if spec.variant in STAIRCASES:
        asm = build_staircase_assembly(spec)
        c = asm.columns_for(len(D))
        return {p: tuple((p - 1) * asm.cols + j for j in range(c)) for p in D}
    layout = build_encoding(spec).layout
    layers = download_layers(spec, len(D))
    return {p: tuple(x for layer, idx in layout.parties[p] if layer <= layers for x in idx) for p in D}


# ---------------------------------------------------------------- staircase


class _StaircasePlanner:
    def __init__(self, spec: SchemeSpec, D: tuple[int, ...], assembly: Optional[StaircaseAssembly] = None):
        self.spec = spec
        self.asm = assembly or build_staircase_assembly(spec)
        self.D = D
        self.q = spec.q
        self.cols = self.asm.cols
        self.content: dict[int, tuple[str, int]] = {}
        self.steps: list[GateStep] = []
        self.c = self.asm.columns_for(len(D))

    def reg(self, party: int, col: int) -> int:
        return (party - 1) * self.cols + col - 1

    def holders(self, sym) -> list[int]:
        return sorted(r for r, s in self.content.items() if s == sym)

    def holder(self, sym, col: int) -> int:
        found = self.holders(sym)
        if not found:
            raise ScheduleError(f"no register holds {symbol_name(sym)}")
        same = [r for r in found if r % self.cols == col - 1]
        return (same or found)[0]

    def powers(self, parties: Sequence[int], rows: Sequence[int]) -> np.ndarray:
        return power_matrix([self.spec.points[p - 1] for p in parties], [r - 1 for r in rows], self.q).entries

    def _augmented(self, col: int, entries, known) -> None:
        rows = [row for row, _ in entries]
        unit = np.zeros((len(known), len(rows)), dtype=np.int64)
        for i, (row, _) in enumerate(known):
            unit[i, rows.index(row)] = 1
        M = FMatrix(np.concatenate([self.powers(self.D, rows), unit]), self.q)
        regs = [self.reg(p, col) for p in self.D] + [self.holder(sym, col) for _, sym in known]
        held = ", ".join(symbol_name(s) for _, s in known)
        what = f"column {col}: [V_D^{rows}; unit rows for {held}]"
        self.steps.append(LinearMap(_invert(M, self.D, what), tuple(regs), f"{what} inverted"))
        for r, (_, sym) in zip(regs, entries):
            self.content[r] = sym

    def _peel(self, col: int, entries, known) -> None:
        d = len(self.D)
        remaining = list(entries)
        for row, sym in sorted(known, key=lambda e: -e[0]):
            if len(remaining) <= d:
                break
            h = self.holder(sym, col)
            for p in self.D:
                alpha = (-pow(self.spec.points[p - 1], row - 1, self.q)) % self.q
                self.steps.append(CtrlAdd(alpha, h, self.reg(p, col), f"column {col}: remove {symbol_name(sym)} (row {row})"))
            remaining.remove((row, sym))
        if len(remaining) != d:
            raise ScheduleError(f"column {col}: {len(remaining)} rows left for {d} parties")
        rows = [row for row, _ in remaining]
        regs = tuple(self.reg(p, col) for p in self.D)
        K = _invert(FMatrix(self.powers(self.D, rows), self.q), self.D, f"column {col}: V_D^{rows}")
        self.steps.append(LinearMap(K, regs, f"column {col}: inverse of V_D^{rows}"))
        for r, (_, sym) in zip(regs, remaining):
            self.content[r] = sym

    def extract(self) -> None:
        d = len(self.D)
        variant = self.spec.variant
        for col in range(self.c, 0, -1):
            entries = self.asm.entries(col)
            known = [(row, sym) for row, sym in entries if self.holders(sym)]
            unknown = len(entries) - len(known)
            if unknown > d:
                raise ScheduleError(f"column {col} has {unknown} unknown entries but only {d} equations")
            augmented = variant == UNIVERSAL or (variant == BASIC and col == 1)
            if known and augmented and unknown == d:
                self._augmented(col, entries, known)
            else:
                self._peel(col, entries, known)

    def disentangle(self) -> None:
        P = self.asm.pure_parties
        E = [u for u in range(1, P + 1) if u not in self.D]
        if not E:
            return
        for col in range(self.c, 0, -1):
            blocked = {sym for j in range(self.c + 1, self.cols + 1) for _, sym in self.asm.entries(j)}
            blocked |= {sym for j in range(1, col) for _, sym in self.asm.entries(j)}
            entries = self.asm.entries(col)
            eligible = sorted(
                [(row, sym) for row, sym in entries if sym[0] == "r" and sym not in blocked], key=lambda e: -e[0]
            )
            if len(eligible) < len(E):
                raise ScheduleError(f"column {col}: {len(eligible)} free random entries for {len(E)} missing parties")
            rows = [row for row, _ in entries]
            VE = self.powers(E, rows)
            regs = tuple(self.holder(sym, col) for _, sym in entries)
            for choice in itertools.combinations(eligible, len(E)):
                chosen = sorted(row for row, _ in choice)
                M = _identity(len(rows), self.q)
                for t, row in enumerate(chosen):
                    M[rows.index(row)] = VE[t]
                K = FMatrix(M, self.q)
                if rank(K) == len(rows):
                    break
            else:
                raise ScheduleError(f"column {col}: no invertible disentangling map")
            names = ", ".join(symbol_name(self.asm.template[row - 1][col - 1]) for row in chosen)
            self.steps.append(LinearMap(K, regs, f"column {col}: overwrite {names} with the shares of parties {E}"))
            for row in chosen:
                r = regs[rows.index(row)]
                self.content.pop(r, None)

    def schedule(self) -> GateSchedule:
        self.extract()
        self.disentangle()
        where = {}
        for i, row in enumerate(self.asm.template):
            for j, sym in enumerate(row):
                if sym is not None and sym[0] == "s":
                    where[sym[1]] = j + 1
        out = tuple(self.holder(("s", i), where[i]) for i in range(1, self.spec.m + 1))
        communicated = {p: tuple(self.reg(p, j) for j in range(1, self.c + 1)) for p in self.D}
        return GateSchedule(self.spec, self.D, tuple(self.steps), communicated, out)


# ---------------------------------------------------------------- polynomial units


def _plan_network(spec: SchemeSpec, D: tuple[int, ...]) -> GateSchedule:
    enc = build_encoding(spec)
    net, layout = enc.network, enc.layout
    q, n, k, d = spec.q, spec.n, spec.k, len(D)
    holder = {w: i for i, w in enumerate(net.physical_wires())}
    steps: list[GateStep] = []

    def decode(unit, T: Sequence[int]) -> None:
        T = sorted(T)
        if len(T) != unit.threshold:
            raise ScheduleError(f"{unit.name} needs {unit.threshold} shares, got {len(T)}")
        try:
            regs = tuple(holder[unit.outputs[j - 1]] for j in T)
        except KeyError:
            raise ScheduleError(f"{unit.name}: a share in {T} is not available") from None
        Vt = power_matrix([unit.points[j - 1] for j in T], range(unit.threshold), q)
        steps.append(LinearMap(_invert(Vt, D, f"{unit.name}: V_T, T={T}"), regs, f"{unit.name}: inverse of V_T, T={T}"))
        E = [j for j in range(1, unit.pure_size + 1) if j not in T]
        rand = unit.random_positions
        if len(E) != len(rand):
            raise ScheduleError(f"{unit.name}: {len(E)} missing shares for {len(rand)} random coefficients")
        M = _identity(unit.threshold, q)
        M[list(rand)] = power_matrix([unit.points[j - 1] for j in E], range(unit.threshold), q).entries
        steps.append(LinearMap(FMatrix(M, q), regs, f"{unit.name}: disentangle against shares {E}"))
        for c in unit.data:
            holder[unit.coeffs[c]] = regs[c]

    if spec.variant == CONCAT_FIXED:
        ramp = net.unit_named("RQSS")
        if d == spec.d and spec.d != k:
            decode(ramp, D)
        else:
            inner = [u for u in net.units if u.scheme == 0]
            for u in inner:
                decode(u, D)
            decode(ramp, list(D) + list(range(n + 1, n + spec.d - k + 1)))
    elif spec.variant == CONCAT_UNIVERSAL:
        i = spec.level_of(d)
        for u in net.units_of(i):
            decode(u, D)
        for l in range(i - 1, 0, -1):
            for u in net.units_of(l):
                decode(u, list(D) + list(range(n + 1, n + i - l + 1)))
    else:
        decode(net.units[0], D)
    layers = download_layers(spec, d)
    communicated = {p: tuple(x for layer, idx in layout.parties[p] if layer <= layers for x in idx) for p in D}
    out = tuple(holder[w] for w in net.secret_wires())
    return GateSchedule(spec, D, tuple(steps), communicated, out)


def plan_recovery(spec: SchemeSpec, D: Sequence[int]) -> GateSchedule:
    """Deterministic gate schedule for the combiner holding the parties in D."""
    D = _check_access(spec, D)
    if spec.variant in STAIRCASES:
        return _StaircasePlanner(spec, D).schedule()
    return _plan_network(spec, D)


def execute(
    schedule: GateSchedule,
    state,
    layout: Optional[ShareLayout] = None,
    on_step: Optional[Callable[[int, object], None]] = None,
) -> Transcript:
    """Run the schedule; every gate may touch only communicated qudits."""
    allowed = {i for idx in schedule.communicated.values() for i in idx}
    if layout is not None:
        for p, idx in schedule.communicated.items():
            owned = set(layout.qudits(p)) if p in layout.parties else set()
            stray = [i for i in idx if i not in owned]
            if stray:
                raise ScheduleError(f"party {p} does not hold qudits {stray} in this layout")
    for step in schedule.steps:
        outside = [i for i in step.qudits if i not in allowed]
        if outside:
            raise ScheduleError(f"step touches qudits {outside} that were never sent to the combiner")
    for n, step in enumerate(schedule.steps):
        state = step.apply(state)
        if on_step is not None:
            on_step(n, state)
    return Transcript(schedule.D, schedule.d, schedule.sent(), state, schedule.secret_out, schedule)


def recover(spec: SchemeSpec, state, layout: ShareLayout, D: Sequence[int]):
    """(reduced operator on the output registers, transcript)."""
    schedule = plan_recovery(spec, D)
    transcript = execute(schedule, state, layout)
    return partial_trace(transcript.state, transcript.secret_out), transcript


def communication_cost(spec: SchemeSpec, d: int) -> int:
    """Worst-case number of qudits sent over every accessed set of size d."""
    spec.check_d(d)
    costs = [sum(map(len, communicated_qudits(spec, D).values())) for D in itertools.combinations(range(1, spec.n + 1), d)]
    if len(set(costs)) != 1:
        raise ScheduleError(f"cost at d={d} depends on the accessed set: {sorted(set(costs))}")
    return max(costs)
