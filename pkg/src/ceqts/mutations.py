"""Canned encoder and schedule defects, used to show the verifier has teeth.

A mutation corrupts the dealer's side only: the combiner keeps planning for
the intended scheme, so a defect shows up as a failed recovery or a leak.
`dup-point` is the exception; it corrupts the published parameters, which
both sides then use.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .errors import BadParameters, ScheduleError
from .recovery import CtrlAdd, GateSchedule, plan_recovery
from .schemes.encoding import LinearEncoding, ShareLayout, build_encoding
from .schemes.spec import STAIRCASES, SchemeSpec
from .schemes.staircase import swap_carried_entries

KINDS = ("zero-y", "dup-point", "truncate-layer", "swap-d", "skip-ctrl-add", "leak")


@dataclass(frozen=True)
class Mutation:
    kind: str
    args: tuple[int, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "Mutation":
        """'zero-y:3,2' -> Mutation('zero-y', (3, 2))."""
        kind, _, rest = text.strip().partition(":")
        if kind not in KINDS:
            raise BadParameters(f"unknown mutation {kind!r}; choose from {', '.join(KINDS)}")
        try:
            args = tuple(int(a) for a in rest.split(",") if a.strip())
        except ValueError:
            raise BadParameters(f"mutation arguments must be integers, got {rest!r}") from None
        if kind == "zero-y" and len(args) != 2:
            raise BadParameters("zero-y takes a 1-based entry position, e.g. zero-y:3,2")
        if kind != "zero-y" and args:
            raise BadParameters(f"{kind} takes no arguments")
        return cls(kind, args)

    def __str__(self) -> str:
        return self.kind + (":" + ",".join(map(str, self.args)) if self.args else "")

    def planning_spec(self, spec: SchemeSpec) -> SchemeSpec:
        """The parameters the combiner plans with."""
        if self.kind == "dup-point":
            return self._dup_spec(spec)
        return spec

    def _dup_spec(self, spec: SchemeSpec) -> SchemeSpec:
        points = list(spec.points)
        points[1] = points[0]
        return replace(spec, points=tuple(points))

    def encoding(self, spec: SchemeSpec) -> LinearEncoding:
        """The defective encoder; raises BadParameters when the defect does not
        apply to this scheme."""
        label = str(self)
        if self.kind == "dup-point":
            return replace(build_encoding(self._dup_spec(spec)), spec=spec, mutation=label)
        enc = build_encoding(spec)
        if self.kind in ("zero-y", "swap-d"):
            if spec.variant not in STAIRCASES:
                raise BadParameters(f"{self.kind} needs a staircase scheme, not {spec.variant}")
            asm = enc.assembly
            if self.kind == "zero-y":
                row, col = self.args
                if not (1 <= row <= asm.rows and 1 <= col <= asm.cols):
                    raise BadParameters(f"Y has no entry ({row},{col}); it is {asm.rows}x{asm.cols}")
                if asm.template[row - 1][col - 1] is None:
                    raise BadParameters(f"Y entry ({row},{col}) is already a structural zero")
                asm = asm.with_entry(row, col, None)
            else:
                asm = swap_carried_entries(asm)
            secret_map, random_map = asm.linear_maps()
            return replace(enc, secret_map=secret_map, random_map=random_map, assembly=asm, mutation=label)
        if self.kind == "truncate-layer":
            return replace(enc, layout=_truncate(enc.layout), mutation=label)
        if self.kind == "leak":
            return _leak(enc, label)
        if self.kind == "skip-ctrl-add":
            if spec.variant not in STAIRCASES:
                raise BadParameters("skip-ctrl-add needs a staircase schedule with controlled adds")
            return replace(enc, mutation=label)
        raise BadParameters(f"unknown mutation {self.kind!r}")

    def schedule(self, schedule: GateSchedule) -> GateSchedule:
        """Drop the first controlled add (skip-ctrl-add); other kinds pass through."""
        if self.kind != "skip-ctrl-add":
            return schedule
        steps = list(schedule.steps)
        for i, step in enumerate(steps):
            if isinstance(step, CtrlAdd):
                del steps[i]
                return replace(schedule, steps=tuple(steps))
        return schedule


def _truncate(layout: ShareLayout) -> ShareLayout:
    """Every party loses its last layer to the environment."""
    parties, moved = {}, []
    for p, layers in layout.parties.items():
        if len(layers) < 2:
            raise BadParameters("truncate-layer needs shares with at least two layers")
        parties[p] = layers[:-1]
        moved.extend(layers[-1][1])
    return replace(layout, parties=parties, environment=tuple(sorted(layout.environment + tuple(moved))))


def _leak(enc: LinearEncoding, label: str) -> LinearEncoding:
    """Hand party 1 a verbatim copy of s_1 as an extra layer."""
    q, m = enc.spec.q, enc.spec.m
    row = np.zeros((1, m), dtype=np.int64)
    row[0, 0] = 1
    layout = enc.layout
    index = layout.n_qudits
    top = max(layer for layer, _ in layout.parties[1])
    parties = dict(layout.parties)
    parties[1] = layout.parties[1] + ((top + 1, (index,)),)
    layout = replace(layout, parties=parties, n_qudits=index + 1)
    return replace(enc, layout=layout, appended=row % q, mutation=label)


def applicable(mutation: Mutation, spec: SchemeSpec) -> bool:
    try:
        mutation.encoding(spec)
    except BadParameters:
        return False
    if mutation.kind == "skip-ctrl-add":
        return _has_ctrl_add(spec)
    return True


def _has_ctrl_add(spec: SchemeSpec) -> bool:
    for d in spec.admissible_d:
        for D in itertools.combinations(range(1, spec.n + 1), d):
            try:
                if any(isinstance(s, CtrlAdd) for s in plan_recovery(spec, D).steps):
                    return True
            except ScheduleError:
                continue
    return False
