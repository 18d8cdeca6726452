"""Run configuration, the demo registry and the versioned JSON report format."""

from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Optional

from . import __version__
from .errors import BadParameters
from .recovery import CtrlAdd, GateSchedule, LinearMap
from .schemes.spec import SchemeSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA = "ceqts-report/1"
FORMATS = ("json", "csv", "text")
CSV_COLUMNS = ("variant", "k", "n", "d", "q", "m", "cc_measured", "cc_bound", "verdict")

# Worked instances, keyed by a short name usable as --demo.
DEMOS: dict[str, dict[str, Any]] = {
    "2-3-cleve": {"variant": "qts", "k": 2, "n": 3},
    "3-4-1-ramp": {"variant": "ramp", "t": 3, "n": 4, "z": 1},
    "3-5-fixed": {"variant": "fixed-staircase", "k": 3, "n": 5, "d": 5},
    "3-5-basic": {"variant": "basic-staircase", "k": 3, "n": 5},
    "3-5-universal": {"variant": "universal-staircase", "k": 3, "n": 5},
    "concat-fixed-2-3-3": {"variant": "concat-fixed", "k": 2, "n": 3, "d": 3},
    "concat-universal-2-3": {"variant": "concat-universal", "k": 2, "n": 3},
}

SCHEME_KEYS = ("variant", "k", "n", "d", "q", "points", "t", "z", "experimental")


def demo_spec(name: str) -> SchemeSpec:
    if name not in DEMOS:
        raise BadParameters(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")
    return SchemeSpec.from_config(DEMOS[name])


@dataclass
class RunConfig:
    """Everything a command needs besides its own arguments.

    The seed is echoed verbatim into every report."""

    scheme: Optional[SchemeSpec] = None
    backend: str = "auto"
    budgets: dict[str, int] = field(default_factory=dict)
    seed: int = 0
    output: Optional[str] = None
    format: str = "text"

    def echo(self) -> dict:
        return {
            "scheme": self.scheme.to_config() if self.scheme else None,
            "backend": self.backend,
            "budgets": dict(self.budgets),
            "seed": self.seed,
            "format": self.format,
        }


def load_config(path: str) -> dict:
    """Read a TOML config into flat keys.

    Scheme keys may sit at top level or under [scheme]; run options under
    [run]; budget overrides under [budget] as `terms` and `dense`."""
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise BadParameters(f"{path}: {exc}") from None
    run_keys = ("backend", "seed", "output", "format")
    unknown = set(doc) - set(SCHEME_KEYS) - set(run_keys) - {"scheme", "run", "budget", "demo"}
    unknown |= {f"scheme.{key}" for key in doc.get("scheme", {}) if key not in SCHEME_KEYS}
    unknown |= {f"run.{key}" for key in doc.get("run", {}) if key not in run_keys}
    unknown |= {f"budget.{key}" for key in doc.get("budget", {}) if key not in ("terms", "dense")}
    if unknown:
        raise BadParameters(f"{path}: unknown keys {sorted(unknown)}")
    flat: dict[str, Any] = {}
    scheme = dict(doc.get("scheme", {}))
    scheme.update({key: doc[key] for key in SCHEME_KEYS if key in doc})
    if "demo" in doc:
        flat["demo"] = doc["demo"]
    if scheme:
        flat["scheme"] = scheme
    run = doc.get("run", {})
    for key in run_keys:
        if key in run:
            flat[key] = run[key]
        elif key in doc:
            flat[key] = doc[key]
    budgets = doc.get("budget", {})
    if budgets:
        flat["budgets"] = {key: int(value) for key, value in budgets.items()}
    return flat


@dataclass
class ReportDocument:
    command: str
    config: dict
    payload: dict
    verdict: str
    tool_version: str = __version__
    schema: str = SCHEMA
    wall_clock: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "tool_version": self.tool_version,
            "command": self.command,
            "config": self.config,
            "verdict": self.verdict,
            "payload": self.payload,
            "wall_clock": self.wall_clock,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        data = json.loads(text)
        if data.get("schema") != SCHEMA:
            raise BadParameters(f"unsupported report schema {data.get('schema')!r}; expected {SCHEMA}")
        missing = {"tool_version", "command", "config", "payload", "verdict"} - set(data)
        if missing:
            raise BadParameters(f"report lacks {sorted(missing)}")
        return cls(
            command=data["command"],
            config=data["config"],
            payload=data["payload"],
            verdict=data["verdict"],
            tool_version=data["tool_version"],
            schema=data["schema"],
            wall_clock=data.get("wall_clock"),
        )


def schedule_to_dict(schedule: GateSchedule) -> dict:
    steps = []
    for step in schedule.steps:
        if isinstance(step, LinearMap):
            steps.append({"gate": "linear", "qudits": list(step.indices), "matrix": step.matrix.tolist(), "note": step.note})
        elif isinstance(step, CtrlAdd):
            steps.append({"gate": "ctrl-add", "alpha": step.alpha, "control": step.control, "target": step.target, "note": step.note})
        else:
            steps.append({"gate": "reorder", "permutation": list(step.permutation), "note": step.note})
    return {
        "D": list(schedule.D),
        "communicated": {str(p): list(v) for p, v in sorted(schedule.communicated.items())},
        "steps": steps,
        "secret_out": list(schedule.secret_out),
    }


def csv_table(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: row.get(key, "") for key in CSV_COLUMNS})
    return buf.getvalue()
