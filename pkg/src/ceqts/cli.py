"""Command-line front end.

    ceqts derive universal-staircase -k 3 -n 5
    ceqts roundtrip --demo 3-5-fixed --D 1,2,3,4,5
    ceqts verify --demo 3-5-universal --mutate zero-y:3,2
    ceqts plot-data --k-max 4

Exit codes: 0 pass, 1 verification or engine failure, 2 usage or parameter error.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__, budget
from .engine import SparseState, fidelity, partial_trace
from .errors import (
    AccessStructureViolation,
    BadEvaluationPoints,
    BadModulus,
    BadParameters,
    CeqtsError,
    NoCloningViolation,
    ShapeError,
    UnsupportedD,
    ZeroState,
)
from .mutations import KINDS, Mutation
from .recovery import communicated_qudits, communication_cost, execute, plan_recovery
from .reports import DEMOS, FORMATS, RunConfig, ReportDocument, csv_table, demo_spec, load_config, schedule_to_dict
from .schemes.encoding import BACKENDS, build_encoding, encode_with_reference, realize
from .schemes.spec import (
    CONCAT_FIXED,
    CONCAT_UNIVERSAL,
    FIXED,
    QTS,
    UNIVERSAL,
    VARIANTS,
    SchemeSpec,
    canonical_variant,
    derive_params,
)
from .verifier import FIDELITY_TOL, choose_backend, download_audit, random_secret, reference_fidelity, verify_scheme

USAGE_ERRORS = (
    BadParameters,
    BadModulus,
    BadEvaluationPoints,
    NoCloningViolation,
    AccessStructureViolation,
    UnsupportedD,
    ShapeError,
    ZeroState,
)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# ---------------------------------------------------------------- cost table


def lower_bound(spec: SchemeSpec, d: int) -> float:
    """Smallest download that any scheme with this secret size and secrecy can achieve at d."""
    return SchemeSpec.lower_bound(d, spec.secrecy_bound + 1, spec.m)


def cost_rows(spec: SchemeSpec) -> list[dict]:
    rows = []
    for d in spec.admissible_d:
        measured = communication_cost(spec, d)
        bound = lower_bound(spec, d)
        ok = measured == spec.cost_formula(d) and measured >= bound - 1e-9
        rows.append(
            {
                "variant": spec.variant,
                "k": spec.k,
                "n": spec.n,
                "d": d,
                "q": spec.q,
                "m": spec.m,
                "cc_measured": measured,
                "cc_bound": f"{bound:.6g}",
                "verdict": "pass" if ok else "fail",
            }
        )
    return rows


def reference_parameters(spec: SchemeSpec) -> Optional[dict]:
    """Published parameters for the tabulated constructions, or None."""
    k, n = spec.k, spec.n
    if spec.variant == QTS:
        return {"m": 1, "q_floor": (2 * k - 1, False), "cc_per_symbol": {k: k}}
    if spec.variant in (FIXED, CONCAT_FIXED):
        d = spec.d
        floor = 2 * k - 1 if spec.variant == FIXED else d + k - 1
        return {"m": d - k + 1, "q_floor": (floor, True), "cc_per_symbol": {k: k, d: d / (d - k + 1)}}
    if spec.variant == UNIVERSAL:
        m, floor = math.lcm(*range(1, k + 1)), 2 * k - 1
    elif spec.variant == CONCAT_UNIVERSAL:
        m, floor = math.lcm(*range(1, n - k + 2)), n + k - 1
    else:
        return None
    return {"m": m, "q_floor": (floor, True), "cc_per_symbol": {d: d / (d - k + 1) for d in range(k, n + 1)}}


def compare_reference(spec: SchemeSpec) -> dict:
    ref = reference_parameters(spec)
    if ref is None:
        return {"tabulated": False, "mismatches": []}
    bad = []
    if spec.m != ref["m"]:
        bad.append(f"m={spec.m}, reference {ref['m']}")
    if spec.share_size() != spec.m:
        bad.append(f"w_j={spec.share_size()}, reference m={spec.m}")
    floor, strict = ref["q_floor"]
    if spec.q < floor or (strict and spec.q == floor):
        bad.append(f"q={spec.q} below the floor {'>' if strict else '>='} {floor}")
    for d, per_symbol in ref["cc_per_symbol"].items():
        got = communication_cost(spec, d) / spec.m
        if abs(got - per_symbol) > 1e-12:
            bad.append(f"CC({d})/m={got:.6g}, reference {per_symbol:.6g}")
    floor_text = f"q {'>' if strict else '>='} {floor}"
    return {"tabulated": True, "m": ref["m"], "q_floor": floor_text, "mismatches": bad}


# ---------------------------------------------------------------- config plumbing


def _scheme_from_args(args, base: dict) -> Optional[SchemeSpec]:
    if getattr(args, "demo", None):
        return demo_spec(args.demo)
    cfg = dict(base.get("scheme", {}))
    if not cfg and base.get("demo"):
        return demo_spec(base["demo"])
    for key in ("variant", "k", "n", "d", "q", "t", "z"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "points", None):
        cfg["points"] = args.points
    if getattr(args, "experimental", False):
        cfg["experimental"] = True
    if not cfg:
        return None
    if "variant" not in cfg:
        raise BadParameters("no scheme given: use --demo, --config or --variant")
    return SchemeSpec.from_config(cfg)


def build_run_config(args) -> RunConfig:
    base = load_config(args.config) if getattr(args, "config", None) else {}
    cfg = RunConfig(
        scheme=_scheme_from_args(args, base),
        backend=base.get("backend", "auto"),
        budgets=dict(base.get("budgets", {})),
        seed=int(base.get("seed", 0)),
        output=base.get("output"),
        format=base.get("format", "text"),
    )
    if getattr(args, "backend", None):
        cfg.backend = args.backend
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "output", None):
        cfg.output = args.output
    if getattr(args, "format", None):
        cfg.format = args.format
    if getattr(args, "term_budget", None):
        cfg.budgets["terms"] = args.term_budget
    if getattr(args, "dense_budget", None):
        cfg.budgets["dense"] = args.dense_budget
    if cfg.backend not in ("auto",) + BACKENDS:
        raise BadParameters(f"unknown backend {cfg.backend!r}")
    if cfg.format not in FORMATS:
        raise BadParameters(f"unknown format {cfg.format!r}; choose from {', '.join(FORMATS)}")
    return cfg


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_document(cfg: RunConfig, doc: ReportDocument, text: str, rows: Optional[list[dict]] = None) -> None:
    if cfg.format == "json":
        _emit(cfg, doc.to_json())
    elif cfg.format == "csv":
        _emit(cfg, csv_table(rows or []))
    else:
        _emit(cfg, text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------- derive


def _require_scheme(cfg: RunConfig) -> SchemeSpec:
    if cfg.scheme is None:
        raise BadParameters("no scheme given: use --demo, --config or a variant with -k/-n")
    return cfg.scheme


def cmd_derive(args) -> int:
    cfg = build_run_config(args)
    spec = _require_scheme(cfg)
    rows = cost_rows(spec)
    ref = compare_reference(spec)
    payload = {"spec": spec.to_dict(), "share_size": spec.share_size(), "cost_table": rows, "reference": ref}
    lines = [
        f"{spec.variant} {spec.label()}",
        f"  q = {spec.q}",
        f"  m = {spec.m}",
        f"  w_j = {spec.share_size()} for every party",
        f"  points = {' '.join(map(str, spec.points))}",
    ]
    if spec.levels:
        lines.append(f"  levels d_i = {' '.join(map(str, spec.levels))}; a_i = {' '.join(map(str, spec.a))}")
    lines.append("   d  CC formula  CC measured  lower bound  verdict")
    for row in rows:
        formula = spec.cost_formula(row["d"])
        lines.append(f"  {row['d']:>2}  {formula:>10}  {row['cc_measured']:>11}  {row['cc_bound']:>11}  {row['verdict']}")
    if not ref["tabulated"]:
        lines.append("  reference parameters: not a tabulated construction")
    elif ref["mismatches"]:
        lines.append("  reference parameters: MISMATCH " + "; ".join(ref["mismatches"]))
    else:
        lines.append(f"  reference parameters: match (m={ref['m']}, {ref['q_floor']}, CC(d)/m = d/(d-k+1))")
    verdict = "pass" if all(r["verdict"] == "pass" for r in rows) and not ref["mismatches"] else "fail"
    doc = ReportDocument("derive", cfg.echo(), payload, verdict)
    _emit_document(cfg, doc, "\n".join(lines), rows)
    return 0 if verdict == "pass" else 1


# ---------------------------------------------------------------- roundtrip


def _secret(spec: SchemeSpec, source: str, word: Optional[list[int]], rng: np.random.Generator, support: int):
    if source == "basis":
        if word is None:
            word = [(i + 1) % spec.q for i in range(spec.m)]
        if len(word) != spec.m:
            raise BadParameters(f"the secret has {spec.m} symbols, --word gave {len(word)}")
        return f"basis {word}", SparseState.basis(spec.q, [w % spec.q for w in word])
    return f"random pure state on {support} words", random_secret(spec.q, spec.m, rng, support)


def _roundtrip(spec: SchemeSpec, cfg: RunConfig, D: Sequence[int], source: str, word, explain: bool) -> tuple[dict, str, bool]:
    schedule = plan_recovery(spec, D)
    enc = build_encoding(spec)
    rng = np.random.default_rng(cfg.seed)
    backend = choose_backend(enc, cfg.backend)
    support = 8 if backend == "coset" else 4
    if source == "entangled":
        state, layout = encode_with_reference(enc, backend)
        transcript = execute(schedule, state, None)
        rho = partial_trace(transcript.state, list(transcript.secret_out) + list(layout.reference))
        value = reference_fidelity(rho, spec.m, spec.q)
        label = "maximally entangled with a reference"
    else:
        label, secret = _secret(spec, source, word, rng, support)
        transcript = execute(schedule, realize(enc, secret, backend), enc.layout)
        value = fidelity(partial_trace(transcript.state, transcript.secret_out), secret)
    ok = value >= 1 - FIDELITY_TOL
    payload = {
        "spec": spec.to_dict(),
        "D": list(schedule.D),
        "d": schedule.d,
        "secret": label,
        "backend": backend,
        "fidelity": value,
        "tolerance": FIDELITY_TOL,
        "cost": transcript.cost,
        "cost_formula": spec.cost_formula(schedule.d),
        "sent": {str(p): c for p, c in transcript.qudits_received.items()},
    }
    if explain:
        payload["schedule"] = schedule_to_dict(schedule)
    lines = [
        f"{spec.variant} {spec.label()} q={spec.q} m={spec.m}  D={list(schedule.D)}",
        f"  secret: {label} ({backend} backend)",
        "  sent: " + ", ".join(f"party {p}: {c}" for p, c in transcript.qudits_received.items()),
        f"  cost {transcript.cost} (designed {spec.cost_formula(schedule.d)})",
        f"  fidelity {value:.12f}  {'ok' if ok else 'BELOW 1-' + format(FIDELITY_TOL, 'g')}",
    ]
    if explain:
        lines.append(schedule.dump())
    return payload, "\n".join(lines), ok


def cmd_roundtrip(args) -> int:
    cfg = build_run_config(args)
    spec = _require_scheme(cfg)
    D = args.D if args.D is not None else list(range(1, spec.threshold + 1))
    try:
        with budget.limits(**cfg.budgets):
            payload, text, ok = _roundtrip(spec, cfg, D, args.secret, args.word, args.explain)
    except CeqtsError as exc:
        code = 2 if isinstance(exc, USAGE_ERRORS) else 1
        error = {"type": type(exc).__name__, "message": str(exc)}
        payload = {"spec": spec.to_dict(), "D": list(D), "error": error}
        if code == 1:
            rows = [i for idx in communicated_qudits(spec, sorted(set(D))).values() for i in idx]
            payload["rank_audit"] = download_audit(build_encoding(spec), rows)
        print(f"error: {error['type']}: {error['message']}", file=sys.stderr)
        doc = ReportDocument("roundtrip", cfg.echo(), payload, "error")
        if cfg.format == "json":
            _emit(cfg, doc.to_json())
        return code
    rows = [
        {
            "variant": spec.variant, "k": spec.k, "n": spec.n, "d": payload["d"], "q": spec.q, "m": spec.m,
            "cc_measured": payload["cost"], "cc_bound": f"{lower_bound(spec, payload['d']):.6g}",
            "verdict": "pass" if ok else "fail",
        }
    ]
    doc = ReportDocument("roundtrip", cfg.echo(), payload, "pass" if ok else "fail")
    _emit_document(cfg, doc, text, rows)
    return 0 if ok else 1


# ---------------------------------------------------------------- verify


LISTED = 8  # failures and skips printed per check in text reports


def _verify_text(report) -> str:
    spec = report.spec
    head = f"verify {spec.variant} {spec.label()} q={spec.q} m={spec.m} seed={report.seed}"
    if report.mutation:
        head += f" mutation={report.mutation}"
    lines = [head]
    for check in report.checks:
        fails, skips = check.failures, check.skipped
        lines.append(f"  {check.name:<20} {check.verdict.upper():<5} {len(check.records)} records, {len(fails)} failed, {len(skips)} skipped")
        for r in fails[:LISTED]:
            detail = f" ({r.diagnostic})" if r.diagnostic else ""
            lines.append(f"    FAIL {r.name} {r.subject}: measured {r.measured} expected {r.expected}{detail}")
        if len(fails) > LISTED:
            lines.append(f"    ... {len(fails) - LISTED} more failures in the JSON report")
        for r in skips[:LISTED]:
            lines.append(f"    skip {r.name} {r.subject}: {r.skipped_reason}")
        if len(skips) > LISTED:
            lines.append(f"    ... {len(skips) - LISTED} more skips in the JSON report")
        for flag in check.info.get("flags", []):
            lines.append(f"    note: {flag}")
    lines.append(f"verdict: {report.verdict.upper()}")
    return "\n".join(lines)


def cmd_verify(args) -> int:
    cfg = build_run_config(args)
    spec = _require_scheme(cfg)
    mutation = Mutation.parse(args.mutate) if args.mutate else None
    if mutation is not None:
        mutation.encoding(spec)
    with budget.limits(**cfg.budgets):
        report = verify_scheme(spec, mutation=mutation, seed=cfg.seed, backend=cfg.backend)
        payload = report.to_dict()
    wall = payload.pop("wall_clock")
    cost = next((c for c in report.checks if c.name == "cost"), None)
    rows = cost_rows(spec) if cost is not None else []
    if mutation is not None:
        for row in rows:
            row["verdict"] = cost.verdict
    doc = ReportDocument("verify", cfg.echo(), payload, report.verdict, wall_clock=wall)
    _emit_document(cfg, doc, _verify_text(report), rows)
    return 0 if report.passed else 1


# ---------------------------------------------------------------- plot-data


def cmd_plot_data(args) -> int:
    cfg = build_run_config(args)
    variants = [canonical_variant(v) for v in args.variants.split(",")]
    rows = []
    for variant in variants:
        for k in range(2, args.k_max + 1):
            n = 2 * k - 1
            if variant == FIXED or variant == CONCAT_FIXED:
                for d in range(k, n + 1):
                    spec = derive_params(variant, k=k, n=n, d=d)
                    rows.extend(r for r in cost_rows(spec) if r["d"] == d)
            else:
                rows.extend(cost_rows(derive_params(variant, k=k, n=n)))
    verdict = "pass" if all(r["verdict"] == "pass" for r in rows) else "fail"
    doc = ReportDocument("plot-data", cfg.echo(), {"rows": rows}, verdict)
    if cfg.format == "json":
        _emit(cfg, doc.to_json())
    else:
        _emit(cfg, csv_table(rows))
    return 0 if verdict == "pass" else 1


# ---------------------------------------------------------------- parser


def _scheme_args(p: argparse.ArgumentParser, positional_variant: bool = False) -> None:
    if positional_variant:
        p.add_argument("variant", nargs="?", help=f"one of {', '.join(VARIANTS)} (or a dashed alias)")
    else:
        p.add_argument("--variant", help=f"one of {', '.join(VARIANTS)} (or a dashed alias)")
    p.add_argument("--demo", choices=sorted(DEMOS), help="a built-in worked instance")
    p.add_argument("--config", help="TOML file with [scheme], [run] and [budget] tables")
    p.add_argument("-k", type=int, help="threshold")
    p.add_argument("-n", type=int, help="number of parties")
    p.add_argument("-d", type=int, help="recovery size (fixed-d variants)")
    p.add_argument("-t", type=int, help="ramp recovery threshold")
    p.add_argument("-z", type=int, help="ramp secrecy bound")
    p.add_argument("-q", type=int, help="field size (default: smallest admissible prime)")
    p.add_argument("--points", type=_int_list, help="evaluation points, comma separated")
    p.add_argument("--experimental", action="store_true", help="allow staircases with n < 2k-1")


def _run_args(p: argparse.ArgumentParser, formats: Sequence[str] = FORMATS) -> None:
    p.add_argument("--backend", choices=("auto",) + BACKENDS)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=formats)
    p.add_argument("--output", "-o", help="write the report here instead of stdout")
    p.add_argument("--term-budget", type=int, help="override the sparse term budget")
    p.add_argument("--dense-budget", type=int, help="override the dense matrix side budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ceqts", description="Communication-efficient quantum threshold schemes")
    parser.add_argument("--version", action="version", version=f"ceqts {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="print parameters and the cost table of a scheme")
    _scheme_args(p, positional_variant=True)
    _run_args(p)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("roundtrip", help="encode a secret, recover it from D and report fidelity and cost")
    _scheme_args(p)
    _run_args(p)
    p.add_argument("--D", type=_int_list, help="accessed parties, e.g. 1,2,3 (default: the first threshold parties)")
    p.add_argument("--secret", choices=("basis", "random", "entangled"), default="basis")
    p.add_argument("--word", type=_int_list, help="basis secret symbols (default 1,2,...,m)")
    p.add_argument("--explain", action="store_true", help="include the annotated gate schedule")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("verify", help="run every verifier check; exit 0 iff all non-skipped checks pass")
    _scheme_args(p)
    _run_args(p)
    p.add_argument("--mutate", help=f"inject a defect: {', '.join(KINDS)} (zero-y takes row,col)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot-data", help="d against CC_n(d) for n = 2k-1 as CSV")
    p.add_argument("--variants", default="universal-staircase,concat-universal", help="comma-separated variants")
    p.add_argument("--k-max", type=int, default=4)
    p.add_argument("--config", help="TOML file with [run] options")
    _run_args(p, formats=("csv", "json"))
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except CeqtsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
