"""Acceptance criteria C1-C9. Each criterion records its parts on the
`acceptance` fixture; the terminal summary prints one PASS/FAIL line per
criterion with the measured values."""

import itertools
import math
import time

import pytest

from ceqts import verifier
from ceqts.engine import SparseState, partial_trace, reduced_deviation, superpose
from ceqts.field import vandermonde
from ceqts.mutations import Mutation
from ceqts.recovery import communicated_qudits
from ceqts.reports import DEMOS, demo_spec
from ceqts.schemes import (
    CONCAT_FIXED,
    CONCAT_UNIVERSAL,
    FIXED,
    QTS,
    RAMP,
    UNIVERSAL,
    build_encoding,
    build_staircase_assembly,
    derive_params,
    realize,
)
from ceqts.verifier import audit_costs, check_backend_equivalence, check_recoverability, check_secrecy, entropy_model_check

FIDELITY_TOL = 1e-9
ENTROPY_TOL = 1e-7
CANNED = ("zero-y:3,2", "dup-point", "truncate-layer", "swap-d", "skip-ctrl-add")

REFERENCE_V = [[1, 1, 1, 1, 1], [1, 2, 4, 1, 2], [1, 3, 2, 6, 4], [1, 4, 2, 1, 4], [1, 5, 4, 6, 2]]
REFERENCE_FIXED_Y = [["s1", "0", "0"], ["s2", "0", "0"], ["s3", "r1", "r2"], ["r1", "r3", "r5"], ["r2", "r4", "r6"]]
REFERENCE_UNIVERSAL_Y = [
    ["s1", "s4", "0", "0", "0", "0"],
    ["s2", "s5", "r1", "0", "0", "0"],
    ["s3", "s6", "r3", "r2", "r4", "r6"],
    ["r1", "r3", "r5", "r7", "r9", "r11"],
    ["r2", "r4", "r6", "r8", "r10", "r12"],
]


def fmt(values):
    return "(" + ", ".join(f"{v:g}" for v in values) + ")"


def test_tolerances_are_pinned():
    assert verifier.FIDELITY_TOL == FIDELITY_TOL
    assert verifier.ENTROPY_TOL == ENTROPY_TOL


def test_c1_reference_matrices(acceptance):
    start = time.perf_counter()
    V = vandermonde([1, 2, 3, 4, 5], 5, 7).tolist()
    fixed = build_staircase_assembly(demo_spec("3-5-fixed")).grid()
    universal = build_staircase_assembly(demo_spec("3-5-universal")).grid()
    elapsed = acceptance.timed(1, time.perf_counter() - start)
    ok = [
        acceptance.check(1, "V over F_7", V == REFERENCE_V, "5x5 exact"),
        acceptance.check(1, "fixed d=5 Y template", fixed == REFERENCE_FIXED_Y, "5x3 exact"),
        acceptance.check(1, "k=3 universal Y template", universal == REFERENCE_UNIVERSAL_Y, "5x6 exact"),
        acceptance.check(1, "runtime", elapsed < 1, f"{elapsed:.3f}s < 1s"),
    ]
    assert all(ok)


@pytest.mark.slow
def test_c2_fixed_scheme(acceptance):
    start = time.perf_counter()
    spec = demo_spec("3-5-fixed")
    terms = realize(build_encoding(spec), SparseState.basis(7, [1, 2, 3]), "sparse").terms
    report = check_recoverability(spec, FIDELITY_TOL, backend="sparse")
    costs = audit_costs(spec).measured
    elapsed = acceptance.timed(2, time.perf_counter() - start)
    fids = report.fidelities()
    expected_sets = math.comb(5, 5) + math.comb(5, 3)
    ok = [
        acceptance.check(2, "sparse state size", terms == 117649, f"{terms} terms"),
        acceptance.check(
            2,
            "recovery",
            len(fids) == expected_sets and not report.failures and not report.skipped,
            f"{len(fids)} sets, min fidelity {min(fids.values()):.12f} >= 1-{FIDELITY_TOL:g}, inputs basis/pairs/random",
        ),
        acceptance.check(2, "CC_5(5), CC_5(3)", (costs[5], costs[3]) == (5, 9), f"({costs[5]}, {costs[3]}) = (5, 9)"),
        acceptance.check(2, "runtime", elapsed < 60, f"{elapsed:.1f}s < 60s"),
    ]
    assert all(ok)


def test_c3_basic_scheme_costs(acceptance):
    start = time.perf_counter()
    audit = audit_costs(demo_spec("3-5-basic"))
    elapsed = acceptance.timed(3, time.perf_counter() - start)
    measured = [audit.measured[d] for d in (3, 4, 5)]
    chain = [r for r in audit.records if r.name == "strict-chain"]
    ok = [
        acceptance.check(3, "measured CC at d=3,4,5", measured == [9, 8, 5], fmt(measured)),
        acceptance.check(3, "strict decrease", len(chain) == 1 and chain[0].verdict == "pass", "9 > 8 > 5"),
        acceptance.check(3, "d=4 flagged above bound", audit.flags == ["suboptimal at d=4: 8 > 6"], "; ".join(audit.flags)),
        acceptance.check(3, "runtime", elapsed < 60, f"{elapsed:.2f}s < 60s"),
    ]
    assert all(ok)


def test_c4_universal_costs(acceptance):
    start = time.perf_counter()
    spec = demo_spec("3-5-universal")
    audit = audit_costs(spec)
    acceptance.timed(4, time.perf_counter() - start)
    measured = [audit.measured[d] for d in (3, 4, 5)]
    formula = [d * spec.m / (d - spec.k + 1) for d in (3, 4, 5)]
    slack = [audit.info["slack"][d] for d in (3, 4, 5)]
    sends = [audit.info["per_party"][d] for d in (3, 4, 5)]
    ok = [
        acceptance.check(4, "measured CC at d=3,4,5", measured == formula == [18, 12, 10], f"{fmt(measured)} = dm/(d-k+1)"),
        acceptance.check(4, "slack against the bound", slack == [0, 0, 0], fmt(slack)),
        acceptance.check(4, "per-party sends", sends == [[6], [3], [2]], "(6, 3, 2) at d = (3, 4, 5)"),
    ]
    assert all(ok)


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="at q=7 the qudits downloaded from D={2,3,4,5} fix only 4 of the 6 secret symbols")
def test_c4_universal_recovery_all_sets(acceptance):
    start = time.perf_counter()
    report = check_recoverability(demo_spec("3-5-universal"), FIDELITY_TOL, backend="coset")
    elapsed = acceptance.timed(4, time.perf_counter() - start)
    fids = report.fidelities()
    bad = [r.subject for r in report.failures]
    acceptance.check(4, "runtime", elapsed < 120, f"{elapsed:.1f}s < 120s")
    ok = acceptance.check(
        4,
        "recovery over all 16 sets (coset backend)",
        len(fids) == 16 and not bad,
        f"{len(fids) - len(bad)}/16 recover; failing: {', '.join(bad) or 'none'}",
    )
    assert ok and elapsed < 120


SECRET_SCHEMES = {
    "fixed (3,5,5)": lambda: demo_spec("3-5-fixed"),
    "universal m=6": lambda: demo_spec("3-5-universal"),
    "concat fixed (2,3,3)": lambda: demo_spec("concat-fixed-2-3-3"),
    "concat universal (2,3)": lambda: demo_spec("concat-universal-2-3"),
}


@pytest.mark.slow
def test_c5_secrecy(acceptance):
    ok = []
    for label, make in SECRET_SCHEMES.items():
        start = time.perf_counter()
        spec = make()
        report = check_secrecy(spec, FIDELITY_TOL)
        acceptance.timed(5, time.perf_counter() - start)
        devs = report.deviations()
        sizes = {len(s.strip("{}").split(",")) if s != "{}" else 0 for s in devs}
        skipped = [r for r in report.skipped if r.name == "secrecy"]
        oracle = "sparse cross-check ran" if not report.skipped else "sparse cross-check skipped (too many terms)"
        ok.append(
            acceptance.check(
                5,
                f"secrecy {label}",
                report.passed and not skipped and sizes == set(range(spec.k)),
                f"{len(devs)} sets of size <= {spec.k - 1}, max relative deviation {max(devs.values()):.1e}; {oracle}",
            )
        )
    assert all(ok)


@pytest.mark.xfail(strict=True, reason="at q=7 parties {1,2,4} of the m=3 scheme cannot decode, so {3,5} learns about the secret")
def test_c5_secrecy_basic_scheme(acceptance):
    start = time.perf_counter()
    report = check_secrecy(demo_spec("3-5-basic"), FIDELITY_TOL)
    acceptance.timed(5, time.perf_counter() - start)
    bad = {r.subject: r.measured for r in report.failures if r.name == "secrecy"}
    ok = acceptance.check(
        5,
        "secrecy m=3 universal",
        report.passed,
        "all sets independent" if not bad else "leaking: " + ", ".join(f"{s} (deviation {v:.2f})" for s, v in bad.items()),
    )
    assert ok


@pytest.mark.slow
def test_c5_mutations(acceptance):
    spec = demo_spec("3-5-universal")
    ok = []
    for kind in CANNED:
        start = time.perf_counter()
        report = verify_mutated(spec, kind)
        acceptance.timed(5, time.perf_counter() - start)
        failing = [c.name for c in report.checks if c.verdict == "fail"]
        ok.append(acceptance.check(5, f"mutation {kind}", bool(failing), "caught by " + ", ".join(failing) if failing else "not caught"))
    total = acceptance.elapsed[5]
    ok.append(acceptance.check(5, "runtime", total < 600, f"{total:.1f}s < 600s"))
    assert all(ok)


def verify_mutated(spec, kind):
    return verifier.verify_scheme(spec, mutation=Mutation.parse(kind))


def _layer_one_deviation(spec, ramp, layer_one):
    enc, ramp_enc = build_encoding(spec), build_encoding(ramp)
    worst = 0.0
    secrets = [SparseState.basis(spec.q, s) for s in itertools.product(range(spec.q), repeat=spec.m)]
    secrets.append(superpose(secrets[1:3], [1, 1j]))
    for secret in secrets:
        full = partial_trace(realize(enc, secret, "coset"), layer_one)
        alone = partial_trace(realize(ramp_enc, secret, "coset"), list(range(ramp.n)))
        worst = max(worst, reduced_deviation(full, alone))
    return worst


def test_c6_concatenation(acceptance):
    start = time.perf_counter()
    ok = []
    for name in ("concat-fixed-2-3-3", "concat-universal-2-3"):
        spec = demo_spec(name)
        layout = build_encoding(spec).layout
        shares = [layout.share_size(p) for p in layout.party_ids]
        audit = audit_costs(spec)
        k, n = spec.k, spec.n
        if spec.variant == CONCAT_FIXED:
            m_expected = spec.d - k + 1
            top = spec.d
        else:
            m_expected = math.lcm(*range(1, n - k + 2))
            top = n
        expected = {d: (k * spec.m if d == k else d * spec.m // (d - k + 1)) for d in spec.admissible_d}
        layer_one = [layout.layer(p, 1)[0] for p in layout.party_ids]
        ramp = derive_params(RAMP, t=top, n=n, z=k - 1, q=spec.q, points=spec.points[: top + k - 1] if spec.variant == CONCAT_FIXED else spec.points[:n])
        dev = _layer_one_deviation(spec, ramp, layer_one)
        ok += [
            acceptance.check(6, f"{name} m", spec.m == m_expected, f"m = {spec.m}"),
            acceptance.check(6, f"{name} w_j = m", shares == [spec.m] * n, f"w = {shares}"),
            acceptance.check(6, f"{name} CC", audit.measured == expected, ", ".join(f"CC({d})={c}" for d, c in sorted(audit.measured.items()))),
            acceptance.check(6, f"{name} layer 1 vs standalone ramp", dev <= FIDELITY_TOL, f"max deviation {dev:.1e}"),
        ]
    acceptance.timed(6, time.perf_counter() - start)
    assert all(ok)


def test_c7_information_model(acceptance):
    ok = []
    for label, spec in (("((2,3)) q=3", derive_params(QTS, k=2, n=3)), ("ConcatFixed (2,3,3) q=5", demo_spec("concat-fixed-2-3-3"))):
        start = time.perf_counter()
        report = entropy_model_check(spec, ENTROPY_TOL)
        acceptance.timed(7, time.perf_counter() - start)
        by_name = {}
        for r in report.records:
            by_name.setdefault(r.name, []).append(r)
        names = ("authorized-information", "unauthorized-information", "partial-share-information", "share-entropy")
        counts = {n: len(by_name.get(n, [])) for n in names}
        info = report.info
        ok.append(
            acceptance.check(
                7,
                label,
                report.passed and not report.skipped and all(counts.values()),
                f"I(R:S)={info['reference_information']:.9f}, authorized {counts[names[0]]}, unauthorized {counts[names[1]]}, "
                f"transcripts {counts[names[2]]}, shares {counts[names[3]]}; tol {ENTROPY_TOL:g}",
            )
        )
    total = acceptance.elapsed[7]
    ok.append(acceptance.check(7, "runtime", total < 60, f"{total:.1f}s < 60s"))
    assert all(ok)


EQUIVALENCE_SCHEMES = [
    derive_params(QTS, k=2, n=3),
    derive_params(QTS, k=3, n=5),
    derive_params(RAMP, t=3, n=4, z=1),
    derive_params(FIXED, k=2, n=3, d=3),
    derive_params(UNIVERSAL, k=2, n=3),
    demo_spec("concat-fixed-2-3-3"),
    demo_spec("concat-universal-2-3"),
    derive_params(CONCAT_FIXED, k=3, n=5, d=4),
    demo_spec("3-5-basic"),
    demo_spec("3-5-fixed"),
    demo_spec("3-5-universal"),
]


@pytest.mark.slow
def test_c8_backend_equivalence(acceptance):
    ok, ran, skipped = [], 0, []
    for spec in EQUIVALENCE_SCHEMES:
        start = time.perf_counter()
        report = check_backend_equivalence(spec, FIDELITY_TOL)
        acceptance.timed(8, time.perf_counter() - start)
        label = f"{spec.variant} k={spec.k} n={spec.n} q={spec.q}"
        if report.verdict == "skip":
            skipped.append(label)
            continue
        ran += 1
        worst = max((r.measured for r in report.records if r.verdict == "pass"), default=0.0)
        ok.append(acceptance.check(8, label, report.passed, f"{len(report.records)} comparisons, worst {worst:.1e}"))
    acceptance.check(8, "instances above 2^20 terms", True, "skipped: " + ", ".join(skipped))
    assert ran >= len(EQUIVALENCE_SCHEMES) - 1 and all(ok)


LAYOUT_SCHEMES = [demo_spec(name) for name in sorted(DEMOS)] + [
    derive_params(QTS, k=3, n=5),
    derive_params(FIXED, k=2, n=3, d=3),
    derive_params(FIXED, k=3, n=5, d=4),
    derive_params(FIXED, k=4, n=7, d=6),
    derive_params(UNIVERSAL, k=2, n=3),
    derive_params(UNIVERSAL, k=3, n=5, q=17),
    derive_params(CONCAT_FIXED, k=3, n=5, d=4),
    derive_params(CONCAT_UNIVERSAL, k=3, n=5),
]


def test_c9_layout_download_property(acceptance):
    start = time.perf_counter()
    checked = violations = 0
    for spec in LAYOUT_SCHEMES:
        layout = build_encoding(spec).layout
        k_eff = spec.secrecy_bound + 1
        for d in spec.admissible_d:
            for D in itertools.combinations(range(1, spec.n + 1), d):
                held = {p: len(set(idx) & set(layout.qudits(p))) for p, idx in communicated_qudits(spec, D).items()}
                for F in itertools.combinations(D, d - k_eff + 1):
                    checked += 1
                    # q^(sum |H_j|) >= q^m, compared on exact integers
                    violations += spec.q ** sum(held[p] for p in F) < spec.q**spec.m
        audit = audit_costs(spec)
        violations += audit.info["subset_violations"]
    elapsed = acceptance.timed(9, time.perf_counter() - start)
    ok = acceptance.check(
        9,
        f"{len(LAYOUT_SCHEMES)} schemes",
        checked > 0 and violations == 0,
        f"{checked} (D, F) pairs, {violations} violations, counted twice (direct and cost audit); {elapsed:.1f}s",
    )
    assert ok
