import itertools

import numpy as np
import pytest

from ceqts.engine import SparseState, fidelity, partial_trace, superpose
from ceqts.errors import AccessStructureViolation, BadParameters, ScheduleError, UnsupportedD
from ceqts.field import submatrix, vandermonde
from ceqts.recovery import (
    CtrlAdd,
    GateSchedule,
    LinearMap,
    communicated_qudits,
    communication_cost,
    execute,
    plan_recovery,
    recover,
)
from ceqts.reports import demo_spec
from ceqts.schemes import BASIC, CONCAT_FIXED, CONCAT_UNIVERSAL, FIXED, QTS, RAMP, UNIVERSAL, build_encoding, derive_params, encode, realize
from ceqts.verifier import download_audit


def steps_of(schedule):
    """(kind, qudits, payload) triples, payload = matrix rows or alpha."""
    out = []
    for s in schedule.steps:
        if isinstance(s, LinearMap):
            out.append(("K", list(s.indices), s.matrix.tolist()))
        elif isinstance(s, CtrlAdd):
            out.append(("L", [s.control, s.target], s.alpha))
        else:
            out.append(("P", list(s.permutation), None))
    return out


def is_inverse(K, M, q):
    return (np.array(K) @ np.array(M) % q == np.eye(len(K), dtype=int)).all()


def recovers(spec, D, backend="coset"):
    rng = np.random.default_rng(0)
    words = [tuple(int(x) for x in rng.integers(0, spec.q, size=spec.m)) for _ in range(2)]
    secrets = [SparseState.basis(spec.q, w) for w in words]
    if words[0] != words[1]:
        secrets.append(superpose(secrets, [1, 1j]))
    enc = build_encoding(spec)
    schedule = plan_recovery(spec, D)
    worst = 1.0
    for secret in secrets:
        t = execute(schedule, realize(enc, secret, backend), enc.layout)
        worst = min(worst, fidelity(partial_trace(t.state, t.secret_out), secret))
    return worst


def test_fixed_k_equals_3_schedule():
    # fixed ((3,5,5)) from D = {1,2,3}: two column inversions, six controlled adds,
    # the first-column inversion, then three disentangling maps
    spec = demo_spec("3-5-fixed")
    V = vandermonde([1, 2, 3, 4, 5], 5, 7)
    sched = plan_recovery(spec, [1, 2, 3])
    inv_tail = [[3, 1, 4], [1, 1, 1], [4, 5, 2]]
    assert is_inverse(inv_tail, submatrix(V, [1, 2, 3], [3, 4, 5]).tolist(), 7)
    assert steps_of(sched) == [
        ("K", [2, 5, 8], inv_tail),
        ("K", [1, 4, 7], inv_tail),
        ("L", [2, 0], 6),
        ("L", [2, 3], 5),
        ("L", [2, 6], 3),
        ("L", [1, 0], 6),
        ("L", [1, 3], 6),
        ("L", [1, 6], 1),
        ("K", [0, 3, 6], [[3, 4, 1], [1, 4, 2], [4, 6, 4]]),
        ("K", [2, 5, 8], [[1, 0, 0], [2, 1, 4], [4, 6, 2]]),
        ("K", [1, 4, 7], [[1, 0, 0], [2, 1, 4], [4, 6, 2]]),
        ("K", [0, 3, 6, 1, 2], [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [1, 4, 2, 1, 4], [1, 5, 4, 6, 2]]),
    ]
    assert sched.cost == 9 and sched.secret_out == (0, 3, 6)
    assert recovers(spec, [1, 2, 3], "sparse") >= 1 - 1e-9


def test_fixed_all_parties_schedule():
    spec = demo_spec("3-5-fixed")
    sched = plan_recovery(spec, [1, 2, 3, 4, 5])
    (kind, idx, K), = steps_of(sched)
    assert kind == "K" and idx == [0, 3, 6, 9, 12]
    assert is_inverse(K, vandermonde([1, 2, 3, 4, 5], 5, 7).tolist(), 7)
    assert sched.cost == 5


def test_basic_scheme_d4_schedule():
    spec = demo_spec("3-5-basic")
    V = vandermonde([1, 2, 3, 4, 5], 5, 7)
    got = steps_of(plan_recovery(spec, [1, 2, 3, 4]))
    assert got[0][1] == [1, 4, 7, 10]
    assert is_inverse(got[0][2], submatrix(V, [1, 2, 3, 4], [2, 3, 4, 5]).tolist(), 7)
    assert got[1:5] == [("L", [4, 0], 6), ("L", [4, 3], 5), ("L", [4, 6], 3), ("L", [4, 9], 3)]
    assert is_inverse(got[5][2], submatrix(V, [1, 2, 3, 4], [1, 2, 3, 4]).tolist(), 7)
    assert got[6] == ("K", [1, 4, 7, 10], [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [5, 4, 6, 2]])
    assert got[7] == (
        "K",
        [0, 3, 6, 9, 4],
        [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 1, 0], [1, 5, 4, 6, 2]],
    )
    assert recovers(spec, [1, 2, 3, 4], "sparse") >= 1 - 1e-9


def test_basic_scheme_d3_schedule():
    spec = demo_spec("3-5-basic")
    assert steps_of(plan_recovery(spec, [1, 2, 3])) == [
        ("K", [2, 5, 8], [[3, 1, 4], [1, 1, 1], [4, 5, 2]]),
        ("L", [2, 1], 6),
        ("L", [2, 4], 6),
        ("L", [2, 7], 1),
        ("K", [1, 4, 7], [[6, 6, 6], [6, 4, 0], [3, 4, 1]]),
        ("K", [0, 3, 6, 1, 4], [[3, 4, 1, 1, 6], [1, 4, 2, 4, 4], [4, 6, 4, 1, 3], [0, 0, 0, 1, 0], [0, 0, 0, 0, 1]]),
        ("K", [2, 5, 8], [[1, 0, 0], [2, 1, 4], [4, 6, 2]]),
        ("K", [1, 4, 2, 7], [[1, 0, 0, 0], [0, 1, 0, 0], [4, 2, 1, 4], [5, 4, 6, 2]]),
        ("K", [0, 3, 6, 1, 4], [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [1, 4, 2, 1, 4], [1, 5, 4, 6, 2]]),
    ]
    assert recovers(spec, [1, 2, 3], "sparse") >= 1 - 1e-9


def _plannable(spec, D):
    try:
        plan_recovery(spec, D)
        return True
    except ScheduleError:
        return False


@pytest.mark.parametrize("variant", [UNIVERSAL, BASIC])
@pytest.mark.parametrize("q", [7, 11, 13, 17])
def test_planner_agrees_with_rank_audit(variant, q):
    spec = derive_params(variant, k=3, n=5, q=q)
    enc = build_encoding(spec)
    for d in spec.admissible_d:
        for D in itertools.combinations(range(1, 6), d):
            rows = [i for idx in communicated_qudits(spec, D).values() for i in idx]
            assert _plannable(spec, D) == download_audit(enc, rows)["decodable"], D


def test_undecodable_sets_at_q7():
    for name, bad in (("3-5-universal", {(2, 3, 4, 5)}), ("3-5-basic", {(1, 2, 4)})):
        spec = demo_spec(name)
        failing = {D for d in spec.admissible_d for D in itertools.combinations(range(1, 6), d) if not _plannable(spec, D)}
        assert failing == bad, name
    with pytest.raises(ScheduleError, match="singular mod 7"):
        plan_recovery(demo_spec("3-5-universal"), [2, 3, 4, 5])


def test_basic_scheme_set_124_fails_even_with_full_shares():
    spec = demo_spec("3-5-basic")
    enc = build_encoding(spec)
    audit = download_audit(enc, enc.layout.qudits_of([1, 2, 4]))
    assert audit["determined"] < spec.m
    assert download_audit(build_encoding(derive_params(BASIC, k=3, n=5, q=13)), enc.layout.qudits_of([1, 2, 4]))["decodable"]


@pytest.mark.parametrize(
    "spec",
    [
        derive_params(QTS, k=2, n=3),
        derive_params(QTS, k=3, n=5),
        derive_params(RAMP, t=3, n=4, z=1),
        derive_params(RAMP, t=2, n=3, z=1),
        derive_params(FIXED, k=2, n=3, d=3),
        derive_params(CONCAT_FIXED, k=2, n=3, d=3),
        derive_params(CONCAT_UNIVERSAL, k=2, n=3),
        derive_params(CONCAT_FIXED, k=3, n=5, d=4),
        derive_params(UNIVERSAL, k=3, n=5, q=17),
        derive_params(BASIC, k=3, n=5, q=13),
    ],
    ids=lambda s: f"{s.variant}-{s.q}",
)
def test_every_set_recovers(spec):
    for d in spec.admissible_d:
        for D in itertools.combinations(range(1, spec.n + 1), d):
            sched = plan_recovery(spec, D)
            assert sched.communicated == communicated_qudits(spec, D)
            assert sched.cost == communication_cost(spec, d) == spec.cost_formula(d)
            assert recovers(spec, D) >= 1 - 1e-9, D


def test_universal_per_party_download():
    spec = demo_spec("3-5-universal")
    for d, a in zip((5, 4, 3), (2, 3, 6)):
        D = tuple(range(1, d + 1))
        assert set(len(v) for v in communicated_qudits(spec, D).values()) == {a}
    assert [communication_cost(spec, d) for d in (3, 4, 5)] == [18, 12, 10]


def test_access_errors():
    spec = demo_spec("3-5-fixed")
    with pytest.raises(AccessStructureViolation):
        plan_recovery(spec, [1, 2])
    with pytest.raises(UnsupportedD):
        plan_recovery(spec, [1, 2, 3, 4])
    with pytest.raises(BadParameters):
        plan_recovery(spec, [1, 2, 6])


def test_execute_rejects_uncommunicated_qudits():
    spec = derive_params(QTS, k=2, n=3)
    sched = plan_recovery(spec, [1, 2])
    state, layout = encode(spec, SparseState.basis(3, [1]))
    rogue = GateSchedule(spec, sched.D, sched.steps + (CtrlAdd(1, 2, 0),), sched.communicated, sched.secret_out)
    with pytest.raises(ScheduleError, match="never sent"):
        execute(rogue, state, layout)
    lying = GateSchedule(spec, sched.D, sched.steps, {1: (0,), 2: (2,)}, sched.secret_out)
    with pytest.raises(ScheduleError, match="does not hold"):
        execute(lying, state, layout)


def test_recover_wrapper():
    spec = derive_params(QTS, k=2, n=3)
    secret = superpose([SparseState.basis(3, [0]), SparseState.basis(3, [2])], [1, -1j])
    state, layout = encode(spec, secret)
    rho, transcript = recover(spec, state, layout, [1, 3])
    assert fidelity(rho, secret) == pytest.approx(1.0, abs=1e-12)
    assert transcript.cost == 2 and transcript.qudits_received == {1: 1, 3: 1}


def test_schedule_dump_names_gates():
    text = plan_recovery(demo_spec("3-5-basic"), [1, 2, 3]).dump()
    assert text.count("LinearMap") == 6 and text.count("CtrlAdd") == 3
    assert "inverse of V_D" in text and "secret_out: [0, 3, 6]" in text
