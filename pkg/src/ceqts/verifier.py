"""Numerical certification of a scheme: recoverability, secrecy, communication
cost, the entropy model, and agreement of the two state backends.

Every check returns a report made of flat records, one per (check, subject),
each with a measured value, the expected value, a tolerance and a verdict.
Capacity limits turn into "skip" records with the reason; they never pass
silently and never abort the run.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__, budget
from .engine import (
    CosetDensity,
    SparseState,
    fidelity,
    max_difference,
    partial_trace,
    reduced_deviation,
    superpose,
    to_sparse,
    von_neumann_entropy,
)
from .errors import CapacityExceeded, CeqtsError, ScheduleError
from .field import FMatrix, rank
from .mutations import Mutation
from .recovery import communicated_qudits, execute, plan_recovery
from .schemes.encoding import LinearEncoding, build_encoding, encode_with_reference, realize
from .schemes.spec import BASIC, CONCAT_UNIVERSAL, UNIVERSAL, SchemeSpec

FIDELITY_TOL = 1e-9
ENTROPY_TOL = 1e-7
EXHAUSTIVE_LIMIT = 64  # subsets enumerated exhaustively up to this many
SAMPLE_COUNT = 32
EQUIVALENCE_TERMS = 2**20  # both backends run when the sparse state fits here
UNIVERSAL_VARIANTS = (UNIVERSAL, BASIC, CONCAT_UNIVERSAL)


@dataclass
class Record:
    name: str
    subject: str
    measured: Any
    expected: Any
    tolerance: Optional[float]
    verdict: str  # "pass" | "fail" | "skip"
    skipped_reason: Optional[str] = None
    diagnostic: Optional[str] = None

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "subject": self.subject,
            "measured": _plain(self.measured),
            "expected": _plain(self.expected),
            "tolerance": self.tolerance,
            "verdict": self.verdict,
        }
        if self.skipped_reason is not None:
            out["skipped_reason"] = self.skipped_reason
        if self.diagnostic is not None:
            out["diagnostic"] = self.diagnostic
        return out


def _plain(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


@dataclass
class CheckReport:
    name: str
    records: list[Record] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, subject: str, measured, expected, tolerance: Optional[float], ok: bool, diagnostic: Optional[str] = None, name: Optional[str] = None) -> Record:
        rec = Record(name or self.name, subject, measured, expected, tolerance, "pass" if ok else "fail", diagnostic=diagnostic)
        self.records.append(rec)
        return rec

    def skip(self, subject: str, reason: str, name: Optional[str] = None) -> Record:
        rec = Record(name or self.name, subject, None, None, None, "skip", skipped_reason=reason)
        self.records.append(rec)
        return rec

    @property
    def failures(self) -> list[Record]:
        return [r for r in self.records if r.verdict == "fail"]

    @property
    def skipped(self) -> list[Record]:
        return [r for r in self.records if r.verdict == "skip"]

    @property
    def verdict(self) -> str:
        if self.failures:
            return "fail"
        if any(r.verdict == "pass" for r in self.records):
            return "pass"
        return "skip"

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "info": _plain(self.info),
            "records": [r.to_dict() for r in self.records],
        }


class RecoverabilityReport(CheckReport):
    def fidelities(self) -> dict[str, float]:
        return {r.subject: r.measured for r in self.records if r.name == "recoverability" and r.verdict != "skip"}


class SecrecyReport(CheckReport):
    def deviations(self) -> dict[str, float]:
        """Largest relative deviation of the reduced operator per tested set."""
        return {r.subject: r.measured for r in self.records if r.name == "secrecy" and r.verdict != "skip"}


class CostAudit(CheckReport):
    @property
    def measured(self) -> dict[int, int]:
        return self.info.get("measured", {})

    @property
    def bound(self) -> dict[int, float]:
        return self.info.get("bound", {})

    @property
    def flags(self) -> list[str]:
        return self.info.get("flags", [])


class EntropyReport(CheckReport):
    pass


# ---------------------------------------------------------------- inputs


def _subject(parties: Sequence[int]) -> str:
    return "{" + ",".join(map(str, parties)) + "}"


def _index_words(indices: Sequence[int], q: int, m: int) -> np.ndarray:
    out = np.zeros((len(indices), m), dtype=np.int64)
    for i, x in enumerate(indices):
        for j in range(m - 1, -1, -1):
            out[i, j] = x % q
            x //= q
    return out


def _sample_words(q: int, m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    total = q**m
    if total <= count:
        return _index_words(range(total), q, m)
    if total >= 2**62:
        # too many words to index; duplicates are vanishingly rare but still dropped
        seen: dict[tuple[int, ...], None] = {}
        while len(seen) < count:
            seen.setdefault(tuple(int(x) for x in rng.integers(0, q, size=m)), None)
        return np.array(sorted(seen), dtype=np.int64)
    picked = rng.choice(total, size=count, replace=False)
    return _index_words(sorted(int(x) for x in picked), q, m)


def random_secret(q: int, m: int, rng: np.random.Generator, support: int = 8) -> SparseState:
    """A random pure secret on `support` seeded basis words with Gaussian amplitudes."""
    words = _sample_words(q, m, support, rng)
    amps = rng.normal(size=len(words)) + 1j * rng.normal(size=len(words))
    return SparseState(q, m, words, amps / np.linalg.norm(amps))


def _basis(q: int, word) -> SparseState:
    return SparseState.basis(q, [int(x) for x in word])


def recovery_inputs(spec: SchemeSpec, rng: np.random.Generator, support: int) -> list[tuple[str, SparseState]]:
    """Three basis secrets, (|s>+|s'>)/sqrt2 and (|s>+i|s'>)/sqrt2, and five random states."""
    q, m = spec.q, spec.m
    words = _sample_words(q, m, 3, rng)
    inputs = [(f"basis {list(map(int, w))}", _basis(q, w)) for w in words]
    a, b = _basis(q, words[0]), _basis(q, words[-1])
    inputs.append(("pair +", superpose([a, b], [1, 1])))
    inputs.append(("pair +i", superpose([a, b], [1, 1j])))
    inputs.extend((f"random #{i + 1}", random_secret(q, m, rng, support)) for i in range(5))
    return inputs


def secrecy_family(spec: SchemeSpec, rng: np.random.Generator, support: int = 8) -> tuple[list[tuple[str, SparseState]], str]:
    """Basis secrets, both phases of every pair, and five random states.

    Exhaustive when there are at most 16 basis words; otherwise 16 seeded basis
    words and 16 seeded pairs per phase."""
    q, m = spec.q, spec.m
    words = _sample_words(q, m, 16, rng)
    basis = [_basis(q, w) for w in words]
    family = [(f"basis {list(map(int, w))}", s) for w, s in zip(words, basis)]
    pairs = list(itertools.combinations(range(len(basis)), 2))
    exhaustive = q**m <= 16 and len(pairs) <= EXHAUSTIVE_LIMIT
    if not exhaustive and len(pairs) > 16:
        pairs = [pairs[i] for i in sorted(rng.choice(len(pairs), size=16, replace=False))]
    for i, j in pairs:
        family.append((f"pair + {i},{j}", superpose([basis[i], basis[j]], [1, 1])))
        family.append((f"pair +i {i},{j}", superpose([basis[i], basis[j]], [1, 1j])))
    family.extend((f"random #{i + 1}", random_secret(q, m, rng, support)) for i in range(5))
    kind = "exhaustive spanning family" if exhaustive else "seeded sample of the spanning family"
    return family, f"{kind}: {len(basis)} basis, {2 * len(pairs)} pairs, 5 random"


def access_sets(n: int, size: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    sets = list(itertools.combinations(range(1, n + 1), size))
    if len(sets) <= EXHAUSTIVE_LIMIT:
        return sets
    return [sets[i] for i in sorted(rng.choice(len(sets), size=SAMPLE_COUNT, replace=False))]


def _sparse_terms(enc: LinearEncoding, support: int = 1) -> int:
    return support * enc.spec.q**enc.n_random


def choose_backend(enc: LinearEncoding, backend: str = "auto", support: int = 8) -> str:
    if backend != "auto":
        return backend
    return "sparse" if _sparse_terms(enc, support) <= EQUIVALENCE_TERMS else "coset"


# ---------------------------------------------------------------- rank audit


def _maps(enc: LinearEncoding) -> tuple[np.ndarray, np.ndarray]:
    A, B = enc.secret_map, enc.random_map
    if enc.appended.size:
        A = np.concatenate([A, enc.appended])
        B = np.concatenate([B, np.zeros((len(enc.appended), B.shape[1]), dtype=np.int64)])
    return A, B


def _info_rank(A: np.ndarray, B: np.ndarray, rows: Sequence[int], q: int) -> int:
    """Dimension of what the coordinates `rows` reveal about s."""
    rows = list(rows)
    if not rows:
        return 0
    joint = rank(FMatrix(np.concatenate([A[rows], B[rows]], axis=1), q))
    return joint - (rank(FMatrix(B[rows], q)) if B.shape[1] else 0)


def download_audit(enc: LinearEncoding, rows: Sequence[int]) -> dict:
    """Classical view of quantum recoverability from the qudits `rows`: the
    downloaded coordinates must determine s and the rest must reveal nothing
    about it.  Uses only the encoding maps, never a recovery schedule."""
    A, B = _maps(enc)
    q, m = enc.spec.q, enc.spec.m
    rest = [i for i in range(A.shape[0]) if i not in set(rows)]
    seen = _info_rank(A, B, rows, q)
    leaked = _info_rank(A, B, rest, q)
    return {"determined": seen, "secret_size": m, "leaked_elsewhere": leaked, "decodable": seen == m and leaked == 0}


# ---------------------------------------------------------------- recoverability


def reference_fidelity(rho, m: int, q: int) -> float:
    """Overlap of a 2m-qudit reduced operator with q^(-m/2) sum_s |s>|s>."""
    if isinstance(rho, CosetDensity):
        basis = np.concatenate([np.eye(m, dtype=np.int64), np.eye(m, dtype=np.int64)], axis=1)
        return rho.fidelity_coset(np.zeros(2 * m, dtype=np.int64), basis)
    words = _index_words(range(q**m), q, m)
    phi = SparseState(q, 2 * m, np.concatenate([words, words], axis=1), np.full(len(words), q ** (-m / 2)))
    return fidelity(rho, phi)


def check_recoverability(
    spec: SchemeSpec,
    tolerance: float = FIDELITY_TOL,
    mutation: Optional[Mutation] = None,
    seed: int = 0,
    backend: str = "auto",
    reference_limit: int = 4096,
) -> RecoverabilityReport:
    """Fidelity of the recovered secret for every admissible d and accessed set.

    Inputs are basis secrets, both phases of a pair, and random states, plus
    (when q^m <= reference_limit or on the coset backend) a maximally
    entangled reference whose joint state with the output must be restored.
    """
    rng = np.random.default_rng(seed)
    report = RecoverabilityReport("recoverability")
    enc = mutation.encoding(spec) if mutation else build_encoding(spec)
    plan_spec = mutation.planning_spec(spec) if mutation else spec
    backend = choose_backend(enc, backend)
    support = 8 if backend == "coset" else 4
    report.info.update(backend=backend, seed=seed, random_support=support)
    inputs = recovery_inputs(spec, rng, support)
    states = []
    for label, secret in inputs:
        try:
            states.append((label, secret, realize(enc, secret, backend)))
        except CapacityExceeded as exc:
            report.skip("encoding " + label, str(exc))
    reference = None
    small = spec.q**spec.m <= reference_limit and _sparse_terms(enc, spec.q**spec.m) <= budget.current().terms
    if backend == "coset" or small:
        reference = encode_with_reference(enc, backend)
    tested = []
    for d in spec.admissible_d:
        for D in access_sets(spec.n, d, rng):
            tested.append(D)
            subject = f"d={d} D={_subject(D)}"
            try:
                schedule = plan_recovery(plan_spec, D)
            except (ScheduleError, CeqtsError) as exc:
                rows = [i for idx in communicated_qudits(spec, D).values() for i in idx]
                audit = download_audit(enc, rows)
                why = "decodable in principle, so the planner is at fault" if audit["decodable"] else (
                    f"the downloaded qudits determine {audit['determined']} of {audit['secret_size']} secret symbols"
                    if audit["determined"] < audit["secret_size"]
                    else f"the other qudits reveal {audit['leaked_elsewhere']} secret symbols"
                )
                report.add(subject, None, 1.0, tolerance, False, diagnostic=f"no schedule: {exc}; rank audit: {why}")
                continue
            if mutation:
                schedule = mutation.schedule(schedule)
            worst, worst_label, error, ran = 1.0, None, None, 0
            for label, secret, state in states:
                try:
                    transcript = execute(schedule, state, enc.layout)
                    f = fidelity(partial_trace(transcript.state, transcript.secret_out), secret)
                except CapacityExceeded as exc:
                    report.skip(f"{subject} {label}", str(exc))
                    continue
                except CeqtsError as exc:
                    error = str(exc)
                    worst, worst_label = 0.0, label
                    break
                ran += 1
                if f < worst:
                    worst, worst_label = f, label
            if error is None and not ran:
                report.skip(subject, "no input state fits the budget")
            else:
                diag = error or (f"worst input: {worst_label}" if worst < 1 - tolerance else None)
                report.add(subject, worst, 1.0, tolerance, worst >= 1 - tolerance and error is None, diagnostic=diag)
            if reference is not None and error is None:
                state, layout = reference
                try:
                    transcript = execute(schedule, state, None)
                    rho = partial_trace(transcript.state, list(transcript.secret_out) + list(layout.reference))
                    f = reference_fidelity(rho, spec.m, spec.q)
                    report.add(subject, f, 1.0, tolerance, f >= 1 - tolerance, name="entangled-reference")
                except CapacityExceeded as exc:
                    report.skip(subject, str(exc), name="entangled-reference")
    report.info["sets"] = [list(D) for D in tested]
    return report


# ---------------------------------------------------------------- secrecy


def unauthorized_sets(spec: SchemeSpec) -> list[tuple[int, ...]]:
    """Every set of the maximal unauthorized size, plus singletons and the empty set."""
    bound = spec.secrecy_bound
    sets: list[tuple[int, ...]] = [()]
    if bound > 1:
        sets += [(p,) for p in range(1, spec.n + 1)]
    sets += list(itertools.combinations(range(1, spec.n + 1), bound))
    return sets


def check_secrecy(
    spec: SchemeSpec,
    tolerance: float = FIDELITY_TOL,
    mutation: Optional[Mutation] = None,
    seed: int = 0,
    sets: Optional[Sequence[Sequence[int]]] = None,
) -> SecrecyReport:
    """Reduced operators of unauthorized sets must not depend on the secret.

    Reductions are computed on the coset backend and compared relative to the
    operator scale; the sparse oracle re-derives a basis and a pair input per
    set wherever it fits."""
    rng = np.random.default_rng(seed)
    report = SecrecyReport("secrecy")
    enc = mutation.encoding(spec) if mutation else build_encoding(spec)
    family, description = secrecy_family(spec, rng)
    report.info.update(family=description, seed=seed, metric="max|rho - rho_ref| / max|rho_ref|")
    sets = [tuple(B) for B in sets] if sets is not None else unauthorized_sets(spec)
    states = [(label, realize(enc, secret, "coset")) for label, secret in family]
    oracle_fits = _sparse_terms(enc, 2) <= budget.current().terms
    picks = [family[0]] + [f for f in family if f[0].startswith("pair +i")][:1]
    oracle = [(label, realize(enc, secret, "sparse")) for label, secret in picks] if oracle_fits else []
    for B in sets:
        subject = _subject(B)
        if not B:
            report.add(subject, 0.0, 0.0, tolerance, True, diagnostic="empty set: the reduced operator is the scalar 1")
            continue
        keep = enc.layout.qudits_of(B)
        try:
            ref = partial_trace(states[0][1], keep)
            worst, worst_label = 0.0, None
            for label, state in states[1:]:
                dev = reduced_deviation(partial_trace(state, keep), ref, relative=True)
                if dev > worst:
                    worst, worst_label = dev, label
        except CapacityExceeded as exc:
            report.skip(subject, str(exc))
            continue
        diag = f"largest against {states[0][0]}: {worst_label}" if worst > tolerance else None
        report.add(subject, worst, 0.0, tolerance, worst <= tolerance, diagnostic=diag)
        for label, sparse_state in oracle:
            coset_state = dict(states)[label]
            try:
                dev = reduced_deviation(partial_trace(sparse_state, keep), partial_trace(coset_state, keep), relative=True)
            except CapacityExceeded as exc:
                report.skip(f"{subject} {label}", str(exc), name="secrecy-oracle")
                continue
            report.add(f"{subject} {label}", dev, 0.0, tolerance, dev <= tolerance, name="secrecy-oracle")
    if not oracle_fits:
        report.skip("sparse oracle", f"sparse encoding needs {_sparse_terms(enc, 2)} terms", name="secrecy-oracle")
    return report


# ---------------------------------------------------------------- costs


def _held(layout, p: int, qudits: Sequence[int]) -> int:
    owned = set(layout.qudits(p)) if p in layout.parties else set()
    return sum(1 for i in qudits if i in owned)


def audit_costs(spec: SchemeSpec, mutation: Optional[Mutation] = None) -> CostAudit:
    """Measured CC_n(d) against d*m/(d-k+1), the strict chain for universal
    variants, and the per-subset download property.

    The subset property asks that any d-(z+1)+1 parties of an accessed set D
    send at least m qudits, where z is the largest unauthorized size (k-1 for
    perfect schemes)."""
    report = CostAudit("cost")
    enc = mutation.encoding(spec) if mutation else build_encoding(spec)
    layout = enc.layout
    k_eff, m = spec.secrecy_bound + 1, spec.m
    measured: dict[int, int] = {}
    bound: dict[int, float] = {}
    per_party: dict[int, list[int]] = {}
    flags: list[str] = []
    violations = checked = 0
    for d in spec.admissible_d:
        costs, sends = set(), set()
        for D in itertools.combinations(range(1, spec.n + 1), d):
            comm = communicated_qudits(spec, D)
            H = {p: _held(layout, p, idx) for p, idx in comm.items()}
            costs.add(sum(len(idx) for idx in comm.values()))
            sends.update(H.values())
            for F in itertools.combinations(D, d - k_eff + 1):
                checked += 1
                total = sum(H[p] for p in F)
                if total < m:
                    violations += 1
                    if violations <= 5:
                        report.add(f"d={d} D={_subject(D)} F={_subject(F)}", total, m, 0, False, name="subset-download")
        cc = max(costs)
        measured[d], bound[d] = cc, spec.lower_bound(d, k_eff, m)
        per_party[d] = sorted(sends)
        report.add(f"d={d}", sorted(costs), [cc], 0, len(costs) == 1, name="cost-independent-of-D")
        report.add(f"d={d}", cc, bound[d], 0, cc >= bound[d] - 1e-12, name="cost-bound")
        report.add(f"d={d}", cc, spec.cost_formula(d), 0, cc == spec.cost_formula(d), name="cost-formula")
        if cc > bound[d] + 1e-12:
            flags.append(f"suboptimal at d={d}: {cc} > {bound[d]:g}")
    report.add(f"{checked} (D, F) pairs", checked - violations, checked, 0, violations == 0, name="subset-download")
    ds = sorted(measured)
    if spec.variant in UNIVERSAL_VARIANTS and spec.n > spec.k:
        chain = all(measured[a] > measured[b] for a, b in zip(ds, ds[1:]))
        report.add("CC_n(d) strictly decreasing", [measured[d] for d in ds], "strict", None, chain, name="strict-chain")
    report.info.update(
        measured=measured,
        bound=bound,
        slack={d: measured[d] - bound[d] for d in ds},
        per_party=per_party,
        flags=flags,
        subset_pairs=checked,
        subset_violations=violations,
    )
    return report


# ---------------------------------------------------------------- entropy model


def _entropy_sizes_ok(enc: LinearEncoding) -> Optional[str]:
    q, m = enc.spec.q, enc.spec.m
    terms = q ** (enc.n_random + m)
    if terms > budget.current().terms:
        return f"reference-entangled state has {terms} terms"
    if terms > budget.current().dense**2:
        return f"reduced operators may need {terms} support words"
    return None


def entropy_model_check(spec: SchemeSpec, tolerance: float = ENTROPY_TOL, seed: int = 0, samples: int = 8) -> EntropyReport:
    """Entropies with the secret maximally entangled with a reference R.

    Every entropy is computed twice: by a dense eigensolve of the sparse
    reduction and from the coset structure."""
    report = EntropyReport("entropy")
    enc = build_encoding(spec)
    reason = _entropy_sizes_ok(enc)
    if reason:
        report.skip("entropy model", reason)
        return report
    sparse_state, layout = encode_with_reference(enc, "sparse")
    coset_state, _ = encode_with_reference(enc, "coset")
    R = list(layout.reference)
    cache: dict[tuple[int, ...], float] = {}

    def S(qudits: Sequence[int]) -> float:
        key = tuple(sorted(qudits))
        if not key:
            return 0.0
        if key not in cache:
            dense = von_neumann_entropy(partial_trace(sparse_state, key))
            coset = von_neumann_entropy(partial_trace(coset_state, key))
            if abs(dense - coset) > tolerance:
                report.add(f"qudits {list(key)}", dense, coset, tolerance, False, name="entropy-backends")
            cache[key] = dense
        return cache[key]

    def I(a: Sequence[int], b: Sequence[int]) -> float:
        return S(a) + S(b) - S(list(a) + list(b))

    parties = layout.party_ids
    shares = {p: layout.qudits(p) for p in parties}
    everything = list(range(layout.n_qudits))
    secret_entropy = S(R)
    reference_info = I(R, layout.qudits_of(parties))
    report.add("S(R)", secret_entropy, spec.m, tolerance, abs(secret_entropy - spec.m) <= tolerance, name="secret-entropy")
    report.add("I(R:S)", reference_info, 2 * secret_entropy, tolerance, abs(reference_info - 2 * secret_entropy) <= tolerance, name="reference-information")
    report.add("S(all)", S(everything), 0.0, tolerance, abs(S(everything)) <= tolerance, name="purity")
    authorized, unauthorized = {}, {}
    for size in range(0, spec.n + 1):
        for A in itertools.combinations(parties, size):
            if size >= spec.threshold:
                value = I(R, layout.qudits_of(A))
                authorized[_subject(A)] = value
                report.add(_subject(A), value, reference_info, tolerance, abs(value - reference_info) <= tolerance, name="authorized-information")
            elif size <= spec.secrecy_bound:
                value = I(R, layout.qudits_of(A)) if A else 0.0
                unauthorized[_subject(A)] = value
                report.add(_subject(A), value, 0.0, tolerance, abs(value) <= tolerance, name="unauthorized-information")
    partial = {}
    for d in spec.admissible_d:
        for D in itertools.combinations(range(1, spec.n + 1), d):
            H = [i for idx in communicated_qudits(spec, D).values() for i in idx]
            value = I(R, H)
            partial[f"d={d} D={_subject(D)}"] = value
            report.add(f"d={d} D={_subject(D)}", value, reference_info, tolerance, abs(value - reference_info) <= tolerance, name="partial-share-information")
    share_entropy = {}
    for p in parties:
        share_entropy[p] = S(shares[p])
        if spec.perfect:
            report.add(f"S_{p}", share_entropy[p], secret_entropy, tolerance, share_entropy[p] >= secret_entropy - tolerance, name="share-entropy")
    if not spec.perfect:
        report.skip("S_j >= S(secret)", "the share-size bound holds for perfect schemes only", name="share-entropy")
    rng = np.random.default_rng(seed)
    blocks = [R] + [shares[p] for p in parties] + ([list(layout.environment)] if layout.environment else [])
    pairs = [(a, b) for a in range(len(blocks)) for b in range(a + 1, len(blocks))]
    for a, b in [pairs[i] for i in sorted(rng.choice(len(pairs), size=min(samples, len(pairs)), replace=False))]:
        sa, sb, sab = S(blocks[a]), S(blocks[b]), S(blocks[a] + blocks[b])
        subject = f"blocks {a},{b}"
        report.add(subject, sab, sa + sb, tolerance, sab <= sa + sb + tolerance, name="subadditivity")
        report.add(subject, sab, abs(sa - sb), tolerance, sab >= abs(sa - sb) - tolerance, name="araki-lieb")
        for value in (sa, sb, sab):
            if not (-tolerance <= value <= len(blocks[a]) + len(blocks[b]) + tolerance):
                report.add(subject, value, "within [0, qudits]", tolerance, False, name="entropy-range")
    report.info.update(
        secret_entropy=secret_entropy,
        reference_information=reference_info,
        share_entropy=share_entropy,
        authorized=authorized,
        unauthorized=unauthorized,
        partial=partial,
    )
    return report


# ---------------------------------------------------------------- backend equivalence


def check_backend_equivalence(spec: SchemeSpec, tolerance: float = FIDELITY_TOL, seed: int = 0, limit: int = EQUIVALENCE_TERMS) -> CheckReport:
    """Run every schedule on both backends and compare after each step."""
    report = CheckReport("backend-equivalence")
    enc = build_encoding(spec)
    rng = np.random.default_rng(seed)
    secret = superpose([_basis(spec.q, w) for w in _sample_words(spec.q, spec.m, 2, rng)], [1, 1j])
    if _sparse_terms(enc, secret.terms) > limit:
        report.skip("all steps", f"sparse state would hold {_sparse_terms(enc, secret.terms)} terms, limit {limit}")
        return report
    sparse, coset = realize(enc, secret, "sparse"), realize(enc, secret, "coset")
    report.add("encoding", max_difference(sparse, to_sparse(coset)), 0.0, tolerance, max_difference(sparse, to_sparse(coset)) <= tolerance)
    for d in spec.admissible_d:
        for D in access_sets(spec.n, d, rng):
            try:
                schedule = plan_recovery(spec, D)
            except ScheduleError as exc:
                report.skip(f"D={_subject(D)}", f"no schedule: {exc}")
                continue
            trail: list = []
            execute(schedule, sparse, on_step=lambda i, s: trail.append(s))
            worst = 0.0

            def compare(i, state):
                nonlocal worst
                worst = max(worst, max_difference(trail[i], to_sparse(state)))

            transcript = execute(schedule, coset, on_step=compare)
            keep = list(transcript.secret_out)
            rho_dev = reduced_deviation(partial_trace(trail[-1] if trail else sparse, keep), partial_trace(transcript.state, keep))
            report.add(f"D={_subject(D)} states", worst, 0.0, tolerance, worst <= tolerance)
            report.add(f"D={_subject(D)} output operator", rho_dev, 0.0, tolerance, rho_dev <= tolerance)
    return report


# ---------------------------------------------------------------- combined


@dataclass
class VerificationReport:
    spec: SchemeSpec
    checks: list[CheckReport]
    seed: int
    mutation: Optional[str] = None
    wall_clock: float = 0.0

    @property
    def verdict(self) -> str:
        return "fail" if any(c.verdict == "fail" for c in self.checks) else "pass"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def check(self, name: str) -> CheckReport:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[Record]:
        return [r for c in self.checks for r in c.failures]

    def skipped(self) -> list[Record]:
        return [r for c in self.checks for r in c.skipped]

    def to_dict(self) -> dict:
        return {
            "tool_version": __version__,
            "spec": self.spec.to_dict(),
            "mutation": self.mutation,
            "seed": self.seed,
            "budgets": budget.current().as_dict(),
            "verdict": self.verdict,
            "checks": [c.to_dict() for c in self.checks],
            "wall_clock": self.wall_clock,
        }


def _guarded(name: str, fn, *args, **kwargs) -> CheckReport:
    try:
        return fn(*args, **kwargs)
    except CapacityExceeded as exc:
        report = CheckReport(name)
        report.skip(name, str(exc))
        return report


def verify_scheme(
    spec: SchemeSpec,
    mutation: Optional[Mutation] = None,
    seed: int = 0,
    tolerance: float = FIDELITY_TOL,
    entropy_tolerance: float = ENTROPY_TOL,
    backend: str = "auto",
) -> VerificationReport:
    """All checks with default tolerances; individual skips never raise."""
    start = time.perf_counter()
    checks = [
        _guarded("recoverability", check_recoverability, spec, tolerance, mutation=mutation, seed=seed, backend=backend),
        _guarded("secrecy", check_secrecy, spec, tolerance, mutation=mutation, seed=seed),
        _guarded("cost", audit_costs, spec, mutation=mutation),
    ]
    if mutation is None:
        checks.append(_guarded("entropy", entropy_model_check, spec, entropy_tolerance, seed=seed))
        checks.append(_guarded("backend-equivalence", check_backend_equivalence, spec, tolerance, seed=seed))
    return VerificationReport(spec, checks, seed, str(mutation) if mutation else None, time.perf_counter() - start)
