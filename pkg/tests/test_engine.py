import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ceqts import budget
from ceqts.engine import (
    CosetState,
    SparseState,
    fidelity,
    max_difference,
    overlap,
    partial_trace,
    reduced_deviation,
    state_from_secret,
    superpose,
    von_neumann_entropy,
)
from ceqts.errors import CapacityExceeded, ShapeError, SingularMatrix, ZeroState
from ceqts.field import FMatrix, mat_inv, rank


def dense_encoding(q, A, B, secret: dict) -> np.ndarray:
    """Brute-force sum_s alpha_s sum_r |A s + B r>, normalized."""
    n = A.shape[0]
    vec = np.zeros(q**n, dtype=complex)
    weights = q ** np.arange(n - 1, -1, -1)
    for s, alpha in secret.items():
        for r in itertools.product(range(q), repeat=B.shape[1]):
            word = (A @ np.array(s) + B @ np.array(r, dtype=np.int64)) % q
            vec[int(word @ weights)] += alpha
    return vec / np.linalg.norm(vec)


def test_basis_gates():
    psi = SparseState.basis(5, [1, 2, 3])
    psi = psi.apply_ctrl_add(2, control=0, target=2)
    assert psi.as_dict() == {(1, 2, 0): 1}
    psi = psi.apply_linear(FMatrix([[0, 1], [1, 0]], 5), [0, 1])
    assert psi.as_dict() == {(2, 1, 0): 1}
    psi = psi.apply_reorder([2, 0, 1])
    assert psi.as_dict() == {(0, 2, 1): 1}
    with pytest.raises(SingularMatrix):
        psi.apply_linear(FMatrix([[1, 1], [1, 1]], 5), [0, 1])
    with pytest.raises(ShapeError):
        psi.apply_linear(FMatrix([[1]], 7), [0])


def test_uniform_registers_and_trace():
    psi = SparseState.basis(3, [1]).attach_uniform_registers(1)
    assert psi.terms == 3
    psi = psi.apply_ctrl_add(1, control=1, target=0)  # sum_r |1+r>|r>: maximally entangled
    rho = partial_trace(psi, [0])
    assert np.allclose(rho.to_dense(), np.eye(3) / 3)
    assert von_neumann_entropy(rho) == pytest.approx(1.0, abs=1e-12)
    assert von_neumann_entropy(partial_trace(psi, [0, 1])) == pytest.approx(0.0, abs=1e-12)


def test_secret_construction():
    psi = state_from_secret({(0,): 1, (1,): 1j}, 3)
    assert psi.amplitude([1]) == pytest.approx(1j / math.sqrt(2))
    merged = state_from_secret([((0,), 1), ((0,), 1), ((2,), 0)], 3)
    assert merged.as_dict() == {(0,): pytest.approx(1.0)}
    with pytest.raises(ZeroState):
        state_from_secret([((1,), 1), ((1,), -1)], 3)
    with pytest.raises(ZeroState):
        superpose([SparseState.basis(3, [1]), SparseState.basis(3, [1])], [1, -1])


def test_overlap_and_fidelity():
    a = SparseState.basis(3, [0, 1])
    b = superpose([a, SparseState.basis(3, [2, 2])], [1, 1j])
    assert overlap(a, b) == pytest.approx(1 / math.sqrt(2))
    assert fidelity(partial_trace(b, [0, 1]), a) == pytest.approx(0.5)
    assert max_difference(a, a) == 0.0


def test_dump_is_sorted():
    psi = superpose([SparseState.basis(3, [2, 0]), SparseState.basis(3, [0, 1])], [1, 1])
    lines = psi.dump().splitlines()
    assert [line.split("(")[0] for line in lines] == ["01", "20"]


def test_budget_limits():
    psi = SparseState.basis(7, [0])
    with budget.limits(terms=100):
        with pytest.raises(CapacityExceeded):
            psi.attach_uniform_registers(3)
    assert psi.attach_uniform_registers(2).terms == 49


def test_budget_environment(monkeypatch):
    monkeypatch.setenv(budget.TERM_ENV, "123")
    assert budget.current().terms == 123
    monkeypatch.setenv(budget.TERM_ENV, "-1")
    with pytest.raises(ValueError):
        budget.current()


def _random_linear(q, n, m, R, rng):
    while True:
        A = rng.integers(0, q, size=(n, m))
        B = rng.integers(0, q, size=(n, R))
        if rank(FMatrix(np.concatenate([A, B], axis=1), q)) == m + R:
            return A, B


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 2**32 - 1))
def test_coset_state_matches_dense_oracle(q, seed):
    rng = np.random.default_rng(seed)
    n, m, R = 4, 1, 2
    A, B = _random_linear(q, n, m, R, rng)
    amps = rng.normal(size=q) + 1j * rng.normal(size=q)
    secret = {(s,): amps[s] for s in range(q)}
    psi = state_from_secret(secret, q)
    coset = CosetState.from_linear(q, A, B, psi)
    expected = dense_encoding(q, A, B, {w: a for w, a in psi.as_dict().items()})
    assert np.allclose(coset.to_sparse().to_vector(), expected, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([3, 5]), st.integers(0, 2**32 - 1))
def test_backends_agree_under_gates_and_traces(q, seed):
    rng = np.random.default_rng(seed)
    n, m, R = 4, 1, 2
    A, B = _random_linear(q, n, m, R, rng)
    psi = superpose([SparseState.basis(q, [0]), SparseState.basis(q, [1])], [1, 1j])
    coset = CosetState.from_linear(q, A, B, psi)
    sparse = coset.to_sparse()
    while True:
        K = FMatrix(rng.integers(0, q, size=(2, 2)), q)
        if rank(K) == 2:
            break
    for state_ops in [
        lambda s: s.apply_linear(K, [0, 2]),
        lambda s: s.apply_ctrl_add(2, 1, 3),
        lambda s: s.apply_reorder([3, 1, 0, 2]),
        lambda s: s.apply_linear(mat_inv(K), [1, 3]),
    ]:
        coset, sparse = state_ops(coset), state_ops(sparse)
        assert max_difference(coset.to_sparse(), sparse) < 1e-12
    for keep in ([0], [1, 2], [3, 0], [0, 1, 2]):
        a, b = partial_trace(coset, keep), partial_trace(sparse, keep)
        assert reduced_deviation(a, b) < 1e-12
        assert von_neumann_entropy(a) == pytest.approx(von_neumann_entropy(b), abs=1e-9)


def test_coset_entropy_counts_cosets():
    # |s> -> sum_r |s+r, r>: one qudit of each side is maximally mixed
    q = 5
    A = np.array([[1], [0]])
    B = np.array([[1], [1]])
    coset = CosetState.from_linear(q, A, B, SparseState.basis(q, [3]))
    assert von_neumann_entropy(partial_trace(coset, [0])) == pytest.approx(1.0)
    assert von_neumann_entropy(partial_trace(coset, [0, 1])) == pytest.approx(0.0, abs=1e-12)
