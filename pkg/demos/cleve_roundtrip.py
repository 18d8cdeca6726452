"""Share a qutrit across three parties with the ((2,3)) scheme and recover it
from every pair."""

import itertools

from ceqts import derive_params, encode, recover
from ceqts.engine import SparseState, fidelity, superpose


def main() -> None:
    spec = derive_params("qts", k=2, n=3)
    secret = superpose([SparseState.basis(3, [0]), SparseState.basis(3, [2])], [1, 1j])
    state, layout = encode(spec, secret, "sparse")
    print(f"encoded state ({state.terms} terms):")
    print(state.dump())
    for D in itertools.combinations(range(1, 4), 2):
        rho, transcript = recover(spec, state, layout, D)
        print(f"D={list(D)}  cost {transcript.cost}  fidelity {fidelity(rho, secret):.12f}")


if __name__ == "__main__":
    main()
