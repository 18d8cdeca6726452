"""Normalized download CC_n(d)/m of the universal constructions against the
lower bound d/(d-k+1), for n = 2k-1."""

from fractions import Fraction

from ceqts import communication_cost, derive_params


def main(k_max: int = 4) -> None:
    print(f"{'variant':<20}{'k':>3}{'n':>3}{'d':>3}{'m':>4}{'CC/m':>8}{'bound':>8}")
    for variant in ("universal-staircase", "concat-universal"):
        for k in range(2, k_max + 1):
            spec = derive_params(variant, k=k, n=2 * k - 1)
            for d in spec.admissible_d:
                ratio = Fraction(communication_cost(spec, d), spec.m)
                bound = Fraction(d, d - k + 1)
                print(f"{spec.variant:<20}{k:>3}{spec.n:>3}{d:>3}{spec.m:>4}{str(ratio):>8}{str(bound):>8}")


if __name__ == "__main__":
    main()
