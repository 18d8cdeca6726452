"""Scheme parameters: variant names, field-size floors and derived sizes."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from ..errors import BadEvaluationPoints, BadModulus, BadParameters, NoCloningViolation, UnsupportedD
from ..field import check_modulus, next_prime

QTS = "QTS"
RAMP = "RampQSS"
FIXED = "StaircaseFixed"
UNIVERSAL = "StaircaseUniversal"
BASIC = "StaircaseBasic"
CONCAT_FIXED = "ConcatFixed"
CONCAT_UNIVERSAL = "ConcatUniversal"

VARIANTS = (QTS, RAMP, FIXED, UNIVERSAL, BASIC, CONCAT_FIXED, CONCAT_UNIVERSAL)
STAIRCASES = (FIXED, UNIVERSAL, BASIC)
CONCATS = (CONCAT_FIXED, CONCAT_UNIVERSAL)

ALIASES = {
    "qts": QTS,
    "cleve": QTS,
    "ramp": RAMP,
    "ramp-qss": RAMP,
    "fixed-staircase": FIXED,
    "staircase-fixed": FIXED,
    "universal-staircase": UNIVERSAL,
    "staircase-universal": UNIVERSAL,
    "basic-staircase": BASIC,
    "staircase-basic": BASIC,
    "concat-fixed": CONCAT_FIXED,
    "concat-universal": CONCAT_UNIVERSAL,
}


def canonical_variant(name: str) -> str:
    if name in VARIANTS:
        return name
    key = name.strip().lower()
    if key in ALIASES:
        return ALIASES[key]
    for v in VARIANTS:
        if v.lower() == key:
            return v
    raise BadParameters(f"unknown scheme variant {name!r}; choose from {', '.join(VARIANTS)}")


@dataclass(frozen=True)
class SchemeSpec:
    """Complete parameterization of one scheme instance.

    `points` lists the evaluation points of every share of the underlying pure
    scheme: the first n belong to the parties, the rest to shares that are
    discarded into the environment (or, for concatenated schemes, to surplus
    shares that feed later layers).
    """

    variant: str
    k: int
    n: int
    q: int
    m: int
    points: tuple[int, ...]
    d: Optional[int] = None
    t: Optional[int] = None
    z: Optional[int] = None
    levels: tuple[int, ...] = ()  # recovery sizes d_1 > d_2 > ... for universal variants
    a: tuple[int, ...] = ()
    b: tuple[int, ...] = ()
    experimental: bool = False

    @property
    def threshold(self) -> int:
        return self.t if self.variant == RAMP else self.k

    @property
    def secrecy_bound(self) -> int:
        """Largest party count that must learn nothing."""
        return self.z if self.variant == RAMP else self.k - 1

    @property
    def pure_size(self) -> int:
        """Share count of the pure-state scheme this instance is cut from."""
        if self.variant == RAMP:
            return self.t + self.z
        return 2 * self.k - 1

    @property
    def party_points(self) -> tuple[int, ...]:
        return self.points[: self.n]

    @property
    def perfect(self) -> bool:
        return self.variant != RAMP

    @property
    def admissible_d(self) -> tuple[int, ...]:
        if self.variant == QTS:
            return (self.k,)
        if self.variant == RAMP:
            return (self.t,)
        if self.variant in (FIXED, CONCAT_FIXED):
            return tuple(sorted({self.k, self.d}))
        return tuple(range(self.k, self.n + 1))

    def check_d(self, d: int) -> None:
        if d not in self.admissible_d:
            raise UnsupportedD(f"{self.variant} supports recovery from {list(self.admissible_d)} parties, not {d}")

    def level_of(self, d: int) -> int:
        """1-based index i with levels[i-1] == d (universal variants)."""
        self.check_d(d)
        return self.levels.index(d) + 1

    def share_size(self) -> int:
        return 1 if self.variant == RAMP else self.m

    def cost_formula(self, d: int) -> int:
        """Communication cost the construction is designed to achieve at d."""
        self.check_d(d)
        if self.variant == QTS:
            return self.k
        if self.variant == RAMP:
            return self.t
        if self.variant == BASIC:
            return (2 * self.k - d) * d
        if d == self.k:
            return self.k * self.m
        return d * self.m // (d - self.k + 1)

    @staticmethod
    def lower_bound(d: int, k: int, m: int) -> float:
        return d * m / (d - k + 1)

    def label(self) -> str:
        if self.variant == RAMP:
            return f"(({self.t},{self.n};{self.z}))"
        if self.variant in (FIXED, CONCAT_FIXED):
            return f"(({self.k},{self.n},{self.d}))"
        if self.variant == QTS:
            return f"(({self.k},{self.n}))"
        return f"(({self.k},{self.n},*))"

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("points", "levels", "a", "b"):
            out[key] = list(out[key])
        return out

    def to_config(self) -> dict:
        """The minimal editable form: enough to rebuild this exact spec."""
        cfg = {"variant": self.variant, "n": self.n, "q": self.q, "points": list(self.points)}
        if self.variant == RAMP:
            cfg.update(t=self.t, z=self.z)
        else:
            cfg["k"] = self.k
        if self.d is not None and self.variant in (FIXED, CONCAT_FIXED):
            cfg["d"] = self.d
        if self.experimental:
            cfg["experimental"] = True
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "SchemeSpec":
        known = {"variant", "k", "n", "d", "q", "points", "t", "z", "experimental"}
        return derive_params(**{key: cfg[key] for key in known if key in cfg})


def _point_count(variant: str, k: int, n: int, d: Optional[int], t: Optional[int], z: Optional[int]) -> int:
    if variant == RAMP:
        return t + z
    if variant == CONCAT_FIXED:
        return max(d + k - 1, 2 * k - 1)
    if variant == CONCAT_UNIVERSAL:
        return n + k - 1
    return 2 * k - 1


def _floor(variant: str, k: int, n: int, d: Optional[int], t: Optional[int], z: Optional[int]) -> tuple[int, bool]:
    """(bound, strict): q must be >= bound, or > bound when strict."""
    if variant == QTS:
        return 2 * k - 1, False
    if variant == RAMP:
        return t + z, True
    if variant == CONCAT_FIXED:
        return d + k - 1, True
    if variant == CONCAT_UNIVERSAL:
        return n + k - 1, True
    return 2 * k - 1, True


def _fill_points(given: Optional[Sequence[int]], count: int, q: int, allow_zero: bool) -> tuple[int, ...]:
    start = 0 if allow_zero else 1
    if given is None:
        pts = list(range(start, start + count))
    else:
        pts = [int(x) % q for x in given]
        candidate = start
        while len(pts) < count:
            if candidate >= q:
                break
            if candidate not in pts:
                pts.append(candidate)
            candidate += 1
    if len(pts) < count:
        raise BadEvaluationPoints(f"need {count} distinct evaluation points, F_{q} has too few")
    if any(x >= q for x in pts):
        raise BadEvaluationPoints(f"evaluation points {pts} do not fit below q={q}")
    if len(set(pts)) != len(pts):
        raise BadEvaluationPoints(f"repeated evaluation point in {pts}")
    if not allow_zero and 0 in pts:
        raise BadEvaluationPoints(f"zero evaluation point in {pts}")
    return tuple(pts[:count]) if given is None or len(pts) >= count else tuple(pts)


def derive_params(
    variant: str,
    k: Optional[int] = None,
    n: Optional[int] = None,
    d: Optional[int] = None,
    q: Optional[int] = None,
    points: Optional[Sequence[int]] = None,
    t: Optional[int] = None,
    z: Optional[int] = None,
    experimental: bool = False,
) -> SchemeSpec:
    """Fill in every derived quantity; q defaults to the smallest admissible prime."""
    variant = canonical_variant(variant)
    if variant == RAMP:
        if t is None or z is None or n is None:
            raise BadParameters("a ramp scheme needs t, z and n")
        if not (1 <= z < t <= n <= t + z):
            raise BadParameters(f"ramp parameters must satisfy 1 <= z < t <= n <= t+z, got t={t}, z={z}, n={n}")
        k = t
    else:
        if k is None or n is None:
            raise BadParameters(f"{variant} needs k and n")
        if k < 2:
            raise BadParameters(f"threshold k must be at least 2, got {k}")
        if n < k:
            raise BadParameters(f"n={n} parties cannot meet threshold k={k}")
        if n > 2 * k - 1:
            raise NoCloningViolation(f"n={n} exceeds 2k-1={2 * k - 1}: two disjoint sets could each recover the secret")
        if variant in (FIXED, CONCAT_FIXED):
            if d is None:
                raise BadParameters(f"{variant} needs the recovery size d")
            if not k <= d <= n:
                raise BadParameters(f"d must satisfy k <= d <= n, got d={d}")
        elif d is not None and variant not in (QTS,):
            d = None
        if variant in (UNIVERSAL, BASIC) and n < 2 * k - 1 and not experimental:
            raise BadParameters(
                f"{variant} is defined for n = 2k-1; dropping shares to n={n} requires experimental=True"
            )

    bound, strict = _floor(variant, k, n, d, t, z)
    if q is None:
        q = next_prime(bound, strict=strict)
    else:
        q = check_modulus(q)
        if q < bound or (strict and q == bound):
            rel = ">" if strict else ">="
            raise BadModulus(f"{variant} needs q {rel} {bound}, got {q}")

    count = _point_count(variant, k, n, d, t, z)
    pts = _fill_points(points, count, q, allow_zero=(variant == QTS))

    levels: tuple[int, ...] = ()
    a: tuple[int, ...] = ()
    b: tuple[int, ...] = ()
    if variant == QTS:
        m = 1
        d = None
    elif variant == RAMP:
        m = t - z
    elif variant in (FIXED, CONCAT_FIXED):
        m = d - k + 1
    elif variant == UNIVERSAL:
        m = math.lcm(*range(1, k + 1))
        levels = tuple(2 * k - i for i in range(1, k + 1))
        a = tuple(m // (di - k + 1) for di in levels)
        b = tuple(a[i] - (a[i - 1] if i else 0) for i in range(k))
    elif variant == BASIC:
        m = k
        levels = tuple(2 * k - i for i in range(1, k + 1))
        a = tuple(range(1, k + 1))
        b = (1,) * k
    else:
        m = math.lcm(*range(1, n - k + 2))
        levels = tuple(n + 1 - i for i in range(1, n - k + 2))
        a = tuple(m // (di - k + 1) for di in levels)
        b = tuple(a[i] - (a[i - 1] if i else 0) for i in range(len(levels)))
    if variant in (UNIVERSAL, BASIC) and n < 2 * k - 1:
        keep = [i for i, di in enumerate(levels) if di <= n]
        levels = tuple(levels[i] for i in keep)
        a = tuple(a[i] for i in keep)
    return SchemeSpec(
        variant=variant,
        k=k,
        n=n,
        q=q,
        m=m,
        points=pts,
        d=d,
        t=t if variant == RAMP else None,
        z=z if variant == RAMP else None,
        levels=levels,
        a=a,
        b=b,
        experimental=experimental,
    )
