"""Size limits that keep the exact simulator at desk scale.

Defaults can be overridden per process with the CEQTS_TERM_BUDGET and
CEQTS_DENSE_BUDGET environment variables, or temporarily with `limits(...)`.
"""

from __future__ import annotations

import contextlib
import contextvars
import os
from dataclasses import dataclass, replace

from .errors import CapacityExceeded

TERM_ENV = "CEQTS_TERM_BUDGET"
DENSE_ENV = "CEQTS_DENSE_BUDGET"


@dataclass(frozen=True)
class Budgets:
    terms: int = 2**24  # sparse amplitudes, density entries, coset blocks
    dense: int = 4096  # side length of any dense density matrix / eigensolve

    def as_dict(self) -> dict:
        return {"terms": self.terms, "dense": self.dense}


_active: contextvars.ContextVar[Budgets | None] = contextvars.ContextVar("ceqts_budgets", default=None)


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    value = int(raw)
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {raw!r}")
    return value


def current() -> Budgets:
    active = _active.get()
    if active is not None:
        return active
    base = Budgets()
    return Budgets(terms=_env_int(TERM_ENV, base.terms), dense=_env_int(DENSE_ENV, base.dense))


@contextlib.contextmanager
def limits(terms: int | None = None, dense: int | None = None):
    """Temporarily replace the active budgets (None keeps the current value)."""
    b = current()
    new = replace(b, terms=b.terms if terms is None else int(terms), dense=b.dense if dense is None else int(dense))
    token = _active.set(new)
    try:
        yield new
    finally:
        _active.reset(token)


def require_terms(count: int, what: str) -> None:
    cap = current().terms
    if count > cap:
        raise CapacityExceeded(f"{what} needs {count} terms, budget is {cap}")


def require_dense(dim: int, what: str) -> None:
    cap = current().dense
    if dim > cap:
        raise CapacityExceeded(f"{what} needs a {dim}x{dim} dense matrix, budget is {cap}")
