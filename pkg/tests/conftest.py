from collections import defaultdict
from dataclasses import dataclass, field

import pytest

CRITERIA = {
    1: "reference matrix regression",
    2: "fixed-d ((3,5,5)) recovery and cost",
    3: "m=3 universal scheme costs",
    4: "m=6 universal scheme recovery and cost",
    5: "secrecy and mutation sensitivity",
    6: "concatenation framework",
    7: "information-theoretic model",
    8: "backend equivalence",
    9: "layout download property",
}


@dataclass
class Acceptance:
    parts: dict = field(default_factory=lambda: defaultdict(list))
    elapsed: dict = field(default_factory=lambda: defaultdict(float))

    def check(self, criterion: int, part: str, ok: bool, detail: str = "") -> bool:
        self.parts[criterion].append((part, bool(ok), detail))
        return bool(ok)

    def timed(self, criterion: int, seconds: float) -> float:
        self.elapsed[criterion] += seconds
        return self.elapsed[criterion]

    def lines(self) -> list[str]:
        out = []
        for c, title in CRITERIA.items():
            parts = self.parts.get(c)
            if not parts:
                out.append(f"C{c} NOT RUN  {title}")
                continue
            status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
            out.append(f"C{c} {status}  {title} ({self.elapsed[c]:.1f}s)")
            for part, ok, detail in parts:
                out.append(f"    {'ok  ' if ok else 'FAIL'} {part}: {detail}")
        return out


_KEY = pytest.StashKey[Acceptance]()


@pytest.fixture(scope="session")
def acceptance(request) -> Acceptance:
    return request.config.stash.setdefault(_KEY, Acceptance())


def pytest_terminal_summary(terminalreporter, config):
    recorder = config.stash.get(_KEY, None)
    if recorder is None:
        return
    terminalreporter.section("acceptance criteria")
    for line in recorder.lines():
        terminalreporter.write_line(line)
