from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rcmkit import fixtures  # noqa: E402
from rcmkit.schema import MANY, RelationalSchema  # noqa: E402


def P(text: str) -> tuple[str, ...]:
    return tuple(text.split())


@pytest.fixture(scope="session")
def c41():
    return fixtures.fixture_counterexample_41()


@pytest.fixture(scope="session")
def ex1():
    return fixtures.fixture_example1()


@pytest.fixture(scope="session")
def fig1():
    return fixtures.fig1_model()


@pytest.fixture(scope="session")
def fig4():
    return fixtures.fig4_model()


@pytest.fixture(scope="session")
def fig2_schema():
    """E1 -Ra- E2 -Rb- E3 and E2 -Rc- E4, card(Rb, E3) = many."""
    rels = {"Ra": ["E1", "E2"], "Rb": ["E2", "E3"], "Rc": ["E2", "E4"]}
    cards = {(r, e): MANY for r, es in rels.items() for e in es}
    return RelationalSchema.build(["E1", "E2", "E3", "E4"], rels, {}, cards)


@pytest.fixture(scope="session")
def two_entity():
    return RelationalSchema.build(["E1", "E2"], {"R": ["E1", "E2"]}, {"E1": ["x"], "E2": ["y"]}, {})



def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1][1:])):
            terminalreporter.write_line(line)
