from pathlib import Path

import pytest

from cyconekit.toric import GoodCone, parse_cone

DATA = Path(__file__).resolve().parent.parent / "data"

POLYGONS = {
    "p2": [(1, 0), (0, 1), (-1, -1)],
    "conifold": [(0, 0), (1, 0), (1, 1), (0, 1)],
    "dp1": [(1, 0), (0, 1), (-1, -1), (0, -1)],
    "dp2": [(1, 0), (0, 1), (-1, 0), (-1, -1), (0, -1)],
    "dp3": [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)],
}


def cone_file(name: str) -> str:
    return (DATA / "cones" / f"{name}.cone").read_text()


@pytest.fixture(scope="session")
def cones() -> dict[str, GoodCone]:
    return {name: parse_cone(cone_file(name)) for name in
            ("c3", "c3z3", "conifold", "dp1", "dp2", "dp3")}


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
