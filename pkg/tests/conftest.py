import math

import pytest

from cornerlab import geometry


@pytest.fixture(scope="session")
def fig2():
    return geometry.fig2_family()


@pytest.fixture(scope="session")
def lsector():
    return geometry.SectorSpec(1.5 * math.pi)


ACCEPTANCE = []


@pytest.fixture(scope="session")
def record():
    def _record(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        ACCEPTANCE.append(line)
        print(line)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
