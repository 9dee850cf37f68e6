import logging

import pytest

from sgi_sim.model import ApparatusParams, SquidParams


@pytest.fixture(autouse=True)
def _quiet_validity_warnings(caplog):
    # the quoted SQUID values sit below the many-minima threshold; the
    # warning is exercised explicitly in test_model
    caplog.set_level(logging.ERROR, logger="sgi_sim")


@pytest.fixture
def paper_squid():
    return SquidParams(effective_inductance=1e-10)


@pytest.fixture
def paper_apparatus():
    return ApparatusParams()


_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per criterion; shown in the terminal summary."""

    def record(number, title, ok, detail, runtime=None):
        tag = "PASS" if ok else "FAIL"
        line = f"[{tag}] #{number:>2} {title}: {detail}"
        if runtime is not None:
            line += f" ({runtime:.2f} s)"
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE, key=lambda x: x[0]):
            terminalreporter.write_line(line)
