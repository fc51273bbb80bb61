from pathlib import Path

import pytest

from rss_muodd.units import G

CONFIGS = Path(__file__).resolve().parents[1] / "src" / "rss_muodd" / "configs"


@pytest.fixture
def configs():
    return CONFIGS


@pytest.fixture
def fig4_kwargs():
    """Fixed parameters of the braking-bin table, accelerations in m/s²."""
    return dict(v_r=25.0, v_f=25.0, rho=0.5, a_max_accel=0.3 * G)


_ACCEPTANCE: dict = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line for an acceptance criterion."""

    def record(criterion: int, ok: bool, detail: str):
        _ACCEPTANCE[criterion] = (ok, detail)
        assert ok, f"criterion {criterion}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
