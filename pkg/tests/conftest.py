import numpy as np
import pytest

from nonlocal_optics import biphoton as bp


@pytest.fixture(scope="session")
def pdc_ideal():
    """Strongly anti-correlated Gaussian pair, time domain; long mean-time envelope."""
    spec = bp.GaussianPDC(0.0, 0.0, 0.0036, 1.0)
    return bp.as_time(bp.make_state(spec, bp.FrequencyGrid.square(2048, 5.9)))


@pytest.fixture(scope="session")
def pdc_1024():
    spec = bp.GaussianPDC(0.0, 0.0, 0.0072, 1.0)
    return bp.as_time(bp.make_state(spec, bp.FrequencyGrid.square(1024, 5.9)))


@pytest.fixture(scope="session")
def pdc_wide():
    """Spectrum window wide enough that edge truncation does not ring into the gate."""
    spec = bp.GaussianPDC(0.0, 0.0, 0.0072, 1.0)
    return bp.as_time(bp.make_state(spec, bp.FrequencyGrid.square(2048, 8.0)))


@pytest.fixture(scope="session")
def pdc_hom():
    return bp.make_state(bp.GaussianPDC(0.0, 0.0, 0.02, 1.0), bp.FrequencyGrid.square(1024, 6.0))


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture()
def criterion(request):
    """criterion(n, ok, detail) records one acceptance line and prints it."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(n, ok, detail):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append((n, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
