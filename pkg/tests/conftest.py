import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from thzqd import (CavityMode, LaserDrive, QDGeometry, build_model, couplings,  # noqa: E402
                   operating_points, stark_map)
from thzqd.gate import CnotOptions, calibrate_cnot  # noqa: E402


@pytest.fixture(scope="session")
def geometry():
    return QDGeometry()


@pytest.fixture(scope="session")
def smap(geometry):
    return stark_map(geometry)


@pytest.fixture(scope="session")
def cavity():
    return CavityMode()


@pytest.fixture(scope="session")
def laser():
    return LaserDrive()


@pytest.fixture(scope="session")
def points(geometry, smap, cavity, laser):
    return operating_points(geometry, cavity, laser, smap)


@pytest.fixture(scope="session")
def coupling_table(points, cavity, laser):
    return couplings(points, cavity, laser)


@pytest.fixture(scope="session")
def model(smap, points, cavity, laser):
    return build_model(smap, points, cavity, laser)


@pytest.fixture(scope="session")
def effective_model(model, coupling_table):
    return model.with_(model="effective", two_photon_rate=coupling_table["two_photon"].Otilde)


@pytest.fixture(scope="session")
def calibrated(smap, points, cavity, laser, coupling_table, model):
    """(options, info, model) with the dressed two-photon pulse."""
    opt, info = calibrate_cnot(points, coupling_table, model, CnotOptions(kernel_only=True))
    m = build_model(smap, points, cavity, laser, extra_fields=[opt.two_photon_field])
    return opt, info, m


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one line per acceptance criterion for the terminal summary."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
