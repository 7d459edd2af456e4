import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nvdac import LineshapeParams, StressCouplings, ZfsParams
from nvdac.calibration import calibrated_couplings


@pytest.fixture
def zfs():
    return ZfsParams()


@pytest.fixture
def couplings():
    """Literature coupling set (package defaults)."""
    return StressCouplings()


@pytest.fixture
def calibrated():
    """Coupling set refit to the bundled measured pressure slopes."""
    return calibrated_couplings()


@pytest.fixture
def lineshape():
    return LineshapeParams(linewidth_fwhm=10.0, contrast=-0.03)
