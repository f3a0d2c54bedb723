import numpy as np
import pytest

from closeholes.fixtures import fix_sym, fix_twin
from closeholes.geometry import TrigPoly


@pytest.fixture(scope="session")
def twin_config():
    """FIX-TWIN with non-trivial trigonometric data on all three curves."""
    return fix_twin(
        f_outer=TrigPoly(0.2, cos=(0.5,), sin=(0.0, 0.3)),
        f_hole1=TrigPoly(1.0, cos=(0.0, 0.4)),
        f_hole2=TrigPoly(-0.5, sin=(0.6,)),
    )


@pytest.fixture(scope="session")
def twin_unit_data():
    """FIX-TWIN with zero outer datum and unit hole data (expansion fixture)."""
    return fix_twin(
        f_outer=TrigPoly(0.0), f_hole1=TrigPoly(1.0), f_hole2=TrigPoly(1.0)
    )


@pytest.fixture(scope="session")
def sym_config():
    return fix_sym()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
