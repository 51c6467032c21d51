import sys
from pathlib import Path

import pytest

# Allow importing the src packages when running pytest from the project root
_src_dir = Path(__file__).resolve().parent.parent / "src"
if str(_src_dir) not in sys.path:
    sys.path.insert(0, str(_src_dir))

from analysis.models import ChannelSpec, FusionRule, SensorModel, SignalSpec  # noqa: E402

OR = FusionRule.parse("or")
AND = FusionRule.parse("and")
MAJORITY = FusionRule.parse("majority")


@pytest.fixture
def rules():
    return (OR, AND, MAJORITY)


@pytest.fixture
def dense_signal():
    return SignalSpec(eta=10_000)


@pytest.fixture
def snapshot_signal():
    return SignalSpec(eta=300)


@pytest.fixture
def three_sensors():
    return SensorModel(mu=0.0, sigma2=1.0, n_sensors=3)


@pytest.fixture
def one_hop():
    return ChannelSpec(hop_probs=(0.1,))
