import numpy as np
import pytest

from clustersim.cpm import CpmSettings
from clustersim.detection import DetectorModel, build_default_schedule
from clustersim.encoding import default_levels, layout_from_levels
from clustersim.modes import ModeGrid
from clustersim.source import ideal_cluster_state


@pytest.fixture(scope="session")
def levels():
    return default_levels()


@pytest.fixture(scope="session")
def layout(levels):
    return layout_from_levels(levels)


@pytest.fixture(scope="session")
def grid():
    return ModeGrid()


@pytest.fixture(scope="session")
def cluster(layout, grid):
    return ideal_cluster_state(layout, grid)


@pytest.fixture(scope="session")
def schedule(levels):
    return build_default_schedule(levels)


@pytest.fixture(scope="session")
def noiseless_detector():
    return DetectorModel(jitter_signal_ps=0.0, jitter_idler_ps=0.0, tdc_jitter_ps=0.0)


@pytest.fixture(scope="session")
def base_cpm():
    return CpmSettings()
