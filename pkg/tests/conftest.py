import sys

import numpy as np
import pytest

from matchdist.geometry import BiFunctionSample
from matchdist.mesh import icosahedron, icosphere
from matchdist.pareto import sphere_affine_epg

FIG3_G = (2.1, 2.0, 0.6, 1.8)


def xz_sample(mesh, c1=1.0, d1=0.0, c2=1.0, d2=0.0, name="f"):
    V = mesh.vertices
    return BiFunctionSample(mesh, np.column_stack([c1 * V[:, 0] + d1, c2 * V[:, 2] + d2]), name)


@pytest.fixture(scope="session")
def ico():
    return icosahedron()


@pytest.fixture(scope="session")
def sphere2():
    return icosphere(2)


@pytest.fixture(scope="session")
def sphere3():
    return icosphere(3)


@pytest.fixture(scope="session")
def fig3_pair(sphere3):
    return xz_sample(sphere3, name="f"), xz_sample(sphere3, *FIG3_G, name="g")


@pytest.fixture(scope="session")
def fig3_grids():
    return sphere_affine_epg(owner="f"), sphere_affine_epg(*FIG3_G, owner="g")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
