"""Shared fixtures: referenced fixture polyhedra and their complexes.

Everything here is session-scoped; the analysis pipeline is deterministic,
so building each fixture once is safe and keeps the suite fast.
"""

import warnings

import numpy as np
import pytest

from polymorse import (
    PEX_ORIGIN,
    build_ms_complex,
    convex_hull_mesh,
    make_cube,
    make_pex,
    make_tetrahedron,
    with_reference,
)

#: A roof-like solid whose top consists of a flat part (z = 0 over
#: 0 <= x <= 1) and a gently sloped part (down to z = -0.1 at x = 2),
#: meeting along the crease x = 1, z = 0.
WEDGE_POINTS = np.array([
    (0.0, -1.0, 0.0), (0.0, 1.0, 0.0),
    (1.0, -1.0, 0.0), (1.0, 1.0, 0.0),
    (2.0, -1.0, -0.1), (2.0, 1.0, -0.1),
    (0.0, -1.0, -1.0), (0.0, 1.0, -1.0),
    (2.0, -1.0, -1.0), (2.0, 1.0, -1.0),
])

WEDGE_ORIGIN = (1.5, 0.0, -0.5)


def referenced(poly, origin):
    """Attach a reference point, silencing the non-simplicial note."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return with_reference(poly, origin)


@pytest.fixture(scope="session")
def cube_rp():
    return referenced(make_cube(), (0.0, 0.0, 0.0))


@pytest.fixture(scope="session")
def cube_off_rp():
    """Cube with the reference point pushed off-center (still generic)."""
    return referenced(make_cube(), (0.1, 0.07, 0.03))


@pytest.fixture(scope="session")
def tetra_rp():
    return referenced(make_tetrahedron(), "centroid")


@pytest.fixture(scope="session")
def pex_rp():
    return with_reference(make_pex(), PEX_ORIGIN)


@pytest.fixture(scope="session")
def wedge_rp():
    return with_reference(convex_hull_mesh(WEDGE_POINTS), WEDGE_ORIGIN)


@pytest.fixture(scope="session")
def cube_msc(cube_rp):
    return build_ms_complex(cube_rp)


@pytest.fixture(scope="session")
def tetra_msc(tetra_rp):
    return build_ms_complex(tetra_rp)


@pytest.fixture(scope="session")
def pex_msc(pex_rp):
    return build_ms_complex(pex_rp)
