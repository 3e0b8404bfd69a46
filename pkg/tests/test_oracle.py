"""Independent basin sampling versus the combinatorial complex."""

import numpy as np
import pytest

from polymorse import (
    build_document,
    complex_adjacency,
    oracle_basins,
    sample_surface,
)
from polymorse.document import parse, serialize
from polymorse.oracle import check_against_curves


def test_sample_surface_deterministic(pex_rp):
    a, fa = sample_surface(pex_rp.poly, 500, seed=4)
    b, fb = sample_surface(pex_rp.poly, 500, seed=4)
    assert np.array_equal(a, b)
    assert np.array_equal(fa, fb)
    c, _ = sample_surface(pex_rp.poly, 500, seed=5)
    assert not np.array_equal(a, c)


def test_samples_lie_on_their_faces(pex_rp):
    poly = pex_rp.poly
    pts, faces = sample_surface(poly, 500, seed=0)
    assert len(pts) == 500
    lift = np.einsum("ij,ij->i", poly.face_normals[faces], pts)
    assert np.allclose(lift, poly.face_offsets[faces], atol=1e-12)


def test_cube_basins_are_equal_eighths(cube_rp, cube_msc):
    result = oracle_basins(cube_rp, samples=10_000, seed=0,
                           against=cube_msc)
    assert result.ambiguous == 0
    assert set(result.census) == {eq.id for eq in
                                  cube_msc.by_kind("unstable")}
    expected = 10_000 / 8
    for count in result.census.values():
        assert abs(count - expected) <= 0.05 * expected
    assert sum(result.census.values()) == 10_000


def test_cube_adjacency_three_pairs_per_corner(cube_rp, cube_msc):
    result = oracle_basins(cube_rp, samples=10_000, seed=0,
                           against=cube_msc)
    assert result.adjacency == complex_adjacency(cube_msc)
    for u in (eq.id for eq in cube_msc.by_kind("unstable")):
        assert sum(1 for _, uu in result.adjacency if uu == u) == 3
    assert result.disagreements == ()


def test_pex_census_is_seed_stable(pex_rp):
    a = oracle_basins(pex_rp, samples=10_000, seed=0)
    b = oracle_basins(pex_rp, samples=10_000, seed=1)
    assert set(a.census) == set(b.census)
    for u in a.census:
        assert abs(a.census[u] - b.census[u]) <= 0.02 * 10_000


def test_adjacency_matches_cells(tetra_rp, tetra_msc, pex_rp, pex_msc):
    for rp, msc in ((tetra_rp, tetra_msc), (pex_rp, pex_msc)):
        result = oracle_basins(rp, samples=4000, seed=0, against=msc)
        assert result.adjacency == complex_adjacency(msc)
        assert result.disagreements == ()


def test_document_is_a_valid_reference(pex_rp, pex_msc):
    doc = parse(serialize(build_document(pex_msc)))
    result = oracle_basins(pex_rp, samples=2000, seed=2, against=doc)
    assert result.disagreements == ()
    assert result.adjacency <= complex_adjacency(pex_msc)


def test_openness_no_violations(pex_rp, pex_msc):
    result = oracle_basins(pex_rp, samples=4000, seed=0)
    assert check_against_curves(result, pex_msc) == ()


def test_origins_reach_stable_feet(pex_rp, pex_msc):
    result = oracle_basins(pex_rp, samples=2000, seed=0)
    stable_ids = {eq.id for eq in pex_msc.by_kind("stable")}
    ok = result.origins >= 0
    assert ok.mean() > 0.99
    assert set(result.origins[ok]) <= stable_ids


def test_step_override_respected(cube_rp):
    result = oracle_basins(cube_rp, samples=500, seed=0, step=0.005)
    assert result.step == 0.005
    assert result.samples == 500
    assert result.spacing == pytest.approx(np.sqrt(6.0 / 500))
