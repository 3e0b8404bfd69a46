"""Edge classification and equilibrium detection.

The package results are cross-checked against a brute-force
reimplementation below that shares no code with the library: faces are
flattened to 2D, foot points are tested against the face polygon with
shapely, and half-plane sides are decided by 2D signed areas.
"""

import numpy as np
import pytest
from shapely.geometry import Point, Polygon

from polymorse import (
    EdgeClass,
    Finding,
    classify_edge,
    classify_edges,
    convex_hull_mesh,
    find_equilibria,
    is_vertex_equilibrium,
    make_cube,
)

from conftest import WEDGE_POINTS, referenced


def cross2(a, b):
    return float(a[0] * b[1] - a[1] * b[0])


def brute_force_equilibria(poly, origin):
    """Classify edges and locate equilibria from first principles.

    Returns a dict with face ids of stable feet, vertex-pair sets of
    followed and saddle edges, a crossed map ``pair -> (from, to)``, and
    vertex ids of unstable equilibria.
    """
    V = np.asarray(poly.vertices, float)
    faces = poly.faces
    o = np.asarray(origin, float)

    edge_faces = {}
    for f, cyc in enumerate(faces):
        for k in range(len(cyc)):
            a, b = cyc[k], cyc[(k + 1) % len(cyc)]
            edge_faces.setdefault((min(a, b), max(a, b)), []).append(f)

    flat = {}
    for f, cyc in enumerate(faces):
        pts = V[list(cyc)]
        n = np.cross(pts[1] - pts[0], pts[2] - pts[0])
        n /= np.linalg.norm(n)
        u = (pts[1] - pts[0]) / np.linalg.norm(pts[1] - pts[0])
        w = np.cross(n, u)

        def to2(q, p0=pts[0], u=u, w=w):
            return np.array([np.dot(q - p0, u), np.dot(q - p0, w)])

        foot = o - np.dot(o - pts[0], n) * n
        flat[f] = (to2, Polygon([to2(q) for q in pts]), to2(foot))

    stable = {f for f, (_, pg, foot2) in flat.items()
              if pg.contains(Point(foot2))}

    followed, crossed = set(), {}
    for pair, fs in edge_faces.items():
        assert len(fs) == 2
        a, b = pair
        inside = {}
        for f in fs:
            to2, pg, foot2 = flat[f]
            a2, b2 = to2(V[a]), to2(V[b])
            cen2 = np.asarray(pg.centroid.coords[0])
            s_foot = cross2(b2 - a2, foot2 - a2)
            s_cen = cross2(b2 - a2, cen2 - a2)
            inside[f] = s_foot * s_cen > 0
        if all(inside.values()):
            followed.add(pair)
        elif any(inside.values()):
            src = next(f for f in fs if inside[f])
            dst = next(f for f in fs if not inside[f])
            crossed[pair] = (src, dst)

    saddles = set()
    for a, b in followed:
        ab = V[b] - V[a]
        t = np.dot(o - V[a], ab) / np.dot(ab, ab)
        if 0.0 < t < 1.0:
            saddles.add((a, b))

    nbrs = {v: set() for v in range(len(V))}
    for a, b in edge_faces:
        nbrs[a].add(b)
        nbrs[b].add(a)
    unstable = {v for v in nbrs
                if all(np.dot(V[u] - V[v], V[v] - o) < 0.0
                       for u in nbrs[v])}
    return {"stable": stable, "followed": followed, "crossed": crossed,
            "saddles": saddles, "unstable": unstable}


def package_sets(rp):
    """The same summary extracted from the package's answers."""
    poly = rp.poly
    classes = classify_edges(rp)
    eqs, _ = find_equilibria(rp, classes)
    pair = {e: tuple(int(i) for i in poly.edges[e])
            for e in range(poly.n_edges)}
    followed = {pair[e] for e in range(poly.n_edges)
                if classes[e] is not None and classes[e].kind == "followed"}
    crossed = {pair[e]: (classes[e].from_face, classes[e].to_face)
               for e in range(poly.n_edges)
               if classes[e] is not None and classes[e].kind == "crossed"}
    return {
        "stable": {eq.carrier_id for eq in eqs if eq.kind == "stable"},
        "followed": followed,
        "crossed": crossed,
        "saddles": {pair[eq.carrier_id] for eq in eqs
                    if eq.kind == "saddle"},
        "unstable": {eq.carrier_id for eq in eqs if eq.kind == "unstable"},
    }


def test_pex_against_brute_force(pex_rp):
    want = brute_force_equilibria(pex_rp.poly, pex_rp.origin)
    got = package_sets(pex_rp)
    assert got == want
    assert len(got["stable"]) == 5
    assert len(got["saddles"]) == 11
    assert len(got["unstable"]) == 8


def test_pex_has_crossed_band_edges(pex_rp):
    z = pex_rp.poly.vertices[:, 2]
    got = package_sets(pex_rp)
    band = [(a, b) for a, b in got["crossed"]
            if {round(z[a], 3), round(z[b], 3)} == {1.0, -1.0}]
    assert band


def test_wedge_against_brute_force(wedge_rp):
    want = brute_force_equilibria(wedge_rp.poly, wedge_rp.origin)
    got = package_sets(wedge_rp)
    assert got == want


def test_wedge_crease_is_crossed_into_flat_face(wedge_rp):
    poly = wedge_rp.poly
    crease = [e for e in range(poly.n_edges)
              if all(np.allclose(poly.vertices[v][[0, 2]], (1.0, 0.0))
                     for v in poly.edges[e])]
    assert len(crease) == 1
    cls = classify_edge(wedge_rp, crease[0])
    assert isinstance(cls, EdgeClass)
    assert cls.kind == "crossed"
    n_to = poly.face_normals[cls.to_face]
    n_from = poly.face_normals[cls.from_face]
    assert n_to[2] == pytest.approx(1.0)
    assert abs(n_to[0]) < 1e-12
    assert n_from[0] > 0.05


def test_off_center_cube_all_edges_followed(cube_off_rp):
    # The foot of the origin on each axis-aligned face keeps the other
    # two coordinates of the origin, which lie strictly inside the face
    # square; a foot interior to its face is inside every edge half-plane.
    o = cube_off_rp.origin
    for axis in range(3):
        others = np.delete(o, axis)
        assert np.all(np.abs(others) < 0.5)
    classes = classify_edges(cube_off_rp)
    assert all(classes[e].kind == "followed"
               for e in range(cube_off_rp.poly.n_edges))
    assert classes.followed_mask.all()
    assert not classes.findings


def test_centered_cube_census(cube_rp):
    eqs, report = find_equilibria(cube_rp)
    kinds = [eq.kind for eq in eqs]
    assert kinds.count("stable") == 6
    assert kinds.count("saddle") == 12
    assert kinds.count("unstable") == 8
    assert report.status == "generic-candidate"
    heights = {k: [eq.height for eq in eqs if eq.kind == k]
               for k in ("stable", "saddle", "unstable")}
    assert np.allclose(heights["stable"], 0.5)
    assert np.allclose(heights["saddle"], np.sqrt(2) / 2)
    assert np.allclose(heights["unstable"], np.sqrt(3) / 2)


def test_classify_single_matches_bulk(pex_rp):
    bulk = classify_edges(pex_rp)
    for e in range(pex_rp.poly.n_edges):
        single = classify_edge(pex_rp, e)
        assert isinstance(single, EdgeClass)
        assert single.kind == bulk[e].kind
        if single.kind == "crossed":
            assert single.from_face == bulk[e].from_face
            assert single.to_face == bulk[e].to_face


def test_ambiguous_foot_on_crease_reported():
    # With the origin at x = 1 the flat-face foot lands exactly on the
    # crease, so the crease edge must be flagged, not classified.
    rp = referenced(convex_hull_mesh(WEDGE_POINTS), (1.0, 0.0, -0.5))
    poly = rp.poly
    crease = [e for e in range(poly.n_edges)
              if all(np.allclose(poly.vertices[v][[0, 2]], (1.0, 0.0))
                     for v in poly.edges[e])][0]
    single = classify_edge(rp, crease)
    assert isinstance(single, Finding)
    assert single.kind == "projection-on-face-boundary"
    bulk = classify_edges(rp)
    assert bulk[crease] is None
    assert any(f.entity_id == crease for f in bulk.findings)
    _, report = find_equilibria(rp, bulk)
    assert report.status == "degenerate"


def test_cube_vertices_always_unstable():
    for origin in ((0.0, 0.0, 0.0), (0.3, 0.3, 0.3)):
        rp = referenced(make_cube(), origin)
        for v in range(8):
            status, derivs = is_vertex_equilibrium(rp, v)
            assert status == "unstable"
            assert np.all(derivs < 0.0)
            assert len(derivs) == 3


def test_vertex_status_matches_brute_force(pex_rp):
    want = brute_force_equilibria(pex_rp.poly, pex_rp.origin)["unstable"]
    for v in range(pex_rp.poly.n_vertices):
        status, _ = is_vertex_equilibrium(pex_rp, v)
        assert (status == "unstable") == (v in want)


def test_equilibria_ids_and_heights(pex_rp):
    eqs, _ = find_equilibria(pex_rp)
    assert [eq.id for eq in eqs] == list(range(len(eqs)))
    order = {"stable": 0, "saddle": 1, "unstable": 2}
    ranks = [order[eq.kind] for eq in eqs]
    assert ranks == sorted(ranks)
    for kind in order:
        carriers = [eq.carrier_id for eq in eqs if eq.kind == kind]
        assert carriers == sorted(carriers)
    for eq in eqs:
        assert eq.height == pytest.approx(
            np.linalg.norm(eq.position - pex_rp.origin))


def test_equilibrium_str(cube_rp):
    eqs, _ = find_equilibria(cube_rp)
    text = str(eqs[0])
    assert "stable" in text and "face" in text


def test_classification_margins_shape(pex_rp):
    classes = classify_edges(pex_rp)
    E = pex_rp.poly.n_edges
    assert classes.margins.shape == (E, 2)
    assert classes.followed_mask.shape == (E,)
    assert classes.followed_mask.sum() == sum(
        1 for e in range(E) if classes.is_followed(e))
