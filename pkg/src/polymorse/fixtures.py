"""Canonical polyhedron builders shared by tests, the CLI generator and the
benchmark harness.

``make_pex`` builds the twisted anti-prism-like example used throughout the
documentation; ``make_badguy`` builds a tetrahedron whose flow contains a
saddle-to-saddle connection, the canonical non-generic input.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import MeshValidationError
from .geom import TolerancePolicy
from .poly import Polyhedron, build

#: Reference point used with :func:`make_pex` in examples and tests.
PEX_ORIGIN = (0.5, 0.5, 0.5)

#: Reference point used with :func:`make_badguy`.
BADGUY_ORIGIN = (0.0, 0.0, 0.0)


def convex_hull_mesh(points, tolerance: TolerancePolicy | None = None) -> Polyhedron:
    """Triangulated convex hull of a point cloud as a validated polyhedron.

    Faces are oriented outward and listed in a canonical order (each cycle
    rotated to start at its smallest vertex id, cycles sorted), so equal
    point sets always produce identical meshes.
    """
    points = np.asarray(points, dtype=float)
    try:
        hull = ConvexHull(points, qhull_options="Qt")
    except QhullError as exc:
        raise MeshValidationError(
            "degenerate-hull", f"hull construction failed: {exc}") from exc
    keep = np.sort(hull.vertices)
    remap = np.full(len(points), -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    vertices = points[keep]
    faces = []
    for simplex, eq in zip(hull.simplices, hull.equations):
        a, b, c = (int(i) for i in simplex)
        n = np.cross(points[b] - points[a], points[c] - points[a])
        if n @ eq[:3] < 0.0:
            b, c = c, b
        cyc = (int(remap[a]), int(remap[b]), int(remap[c]))
        k = cyc.index(min(cyc))
        faces.append(cyc[k:] + cyc[:k])
    faces.sort()
    return build(vertices, faces, tolerance)


def make_cube(half_extent: float = 0.5) -> Polyhedron:
    """Axis-aligned cube centered at the origin, six quadrilateral faces."""
    if not half_extent > 0.0:
        raise ValueError("half_extent must be positive")
    h = float(half_extent)
    vertices = np.array([
        [-h, -h, -h], [h, -h, -h], [h, h, -h], [-h, h, -h],
        [-h, -h, h], [h, -h, h], [h, h, h], [-h, h, h],
    ])
    faces = [
        (0, 3, 2, 1),   # bottom, outward -z
        (4, 5, 6, 7),   # top, outward +z
        (0, 1, 5, 4),   # front, outward -y
        (2, 3, 7, 6),   # back, outward +y
        (0, 4, 7, 3),   # left, outward -x
        (1, 2, 6, 5),   # right, outward +x
    ]
    return build(vertices, faces)


def make_tetrahedron(scale: float = 1.0) -> Polyhedron:
    """Regular tetrahedron centered at the origin."""
    if not scale > 0.0:
        raise ValueError("scale must be positive")
    s = float(scale)
    vertices = s * np.array([
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ])
    faces = [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)]
    return build(vertices, faces)


def make_pex() -> Polyhedron:
    """Twisted double-cone over a regular octagon, 18 vertices / 32 triangles.

    Two parallel regular octagons of diameter 2 sit at heights z = 1 and
    z = -1, the lower one rotated clockwise by pi/20, with apexes at
    (0, 0, +/-1.2); the mesh is the convex hull: one triangle fan per apex
    plus a 16-triangle lateral strip.  Use with :data:`PEX_ORIGIN`.
    """
    pts = [(0.0, 0.0, 1.2)]
    angles = 2.0 * np.pi * np.arange(8) / 8.0
    for t in angles:
        pts.append((np.cos(t), np.sin(t), 1.0))
    for t in angles - np.pi / 20.0:
        pts.append((np.cos(t), np.sin(t), -1.0))
    pts.append((0.0, 0.0, -1.2))
    return convex_hull_mesh(np.array(pts))


def make_badguy() -> Polyhedron:
    """Tetrahedron with an exact saddle-to-saddle connection.

    Two faces meet at 60 degrees along the ridge from (1,1,0) to (1,-42,0)
    and are truncated by two nearly-parallel planes; with the reference
    point :data:`BADGUY_ORIGIN` the ridge and the far vertical edge both
    carry saddles, and the ascending curve leaving the ridge saddle runs
    straight into the other saddle (both lie in the z=0 mirror plane), so
    analysis must report a non-generic input.
    """
    r3 = np.sqrt(3.0)
    vertices = np.array([
        [1.0, 1.0, 0.0],
        [1.0, -42.0, 0.0],
        [-1.15, 44.0, r3 * 2.15],
        [-1.15, 44.0, -r3 * 2.15],
    ])
    faces = [(0, 2, 1), (0, 1, 3), (0, 3, 2), (1, 2, 3)]
    return build(vertices, faces)


def make_random_hull(n: int, seed: int = 0,
                     tolerance: TolerancePolicy | None = None) -> Polyhedron:
    """Convex hull of ``n`` points drawn uniformly on the unit sphere.

    Deterministic per seed.  Degenerate draws are resampled; after 5 failed
    attempts a ``degenerate-hull`` error is raised.
    """
    if n < 4:
        raise ValueError("a hull needs at least 4 points")
    rng = np.random.default_rng(seed)
    last = None
    for _ in range(5):
        pts = rng.normal(size=(n, 3))
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms == 0.0):
            continue
        pts /= norms[:, None]
        try:
            return convex_hull_mesh(pts, tolerance)
        except MeshValidationError as exc:
            last = exc
    raise MeshValidationError(
        "degenerate-hull",
        f"no valid hull after 5 attempts (n={n}, seed={seed}): {last}")
