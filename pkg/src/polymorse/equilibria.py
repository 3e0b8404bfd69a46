"""Edge classification and equilibrium detection for the radial distance
function.

An edge is *followed* when the feet of the reference point on both incident
face planes lie strictly on their faces' sides of the edge line: ascending
flow then travels along the edge.  When exactly one foot falls across the
line the edge is *crossed* and flow passes over it into the face whose foot
failed the test.  Equilibria of the radial distance are the strictly
interior face feet (stable), the strictly interior feet of followed edges
(saddles) and the vertices all of whose incident edges descend (unstable).

Margins that land inside tolerance are never rounded to a side; they are
returned as findings in a :class:`NondegeneracyReport` so callers can refuse
to build a flow structure on near-degenerate input.
"""

from __future__ import annotations

import gc
from dataclasses import dataclass

import numpy as np

from .errors import InternalInconsistencyError
from .geom import Line3, Plane, halfplane_margin, in_open_halfplane, HalfplaneSide, unit
from .poly import ReferencedPolyhedron, SurfacePoint


@dataclass(frozen=True)
class EdgeClass:
    """Classification of a single edge.

    Attributes
    ----------
    kind : str
        ``"followed"`` or ``"crossed"``.
    from_face, to_face : int or None
        For crossed edges, ascending flow leaves ``from_face`` and continues
        into ``to_face``; ``None`` on followed edges.
    """

    kind: str
    from_face: int | None = None
    to_face: int | None = None


@dataclass(frozen=True)
class Finding:
    """One near-degenerate measurement: a margin inside tolerance.

    ``margin`` is in length units of the mesh (for ``vertex-tangency`` it is
    the absolute edge-direction derivative times the vertex height, which
    has length units as well).
    """

    kind: str
    entity_kind: str
    entity_id: int
    margin: float
    detail: str = ""

    def __str__(self):
        s = (f"{self.kind} at {self.entity_kind} {self.entity_id} "
             f"(margin {self.margin:.3e})")
        if self.detail:
            s += f": {self.detail}"
        return s


@dataclass(frozen=True)
class NondegeneracyReport:
    """Degeneracy findings collected while classifying and locating."""

    findings: tuple[Finding, ...]

    @property
    def status(self) -> str:
        return "degenerate" if self.findings else "generic-candidate"


@dataclass(frozen=True, eq=False)
class EdgeClassification:
    """Classification of every edge plus the margins behind the calls.

    ``classes[e]`` is the :class:`EdgeClass` of edge ``e``, or ``None`` when
    the classification was ambiguous within tolerance (a corresponding
    finding is then present).  ``margins[e]`` holds the two signed halfplane
    margins, one per incident face in ``edge_faces`` order.
    ``followed_mask[e]`` is the boolean form of ``is_followed``.
    """

    classes: tuple
    findings: tuple[Finding, ...]
    margins: np.ndarray
    followed_mask: np.ndarray

    def __getitem__(self, edge_id: int) -> EdgeClass | None:
        return self.classes[edge_id]

    def is_followed(self, edge_id: int) -> bool:
        return bool(self.followed_mask[edge_id])


@dataclass(frozen=True, eq=False)
class Equilibrium:
    """A located equilibrium point of the radial distance function.

    Attributes
    ----------
    id : int
        Stable index within the analysis (stables, then saddles, then
        unstables, each block ordered by carrier id).
    kind : str
        ``"stable"``, ``"saddle"`` or ``"unstable"``.
    location : SurfacePoint
        Position and carrier (face for stable, edge for saddle, vertex for
        unstable).
    height : float
        Distance from the reference point.
    """

    id: int
    kind: str
    location: SurfacePoint

    @property
    def carrier_kind(self) -> str:
        return self.location.carrier_kind

    @property
    def carrier_id(self) -> int:
        return self.location.carrier_id

    @property
    def position(self) -> np.ndarray:
        return self.location.position

    height: float = 0.0

    def __str__(self):
        return (f"{self.kind} #{self.id} on {self.carrier_kind} "
                f"{self.carrier_id} at height {self.height:.6g}")


def classify_edge(rp: ReferencedPolyhedron, edge_id: int) -> EdgeClass | Finding:
    """Classify one edge by the two halfplane membership tests.

    Returns an :class:`EdgeClass`, or a :class:`Finding` when either foot
    lies within tolerance of the edge line (ambiguous classification).

    Raises
    ------
    InternalInconsistencyError
        If both feet fall strictly across the edge line, which is impossible
        over a convex polyhedron with an interior reference point.
    """
    poly = rp.poly
    a, b = (int(i) for i in poly.edges[edge_id])
    line = Line3.through(poly.vertices[a], poly.vertices[b])
    states, margins = [], []
    for side in range(2):
        f = int(poly.edge_faces[edge_id, side])
        plane = Plane(normal=poly.face_normals[f],
                      offset=float(poly.face_offsets[f]))
        witness = poly.face_centroids[f]
        states.append(in_open_halfplane(rp.face_feet[f], plane, line, witness,
                                        rp.tol.halfplane))
        margins.append(halfplane_margin(rp.face_feet[f], plane, line, witness))
    if HalfplaneSide.ON_BOUNDARY in states:
        return Finding("projection-on-face-boundary", "edge", int(edge_id),
                       float(min(abs(m) for m in margins)),
                       detail="edge classification ambiguous")
    inside = [s is HalfplaneSide.INSIDE for s in states]
    if all(inside):
        return EdgeClass("followed")
    if not any(inside):
        raise InternalInconsistencyError(
            f"both face feet fall across edge {edge_id}; convexity or "
            "tolerance configuration is broken")
    failed = 0 if not inside[0] else 1
    return EdgeClass("crossed",
                     from_face=int(poly.edge_faces[edge_id, 1 - failed]),
                     to_face=int(poly.edge_faces[edge_id, failed]))


def classify_edges(rp: ReferencedPolyhedron) -> EdgeClassification:
    """Classify every edge at once (vectorized margins)."""
    poly = rp.poly
    eps = rp.tol.halfplane
    E = poly.n_edges
    bs = poly.boundary_sides
    m = np.full((E, 2), np.nan)
    col = (poly.edge_faces[bs[:, 3], 0] != bs[:, 0]).astype(int)
    m[bs[:, 3], col] = rp.boundary_margins
    if np.any(np.isnan(m)):
        raise InternalInconsistencyError("edge with a missing face side")
    ambiguous = np.abs(m).min(axis=1) <= eps
    followed = ~ambiguous & (m[:, 0] > 0.0) & (m[:, 1] > 0.0)
    both_out = ~ambiguous & (m[:, 0] < 0.0) & (m[:, 1] < 0.0)
    if np.any(both_out):
        e = int(np.flatnonzero(both_out)[0])
        raise InternalInconsistencyError(
            f"both face feet fall across edge {e}; convexity or "
            "tolerance configuration is broken")
    classes: list[EdgeClass | None] = [None] * E
    findings = []
    followed_class = EdgeClass("followed")
    for e in np.flatnonzero(ambiguous):
        findings.append(Finding(
            "projection-on-face-boundary", "edge", int(e),
            float(np.abs(m[e]).min()),
            detail="edge classification ambiguous"))
    for e in np.flatnonzero(followed):
        classes[e] = followed_class
    crossed = ~ambiguous & ~followed
    failed = (m[:, 0] >= 0.0).astype(int)
    for e in np.flatnonzero(crossed):
        k = failed[e]
        classes[e] = EdgeClass(
            "crossed",
            from_face=int(poly.edge_faces[e, 1 - k]),
            to_face=int(poly.edge_faces[e, k]))
    return EdgeClassification(tuple(classes), tuple(findings), m, followed)


def is_vertex_equilibrium(rp: ReferencedPolyhedron, vertex_id: int):
    """Vertex status plus its per-edge directional derivatives.

    Returns ``(status, derivatives)`` where status is ``"unstable"`` or
    ``"regular"`` and ``derivatives[k]`` is the one-sided derivative of the
    radial distance along incident edge ``k`` (in the cyclic order of
    ``poly.vertex_cycles``), dimensionless.
    """
    poly = rp.poly
    _, edges_c = poly.vertex_cycles[vertex_id]
    q = poly.vertices[vertex_id]
    h = float(rp.vertex_heights[vertex_id])
    derivs = np.empty(len(edges_c))
    for k, e in enumerate(edges_c):
        a, b = (int(i) for i in poly.edges[e])
        other = b if a == vertex_id else a
        derivs[k] = unit(poly.vertices[other] - q) @ (q - rp.origin) / h
    status = "unstable" if np.all(derivs < -rp.tol.rel) else "regular"
    return status, derivs


def find_equilibria(rp: ReferencedPolyhedron,
                    classification: EdgeClassification | None = None):
    """Locate every equilibrium and collect degeneracy findings.

    Parameters
    ----------
    rp : ReferencedPolyhedron
    classification : EdgeClassification, optional
        Reused if already computed; classified afresh otherwise.

    Returns
    -------
    (list of Equilibrium, NondegeneracyReport)
        Equilibria ordered stable, saddle, unstable; blocks ordered by
        carrier id.  The report carries every margin that fell inside
        tolerance, including the classification's own findings.
    """
    poly = rp.poly
    tol = rp.tol
    if classification is None:
        classification = classify_edges(rp)
    findings = list(classification.findings)

    # Stable: face feet strictly interior to their faces.
    fm = np.full(poly.n_faces, np.inf)
    np.minimum.at(fm, poly.boundary_sides[:, 0], rp.boundary_margins)
    stable_faces = np.flatnonzero(fm > tol.point)
    for f in np.flatnonzero(np.abs(fm) <= tol.point):
        findings.append(Finding(
            "projection-on-face-boundary", "face", int(f), float(fm[f])))

    # Saddles: interior feet of followed edges.
    end_margin = np.minimum(rp.edge_t, 1.0 - rp.edge_t) * rp.edge_len
    followed = classification.followed_mask
    saddle_edges = np.flatnonzero(followed & (end_margin > tol.point))
    for e in np.flatnonzero(followed & (np.abs(end_margin) <= tol.point)):
        findings.append(Finding(
            "projection-at-edge-endpoint", "edge", int(e),
            float(end_margin[e])))

    # Unstable: all incident edges descend.
    tails = poly.boundary_sides[:, 1]
    dmax = np.full(poly.n_vertices, -np.inf)
    np.maximum.at(dmax, tails, rp.side_derivatives)
    unstable_verts = np.flatnonzero(dmax < -tol.rel)
    dmin_abs = np.full(poly.n_vertices, np.inf)
    np.minimum.at(dmin_abs, tails, np.abs(rp.side_derivatives))
    for v in np.flatnonzero(dmin_abs <= tol.rel):
        findings.append(Finding(
            "vertex-tangency", "vertex", int(v),
            float(dmin_abs[v] * rp.vertex_heights[v])))

    # Bulk construction allocates a few objects per equilibrium; on large
    # hulls the collector otherwise rescans the growing list repeatedly.
    equilibria = []
    gc_was_on = gc.isenabled()
    gc.disable()
    try:
        for f in stable_faces:
            equilibria.append(Equilibrium(
                id=len(equilibria), kind="stable",
                location=SurfacePoint(rp.face_feet[f].copy(), "face", int(f)),
                height=float(rp.face_dists[f])))
        for e in saddle_edges:
            equilibria.append(Equilibrium(
                id=len(equilibria), kind="saddle",
                location=SurfacePoint(rp.edge_feet[e].copy(), "edge", int(e),
                                      edge_t=float(rp.edge_t[e])),
                height=float(rp.edge_line_dists[e])))
        for v in unstable_verts:
            equilibria.append(Equilibrium(
                id=len(equilibria), kind="unstable",
                location=SurfacePoint(poly.vertices[v].copy(), "vertex",
                                      int(v)),
                height=float(rp.vertex_heights[v])))
    finally:
        if gc_was_on:
            gc.enable()
    return equilibria, NondegeneracyReport(tuple(findings))
