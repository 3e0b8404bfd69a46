"""Convex polyhedron model: indexed surface mesh, validation, adjacency,
reference point and the radial support function.

``build`` is the validated constructor: it derives edges and face adjacency
from the face cycles, checks closedness, manifoldness, planarity and
convexity, and returns an immutable ``Polyhedron``.  ``with_reference``
attaches an interior reference point and precomputes the per-face and
per-edge projection data every later stage relies on.
"""

from __future__ import annotations

import warnings
from functools import cached_property
from dataclasses import dataclass

import numpy as np

from .errors import InternalInconsistencyError, MeshValidationError
from .geom import TolerancePolicy, Tolerances, as_point


class Polyhedron:
    """Closed convex surface mesh with derived adjacency.

    Do not call the constructor directly; use :func:`build`, which validates
    the input and fills in the derived structure.

    Attributes
    ----------
    vertices : (V, 3) float ndarray
        Vertex coordinates.
    faces : tuple of tuple of int
        Per-face vertex cycles, counterclockwise as seen from outside.
    edges : (E, 2) int ndarray
        Undirected edges as sorted vertex pairs, in lexicographic order.
    edge_faces : (E, 2) int ndarray
        The two incident faces per edge; ``edge_faces[e, 0]`` traverses the
        edge as ``(lo, hi)`` in its cycle, ``edge_faces[e, 1]`` as ``(hi, lo)``.
    face_edges : tuple of tuple of int
        Edge id per boundary side of each face, aligned with the cycle so
        side ``k`` joins ``faces[f][k]`` to ``faces[f][k+1]``.
    face_normals : (F, 3) float ndarray
        Outward unit normals.
    face_offsets : (F,) float ndarray
        Plane offsets: ``<n_f, x> = c_f`` on face ``f``.
    """

    def __init__(self, vertices, faces, face_normals, face_offsets,
                 face_centroids, edges, edge_faces, face_edges,
                 edge_opposite, boundary_sides, tolerance_policy, tol,
                 geometric_slack=0.0):
        self.vertices = vertices
        self.faces = faces
        self.face_normals = face_normals
        self.face_offsets = face_offsets
        self.face_centroids = face_centroids
        self.edges = edges
        self.edge_faces = edge_faces
        self.face_edges = face_edges
        # Third vertex of the incident triangle per (edge, side); -1 when the
        # face is not a triangle.
        self.edge_opposite = edge_opposite
        # Flattened directed boundary sides (face id, tail vertex, head
        # vertex, edge id), one row per half-edge; used by vectorized passes.
        self.boundary_sides = boundary_sides
        self.tolerance_policy = tolerance_policy
        self.tol = tol
        # Extra absolute slack the validation ran with; consistency asserts
        # during tracing must allow geometry to be off by this much.
        self.geometric_slack = geometric_slack

    # -- basic counts ----------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def is_simplicial(self) -> bool:
        return all(len(f) == 3 for f in self.faces)

    @cached_property
    def bbox_diameter(self) -> float:
        ext = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(np.linalg.norm(ext))

    @cached_property
    def face_side_start(self):
        """Row offset of each face's block in ``boundary_sides``."""
        lens = np.fromiter((len(c) for c in self.faces), dtype=np.int64,
                           count=self.n_faces)
        return np.concatenate(([0], np.cumsum(lens)))

    @cached_property
    def side_outward(self):
        """In-plane outward unit normal per ``boundary_sides`` row."""
        bs = self.boundary_sides
        d = self.vertices[bs[:, 2]] - self.vertices[bs[:, 1]]
        d = d / np.linalg.norm(d, axis=1)[:, None]
        return np.cross(d, self.face_normals[bs[:, 0]])

    @cached_property
    def side_tails(self):
        """Tail-vertex coordinates per ``boundary_sides`` row."""
        return self.vertices[self.boundary_sides[:, 1]]

    @cached_property
    def side_prev_row(self):
        """Row index of the cyclically previous side within the same face."""
        lens = np.diff(self.face_side_start)
        s0 = np.repeat(self.face_side_start[:-1], lens)
        k = np.arange(len(self.boundary_sides)) - s0
        return s0 + (k - 1) % np.repeat(lens, lens)

    @cached_property
    def side_edge_sign(self):
        """+1 where a side traverses its edge lower-to-higher id, else -1."""
        bs = self.boundary_sides
        return np.where(self.edges[bs[:, 3], 0] == bs[:, 1], 1.0, -1.0)

    @cached_property
    def vertex_side_index(self):
        """``(order, start)`` grouping ``boundary_sides`` rows by tail vertex.

        ``order[start[v]:start[v+1]]`` lists the rows of the directed sides
        leaving vertex ``v``, one per incident edge.
        """
        tails = self.boundary_sides[:, 1]
        order = np.argsort(tails, kind="stable")
        start = np.searchsorted(tails[order], np.arange(self.n_vertices + 1))
        return order, start

    # -- cyclic vertex neighborhoods ------------------------------------

    @cached_property
    def vertex_cycles(self):
        """Per-vertex cyclic neighborhood.

        Returns a tuple with one entry per vertex: ``(faces, edges)`` where
        both are tuples listing the incident faces and edges in a consistent
        cyclic order around the vertex (edge ``k`` is shared by faces
        ``k-1`` and ``k``).
        """
        succ = {}  # (face, vertex) -> successor vertex in the face cycle
        for fid, cyc in enumerate(self.faces):
            m = len(cyc)
            for k in range(m):
                succ[(fid, cyc[k])] = cyc[(k + 1) % m]
        edge_id = {}
        for eid, (a, b) in enumerate(self.edges):
            edge_id[(int(a), int(b))] = eid
            edge_id[(int(b), int(a))] = eid
        # face on the (u, v) directed side
        half = {}
        for fid, cyc in enumerate(self.faces):
            m = len(cyc)
            for k in range(m):
                half[(cyc[k], cyc[(k + 1) % m])] = fid
        out = []
        start_face = [None] * self.n_vertices
        for fid, cyc in enumerate(self.faces):
            for v in cyc:
                if start_face[v] is None:
                    start_face[v] = fid
        for v in range(self.n_vertices):
            f0 = start_face[v]
            if f0 is None:
                out.append(((), ()))
                continue
            faces_c, edges_c = [], []
            f = f0
            while True:
                faces_c.append(f)
                w = succ[(f, v)]
                edges_c.append(edge_id[(v, w)])
                f = half[(w, v)]
                if f == f0:
                    break
            out.append((tuple(faces_c), tuple(edges_c)))
        return tuple(out)


def _newell_planes(vertices, faces):
    """Newell-method unit normals, offsets and centroids for every face."""
    F = len(faces)
    normals = np.empty((F, 3))
    offsets = np.empty(F)
    centroids = np.empty((F, 3))
    for fid, cyc in enumerate(faces):
        pts = vertices[list(cyc)]
        nxt = np.roll(pts, -1, axis=0)
        n = np.sum(np.cross(pts, nxt), axis=0)
        area2 = np.linalg.norm(n)
        if area2 <= 1e-300:
            raise MeshValidationError(
                "degenerate-face", f"face {fid} has vanishing area")
        n = n / area2
        c = pts.mean(axis=0)
        normals[fid] = n
        offsets[fid] = n @ c
        centroids[fid] = c
    return normals, offsets, centroids


def _derive_topology(faces):
    """Edges, edge->face and face->edge maps; validates closed manifoldness."""
    half = {}
    for fid, cyc in enumerate(faces):
        m = len(cyc)
        for k in range(m):
            u, v = cyc[k], cyc[(k + 1) % m]
            if u == v:
                raise MeshValidationError(
                    "invalid-face", f"face {fid} repeats vertex {u}")
            if (u, v) in half:
                raise MeshValidationError(
                    "non-manifold",
                    f"directed edge ({u},{v}) appears in faces "
                    f"{half[(u, v)]} and {fid}: edge shared by more than two "
                    "faces or inconsistent winding")
            half[(u, v)] = fid
    pairs = set()
    for (u, v) in half:
        if (v, u) not in half:
            raise MeshValidationError(
                "open-surface", f"edge ({u},{v}) has no partner face")
        pairs.add((u, v) if u < v else (v, u))
    edges = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    edge_faces = np.empty_like(edges)
    index = {}
    for eid, (a, b) in enumerate(edges):
        a, b = int(a), int(b)
        edge_faces[eid, 0] = half[(a, b)]
        edge_faces[eid, 1] = half[(b, a)]
        index[(a, b)] = eid
        index[(b, a)] = eid
    face_edges = []
    for fid, cyc in enumerate(faces):
        m = len(cyc)
        face_edges.append(tuple(index[(cyc[k], cyc[(k + 1) % m])]
                                for k in range(m)))
    return edges, edge_faces, tuple(face_edges), index


def build(vertices, faces, tolerance: TolerancePolicy | None = None,
          geometric_slack: float = 0.0) -> Polyhedron:
    """Validate and assemble a convex polyhedron.

    Parameters
    ----------
    vertices : (V, 3) array-like
        Vertex coordinates.
    faces : sequence of vertex-index sequences
        Face cycles, counterclockwise from outside.
    tolerance : TolerancePolicy, optional
        Relative tolerance knob; defaults to ``TolerancePolicy()``.
    geometric_slack : float, optional
        Extra absolute slack added to the planarity and convexity checks.
        Used by the genericity probe when rebuilding perturbed meshes, where
        faces are non-planar at the perturbation scale.

    Returns
    -------
    Polyhedron

    Raises
    ------
    MeshValidationError
        With a distinct ``kind`` for open surfaces, non-manifold edges,
        non-planar faces and non-convex geometry.
    """
    tolerance = tolerance or TolerancePolicy()
    V = np.array(vertices, dtype=float)
    if V.ndim != 2 or V.shape[1] != 3:
        raise MeshValidationError("parse", f"vertex array has shape {V.shape}")
    if not np.all(np.isfinite(V)):
        raise MeshValidationError("parse", "non-finite vertex coordinates")
    if len(V) < 4:
        raise MeshValidationError("parse", "a polyhedron needs >= 4 vertices")
    try:
        faces = tuple(tuple(int(i) for i in f) for f in faces)
    except (TypeError, ValueError) as exc:
        raise MeshValidationError("parse", f"bad face list: {exc}") from exc
    if len(faces) < 4:
        raise MeshValidationError("parse", "a polyhedron needs >= 4 faces")
    used = np.zeros(len(V), dtype=bool)
    for fid, cyc in enumerate(faces):
        if len(cyc) < 3:
            raise MeshValidationError(
                "invalid-face", f"face {fid} has {len(cyc)} vertices")
        if len(set(cyc)) != len(cyc):
            raise MeshValidationError(
                "invalid-face", f"face {fid} repeats a vertex")
        for i in cyc:
            if not (0 <= i < len(V)):
                raise MeshValidationError(
                    "invalid-face", f"face {fid} references vertex {i}")
            used[i] = True
    if not used.all():
        missing = int(np.flatnonzero(~used)[0])
        raise MeshValidationError(
            "unused-vertex", f"vertex {missing} belongs to no face")

    edges, edge_faces, face_edges, _ = _derive_topology(faces)
    ext = V.max(axis=0) - V.min(axis=0)
    diameter = float(np.linalg.norm(ext))
    if diameter <= 0.0:
        raise MeshValidationError("parse", "all vertices coincide")
    tol = tolerance.resolve(diameter)
    planar_eps = tol.point + geometric_slack
    convex_eps = tol.point + geometric_slack

    normals, offsets, centroids = _newell_planes(V, faces)

    # Planarity (trivially satisfied by triangles).
    for fid, cyc in enumerate(faces):
        if len(cyc) == 3:
            continue
        dev = np.abs(V[list(cyc)] @ normals[fid] - offsets[fid]).max()
        if dev > planar_eps:
            raise MeshValidationError(
                "non-planar",
                f"face {fid} deviates from its plane by {dev:.3e} "
                f"(tolerance {planar_eps:.3e})")

    # Orientation sanity: with counterclockwise-from-outside winding the
    # vertex mean must sit behind every face plane.
    mean = V.mean(axis=0)
    front = normals @ mean - offsets
    if np.all(front > convex_eps):
        raise MeshValidationError(
            "non-convex",
            "every face sees the vertex mean on its positive side; "
            "face winding is probably inverted (expected counterclockwise "
            "from outside)")

    # Opposite-vertex table for triangles (used by vectorized passes).
    edge_opposite = np.full(edge_faces.shape, -1, dtype=np.int64)
    for eid, (a, b) in enumerate(edges):
        for side in range(2):
            cyc = faces[edge_faces[eid, side]]
            if len(cyc) == 3:
                edge_opposite[eid, side] = next(
                    i for i in cyc if i != a and i != b)

    # Local convexity at every edge: the neighbor face must stay behind the
    # plane.  Local convexity of a closed genus-0 surface implies global
    # convexity; a direct global check runs as well when it is cheap.
    worst = 0.0
    worst_at = None
    for eid in range(len(edges)):
        for side in range(2):
            f = edge_faces[eid, side]
            g = edge_faces[eid, 1 - side]
            opp = edge_opposite[eid, 1 - side]
            if opp >= 0:
                d = float(normals[f] @ V[opp] - offsets[f])
            else:
                d = float((V[list(faces[g])] @ normals[f] - offsets[f]).max())
            if d > worst:
                worst, worst_at = d, (eid, int(f))
    if worst > convex_eps:
        eid, f = worst_at
        raise MeshValidationError(
            "non-convex",
            f"vertex across edge {eid} lies {worst:.3e} in front of face {f} "
            f"(tolerance {convex_eps:.3e})")
    if len(V) * len(faces) <= 4_000_000:
        d = V @ normals.T - offsets
        worst = float(d.max())
        if worst > convex_eps:
            vid, fid = np.unravel_index(np.argmax(d), d.shape)
            raise MeshValidationError(
                "non-convex",
                f"vertex {int(vid)} lies {worst:.3e} in front of face "
                f"{int(fid)} (tolerance {convex_eps:.3e})")

    if len(V) - len(edges) + len(faces) != 2:
        raise InternalInconsistencyError(
            "convex closed surface with V - E + F = "
            f"{len(V) - len(edges) + len(faces)} != 2")
    if all(len(f) == 3 for f in faces):
        if len(faces) > 2 * len(V) - 4 or len(edges) > 3 * len(V) - 6:
            raise InternalInconsistencyError(
                "simplicial count bounds violated")

    sides = []
    for fid, cyc in enumerate(faces):
        m = len(cyc)
        for k in range(m):
            sides.append((fid, cyc[k], cyc[(k + 1) % m], face_edges[fid][k]))
    boundary_sides = np.array(sides, dtype=np.int64)

    return Polyhedron(
        vertices=V, faces=faces, face_normals=normals, face_offsets=offsets,
        face_centroids=centroids, edges=edges, edge_faces=edge_faces,
        face_edges=face_edges, edge_opposite=edge_opposite,
        boundary_sides=boundary_sides, tolerance_policy=tolerance, tol=tol,
        geometric_slack=geometric_slack)


def triangulate(poly: Polyhedron) -> Polyhedron:
    """Fan-triangulate every non-triangular face from its lowest-index vertex.

    Returns a new validated ``Polyhedron``; triangular faces pass through
    unchanged.
    """
    out = []
    for cyc in poly.faces:
        if len(cyc) == 3:
            out.append(cyc)
            continue
        k = cyc.index(min(cyc))
        rot = cyc[k:] + cyc[:k]
        for j in range(1, len(rot) - 1):
            out.append((rot[0], rot[j], rot[j + 1]))
    return build(poly.vertices, out, poly.tolerance_policy)


def solid_centroid(poly: Polyhedron) -> np.ndarray:
    """Centroid of the enclosed solid via signed tetrahedron decomposition."""
    a = poly.vertices.mean(axis=0)
    vol_total = 0.0
    acc = np.zeros(3)
    for cyc in poly.faces:
        pts = poly.vertices[list(cyc)]
        for j in range(1, len(pts) - 1):
            p, q, r = pts[0], pts[j], pts[j + 1]
            v = float(np.cross(p - a, q - a) @ (r - a)) / 6.0
            vol_total += v
            acc += v * (a + p + q + r) / 4.0
    if vol_total <= 0.0:
        raise InternalInconsistencyError("non-positive enclosed volume")
    return acc / vol_total


@dataclass(frozen=True, eq=False)
class SurfacePoint:
    """A point on the boundary together with its carrier.

    ``carrier_kind`` is ``'face'``, ``'edge'`` or ``'vertex'``; ``edge_t`` is
    the parameter along the edge (0 at the lower-id endpoint) when the
    carrier is an edge.
    """

    position: np.ndarray
    carrier_kind: str
    carrier_id: int
    edge_t: float | None = None


class ReferencedPolyhedron:
    """A polyhedron together with an interior reference point.

    Precomputes the projection data used throughout the analysis: per-face
    foot points (projection of the reference point onto each face plane) and
    plane distances, and per-edge foot points, line distances and foot
    parameters.

    Use :func:`with_reference` to construct one.
    """

    def __init__(self, poly: Polyhedron, origin: np.ndarray, provenance: str):
        self.poly = poly
        self.origin = origin
        self.provenance = provenance
        V, E = poly.vertices, poly.edges
        n, c = poly.face_normals, poly.face_offsets
        self.face_dists = c - n @ origin            # distance of o to <F>
        self.face_feet = origin + self.face_dists[:, None] * n
        a = V[E[:, 0]]
        b = V[E[:, 1]]
        self.edge_vec = b - a
        self.edge_len = np.linalg.norm(self.edge_vec, axis=1)
        self.edge_unit = self.edge_vec / self.edge_len[:, None]
        self.edge_t = np.einsum("ij,ij->i", origin - a, self.edge_vec) \
            / self.edge_len ** 2
        self.edge_feet = a + self.edge_t[:, None] * self.edge_vec
        self.edge_line_dists = np.linalg.norm(origin - self.edge_feet, axis=1)
        self.vertex_heights = np.linalg.norm(V - origin, axis=1)
        if not poly.is_simplicial:
            warnings.warn(
                "non-simplicial input: genericity guarantees and the "
                "perturbation probe assume triangular faces",
                stacklevel=3)

    @cached_property
    def boundary_margins(self) -> np.ndarray:
        """Inward margin of each face's foot point against each boundary side.

        Aligned with ``poly.boundary_sides``: entry for side ``(f, u, v, e)``
        is the in-plane signed distance of the foot of the reference point on
        face ``f``'s plane from the line through edge ``e``, positive toward
        the face interior.
        """
        bs = self.poly.boundary_sides
        f, u, v = bs[:, 0], bs[:, 1], bs[:, 2]
        V = self.poly.vertices
        d = V[v] - V[u]
        d = d / np.linalg.norm(d, axis=1)[:, None]
        inward = np.cross(self.poly.face_normals[f], d)
        return np.einsum("ij,ij->i", inward, self.face_feet[f] - V[u])

    @cached_property
    def side_derivatives(self) -> np.ndarray:
        """Radial-distance derivative at each side's tail vertex along it.

        Aligned with ``poly.boundary_sides``: entry for side ``(f, u, v, e)``
        is the one-sided directional derivative of ``|q - o|`` at vertex
        ``u`` in the unit direction toward ``v`` (dimensionless).
        """
        bs = self.poly.boundary_sides
        u, v = bs[:, 1], bs[:, 2]
        V = self.poly.vertices
        d = V[v] - V[u]
        d = d / np.linalg.norm(d, axis=1)[:, None]
        return np.einsum("ij,ij->i", d, V[u] - self.origin) \
            / self.vertex_heights[u]

    @cached_property
    def corner_offsets(self) -> np.ndarray:
        """Tail vertex minus face foot point per ``boundary_sides`` row.

        The offset of corner ``u`` of face ``f`` from the projection of the
        reference point on ``f``'s plane; the face candidate of the vertex
        gradient rule, before normalization by the vertex height.
        """
        bs = self.poly.boundary_sides
        return self.poly.vertices[bs[:, 1]] - self.face_feet[bs[:, 0]]

    @cached_property
    def corner_offset_norms(self) -> np.ndarray:
        return np.linalg.norm(self.corner_offsets, axis=1)

    @cached_property
    def corner_sines(self) -> np.ndarray:
        """Sector-membership sines per ``boundary_sides`` row.

        Column 0 is the sine of the angle from the side direction to the
        corner offset, column 1 from the offset to the previous side's
        reverse direction; both strictly positive exactly when the offset
        points into the face's corner sector at the tail vertex.  Rows whose
        offset vanishes hold NaN and must be skipped by the caller.
        """
        poly = self.poly
        bs = poly.boundary_sides
        V = poly.vertices
        u = bs[:, 1]
        e1 = V[bs[:, 2]] - V[u]
        e1 /= np.linalg.norm(e1, axis=1)[:, None]
        e2 = V[bs[poly.side_prev_row, 1]] - V[u]
        e2 /= np.linalg.norm(e2, axis=1)[:, None]
        wn = self.corner_offset_norms
        with np.errstate(invalid="ignore", divide="ignore"):
            wu = self.corner_offsets / wn[:, None]
        n = poly.face_normals[bs[:, 0]]
        s1 = np.einsum("ij,ij->i", n, np.cross(e1, wu))
        s2 = np.einsum("ij,ij->i", n, np.cross(wu, e2))
        return np.stack([s1, s2], axis=1)

    # Convenience passthroughs.
    @property
    def vertices(self):
        return self.poly.vertices

    @property
    def faces(self):
        return self.poly.faces

    @property
    def edges(self):
        return self.poly.edges

    @property
    def tol(self) -> Tolerances:
        return self.poly.tol


def with_reference(poly: Polyhedron, origin="centroid") -> ReferencedPolyhedron:
    """Attach a reference point, validating strict interiority.

    Parameters
    ----------
    poly : Polyhedron
    origin : "centroid" or array-like
        The reference point; ``"centroid"`` uses the solid centroid.

    Raises
    ------
    MeshValidationError
        Kind ``reference-point`` when the point is outside or within
        tolerance of the boundary.
    """
    if isinstance(origin, str):
        if origin != "centroid":
            raise MeshValidationError(
                "reference-point", f"unknown origin spec {origin!r}")
        o = solid_centroid(poly)
        provenance = "centroid"
    else:
        o = as_point(origin)
        provenance = "given"
    margins = poly.face_offsets - poly.face_normals @ o
    worst = float(margins.min())
    if worst <= poly.tol.point:
        fid = int(np.argmin(margins))
        raise MeshValidationError(
            "reference-point",
            f"reference point is not strictly interior: margin {worst:.3e} "
            f"at face {fid} (tolerance {poly.tol.point:.3e})")
    return ReferencedPolyhedron(poly, o, provenance)


def radial_function(rp: ReferencedPolyhedron, direction) -> tuple[float, SurfacePoint]:
    """Radial support in direction ``u``: the scale ``lam`` with
    ``o + lam*u`` on the boundary, plus the carrier hit.

    The carrier is refined to an edge or vertex when the hit point lies
    within the point tolerance of one.
    """
    u = as_point(direction)
    nu = float(np.linalg.norm(u))
    if nu == 0.0:
        raise ValueError("direction must be nonzero")
    poly = rp.poly
    dots = poly.face_normals @ u
    with np.errstate(divide="ignore"):
        lam = np.where(dots > 0.0, rp.face_dists / dots, np.inf)
    fid = int(np.argmin(lam))
    lam_min = float(lam[fid])
    if not np.isfinite(lam_min):
        raise InternalInconsistencyError("ray never exits the polyhedron")
    p = rp.origin + lam_min * u
    eps = rp.tol.point
    cyc = poly.faces[fid]
    d_verts = np.linalg.norm(poly.vertices[list(cyc)] - p, axis=1)
    k = int(np.argmin(d_verts))
    if d_verts[k] <= eps:
        return lam_min, SurfacePoint(p, "vertex", cyc[k])
    for k, eid in enumerate(poly.face_edges[fid]):
        a = poly.vertices[cyc[k]]
        b = poly.vertices[cyc[(k + 1) % len(cyc)]]
        ab = b - a
        t = float((p - a) @ ab) / float(ab @ ab)
        if 0.0 <= t <= 1.0 and np.linalg.norm(p - (a + t * ab)) <= eps:
            lo, hi = poly.edges[eid]
            t_edge = float((p - poly.vertices[lo]) @ rp.edge_unit[eid]) \
                / rp.edge_len[eid]
            return lam_min, SurfacePoint(p, "edge", eid, edge_t=t_edge)
    return lam_min, SurfacePoint(p, "face", fid)
