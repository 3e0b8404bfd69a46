"""Dense-sampling oracle for ascending basins.

Independent cross-check of the curve tracer: quasi-uniform surface
samples ascend by repeated small steps along the pointwise gradient
rules until they terminate at an unstable vertex.  A step that carries
a sample over a followed edge merges it onto that edge — exactly as
the continuum flow does — after which it slides along the edge and
continues past endpoints by the pointwise vertex rule; sliding into an
unstable endpoint ends the sample there.  Termination is exact rather
than radius-based: a capture disc around an unstable vertex swallows
neighboring basins whenever a saddle foot lies within the disc, which
happens on meshes with near-vertex feet.  No event-driven tracing or
foot-ray geometry is reused.  The resulting basin census and basin
adjacency are compared against a traced complex; they must agree away
from the traced curves, where the basin decomposition is locally
constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .equilibria import classify_edges, find_equilibria
from .errors import NonGenericError, OracleInconclusiveError
from .flow import _vertex_gradient
from .geom import unit
from .mscomplex import MSComplex
from .poly import ReferencedPolyhedron


@dataclass(frozen=True, eq=False)
class OracleResult:
    """Outcome of a basin-sampling run.

    Attributes
    ----------
    samples : int
        Number of surface samples.
    step : float
        Ascent step length.
    spacing : float
        Mean sample spacing, ``sqrt(total area / samples)``.
    positions : (N, 3) ndarray
        Sample start positions.
    destinations : (N,) int ndarray
        Unstable equilibrium id per sample; ``-1`` where the ascent did
        not converge (boundary-ambiguous).
    origins : (N,) int ndarray
        Stable equilibrium id the mirrored descent reaches per sample;
        ``-1`` where it did not converge.
    census : dict
        Sample count per unstable equilibrium id.
    adjacency : frozenset
        Basin-incidence pairs ``(stable id, unstable id)`` observed over
        the samples.  On a correct decomposition this equals the set of
        (stable, unstable) corner pairs sharing a 2-cell.
    disagreements : tuple
        Sample indices whose (origin, destination) pair matches no cell
        of the compared complex although the sample lies farther than
        twice the spacing from every traced curve.  Empty when no
        complex was given.
    """

    samples: int
    step: float
    spacing: float
    positions: np.ndarray
    destinations: np.ndarray
    origins: np.ndarray
    census: dict
    adjacency: frozenset
    disagreements: tuple

    @property
    def ambiguous(self) -> int:
        return int(np.sum(self.destinations < 0))


def _face_triangles(poly):
    """Fan triangles covering every face: arrays (face, a, b, c, area)."""
    fan = []
    V = poly.vertices
    for fid, cyc in enumerate(poly.faces):
        for k in range(1, len(cyc) - 1):
            fan.append((fid, cyc[0], cyc[k], cyc[k + 1]))
    fan = np.asarray(fan, dtype=np.int64)
    a, b, c = V[fan[:, 1]], V[fan[:, 2]], V[fan[:, 3]]
    areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    return fan, areas


def sample_surface(poly, n: int, seed: int = 0):
    """Area-weighted quasi-uniform boundary samples.

    Returns ``(points, faces)``: sample coordinates and the id of the
    face each sample lies on.
    """
    rng = np.random.default_rng(seed)
    fan, areas = _face_triangles(poly)
    counts = rng.multinomial(n, areas / areas.sum())
    tri_idx = np.repeat(np.arange(len(fan)), counts)
    V = poly.vertices
    a = V[fan[tri_idx, 1]]
    b = V[fan[tri_idx, 2]]
    c = V[fan[tri_idx, 3]]
    uv = rng.random((n, 2))
    flip = uv.sum(axis=1) > 1.0
    uv[flip] = 1.0 - uv[flip]
    pts = a + uv[:, :1] * (b - a) + uv[:, 1:] * (c - a)
    return pts, fan[tri_idx, 0]


def _reproject(rp, pts):
    """Project points to the boundary along rays from the reference point.

    Returns the projected points and the id of the face each ray hits.
    """
    u = pts - rp.origin
    speed = u @ rp.poly.face_normals.T
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(speed > 0.0, rp.face_dists[None, :] / speed, np.inf)
    faces = np.argmin(lam, axis=1)
    scale = lam[np.arange(len(pts)), faces]
    return rp.origin + scale[:, None] * u, faces


class _FaceGeometry:
    """Per-face boundary sides padded to uniform arity.

    Supports the vectorized segment/side crossing test both marching
    directions share.
    """

    def __init__(self, poly):
        arity = max(len(c) for c in poly.faces)
        F = poly.n_faces
        self.pad_va = np.zeros((F, arity, 3))
        self.pad_nu = np.zeros((F, arity, 3))
        self.pad_edge = np.zeros((F, arity), dtype=np.int64)
        self.pad_valid = np.zeros((F, arity), dtype=bool)
        bs = poly.boundary_sides
        pos = np.arange(len(bs)) - poly.face_side_start[bs[:, 0]]
        self.pad_va[bs[:, 0], pos] = poly.vertices[bs[:, 1]]
        self.pad_nu[bs[:, 0], pos] = poly.side_outward
        self.pad_edge[bs[:, 0], pos] = bs[:, 3]
        self.pad_valid[bs[:, 0], pos] = True

    def exit_sides(self, f_arr, q0s, q1s):
        """First boundary-side crossing of each in-plane segment q0→q1.

        Returns ``(has, edge, x)`` per segment: whether the segment
        leaves face ``f_arr`` through a side, the crossed edge id, and
        the crossing point.
        """
        va = self.pad_va[f_arr]
        nu = self.pad_nu[f_arr]
        d0 = np.einsum("kas,kas->ka", q0s[:, None, :] - va, nu)
        d1 = np.einsum("kas,kas->ka", q1s[:, None, :] - va, nu)
        cand = self.pad_valid[f_arr] & (d1 > 1e-13) & (d0 <= 1e-13)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(cand, d0 / (d0 - d1), np.inf)
        rows = np.arange(len(f_arr))
        best = np.argmin(s, axis=1)
        s_best = s[rows, best]
        has = np.isfinite(s_best)
        x = q0s + np.clip(s_best, 0.0, 1.0)[:, None] * (q1s - q0s)
        return has, self.pad_edge[f_arr, best], x


class _Ascent:
    """Vectorized ascending march for all samples.

    Face-carrier samples step along their face gradient; the in-plane
    ray within one face is followed exactly, and a step segment that
    reaches a boundary side hands over at the exact crossing point —
    onto the edge itself when it is followed (the flow merges there),
    into the neighboring face when it is crossed.  Edge-carrier samples
    slide away from the edge's foot; passing an endpoint invokes the
    pointwise vertex rule, which either terminates the sample (unstable
    vertex), continues into a face, or continues along the next edge.
    Every ascending path ends by sliding into an unstable vertex, so
    vertex events are the sole exact termination; there is no distance
    capture.
    """

    def __init__(self, rp, classification, equilibria, pts, faces, step,
                 geom=None):
        self.rp = rp
        self.poly = rp.poly
        self.classification = classification
        self.step = step
        self.geom = geom if geom is not None else _FaceGeometry(rp.poly)
        n = len(pts)
        self.q = pts.copy()
        self.face = faces.astype(np.int64).copy()
        self.on_edge = np.zeros(n, dtype=bool)
        self.edge = np.zeros(n, dtype=np.int64)
        self.edge_t = np.zeros(n)
        self.edge_sign = np.zeros(n)
        self.dest = np.full(n, -1, dtype=np.int64)
        self.alive = np.ones(n, dtype=bool)

        self.is_followed = classification.followed_mask

        self.u_by_vertex = {eq.carrier_id: eq.id for eq in equilibria
                            if eq.kind == "unstable"}

    def _snap_rows(self, rows, e_arr, x_arr):
        """Merge samples ``rows`` onto followed edges at points ``x_arr``."""
        rp = self.rp
        a = self.poly.vertices[self.poly.edges[e_arr][:, 0]]
        t = np.einsum("ks,ks->k", x_arr - a, rp.edge_unit[e_arr]) \
            / rp.edge_len[e_arr]
        t = np.clip(t, 0.0, 1.0)
        self.on_edge[rows] = True
        self.edge[rows] = e_arr
        self.edge_t[rows] = t
        self.edge_sign[rows] = np.where(t >= rp.edge_t[e_arr], 1.0, -1.0)
        self.q[rows] = a + (t * rp.edge_len[e_arr])[:, None] \
            * rp.edge_unit[e_arr]

    def _enter_face(self, i, start, direction):
        moved = start + self.step * direction
        pos, face = _reproject(self.rp, moved[None, :])
        self.on_edge[i] = False
        self.q[i] = pos[0]
        self.face[i] = int(face[0])

    def _vertex_event(self, i, w):
        """Continue sample ``i`` past vertex ``w`` by the vertex rule."""
        rp = self.rp
        if w in self.u_by_vertex:
            self.dest[i] = self.u_by_vertex[w]
            self.alive[i] = False
            return
        try:
            grad = _vertex_gradient(rp, w, self.classification)
        except NonGenericError:
            self.alive[i] = False
            return
        pos_w = self.poly.vertices[w]
        if grad.source == "vertex-face":
            self._enter_face(i, pos_w, unit(grad.vector))
        elif grad.source == "vertex-edge":
            e2 = grad.generator
            lo, hi = (int(v) for v in self.poly.edges[e2])
            if lo == w:
                self.edge_t[i] = 0.0
                self.edge_sign[i] = 1.0
            else:
                self.edge_t[i] = 1.0
                self.edge_sign[i] = -1.0
            self.on_edge[i] = True
            self.edge[i] = e2
            self.q[i] = pos_w.copy()
        else:
            # Zero gradient at a vertex not in the unstable census:
            # treat as non-convergence.
            self.alive[i] = False

    def _step_faces(self, idx):
        """March face carriers one step; returns those still face-borne.

        Within a face the march follows the exact gradient ray.  A step
        segment reaching a boundary side transfers at the crossing
        point: onto the edge when followed, into the adjacent face when
        crossed.  Nothing moves farther than one step per call, so no
        event can be jumped over.
        """
        rp = self.rp
        qa = self.q[idx]
        f_old = self.face[idx]
        g = qa - rp.face_feet[f_old]
        gn = np.linalg.norm(g, axis=1)
        gn[gn == 0.0] = 1.0
        moved = qa + self.step * (g / gn[:, None])
        has, e_hit, x_hit = self.geom.exit_sides(f_old, qa, moved)
        snap = has & self.is_followed[np.where(has, e_hit, 0)]
        if np.any(snap):
            self._snap_rows(idx[snap], e_hit[snap], x_hit[snap])
        cross = has & ~snap
        if np.any(cross):
            e_c = e_hit[cross]
            self.q[idx[cross]] = x_hit[cross]
            self.face[idx[cross]] = \
                self.poly.edge_faces[e_c].sum(axis=1) - f_old[cross]
        stay = ~has
        self.q[idx[stay]] = moved[stay]
        return idx[~snap]

    def _step_edges(self, idx):
        rp = self.rp
        e_arr = self.edge[idx]
        t_new = self.edge_t[idx] + \
            self.edge_sign[idx] * self.step / rp.edge_len[e_arr]
        passed = (t_new <= 0.0) | (t_new >= 1.0)
        keep = idx[~passed]
        if len(keep):
            tk = t_new[~passed]
            ek = e_arr[~passed]
            self.edge_t[keep] = tk
            a = self.poly.vertices[self.poly.edges[ek][:, 0]]
            self.q[keep] = a + (tk * rp.edge_len[ek])[:, None] \
                * rp.edge_unit[ek]
        for k in np.nonzero(passed)[0]:
            i = idx[k]
            e = int(e_arr[k])
            side = 0 if t_new[k] <= 0.0 else 1
            self._vertex_event(i, int(self.poly.edges[e][side]))

    def run(self, budget):
        for _ in range(budget):
            idx = np.nonzero(self.alive)[0]
            if len(idx) == 0:
                break
            on_e = self.on_edge[idx]
            edges_idx = idx[on_e]
            faces_idx = idx[~on_e]
            if len(edges_idx):
                self._step_edges(edges_idx)
            if len(faces_idx):
                self._step_faces(faces_idx)
        return self.dest


def _descend(rp, equilibria, geom, pts, faces, step, budget):
    """March every sample down to its stable origin.

    The descending mirror of `_Ascent`: within a face, straight toward
    the face's foot; a boundary crossing passes into the neighboring
    face at the exact crossing point.  A descent segment can only meet
    crossed edges — a followed edge keeps both feet on its own sides,
    so an in-face segment toward the foot never reaches one — and the
    walk captures at the foot of a face carrying a stable equilibrium,
    which attracts its whole neighborhood.  Returns the stable id per
    sample, ``-1`` where the budget ran out.
    """
    poly = rp.poly
    stable_by_face = np.full(poly.n_faces, -1, dtype=np.int64)
    for eq in equilibria:
        if eq.kind == "stable":
            stable_by_face[eq.carrier_id] = eq.id
    q = pts.copy()
    f = faces.astype(np.int64).copy()
    orig = np.full(len(pts), -1, dtype=np.int64)
    alive = np.ones(len(pts), dtype=bool)
    for _ in range(budget):
        idx = np.nonzero(alive)[0]
        if len(idx) == 0:
            break
        qa = q[idx]
        fa = f[idx]
        g = rp.face_feet[fa] - qa
        gn = np.linalg.norm(g, axis=1)
        cap = (stable_by_face[fa] >= 0) & (gn <= 2.0 * step)
        if np.any(cap):
            orig[idx[cap]] = stable_by_face[fa[cap]]
            alive[idx[cap]] = False
        rest = ~cap
        if not np.any(rest):
            continue
        ridx = idx[rest]
        fr = fa[rest]
        qr = qa[rest]
        gnr = gn[rest]
        gnr[gnr == 0.0] = 1.0
        moved = qr + step * (g[rest] / gnr[:, None])
        has, e_hit, x_hit = geom.exit_sides(fr, qr, moved)
        if np.any(has):
            q[ridx[has]] = x_hit[has]
            f[ridx[has]] = poly.edge_faces[e_hit[has]].sum(axis=1) - fr[has]
        stay = ~has
        q[ridx[stay]] = moved[stay]
    return orig


def oracle_basins(rp: ReferencedPolyhedron, samples: int = 10000,
                  step: float | None = None, seed: int = 0,
                  against: MSComplex | None = None) -> OracleResult:
    """Sample the boundary and flow every sample both ways.

    Each quasi-uniform surface sample ascends by pointwise gradient
    steps to an unstable vertex and descends by the mirrored walk to a
    stable foot point, yielding its basin-incidence pair
    ``(origin, destination)``.  The set of observed pairs is the
    sampled counterpart of the complex's 2-cell corner incidences.

    Parameters
    ----------
    rp : ReferencedPolyhedron
    samples : int
    step : float, optional
        March step length; defaults to 1% of the bounding-box diameter.
    seed : int
    against : MSComplex, optional
        When given, each sample's incidence pair is checked against the
        complex's cells and the disagreement list is populated with the
        samples that match no cell while lying clear of every curve.

    Returns
    -------
    OracleResult

    Raises
    ------
    OracleInconclusiveError
        If more than 1% of samples fail to converge.
    """
    poly = rp.poly
    if step is None:
        step = 0.01 * poly.bbox_diameter
    pts, faces = sample_surface(poly, samples, seed)

    classification = classify_edges(rp)
    equilibria, _report = find_equilibria(rp, classification)
    if not any(eq.kind == "unstable" for eq in equilibria):
        raise OracleInconclusiveError(
            "no unstable equilibrium exists; every ascent would diverge")
    geom = _FaceGeometry(poly)
    walker = _Ascent(rp, classification, equilibria, pts, faces, step, geom)
    budget = int(np.ceil(10.0 * poly.bbox_diameter / step))
    dest = walker.run(budget)
    orig = _descend(rp, equilibria, geom, pts, faces, step, budget)

    census = {}
    for uid in sorted(walker.u_by_vertex.values()):
        census[int(uid)] = int(np.sum(dest == uid))
    n_amb = int(np.sum((dest < 0) | (orig < 0)))
    if n_amb > 0.01 * samples:
        raise OracleInconclusiveError(
            f"{n_amb} of {samples} samples did not converge")

    spacing = float(np.sqrt(_total_area(poly) / samples))
    valid = (orig >= 0) & (dest >= 0)
    adjacency = frozenset(
        (int(s), int(u)) for s, u in zip(orig[valid], dest[valid]))

    disagreements = ()
    if against is not None:
        cell_pairs, polylines = _against_reference(against)
        curve_dist = _distance_to_curves(pts, polylines, spacing)
        away = curve_dist > 2.0 * spacing
        matches = np.array([(int(s), int(u)) in cell_pairs
                            for s, u in zip(orig, dest)])
        disagreements = tuple(
            int(i) for i in np.nonzero(valid & away & ~matches)[0])

    return OracleResult(
        samples=samples, step=float(step), spacing=spacing, positions=pts,
        destinations=dest, origins=orig, census=census, adjacency=adjacency,
        disagreements=disagreements)


def _total_area(poly) -> float:
    _fan, areas = _face_triangles(poly)
    return float(areas.sum())


def _densify(polylines, spacing: float):
    """Points along every polyline at most ``spacing / 2`` apart."""
    out = []
    for pl in polylines:
        pl = np.asarray(pl, dtype=float)
        out.append(pl)
        for k in range(len(pl) - 1):
            seg = pl[k + 1] - pl[k]
            length = float(np.linalg.norm(seg))
            extra = int(np.ceil(2.0 * length / spacing)) - 1
            if extra > 0:
                t = (np.arange(1, extra + 1) / (extra + 1))[:, None]
                out.append(pl[k] + t * seg)
    return np.concatenate(out, axis=0)


def _distance_to_curves(pts, polylines, spacing):
    if not polylines:
        return np.full(len(pts), np.inf)
    soup = _densify(polylines, spacing)
    d, _ = cKDTree(soup).query(pts)
    return d


def complex_adjacency(msc: MSComplex) -> frozenset:
    """(stable id, unstable id) corner pairs over the cells of a complex."""
    return frozenset((c.corners[0], c.corners[2]) for c in msc.cells)


def _against_reference(against):
    """Cell-incidence pairs and curve polylines of a complex or document."""
    if isinstance(against, MSComplex):
        return complex_adjacency(against), [c.polyline for c in against.curves]
    from .document import document_adjacency, document_polylines
    return document_adjacency(against), document_polylines(against)


def openness_violations(result: OracleResult, polylines) -> tuple:
    """Samples violating local basin openness.

    A violation is a non-ambiguous sample farther than twice the sample
    spacing from every curve polyline whose neighborhood (samples within
    that same radius) contains a non-ambiguous sample of a different
    destination.  On a correctly decomposed surface there are none,
    because any two basins are separated by a curve.
    """
    pts = result.positions
    dest = result.destinations
    r = 2.0 * result.spacing
    away = _distance_to_curves(pts, polylines, result.spacing) > r
    pairs = cKDTree(pts).query_pairs(r, output_type="ndarray")
    di, dj = dest[pairs[:, 0]], dest[pairs[:, 1]]
    mixed = (di != dj) & (di >= 0) & (dj >= 0)
    bad = set()
    for i, j in pairs[mixed]:
        if away[i]:
            bad.add(int(i))
        if away[j]:
            bad.add(int(j))
    return tuple(sorted(bad))


def check_against_curves(result: OracleResult, msc: MSComplex):
    """Convenience: openness violations against a complex's own curves."""
    return openness_violations(result, [c.polyline for c in msc.curves])
