"""Extended-gradient evaluation and ascending-curve tracing.

The radial distance function is smooth on face interiors but only piecewise
smooth across edges and vertices; its ascending flow is recovered by a small
rule table.  On a face interior the gradient is the in-plane component of
the radial direction; on a followed edge it points along the edge away from
the edge's foot point; on a crossed edge flow passes into the receiving
face; at a regular vertex the unique longest qualified candidate wins.

Curves are polygonal: inside a face every ascending curve lies on a ray
leaving the face's foot point, so tracing is event-driven (face exits, edge
slides, vertex rules) and needs no numeric integration.  Configurations in
which a rule would have to break a tie — a curve grazing a vertex, a hit on
another saddle's foot, tied candidate lengths — raise ``NonGenericError``
instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .equilibria import (
    EdgeClassification,
    Equilibrium,
    Finding,
    classify_edges,
    find_equilibria,
)
from .errors import (
    InternalInconsistencyError,
    MeshValidationError,
    NonGenericError,
    ProbeInconclusiveError,
)
from .geom import norm, unit
from .poly import ReferencedPolyhedron, SurfacePoint, build, with_reference


@dataclass(frozen=True, eq=False)
class ExtendedGradient:
    """Gradient value at a boundary point.

    Attributes
    ----------
    vector : (3,) ndarray
        The gradient; zero exactly when the point is an equilibrium.
    source : str
        Which rule produced it: ``face-interior``, ``followed-edge``,
        ``crossed-edge``, ``vertex-face``, ``vertex-edge`` or
        ``zero-at-equilibrium``.
    generator : int or None
        Id of the face or edge whose candidate won (``None`` for zero).
    """

    vector: np.ndarray
    source: str
    generator: int | None = None

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True, eq=False)
class CurveSegment:
    """One straight piece of an ascending curve.

    ``carrier_kind`` is ``"face"`` or ``"edge"`` (only followed edges carry
    curve segments); ``carrier_distance`` is the distance from the reference
    point to the carrier's affine hull.
    """

    start: SurfacePoint
    end: SurfacePoint
    carrier_kind: str
    carrier_id: int
    carrier_distance: float


@dataclass(frozen=True, eq=False)
class AscendingCurve:
    """A maximal ascending curve between equilibria, stored ascending.

    Attributes
    ----------
    origin, destination : Equilibrium
        Start (stable or saddle) and end (saddle or unstable).
    role : str
        ``"saddle-to-unstable"`` for the two curves leaving a saddle upward,
        ``"stable-to-saddle"`` for the two arriving from below.
    segments : tuple of CurveSegment
        Consecutive segments share endpoints; carrier distances strictly
        increase and no carrier repeats.
    """

    origin: Equilibrium
    destination: Equilibrium
    role: str
    segments: tuple

    @cached_property
    def polyline(self) -> np.ndarray:
        pts = [self.segments[0].start.position]
        pts.extend(seg.end.position for seg in self.segments)
        return np.asarray(pts)

    @property
    def carriers(self) -> tuple:
        return tuple((s.carrier_kind, s.carrier_id) for s in self.segments)

    @property
    def carrier_distances(self) -> tuple:
        return tuple(s.carrier_distance for s in self.segments)


def _face_gradient(rp, q, f):
    w = q - rp.face_feet[f]
    h = norm(q - rp.origin)
    return w / h


def _vertex_gradient(rp, v, edge_classes) -> ExtendedGradient:
    """Gradient rule at a vertex: zero if unstable, else the unique face
    candidate, else the longest followed-edge candidate."""
    poly = rp.poly
    tol = rp.tol
    bs = poly.boundary_sides
    order, start = poly.vertex_side_index
    rows = order[start[v]:start[v + 1]]
    derivs = rp.side_derivatives[rows]
    if derivs.max() < -tol.rel:
        return ExtendedGradient(np.zeros(3), "zero-at-equilibrium")

    h = float(rp.vertex_heights[v])
    wn = rp.corner_offset_norms[rows]
    sines = rp.corner_sines[rows]
    live = wn > tol.point
    s1, s2 = sines[:, 0], sines[:, 1]
    near = live & (np.minimum(np.abs(s1), np.abs(s2)) <= tol.rel) \
        & (s1 > -tol.rel) & (s2 > -tol.rel)
    if near.any():
        i = int(np.flatnonzero(near)[0])
        raise NonGenericError([Finding(
            "gradient-length-tie", "vertex", int(v),
            float(min(abs(s1[i]), abs(s2[i])) * wn[i]),
            detail=f"face {int(bs[rows[i], 0])} candidate grazes its "
                   "sector boundary")])
    hits = np.flatnonzero(live & (s1 > 0.0) & (s2 > 0.0))
    if len(hits) > 1:
        raise InternalInconsistencyError(
            f"vertex {v} has {len(hits)} qualifying face candidates "
            f"(faces {[int(bs[rows[i], 0]) for i in hits]}); "
            "expected at most one")
    if len(hits) == 1:
        r = rows[int(hits[0])]
        return ExtendedGradient(rp.corner_offsets[r] / h, "vertex-face",
                                int(bs[r, 0]))

    rank = np.argsort(derivs)[::-1]
    best = rank[0]
    if derivs[best] <= tol.rel:
        raise NonGenericError([Finding(
            "vertex-tangency", "vertex", int(v),
            float(abs(derivs[best])) * h,
            detail="no strictly ascending direction at a regular vertex")])
    if len(rank) > 1 and derivs[rank[1]] > tol.rel \
            and derivs[best] - derivs[rank[1]] <= tol.tie:
        raise NonGenericError([Finding(
            "gradient-length-tie", "vertex", int(v),
            float(derivs[best] - derivs[rank[1]]) * h,
            detail=f"edges {int(bs[rows[best], 3])} and "
                   f"{int(bs[rows[rank[1]], 3])} tie")])
    e = int(bs[rows[best], 3])
    if not edge_classes.is_followed(e):
        raise InternalInconsistencyError(
            f"vertex {v}: best ascending candidate lies on edge {e}, which "
            "is not followed")
    d = float(poly.side_edge_sign[rows[best]]) * rp.edge_unit[e]
    return ExtendedGradient(float(derivs[best]) * d, "vertex-edge", e)


def extended_gradient(rp: ReferencedPolyhedron, q: SurfacePoint,
                      edge_classes: EdgeClassification) -> ExtendedGradient:
    """Evaluate the extended gradient of the radial distance at ``q``.

    Parameters
    ----------
    rp : ReferencedPolyhedron
    q : SurfacePoint
        Boundary point with its carrier.
    edge_classes : EdgeClassification
        Classification from :func:`polymorse.equilibria.classify_edges`.

    Returns
    -------
    ExtendedGradient
        Zero vector exactly at equilibria; otherwise a tangent vector whose
        length is the one-sided directional derivative of ``|q - o|`` in its
        own direction.

    Raises
    ------
    NonGenericError
        If the value would depend on breaking a tie (candidate lengths or
        sector membership within tolerance).
    InternalInconsistencyError
        If the rule table reaches a state excluded by convexity.
    """
    tol = rp.tol
    pos = q.position
    if q.carrier_kind == "face":
        f = q.carrier_id
        w = pos - rp.face_feet[f]
        if norm(w) <= tol.point:
            return ExtendedGradient(np.zeros(3), "zero-at-equilibrium")
        return ExtendedGradient(_face_gradient(rp, pos, f), "face-interior", f)
    if q.carrier_kind == "edge":
        e = q.carrier_id
        cls = edge_classes[e]
        if cls is None:
            raise NonGenericError([Finding(
                "projection-on-face-boundary", "edge", int(e),
                float(np.abs(edge_classes.margins[e]).min()),
                detail="gradient undefined on an ambiguously classified edge")])
        if cls.kind == "followed":
            w = pos - rp.edge_feet[e]
            if norm(w) <= tol.point:
                return ExtendedGradient(np.zeros(3), "zero-at-equilibrium")
            h = norm(pos - rp.origin)
            return ExtendedGradient(w / h, "followed-edge", int(e))
        return ExtendedGradient(
            _face_gradient(rp, pos, cls.to_face), "crossed-edge", cls.to_face)
    if q.carrier_kind == "vertex":
        return _vertex_gradient(rp, q.carrier_id, edge_classes)
    raise ValueError(f"unknown carrier kind {q.carrier_kind!r}")


def _face_exit(rp, f, p, d, exclude):
    """First exit of the ray ``p + tau*d`` from face ``f``.

    ``exclude`` is a set of edge ids not eligible as the exit (the entry
    side(s)).  Returns ``(x, edge_id, graze)`` where ``graze`` is
    ``(vertex id, distance)`` when the exit point lands inside the
    vertex-capture window, else ``None``; the caller decides whether the
    exit is actually taken and the graze therefore fatal.
    """
    poly = rp.poly
    tol = rp.tol
    fe = poly.face_edges[f]
    s0 = int(poly.face_side_start[f])
    rows = slice(s0, s0 + len(fe))
    nu = poly.side_outward[rows]
    speed = nu @ d
    ok = speed > 1e-300
    if exclude:
        ok &= np.array([e not in exclude for e in fe])
    num = np.einsum("ij,ij->i", poly.side_tails[rows] - p, nu)
    tau = np.where(ok, np.maximum(num / np.where(ok, speed, 1.0), 0.0),
                   np.inf)
    best_k = int(np.argmin(tau))
    best_tau = float(tau[best_k])
    if not np.isfinite(best_tau):
        raise InternalInconsistencyError(
            f"ray does not exit face {f} through any eligible side")
    x = p + best_tau * d
    graze = None
    cyc = poly.faces[f]
    for vid in (cyc[best_k], cyc[(best_k + 1) % len(fe)]):
        dist = norm(x - poly.vertices[vid])
        if dist <= tol.vertex_hit:
            graze = (int(vid), dist)
            break
    return x, int(fe[best_k]), graze


def _edge_param(rp, e, x) -> float:
    a = rp.poly.vertices[rp.poly.edges[e][0]]
    return float((x - a) @ rp.edge_unit[e]) / float(rp.edge_len[e])


def _has_saddle(rp, e) -> bool:
    t = float(rp.edge_t[e])
    margin = min(t, 1.0 - t) * float(rp.edge_len[e])
    return margin > rp.tol.point


def _lookup(equilibria):
    if isinstance(equilibria, dict):
        return equilibria
    return {(eq.kind, eq.carrier_id): eq for eq in equilibria or ()}


def _resolve(lookup, kind, carrier_kind, carrier_id, rp):
    eq = lookup.get((kind, carrier_id))
    if eq is not None:
        return eq
    if kind == "stable":
        loc = SurfacePoint(rp.face_feet[carrier_id].copy(), "face", carrier_id)
        h = float(rp.face_dists[carrier_id])
    elif kind == "saddle":
        loc = SurfacePoint(rp.edge_feet[carrier_id].copy(), "edge", carrier_id,
                           edge_t=float(rp.edge_t[carrier_id]))
        h = float(rp.edge_line_dists[carrier_id])
    else:
        loc = SurfacePoint(rp.poly.vertices[carrier_id].copy(), "vertex",
                           carrier_id)
        h = float(rp.vertex_heights[carrier_id])
    return Equilibrium(id=-1, kind=kind, location=loc, height=h)


def trace_up_from_saddle(rp: ReferencedPolyhedron, saddle: Equilibrium,
                         edge_classes: EdgeClassification,
                         equilibria=None):
    """Trace the two ascending curves leaving a saddle upward.

    Each curve starts along the saddle's followed edge in one direction and
    ends at an unstable vertex; mid-curve events follow the extended
    gradient's rule table.

    Parameters
    ----------
    rp : ReferencedPolyhedron
    saddle : Equilibrium
        A ``"saddle"`` equilibrium.
    edge_classes : EdgeClassification
    equilibria : sequence of Equilibrium, optional
        When given, curve endpoints reuse these objects (and their ids).

    Returns
    -------
    (AscendingCurve, AscendingCurve)
        Both with role ``"saddle-to-unstable"``.

    Raises
    ------
    NonGenericError
        When a curve grazes a vertex, reaches another saddle's foot, or a
        vertex rule ties.
    InternalInconsistencyError
        When the segment budget (edges + faces) is exceeded.
    """
    if saddle.kind != "saddle":
        raise ValueError("trace_up_from_saddle needs a saddle equilibrium")
    poly = rp.poly
    tol = rp.tol
    lookup = _lookup(equilibria)
    e0 = saddle.carrier_id
    budget = poly.n_edges + poly.n_faces
    curves = []
    for side in (0, 1):
        target = int(poly.edges[e0][side])
        segments = [CurveSegment(
            start=saddle.location,
            end=SurfacePoint(poly.vertices[target].copy(), "vertex", target),
            carrier_kind="edge", carrier_id=int(e0),
            carrier_distance=float(rp.edge_line_dists[e0]))]
        v = target
        destination = None
        while destination is None:
            if len(segments) > budget:
                raise InternalInconsistencyError(
                    f"up-trace from saddle on edge {e0} exceeded "
                    f"{budget} segments")
            grad = _vertex_gradient(rp, v, edge_classes)
            if grad.source == "zero-at-equilibrium":
                destination = _resolve(lookup, "unstable", "vertex", v, rp)
                break
            if grad.source == "vertex-edge":
                e = grad.generator
                a, b = (int(i) for i in poly.edges[e])
                far = b if a == v else a
                segments.append(CurveSegment(
                    start=SurfacePoint(poly.vertices[v].copy(), "vertex", v),
                    end=SurfacePoint(poly.vertices[far].copy(), "vertex", far),
                    carrier_kind="edge", carrier_id=int(e),
                    carrier_distance=float(rp.edge_line_dists[e])))
                v = far
                continue
            # vertex-face: walk across faces along foot rays.
            f = grad.generator
            p = poly.vertices[v].copy()
            entry = SurfacePoint(p.copy(), "vertex", v)
            exclude = {e for e in poly.vertex_cycles[v][1]
                       if e in poly.face_edges[f]}
            while True:
                if len(segments) > budget:
                    raise InternalInconsistencyError(
                        f"up-trace from saddle on edge {e0} exceeded "
                        f"{budget} segments")
                d = unit(p - rp.face_feet[f])
                x, ee, graze = _face_exit(rp, f, p, d, exclude)
                if graze is not None:
                    raise NonGenericError([Finding(
                        "curve-hits-vertex", "vertex", graze[0], graze[1],
                        detail=f"ascending curve exits face {f} at a vertex")])
                cls = edge_classes[ee]
                if cls is None:
                    raise NonGenericError([Finding(
                        "projection-on-face-boundary", "edge", int(ee),
                        float(np.abs(edge_classes.margins[ee]).min()),
                        detail="curve reached an ambiguously classified edge")])
                if cls.kind == "crossed":
                    if cls.to_face == f:
                        raise InternalInconsistencyError(
                            f"ascending curve exited face {f} through edge "
                            f"{ee}, but that edge is crossed into face {f}")
                    t_x = _edge_param(rp, ee, x)
                    segments.append(CurveSegment(
                        start=entry,
                        end=SurfacePoint(x, "edge", int(ee), edge_t=t_x),
                        carrier_kind="face", carrier_id=int(f),
                        carrier_distance=float(rp.face_dists[f])))
                    entry = segments[-1].end
                    p = x
                    f = cls.to_face
                    exclude = {int(ee)}
                    continue
                # Followed edge: merge onto it.
                t_x = _edge_param(rp, ee, x)
                t_foot = float(rp.edge_t[ee])
                gap = abs(t_x - t_foot) * float(rp.edge_len[ee])
                if _has_saddle(rp, ee) and gap <= tol.point:
                    raise NonGenericError([Finding(
                        "saddle-saddle-connection", "edge", int(ee), gap,
                        detail=(f"ascending curve from the saddle on edge "
                                f"{e0} reaches the saddle foot on edge {ee}"))])
                segments.append(CurveSegment(
                    start=entry,
                    end=SurfacePoint(x, "edge", int(ee), edge_t=t_x),
                    carrier_kind="face", carrier_id=int(f),
                    carrier_distance=float(rp.face_dists[f])))
                endpoint = int(poly.edges[ee][1 if t_x > t_foot else 0])
                segments.append(CurveSegment(
                    start=segments[-1].end,
                    end=SurfacePoint(poly.vertices[endpoint].copy(),
                                     "vertex", endpoint),
                    carrier_kind="edge", carrier_id=int(ee),
                    carrier_distance=float(rp.edge_line_dists[ee])))
                v = endpoint
                break
        curves.append(AscendingCurve(
            origin=saddle, destination=destination,
            role="saddle-to-unstable", segments=tuple(segments)))
    return curves[0], curves[1]


def trace_down_from_saddle(rp: ReferencedPolyhedron, saddle: Equilibrium,
                           edge_classes: EdgeClassification,
                           equilibria=None):
    """Trace the two curves arriving at a saddle from below.

    The walk runs backward from the saddle: it enters each adjacent face
    perpendicular to the saddle's edge, moves straight toward that face's
    foot point, and passes backward over crossed edges until some face
    contains its foot — the stable origin.  Results are stored ascending
    (stable first).

    Returns
    -------
    (AscendingCurve, AscendingCurve)
        Both with role ``"stable-to-saddle"``.

    Raises
    ------
    NonGenericError
        When the backward walk hits a vertex or a followed edge.
    InternalInconsistencyError
        When a hit edge is not crossed into the current face, or the budget
        is exceeded.
    """
    if saddle.kind != "saddle":
        raise ValueError("trace_down_from_saddle needs a saddle equilibrium")
    poly = rp.poly
    tol = rp.tol
    lookup = _lookup(equilibria)
    e0 = saddle.carrier_id
    s = saddle.position
    budget = poly.n_edges + poly.n_faces
    curves = []
    # Segments are built already flipped to ascending orientation (the walk
    # itself runs downhill), so the final step is a plain order reversal.
    for f_start in (int(poly.edge_faces[e0, 0]), int(poly.edge_faces[e0, 1])):
        f = f_start
        p = s.copy()
        entry = saddle.location
        exclude = {int(e0)}
        segments = []
        origin = None
        first = True
        while origin is None:
            if len(segments) > budget:
                raise InternalInconsistencyError(
                    f"down-trace from saddle on edge {e0} exceeded "
                    f"{budget} segments")
            foot = rp.face_feet[f]
            reach = norm(foot - p)
            if reach <= tol.point:
                raise NonGenericError([Finding(
                    "projection-on-face-boundary", "face", int(f), reach,
                    detail="descending walk started on top of a face foot")])
            d = (foot - p) / reach
            if first:
                cosang = float(d @ rp.edge_unit[e0])
                # Absolute floor: the dot product of O(diameter) positions
                # carries rounding noise independent of reach, which for a
                # saddle lying very close to a face foot would otherwise
                # dominate the cosine.
                limit = (1e-6 + (4.0 * poly.geometric_slack
                                 + 1e-13 * poly.bbox_diameter) / reach)
                if abs(cosang) > limit:
                    raise InternalInconsistencyError(
                        f"descending entry direction not perpendicular to "
                        f"edge {e0} (cos = {cosang:.3e})")
                first = False
            x, ee, graze = _face_exit(rp, f, p, d, exclude)
            tau = norm(x - p)
            if abs(tau - reach) <= tol.point:
                raise NonGenericError([Finding(
                    "projection-on-face-boundary", "face", int(f),
                    abs(tau - reach),
                    detail="face foot lies on the face boundary")])
            if reach < tau:
                segments.append(CurveSegment(
                    start=SurfacePoint(foot.copy(), "face", int(f)),
                    end=entry,
                    carrier_kind="face", carrier_id=int(f),
                    carrier_distance=float(rp.face_dists[f])))
                origin = _resolve(lookup, "stable", "face", f, rp)
                break
            if graze is not None:
                raise NonGenericError([Finding(
                    "curve-hits-vertex", "vertex", graze[0], graze[1],
                    detail=f"descending curve exits face {f} at a vertex")])
            cls = edge_classes[ee]
            if cls is None:
                raise NonGenericError([Finding(
                    "projection-on-face-boundary", "edge", int(ee),
                    float(np.abs(edge_classes.margins[ee]).min()),
                    detail="descending walk reached an ambiguously "
                           "classified edge")])
            if cls.kind == "followed":
                raise NonGenericError([Finding(
                    "curve-hits-followed-edge", "edge", int(ee),
                    float(min(_edge_param(rp, ee, x),
                              1.0 - _edge_param(rp, ee, x))
                          * rp.edge_len[ee]),
                    detail=(f"descending curve of the saddle on edge {e0} "
                            f"lands on followed edge {ee}"))])
            if cls.to_face != f:
                raise InternalInconsistencyError(
                    f"descending walk exited face {f} through edge {ee}, "
                    "which is not crossed into that face")
            t_x = _edge_param(rp, ee, x)
            hit = SurfacePoint(x, "edge", int(ee), edge_t=t_x)
            segments.append(CurveSegment(
                start=hit, end=entry,
                carrier_kind="face", carrier_id=int(f),
                carrier_distance=float(rp.face_dists[f])))
            entry = hit
            p = x
            f = cls.from_face
            exclude = {int(ee)}
        curves.append(AscendingCurve(
            origin=origin, destination=saddle,
            role="stable-to-saddle", segments=tuple(reversed(segments))))
    return curves[0], curves[1]


def trace_all(rp: ReferencedPolyhedron, edge_classes: EdgeClassification,
              equilibria):
    """Trace every saddle's curve pairs; collect non-generic events.

    Up-traces run first for every saddle, then down-traces, so a
    saddle-to-saddle connection is reported ahead of the vertex hits its
    descending side may also produce.

    Returns
    -------
    (dict, dict)
        ``ups[saddle.id]`` and ``downs[saddle.id]`` hold the curve pairs.

    Raises
    ------
    NonGenericError
        With every witness collected across saddles, saddle-connection
        witnesses first.
    """
    saddles = [eq for eq in equilibria if eq.kind == "saddle"]
    lut = _lookup(equilibria)
    witnesses = []
    ups = {}
    for s in saddles:
        try:
            ups[s.id] = trace_up_from_saddle(rp, s, edge_classes, lut)
        except NonGenericError as err:
            witnesses.extend(err.witnesses)
    if witnesses:
        witnesses.sort(key=lambda w: w.kind != "saddle-saddle-connection")
        raise NonGenericError(witnesses)
    downs = {}
    for s in saddles:
        try:
            downs[s.id] = trace_down_from_saddle(rp, s, edge_classes, lut)
        except NonGenericError as err:
            witnesses.extend(err.witnesses)
    if witnesses:
        raise NonGenericError(witnesses)
    return ups, downs


@dataclass(frozen=True)
class ProbeResult:
    """Outcome of the perturbation probe.

    ``verdict`` is ``"generic"`` or ``"non-generic"``; witnesses explain a
    non-generic verdict.  Discarded trials (perturbation broke convexity or
    changed the equilibrium count) are recorded, not judged.
    """

    verdict: str
    witnesses: tuple
    trials_run: int
    trials_discarded: int
    discard_reasons: tuple


def _structure_signature(rp, classification, equilibria):
    """Carrier-id censuses plus per-saddle endpoint pairing."""
    stable = frozenset(eq.carrier_id for eq in equilibria
                       if eq.kind == "stable")
    saddle = frozenset(eq.carrier_id for eq in equilibria
                       if eq.kind == "saddle")
    unstable = frozenset(eq.carrier_id for eq in equilibria
                         if eq.kind == "unstable")
    ups, downs = trace_all(rp, classification, equilibria)
    by_id = {eq.id: eq for eq in equilibria}
    pairing = {}
    for eq in equilibria:
        if eq.kind != "saddle":
            continue
        up_dest = tuple(sorted(c.destination.carrier_id
                               for c in ups[eq.id]))
        down_orig = tuple(sorted(c.origin.carrier_id
                                 for c in downs[eq.id]))
        pairing[by_id[eq.id].carrier_id] = (up_dest, down_orig)
    return (stable, saddle, unstable), pairing


def probe_genericity(rp: ReferencedPolyhedron, trials: int = 20,
                     magnitude: float | None = None,
                     seed: int = 0) -> ProbeResult:
    """Decide genericity by perturbing every vertex and re-analyzing.

    The structure of a generic polyhedron is stable under small vertex
    perturbations: the same faces stay stable, the same edges carry
    saddles, the same vertices stay unstable, and every saddle keeps its
    two up-destinations and two down-origins.  Each trial moves every
    vertex by a uniformly random offset of length ``magnitude`` (default
    ten times the point tolerance), rebuilds with matching geometric slack,
    and compares against the unperturbed analysis.

    Parameters
    ----------
    rp : ReferencedPolyhedron
    trials : int
        Number of perturbation trials.
    magnitude : float, optional
        Perturbation length; defaults to ``10 * rp.tol.point``.
    seed : int
        Perturbation RNG seed.

    Returns
    -------
    ProbeResult

    Raises
    ------
    ProbeInconclusiveError
        If every trial had to be discarded.
    """
    if trials < 1:
        raise ValueError("at least one trial is required")
    if magnitude is None:
        magnitude = 10.0 * rp.tol.point
    classification = classify_edges(rp)
    equilibria, report = find_equilibria(rp, classification)
    if report.findings:
        return ProbeResult("non-generic", tuple(report.findings), 0, 0, ())
    try:
        base_census, base_pairing = _structure_signature(
            rp, classification, equilibria)
    except NonGenericError as err:
        return ProbeResult("non-generic", tuple(err.witnesses), 0, 0, ())
    base_counts = tuple(len(c) for c in base_census)

    rng = np.random.default_rng(seed)
    reasons = []
    run = 0
    for trial in range(trials):
        offsets = rng.normal(size=rp.poly.vertices.shape)
        offsets /= np.linalg.norm(offsets, axis=1)[:, None]
        moved = rp.poly.vertices + magnitude * offsets
        try:
            poly2 = build(moved, rp.poly.faces, rp.poly.tolerance_policy,
                          geometric_slack=10.0 * magnitude)
            rp2 = with_reference(poly2, rp.origin)
        except MeshValidationError as exc:
            reasons.append(f"trial {trial}: {exc.kind}")
            continue
        cls2 = classify_edges(rp2)
        eqs2, rep2 = find_equilibria(rp2, cls2)
        if rep2.findings:
            return ProbeResult(
                "non-generic",
                tuple(Finding(w.kind, w.entity_kind, w.entity_id, w.margin,
                              detail=f"trial {trial}: {w.detail}".rstrip(": "))
                      for w in rep2.findings),
                run, len(reasons), tuple(reasons))
        counts2 = tuple(sum(1 for e in eqs2 if e.kind == k)
                        for k in ("stable", "saddle", "unstable"))
        if counts2 != base_counts:
            reasons.append(
                f"trial {trial}: equilibrium count changed "
                f"{base_counts} -> {counts2}")
            continue
        try:
            census2, pairing2 = _structure_signature(rp2, cls2, eqs2)
        except NonGenericError as err:
            return ProbeResult(
                "non-generic", tuple(err.witnesses), run, len(reasons),
                tuple(reasons))
        run += 1
        if census2 != base_census:
            return ProbeResult(
                "non-generic",
                (Finding("census-carrier-change", "mesh", trial, magnitude,
                         detail="equilibrium carriers moved under "
                                "perturbation"),),
                run, len(reasons), tuple(reasons))
        if pairing2 != base_pairing:
            changed = sorted(e for e in base_pairing
                             if pairing2.get(e) != base_pairing[e])
            return ProbeResult(
                "non-generic",
                (Finding("saddle-pairing-change", "edge", changed[0],
                         magnitude,
                         detail=f"saddle endpoints changed on edges "
                                f"{changed}"),),
                run, len(reasons), tuple(reasons))
    if run == 0:
        raise ProbeInconclusiveError(
            f"all {trials} perturbation trials were discarded: "
            + "; ".join(reasons))
    return ProbeResult("generic", (), run, len(reasons), tuple(reasons))
