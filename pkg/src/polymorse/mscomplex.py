"""Assembly of the Morse-Smale complex and graph from traced curves.

The complex's vertices are the equilibria, its edges the isolated ascending
curves (exactly the saddle-incident ones), and its 2-cells the regions cut
out by those curves.  Cells are stitched combinatorially: around every
stable point the arriving curves are ordered by their departure angle, and
each consecutive pair is completed through the up-curves on the matching
sides of its two saddles, which must meet at one unstable vertex.  Every
cell therefore closes with corner cycle stable, saddle, unstable, saddle
(the two saddles may coincide when a stable point has a single curve).
"""

from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .equilibria import classify_edges, find_equilibria
from .errors import InternalInconsistencyError, NonGenericError
from .flow import trace_all
from .geom import cross3
from .poly import ReferencedPolyhedron


@dataclass(frozen=True)
class MSCell:
    """One 2-cell of the complex.

    ``corners`` are equilibrium ids in cyclic order (stable, saddle,
    unstable, saddle); ``edges`` are the four bounding curve ids in the
    matching order (stable-side curve to the first saddle, its up-curve,
    the second saddle's up-curve, the second stable-side curve).  ``merged``
    marks cells whose two up-side curves share a positive-length piece of a
    followed edge, in which case the cell is not a topological disc.
    """

    corners: tuple
    edges: tuple
    merged: bool


@dataclass(frozen=True, eq=False)
class MSComplex:
    """Morse-Smale complex of a referenced polyhedron.

    Attributes
    ----------
    rp : ReferencedPolyhedron
        The analyzed input.
    equilibria : tuple of Equilibrium
        Complex vertices, indexed by their ``id``.
    curves : tuple of AscendingCurve
        Complex edges (isolated ascending curves), indexed by position.
    cells : tuple of MSCell
    classification : EdgeClassification
    report : NondegeneracyReport
    timings_ms : dict
        ``{"steps_1_3": ..., "steps_4_5": ...}`` build-phase wall times.
    """

    rp: ReferencedPolyhedron
    equilibria: tuple
    curves: tuple
    cells: tuple
    classification: object
    report: object
    timings_ms: dict

    def by_kind(self, kind: str):
        return tuple(eq for eq in self.equilibria if eq.kind == kind)

    @property
    def n_vertices(self) -> int:
        return len(self.equilibria)

    @property
    def n_edges(self) -> int:
        return len(self.curves)

    @property
    def n_cells(self) -> int:
        return len(self.cells)


@dataclass(frozen=True, eq=False)
class MSGraph:
    """Abstract colored multigraph of the complex.

    ``colors[i]`` is the kind of equilibrium ``i``; ``edges`` lists curve
    endpoint id pairs (parallel edges allowed); ``embedding`` optionally
    carries one polyline per edge.
    """

    colors: tuple
    edges: tuple
    embedding: tuple | None = None


def _edge_spans(rp, curve):
    spans = {}
    for seg in curve.segments:
        if seg.carrier_kind != "edge":
            continue
        e = seg.carrier_id
        a = rp.poly.vertices[rp.poly.edges[e][0]]
        t0 = float((seg.start.position - a) @ rp.edge_unit[e]) \
            / float(rp.edge_len[e])
        t1 = float((seg.end.position - a) @ rp.edge_unit[e]) \
            / float(rp.edge_len[e])
        spans[e] = (min(t0, t1), max(t0, t1))
    return spans


def _pick_up_curve(saddle_id, candidates, lhs, left: bool) -> int:
    """Choose the up-curve of a saddle on the requested side of an arriving
    stable-side curve (left = counterclockwise side seen from outside).

    ``candidates`` holds ``(curve id, initial direction)`` pairs and ``lhs``
    is the in-plane left normal of the arrival direction.
    """
    want = 1.0 if left else -1.0
    best = None
    for ci, e_init in candidates:
        dot = lhs[0] * e_init[0] + lhs[1] * e_init[1] + lhs[2] * e_init[2]
        if abs(dot) <= 0.5:
            raise InternalInconsistencyError(
                f"side test at saddle {saddle_id} is indecisive "
                f"(dot = {dot:.3f})")
        if dot * want > 0.0:
            if best is not None:
                raise InternalInconsistencyError(
                    f"both up-curves of saddle {saddle_id} lie on "
                    "the same side of an arriving curve")
            best = ci
    if best is None:
        raise InternalInconsistencyError(
            f"no up-curve of saddle {saddle_id} on the required side")
    return best


def _spans_overlap(rp, spans_a, spans_b) -> bool:
    for e, (a0, a1) in spans_a.items():
        if e in spans_b:
            b0, b1 = spans_b[e]
            overlap = min(a1, b1) - max(a0, b0)
            if overlap * float(rp.edge_len[e]) > rp.tol.point:
                return True
    return False


def _stitch_cells(rp, equilibria, curves):
    downs_by_stable = defaultdict(list)
    ups_by_saddle = defaultdict(list)
    for ci, c in enumerate(curves):
        if c.role == "stable-to-saddle":
            downs_by_stable[c.origin.id].append(ci)
        else:
            ups_by_saddle[c.origin.id].append(ci)
    # First-segment direction of every curve, in one vectorized pass.
    first_segs = [c.segments[0] for c in curves]
    init_dir = np.array([s.end.position - s.start.position
                         for s in first_segs])
    init_dir /= np.linalg.norm(init_dir, axis=1)[:, None]
    up_candidates = {}
    up_spans = {}
    for sid, ids in ups_by_saddle.items():
        cand = []
        for ci in ids:
            d = init_dir[ci]
            cand.append((ci, (float(d[0]), float(d[1]), float(d[2]))))
            up_spans[ci] = _edge_spans(rp, curves[ci])
        up_candidates[sid] = cand
    down_ids = [ci for ids in downs_by_stable.values() for ci in ids]
    arr_left = {}
    if down_ids:
        lasts = [curves[ci].segments[-1] for ci in down_ids]
        d_arr = np.array([s.end.position - s.start.position for s in lasts])
        d_arr /= np.linalg.norm(d_arr, axis=1)[:, None]
        lefts = np.cross(
            rp.poly.face_normals[[s.carrier_id for s in lasts]], d_arr)
        for ci, v in zip(down_ids, lefts):
            arr_left[ci] = (float(v[0]), float(v[1]), float(v[2]))
    by_id = {eq.id: eq for eq in equilibria}
    cells = []
    for s_id in sorted(downs_by_stable):
        ring_ids = downs_by_stable[s_id]
        n = rp.poly.face_normals[by_id[s_id].carrier_id]
        dirs = init_dir[ring_ids]
        u1 = dirs[0]
        u2 = cross3(n, u1)
        ang = np.arctan2(dirs @ u2, dirs @ u1) % (2 * np.pi)
        ring = [ring_ids[int(i)] for i in np.argsort(ang, kind="stable")]
        m = len(ring)
        for k in range(m):
            ca = ring[k]
            cb = ring[(k + 1) % m]
            sad_a = curves[ca].destination.id
            sad_b = curves[cb].destination.id
            up_a = _pick_up_curve(sad_a, up_candidates[sad_a],
                                  arr_left[ca], left=True)
            up_b = _pick_up_curve(sad_b, up_candidates[sad_b],
                                  arr_left[cb], left=False)
            dest_a = curves[up_a].destination
            dest_b = curves[up_b].destination
            if dest_a.id != dest_b.id:
                raise InternalInconsistencyError(
                    "cell boundary walk did not close: stable "
                    f"{s_id} between saddles {sad_a} "
                    f"and {sad_b} reaches unstable "
                    f"{dest_a.id} on one side and {dest_b.id} on the other")
            cells.append(MSCell(
                corners=(s_id, sad_a, dest_a.id, sad_b),
                edges=(ca, up_a, up_b, cb),
                merged=_spans_overlap(rp, up_spans[up_a], up_spans[up_b])))
    return tuple(cells)


def build_ms_complex(rp: ReferencedPolyhedron) -> MSComplex:
    """Run the full analysis: classify, locate, trace, stitch.

    Parameters
    ----------
    rp : ReferencedPolyhedron

    Returns
    -------
    MSComplex

    Raises
    ------
    NonGenericError
        If degeneracy findings exist at the equilibrium level, or tracing
        reports one (saddle-to-saddle connection, vertex hit, tie).
    InternalInconsistencyError
        If cell stitching cannot close a region, or any structural
        invariant that convexity guarantees fails.
    """
    t0 = time.perf_counter()
    classification = classify_edges(rp)
    equilibria, report = find_equilibria(rp, classification)
    t1 = time.perf_counter()
    if report.findings:
        raise NonGenericError(report.findings)
    ups, downs = trace_all(rp, classification, equilibria)
    curves = []
    for eq in equilibria:
        if eq.kind != "saddle":
            continue
        curves.extend(downs[eq.id])
        curves.extend(ups[eq.id])
    curves = tuple(curves)
    cells = _stitch_cells(rp, equilibria, curves)
    t2 = time.perf_counter()
    return MSComplex(
        rp=rp, equilibria=tuple(equilibria), curves=curves, cells=cells,
        classification=classification, report=report,
        timings_ms={"steps_1_3": (t1 - t0) * 1e3,
                    "steps_4_5": (t2 - t1) * 1e3})


@dataclass(frozen=True)
class ValidationReport:
    """Result of the structural validation of a complex."""

    failures: tuple

    def __bool__(self) -> bool:
        return not self.failures

    @property
    def passed(self) -> bool:
        return not self.failures


def validate(msc: MSComplex) -> ValidationReport:
    """Check every structural invariant of the complex.

    Verified: curve endpoints join a saddle to a stable or unstable point
    (never stable to unstable, never saddle to saddle); every saddle has
    exactly two stable-side and two unstable-side curves; the Euler identity
    ``V - E + cells = 2``; every cell's corner cycle alternates stable,
    saddle, unstable, saddle and its bounding curves connect those corners;
    the kind censuses satisfy ``S + U - H = 2``; and the graph is connected
    whenever it has edges.

    Returns a report listing failures; it passes when the list is empty.
    """
    fails = []
    eqs = {eq.id: eq for eq in msc.equilibria}
    for ci, c in enumerate(msc.curves):
        pair = (c.origin.kind, c.destination.kind)
        if pair not in (("stable", "saddle"), ("saddle", "unstable")):
            fails.append(
                f"curve {ci} joins {pair[0]} to {pair[1]}")
        want_role = ("stable-to-saddle" if pair[0] == "stable"
                     else "saddle-to-unstable")
        if c.role != want_role:
            fails.append(f"curve {ci} role {c.role!r} mismatches endpoints")
    down_deg = defaultdict(int)
    up_deg = defaultdict(int)
    for c in msc.curves:
        if c.destination.kind == "saddle":
            down_deg[c.destination.id] += 1
        if c.origin.kind == "saddle":
            up_deg[c.origin.id] += 1
    for eq in msc.equilibria:
        if eq.kind != "saddle":
            continue
        if down_deg[eq.id] != 2 or up_deg[eq.id] != 2:
            fails.append(
                f"saddle {eq.id} has degree {down_deg[eq.id]}+"
                f"{up_deg[eq.id]}, expected 2+2")
    V, E, C = msc.n_vertices, msc.n_edges, msc.n_cells
    if V - E + C != 2:
        fails.append(f"Euler identity V-E+cells = {V - E + C} != 2")
    s = len(msc.by_kind("stable"))
    h = len(msc.by_kind("saddle"))
    u = len(msc.by_kind("unstable"))
    if s + u - h != 2:
        fails.append(f"S+U-H = {s + u - h} != 2")
    for k, cell in enumerate(msc.cells):
        kinds = tuple(eqs[i].kind for i in cell.corners
                      if i in eqs)
        if len(kinds) != 4 or kinds != ("stable", "saddle", "unstable",
                                        "saddle"):
            fails.append(f"cell {k} corner kinds {kinds}")
            continue
        c0, c1, c2, c3 = (msc.curves[i] for i in cell.edges)
        s0, a1, un, a2 = cell.corners
        if (c0.origin.id, c0.destination.id) != (s0, a1):
            fails.append(f"cell {k} edge 0 does not join its corners")
        if (c1.origin.id, c1.destination.id) != (a1, un):
            fails.append(f"cell {k} edge 1 does not join its corners")
        if (c2.origin.id, c2.destination.id) != (a2, un):
            fails.append(f"cell {k} edge 2 does not join its corners")
        if (c3.origin.id, c3.destination.id) != (s0, a2):
            fails.append(f"cell {k} edge 3 does not join its corners")
    if msc.curves:
        parent = {eq.id: eq.id for eq in msc.equilibria}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for c in msc.curves:
            ra, rb = find(c.origin.id), find(c.destination.id)
            if ra != rb:
                parent[ra] = rb
        roots = {find(eq.id) for eq in msc.equilibria}
        if len(roots) != 1:
            fails.append(f"graph has {len(roots)} connected components")
    return ValidationReport(tuple(fails))


def to_graph(msc: MSComplex, with_embedding: bool = False) -> MSGraph:
    """Abstract colored graph of the complex.

    Parameters
    ----------
    msc : MSComplex
    with_embedding : bool
        Attach each curve's polyline when true.
    """
    colors = tuple(eq.kind for eq in msc.equilibria)
    edges = tuple((c.origin.id, c.destination.id) for c in msc.curves)
    embedding = None
    if with_embedding:
        embedding = tuple(c.polyline for c in msc.curves)
    return MSGraph(colors=colors, edges=edges, embedding=embedding)
