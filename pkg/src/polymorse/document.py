"""Analysis result document: stable JSON schema and graph/curve exports.

The document is a plain-data snapshot of one full analysis — mesh
identity, reference point, tolerance, edge classes, equilibria, curves,
cells, validation outcome and phase timings — that round-trips losslessly
through JSON.  Exports derived from it: Graphviz DOT and GraphML for the
abstract graph, OBJ polylines and legacy VTK for the embedded curves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .mscomplex import MSComplex, validate

SCHEMA_VERSION = 1

#: Node color per equilibrium kind in DOT output.
DOT_COLORS = {"stable": "green", "saddle": "blue", "unstable": "red"}

#: Curve color per role in polyline exports.
ROLE_COLORS = {"stable-to-saddle": "green", "saddle-to-unstable": "red"}


@dataclass(frozen=True)
class AnalysisDocument:
    """Losslessly serializable analysis result.

    Every field holds plain JSON-compatible data (dicts, lists, strings,
    numbers), so serialization and parsing are exact inverses.  Document
    equality compares everything except the wall-clock timings, making it
    the right notion for "same analysis, different run".
    """

    schema: int
    mesh: dict
    origin: dict
    tolerance: dict
    edge_classes: list
    equilibria: list
    curves: list
    cells: list
    validation: dict
    timings_ms: dict = field(compare=False)


def _float_list(a):
    return [float(x) for x in a]


def build_document(msc: MSComplex, checksum: str = "",
                   origin_provenance: str = "given") -> AnalysisDocument:
    """Snapshot a complex (plus input identity) into a document.

    Parameters
    ----------
    msc : MSComplex
    checksum : str
        Hex digest of the input mesh bytes.
    origin_provenance : {"given", "centroid"}
        How the reference point was chosen.
    """
    rp = msc.rp
    poly = rp.poly
    edge_classes = []
    for e in range(poly.n_edges):
        cls = msc.classification[e]
        entry = {"edge": [int(poly.edges[e][0]), int(poly.edges[e][1])]}
        if cls is None:
            entry["class"] = "undecided"
        elif cls.kind == "followed":
            entry["class"] = "followed"
        else:
            entry["class"] = "crossed"
            entry["from"] = int(cls.from_face)
            entry["to"] = int(cls.to_face)
        edge_classes.append(entry)
    equilibria = []
    for eq in msc.equilibria:
        equilibria.append({
            "id": int(eq.id),
            "kind": eq.kind,
            "position": _float_list(eq.position),
            "carrier": {"type": eq.carrier_kind, "id": int(eq.carrier_id)},
            "height": float(eq.height),
        })
    curves = []
    for ci, c in enumerate(msc.curves):
        curves.append({
            "id": ci,
            "role": c.role,
            "origin": int(c.origin.id),
            "destination": int(c.destination.id),
            "polyline": [_float_list(p) for p in c.polyline],
            "carriers": [[kind, int(cid)] for kind, cid in c.carriers],
            "carrier_distances": _float_list(c.carrier_distances),
        })
    cells = []
    for cell in msc.cells:
        cells.append({
            "corners": [int(i) for i in cell.corners],
            "edges": [int(i) for i in cell.edges],
            "merged": bool(cell.merged),
        })
    report = validate(msc)
    return AnalysisDocument(
        schema=SCHEMA_VERSION,
        mesh={
            "checksum": checksum,
            "vertices": poly.n_vertices,
            "edges": poly.n_edges,
            "faces": poly.n_faces,
        },
        origin={
            "point": _float_list(rp.origin),
            "provenance": origin_provenance,
        },
        tolerance={"rel_eps": float(rp.poly.tolerance_policy.rel_eps)},
        edge_classes=edge_classes,
        equilibria=equilibria,
        curves=curves,
        cells=cells,
        validation={"pass": report.passed, "failures": list(report.failures)},
        timings_ms=dict(msc.timings_ms),
    )


def serialize(doc: AnalysisDocument) -> str:
    """Deterministic JSON for a document (byte-identical for equal docs)."""
    payload = {
        "schema": doc.schema,
        "mesh": doc.mesh,
        "origin": doc.origin,
        "tolerance": doc.tolerance,
        "edge_classes": doc.edge_classes,
        "equilibria": doc.equilibria,
        "curves": doc.curves,
        "cells": doc.cells,
        "validation": doc.validation,
        "timings_ms": doc.timings_ms,
    }
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def parse(text: str) -> AnalysisDocument:
    """Inverse of :func:`serialize`."""
    data = json.loads(text)
    if data.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported document schema {data.get('schema')!r}")
    return AnalysisDocument(
        schema=data["schema"],
        mesh=data["mesh"],
        origin=data["origin"],
        tolerance=data["tolerance"],
        edge_classes=data["edge_classes"],
        equilibria=data["equilibria"],
        curves=data["curves"],
        cells=data["cells"],
        validation=data["validation"],
        timings_ms=data["timings_ms"],
    )


def document_adjacency(doc: AnalysisDocument):
    """(stable id, unstable id) corner pairs over the document's cells."""
    return frozenset(
        (int(c["corners"][0]), int(c["corners"][2])) for c in doc.cells)


def document_polylines(doc: AnalysisDocument):
    """Curve polylines of a parsed document as float arrays."""
    return [np.asarray(c["polyline"], dtype=float) for c in doc.curves]


def _dot_text(msc: MSComplex) -> str:
    lines = ["graph morse_smale {", "  node [style=filled];"]
    for eq in msc.equilibria:
        lines.append(
            f'  q{eq.id} [color={DOT_COLORS[eq.kind]}, kind={eq.kind}];')
    for c in msc.curves:
        lines.append(f"  q{c.origin.id} -- q{c.destination.id};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _graphml_text(msc: MSComplex) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="kind" for="node" attr.name="kind" attr.type="string"/>',
        '  <key id="role" for="edge" attr.name="role" attr.type="string"/>',
        '  <graph id="morse_smale" edgedefault="undirected">',
    ]
    for eq in msc.equilibria:
        lines.append(f'    <node id="n{eq.id}">'
                     f'<data key="kind">{eq.kind}</data></node>')
    for c in msc.curves:
        lines.append(f'    <edge source="n{c.origin.id}" '
                     f'target="n{c.destination.id}">'
                     f'<data key="role">{c.role}</data></edge>')
    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"


def graph_text(msc: MSComplex, fmt: str,
               document: AnalysisDocument | None = None) -> str:
    """Graph-form text of the complex.

    ``json`` is the full analysis document (built on the fly when not
    supplied); ``dot`` is Graphviz with kind-colored nodes; ``graphml``
    is GraphML with a ``kind`` node attribute.
    """
    if fmt == "json":
        return serialize(document if document is not None
                         else build_document(msc))
    if fmt == "dot":
        return _dot_text(msc)
    if fmt == "graphml":
        return _graphml_text(msc)
    raise ValueError(f"unknown graph format {fmt!r}")


def export_graph(msc: MSComplex, fmt: str, path,
                 document: AnalysisDocument | None = None) -> None:
    """Write :func:`graph_text` to a file."""
    Path(path).write_text(graph_text(msc, fmt, document))


def _obj_polyline_text(msc: MSComplex) -> str:
    lines = ["# ascending curves of a Morse-Smale complex",
             "# groups: curve id, role, role color"]
    offset = 1
    for ci, c in enumerate(msc.curves):
        pl = c.polyline
        lines.append(f"g curve_{ci} {c.role} {ROLE_COLORS[c.role]}")
        for p in pl:
            lines.append(f"v {p[0]:.17g} {p[1]:.17g} {p[2]:.17g}")
        lines.append("l " + " ".join(str(offset + k) for k in range(len(pl))))
        offset += len(pl)
    return "\n".join(lines) + "\n"


def _vtk_text(msc: MSComplex) -> str:
    points = []
    cells = []
    for c in msc.curves:
        pl = c.polyline
        start = len(points)
        points.extend(pl)
        cells.append([len(pl)] + [start + k for k in range(len(pl))])
    lines = [
        "# vtk DataFile Version 3.0",
        "ascending curves",
        "ASCII",
        "DATASET POLYDATA",
        f"POINTS {len(points)} double",
    ]
    for p in points:
        lines.append(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}")
    total = sum(len(c) for c in cells)
    lines.append(f"LINES {len(cells)} {total}")
    for c in cells:
        lines.append(" ".join(str(i) for i in c))
    lines.append(f"CELL_DATA {len(cells)}")
    lines.append("SCALARS role int 1")
    lines.append("LOOKUP_TABLE default")
    for c in msc.curves:
        lines.append("0" if c.role == "stable-to-saddle" else "1")
    return "\n".join(lines) + "\n"


def curves_text(msc: MSComplex, fmt: str) -> str:
    """Role-tagged polyline text for every curve.

    ``obj-polyline`` is OBJ ``l`` records grouped per curve with the
    role and its display color (green for stable-side, red for
    unstable-side) as group tags; ``vtk`` is legacy ASCII polydata with
    a per-curve role scalar.
    """
    if fmt == "obj-polyline":
        return _obj_polyline_text(msc)
    if fmt == "vtk":
        return _vtk_text(msc)
    raise ValueError(f"unknown curve format {fmt!r}")


def export_curves(msc: MSComplex, fmt: str, path) -> None:
    """Write :func:`curves_text` to a file."""
    Path(path).write_text(curves_text(msc, fmt))
