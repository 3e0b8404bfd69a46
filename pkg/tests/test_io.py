"""Mesh file parsing and analysis-document serialization/exports."""

import io
import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from polymorse import (
    MeshValidationError,
    build,
    build_document,
    build_ms_complex,
    export_curves,
    export_graph,
    load_mesh,
    make_cube,
    make_pex,
    write_off,
)
from polymorse.document import (
    curves_text,
    document_adjacency,
    document_polylines,
    graph_text,
    parse,
    serialize,
)
from polymorse.meshio import format_off, guess_format, parse_obj, parse_off

from conftest import referenced


class TestOffParsing:
    def test_round_trip(self):
        cube = make_cube()
        text = format_off(cube.vertices, cube.faces)
        vertices, faces = parse_off(text)
        assert np.array_equal(vertices, cube.vertices)
        assert tuple(faces) == tuple(cube.faces)
        again = build(vertices, faces)
        assert again.n_edges == 12

    def test_counts_on_header_line(self):
        text = "OFF 4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n" \
               "3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n"
        vertices, faces = parse_off(text)
        assert len(vertices) == 4 and len(faces) == 4
        build(vertices, faces)

    def test_comments_and_blank_lines(self):
        text = ("# tetrahedron\nOFF\n\n4 4 6  # counts\n"
                "0 0 0\n1 0 0\n0 1 0\n# interlude\n0 0 1\n"
                "3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n")
        vertices, faces = parse_off(text)
        assert len(vertices) == 4 and len(faces) == 4

    def test_trailing_face_fields_ignored(self):
        text = ("OFF\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n"
                "3 0 2 1 255 0 0\n3 0 1 3 0 255 0\n"
                "3 0 3 2 0 0 255\n3 1 2 3 128 128 128\n")
        _, faces = parse_off(text)
        assert all(len(f) == 3 for f in faces)

    @pytest.mark.parametrize("text,fragment", [
        ("", "empty"),
        ("PLY\n4 4 6\n", "header"),
        ("OFF\n4 4\n", "counts"),
        ("OFF\n2 1 0\n0 0 0\n1 1\n", "coordinates"),
        ("OFF\n1 1 0\n0 0 x\n", "coordinate"),
        ("OFF\n3 1 3\n0 0 0\n1 0 0\n0 1 0\n3 0 1 5\n", "out of range"),
        ("OFF\n3 1 3\n0 0 0\n1 0 0\n0 1 0\n", "face lines"),
    ])
    def test_malformed_off(self, text, fragment):
        with pytest.raises(MeshValidationError) as err:
            parse_off(text)
        assert err.value.kind == "parse"
        assert fragment in str(err.value)

    def test_parse_errors_carry_line_numbers(self):
        bad = "OFF\n4 4 6\n0 0 0\n1 0 0\n0 1 0\nnope\n"
        with pytest.raises(MeshValidationError) as err:
            parse_off(bad)
        assert "line 6" in str(err.value)


class TestObjParsing:
    TETRA = ("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
             "f 1 3 2\nf 1 2 4\nf 1 4 3\nf 2 3 4\n")

    def test_basic(self):
        vertices, faces = parse_obj(self.TETRA)
        assert vertices.shape == (4, 3)
        assert len(faces) == 4
        build(vertices, faces)

    def test_negative_indices(self):
        text = self.TETRA.replace("f 2 3 4", "f -3 -2 -1")
        vertices, faces = parse_obj(text)
        assert faces[-1] == (1, 2, 3)
        build(vertices, faces)

    def test_slash_tokens(self):
        text = self.TETRA.replace("f 1 3 2", "f 1/1 3/3/3 2//2")
        _, faces = parse_obj(text)
        assert faces[0] == (0, 2, 1)

    def test_other_records_ignored(self):
        text = "o tet\nvn 0 0 1\nusemtl stone\n" + self.TETRA
        vertices, faces = parse_obj(text)
        assert len(vertices) == 4 and len(faces) == 4

    @pytest.mark.parametrize("text", [
        "v 0 0 0\nf 1 1 0\n",
        "v 0 0 0\nv 1 0 0\nf 1 2 3\n",
        "f 1 2 3\n",
        "v 0 0\n",
        "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2\n",
    ])
    def test_malformed_obj(self, text):
        with pytest.raises(MeshValidationError) as err:
            parse_obj(text)
        assert err.value.kind == "parse"


class TestLoading:
    def test_guess_format(self):
        assert guess_format("mesh.obj") == "obj"
        assert guess_format("MESH.OBJ") == "obj"
        assert guess_format("mesh.off") == "off"
        assert guess_format("mesh.ply") == "off"
        assert guess_format("-") == "off"

    def test_load_off_file(self, tmp_path):
        path = tmp_path / "cube.off"
        cube = make_cube()
        write_off(path, cube.vertices, cube.faces)
        poly = load_mesh(path)
        assert poly.n_vertices == 8 and poly.n_faces == 6

    def test_load_with_format_override(self, tmp_path):
        path = tmp_path / "mesh.off"
        path.write_text(TestObjParsing.TETRA)
        poly = load_mesh(path, fmt="obj")
        assert poly.n_vertices == 4

    def test_load_from_stdin(self, monkeypatch):
        cube = make_cube()
        monkeypatch.setattr("sys.stdin",
                            io.StringIO(format_off(cube.vertices,
                                                   cube.faces)))
        poly = load_mesh("-")
        assert poly.n_faces == 6

    def test_open_fan_file_rejected(self, tmp_path):
        ring = [(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3), 0.0)
                for k in range(6)]
        vertices = [(0.0, 0.0, 1.0)] + ring
        faces = [(0, 1 + k, 1 + (k + 1) % 6) for k in range(6)]
        path = tmp_path / "fan.off"
        write_off(path, vertices, faces)
        with pytest.raises(MeshValidationError) as err:
            load_mesh(path)
        assert err.value.kind == "open-surface"

    def test_write_off_to_stdout(self, capsys):
        cube = make_cube()
        write_off("-", cube.vertices, cube.faces)
        out = capsys.readouterr().out
        assert out.startswith("OFF\n8 6 24\n")


class TestDocument:
    def test_round_trip(self, pex_msc):
        doc = build_document(pex_msc, checksum="cafe",
                             origin_provenance="given")
        text = serialize(doc)
        assert parse(text) == doc

    def test_key_order_is_stable(self, cube_msc):
        text = serialize(build_document(cube_msc))
        data = json.loads(text)
        assert list(data) == ["schema", "mesh", "origin", "tolerance",
                              "edge_classes", "equilibria", "curves",
                              "cells", "validation", "timings_ms"]

    def test_cube_document_content(self, cube_msc):
        doc = build_document(cube_msc, checksum="ff00")
        assert doc.schema == 1
        assert doc.mesh == {"checksum": "ff00", "vertices": 8,
                            "edges": 12, "faces": 6}
        assert doc.origin["provenance"] == "given"
        assert doc.tolerance == {"rel_eps": 1e-9}
        assert len(doc.edge_classes) == 12
        assert all(e["class"] == "followed" for e in doc.edge_classes)
        assert len(doc.equilibria) == 26
        assert len(doc.curves) == 48
        assert len(doc.cells) == 24
        assert doc.validation == {"pass": True, "failures": []}

    def test_crossed_entries_round_trip(self, pex_msc):
        doc = build_document(pex_msc)
        crossed = [e for e in doc.edge_classes if e["class"] == "crossed"]
        assert crossed
        for entry in crossed:
            assert isinstance(entry["from"], int)
            assert isinstance(entry["to"], int)

    def test_repeat_analysis_is_identical(self):
        texts = []
        for _ in range(2):
            rp = referenced(make_pex(), (0.5, 0.5, 0.5))
            doc = build_document(build_ms_complex(rp), checksum="x")
            texts.append(serialize(doc))
        assert parse(texts[0]) == parse(texts[1])
        strip = [json.loads(t) for t in texts]
        for d in strip:
            d.pop("timings_ms")
        assert json.dumps(strip[0]) == json.dumps(strip[1])

    def test_unknown_schema_rejected(self, cube_msc):
        text = serialize(build_document(cube_msc))
        data = json.loads(text)
        data["schema"] = 99
        with pytest.raises(ValueError):
            parse(json.dumps(data))

    def test_adjacency_and_polylines(self, pex_msc):
        doc = parse(serialize(build_document(pex_msc)))
        pairs = {(c.corners[0], c.corners[2]) for c in pex_msc.cells}
        assert document_adjacency(doc) == pairs
        pls = document_polylines(doc)
        assert len(pls) == len(pex_msc.curves)
        for pl, curve in zip(pls, pex_msc.curves):
            assert np.allclose(pl, np.asarray(curve.polyline))

    def test_saddle_free_document_serializes(self, cube_msc):
        import dataclasses
        two = (cube_msc.by_kind("stable")[0],
               cube_msc.by_kind("unstable")[0])
        tiny = dataclasses.replace(cube_msc, equilibria=two, curves=(),
                                   cells=())
        data = json.loads(serialize(build_document(tiny)))
        assert data["curves"] == []
        assert data["cells"] == []
        assert data["validation"]["pass"] is True
        assert len(data["equilibria"]) == 2


class TestGraphExports:
    def test_dot_colors(self, cube_msc):
        text = graph_text(cube_msc, "dot")
        assert text.startswith("graph morse_smale {")
        assert text.count("color=green") == 6
        assert text.count("color=blue") == 12
        assert text.count("color=red") == 8
        assert text.count(" -- ") == 48

    def test_graphml_structure(self, tetra_msc):
        text = graph_text(tetra_msc, "graphml")
        root = ET.fromstring(text)
        ns = "{http://graphml.graphdrawing.org/xmlns}"
        nodes = root.findall(f"{ns}graph/{ns}node")
        edges = root.findall(f"{ns}graph/{ns}edge")
        assert len(nodes) == 14
        assert len(edges) == 24
        kinds = [n.find(f"{ns}data").text for n in nodes]
        assert kinds.count("stable") == 4
        assert kinds.count("saddle") == 6
        assert kinds.count("unstable") == 4

    def test_json_graph_equals_document(self, tetra_msc):
        assert graph_text(tetra_msc, "json") == serialize(
            build_document(tetra_msc))

    def test_unknown_graph_format(self, tetra_msc):
        with pytest.raises(ValueError):
            graph_text(tetra_msc, "gexf")

    def test_export_graph_writes_file(self, tetra_msc, tmp_path):
        path = tmp_path / "graph.dot"
        export_graph(tetra_msc, "dot", path)
        assert path.read_text() == graph_text(tetra_msc, "dot")


class TestCurveExports:
    def test_obj_polyline_groups(self, pex_msc):
        text = curves_text(pex_msc, "obj-polyline")
        lines = text.splitlines()
        groups = [ln for ln in lines if ln.startswith("g curve_")]
        assert len(groups) == 44
        assert sum("stable-to-saddle green" in g for g in groups) == 22
        assert sum("saddle-to-unstable red" in g for g in groups) == 22
        n_vertices = sum(1 for ln in lines if ln.startswith("v "))
        assert n_vertices == sum(len(c.polyline) for c in pex_msc.curves)
        refs = [int(tok) for ln in lines if ln.startswith("l ")
                for tok in ln.split()[1:]]
        assert min(refs) == 1 and max(refs) == n_vertices

    def test_vtk_structure(self, pex_msc):
        text = curves_text(pex_msc, "vtk")
        lines = text.splitlines()
        assert lines[0].startswith("# vtk DataFile")
        assert "DATASET POLYDATA" in lines
        n_points = int(next(ln for ln in lines
                            if ln.startswith("POINTS")).split()[1])
        assert n_points == sum(len(c.polyline) for c in pex_msc.curves)
        lines_hdr = next(ln for ln in lines if ln.startswith("LINES"))
        assert int(lines_hdr.split()[1]) == 44
        tail = lines[lines.index("LOOKUP_TABLE default") + 1:]
        assert tail.count("0") == 22 and tail.count("1") == 22

    def test_unknown_curve_format(self, pex_msc):
        with pytest.raises(ValueError):
            curves_text(pex_msc, "svg")

    def test_export_curves_writes_file(self, pex_msc, tmp_path):
        path = tmp_path / "curves.obj"
        export_curves(pex_msc, "obj-polyline", path)
        assert path.read_text() == curves_text(pex_msc, "obj-polyline")
