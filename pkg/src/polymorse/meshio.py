"""Reading and writing surface meshes in OFF and OBJ form.

Both readers emit raw vertex/face data so utilities that intentionally
write degenerate meshes (perturbation, test scaffolding) can bypass
validation; :func:`load_mesh` feeds the parsed data through the full
polyhedron builder.  ``-`` as a path means standard input.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from .errors import MeshValidationError
from .poly import Polyhedron, build


def _parse_error(lineno, message):
    return MeshValidationError("parse", f"line {lineno}: {message}")


def _content_lines(text):
    """Yield (line number, stripped text) for non-blank, non-comment lines."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_off(text: str):
    """Parse OFF text into ``(vertices, faces)`` without validation.

    Accepts the count triple either on the header line or on the next
    line; per-face trailing fields (colors) are ignored.
    """
    lines = _content_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise _parse_error(1, "empty OFF file") from None
    tokens = header.split()
    if tokens[0] != "OFF":
        raise _parse_error(lineno, f"expected OFF header, got {tokens[0]!r}")
    counts = tokens[1:]
    if not counts:
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise _parse_error(lineno, "missing count line") from None
        counts = line.split()
    if len(counts) != 3:
        raise _parse_error(lineno, "expected vertex, face and edge counts")
    try:
        nv, nf = int(counts[0]), int(counts[1])
    except ValueError:
        raise _parse_error(lineno, "counts are not integers") from None
    vertices = np.empty((nv, 3))
    for i in range(nv):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise _parse_error(lineno, f"expected {nv} vertex lines, "
                               f"got {i}") from None
        parts = line.split()
        if len(parts) < 3:
            raise _parse_error(lineno, "vertex line needs 3 coordinates")
        try:
            vertices[i] = [float(parts[0]), float(parts[1]), float(parts[2])]
        except ValueError:
            raise _parse_error(lineno, "bad vertex coordinate") from None
    faces = []
    for i in range(nf):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise _parse_error(lineno, f"expected {nf} face lines, "
                               f"got {i}") from None
        parts = line.split()
        try:
            n = int(parts[0])
            idx = [int(t) for t in parts[1:1 + n]]
        except ValueError:
            raise _parse_error(lineno, "bad face index") from None
        if n < 3 or len(idx) != n:
            raise _parse_error(lineno, f"face needs {n} indices")
        if any(j < 0 or j >= nv for j in idx):
            raise _parse_error(lineno, "face index out of range")
        faces.append(tuple(idx))
    return vertices, faces


def parse_obj(text: str):
    """Parse OBJ text into ``(vertices, faces)`` without validation.

    Only ``v`` and ``f`` records are honored.  Face indices are 1-based;
    negative indices count back from the most recent vertex.
    """
    vertices = []
    faces = []
    for lineno, line in _content_lines(text):
        parts = line.split()
        if parts[0] == "v":
            if len(parts) < 4:
                raise _parse_error(lineno, "vertex line needs 3 coordinates")
            try:
                vertices.append((float(parts[1]), float(parts[2]),
                                 float(parts[3])))
            except ValueError:
                raise _parse_error(lineno, "bad vertex coordinate") from None
        elif parts[0] == "f":
            idx = []
            for token in parts[1:]:
                head = token.split("/", 1)[0]
                try:
                    j = int(head)
                except ValueError:
                    raise _parse_error(lineno,
                                       f"bad face index {token!r}") from None
                if j == 0:
                    raise _parse_error(lineno, "face index 0 is not allowed")
                if j < 0:
                    j = len(vertices) + j
                else:
                    j = j - 1
                if j < 0 or j >= len(vertices):
                    raise _parse_error(lineno, "face index out of range")
                idx.append(j)
            if len(idx) < 3:
                raise _parse_error(lineno, "face needs at least 3 indices")
            faces.append(tuple(idx))
    if not vertices:
        raise _parse_error(1, "no vertex records found")
    return np.asarray(vertices, dtype=float), faces


def read_source(path) -> str:
    """Read mesh text from a path, or standard input when path is ``-``."""
    if str(path) == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def guess_format(path) -> str:
    """Mesh format from the filename suffix; stdin defaults to OFF."""
    name = str(path).lower()
    if name.endswith(".obj"):
        return "obj"
    return "off"


def parse_mesh(text: str, fmt: str):
    if fmt == "off":
        return parse_off(text)
    if fmt == "obj":
        return parse_obj(text)
    raise ValueError(f"unknown mesh format {fmt!r}")


def load_mesh(path, fmt: str | None = None, tolerance=None) -> Polyhedron:
    """Read and validate a mesh file.

    Parameters
    ----------
    path : str or Path
        Input file; ``-`` reads standard input.
    fmt : {"off", "obj"}, optional
        Defaults to the filename suffix (stdin: OFF).
    tolerance : TolerancePolicy, optional

    Returns
    -------
    Polyhedron

    Raises
    ------
    MeshValidationError
        With kind ``"parse"`` and a line number for malformed files; any
        structural validation error is forwarded from the builder.
    """
    text = read_source(path)
    vertices, faces = parse_mesh(text, fmt or guess_format(path))
    return build(vertices, faces, tolerance=tolerance)


def format_off(vertices, faces) -> str:
    """Serialize vertices and faces as OFF text."""
    V = np.asarray(vertices, dtype=float)
    out = ["OFF", f"{len(V)} {len(faces)} {sum(len(f) for f in faces)}"]
    for p in V:
        out.append(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}")
    for f in faces:
        out.append(str(len(f)) + " " + " ".join(str(int(i)) for i in f))
    return "\n".join(out) + "\n"


def write_off(path, vertices, faces) -> None:
    """Write OFF text to a path, or standard output when path is ``-``."""
    text = format_off(vertices, faces)
    if str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
