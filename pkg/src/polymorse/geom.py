"""Geometric primitives and the centralized tolerance policy.

Every tolerance-sensitive predicate in the package reduces to the helpers
here.  A single relative epsilon is scaled by the mesh bounding-box diameter
into the absolute epsilons used for point coincidence, half-plane membership,
gradient-length ties and vertex capture, so behavior is invariant under
uniform rescaling of the input.  Predicates whose outcome falls inside the
tolerance band return an explicit boundary state instead of silently rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


def as_point(p) -> np.ndarray:
    """Coerce ``p`` to a finite float vector of shape (3,)."""
    q = np.asarray(p, dtype=float)
    if q.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError("non-finite coordinates")
    return q


def norm(v) -> float:
    v = np.asarray(v, dtype=float)
    if v.shape == (3,):
        return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    return float(np.linalg.norm(v))


def unit(v) -> np.ndarray:
    """Return ``v`` normalized to unit length; raises on the zero vector."""
    v = np.asarray(v, dtype=float)
    n = norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def cross3(a, b) -> np.ndarray:
    """Cross product specialized for single 3-vectors."""
    return np.array((a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]))


@dataclass(frozen=True)
class Tolerances:
    """Absolute epsilons resolved against a concrete mesh diameter.

    Attributes
    ----------
    rel : float
        The relative epsilon they were derived from (dimensionless).
    point : float
        Point coincidence and membership margins, in length units.
    halfplane : float
        Half-plane membership margins, in length units.
    tie : float
        Gradient-length tie detection (gradient magnitudes are
        dimensionless ratios, so this one is not scaled).
    vertex_hit : float
        Vertex capture window during curve tracing, in length units.
    """

    rel: float
    point: float
    halfplane: float
    tie: float
    vertex_hit: float


@dataclass(frozen=True)
class TolerancePolicy:
    """Single knob controlling all epsilons: a relative tolerance.

    ``resolve(diameter)`` produces the absolute epsilons for a mesh of the
    given bounding-box diameter.  The vertex-hit window is widened (4x) so a
    traced curve grazing a vertex is reported as non-generic rather than
    slipping past on rounding noise.
    """

    rel_eps: float = 1e-9

    def __post_init__(self):
        if not (0.0 < self.rel_eps < 1e-2):
            raise ValueError(f"rel_eps out of range: {self.rel_eps}")

    def resolve(self, diameter: float) -> Tolerances:
        if not (diameter > 0.0 and np.isfinite(diameter)):
            raise ValueError(f"bad diameter: {diameter}")
        base = self.rel_eps * diameter
        return Tolerances(
            rel=self.rel_eps,
            point=base,
            halfplane=base,
            tie=self.rel_eps,
            vertex_hit=4.0 * base,
        )


@dataclass(frozen=True, eq=False)
class Plane:
    """Oriented plane ``{x : <normal, x> = offset}`` with unit normal."""

    normal: np.ndarray
    offset: float

    @classmethod
    def from_point_normal(cls, point, normal) -> "Plane":
        n = unit(as_point(normal))
        p = as_point(point)
        return cls(normal=n, offset=float(n @ p))

    def signed_distance(self, p) -> float:
        return float(self.normal @ as_point(p)) - self.offset

    def project(self, p) -> np.ndarray:
        p = as_point(p)
        return p - self.signed_distance(p) * self.normal


@dataclass(frozen=True, eq=False)
class Line3:
    """Line through ``anchor`` with unit ``direction``."""

    anchor: np.ndarray
    direction: np.ndarray

    @classmethod
    def through(cls, a, b) -> "Line3":
        a = as_point(a)
        return cls(anchor=a, direction=unit(as_point(b) - a))

    def project(self, p) -> np.ndarray:
        p = as_point(p)
        return self.anchor + ((p - self.anchor) @ self.direction) * self.direction


def project_to_plane(p, plane: Plane) -> np.ndarray:
    """Orthogonal projection of ``p`` onto ``plane``."""
    return plane.project(p)


def project_to_line(p, line: Line3) -> np.ndarray:
    """Orthogonal projection of ``p`` onto ``line``."""
    return line.project(p)


class HalfplaneSide(Enum):
    """Tri-state outcome of an open half-plane membership test."""

    INSIDE = "inside"
    OUTSIDE = "outside"
    ON_BOUNDARY = "on-boundary"


def halfplane_margin(q, plane: Plane, boundary: Line3, witness) -> float:
    """Signed margin of ``q`` relative to the boundary line inside ``plane``.

    Positive when ``q`` lies on the same side of ``boundary`` as ``witness``.
    All points are assumed to lie in ``plane``; only in-plane components
    matter.  The magnitude is the in-plane distance of ``q`` to the line,
    so margins are in length units.
    """
    nu = np.cross(plane.normal, boundary.direction)
    q = as_point(q)
    w = as_point(witness)
    s_q = float(nu @ (q - boundary.anchor))
    s_w = float(nu @ (w - boundary.anchor))
    if s_w == 0.0:
        raise ValueError("witness lies on the boundary line")
    return s_q if s_w > 0.0 else -s_q


def in_open_halfplane(q, plane: Plane, boundary: Line3, witness,
                      eps: float) -> HalfplaneSide:
    """Membership of ``q`` in the open half-plane of ``plane`` bounded by
    ``boundary`` that contains ``witness``.

    Parameters
    ----------
    q, witness : array-like
        Query point and a point strictly on the reference side.
    plane : Plane
        Carrier plane of the half-plane.
    boundary : Line3
        Boundary line (must lie in ``plane``).
    eps : float
        Absolute margin below which the answer is ``ON_BOUNDARY``.

    Raises
    ------
    ValueError
        If the witness itself is within ``eps`` of the boundary line, which
        would make the side reference meaningless.
    """
    nu = np.cross(plane.normal, boundary.direction)
    w = as_point(witness)
    s_w = float(nu @ (w - boundary.anchor))
    if abs(s_w) <= eps:
        raise ValueError("witness too close to the boundary line")
    m = halfplane_margin(q, plane, boundary, witness)
    if m > eps:
        return HalfplaneSide.INSIDE
    if m < -eps:
        return HalfplaneSide.OUTSIDE
    return HalfplaneSide.ON_BOUNDARY
