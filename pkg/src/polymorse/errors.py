"""Exception types shared across the package.

The CLI maps these onto process exit codes: mesh/reference validation and
parse failures exit 2, genericity failures exit 3, and internal consistency
violations (convexity contradictions, stitching failures, exhausted step
budgets) exit 4.
"""

from __future__ import annotations


class PolymorseError(Exception):
    """Base class for all package errors."""


class MeshValidationError(PolymorseError):
    """Input mesh or reference point rejected by validation.

    Parameters
    ----------
    kind : str
        Machine-readable failure category, one of ``open-surface``,
        ``non-manifold``, ``non-convex``, ``non-planar``, ``degenerate-face``,
        ``invalid-face``, ``unused-vertex``, ``reference-point``,
        ``degenerate-hull`` or ``parse``.
    message : str
        Human-readable description.
    """

    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(f"{kind}: {message}")


class NonGenericError(PolymorseError):
    """The input failed a genericity requirement during analysis.

    Carries the witnesses (degeneracy findings or tracing events such as a
    saddle-saddle connection or a curve passing through a vertex) that
    triggered the failure.
    """

    def __init__(self, witnesses):
        self.witnesses = tuple(witnesses)
        detail = "; ".join(str(w) for w in self.witnesses) or "unspecified"
        super().__init__(f"non-generic input: {detail}")


class InternalInconsistencyError(PolymorseError):
    """A structural invariant that convexity guarantees was violated.

    Raised when the computation reaches a state the theory excludes (both
    edge half-plane memberships failing, a boundary walk that does not close,
    a curve exceeding its segment budget).  Indicates a bug or numerically
    hostile input rather than a property of the polyhedron.
    """


class OracleInconclusiveError(PolymorseError):
    """The sampling oracle could not resolve enough samples to report."""


class ProbeInconclusiveError(PolymorseError):
    """Every perturbation trial of the genericity probe was discarded."""
