"""Benchmark harness over random convex hulls.

Runs the full analysis on seeded random hulls of increasing vertex
count and reports the median wall time of the two algorithm phases:
classification plus equilibrium location (steps 1-3, linear in mesh
size) and curve tracing plus cell stitching (steps 4-5, at most
quadratic).
"""

from __future__ import annotations

import math
import statistics

from .fixtures import make_random_hull
from .mscomplex import build_ms_complex
from .poly import with_reference

DEFAULT_SIZES = (100, 1_000, 10_000)


def run_bench(sizes=DEFAULT_SIZES, reps: int = 5, seed: int = 0) -> list:
    """Time the analysis phases over a size sweep.

    Each size builds one seeded random hull and analyzes it ``reps``
    times.  Returns one row per size::

        {"n": ..., "vertices": ..., "edges": ..., "faces": ...,
         "steps_1_3_ms": median, "steps_4_5_ms": median,
         "total_ms": median}

    Parameters
    ----------
    sizes : iterable of int
        Random-hull vertex counts.
    reps : int
        Analysis repetitions per size; medians are reported.
    seed : int
        Base seed; size index is added so hulls differ across rows.
    """
    rows = []
    for k, n in enumerate(sizes):
        poly = make_random_hull(int(n), seed=seed + k)
        rp = with_reference(poly, "centroid")
        t13, t45 = [], []
        for _ in range(reps):
            msc = build_ms_complex(rp)
            t13.append(msc.timings_ms["steps_1_3"])
            t45.append(msc.timings_ms["steps_4_5"])
        m13 = statistics.median(t13)
        m45 = statistics.median(t45)
        rows.append({
            "n": int(n),
            "vertices": poly.n_vertices,
            "edges": poly.n_edges,
            "faces": poly.n_faces,
            "steps_1_3_ms": m13,
            "steps_4_5_ms": m45,
            "total_ms": m13 + m45,
        })
    return rows


def growth_rates(rows) -> dict:
    """Log-log slopes of the phase medians across consecutive sizes.

    Returns ``{"steps_1_3": slope, "steps_4_5": slope}`` where each
    slope is the largest d(log time)/d(log n) over adjacent size pairs
    — the exponent b in a local t = c·n^b fit.
    """
    out = {}
    for key in ("steps_1_3_ms", "steps_4_5_ms"):
        slopes = []
        for a, b in zip(rows, rows[1:]):
            dt = math.log(b[key] / a[key])
            dn = math.log(b["n"] / a["n"])
            slopes.append(dt / dn)
        out[key.removesuffix("_ms")] = max(slopes) if slopes else 0.0
    return out


def format_table(rows) -> str:
    """Fixed-width text table of a bench run."""
    header = (f"{'n':>8} {'V':>8} {'E':>8} {'F':>8} "
              f"{'steps 1-3 (ms)':>16} {'steps 4-5 (ms)':>16} "
              f"{'total (ms)':>12}")
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r['n']:>8} {r['vertices']:>8} {r['edges']:>8} {r['faces']:>8} "
            f"{r['steps_1_3_ms']:>16.2f} {r['steps_4_5_ms']:>16.2f} "
            f"{r['total_ms']:>12.2f}")
    rates = growth_rates(rows)
    if len(rows) > 1:
        lines.append(f"log-log slope: steps 1-3 {rates['steps_1_3']:.2f}, "
                     f"steps 4-5 {rates['steps_4_5']:.2f}")
    return "\n".join(lines) + "\n"
