"""End-to-end acceptance suite.

One test per shipped guarantee, each at its stated tolerance; every test
finishes by printing a single PASS line with the measured quantities, so
a verbose run reads as a checklist.
"""

import json
import time

import numpy as np
import pytest

from polymorse import (
    NonGenericError,
    SurfacePoint,
    build_ms_complex,
    classify_edges,
    complex_adjacency,
    extended_gradient,
    find_equilibria,
    make_badguy,
    make_cube,
    make_pex,
    make_random_hull,
    make_tetrahedron,
    oracle_basins,
    probe_genericity,
    sample_surface,
    validate,
    with_reference,
)
from polymorse.bench import growth_rates, run_bench
from polymorse.cli import main
from polymorse.meshio import format_off
from polymorse.oracle import check_against_curves

from conftest import referenced


def census(msc):
    return tuple(len(msc.by_kind(k)) for k in ("stable", "saddle",
                                               "unstable"))


def write_mesh(path, poly):
    path.write_text(format_off(poly.vertices, poly.faces))
    return str(path)


@pytest.fixture(scope="module")
def random_hull_sweep():
    """Build and invariant-check 50 seeded random hulls (100 vertices).

    Checked per curve: strictly increasing carrier distances, no carrier
    repeats, heights increasing within 1e-9 relative, and segment count
    at most E + F.  The elapsed time covers builds and checks.
    """
    t0 = time.perf_counter()
    rejected, violations, censuses, curves = [], 0, [], 0
    for seed in range(50):
        poly = make_random_hull(100, seed=seed)
        rp = with_reference(poly, "centroid")
        try:
            msc = build_ms_complex(rp)
        except NonGenericError as err:
            rejected.append((seed, [w.kind for w in err.witnesses]))
            continue
        censuses.append(census(msc))
        bound = poly.n_edges + poly.n_faces
        for c in msc.curves:
            curves += 1
            dist = np.asarray(c.carrier_distances)
            if not np.all(np.diff(dist) > 0.0):
                violations += 1
            if len(set(c.carriers)) != len(c.carriers):
                violations += 1
            heights = np.linalg.norm(np.asarray(c.polyline) - rp.origin,
                                     axis=1)
            if not np.all(heights[1:] > heights[:-1] * (1.0 - 1e-9)):
                violations += 1
            if len(c.segments) > bound:
                violations += 1
    elapsed = time.perf_counter() - t0
    return {"rejected": rejected, "violations": violations,
            "censuses": censuses, "curves": curves, "elapsed": elapsed}


def test_criterion_01_cube_census():
    t0 = time.perf_counter()
    rp = referenced(make_cube(), (0.0, 0.0, 0.0))
    msc = build_ms_complex(rp)
    report = validate(msc)
    elapsed = time.perf_counter() - t0
    assert census(msc) == (6, 12, 8)
    assert (msc.n_vertices, msc.n_edges, msc.n_cells) == (26, 48, 24)
    assert report.passed
    assert elapsed < 0.1
    print(f"PASS cube census 6/12/8, complex 26/48/24, validated "
          f"in {elapsed * 1e3:.1f} ms")


def test_criterion_02_tetrahedron_census():
    t0 = time.perf_counter()
    rp = with_reference(make_tetrahedron(), "centroid")
    msc = build_ms_complex(rp)
    report = validate(msc)
    elapsed = time.perf_counter() - t0
    assert census(msc) == (4, 6, 4)
    assert (msc.n_vertices, msc.n_edges, msc.n_cells) == (14, 24, 12)
    assert report.passed
    assert elapsed < 0.1
    print(f"PASS tetrahedron census 4/6/4, complex 14/24/12, validated "
          f"in {elapsed * 1e3:.1f} ms")


def test_criterion_03_pex_reproduction(tmp_path):
    mesh = write_mesh(tmp_path / "pex.off", make_pex())
    out = tmp_path / "doc.json"
    t0 = time.perf_counter()
    code = main(["analyze", mesh, "--origin", "0.5,0.5,0.5",
                 "--out", str(out)])
    rp = with_reference(make_pex(), (0.5, 0.5, 0.5))
    probe = probe_genericity(rp, trials=20)
    msc = build_ms_complex(rp)
    result = oracle_basins(rp, samples=10_000, seed=0, against=msc)
    elapsed = time.perf_counter() - t0

    assert code == 0
    assert probe.verdict == "generic"
    s, h, u = census(msc)
    assert s + u - h == 2
    for saddle in msc.by_kind("saddle"):
        ups = sum(1 for c in msc.curves if c.role == "saddle-to-unstable"
                  and c.origin.id == saddle.id)
        downs = sum(1 for c in msc.curves if c.role == "stable-to-saddle"
                    and c.destination.id == saddle.id)
        assert (downs, ups) == (2, 2)
    assert result.adjacency == complex_adjacency(msc)
    assert result.disagreements == ()
    assert elapsed < 1.0
    print(f"PASS pex: exit 0, probe generic ({probe.trials_run} trials), "
          f"S+U-H=2, saddle degrees 2+2, oracle adjacency "
          f"{len(result.adjacency)} pairs with 0 disagreements, "
          f"in {elapsed:.2f} s")


def test_criterion_04_non_generic_exit_code(tmp_path, capsys):
    mesh = write_mesh(tmp_path / "badguy.off", make_badguy())
    code = main(["analyze", mesh, "--origin", "0,0,0"])
    err = capsys.readouterr().err
    assert code == 3
    assert "saddle-saddle-connection" in err
    print("PASS non-generic fixture: exit code 3 with a "
          "saddle-saddle-connection witness")


def test_criterion_05_curve_invariants_on_random_hulls(random_hull_sweep):
    sweep = random_hull_sweep
    assert sweep["rejected"] == []
    assert sweep["violations"] == 0
    assert sweep["elapsed"] < 10.0
    print(f"PASS curve invariants: {sweep['curves']} curves over 50 random "
          f"hulls, 0 violations, in {sweep['elapsed']:.1f} s")


def test_criterion_06_gradient_finite_difference():
    # The own-direction check is relative, so magnitudes below 0.05 are
    # skipped: the one-sided difference quotient overshoots the true
    # derivative by about (h/2)(1 - m^2)/|q - o| (convexity), which for
    # m < 0.02 exceeds the 1e-4 relative budget regardless of
    # implementation.  The maximality check needs no cutoff because the
    # tangent derivative d.(q - o)/|q - o| is exact.
    fixtures = [("cube", referenced(make_cube(), (0.0, 0.0, 0.0))),
                ("pex", with_reference(make_pex(), (0.5, 0.5, 0.5)))]
    fixtures += [(f"hull-{seed}",
                  with_reference(make_random_hull(100, seed=seed),
                                 "centroid"))
                 for seed in range(5)]
    h = 1e-6
    worst_rel, worst_slack, checked = 0.0, -np.inf, 0
    for _name, rp in fixtures:
        classes = classify_edges(rp)
        pts, faces = sample_surface(rp.poly, 1000, seed=42)
        rng = np.random.default_rng(42)
        o = rp.origin
        kept = 0
        for p, f in zip(pts, faces):
            g = extended_gradient(rp, SurfacePoint(p, "face", int(f)),
                                  classes)
            m = g.magnitude
            reach = np.linalg.norm(p - o)
            normal = rp.poly.face_normals[int(f)]
            for raw in rng.normal(size=(8, 3)):
                d = raw - (raw @ normal) * normal
                d /= np.linalg.norm(d)
                worst_slack = max(worst_slack, d @ (p - o) / reach - m)
            if m < 0.05:
                continue
            kept += 1
            fd = (np.linalg.norm(p + h * (g.vector / m) - o) - reach) / h
            worst_rel = max(worst_rel, abs(fd - m) / m)
        assert kept >= 900
        checked += kept
    assert worst_rel <= 1e-4
    assert worst_slack <= 1e-6
    print(f"PASS gradient: own-direction FD within {worst_rel:.2e} relative "
          f"over {checked} points, tangent-derivative slack "
          f"{worst_slack:.2e} <= 1e-6")


def test_criterion_07_equilibrium_count_identity(random_hull_sweep,
                                                 cube_msc, tetra_msc,
                                                 pex_msc):
    checked = 0
    for msc in (cube_msc, tetra_msc, pex_msc):
        s, h, u = census(msc)
        assert s + u - h == 2
        checked += 1
    for s, h, u in random_hull_sweep["censuses"]:
        assert s + u - h == 2
        checked += 1
    print(f"PASS identity S+U-H=2 exact on {checked} generic inputs")


def test_criterion_08_basin_openness(cube_rp, cube_msc, pex_rp, pex_msc):
    total = 0
    for rp, msc in ((cube_rp, cube_msc), (pex_rp, pex_msc)):
        result = oracle_basins(rp, samples=10_000, seed=0)
        violations = check_against_curves(result, msc)
        assert violations == ()
        total += result.samples - result.ambiguous
    print(f"PASS openness: 0 violations over {total} non-ambiguous samples "
          f"on cube and pex")


def test_criterion_09_scaling_trend():
    rows = run_bench(sizes=(100, 1_000, 10_000), reps=3, seed=0)
    per_n = [r["steps_1_3_ms"] / r["n"] for r in rows]
    spread = max(per_n) / min(per_n)
    slope = growth_rates(rows)["steps_4_5"]
    total_large = rows[-1]["total_ms"]
    assert spread <= 2.0
    assert slope <= 2.2
    assert total_large < 10_000.0
    print(f"PASS scaling: steps 1-3 linear within x{spread:.2f}, "
          f"steps 4-5 log-log slope {slope:.2f} <= 2.2, n=10^4 total "
          f"{total_large / 1e3:.2f} s < 10 s")


def test_criterion_10_deterministic_output(tmp_path):
    mesh = write_mesh(tmp_path / "pex.off", make_pex())
    texts = []
    for k in range(2):
        out = tmp_path / f"doc{k}.json"
        assert main(["analyze", mesh, "--origin", "0.5,0.5,0.5",
                     "--out", str(out)]) == 0
        texts.append(out.read_text())
    cut = [t.index('"timings_ms"') for t in texts]
    assert cut[0] == cut[1]
    assert texts[0][:cut[0]] == texts[1][:cut[1]]
    stripped = []
    for t in texts:
        data = json.loads(t)
        data.pop("timings_ms")
        stripped.append(json.dumps(data))
    assert stripped[0] == stripped[1]
    print("PASS determinism: repeated analyses byte-identical up to the "
          "timings block")
