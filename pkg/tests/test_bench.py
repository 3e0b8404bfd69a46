"""Benchmark harness plumbing (full-size sweeps live in the acceptance
suite)."""

from polymorse.bench import format_table, growth_rates, run_bench


def test_run_bench_rows():
    rows = run_bench(sizes=(40, 80), reps=1, seed=0)
    assert [r["n"] for r in rows] == [40, 80]
    for r in rows:
        assert r["vertices"] == r["n"]
        assert r["vertices"] - r["edges"] + r["faces"] == 2
        assert r["steps_1_3_ms"] > 0.0
        assert r["steps_4_5_ms"] > 0.0
        assert r["total_ms"] == r["steps_1_3_ms"] + r["steps_4_5_ms"]


def test_growth_rates_recovers_exponent():
    rows = [
        {"n": 100, "steps_1_3_ms": 1.0, "steps_4_5_ms": 2.0},
        {"n": 1000, "steps_1_3_ms": 10.0, "steps_4_5_ms": 200.0},
    ]
    rates = growth_rates(rows)
    assert rates["steps_1_3"] == 1.0
    assert rates["steps_4_5"] == 2.0


def test_format_table_lists_each_size():
    rows = run_bench(sizes=(40,), reps=1, seed=1)
    text = format_table(rows)
    assert "steps 4-5 (ms)" in text
    assert f"{rows[0]['n']:>8}" in text
