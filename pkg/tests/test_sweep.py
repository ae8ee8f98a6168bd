from fractions import Fraction as Q

import pytest

from src.data.init_duckdb import SWEEP_COLUMNS, connect
from src.data.writer import read_rows, rows_frame, write_rows
from src.weights.sweep import halton, radical_inverse, sample_profile, sweep
from src.weights.weightgen import _split, epsilon_bounds

VIOLATIONS = {"per_puncture_bound", "sum_lower", "sum_upper", "certificate", "a_range"}


def test_radical_inverse():
    assert radical_inverse(1, 2) == Q(1, 2)
    assert radical_inverse(6, 2) == Q(3, 8)
    assert radical_inverse(5, 3) == Q(7, 9)
    assert halton(3, 2) == (Q(3, 4), Q(1, 9))


@pytest.mark.parametrize("index", [1, 2, 7, 30])
def test_profile_sum_inside_interval(index):
    eps = sample_profile(1, 2, 5, 2, index)
    _, low = epsilon_bounds(1, 2, _split(1, 2, 5, 2)[2])
    assert len(eps) == 5
    assert low < sum(eps) < 1
    assert all(e >= 0 for e in eps)


def test_sweep_keeps_every_row():
    rows = sweep(1, 2, 5, grid=12, a=2)
    assert [r["sample"] for r in rows] == list(range(12))
    for r in rows:
        if r["feasible"]:
            assert r["certificate_passed"] is True
            assert r["d"] == 3
        else:
            assert r["violation"] in VIOLATIONS
    assert any(r["feasible"] for r in rows)


def test_sweep_cycles_through_admissible_a():
    rows = sweep(2, 2, 5, grid=6)
    assert [r["a"] for r in rows] == [2, 3, 4, 2, 3, 4]


def test_sweep_without_admissible_a():
    rows = sweep(1, 1, 4, grid=3)
    assert len(rows) == 3
    assert all(r["violation"] == "a_range" and not r["feasible"] for r in rows)


def test_sweep_is_deterministic():
    assert sweep(1, 2, 5, grid=5, a=3) == sweep(1, 2, 5, grid=5, a=3, threads=2)


def test_sweep_with_search():
    rows = sweep(1, 2, 5, grid=2, a=2, search_draws=20, seed=1)
    for r in rows:
        if r["feasible"]:
            assert r["search_status"] in ("Stable", "NotFound")
            assert 1 <= r["search_draws"] <= 20


# -- export --------------------------------------------------------------------

@pytest.mark.parametrize("suffix", [".csv", ".parquet"])
def test_written_rows_read_back(tmp_path, suffix):
    rows = sweep(1, 2, 5, grid=8, a=2)
    out = tmp_path / f"rows{suffix}"
    con = connect(":memory:")
    assert write_rows(rows, out, con) == 8
    frame = read_rows(out)
    assert list(frame.columns) == list(SWEEP_COLUMNS)
    assert len(frame) == 8
    assert frame["sample"].tolist() == list(range(8))
    con.close()


def test_rows_kept_in_duckdb_once(tmp_path):
    rows = sweep(1, 1, 4, grid=3) + sweep(1, 2, 5, grid=3, a=2)
    con = connect(":memory:")
    write_rows(rows, tmp_path / "first.csv", con)
    write_rows(rows, tmp_path / "second.csv", con)
    assert con.execute("SELECT count(*) FROM sweep_rows").fetchone()[0] == 6
    con.close()


def test_rows_frame_has_fixed_columns():
    frame = rows_frame([{"sample": 0, "p": 1, "q": 1, "s": 4, "feasible": False, "violation": "a_range"}])
    assert list(frame.columns) == list(SWEEP_COLUMNS)
    assert frame["a"].isna().all()
