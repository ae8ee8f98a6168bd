"""Loads sweep rows into DuckDB and exports them as CSV or Parquet."""
from pathlib import Path

import pandas as pd

from src.data.init_duckdb import SWEEP_COLUMNS, connect
from src.logs import get_logger

log = get_logger("writer")


def rows_frame(rows):
    """DataFrame in the fixed column order; missing keys become nulls."""
    frame = pd.DataFrame.from_records(list(rows), columns=list(SWEEP_COLUMNS))
    return frame.astype({"sample": "int64", "a": "Int64", "d": "Int64", "search_draws": "Int64",
                         "feasible": "bool", "certificate_passed": "boolean"})


def write_rows(rows, out, con=None):
    """Insert the rows into sweep_rows and export exactly this batch, in input order."""
    frame = rows_frame(rows)
    own = con is None
    con = connect() if own else con
    cols = ", ".join(SWEEP_COLUMNS)
    try:
        con.register("incoming", frame)
        con.execute("BEGIN")
        # rows without an admissible a carry a NULL key, so duplicates are filtered by hand
        con.execute(f"""
        INSERT INTO sweep_rows SELECT {cols} FROM incoming i
        WHERE NOT EXISTS (
            SELECT 1 FROM sweep_rows t
            WHERE t.p = i.p AND t.q = i.q AND t.s = i.s AND t.sample = i.sample
              AND t.a IS NOT DISTINCT FROM i.a
        )
        """)
        con.execute("COMMIT")
        out = Path(out)
        fmt = "PARQUET" if out.suffix == ".parquet" else "CSV, HEADER"
        # COPY takes no bound parameter for the target path
        target = str(out).replace("'", "''")
        con.execute(f"COPY (SELECT {cols} FROM incoming ORDER BY sample) TO '{target}' (FORMAT {fmt})")
        con.unregister("incoming")
        log.info("wrote %d sweep rows to %s", len(frame), out)
    finally:
        if own:
            con.close()
    return len(frame)


def read_rows(path):
    path = Path(path)
    return pd.read_parquet(path) if path.suffix == ".parquet" else pd.read_csv(path)
