import duckdb

from src.config import get_settings

SWEEP_COLUMNS = (
    "sample", "p", "q", "s", "a", "epsilon_profile", "epsilon", "feasible", "violation",
    "d", "certificate_passed", "j_low", "j_high", "margin_ordering", "margin_epsilon",
    "margin_interval", "search_status", "search_draws",
)


def init_db(con):
    con.execute("""
    CREATE TABLE IF NOT EXISTS sweep_rows (
        sample INTEGER,
        p INTEGER,
        q INTEGER,
        s INTEGER,
        a INTEGER,
        epsilon_profile TEXT,
        epsilon TEXT,
        feasible BOOLEAN,
        violation TEXT,
        d INTEGER,
        certificate_passed BOOLEAN,
        j_low TEXT,
        j_high TEXT,
        margin_ordering TEXT,
        margin_epsilon TEXT,
        margin_interval TEXT,
        search_status TEXT,
        search_draws INTEGER,
        UNIQUE (p, q, s, a, sample)
    )
    """)
    con.execute("CREATE INDEX IF NOT EXISTS idx_sweep_feasible ON sweep_rows(feasible)")
    return con


def connect(path=None):
    path = get_settings().db_path if path is None else path
    return init_db(duckdb.connect(str(path), read_only=False))


if __name__ == "__main__":
    db = get_settings().db_path
    connect(db).close()
    print(f"DuckDB initialized: {db}")
