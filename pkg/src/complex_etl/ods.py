"""Operational Data Storage: one embedded SQLite file plus a load registry."""
from __future__ import annotations

import sqlite3
import threading
from datetime import datetime, timezone
from pathlib import Path

from .errors import IoFailure
from .relational import REGISTRY_TABLE

STATUSES = ("loaded", "failed")

_REGISTRY_DDL = f"""
CREATE TABLE IF NOT EXISTS "{REGISTRY_TABLE}" (
    "id" INTEGER PRIMARY KEY AUTOINCREMENT,
    "source_uri" TEXT NOT NULL,
    "object_id" TEXT,
    "root_id" INTEGER,
    "load_timestamp" TEXT NOT NULL,
    "status" TEXT NOT NULL CHECK ("status" IN ('loaded', 'failed')),
    "diagnostic" TEXT
)
"""


class OdsHandle:
    """Open ODS database.

    Writers must hold :attr:`write_lock`; the connection itself may be used
    from any thread.
    """

    def __init__(self, path, connection):
        self.path = path
        self._conn = connection
        self.write_lock = threading.RLock()

    @property
    def connection(self) -> sqlite3.Connection:
        if self._conn is None:
            raise IoFailure(f"ODS {self.path} is closed")
        return self._conn

    @property
    def closed(self) -> bool:
        return self._conn is None

    def close(self):
        if self._conn is not None:
            self._conn.close()
            self._conn = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __repr__(self):
        state = "closed" if self.closed else "open"
        return f"<OdsHandle {self.path} ({state})>"


def open_ods(path) -> OdsHandle:
    """Open (creating if needed) the ODS at ``path``. Idempotent."""
    target = str(path)
    if target != ":memory:":
        p = Path(path)
        if p.is_dir():
            raise IoFailure(f"{p} is a directory")
    try:
        conn = sqlite3.connect(target, check_same_thread=False, isolation_level=None)
        conn.execute("PRAGMA foreign_keys = ON")
        conn.execute(_REGISTRY_DDL)
    except sqlite3.Error as exc:
        raise IoFailure(f"cannot open ODS at {target}: {exc}") from exc
    return OdsHandle(target, conn)


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def record_load(handle: OdsHandle, source_uri, object_id=None, status="loaded",
                root_id=None, diagnostic=None) -> int:
    """Append a registry row and return its (strictly increasing) id."""
    if status not in STATUSES:
        raise ValueError(f"status must be one of {STATUSES}")
    with handle.write_lock:
        try:
            cur = handle.connection.execute(
                f'INSERT INTO "{REGISTRY_TABLE}" '
                '(source_uri, object_id, root_id, load_timestamp, status, diagnostic) '
                "VALUES (?, ?, ?, ?, ?, ?)",
                (str(source_uri), object_id, root_id, _now(), status, diagnostic),
            )
        except sqlite3.Error as exc:
            raise IoFailure(f"cannot write registry: {exc}") from exc
    return cur.lastrowid


def registry(handle: OdsHandle) -> list:
    """All registry rows as dicts, oldest first."""
    try:
        cur = handle.connection.execute(f'SELECT * FROM "{REGISTRY_TABLE}" ORDER BY id')
    except sqlite3.Error as exc:
        raise IoFailure(str(exc)) from exc
    names = [d[0] for d in cur.description]
    return [dict(zip(names, row)) for row in cur.fetchall()]


def find_root_id(handle: OdsHandle, object_id) -> int:
    """Root-table id of the most recent successful load of ``object_id``."""
    row = handle.connection.execute(
        f'SELECT root_id FROM "{REGISTRY_TABLE}" WHERE object_id = ? AND status = ? '
        "ORDER BY id DESC LIMIT 1",
        (object_id, "loaded"),
    ).fetchone()
    return None if row is None else row[0]
