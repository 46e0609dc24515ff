"""Shredding XML documents into rows, loading them, and rebuilding documents
from the database."""
from __future__ import annotations

import contextlib
import sqlite3
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import (
    ConstraintViolation,
    IdCollision,
    InvalidDocument,
    NullViolation,
    SchemaMismatch,
    StoreError,
    TableExists,
    UnknownRootId,
)
from .relational import InlinedColumn, RelationalSchema, TEXT, ddl_script, quote_identifier
from .validation import check_element
from .xmlgen import validate_xml


@dataclass(frozen=True)
class Row:
    table: str
    id: int
    parent_table: Optional[str] = None
    parent_column: Optional[str] = None
    parent_id: Optional[int] = None
    pos: Optional[int] = None
    values: dict = field(default_factory=dict)

    def columns(self) -> dict:
        out = {"id": self.id}
        if self.parent_column is not None:
            out[self.parent_column] = self.parent_id
        if self.pos is not None:
            out["pos"] = self.pos
        out.update(self.values)
        return out


@dataclass
class RowSet:
    """Insert batch for one document; parents always precede children."""

    rows: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def counts(self) -> dict:
        out = {}
        for r in self.rows:
            out[r.table] = out.get(r.table, 0) + 1
        return out

    @property
    def root(self) -> Row:
        return self.rows[0]

    def offset(self, offsets: dict) -> "RowSet":
        """Shift ids so that table ``t`` starts at ``offsets[t]`` instead of 1."""
        def shift(table, value):
            return value if value is None else value + offsets.get(table, 1) - 1

        return RowSet([
            replace(r, id=shift(r.table, r.id), parent_id=shift(r.parent_table, r.parent_id))
            for r in self.rows
        ])

    def check(self) -> list:
        """Return invariant violations (duplicate ids, forward references)."""
        problems = []
        seen = set()
        for i, r in enumerate(self.rows):
            key = (r.table, r.id)
            if key in seen:
                problems.append(f"row {i}: duplicate id {r.id} in {r.table}")
            if r.parent_table is not None and (r.parent_table, r.parent_id) not in seen:
                problems.append(f"row {i}: parent {r.parent_table}#{r.parent_id} not emitted earlier")
            seen.add(key)
        return problems


@dataclass(frozen=True)
class LoadReport:
    rows_inserted: dict

    @property
    def total(self) -> int:
        return sum(self.rows_inserted.values())


# -- shredding ---------------------------------------------------------------

class _Shredder:
    def __init__(self, schema):
        self.schema = schema
        self.counters = {}
        self.rows = []

    def own(self, name):
        m = self.schema.mapping.get(name)
        if m is None:
            raise SchemaMismatch(f"element <{name}> has no mapping in the schema")
        return m

    def visit(self, elem, parent=None, parent_id=None, pos=None):
        m = self.own(elem.tag)
        if isinstance(m, InlinedColumn):
            raise SchemaMismatch(f"element <{elem.tag}> is inlined and cannot appear here")
        rid = self.counters.get(m.table, 0) + 1
        self.counters[m.table] = rid

        values = {}
        if m.value_column is not None:
            values[m.value_column] = elem.text or None
        for att, col in m.attr_columns.items():
            values[col] = elem.get(att)
        for child in m.inline_children:
            slot = self.schema.mapping[child].slots[elem.tag]
            if slot.value_column is not None:
                values[slot.value_column] = None
            if slot.presence_column is not None:
                values[slot.presence_column] = 0
            for col in slot.attr_columns.values():
                values[col] = None

        deferred = []
        for i, child in enumerate(elem):
            cm = self.own(child.tag)
            if not isinstance(cm, InlinedColumn):
                deferred.append((i, child))
                continue
            slot = cm.slots.get(elem.tag)
            if slot is None:
                raise SchemaMismatch(f"<{child.tag}> is not mapped under <{elem.tag}>")
            if slot.value_column is not None:
                text = child.text or ""
                # an empty element is NULL unless the column is a mandatory text column
                values[slot.value_column] = (text or None) if slot.optional else text
            if slot.presence_column is not None:
                values[slot.presence_column] = 1
            for att, col in slot.attr_columns.items():
                values[col] = child.get(att)

        table = self.schema.table(m.table)
        for col in table.columns:
            if col.name in values and values[col.name] is None and not col.nullable:
                if col.type == TEXT:
                    values[col.name] = ""
                else:
                    raise NullViolation(f"{m.table}.{col.name} cannot be NULL")

        pcol = m.parent_columns.get(parent) if parent is not None else None
        ptable = self.schema.mapping[parent].table if parent is not None else None
        self.rows.append(Row(m.table, rid, ptable, pcol, parent_id, pos, values))
        for i, child in deferred:
            self.visit(child, elem.tag, rid, i)


def shred(doc, schema: RelationalSchema, validate: bool = True) -> RowSet:
    """Decompose one document into rows, ids counting from 1 per table."""
    doc = check_element(doc)
    if validate and schema.dtd is not None:
        report = validate_xml(doc, schema.dtd, root=schema.root)
        if report:
            raise InvalidDocument(report)
    if doc.tag != schema.root:
        raise SchemaMismatch(f"document root <{doc.tag}> is not <{schema.root}>")
    s = _Shredder(schema)
    s.visit(doc)
    return RowSet(s.rows)


# -- database access ---------------------------------------------------------

def _conn(db) -> sqlite3.Connection:
    return db.connection if hasattr(db, "connection") else db


def _lock(db):
    return getattr(db, "write_lock", None) or contextlib.nullcontext()


def existing_tables(db) -> set:
    rows = _conn(db).execute("SELECT name FROM sqlite_master WHERE type = 'table'").fetchall()
    return {r[0] for r in rows}


def create_schema(schema: RelationalSchema, db) -> str:
    """Create every table of ``schema`` in ``db``; returns the DDL script."""
    script = ddl_script(schema)
    with _lock(db):
        present = existing_tables(db)
        clash = [t.name for t in schema.tables if t.name in present]
        if clash:
            raise TableExists(f"tables already exist: {', '.join(clash)}")
        conn = _conn(db)
        conn.execute("SAVEPOINT create_schema")
        try:
            for stmt in script.split(";\n"):
                if stmt.strip():
                    conn.execute(stmt)
        except sqlite3.Error as exc:
            conn.execute("ROLLBACK TO create_schema")
            conn.execute("RELEASE create_schema")
            raise StoreError(str(exc)) from exc
        conn.execute("RELEASE create_schema")
        if conn.in_transaction:
            conn.commit()
    return script


def ensure_schema(schema: RelationalSchema, db) -> bool:
    """Create the schema unless all its tables exist. True if created."""
    with _lock(db):
        present = existing_tables(db)
        names = [t.name for t in schema.tables]
        if all(n in present for n in names):
            return False
        create_schema(schema, db)
        return True


def next_ids(schema: RelationalSchema, db) -> dict:
    """First free id per table, for rebasing a RowSet before loading."""
    conn = _conn(db)
    out = {}
    for t in schema.tables:
        (top,) = conn.execute(f"SELECT MAX(id) FROM {quote_identifier(t.name)}").fetchone()
        out[t.name] = (top or 0) + 1
    return out


def load(rows: RowSet, db) -> LoadReport:
    """Insert all rows of one document atomically."""
    seen = set()
    for r in rows:
        if (r.table, r.id) in seen:
            raise IdCollision(f"id {r.id} appears twice for table {r.table}")
        seen.add((r.table, r.id))
    counts = {}
    with _lock(db):
        conn = _conn(db)
        conn.execute("PRAGMA foreign_keys = ON")
        conn.execute("SAVEPOINT load_document")
        try:
            for r in rows:
                cols = r.columns()
                names = ", ".join(quote_identifier(c) for c in cols)
                marks = ", ".join("?" for _ in cols)
                conn.execute(
                    f"INSERT INTO {quote_identifier(r.table)} ({names}) VALUES ({marks})",
                    list(cols.values()),
                )
                counts[r.table] = counts.get(r.table, 0) + 1
        except sqlite3.IntegrityError as exc:
            conn.execute("ROLLBACK TO load_document")
            conn.execute("RELEASE load_document")
            msg = str(exc)
            if "UNIQUE" in msg or "PRIMARY KEY" in msg:
                raise IdCollision(msg) from exc
            raise ConstraintViolation(msg) from exc
        except sqlite3.Error as exc:
            conn.execute("ROLLBACK TO load_document")
            conn.execute("RELEASE load_document")
            raise StoreError(str(exc)) from exc
        conn.execute("RELEASE load_document")
        if conn.in_transaction:
            conn.commit()
    return LoadReport(counts)


def _select(conn, sql, args):
    cur = conn.execute(sql, args)
    names = [d[0] for d in cur.description]
    return [dict(zip(names, row)) for row in cur.fetchall()]


def _children(conn, table, parent_column, parent_id):
    return _select(
        conn,
        f"SELECT * FROM {quote_identifier(table)} "
        f"WHERE {quote_identifier(parent_column)} = ? ORDER BY pos",
        (parent_id,),
    )


def reconstruct(db, schema: RelationalSchema, root_id: int) -> ET.Element:
    """Rebuild the document whose root row has id ``root_id``."""
    conn = _conn(db)
    rows = _select(
        conn, f"SELECT * FROM {quote_identifier(schema.root_table)} WHERE id = ?", (root_id,))
    if not rows:
        raise UnknownRootId(f"no {schema.root_table} row with id {root_id}")
    return _rebuild(conn, schema, schema.root, rows[0])


def _rebuild(conn, schema, name, row):
    m = schema.mapping[name]
    elem = ET.Element(name)
    for att, col in m.attr_columns.items():
        if row[col] is not None:
            elem.set(att, row[col])
    if m.value_column is not None:
        elem.text = row[m.value_column] or ""

    placed = []
    for child in schema.child_tables(name):
        cm = schema.mapping[child]
        for child_row in _children(conn, cm.table, cm.parent_columns[name], row["id"]):
            placed.append((child_row["pos"], child, child_row))
    inlined = []
    for child in m.inline_children:
        slot = schema.mapping[child].slots[name]
        if slot.presence_column is not None and not row[slot.presence_column]:
            continue
        ie = ET.Element(child)
        if slot.value_column is not None:
            ie.text = row[slot.value_column] or ""
        for att, col in slot.attr_columns.items():
            if row[col] is not None:
                ie.set(att, row[col])
        inlined.append(ie)

    slots = [None] * (len(placed) + len(inlined))
    for pos, child, child_row in placed:
        if not 0 <= pos < len(slots) or slots[pos] is not None:
            raise StoreError(f"inconsistent pos {pos} under {name}#{row['id']}")
        slots[pos] = _rebuild(conn, schema, child, child_row)
    fill = iter(inlined)
    for i, s in enumerate(slots):
        if s is None:
            slots[i] = next(fill)
    elem.extend(slots)
    return elem


def load_document(doc, schema: RelationalSchema, db) -> tuple:
    """Shred, rebase onto free ids, and load; returns (root id, LoadReport)."""
    rows = shred(doc, schema)
    with _lock(db):
        rows = rows.offset(next_ids(schema, db))
        report = load(rows, db)
    return rows.root.id, report
