"""Compile a DTD into a relational schema (hybrid inlining).

Mapping rules, applied per declared element:

* The root, every element with group content, every element that can repeat
  or sits under a choice (on any path from a parent), every element used
  more than once in one parent's content model, and every element nobody
  references gets its own table: ``id`` primary key, a parent foreign key and
  a ``pos`` column holding its index among the parent's element children.
  Text-only elements in their own table keep their text in ``value``.
* Any other element is text-only or EMPTY and occurs at most once per parent
  through sequences only; it is inlined as columns of each parent's table.
  A text column is ``NOT NULL`` when the element is mandatory on the whole
  path.  Optional elements get an extra ``<name>_present`` flag so that an
  absent element and an empty one stay distinguishable.  EMPTY elements
  become a 0/1 ``INTEGER`` column.
* Attributes become ``TEXT`` columns on the element's table, or
  ``<element>_<attribute>`` on the inlining owner's table; they are nullable
  unless ``#REQUIRED`` on a mandatory element.
* Identifiers are lower-cased names; clashes get ``_2``, ``_3``... in
  declaration order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .dtd import DtdAst, Empty, Group, Multiplicity, NameRef, Pcdata, referenced_names
from .errors import MappingError, NameCollisionOverflow, RootNotTopLevel, AmbiguousRoot

REGISTRY_TABLE = "_ods_registry"
MAX_COLLISIONS = 99

INTEGER, REAL, TEXT = "INTEGER", "REAL", "TEXT"


@dataclass(frozen=True)
class Column:
    name: str
    type: str = TEXT
    nullable: bool = True


@dataclass(frozen=True)
class ForeignKey:
    column: str
    table: str
    ref_column: str = "id"


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple
    primary_key: str = "id"
    foreign_keys: tuple = ()

    def column(self, name) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class OwnTable:
    """Element stored as rows of its own table."""

    table: str
    parent_columns: dict = field(default_factory=dict)  # parent element -> FK column
    value_column: Optional[str] = None
    attr_columns: dict = field(default_factory=dict)  # attribute -> column
    inline_children: tuple = ()  # inlined child elements in content-model order


@dataclass(frozen=True)
class InlineSlot:
    table: str
    value_column: Optional[str]  # text columns; None for EMPTY elements
    presence_column: Optional[str]  # 0/1 flag; None for mandatory text elements
    attr_columns: dict = field(default_factory=dict)
    optional: bool = False


@dataclass(frozen=True)
class InlinedColumn:
    """Element stored as columns of each owning parent's table."""

    slots: dict  # owner element -> InlineSlot

    def slot(self, owner) -> InlineSlot:
        return self.slots[owner]


Mapping = Union[OwnTable, InlinedColumn]


@dataclass(frozen=True)
class RelationalSchema:
    root: str
    tables: tuple
    mapping: dict
    dtd: DtdAst = field(repr=False, compare=False, default=None)

    def table(self, name) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    @property
    def root_table(self) -> str:
        return self.mapping[self.root].table

    def own_tables(self):
        """(element, OwnTable) pairs in table order."""
        by_table = {m.table: (e, m) for e, m in self.mapping.items() if isinstance(m, OwnTable)}
        return [by_table[t.name] for t in self.tables]

    def child_tables(self, element) -> list:
        """Own-table elements that may appear directly under ``element``."""
        out = []
        for name, m in self.mapping.items():
            if isinstance(m, OwnTable) and element in m.parent_columns:
                out.append(name)
        return out


def infer_root(ast: DtdAst) -> str:
    """The single declared element that no content model references."""
    used = {n for model in ast.elements.values() for n in referenced_names(model)}
    candidates = [name for name in ast.elements if name not in used]
    if len(candidates) != 1:
        raise AmbiguousRoot(
            f"expected exactly one top-level element, found {candidates or 'none'}"
        )
    return candidates[0]


@dataclass
class _Occurrence:
    child: str
    inline_safe: bool
    optional: bool


def _occurrences(particle, in_choice=False, repeated=False, optional=False):
    mult = particle.mult
    repeated = repeated or mult.repeats
    optional = optional or mult is Multiplicity.OPTIONAL
    if isinstance(particle, NameRef):
        yield _Occurrence(particle.name, not (in_choice or repeated), optional)
        return
    in_choice = in_choice or particle.kind == "choice"
    for item in particle.items:
        yield from _occurrences(item, in_choice, repeated, optional)


class _Namer:
    def __init__(self, reserved=()):
        self.used = {r.lower() for r in reserved}

    def __call__(self, base):
        base = base.lower()
        if base.startswith("sqlite_"):
            base = "x_" + base
        if base not in self.used:
            self.used.add(base)
            return base
        for n in range(2, MAX_COLLISIONS + 2):
            cand = f"{base}_{n}"
            if cand not in self.used:
                self.used.add(cand)
                return cand
        raise NameCollisionOverflow(f"more than {MAX_COLLISIONS} collisions for {base!r}")


def dtd_to_relational(ast: DtdAst, root: str = None) -> RelationalSchema:
    """Derive tables and the element mapping for documents rooted at ``root``."""
    if root is None:
        root = infer_root(ast)
    if root not in ast.elements:
        raise MappingError(f"root element {root!r} is not declared")

    # parent element -> ordered occurrences of its children
    occ = {}
    parents = {name: [] for name in ast.elements}
    for name, model in ast.elements.items():
        if isinstance(model, Group):
            occ[name] = list(_occurrences(model))
            for o in occ[name]:
                if name not in parents[o.child]:
                    parents[o.child].append(name)
    if parents[root]:
        raise RootNotTopLevel(f"root {root!r} appears inside {parents[root]}")

    def needs_table(name):
        if name == root or isinstance(ast.elements[name], Group) or not parents[name]:
            return True
        for p in parents[name]:
            mine = [o for o in occ[p] if o.child == name]
            if len(mine) > 1 or not mine[0].inline_safe:
                return True
        return False

    own = [name for name in ast.elements if needs_table(name)]
    table_namer = _Namer(reserved=[REGISTRY_TABLE])
    table_names = {name: table_namer(name) for name in own}

    mapping = {}
    tables = []
    inline_slots = {name: {} for name in ast.elements if name not in table_names}
    for name in own:
        tname = table_names[name]
        cols = _Namer()
        columns = [Column(cols("id"), INTEGER, nullable=False)]
        fks = []
        parent_columns = {}
        pars = parents[name]
        if len(pars) == 1:
            c = cols("parent_id")
            columns.append(Column(c, INTEGER, nullable=False))
            fks.append(ForeignKey(c, table_names[pars[0]]))
            parent_columns[pars[0]] = c
        else:
            for p in pars:
                c = cols(f"parent_{table_names[p]}_id")
                columns.append(Column(c, INTEGER, nullable=True))
                fks.append(ForeignKey(c, table_names[p]))
                parent_columns[p] = c
        if pars:
            columns.append(Column(cols("pos"), INTEGER, nullable=False))
        value_column = None
        if isinstance(ast.elements[name], Pcdata):
            value_column = cols("value")
            columns.append(Column(value_column, TEXT, nullable=True))
        attr_columns = {}
        for att in ast.attributes(name):
            c = cols(att.name)
            attr_columns[att.name] = c
            columns.append(Column(c, TEXT, nullable=not att.required))

        inline_children = []
        for o in occ.get(name, ()):
            if o.child in table_names:
                continue
            inline_children.append(o.child)
            child_model = ast.elements[o.child]
            if isinstance(child_model, Empty):
                value_col = None
                presence = cols(o.child)
                columns.append(Column(presence, INTEGER, nullable=False))
            else:
                value_col = cols(o.child)
                columns.append(Column(value_col, TEXT, nullable=o.optional))
                presence = None
                if o.optional:
                    presence = cols(f"{o.child}_present")
                    columns.append(Column(presence, INTEGER, nullable=False))
            child_attrs = {}
            for att in ast.attributes(o.child):
                c = cols(f"{o.child}_{att.name}")
                child_attrs[att.name] = c
                columns.append(Column(c, TEXT, nullable=o.optional or not att.required))
            inline_slots[o.child][name] = InlineSlot(
                tname, value_col, presence, child_attrs, o.optional)

        mapping[name] = OwnTable(
            tname, parent_columns, value_column, attr_columns, tuple(inline_children))
        tables.append(Table(tname, tuple(columns), "id", tuple(fks)))

    for name, slots in inline_slots.items():
        mapping[name] = InlinedColumn(slots)
    mapping = {name: mapping[name] for name in ast.elements}
    return RelationalSchema(root, tuple(_dependency_order(tables)), mapping, ast)


def _dependency_order(tables):
    """Parents before children; declaration order breaks ties and cycles."""
    remaining = list(tables)
    done = set()
    out = []
    while remaining:
        for t in remaining:
            deps = {fk.table for fk in t.foreign_keys} - {t.name}
            if deps <= done:
                break
        else:
            t = remaining[0]
        remaining.remove(t)
        done.add(t.name)
        out.append(t)
    return out


def _quote(ident):
    return '"' + ident.replace('"', '""') + '"'


def ddl_script(schema: RelationalSchema) -> str:
    """CREATE TABLE statements for ``schema``, parents first."""
    stmts = []
    for t in schema.tables:
        lines = []
        for c in t.columns:
            line = f"    {_quote(c.name)} {c.type}"
            if c.name == t.primary_key:
                line += " PRIMARY KEY"
            elif not c.nullable:
                line += " NOT NULL"
            lines.append(line)
        for fk in t.foreign_keys:
            lines.append(
                f"    FOREIGN KEY ({_quote(fk.column)}) "
                f"REFERENCES {_quote(fk.table)} ({_quote(fk.ref_column)})"
            )
        stmts.append(f"CREATE TABLE {_quote(t.name)} (\n" + ",\n".join(lines) + "\n);\n")
    return "\n".join(stmts)


quote_identifier = _quote
