import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from complex_etl.dtd import parse_dtd
from complex_etl.errors import AmbiguousRoot, NameCollisionOverflow, RootNotTopLevel
from complex_etl.relational import (
    REGISTRY_TABLE,
    InlinedColumn,
    OwnTable,
    ddl_script,
    dtd_to_relational,
    infer_root,
    quote_identifier,
)
from complex_etl.xmlgen import canonical_dtd

from randdtd import random_dtd

HERE = Path(__file__).parent
FEATURES = sorted(p.stem for p in (HERE / "fixtures" / "features").glob("*.dtd"))


def _schema(text, root=None):
    return dtd_to_relational(parse_dtd(text), root)


def test_inlines_single_text_children_and_tables_repeated_ones():
    s = _schema("<!ELEMENT a (b, c*)><!ELEMENT b (#PCDATA)><!ELEMENT c (#PCDATA)>")
    assert s.root_table == "a"
    assert [c.name for c in s.table("a").columns] == ["id", "b"]
    assert [c.name for c in s.table("c").columns] == ["id", "parent_id", "pos", "value"]
    assert isinstance(s.mapping["b"], InlinedColumn)
    assert isinstance(s.mapping["c"], OwnTable)


def test_mapping_is_total():
    ast = canonical_dtd()
    schema = dtd_to_relational(ast)
    assert set(schema.mapping) == set(ast.elements)


def test_required_text_is_not_null_optional_gets_presence_flag():
    t = _schema("<!ELEMENT a (b, c?)><!ELEMENT b (#PCDATA)><!ELEMENT c (#PCDATA)>").table("a")
    assert not t.column("b").nullable
    assert t.column("c").nullable
    assert not t.column("c_present").nullable


def test_empty_element_inlines_as_flag():
    t = _schema("<!ELEMENT a (flag?)><!ELEMENT flag EMPTY>").table("a")
    assert t.column("flag").type == "INTEGER" and not t.column("flag").nullable


def test_attribute_columns():
    s = _schema('<!ELEMENT a (b)><!ATTLIST a k CDATA #REQUIRED><!ELEMENT b EMPTY>'
                '<!ATTLIST b w CDATA #IMPLIED>')
    assert not s.table("a").column("k").nullable
    assert s.table("a").column("b_w").nullable


def test_column_name_collisions_get_suffixes():
    s = _schema("<!ELEMENT Item (id, pos, value, parent_id, item*)>"
                "<!ELEMENT id (#PCDATA)><!ELEMENT pos (#PCDATA)><!ELEMENT value (#PCDATA)>"
                "<!ELEMENT parent_id (#PCDATA)><!ELEMENT item (#PCDATA)>")
    assert [c.name for c in s.table("item").columns] == [
        "id", "id_2", "pos", "value", "parent_id"]
    assert [c.name for c in s.table("item_2").columns] == [
        "id", "parent_id", "pos", "value"]


def test_reserved_and_sqlite_names_are_avoided():
    s = _schema("<!ELEMENT _ods_registry (sqlite_x*)><!ELEMENT sqlite_x EMPTY>")
    names = [t.name for t in s.tables]
    assert REGISTRY_TABLE not in names
    assert not any(name.startswith("sqlite_") for name in names)


def test_collision_overflow():
    # 101 distinct elements that all lower-case to the same table name
    names = ["x" + "".join(c.upper() if (i >> k) & 1 else c for k, c in enumerate("abcdefg"))
             for i in range(101)]
    text = ("<!ELEMENT r (" + ", ".join(n + "*" for n in names) + ")>"
            + "".join(f"<!ELEMENT {n} EMPTY>" for n in names))
    with pytest.raises(NameCollisionOverflow):
        dtd_to_relational(parse_dtd(text))


def test_root_inference():
    ast = parse_dtd("<!ELEMENT a (b)><!ELEMENT b EMPTY>")
    assert infer_root(ast) == "a"
    with pytest.raises(AmbiguousRoot):
        infer_root(parse_dtd("<!ELEMENT a EMPTY><!ELEMENT b EMPTY>"))


def test_root_inside_another_model():
    with pytest.raises(RootNotTopLevel):
        dtd_to_relational(parse_dtd("<!ELEMENT a (b)><!ELEMENT b EMPTY>"), root="b")


def test_shared_child_gets_one_fk_per_parent():
    s = _schema("<!ELEMENT r (p, q)><!ELEMENT p (x*)><!ELEMENT q (x*)><!ELEMENT x EMPTY>")
    cols = {c.name: c for c in s.table("x").columns}
    assert "parent_p_id" in cols and "parent_q_id" in cols
    assert cols["parent_p_id"].nullable


def test_ddl_orders_parents_first_and_is_deterministic():
    schema = dtd_to_relational(canonical_dtd())
    script = ddl_script(schema)
    assert script == ddl_script(dtd_to_relational(canonical_dtd()))
    assert script.index('CREATE TABLE "complex_object"') < script.index('CREATE TABLE "keywords"')
    assert script.index('CREATE TABLE "keywords"') < script.index('CREATE TABLE "keyword"')


def test_quote_identifier():
    assert quote_identifier('we"ird') == '"we""ird"'


@pytest.mark.parametrize("name", FEATURES + ["complex_object"])
def test_golden_schema(name):
    if name == "complex_object":
        ast = canonical_dtd()
    else:
        ast = parse_dtd((HERE / "fixtures" / "features" / f"{name}.dtd").read_text())
    golden = (HERE / "golden" / f"{name}.sql").read_bytes()
    assert ddl_script(dtd_to_relational(ast)).encode("utf-8") == golden


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_random_schemas_are_total_and_deterministic(seed):
    ast, root = random_dtd(random.Random(seed))
    schema = dtd_to_relational(ast, root)
    assert set(schema.mapping) == set(ast.elements)
    assert ddl_script(schema) == ddl_script(dtd_to_relational(ast, root))
    for table in schema.tables:
        names = [c.name for c in table.columns]
        assert len(names) == len(set(names))
