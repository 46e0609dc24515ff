import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from complex_etl.errors import ObjectInvalid
from complex_etl.model import AttributeSet, SubdocumentClass, wrap
from complex_etl.xmlgen import (
    CANONICAL_ROOT,
    canonical_dtd,
    canonical_xml,
    emit_xml,
    read_xml,
    to_xml_string,
    validate_xml,
    write_xml,
)

BASE = {
    "object_id": "x-1",
    "name": "x.bin",
    "source_uri": "file:///x.bin",
    "size_bytes": 1,
    "format": "application/octet-stream",
}

PAYLOADS = {
    SubdocumentClass.TEXT: {"encoding": "utf-8", "word_count": 2, "line_count": 1},
    SubdocumentClass.IMAGE: {"width_px": 4, "height_px": 3, "bit_depth": 24, "image_format": "PNG"},
    SubdocumentClass.SOUND: {"duration_ms": 10, "sample_rate_hz": 8000, "channels": 1},
    SubdocumentClass.VIDEO: {"duration_ms": 10, "width_px": 4, "height_px": 3},
    SubdocumentClass.RELATIONAL_VIEW: {"column_names": ["a", "b"], "column_types": ["integer", "text"],
                                       "row_count": 2},
}


def _obj(cls, **extra):
    a = AttributeSet(cls)
    for k, v in {**BASE, **PAYLOADS[cls], **extra}.items():
        a.set(k, v)
    return wrap(a)


@pytest.mark.parametrize("cls", list(SubdocumentClass))
def test_emitted_documents_are_valid(cls):
    doc = emit_xml(_obj(cls, keywords=["k"], author="A & B <c>"))
    assert doc.tag == CANONICAL_ROOT
    assert validate_xml(doc, canonical_dtd(), CANONICAL_ROOT).ok
    assert doc.find(cls.element) is not None


def test_choice_member_differs_per_class():
    members = {list(emit_xml(_obj(c)))[-1].tag for c in SubdocumentClass}
    assert len(members) == len(SubdocumentClass)


def test_relational_view_uses_attributes():
    doc = emit_xml(_obj(SubdocumentClass.RELATIONAL_VIEW))
    cols = doc.findall("relational_view/column")
    assert [(c.get("name"), c.get("type")) for c in cols] == [("a", "integer"), ("b", "text")]


def test_absent_optional_values_become_empty_elements():
    doc = emit_xml(_obj(SubdocumentClass.TEXT))
    for tag in ("created", "modified", "language", "author", "description"):
        elem = doc.find(tag)
        assert elem is not None and not elem.text


def test_invalid_object_is_refused():
    with pytest.raises(ObjectInvalid):
        emit_xml(_obj(SubdocumentClass.IMAGE, width_px=0))


def test_validate_reports_undeclared_and_bad_attributes():
    dtd = canonical_dtd()
    doc = emit_xml(_obj(SubdocumentClass.RELATIONAL_VIEW))
    doc.find("relational_view/column").set("type", "blob")
    ET.SubElement(doc, "surprise")
    text = str(validate_xml(doc, dtd))
    assert "blob" in text and "surprise" in text


def test_canonical_form_ignores_layout_and_attribute_order():
    a = ET.fromstring('<r x="1" y="2">\n  <c/>\n  <d>t</d>\n</r>')
    b = ET.fromstring('<r y="2" x="1"><c></c><d>t</d></r>')
    assert canonical_xml(a) == canonical_xml(b)
    assert canonical_xml(a) != canonical_xml(ET.fromstring('<r x="1" y="2"><c/><d>u</d></r>'))


def test_file_round_trip(tmp_path):
    doc = emit_xml(_obj(SubdocumentClass.SOUND, description="ünï"))
    path = write_xml(doc, tmp_path / "s.xml", doctype="complex_object.dtd")
    raw = path.read_bytes()
    assert raw.startswith(b'<?xml version="1.0" encoding="UTF-8"?>')
    assert b'<!DOCTYPE complex_object SYSTEM "complex_object.dtd">' in raw
    assert canonical_xml(read_xml(path)) == canonical_xml(doc)
    assert to_xml_string(doc) == to_xml_string(doc)


_text = st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc")), max_size=12)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(list(SubdocumentClass)), _text, st.lists(_text.filter(bool), max_size=3),
       st.one_of(st.none(), _text))
def test_emit_then_validate(cls, name, keywords, author):
    obj = _obj(cls, name=name or "n", keywords=keywords, author=author)
    doc = emit_xml(obj)
    assert validate_xml(doc, canonical_dtd(), CANONICAL_ROOT).ok
    assert canonical_xml(ET.fromstring(to_xml_string(doc).encode("utf-8"))) == canonical_xml(doc)
