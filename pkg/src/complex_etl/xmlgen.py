"""XML side of the pipeline: the canonical complex-object DTD, document
emission by walking that DTD, validation, and canonical serialization."""
from __future__ import annotations

import functools
import xml.etree.ElementTree as ET
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

from .contentmodel import matcher_for
from .dtd import DtdAst, Empty, Group, NameRef, Pcdata, parse_dtd, serialize_dtd
from .errors import ObjectInvalid
from .model import ComplexObject, validate
from .validation import ValidationReport, check_element

XmlDocument = ET.Element

CANONICAL_ROOT = "complex_object"

_CANONICAL_DTD_TEXT = """\
<!ELEMENT complex_object (object_id, name, source_uri, size_bytes, created?, modified?,
    format, language?, keywords, author?, description?,
    (text | image | sound | video | relational_view))>
<!ELEMENT object_id (#PCDATA)>
<!ELEMENT name (#PCDATA)>
<!ELEMENT source_uri (#PCDATA)>
<!ELEMENT size_bytes (#PCDATA)>
<!ELEMENT created (#PCDATA)>
<!ELEMENT modified (#PCDATA)>
<!ELEMENT format (#PCDATA)>
<!ELEMENT language (#PCDATA)>
<!ELEMENT keywords (keyword*)>
<!ELEMENT keyword (#PCDATA)>
<!ELEMENT author (#PCDATA)>
<!ELEMENT description (#PCDATA)>
<!ELEMENT text (encoding?, word_count?, line_count?)>
<!ELEMENT encoding (#PCDATA)>
<!ELEMENT word_count (#PCDATA)>
<!ELEMENT line_count (#PCDATA)>
<!ELEMENT image (width_px?, height_px?, bit_depth?, image_format?)>
<!ELEMENT width_px (#PCDATA)>
<!ELEMENT height_px (#PCDATA)>
<!ELEMENT bit_depth (#PCDATA)>
<!ELEMENT image_format (#PCDATA)>
<!ELEMENT sound (duration_ms?, sample_rate_hz?, channels?)>
<!ELEMENT duration_ms (#PCDATA)>
<!ELEMENT sample_rate_hz (#PCDATA)>
<!ELEMENT channels (#PCDATA)>
<!ELEMENT video (duration_ms?, width_px?, height_px?)>
<!ELEMENT relational_view (column+, row_count?)>
<!ELEMENT column EMPTY>
<!ATTLIST column
    name CDATA #REQUIRED
    type (integer|real|text) #REQUIRED>
<!ELEMENT row_count (#PCDATA)>
"""


@functools.lru_cache(maxsize=None)
def _canonical():
    return parse_dtd(_CANONICAL_DTD_TEXT)


def canonical_dtd() -> DtdAst:
    """The fixed DTD describing a complex object."""
    return _canonical()


def canonical_dtd_text() -> str:
    return serialize_dtd(_canonical())


# -- emission ----------------------------------------------------------------

def _text(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


class _Emitter:
    def __init__(self, dtd):
        self.dtd = dtd

    def element(self, name, value):
        elem = ET.Element(name)
        if isinstance(value, dict):
            for att in self.dtd.attributes(name):
                v = value.get("@" + att.name)
                if v is not None:
                    elem.set(att.name, _text(v))
        model = self.dtd.elements[name]
        if isinstance(model, Pcdata):
            # a missing value is written as an empty element
            elem.text = _text(value) if not isinstance(value, dict) else ""
        elif isinstance(model, Group):
            self.particle(elem, model, value if isinstance(value, dict) else {})
        return elem

    def particle(self, parent, particle, ctx):
        mult = particle.mult
        if isinstance(particle, NameRef):
            value = ctx.get(particle.name)
            if mult.repeats:
                items = list(value) if isinstance(value, (list, tuple)) else (
                    [] if value is None else [value])
                if not items and mult.value == "+":
                    items = [None]
                for item in items:
                    parent.append(self.element(particle.name, item))
            else:
                parent.append(self.element(particle.name, value))
            return
        if particle.kind == "choice":
            chosen = self._choose(particle, ctx)
            if chosen is None:
                if mult.may_be_absent:
                    return
                raise ObjectInvalid(
                    f"no value for any of {[str(p) for p in particle.items]} under <{parent.tag}>"
                )
            self.particle(parent, chosen, ctx)
            return
        for item in particle.items:
            self.particle(parent, item, ctx)

    def _choose(self, group, ctx):
        for item in group.items:
            if any(ctx.get(n) is not None for n in _names(item)):
                return item
        return None


def _names(particle):
    if isinstance(particle, NameRef):
        yield particle.name
    else:
        for item in particle.items:
            yield from _names(item)


def emit_xml(obj: ComplexObject, dtd: DtdAst = None, root: str = CANONICAL_ROOT) -> XmlDocument:
    """Build the XML document for ``obj`` by walking ``dtd`` from ``root``.

    Child order follows the declared sequences.  Optional values that the
    object lacks are written as empty elements; the payload choice is
    resolved by the object's subdocument class.
    """
    report = validate(obj)
    if report:
        raise ObjectInvalid(str(report))
    dtd = canonical_dtd() if dtd is None else dtd
    if root not in dtd.elements:
        raise ObjectInvalid(f"root element {root!r} is not declared")
    doc = _Emitter(dtd).element(root, obj.to_record())
    check = validate_xml(doc, dtd, root=root)
    if check:
        raise ObjectInvalid(f"emitted document does not validate: {check}")
    return doc


# -- validation --------------------------------------------------------------

def _blank(s):
    return s is None or not s.strip(" \t\r\n")


def validate_xml(doc, dtd: DtdAst, root: str = None) -> ValidationReport:
    """Check ``doc`` against ``dtd``; returns an empty report iff valid."""
    doc = check_element(doc)
    report = ValidationReport()
    if root is not None and doc.tag != root:
        report.add(f"/{doc.tag}", f"root element must be <{root}>")
    _validate_element(doc, dtd, f"/{doc.tag}", report)
    return report


def _validate_element(elem, dtd, path, report):
    name = elem.tag
    if not isinstance(name, str):
        report.add(path, "comments and processing instructions are not allowed")
        return
    model = dtd.elements.get(name)
    if model is None:
        report.add(path, f"element <{name}> is not declared")
        return

    declared = {a.name: a for a in dtd.attributes(name)}
    for att_name, value in elem.attrib.items():
        att = declared.get(att_name)
        if att is None:
            report.add(path, f"attribute {att_name!r} is not declared")
        elif isinstance(att.type, tuple) and value not in att.type:
            report.add(path, f"attribute {att_name}={value!r} not among {list(att.type)}")
        elif att.default == "#FIXED" and value != att.value:
            report.add(path, f"attribute {att_name} must be {att.value!r}")
    for att in declared.values():
        if att.required and att.name not in elem.attrib:
            report.add(path, f"required attribute {att.name!r} is missing")

    children = list(elem)
    if isinstance(model, Empty):
        if children or elem.text:
            report.add(path, "EMPTY element must have no content")
        return
    if isinstance(model, Pcdata):
        if children:
            report.add(path, f"text-only element has child <{children[0].tag}>")
        return

    if not _blank(elem.text) or any(not _blank(c.tail) for c in children):
        report.add(path, "character data is not allowed in element content")
    names = [c.tag for c in children]
    result = matcher_for(model).match(names)
    if not result:
        expected = " | ".join(result.expected) or "end of content"
        if result.position < len(names):
            report.add(
                path,
                f"child {result.position} <{names[result.position]}> not allowed "
                f"by {model}; expected {expected}",
            )
        else:
            report.add(
                path,
                f"content ends after {len(names)} children, {model} requires {expected}",
            )
    counts = {}
    for child in children:
        counts[child.tag] = counts.get(child.tag, 0) + 1
        _validate_element(child, dtd, f"{path}/{child.tag}[{counts[child.tag]}]", report)


# -- serialization -----------------------------------------------------------

def canonical_xml(doc) -> str:
    """Whitespace- and attribute-order-normalized form used for equality."""
    doc = check_element(doc)
    parts = []
    _canon(doc, parts)
    return "".join(parts)


def _canon(elem, out):
    attrs = "".join(f" {k}={quoteattr(v)}" for k, v in sorted(elem.attrib.items()))
    out.append(f"<{elem.tag}{attrs}>")
    children = list(elem)
    if children:
        for child in children:
            _canon(child, out)
    elif elem.text:
        out.append(escape(elem.text))
    out.append(f"</{elem.tag}>")


def to_xml_string(doc, doctype: str = None, indent: bool = True) -> str:
    """Serialize with an XML declaration; ``doctype`` names the system DTD."""
    doc = check_element(doc)
    if indent:
        doc = _indented_copy(doc)
    head = '<?xml version="1.0" encoding="UTF-8"?>\n'
    if doctype:
        head += f'<!DOCTYPE {doc.tag} SYSTEM "{doctype}">\n'
    return head + ET.tostring(doc, encoding="unicode") + "\n"


def _indented_copy(doc):
    # only element-content nodes get whitespace; text leaves stay exact
    copy = ET.fromstring(ET.tostring(doc))
    ET.indent(copy, space="  ")
    return copy


def write_xml(doc, path, doctype: str = None) -> Path:
    path = Path(path)
    path.write_text(to_xml_string(doc, doctype=doctype), encoding="utf-8")
    return path


def read_xml(path) -> XmlDocument:
    return ET.parse(path).getroot()
