"""Document Type Definition model: AST, parser and serializer.

Only the element-structure subset of the DTD language is accepted:
``EMPTY``, ``(#PCDATA)``, nested sequence/choice groups with ``?``, ``*``
and ``+``, and ``ATTLIST`` declarations with ``CDATA`` or enumerated types.
Anything that would not survive a relational mapping (entities, notations,
ID/IDREF, ``ANY``, mixed content with element names) is rejected with
:class:`UnsupportedFeature`.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import (
    DanglingReference,
    DtdSyntaxError,
    DuplicateElement,
    UnsupportedFeature,
)

__all__ = [
    "Multiplicity",
    "Empty",
    "Pcdata",
    "NameRef",
    "Group",
    "AttDef",
    "DtdAst",
    "ContentModel",
    "Particle",
    "parse_dtd",
    "serialize_dtd",
    "is_xml_name",
    "referenced_names",
]


class Multiplicity(str, enum.Enum):
    ONE = ""
    OPTIONAL = "?"
    STAR = "*"
    PLUS = "+"

    @property
    def repeats(self) -> bool:
        return self in (Multiplicity.STAR, Multiplicity.PLUS)

    @property
    def may_be_absent(self) -> bool:
        return self in (Multiplicity.OPTIONAL, Multiplicity.STAR)


@dataclass(frozen=True)
class Empty:
    def __str__(self):
        return "EMPTY"


@dataclass(frozen=True)
class Pcdata:
    def __str__(self):
        return "(#PCDATA)"


@dataclass(frozen=True)
class NameRef:
    name: str
    mult: Multiplicity = Multiplicity.ONE

    def __str__(self):
        return self.name + self.mult.value


@dataclass(frozen=True)
class Group:
    kind: str  # "seq" or "choice"
    items: tuple
    mult: Multiplicity = Multiplicity.ONE

    def __post_init__(self):
        if self.kind not in ("seq", "choice"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if not self.items:
            raise ValueError("a group needs at least one item")
        if len(self.items) == 1 and self.kind == "choice":
            # "(a)" reads back as a sequence; keep one spelling
            object.__setattr__(self, "kind", "seq")

    def __str__(self):
        sep = ", " if self.kind == "seq" else " | "
        return "(" + sep.join(str(p) for p in self.items) + ")" + self.mult.value


Particle = Union[NameRef, Group]
ContentModel = Union[Empty, Pcdata, Group]


@dataclass(frozen=True)
class AttDef:
    """One attribute definition.

    ``type`` is ``"CDATA"`` or a tuple of the allowed enumeration values.
    ``default`` is one of ``"#REQUIRED"``, ``"#IMPLIED"``, ``"#FIXED"`` or
    ``""`` (a plain default value); ``value`` holds the literal for the last
    two.
    """

    name: str
    type: Union[str, tuple] = "CDATA"
    default: str = "#IMPLIED"
    value: Union[str, None] = None

    @property
    def required(self) -> bool:
        return self.default == "#REQUIRED"

    def __str__(self):
        typ = self.type if isinstance(self.type, str) else "(" + "|".join(self.type) + ")"
        out = f"{self.name} {typ} "
        if self.default in ("#REQUIRED", "#IMPLIED"):
            return out + self.default
        lit = '"' + _escape_literal(self.value or "") + '"'
        return out + (f"#FIXED {lit}" if self.default == "#FIXED" else lit)


@dataclass(frozen=True)
class DtdAst:
    elements: dict = field(default_factory=dict)
    attlists: dict = field(default_factory=dict)

    def __hash__(self):
        return hash(serialize_dtd(self))

    def content(self, name) -> ContentModel:
        return self.elements[name]

    def attributes(self, name) -> tuple:
        return self.attlists.get(name, ())


def referenced_names(model) -> Iterator[str]:
    """Yield element names used in a content model, in source order."""
    if isinstance(model, NameRef):
        yield model.name
    elif isinstance(model, Group):
        for item in model.items:
            yield from referenced_names(item)


# XML 1.0 (5th ed.) Name production
_NAME_START = (
    ":A-Z_a-zÀ-ÖØ-öø-˿Ͱ-ͽͿ-῿"
    "‌-‍⁰-↏Ⰰ-⿯、-퟿豈-﷏"
    "ﷰ-�\U00010000-\U000effff"
)
_NAME_CHAR = _NAME_START + r"\-.0-9·̀-ͯ‿-⁀"
_NAME_RE = re.compile(f"[{_NAME_START}][{_NAME_CHAR}]*")
_NMTOKEN_RE = re.compile(f"[{_NAME_CHAR}]+")

_UNSUPPORTED_ATT_TYPES = (
    "IDREFS", "IDREF", "ID", "ENTITIES", "ENTITY", "NMTOKENS", "NMTOKEN", "NOTATION",
)
_ENTITY_REFS = {"lt": "<", "gt": ">", "amp": "&", "quot": '"', "apos": "'"}


def is_xml_name(name) -> bool:
    return isinstance(name, str) and _NAME_RE.fullmatch(name) is not None


def _escape_literal(value):
    return value.replace("&", "&amp;").replace('"', "&quot;").replace("<", "&lt;")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    # -- low level ---------------------------------------------------------

    def where(self, pos=None):
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def fail(self, expected, pos=None):
        line, col = self.where(pos)
        raise DtdSyntaxError(line, col, expected)

    def eof(self):
        return self.pos >= len(self.text)

    def peek(self, s):
        return self.text.startswith(s, self.pos)

    def skip_ws(self):
        n = len(self.text)
        while self.pos < n and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def require_ws(self, expected="whitespace"):
        start = self.pos
        self.skip_ws()
        if self.pos == start:
            self.fail(expected)

    def expect(self, s):
        if not self.peek(s):
            self.fail(repr(s))
        self.pos += len(s)

    def name(self, what="a name"):
        m = _NAME_RE.match(self.text, self.pos)
        if not m:
            if self.peek("%"):
                raise UnsupportedFeature("parameter entity references are not supported")
            self.fail(what)
        self.pos = m.end()
        return m.group()

    def mult(self):
        ch = self.text[self.pos:self.pos + 1]
        if ch in ("?", "*", "+"):
            self.pos += 1
            return Multiplicity(ch)
        return Multiplicity.ONE

    # -- declarations ------------------------------------------------------

    def parse(self):
        elements = {}
        attlists = {}
        attlist_refs = []
        while True:
            self.skip_ws()
            if self.eof():
                break
            if self.peek("<!--"):
                end = self.text.find("-->", self.pos + 4)
                if end < 0:
                    self.fail("'-->'")
                self.pos = end + 3
            elif self.peek("<?"):
                end = self.text.find("?>", self.pos + 2)
                if end < 0:
                    self.fail("'?>'")
                self.pos = end + 2
            elif self.peek("<!ELEMENT"):
                self.pos += len("<!ELEMENT")
                self.require_ws()
                name = self.name("an element name")
                self.require_ws()
                model = self.contentspec(name)
                self.skip_ws()
                self.expect(">")
                if name in elements:
                    raise DuplicateElement(name)
                elements[name] = model
            elif self.peek("<!ATTLIST"):
                self.pos += len("<!ATTLIST")
                self.require_ws()
                owner = self.name("an element name")
                attlist_refs.append(owner)
                defs = attlists.setdefault(owner, [])
                while True:
                    self.skip_ws()
                    if self.peek(">"):
                        self.pos += 1
                        break
                    att = self.attdef()
                    # first declaration of an attribute is binding
                    if all(d.name != att.name for d in defs):
                        defs.append(att)
            elif self.peek("<!ENTITY"):
                raise UnsupportedFeature("entity declarations are not supported")
            elif self.peek("<!NOTATION"):
                raise UnsupportedFeature("notation declarations are not supported")
            elif self.peek("<!["):
                raise UnsupportedFeature("conditional sections are not supported")
            elif self.peek("%"):
                raise UnsupportedFeature("parameter entity references are not supported")
            else:
                self.fail("a markup declaration")
        for model in elements.values():
            for ref in referenced_names(model):
                if ref not in elements:
                    raise DanglingReference(ref)
        for owner in attlist_refs:
            if owner not in elements:
                raise DanglingReference(owner)
        return DtdAst(
            elements=elements,
            attlists={k: tuple(v) for k, v in attlists.items() if v},
        )

    def contentspec(self, owner):
        if self.peek("EMPTY"):
            self.pos += 5
            return Empty()
        if self.peek("ANY"):
            raise UnsupportedFeature(f"ANY content for {owner!r} is not supported")
        if not self.peek("("):
            self.fail("EMPTY, ANY or '('")
        save = self.pos
        self.pos += 1
        self.skip_ws()
        if self.peek("#PCDATA"):
            self.pos += len("#PCDATA")
            self.skip_ws()
            if self.peek("|"):
                raise UnsupportedFeature(
                    f"mixed content for {owner!r} is not supported"
                )
            self.expect(")")
            if self.peek("*"):
                self.pos += 1
            return Pcdata()
        self.pos = save
        return self.group()

    def group(self):
        self.expect("(")
        self.skip_ws()
        items = [self.cp()]
        kind = None
        while True:
            self.skip_ws()
            if self.peek(")"):
                self.pos += 1
                break
            sep_pos = self.pos
            if self.peek(","):
                sep = "seq"
            elif self.peek("|"):
                sep = "choice"
            else:
                self.fail("',', '|' or ')'")
            if kind is not None and sep != kind:
                self.fail("a consistent group separator", sep_pos)
            kind = sep
            self.pos += 1
            self.skip_ws()
            items.append(self.cp())
        return Group(kind or "seq", tuple(items), self.mult())

    def cp(self):
        if self.peek("("):
            return self.group()
        if self.peek("#PCDATA"):
            raise UnsupportedFeature("#PCDATA inside an element group is not supported")
        name = self.name("an element name or '('")
        return NameRef(name, self.mult())

    def attdef(self):
        name = self.name("an attribute name or '>'")
        self.require_ws()
        if self.peek("CDATA"):
            self.pos += 5
            typ = "CDATA"
        elif self.peek("("):
            self.pos += 1
            values = []
            while True:
                self.skip_ws()
                m = _NMTOKEN_RE.match(self.text, self.pos)
                if not m:
                    self.fail("an enumeration value")
                values.append(m.group())
                self.pos = m.end()
                self.skip_ws()
                if self.peek("|"):
                    self.pos += 1
                    continue
                self.expect(")")
                break
            typ = tuple(values)
        else:
            for kw in _UNSUPPORTED_ATT_TYPES:
                if self.peek(kw):
                    raise UnsupportedFeature(f"attribute type {kw} is not supported")
            self.fail("CDATA or an enumeration")
        self.require_ws()
        if self.peek("#REQUIRED"):
            self.pos += 9
            return AttDef(name, typ, "#REQUIRED")
        if self.peek("#IMPLIED"):
            self.pos += 8
            return AttDef(name, typ, "#IMPLIED")
        default = ""
        if self.peek("#FIXED"):
            self.pos += 6
            self.require_ws()
            default = "#FIXED"
        value = self.literal()
        if isinstance(typ, tuple) and value not in typ:
            self.fail(f"a default among {typ}")
        return AttDef(name, typ, default, value)

    def literal(self):
        quote = self.text[self.pos:self.pos + 1]
        if quote not in ("'", '"'):
            self.fail("a quoted default value")
        end = self.text.find(quote, self.pos + 1)
        if end < 0:
            self.fail("a closing quote")
        raw = self.text[self.pos + 1:end]
        self.pos = end + 1
        if "<" in raw:
            self.fail("no '<' in an attribute value")
        return re.sub(r"&([^;]*);", _decode_ref, raw)


def _decode_ref(m):
    ref = m.group(1)
    if ref in _ENTITY_REFS:
        return _ENTITY_REFS[ref]
    if ref.startswith("#x"):
        return chr(int(ref[2:], 16))
    if ref.startswith("#"):
        return chr(int(ref[1:]))
    raise UnsupportedFeature(f"entity reference &{ref}; is not supported")


def parse_dtd(text: str) -> DtdAst:
    """Parse DTD source text into a :class:`DtdAst`."""
    return _Parser(text).parse()


def serialize_dtd(ast: DtdAst) -> str:
    """Render an AST back to DTD text. The output is stable for a given AST."""
    lines = []
    for name, model in ast.elements.items():
        lines.append(f"<!ELEMENT {name} {model}>")
        defs = ast.attlists.get(name)
        if defs:
            body = "\n".join(f"    {d}" for d in defs)
            lines.append(f"<!ATTLIST {name}\n{body}>")
    return "\n".join(lines) + "\n"
