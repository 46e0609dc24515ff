"""Complex-object model: one superclass with five typed subdocument payloads.

The attribute lists below are a working set chosen to be recoverable from
file headers; they are not a reproduction of any published UML model.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, fields
from datetime import datetime
from typing import Optional, Union

from .errors import ClassPayloadMismatch, MissingMandatoryAttribute, UnknownAttribute
from .validation import ValidationReport


class SubdocumentClass(str, enum.Enum):
    TEXT = "Text"
    IMAGE = "Image"
    SOUND = "Sound"
    VIDEO = "Video"
    RELATIONAL_VIEW = "RelationalView"

    @property
    def element(self) -> str:
        """Name of the XML element carrying this class's payload."""
        return _ELEMENT_NAMES[self]

    @classmethod
    def parse(cls, value) -> "SubdocumentClass":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace(" ", "")
        for member in cls:
            if key in (member.value.lower(), member.element.replace("_", "")):
                return member
        raise ValueError(f"unknown subdocument class {value!r}")


_ELEMENT_NAMES = {
    SubdocumentClass.TEXT: "text",
    SubdocumentClass.IMAGE: "image",
    SubdocumentClass.SOUND: "sound",
    SubdocumentClass.VIDEO: "video",
    SubdocumentClass.RELATIONAL_VIEW: "relational_view",
}


class Provenance(str, enum.Enum):
    MANUAL = "Manual"
    STANDARD = "Standard"
    ALGORITHMIC = "Algorithmic"


COLUMN_TYPES = ("integer", "real", "text")


@dataclass(frozen=True)
class TextPayload:
    encoding: Optional[str] = None
    word_count: Optional[int] = None
    line_count: Optional[int] = None


@dataclass(frozen=True)
class ImagePayload:
    width_px: Optional[int] = None
    height_px: Optional[int] = None
    bit_depth: Optional[int] = None
    image_format: Optional[str] = None


@dataclass(frozen=True)
class SoundPayload:
    duration_ms: Optional[int] = None
    sample_rate_hz: Optional[int] = None
    channels: Optional[int] = None


@dataclass(frozen=True)
class VideoPayload:
    duration_ms: Optional[int] = None
    width_px: Optional[int] = None
    height_px: Optional[int] = None


@dataclass(frozen=True)
class RelationalViewPayload:
    column_names: tuple = ()
    column_types: tuple = ()
    row_count: Optional[int] = None


Payload = Union[TextPayload, ImagePayload, SoundPayload, VideoPayload, RelationalViewPayload]

PAYLOAD_TYPES = {
    SubdocumentClass.TEXT: TextPayload,
    SubdocumentClass.IMAGE: ImagePayload,
    SubdocumentClass.SOUND: SoundPayload,
    SubdocumentClass.VIDEO: VideoPayload,
    SubdocumentClass.RELATIONAL_VIEW: RelationalViewPayload,
}

PAYLOAD_FIELDS = {
    cls: tuple(f.name for f in fields(typ)) for cls, typ in PAYLOAD_TYPES.items()
}
ALL_PAYLOAD_FIELDS = frozenset(n for names in PAYLOAD_FIELDS.values() for n in names)

MANDATORY_GENERAL = ("object_id", "name", "source_uri", "size_bytes", "format")
OPTIONAL_GENERAL = ("created", "modified", "language", "author", "description")
GENERAL_FIELDS = MANDATORY_GENERAL + OPTIONAL_GENERAL + ("keywords",)

# payload fields that cannot be left out for a given class
MANDATORY_PAYLOAD = {SubdocumentClass.RELATIONAL_VIEW: ("column_names", "column_types")}

_INT_FIELDS = {"size_bytes", "word_count", "line_count", "width_px", "height_px",
               "bit_depth", "duration_ms", "sample_rate_hz", "channels", "row_count"}
_POSITIVE_FIELDS = {"width_px", "height_px"}


@dataclass(frozen=True)
class ComplexObject:
    object_id: str
    name: str
    source_uri: str
    subdocument_class: SubdocumentClass
    size_bytes: int
    format: str
    payload: Payload
    created: Optional[str] = None
    modified: Optional[str] = None
    language: Optional[str] = None
    keywords: tuple = ()
    author: Optional[str] = None
    description: Optional[str] = None

    def to_record(self) -> dict:
        """Nested plain-data view keyed by XML element names."""
        rec = {name: getattr(self, name) for name in MANDATORY_GENERAL + OPTIONAL_GENERAL}
        rec["keywords"] = {"keyword": list(self.keywords)}
        if isinstance(self.payload, RelationalViewPayload):
            body = {
                "column": [
                    {"@name": n, "@type": t}
                    for n, t in zip(self.payload.column_names, self.payload.column_types)
                ],
                "row_count": self.payload.row_count,
            }
        else:
            body = {f.name: getattr(self.payload, f.name) for f in fields(self.payload)}
        rec[self.subdocument_class.element] = body
        return rec


class AttributeSet:
    """Flat attribute map with a class tag and per-attribute provenance.

    ``keywords`` is the only multi-valued attribute; it holds a list.
    """

    def __init__(self, class_tag=None, values=None, provenance=None):
        self.class_tag = SubdocumentClass.parse(class_tag) if class_tag is not None else None
        self._values = dict(values or {})
        self._provenance = {k: Provenance(v) for k, v in (provenance or {}).items()}

    def set(self, name, value, provenance=Provenance.STANDARD):
        if name == "keywords":
            value = list(value)
        self._values[name] = value
        self._provenance[name] = Provenance(provenance)

    def add_keyword(self, keyword, provenance=Provenance.MANUAL):
        self._values.setdefault("keywords", []).append(keyword)
        self._provenance.setdefault("keywords", Provenance(provenance))

    def merge(self, other: "AttributeSet") -> "AttributeSet":
        """Combine two sets; on conflict a Manual value always wins."""
        out = self.copy()
        if other.class_tag is not None:
            out.class_tag = other.class_tag
        for name, value in other.items():
            prov = other.provenance(name)
            if out._provenance.get(name) is Provenance.MANUAL and prov is not Provenance.MANUAL:
                continue
            out.set(name, value, prov)
        return out

    def copy(self):
        return AttributeSet(self.class_tag, self._values, self._provenance)

    def provenance(self, name) -> Provenance:
        return self._provenance[name]

    def get(self, name, default=None):
        return self._values.get(name, default)

    def items(self):
        return self._values.items()

    def __getitem__(self, name):
        return self._values[name]

    def __contains__(self, name):
        return name in self._values

    def __len__(self):
        return len(self._values)

    def __eq__(self, other):
        if not isinstance(other, AttributeSet):
            return NotImplemented
        return (self.class_tag, self._values, self._provenance) == (
            other.class_tag, other._values, other._provenance)

    def __repr__(self):
        return f"AttributeSet({self.class_tag and self.class_tag.value!r}, {self._values!r})"

    def to_dict(self) -> dict:
        return {
            "class": self.class_tag.value if self.class_tag else None,
            "attributes": {
                k: {"value": v, "provenance": self._provenance[k].value}
                for k, v in self._values.items()
            },
        }

    @classmethod
    def from_dict(cls, data) -> "AttributeSet":
        attrs = data.get("attributes", {})
        return cls(
            data.get("class"),
            {k: v["value"] for k, v in attrs.items()},
            {k: v["provenance"] for k, v in attrs.items()},
        )


def _coerce(name, value):
    if value is None:
        return None
    if name in _INT_FIELDS:
        if isinstance(value, bool):
            raise ClassPayloadMismatch(f"{name} must be an integer, got {value!r}")
        if isinstance(value, float):
            if not value.is_integer():
                raise ClassPayloadMismatch(f"{name} must be an integer, got {value!r}")
            return int(value)
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ClassPayloadMismatch(f"{name} must be an integer, got {value!r}") from None
    if name == "keywords":
        if isinstance(value, str):
            value = [k.strip() for k in value.split(",")]
        return tuple(str(k) for k in value)
    if name in ("column_names", "column_types"):
        return tuple(str(v) for v in value)
    return str(value)


def wrap(attrs: AttributeSet) -> ComplexObject:
    """Instantiate a :class:`ComplexObject` from an extracted attribute set.

    Absent optional attributes stay absent; nothing is defaulted.
    """
    if attrs.class_tag is None:
        raise MissingMandatoryAttribute("class")
    cls = attrs.class_tag
    for name in MANDATORY_GENERAL:
        if attrs.get(name) is None:
            raise MissingMandatoryAttribute(name)

    own = set(PAYLOAD_FIELDS[cls])
    general, payload = {}, {}
    for name, value in attrs.items():
        if name in GENERAL_FIELDS:
            general[name] = _coerce(name, value)
        elif name in own:
            payload[name] = _coerce(name, value)
        elif name in ALL_PAYLOAD_FIELDS:
            raise ClassPayloadMismatch(
                f"attribute {name!r} does not belong to class {cls.value}"
            )
        else:
            raise UnknownAttribute(f"unknown attribute {name!r}")
    for name in MANDATORY_PAYLOAD.get(cls, ()):
        if payload.get(name) is None:
            raise MissingMandatoryAttribute(name)
    if general.get("keywords") is None:
        general.pop("keywords", None)

    return ComplexObject(
        subdocument_class=cls,
        payload=PAYLOAD_TYPES[cls](**payload),
        **general,
    )


_CONTROL_RE = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f￾￿]")


def _check_date(report, name, value):
    if value is None:
        return
    try:
        datetime.fromisoformat(value[:-1] + "+00:00" if value.endswith("Z") else value)
    except (TypeError, ValueError):
        report.add(name, f"not an ISO-8601 date-time: {value!r}")


def validate(obj: ComplexObject) -> ValidationReport:
    """List every invariant the object violates. Never raises."""
    report = ValidationReport()
    try:
        cls = SubdocumentClass.parse(obj.subdocument_class)
    except ValueError:
        report.add("subdocument_class", f"unknown class {obj.subdocument_class!r}")
        return report
    if not isinstance(obj.payload, PAYLOAD_TYPES[cls]):
        report.add("payload", f"{type(obj.payload).__name__} does not match class {cls.value}")

    for name in MANDATORY_GENERAL:
        if getattr(obj, name) is None:
            report.add(name, "mandatory attribute is absent")
    if obj.object_id is not None and (
        not str(obj.object_id) or re.search(r"[\\/\s]", str(obj.object_id))
    ):
        report.add("object_id", "must be non-empty without whitespace or path separators")

    values = {name: getattr(obj, name) for name in MANDATORY_GENERAL + OPTIONAL_GENERAL}
    values.update({f.name: getattr(obj.payload, f.name) for f in fields(obj.payload)})
    for name, value in values.items():
        if name in _INT_FIELDS and value is not None:
            if not isinstance(value, int) or isinstance(value, bool):
                report.add(name, f"must be an integer, got {value!r}")
            elif value < 0:
                report.add(name, f"must be non-negative, got {value}")
            elif name in _POSITIVE_FIELDS and value == 0:
                report.add(name, "must be positive when present")
        elif isinstance(value, float) and not math.isfinite(value):
            report.add(name, "must be finite")

    for i, kw in enumerate(obj.keywords):
        if not isinstance(kw, str) or kw == "":
            report.add(f"keywords[{i}]", "keywords must be non-empty strings")
    _check_date(report, "created", obj.created)
    _check_date(report, "modified", obj.modified)

    if isinstance(obj.payload, RelationalViewPayload):
        names, types = obj.payload.column_names, obj.payload.column_types
        if len(names) != len(types):
            report.add("column_types", f"{len(names)} column names but {len(types)} types")
        if not names:
            report.add("column_names", "a relational view needs at least one column")
        for i, t in enumerate(types):
            if t not in COLUMN_TYPES:
                report.add(f"column_types[{i}]", f"unknown column type {t!r}")

    texts = [v for v in values.values() if isinstance(v, str)] + list(obj.keywords)
    if isinstance(obj.payload, RelationalViewPayload):
        texts += list(obj.payload.column_names)
    for text in texts:
        if isinstance(text, str) and _CONTROL_RE.search(text):
            report.add("text", f"value {text!r} contains characters not allowed in XML")
    return report
