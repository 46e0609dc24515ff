"""Source classification and attribute extraction.

Attributes come from three places: the file system (``Standard``), a
class-specific reader of the file's bytes (``Algorithmic``) and the
manifest's hand-written values (``Manual``).  Manual values always win.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import mimetypes
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .errors import (
    EmptyInput,
    ExtractionError,
    ExtractorFailure,
    ManifestError,
    RaggedRows,
    UnknownClass,
    Unreadable,
)
from .headers import extract_image_attrs, extract_sound_attrs, extract_video_attrs
from .model import AttributeSet, Provenance, SubdocumentClass

EXTENSION_CLASSES = {
    ".txt": SubdocumentClass.TEXT,
    ".md": SubdocumentClass.TEXT,
    ".html": SubdocumentClass.TEXT,
    ".htm": SubdocumentClass.TEXT,
    ".png": SubdocumentClass.IMAGE,
    ".bmp": SubdocumentClass.IMAGE,
    ".gif": SubdocumentClass.IMAGE,
    ".wav": SubdocumentClass.SOUND,
    ".avi": SubdocumentClass.VIDEO,
    ".mp4": SubdocumentClass.VIDEO,
    ".csv": SubdocumentClass.RELATIONAL_VIEW,
}

# fixed so that results do not depend on the host's mime.types
MIME_TYPES = {
    ".txt": "text/plain",
    ".md": "text/markdown",
    ".html": "text/html",
    ".htm": "text/html",
    ".png": "image/png",
    ".bmp": "image/bmp",
    ".gif": "image/gif",
    ".wav": "audio/wav",
    ".avi": "video/x-msvideo",
    ".mp4": "video/mp4",
    ".csv": "text/csv",
}


def classify_source(path, override=None) -> SubdocumentClass:
    """Subdocument class of a source: the override if given, else by extension."""
    if override is not None:
        return SubdocumentClass.parse(override)
    cls = EXTENSION_CLASSES.get(Path(path).suffix.lower())
    if cls is None:
        raise UnknownClass(f"cannot classify {path}: unknown extension")
    return cls


def media_type(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in MIME_TYPES:
        return MIME_TYPES[suffix]
    guessed, _ = mimetypes.guess_type(str(path), strict=True)
    return guessed or "application/octet-stream"


# -- class extractors --------------------------------------------------------

def extract_text_attrs(data: bytes) -> dict:
    """Encoding, word count and line count of a text file.

    A word is a maximal run of non-whitespace.  Lines are newline-terminated
    segments plus a trailing unterminated one when it is not empty.
    """
    try:
        text = data.decode("utf-8-sig")
        encoding = "utf-8"
    except UnicodeDecodeError:
        text = data.decode("latin-1")
        encoding = "iso-8859-1"
    lines = text.count("\n") + (1 if text and not text.endswith("\n") else 0)
    return {"encoding": encoding, "word_count": len(text.split()), "line_count": lines}


_INT_RE = re.compile(r"\s*[+-]?[0-9]+\s*")
_REAL_RE = re.compile(r"\s*[+-]?([0-9]+\.?[0-9]*|\.[0-9]+)([eE][+-]?[0-9]+)?\s*")


def cell_fits(value: str, column_type: str) -> bool:
    if value == "" or column_type == "text":
        return True
    if column_type == "integer":
        return _INT_RE.fullmatch(value) is not None
    return _REAL_RE.fullmatch(value) is not None


def extract_relational_view_attrs(data: bytes) -> dict:
    """Column names, inferred column types and row count of a CSV export.

    Comma-separated, double-quote escaped, header row required.  Each column
    gets the narrowest of integer, real, text that every cell fits.
    """
    if not data.strip():
        raise EmptyInput("CSV input is empty")
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ExtractorFailure(f"CSV is not UTF-8: {exc}") from exc
    reader = csv.reader(io.StringIO(text, newline=""), delimiter=",", quotechar='"',
                        doublequote=True, strict=True)
    try:
        rows = list(reader)
    except csv.Error as exc:
        raise ExtractorFailure(f"malformed CSV: {exc}") from exc
    header = rows[0]
    width = len(header)
    types = ["integer"] * width
    order = ("integer", "real", "text")
    count = 0
    for lineno, row in enumerate(rows[1:], start=2):
        if not row and width == 1:
            row = [""]
        if len(row) != width:
            raise RaggedRows(f"row {lineno} has {len(row)} fields, header has {width}")
        count += 1
        for i, cell in enumerate(row):
            while not cell_fits(cell, types[i]):
                types[i] = order[order.index(types[i]) + 1]
    return {"column_names": header, "column_types": types, "row_count": count}


CLASS_EXTRACTORS = {
    SubdocumentClass.TEXT: extract_text_attrs,
    SubdocumentClass.IMAGE: extract_image_attrs,
    SubdocumentClass.SOUND: extract_sound_attrs,
    SubdocumentClass.VIDEO: extract_video_attrs,
    SubdocumentClass.RELATIONAL_VIEW: extract_relational_view_attrs,
}


# -- manifest ----------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    class_override: Optional[SubdocumentClass] = None
    attributes: dict = field(default_factory=dict)

    @property
    def source(self) -> str:
        return str(self.path)


@dataclass(frozen=True)
class Manifest:
    entries: tuple = ()

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            key = str(Path(e.path).resolve())
            if key in seen:
                raise ManifestError(f"path listed twice: {e.path}")
            seen.add(key)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    @classmethod
    def from_paths(cls, paths) -> "Manifest":
        return cls(tuple(ManifestEntry(Path(p)) for p in paths))


def parse_manifest(data, base_dir=".") -> Manifest:
    """Build a manifest from decoded JSON; relative paths resolve against ``base_dir``."""
    if isinstance(data, dict):
        data = data.get("entries")
    if not isinstance(data, list):
        raise ManifestError("manifest must be a list of entries or {\"entries\": [...]}")
    entries = []
    for i, raw in enumerate(data):
        if isinstance(raw, str):
            raw = {"path": raw}
        if not isinstance(raw, dict) or not isinstance(raw.get("path"), str):
            raise ManifestError(f"entry {i} needs a string 'path'")
        unknown = set(raw) - {"path", "class", "attributes"}
        if unknown:
            raise ManifestError(f"entry {i} has unknown keys {sorted(unknown)}")
        path = Path(raw["path"])
        if not path.is_absolute():
            path = Path(base_dir) / path
        override = raw.get("class")
        if override is not None:
            try:
                override = SubdocumentClass.parse(override)
            except ValueError as exc:
                raise ManifestError(f"entry {i}: {exc}") from None
        attrs = raw.get("attributes")
        if attrs is None:
            attrs = {}
        if not isinstance(attrs, dict):
            raise ManifestError(f"entry {i}: 'attributes' must be an object")
        entries.append(ManifestEntry(path, override, dict(attrs)))
    return Manifest(tuple(entries))


def load_manifest(path) -> Manifest:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from exc
    return parse_manifest(data, base_dir=path.parent)


# -- extraction --------------------------------------------------------------

def object_id_for(path) -> str:
    """Stable identifier derived from the file name and absolute path."""
    path = Path(path)
    stem = re.sub(r"[^A-Za-z0-9._-]+", "_", path.stem).strip("_") or "object"
    digest = hashlib.sha1(str(path.resolve()).encode("utf-8")).hexdigest()[:8]
    return f"{stem}-{digest}"


def extract(entry: ManifestEntry) -> AttributeSet:
    """Collect every attribute of one manifest entry."""
    path = Path(entry.path)
    cls = classify_source(path, entry.class_override)
    try:
        data = path.read_bytes()
        stat = path.stat()
    except OSError as exc:
        raise Unreadable(path, exc.strerror or str(exc)) from exc

    attrs = AttributeSet(cls)
    std = Provenance.STANDARD
    attrs.set("object_id", object_id_for(path), std)
    attrs.set("name", path.name, std)
    attrs.set("source_uri", path.resolve().as_uri(), std)
    attrs.set("size_bytes", len(data), std)
    attrs.set("format", media_type(path), std)
    attrs.set(
        "modified",
        datetime.fromtimestamp(stat.st_mtime, timezone.utc).isoformat(timespec="seconds"),
        std,
    )

    try:
        found = CLASS_EXTRACTORS[cls](data)
    except ExtractionError as exc:
        raise ExtractorFailure(f"{path}: {exc}") from exc
    for name, value in found.items():
        if value is not None:
            attrs.set(name, value, Provenance.ALGORITHMIC)

    manual = AttributeSet(cls)
    for name, value in entry.attributes.items():
        manual.set(name, value, Provenance.MANUAL)
    return attrs.merge(manual)
