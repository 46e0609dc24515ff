"""Violation reports and input-checking helpers used across the estimators."""
from __future__ import annotations

import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Iterable

from .errors import ComplexEtlError


@dataclass(frozen=True)
class Violation:
    where: str
    message: str

    def __str__(self):
        return f"{self.where}: {self.message}"


@dataclass
class ValidationReport:
    """Ordered list of violations. An empty report means valid."""

    violations: list = field(default_factory=list)

    def add(self, where, message):
        self.violations.append(Violation(str(where), message))

    @property
    def ok(self) -> bool:
        return not self.violations

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)

    def __bool__(self):
        # truthy when there is something to report
        return bool(self.violations)

    def __str__(self):
        return "; ".join(str(v) for v in self.violations) or "valid"


class NotFittedError(ComplexEtlError, AttributeError):
    pass


def check_is_fitted(estimator, attribute):
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first"
        )


def check_element(doc) -> ET.Element:
    """Coerce an XML input (element, tree, text, bytes or path) to an Element."""
    if isinstance(doc, ET.Element):
        return doc
    if isinstance(doc, ET.ElementTree):
        return doc.getroot()
    if isinstance(doc, bytes):
        return ET.fromstring(doc)
    if isinstance(doc, str) and doc.lstrip().startswith("<"):
        return ET.fromstring(doc)
    if isinstance(doc, (str, os.PathLike)):
        return ET.parse(doc).getroot()
    raise TypeError(f"expected an XML document, got {type(doc).__name__}")


def check_documents(docs: Iterable) -> list:
    if isinstance(docs, (ET.Element, ET.ElementTree, bytes)) or (
        isinstance(docs, str)
    ):
        docs = [docs]
    return [check_element(d) for d in docs]


def check_dtd(dtd):
    """Coerce a DTD given as AST, source text or file path to a DtdAst."""
    from .dtd import DtdAst, parse_dtd

    if isinstance(dtd, DtdAst):
        return dtd
    if isinstance(dtd, str) and "<!" in dtd:
        return parse_dtd(dtd)
    if isinstance(dtd, (str, os.PathLike)):
        with open(dtd, encoding="utf-8") as fh:
            return parse_dtd(fh.read())
    raise TypeError(f"expected a DTD, got {type(dtd).__name__}")
