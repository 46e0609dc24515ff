"""scikit-learn compatible wrappers around the pipeline stages.

Each stage is a transformer, so a whole run can be expressed as a
:class:`sklearn.pipeline.Pipeline`::

    Pipeline([
        ("extract", AttributeExtractor()),
        ("wrap", ObjectWrapper()),
        ("emit", XmlEmitter()),
        ("shred", XmlRelationalMapper()),
    ]).fit_transform(manifest)
"""
from __future__ import annotations

import sqlite3

from sklearn.base import BaseEstimator, TransformerMixin

from .extraction import Manifest, ManifestEntry, extract
from .model import AttributeSet, ComplexObject, wrap
from .relational import dtd_to_relational, infer_root
from .shredding import create_schema, load, reconstruct, shred
from .validation import check_documents, check_dtd, check_is_fitted
from .xmlgen import CANONICAL_ROOT, canonical_dtd, emit_xml, validate_xml


def _entries(X):
    if isinstance(X, (Manifest, ManifestEntry)):
        X = [X] if isinstance(X, ManifestEntry) else list(X)
    return [x if isinstance(x, ManifestEntry) else ManifestEntry(x) for x in X]


class AttributeExtractor(TransformerMixin, BaseEstimator):
    """Manifest entries (or paths) to attribute sets."""

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return [extract(entry) for entry in _entries(X)]


class ObjectWrapper(TransformerMixin, BaseEstimator):
    """Attribute sets to complex objects."""

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        out = []
        for attrs in X:
            if not isinstance(attrs, AttributeSet):
                raise TypeError(f"expected AttributeSet, got {type(attrs).__name__}")
            out.append(wrap(attrs))
        return out


class _DtdMixin:
    def _fit_dtd(self):
        self.dtd_ = canonical_dtd() if self.dtd is None else check_dtd(self.dtd)
        if self.root is not None:
            self.root_ = self.root
        elif self.dtd is None:
            self.root_ = CANONICAL_ROOT
        else:
            self.root_ = infer_root(self.dtd_)


class XmlEmitter(_DtdMixin, TransformerMixin, BaseEstimator):
    """Complex objects to XML documents following ``dtd``."""

    def __init__(self, dtd=None, root=None):
        self.dtd = dtd
        self.root = root

    def fit(self, X=None, y=None):
        self._fit_dtd()
        return self

    def transform(self, X):
        check_is_fitted(self, "dtd_")
        out = []
        for obj in X:
            if not isinstance(obj, ComplexObject):
                raise TypeError(f"expected ComplexObject, got {type(obj).__name__}")
            out.append(emit_xml(obj, self.dtd_, root=self.root_))
        return out


class XmlRelationalMapper(_DtdMixin, TransformerMixin, BaseEstimator):
    """Compiles a DTD to a relational schema on ``fit``; shreds documents on
    ``transform`` and rebuilds them on ``inverse_transform``."""

    def __init__(self, dtd=None, root=None):
        self.dtd = dtd
        self.root = root

    def fit(self, X=None, y=None):
        self._fit_dtd()
        self.schema_ = dtd_to_relational(self.dtd_, self.root_)
        return self

    def transform(self, X):
        check_is_fitted(self, "schema_")
        return [shred(doc, self.schema_) for doc in check_documents(X)]

    def inverse_transform(self, X):
        """Load each RowSet into a scratch database and read the document back."""
        check_is_fitted(self, "schema_")
        out = []
        for rows in X:
            conn = sqlite3.connect(":memory:")
            try:
                create_schema(self.schema_, conn)
                load(rows, conn)
                out.append(reconstruct(conn, self.schema_, rows.root.id))
            finally:
                conn.close()
        return out

    def validate(self, X):
        """One validation report per document."""
        check_is_fitted(self, "schema_")
        return [validate_xml(doc, self.dtd_, root=self.root_) for doc in check_documents(X)]
