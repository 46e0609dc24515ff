"""Integration of complex, multimedia data sources into a relational ODS.

Sources are classified, their attributes extracted and wrapped into complex
objects, emitted as XML valid against a DTD, shredded into tables derived
from that DTD and loaded into an SQLite operational data store.  A small
agent platform runs the five stages as cooperating services.
"""
from .agents import (
    Agent,
    AgentId,
    AgentPlatform,
    DeliveryReceipt,
    MessageEnvelope,
    Performative,
    ServiceDescriptor,
)
from .dtd import DtdAst, parse_dtd, serialize_dtd
from .estimators import AttributeExtractor, ObjectWrapper, XmlEmitter, XmlRelationalMapper
from .extraction import Manifest, ManifestEntry, classify_source, extract, load_manifest, parse_manifest
from .model import AttributeSet, ComplexObject, Provenance, SubdocumentClass, validate, wrap
from .ods import OdsHandle, open_ods, record_load, registry
from .pipeline import PipelineReport, register_standard_agents, run_pipeline
from .relational import RelationalSchema, ddl_script, dtd_to_relational, infer_root
from .shredding import LoadReport, RowSet, create_schema, load, load_document, reconstruct, shred
from .validation import ValidationReport
from .xmlgen import canonical_dtd, canonical_xml, emit_xml, validate_xml

__version__ = "0.1.0"

__all__ = [
    "Agent", "AgentId", "AgentPlatform", "DeliveryReceipt", "MessageEnvelope",
    "Performative", "ServiceDescriptor",
    "DtdAst", "parse_dtd", "serialize_dtd",
    "AttributeExtractor", "ObjectWrapper", "XmlEmitter", "XmlRelationalMapper",
    "Manifest", "ManifestEntry", "classify_source", "extract", "load_manifest", "parse_manifest",
    "AttributeSet", "ComplexObject", "Provenance", "SubdocumentClass", "validate", "wrap",
    "OdsHandle", "open_ods", "record_load", "registry",
    "PipelineReport", "register_standard_agents", "run_pipeline",
    "RelationalSchema", "ddl_script", "dtd_to_relational", "infer_root",
    "LoadReport", "RowSet", "create_schema", "load", "load_document", "reconstruct", "shred",
    "ValidationReport",
    "canonical_dtd", "canonical_xml", "emit_xml", "validate_xml",
]
