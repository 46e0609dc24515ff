"""Exception hierarchy shared by every stage of the toolkit."""


class ComplexEtlError(Exception):
    """Base class for all toolkit errors."""


# -- agent runtime ---------------------------------------------------------

class AgentError(ComplexEtlError):
    pass


class DuplicateAgent(AgentError):
    pass


class InvalidDescriptor(AgentError, ValueError):
    pass


class UnknownReceiver(AgentError):
    pass


class MissingAgent(AgentError):
    pass


class SinkUnavailable(AgentError):
    pass


class PipelineTimeout(AgentError):
    pass


# -- complex object model --------------------------------------------------

class ModelError(ComplexEtlError, ValueError):
    pass


class MissingMandatoryAttribute(ModelError):
    def __init__(self, attribute):
        super().__init__(f"missing mandatory attribute {attribute!r}")
        self.attribute = attribute


class ClassPayloadMismatch(ModelError):
    pass


class UnknownAttribute(ModelError):
    pass


# -- extraction ------------------------------------------------------------

class ExtractionError(ComplexEtlError):
    pass


class ManifestError(ExtractionError, ValueError):
    pass


class UnknownClass(ExtractionError, ValueError):
    pass


class Unreadable(ExtractionError, OSError):
    def __init__(self, path, reason=""):
        msg = f"cannot read {path}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.path = path


class ExtractorFailure(ExtractionError):
    pass


class UnrecognizedFormat(ExtractionError, ValueError):
    pass


class TruncatedHeader(ExtractionError, ValueError):
    pass


class MissingChunk(ExtractionError, ValueError):
    def __init__(self, chunk):
        super().__init__(f"missing {chunk!r} chunk")
        self.chunk = chunk


class RaggedRows(ExtractionError, ValueError):
    pass


class EmptyInput(ExtractionError, ValueError):
    pass


# -- xml generation --------------------------------------------------------

class ObjectInvalid(ComplexEtlError, ValueError):
    pass


# -- DTD parsing -----------------------------------------------------------

class DtdError(ComplexEtlError, ValueError):
    pass


class DtdSyntaxError(DtdError):
    def __init__(self, line, column, expected):
        super().__init__(f"line {line}, column {column}: expected {expected}")
        self.line = line
        self.column = column
        self.expected = expected


class DanglingReference(DtdError):
    def __init__(self, name):
        super().__init__(f"reference to undeclared element {name!r}")
        self.name = name


class DuplicateElement(DtdError):
    def __init__(self, name):
        super().__init__(f"element {name!r} declared twice")
        self.name = name


class UnsupportedFeature(DtdError):
    pass


# -- relational mapping ----------------------------------------------------

class MappingError(ComplexEtlError, ValueError):
    pass


class AmbiguousRoot(MappingError):
    pass


class RootNotTopLevel(MappingError):
    pass


class NameCollisionOverflow(MappingError):
    pass


class SchemaMismatch(MappingError):
    pass


class InvalidDocument(SchemaMismatch):
    def __init__(self, report):
        super().__init__("document is not valid: " + "; ".join(str(v) for v in report))
        self.report = report


class NullViolation(MappingError):
    pass


# -- database --------------------------------------------------------------

class StoreError(ComplexEtlError):
    pass


class IoFailure(StoreError, OSError):
    pass


class TableExists(StoreError):
    pass


class ConstraintViolation(StoreError):
    pass


class IdCollision(ConstraintViolation):
    pass


class UnknownRootId(StoreError, LookupError):
    pass
