"""Exception hierarchy shared across the package."""


class MalontError(Exception):
    """Base class for every error raised by malont_kg."""


class InvalidTermError(MalontError, ValueError):
    pass


class InvalidQuadError(MalontError, ValueError):
    pass


class SchemaError(MalontError):
    """Raised when a schema file cannot be turned into a valid ontology.

    ``violations`` holds the individual problems when the failure is semantic
    (duplicate names, unresolved references, cycles, asymmetric inverses).
    """

    def __init__(self, message, violations=(), line=None):
        super().__init__(message)
        self.violations = list(violations)
        self.line = line


class InvalidOntologyError(MalontError):
    pass


class MissingSchemaError(MalontError):
    pass


class SyntaxErrorAt(MalontError):
    """A parse failure located at a line (and optionally a column)."""

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.reason = message
        self.line = line
        self.column = column


class QuerySyntaxError(SyntaxErrorAt):
    pass


class UnsupportedFeatureError(MalontError):
    def __init__(self, feature, message=None):
        super().__init__(message or f"unsupported feature: {feature}")
        self.feature = feature


class AnnotationParseError(SyntaxErrorAt):
    pass


class MappingError(SyntaxErrorAt):
    pass


class NQuadsSyntaxError(SyntaxErrorAt):
    pass
