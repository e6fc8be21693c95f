"""Exception hierarchy shared across the package."""


class CharspaceError(Exception):
    """Base class for all domain errors raised by this package."""


class BoilerplateError(CharspaceError):
    """Boilerplate stripping produced no usable body."""


class ParseError(CharspaceError):
    """A structured input file violated its format."""

    def __init__(self, message, source=None, line=None):
        self.source = source
        self.line = line
        where = ""
        if source is not None:
            where = f" [{source}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(f"{message}{where}")


class BundleIntegrityError(CharspaceError):
    """A span in the annotation bundle references a token that does not exist."""


class MergeError(CharspaceError):
    """A cluster merge referenced an unknown character."""


class EvalError(CharspaceError):
    """Evaluation tables cannot be compared (e.g. no common chapters)."""


class DomainError(CharspaceError):
    """An argument was outside the mathematical domain of an operation."""


class ConvergenceError(CharspaceError):
    """An iterative solver failed to converge; carries the last iterate."""

    def __init__(self, message, last_iterate=None):
        self.last_iterate = last_iterate
        super().__init__(message)


class TrainError(CharspaceError):
    """Embedding training could not start or continue."""


class StepError(CharspaceError):
    """An optimizer step received a non-finite gradient."""


class RenderError(CharspaceError):
    """A figure could not be rendered."""


class ReportError(CharspaceError):
    """Report emission failed (e.g. zero novels)."""


class TemplateError(CharspaceError):
    """A prompt template placeholder was left unfilled."""

    def __init__(self, placeholder):
        self.placeholder = placeholder
        super().__init__(f"unfilled placeholder: {placeholder!r}")


class ResponseError(CharspaceError):
    """A model response could not be parsed; retains the raw payload."""

    def __init__(self, message, raw=None):
        self.raw = raw
        super().__init__(message)


class TransportError(CharspaceError):
    """All transport retries for one request failed."""


class GraphImportError(CharspaceError):
    """A GraphML file was malformed or missing required attributes."""


class ConfigError(CharspaceError):
    """A run configuration file was invalid or referenced missing paths."""
