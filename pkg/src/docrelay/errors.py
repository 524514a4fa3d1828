"""Exception hierarchy shared across the package."""


class DocRelayError(Exception):
    """Base class for all domain errors raised by this package."""


class RegistrationError(DocRelayError):
    """Worker registry rejected a descriptor (duplicate id, unknown agent)."""


class ArtifactLookupError(DocRelayError):
    """An artifact handle does not resolve in the store."""


class ScriptError(DocRelayError):
    """Scripted model backend ran out of rules or hit a rule mismatch."""


class TransportError(DocRelayError):
    """Remote model backend unreachable after retries."""

    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class ProtocolError(DocRelayError):
    """Remote model backend returned a malformed payload."""


class ChapterNotFoundError(DocRelayError):
    """Requested chapter is absent from the document."""

    def __init__(self, requested: str, available: list[str]):
        super().__init__(
            f"chapter not found: {requested!r}; available: {', '.join(available) or '(none)'}"
        )
        self.requested = requested
        self.available = available


class AmbiguousChapterError(DocRelayError):
    """Requested chapter name matches more than one heading."""

    def __init__(self, requested: str, candidates: list[str]):
        super().__init__(
            f"ambiguous chapter {requested!r}: candidates {', '.join(candidates)}"
        )
        self.requested = requested
        self.candidates = candidates


class ScenarioFormatError(DocRelayError):
    """Scenario markdown does not follow the canonical structure."""


class PipelineFailure(DocRelayError):
    """A pipeline stage gave up after its bounded re-asks."""


class DocumentNotFoundError(DocRelayError):
    """doc_id (or document reference in a query) does not resolve."""


class AmbiguousDocumentError(DocRelayError):
    """A query's document reference matches several documents."""

    def __init__(self, reference: str, candidates: list[str]):
        super().__init__(
            f"ambiguous document reference {reference!r}: candidates {', '.join(candidates)}"
        )
        self.reference = reference
        self.candidates = candidates


class ConfigError(DocRelayError):
    """Bad service or session configuration."""
