"""Engine exception types."""


class EngineError(Exception):
    """Base class for all engine errors."""


class InputError(EngineError):
    """Raised for malformed caller input (empty text, bad scores, ...)."""


class LoadError(EngineError):
    """Raised when a resource file fails to parse or validate."""


class GraphLookupError(EngineError):
    """Raised when a knowledge-graph query names an unknown entity."""


class UnknownSessionError(EngineError):
    """Raised when a session id does not resolve."""


class FlowLoadError(LoadError):
    """Flow file failed validation.

    ``rule`` is a stable machine-readable rule name (e.g. ``dangling-expects``)
    and ``node_id`` names the offending node when one exists.
    """

    def __init__(self, message: str, *, rule: str, node_id: str | None = None):
        super().__init__(message)
        self.rule = rule
        self.node_id = node_id
