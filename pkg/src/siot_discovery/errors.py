"""Exception types raised across the pipeline."""


class SiotError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SiotError, ValueError):
    """A parameter is outside its documented domain."""


class ConfigError(SiotError):
    """A configuration document is malformed or inconsistent."""


class CatalogError(SiotError):
    """A device catalog failed to parse or validate."""


class TraceError(SiotError):
    """A contact-trace file failed to parse or validate."""


class GraphInvariantError(SiotError):
    """A graph object violates a structural invariant."""


class EdgelessGraphError(SiotError):
    """An operation that needs at least one edge got an edgeless graph."""


class EmptyTextError(SiotError):
    """A request text is empty or contains only whitespace."""


class UnknownApplicationError(SiotError):
    """No application's keyword score reached the acceptance threshold.

    Carries the per-application scores so callers can report them.
    """

    def __init__(self, scores: dict | None = None):
        self.scores = dict(scores or {})
        detail = ", ".join(f"{app}={s:.3f}" for app, s in sorted(self.scores.items()))
        super().__init__(f"no application matched the request ({detail})")


class UnknownRequesterError(SiotError):
    """The requester id is not a known device owner."""


class ArchiveError(SiotError):
    """An index archive is unreadable or has an unsupported schema version."""
