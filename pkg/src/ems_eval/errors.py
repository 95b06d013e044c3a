"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class EmsError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(EmsError, ValueError):
    """An argument violated a documented precondition."""


class EmptyReferenceError(ContractError):
    """The reference side produced no saliency points."""


class ExtractionError(EmsError):
    def __init__(self, message: str, raw_reply: str | None = None) -> None:
        super().__init__(message)
        self.raw_reply = raw_reply


class EmptyExtractionError(ExtractionError):
    pass


class StageError(EmsError):
    """Matcher/scorer failure, optionally pinned to a reference point index."""

    def __init__(self, message: str, raw_reply: str | None = None, ref_index: int | None = None) -> None:
        super().__init__(message)
        self.raw_reply = raw_reply
        self.ref_index = ref_index


class MatchingError(StageError):
    pass


class ScoringError(StageError):
    pass


class BaselineError(EmsError):
    pass


class GatewayError(EmsError):
    """Endpoint failure: malformed response, permanent 4xx, or exhausted retries."""

    def __init__(self, message: str, status: int | None = None) -> None:
        super().__init__(message)
        self.status = status


class AuthError(GatewayError):
    pass


class RetryExhaustedError(GatewayError):
    pass


class ReplyParseError(EmsError):
    def __init__(self, message: str, reply: str) -> None:
        super().__init__(message)
        self.reply = reply


class DatasetError(EmsError):
    pass


class ConfigError(EmsError):
    pass


class RunError(EmsError):
    pass
