"""Exception hierarchy shared by every layer of the middleware."""

from __future__ import annotations

from dataclasses import dataclass


class ACASError(Exception):
    """Base class for all errors raised by this package."""


# --- context ---------------------------------------------------------------


class Unavailable(ACASError):
    """A context path has no value in the snapshot (or a source has none)."""

    def __init__(self, path: str, reason: str = "") -> None:
        self.path = path
        self.reason = reason
        super().__init__(f"context unavailable: {path}" + (f" ({reason})" if reason else ""))


class UnknownFunction(ACASError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unknown derivation function: {name}")


class MalformedRepresentation(ACASError, ValueError):
    pass


# --- providers -------------------------------------------------------------


class ProviderError(ACASError):
    pass


class DuplicateId(ProviderError):
    pass


class UnknownAggregate(ProviderError):
    pass


class UnknownProvider(ProviderError):
    pass


class PathConflict(ProviderError):
    pass


class WrongMode(ProviderError):
    pass


class UnknownPath(ProviderError):
    pass


class ProviderUnreachable(ProviderError):
    def __init__(self, provider_id: str, code: str) -> None:
        self.provider_id = provider_id
        self.code = code
        super().__init__(f"provider {provider_id} unreachable: {code}")


# --- adaptation artifacts --------------------------------------------------


class ConditionSyntaxError(ACASError, ValueError):
    """Malformed condition text; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, text: str, position: int) -> None:
        self.text = text
        self.position = position
        self.message = message
        super().__init__(f"{message} at offset {position} in {text!r}")


class TypeMismatch(ACASError):
    def __init__(self, operator: str, path: str | None, detail: str = "") -> None:
        self.operator = operator
        self.path = path
        super().__init__(f"type mismatch for {operator!r} on {path}: {detail}".rstrip(": "))


class DuplicateAdaptation(ACASError):
    pass


class UnknownAdaptation(ACASError):
    pass


# --- CAS documents & registry ----------------------------------------------


class CycleDetected(ACASError):
    pass


class DocumentParseError(ACASError):
    pass


class ValidationError(ACASError):
    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"{len(self.diagnostics)} validation problem(s): {lines}")


class UnknownService(ACASError):
    pass


# --- weaving ---------------------------------------------------------------


class UnknownOperation(ACASError):
    pass


class AdaptationFailure(ACASError):
    def __init__(self, name: str, cause: BaseException) -> None:
        self.name = name
        self.cause = cause
        super().__init__(f"adaptation {name!r} failed: {cause!r}")


@dataclass(frozen=True)
class Diagnostic:
    """A single well-formedness finding. ``subject`` names the offending element."""

    subject: str
    rule: str
    message: str = ""

    def __str__(self) -> str:
        return f"{self.subject}: {self.rule}" + (f" ({self.message})" if self.message else "")
