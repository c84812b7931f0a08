"""Adaptation artifacts: rules, adaptations, bindings and strategies."""

from __future__ import annotations

import threading
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any, Union

from acas.conditions import AdaptationCondition
from acas.context import ContextModel
from acas.errors import Diagnostic, DuplicateAdaptation, UnknownAdaptation

BEFORE, AFTER, AROUND, REPLACE = "before", "after", "around", "replace"
ADVICE_KINDS = (BEFORE, AFTER, AROUND, REPLACE)
WILDCARD = "*"


@dataclass(frozen=True)
class AdaptationRule:
    target_service: str
    target_operation: str
    advice: str

    def __post_init__(self) -> None:
        if self.advice not in ADVICE_KINDS:
            raise ValueError(f"advice must be one of {ADVICE_KINDS}, not {self.advice!r}")

    def matches_service(self, service_id: str) -> bool:
        return self.target_service in (WILDCARD, service_id)

    def matches_operation(self, operation: str) -> bool:
        return self.target_operation in (WILDCARD, operation)


@dataclass(frozen=True)
class ContextRef:
    """An adaptation argument bound to a context path at weave time."""

    path: str


ArgValue = Union[int, float, str, bool, ContextRef]


@dataclass(frozen=True)
class Adaptation:
    name: str
    args: Mapping[str, ArgValue] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", dict(self.args))

    def __hash__(self) -> int:
        return hash((self.name, tuple(sorted(self.args.items(), key=lambda kv: kv[0]))))


@dataclass(frozen=True)
class AdaptationBinding:
    condition: AdaptationCondition
    rule: AdaptationRule
    adaptation: Adaptation
    priority: int = 0
    declaration_index: int = 0

    @property
    def sort_key(self) -> tuple[int, int]:
        return (self.priority, self.declaration_index)


@dataclass(frozen=True)
class SimpleAdaptationStrategy:
    name: str
    bindings: tuple[AdaptationBinding, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "bindings", tuple(self.bindings))


# --- behaviours ------------------------------------------------------------
#
#   before : (request, args, snapshot) -> request
#   after  : (response, args, snapshot) -> response
#   around : (request, proceed, args, snapshot) -> response
#   replace: (request, args, snapshot) -> response


@dataclass(frozen=True)
class AdaptationBehavior:
    name: str
    advice: str
    fn: Callable[..., Any]


class AdaptationRegistry:
    def __init__(self) -> None:
        self._behaviors: dict[str, AdaptationBehavior] = {}
        self._lock = threading.Lock()

    def register(self, name: str, fn: Callable[..., Any], advice: str = AFTER) -> None:
        if advice not in ADVICE_KINDS:
            raise ValueError(f"unknown advice kind {advice!r}")
        with self._lock:
            if name in self._behaviors:
                raise DuplicateAdaptation(name)
            self._behaviors[name] = AdaptationBehavior(name, advice, fn)

    def adaptation(self, name: str, advice: str = AFTER):
        """Decorator form of :meth:`register`."""

        def deco(fn):
            self.register(name, fn, advice)
            return fn

        return deco

    def get(self, name: str) -> AdaptationBehavior:
        try:
            return self._behaviors[name]
        except KeyError:
            raise UnknownAdaptation(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self._behaviors

    def names(self) -> list[str]:
        return list(self._behaviors)


def register_adaptation(registry: AdaptationRegistry, name: str, behavior: Callable[..., Any],
                        advice: str = AFTER) -> None:
    registry.register(name, behavior, advice)


def sorted_bindings(bindings) -> list[AdaptationBinding]:
    return sorted(bindings, key=lambda b: b.sort_key)


def validate_strategy(strategy: SimpleAdaptationStrategy, model: ContextModel | None,
                      registry: AdaptationRegistry | None) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    where = f"strategy:{strategy.name}"
    if not strategy.bindings:
        diags.append(Diagnostic(where, "empty strategy"))
    known = model.descriptors if model is not None else None
    seen_idx: set[int] = set()
    for pos, b in enumerate(strategy.bindings):
        subject = f"{where}/binding[{pos}]"
        if b.declaration_index in seen_idx:
            diags.append(Diagnostic(subject, "duplicate declaration index", str(b.declaration_index)))
        seen_idx.add(b.declaration_index)
        if known is not None:
            for path in sorted(b.condition.paths()):
                if path not in known:
                    diags.append(Diagnostic(subject, "unknown condition path", path))
            for arg, value in sorted(b.adaptation.args.items()):
                if isinstance(value, ContextRef) and value.path not in known:
                    diags.append(Diagnostic(subject, "unresolvable argument", f"{arg} -> {value.path}"))
        if registry is not None:
            if b.adaptation.name not in registry:
                diags.append(Diagnostic(subject, "unknown adaptation", b.adaptation.name))
            elif registry.get(b.adaptation.name).advice != b.rule.advice:
                diags.append(Diagnostic(
                    subject, "advice mismatch",
                    f"{b.adaptation.name} is {registry.get(b.adaptation.name).advice}, rule says {b.rule.advice}",
                ))
    return diags
