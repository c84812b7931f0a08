"""ContextViews, per-view strategies and the per-service CAS bundle registry."""

from __future__ import annotations

import threading
from collections.abc import Callable, Container
from dataclasses import dataclass, field

from acas.artifacts import AdaptationRegistry, SimpleAdaptationStrategy, validate_strategy
from acas.context import ContextModel
from acas.errors import CycleDetected, Diagnostic, UnknownService


@dataclass(eq=False)
class ContextView:
    """A named set of context paths, possibly aggregating other views.

    Mutable only so that documents can link views by name after creation;
    treat instances as read-only once loaded.
    """

    name: str
    required: frozenset[str] = frozenset()
    sub_views: list[ContextView] = field(default_factory=list)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContextView):
            return NotImplemented
        return (self.name, self.required, [v.name for v in self.sub_views]) == (
            other.name, other.required, [v.name for v in other.sub_views]
        ) and all(a == b for a, b in zip(self.sub_views, other.sub_views))

    __hash__ = None  # type: ignore[assignment]


def required_paths(view: ContextView) -> frozenset[str]:
    """Own paths united with those of every transitively aggregated view."""
    out: set[str] = set()
    stack: list[int] = []

    def visit(v: ContextView) -> None:
        if id(v) in stack:
            chain = " -> ".join([*(_name_of[i] for i in stack), v.name])
            raise CycleDetected(f"context view cycle: {chain}")
        stack.append(id(v))
        _name_of[id(v)] = v.name
        out.update(v.required)
        for sub in v.sub_views:
            visit(sub)
        stack.pop()

    _name_of: dict[int, str] = {}
    visit(view)
    return frozenset(out)


@dataclass(frozen=True)
class CVSAdaptationStrategy:
    view: ContextView
    strategy: SimpleAdaptationStrategy

    def __hash__(self) -> int:
        return hash((self.view.name, self.strategy.name))


@dataclass(frozen=True)
class CASAdaptationStrategy:
    service_id: str
    cvs_strategies: tuple[CVSAdaptationStrategy, ...] = ()
    views: tuple[ContextView, ...] = ()  # every declared view, including unbound helpers

    def __post_init__(self) -> None:
        object.__setattr__(self, "cvs_strategies", tuple(self.cvs_strategies))
        declared = list(self.views)
        names = {v.name for v in declared}
        for cvs in self.cvs_strategies:
            if cvs.view.name not in names:
                declared.append(cvs.view)
                names.add(cvs.view.name)
        object.__setattr__(self, "views", tuple(declared))

    def strategy(self, name: str) -> CVSAdaptationStrategy:
        for cvs in self.cvs_strategies:
            if cvs.strategy.name == name:
                return cvs
        raise KeyError(name)


def validate_cas(cas: CASAdaptationStrategy, model: ContextModel | None = None,
                 registry: AdaptationRegistry | None = None) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    view_names = [v.name for v in cas.views]
    for n in sorted({n for n in view_names if view_names.count(n) > 1}):
        diags.append(Diagnostic(f"view:{n}", "duplicate view name"))
    strategy_names = [c.strategy.name for c in cas.cvs_strategies]
    for n in sorted({n for n in strategy_names if strategy_names.count(n) > 1}):
        diags.append(Diagnostic(f"strategy:{n}", "duplicate strategy name"))
    bound = [c.view.name for c in cas.cvs_strategies]
    for n in sorted({n for n in bound if bound.count(n) > 1}):
        diags.append(Diagnostic(f"view:{n}", "view bound to more than one strategy"))

    known = model.descriptors if model is not None else None
    for v in cas.views:
        try:
            paths = required_paths(v)
        except CycleDetected as exc:
            diags.append(Diagnostic(f"view:{v.name}", "view cycle", str(exc)))
            continue
        if not paths:
            diags.append(Diagnostic(f"view:{v.name}", "empty view"))
        if known is not None:
            for p in sorted(v.required - set(known)):
                diags.append(Diagnostic(f"view:{v.name}", "unknown view path", p))

    for cvs in cas.cvs_strategies:
        diags.extend(validate_strategy(cvs.strategy, model, registry))
        try:
            scope = required_paths(cvs.view)
        except CycleDetected:
            continue
        for pos, b in enumerate(cvs.strategy.bindings):
            guarded = b.condition.guarded_paths()
            for p in sorted(b.condition.paths() - scope - guarded):
                diags.append(Diagnostic(
                    f"strategy:{cvs.strategy.name}/binding[{pos}]", "path outside view",
                    f"{p} not in view {cvs.view.name} and not guarded by exists()",
                ))
    return diags


class CASRegistry:
    """serviceId -> active CAS bundle, replaced atomically."""

    def __init__(self, services: Container[str] | Callable[[str], bool]) -> None:
        self._is_known = services if callable(services) else services.__contains__
        self._bundles: dict[str, CASAdaptationStrategy] = {}
        self._versions: dict[str, int] = {}
        self._lock = threading.Lock()

    def register(self, cas: CASAdaptationStrategy) -> int:
        if not self._is_known(cas.service_id):
            raise UnknownService(cas.service_id)
        with self._lock:
            self._bundles[cas.service_id] = cas
            self._versions[cas.service_id] = self._versions.get(cas.service_id, 0) + 1
            return self._versions[cas.service_id]

    def current(self, service_id: str) -> tuple[CASAdaptationStrategy, int]:
        """The active bundle and its version, read as one consistent pair."""
        with self._lock:
            try:
                return self._bundles[service_id], self._versions[service_id]
            except KeyError:
                raise UnknownService(service_id) from None

    def get(self, service_id: str) -> CASAdaptationStrategy:
        return self.current(service_id)[0]

    def __contains__(self, service_id: str) -> bool:
        return service_id in self._bundles
