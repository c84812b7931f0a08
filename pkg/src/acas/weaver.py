"""Aspect Adaptations Weaver.

The weaver turns a core service plus the pertinent per-view strategies into a
:class:`WovenService` for one context snapshot:

* :func:`select_pertinent` keeps the strategies whose view is fully available,
* :func:`weave` evaluates binding conditions and orders the surviving
  adaptations by ``(priority, declaration index, strategy order)``,
* :func:`invoke` runs before -> around(...(core or replace)...) -> after.

:class:`A2W` ties these together with a CAS registry and the async-mode
decision cache.
"""

from __future__ import annotations

import copy
import logging
import threading
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

from acas.artifacts import (
    AFTER,
    AROUND,
    BEFORE,
    REPLACE,
    AdaptationBehavior,
    AdaptationBinding,
    AdaptationRegistry,
    ContextRef,
)
from acas.cas import CASAdaptationStrategy, CASRegistry, CVSAdaptationStrategy, required_paths
from acas.conditions import evaluate_condition
from acas.context import ContextSnapshot
from acas.errors import (
    AdaptationFailure,
    CycleDetected,
    TypeMismatch,
    Unavailable,
    UnknownOperation,
    UnknownService,
)

log = logging.getLogger(__name__)

SYNC, ASYNC = "sync", "async"


@dataclass(frozen=True)
class CoreService:
    service_id: str
    operations: Mapping[str, Callable[[Any], Any]]


@dataclass(frozen=True)
class ActiveBinding:
    binding: AdaptationBinding
    strategy: str
    strategy_order: int
    behavior: AdaptationBehavior
    args: Mapping[str, Any]

    @property
    def sort_key(self) -> tuple[int, int, int]:
        return (self.binding.priority, self.binding.declaration_index, self.strategy_order)

    @property
    def advice(self) -> str:
        return self.binding.rule.advice


@dataclass(frozen=True)
class WeaveRecord:
    strategy: str
    binding: int
    condition: str  # "true" | "false" | "skipped:<reason>"
    applied: bool

    def line(self) -> str:
        applied = "true" if self.applied else "false"
        return f"strategy={self.strategy} binding={self.binding} condition={self.condition} applied={applied}"


@dataclass
class WeaveTrace:
    records: list[WeaveRecord] = field(default_factory=list)

    def lines(self) -> list[str]:
        return [r.line() for r in self.records]

    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines())


@dataclass(frozen=True)
class WovenService:
    """The ContextViewService: a core service with its adaptation chain."""

    core: CoreService
    active_bindings: tuple[ActiveBinding, ...]
    snapshot_digest: str
    snapshot: ContextSnapshot = field(repr=False, compare=False)

    def invoke(self, operation: str, request: Any) -> Any:
        return invoke(self, operation, request)


def _skip_reason(exc: Exception) -> str:
    if isinstance(exc, Unavailable):
        return f"unavailable({exc.path})"
    if isinstance(exc, TypeMismatch):
        return f"type-mismatch({exc.operator})"
    return type(exc).__name__


def select_pertinent(cas: CASAdaptationStrategy, snapshot: ContextSnapshot) -> list[CVSAdaptationStrategy]:
    """Strategies whose view paths all resolve, in CAS declaration order."""
    selected = []
    for cvs in cas.cvs_strategies:
        try:
            paths = required_paths(cvs.view)
        except CycleDetected:
            log.warning("skipping strategy %s: cyclic view", cvs.strategy.name)
            continue
        if all(snapshot.has(p) for p in paths):
            selected.append(cvs)
    return selected


def weave(core: CoreService, selected: list[CVSAdaptationStrategy], snapshot: ContextSnapshot,
          registry: AdaptationRegistry) -> tuple[WovenService, WeaveTrace]:
    trace = WeaveTrace()
    included: list[ActiveBinding] = []
    record_at: dict[int, int] = {}  # id(ActiveBinding) -> trace index
    for order, cvs in enumerate(selected):
        name = cvs.strategy.name
        for b in cvs.strategy.bindings:
            if not b.rule.matches_service(core.service_id):
                trace.records.append(WeaveRecord(name, b.declaration_index, "skipped:service-mismatch", False))
                continue
            try:
                holds = evaluate_condition(b.condition, snapshot)
            except (Unavailable, TypeMismatch) as exc:
                trace.records.append(WeaveRecord(name, b.declaration_index, f"skipped:{_skip_reason(exc)}", False))
                continue
            if not holds:
                trace.records.append(WeaveRecord(name, b.declaration_index, "false", False))
                continue
            try:
                args = {k: snapshot.resolve(v.path) if isinstance(v, ContextRef) else v
                        for k, v in b.adaptation.args.items()}
            except (Unavailable, TypeMismatch) as exc:
                trace.records.append(WeaveRecord(name, b.declaration_index, f"skipped:{_skip_reason(exc)}", False))
                continue
            behavior = registry.get(b.adaptation.name)  # UnknownAdaptation on registry drift
            active = ActiveBinding(b, name, order, behavior, args)
            included.append(active)
            record_at[id(active)] = len(trace.records)
            trace.records.append(WeaveRecord(name, b.declaration_index, "true", True))

    included.sort(key=lambda a: a.sort_key)
    replaces = [a for a in included if a.advice == REPLACE]
    for dropped in replaces[1:]:
        i = record_at[id(dropped)]
        trace.records[i] = WeaveRecord(dropped.strategy, dropped.binding.declaration_index, "true", False)
        included = [a for a in included if a is not dropped]
    woven = WovenService(core, tuple(included), snapshot.digest(), snapshot)
    return woven, trace


def _run(active: ActiveBinding, *args: Any) -> Any:
    try:
        return active.behavior.fn(*args)
    except AdaptationFailure:
        raise
    except Exception as exc:
        raise AdaptationFailure(active.behavior.name, exc) from exc


def invoke(woven: WovenService, operation: str, request: Any) -> Any:
    chain = [a for a in woven.active_bindings if a.binding.rule.matches_operation(operation)]
    replace = next((a for a in chain if a.advice == REPLACE), None)
    handler = woven.core.operations.get(operation)
    if handler is None and replace is None:
        raise UnknownOperation(f"{woven.core.service_id}.{operation}")
    snapshot = woven.snapshot
    request = copy.deepcopy(request)

    for a in chain:
        if a.advice == BEFORE:
            request = _run(a, request, a.args, snapshot)

    if replace is not None:
        def proceed(req: Any) -> Any:
            return _run(replace, req, replace.args, snapshot)
    else:
        proceed = handler

    for a in reversed([a for a in chain if a.advice == AROUND]):
        proceed = _wrap_around(a, proceed, snapshot)

    response = proceed(request)
    for a in chain:
        if a.advice == AFTER:
            response = _run(a, response, a.args, snapshot)
    return response


def _wrap_around(active: ActiveBinding, inner: Callable[[Any], Any], snapshot: ContextSnapshot):
    def call(req: Any) -> Any:
        return _run(active, req, inner, active.args, snapshot)

    return call


# --- A2W facade ------------------------------------------------------------


@dataclass(frozen=True)
class DecisionHandle:
    woven: WovenService
    trace: WeaveTrace
    selected: tuple[str, ...]
    mode: str
    cache_hit: bool = False

    def invoke(self, operation: str, request: Any) -> Any:
        return invoke(self.woven, operation, request)


@dataclass
class CacheStats:
    hits: int = 0
    misses: int = 0
    invalidations: int = 0


class A2W:
    """Decision making and service reconfiguration behind one entry point."""

    def __init__(self, adaptations: AdaptationRegistry | None = None) -> None:
        self.adaptations = adaptations or AdaptationRegistry()
        self.services: dict[str, CoreService] = {}
        self.cas = CASRegistry(self.services)
        self.stats = CacheStats()
        self._cache: dict[tuple[str, int, str], DecisionHandle] = {}
        self._lock = threading.Lock()

    def register_service(self, core: CoreService) -> None:
        self.services[core.service_id] = core

    def register_cas(self, cas: CASAdaptationStrategy) -> None:
        self.cas.register(cas)
        self.invalidate(cas.service_id)

    def _decide(self, service_id: str, bundle: CASAdaptationStrategy, snapshot: ContextSnapshot,
                mode: str) -> DecisionHandle:
        selected = select_pertinent(bundle, snapshot)
        woven, trace = weave(self.services[service_id], selected, snapshot, self.adaptations)
        return DecisionHandle(woven, trace, tuple(c.strategy.name for c in selected), mode)

    def notify(self, service_id: str, snapshot: ContextSnapshot, mode: str = SYNC) -> DecisionHandle:
        if mode not in (SYNC, ASYNC):
            raise ValueError(f"mode must be sync or async, not {mode!r}")
        if snapshot.service_id != service_id:
            raise ValueError(f"snapshot belongs to {snapshot.service_id}, not {service_id}")
        bundle, version = self.cas.current(service_id)  # UnknownService
        if mode == SYNC:
            return self._decide(service_id, bundle, snapshot, mode)
        key = (service_id, version, snapshot.digest())
        with self._lock:
            cached = self._cache.get(key)
            if cached is not None:
                self.stats.hits += 1
                return DecisionHandle(cached.woven, cached.trace, cached.selected, ASYNC, cache_hit=True)
            self.stats.misses += 1
        handle = self._decide(service_id, bundle, snapshot, mode)
        with self._lock:
            self._cache[key] = handle
        return handle

    def invalidate(self, service_id: str) -> None:
        with self._lock:
            stale = [k for k in self._cache if k[0] == service_id]
            for k in stale:
                del self._cache[k]
            self.stats.invalidations += 1

    def watch(self, context_manager, service_id: str) -> list:
        """Invalidate ``service_id``'s cache on every notification-mode change."""
        from acas.providers import NOTIFICATION

        subs = []
        for leaf in context_manager.leaves(context_manager.context_provider(service_id)):
            if leaf.interface.mode != NOTIFICATION:
                continue
            for path in sorted(leaf.supplies_paths):
                subs.append(context_manager.subscribe(leaf.id, path, lambda _note: self.invalidate(service_id)))
        return subs


@dataclass(frozen=True)
class InvocationResult:
    response: Any
    handle: DecisionHandle
    snapshot: ContextSnapshot


class RequestController:
    """Service entry point: snapshot -> notify -> invoke for every request."""

    def __init__(self, context_manager, a2w: A2W) -> None:
        self.context = context_manager
        self.a2w = a2w

    def call(self, service_id: str, operation: str, request: Any, mode: str = SYNC) -> InvocationResult:
        if service_id not in self.a2w.services:
            raise UnknownService(service_id)
        snapshot = self.context.snapshot(service_id)
        handle = self.a2w.notify(service_id, snapshot, mode)
        return InvocationResult(handle.invoke(operation, request), handle, snapshot)
