"""Context providers and the Context Manager that assembles snapshots.

Providers are either *query* based (polled through a value source when a
snapshot is taken) or *notification* based (pushed through :meth:`publish`
and cached last-write-wins).  Remote query providers reach their values
through a :class:`Transport`; :class:`StubTransport` is the in-process one.
"""

from __future__ import annotations

import itertools
import logging
import threading
from collections.abc import Callable
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Protocol

from acas.context import ContextModel, ContextSnapshot, SnapshotEntry, coerce_value
from acas.errors import (
    DuplicateId,
    PathConflict,
    ProviderUnreachable,
    Unavailable,
    UnknownAggregate,
    UnknownPath,
    UnknownProvider,
    UnknownService,
    WrongMode,
)

log = logging.getLogger(__name__)

CONTEXT_PROVIDER = "contextProvider"
ENTITY_PROVIDER = "entityProvider"
PARAMETER_PROVIDER = "parameterProvider"

LOCAL, REMOTE = "local", "remote"
QUERY, NOTIFICATION = "query", "notification"


@dataclass(frozen=True)
class ProviderInterface:
    locality: str = LOCAL
    mode: str = QUERY

    def __post_init__(self) -> None:
        if self.locality not in (LOCAL, REMOTE):
            raise ValueError(f"locality must be local or remote, not {self.locality!r}")
        if self.mode not in (QUERY, NOTIFICATION):
            raise ValueError(f"mode must be query or notification, not {self.mode!r}")


@dataclass(frozen=True)
class ProviderDescriptor:
    id: str
    kind: str
    supplies_paths: frozenset[str] = frozenset()
    interface: ProviderInterface = ProviderInterface()
    aggregates: tuple[str, ...] = ()
    uses_or_derives_from: tuple[str, ...] = ()
    service: str | None = None  # contextProvider only: the service it collects for


@dataclass(frozen=True)
class Notification:
    provider_id: str
    path: str
    value: Any  # None when the value was retracted
    timestamp: datetime


@dataclass
class Subscription:
    id: str
    provider_id: str
    path: str
    handler: Callable[[Notification], Any] = field(repr=False)
    delivered_count: int = 0
    active: bool = True
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def deliver(self, note: Notification) -> None:
        # handlers of one subscription never overlap
        with self._lock:
            if not self.active:
                return
            self.delivered_count += 1
            self.handler(note)


class ValueSource(Protocol):
    def read(self, path: str) -> Any:
        """Return the current value for ``path`` or raise :class:`Unavailable`."""


class SimulatedSource:
    """A local query source whose values are set by hand (or by a scenario)."""

    def __init__(self, values: dict[str, Any] | None = None) -> None:
        self._values = dict(values or {})
        self._lock = threading.Lock()

    def set(self, path: str, value: Any) -> None:
        with self._lock:
            self._values[path] = value

    def unset(self, path: str) -> None:
        with self._lock:
            self._values.pop(path, None)

    def read(self, path: str) -> Any:
        with self._lock:
            if path not in self._values:
                raise Unavailable(path, "no simulated value")
            return self._values[path]


# --- remote transport ------------------------------------------------------

NO_VALUE = "no-value"


@dataclass(frozen=True)
class TransportResponse:
    """Either ``(value, timestamp)`` or a failure ``code``."""

    value: Any = None
    timestamp: str | None = None  # ISO-8601
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None


class Transport(Protocol):
    def request(self, provider_id: str, path: str) -> TransportResponse: ...


class StubTransport:
    """In-process remote transport; answers from a configured table.

    Unconfigured paths answer with the ``no-value`` failure code.
    """

    def __init__(self, clock: Callable[[], datetime] | None = None) -> None:
        self._clock = clock or (lambda: datetime.now(timezone.utc))
        self._table: dict[tuple[str, str], TransportResponse] = {}
        self._lock = threading.Lock()
        self.requests = 0

    def set_value(self, provider_id: str, path: str, value: Any) -> None:
        with self._lock:
            self._table[(provider_id, path)] = TransportResponse(value=value)

    def set_failure(self, provider_id: str, path: str, code: str = "unreachable") -> None:
        with self._lock:
            self._table[(provider_id, path)] = TransportResponse(failure=code)

    def clear(self, provider_id: str, path: str) -> None:
        with self._lock:
            self._table.pop((provider_id, path), None)

    def request(self, provider_id: str, path: str) -> TransportResponse:
        with self._lock:
            self.requests += 1
            configured = self._table.get((provider_id, path))
        if configured is None:
            return TransportResponse(failure=NO_VALUE)
        if not configured.ok:
            return configured
        return TransportResponse(value=configured.value, timestamp=self._clock().isoformat())


class RemoteSource:
    def __init__(self, provider_id: str, transport: Transport) -> None:
        self.provider_id = provider_id
        self.transport = transport

    def read(self, path: str) -> Any:
        response = self.transport.request(self.provider_id, path)
        if response.failure == NO_VALUE:
            raise Unavailable(path, "remote provider has no value")
        if not response.ok:
            raise ProviderUnreachable(self.provider_id, response.failure)
        return response.value


# --- registry / context manager --------------------------------------------


@dataclass
class _Provider:
    descriptor: ProviderDescriptor
    source: ValueSource | None
    order: int
    latest: dict[str, tuple[Any, datetime]] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


class ContextManager:
    """Provider registry plus per-request snapshot assembly."""

    def __init__(self, model: ContextModel | None = None, clock: Callable[[], datetime] | None = None) -> None:
        self.model = model
        self._clock = clock or (lambda: datetime.now(timezone.utc))
        self._providers: dict[str, _Provider] = {}
        self._services: dict[str, str] = {}
        self._subscriptions: dict[str, list[Subscription]] = {}
        self._sub_ids = itertools.count(1)
        self._lock = threading.RLock()

    # registration

    def register_provider(self, descriptor: ProviderDescriptor, source: ValueSource | None = None) -> str:
        with self._lock:
            if descriptor.id in self._providers:
                raise DuplicateId(descriptor.id)
            for ref in descriptor.aggregates:
                if ref not in self._providers:
                    raise UnknownAggregate(f"{descriptor.id} aggregates unknown provider {ref}")
            for ref in descriptor.uses_or_derives_from:
                if ref not in self._providers:
                    raise UnknownProvider(f"{descriptor.id} uses unknown provider {ref}")
            if descriptor.kind == CONTEXT_PROVIDER:
                if not descriptor.aggregates:
                    raise ValueError(f"context provider {descriptor.id} aggregates nothing")
                claimed: dict[str, str] = {}
                for ref in descriptor.aggregates:
                    for path in self.supplied_paths(ref):
                        if path in claimed:
                            raise PathConflict(f"{path} supplied by both {claimed[path]} and {ref}")
                        claimed[path] = ref
                if descriptor.service is not None and descriptor.service in self._services:
                    raise DuplicateId(f"service {descriptor.service} already has a context provider")
            else:
                if descriptor.aggregates:
                    raise ValueError("only context providers aggregate other providers")
                if self.model is not None:
                    known = self.model.descriptors
                    for path in descriptor.supplies_paths:
                        if path not in known:
                            raise UnknownPath(f"{descriptor.id} supplies {path}, absent from the model")
                if descriptor.interface.mode == QUERY and source is None:
                    raise ValueError(f"query provider {descriptor.id} needs a value source")
            self._providers[descriptor.id] = _Provider(descriptor, source, len(self._providers))
            if descriptor.kind == CONTEXT_PROVIDER and descriptor.service is not None:
                self._services[descriptor.service] = descriptor.id
            return descriptor.id

    def provider(self, provider_id: str) -> ProviderDescriptor:
        return self._get(provider_id).descriptor

    def providers(self) -> list[ProviderDescriptor]:
        return [p.descriptor for p in self._providers.values()]

    def source(self, provider_id: str) -> ValueSource | None:
        return self._get(provider_id).source

    def supplied_paths(self, provider_id: str) -> frozenset[str]:
        d = self._get(provider_id).descriptor
        if d.kind != CONTEXT_PROVIDER:
            return d.supplies_paths
        return frozenset().union(*(self.supplied_paths(a) for a in d.aggregates))

    def leaves(self, provider_id: str) -> list[ProviderDescriptor]:
        """Entity/parameter providers reachable from ``provider_id``, in aggregation order."""
        d = self._get(provider_id).descriptor
        if d.kind != CONTEXT_PROVIDER:
            return [d]
        return [leaf for a in d.aggregates for leaf in self.leaves(a)]

    def provider_for(self, service_id: str, path: str) -> ProviderDescriptor:
        for leaf in self.leaves(self.context_provider(service_id)):
            if path in leaf.supplies_paths:
                return leaf
        raise UnknownPath(f"no provider of {service_id} supplies {path}")

    def context_provider(self, service_id: str) -> str:
        try:
            return self._services[service_id]
        except KeyError:
            raise UnknownService(service_id) from None

    def _get(self, provider_id: str) -> _Provider:
        try:
            return self._providers[provider_id]
        except KeyError:
            raise UnknownProvider(provider_id) from None

    # query / notification

    def query(self, provider_id: str, path: str) -> tuple[Any, datetime]:
        p = self._get(provider_id)
        d = p.descriptor
        if d.interface.mode != QUERY:
            raise WrongMode(f"{provider_id} is notification-based")
        if path not in d.supplies_paths:
            raise UnknownPath(f"{provider_id} does not supply {path}")
        raw = p.source.read(path)
        value = coerce_value(self.model.descriptor(path) if self.model else None, raw)
        return value, self._clock()

    def publish(self, provider_id: str, path: str, value: Any) -> int:
        """Store ``value`` as the provider's latest and notify subscribers.

        Returns the number of deliveries made.
        """
        p = self._get(provider_id)
        d = p.descriptor
        if d.interface.mode != NOTIFICATION:
            raise WrongMode(f"{provider_id} is query-based")
        if path not in d.supplies_paths:
            raise UnknownPath(f"{provider_id} does not supply {path}")
        value = coerce_value(self.model.descriptor(path) if self.model else None, value)
        with p.lock:
            stamp = self._clock()
            p.latest[path] = (value, stamp)
            return self._deliver(Notification(provider_id, path, value, stamp))

    def retract(self, provider_id: str, path: str) -> int:
        """Forget the latest published value for ``path`` and notify subscribers."""
        p = self._get(provider_id)
        if p.descriptor.interface.mode != NOTIFICATION:
            raise WrongMode(f"{provider_id} is query-based")
        if path not in p.descriptor.supplies_paths:
            raise UnknownPath(f"{provider_id} does not supply {path}")
        with p.lock:
            p.latest.pop(path, None)
            return self._deliver(Notification(provider_id, path, None, self._clock()))

    def _deliver(self, note: Notification) -> int:
        with self._lock:
            subs = [s for s in self._subscriptions.get(note.provider_id, []) if s.path == note.path and s.active]
        for sub in subs:
            sub.deliver(note)
        return len(subs)

    def subscribe(self, provider_id: str, path: str, handler: Callable[[Notification], Any]) -> Subscription:
        p = self._get(provider_id)
        if p.descriptor.interface.mode != NOTIFICATION:
            raise WrongMode(f"{provider_id} is query-based")
        if path not in p.descriptor.supplies_paths:
            raise UnknownPath(f"{provider_id} does not supply {path}")
        sub = Subscription(f"sub-{next(self._sub_ids)}", provider_id, path, handler)
        with self._lock:
            self._subscriptions.setdefault(provider_id, []).append(sub)
        return sub

    def unsubscribe(self, subscription: Subscription) -> None:
        with self._lock:
            subs = self._subscriptions.get(subscription.provider_id, [])
            if subscription in subs:
                subs.remove(subscription)
        with subscription._lock:
            subscription.active = False

    def reset_values(self) -> None:
        """Drop every cached notification value (simulated sources are untouched)."""
        for p in self._providers.values():
            with p.lock:
                p.latest.clear()

    # snapshot assembly

    def snapshot(self, service_id: str) -> ContextSnapshot:
        root = self.context_provider(service_id)
        entries: dict[str, SnapshotEntry] = {}
        for leaf in self.leaves(root):
            p = self._providers[leaf.id]
            if leaf.interface.mode == NOTIFICATION:
                with p.lock:
                    latest = dict(p.latest)
                for path in sorted(leaf.supplies_paths):
                    if path in latest:
                        value, stamp = latest[path]
                        entries[path] = SnapshotEntry(value, leaf.id, stamp)
                continue
            for path in sorted(leaf.supplies_paths):
                try:
                    value, stamp = self.query(leaf.id, path)
                except Unavailable:
                    continue
                except Exception as exc:  # a failing provider degrades the snapshot
                    log.warning("provider %s failed for %s: %s", leaf.id, path, exc)
                    continue
                entries[path] = SnapshotEntry(value, leaf.id, stamp)
        return ContextSnapshot(service_id, self._clock(), entries, self.model)
