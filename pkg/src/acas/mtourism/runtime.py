"""Wiring for the Restaurants Searching deployment.

:class:`DemoRuntime` owns the context model, the providers of the
Restaurants Searching context provider, the weaver and the request
controller.  Both the CLI scenario runner and the HTTP service drive it.
"""

from __future__ import annotations

from collections.abc import Callable
from datetime import datetime
from importlib import resources
from pathlib import Path
from typing import Any

from acas.cas import CASAdaptationStrategy
from acas.context import ContextModel, coerce_value
from acas.documents import load_context_model, load_strategy_document
from acas.errors import UnknownPath
from acas.mtourism.adaptations import register_demo_adaptations
from acas.mtourism.service import Restaurant, RestaurantCatalog, load_restaurants
from acas.providers import (
    CONTEXT_PROVIDER,
    ENTITY_PROVIDER,
    LOCAL,
    NOTIFICATION,
    PARAMETER_PROVIDER,
    QUERY,
    REMOTE,
    ContextManager,
    ProviderDescriptor,
    ProviderInterface,
    RemoteSource,
    SimulatedSource,
    StubTransport,
)
from acas.weaver import A2W, SYNC, CoreService, InvocationResult, RequestController

SERVICE_ID = "RestaurantsSearching"

DEVICE_PATHS = frozenset({
    "device.connexionMode", "device.software.os", "device.software.browser", "device.software.dataTypes",
    "device.hardware.processor", "device.hardware.battery.level", "device.hardware.memory",
})
USER_PATHS = frozenset({
    "user.language", "user.preferences", "user.profile", "user.gps", "user.accommodation",
})


def data_path(name: str) -> Path:
    return Path(str(resources.files("acas.mtourism") / "data" / name))


def load_demo_model() -> ContextModel:
    return load_context_model(data_path("mtourism-context.xml").read_bytes())


def build_context_manager(model: ContextModel, clock: Callable[[], datetime] | None = None
                          ) -> tuple[ContextManager, SimulatedSource, StubTransport]:
    """Register Device/User/Time/Weather providers under one context provider."""
    cm = ContextManager(model, clock)
    time_source = SimulatedSource()
    transport = StubTransport(clock)
    cm.register_provider(ProviderDescriptor(
        "DeviceProvider", ENTITY_PROVIDER, DEVICE_PATHS, ProviderInterface(LOCAL, NOTIFICATION)))
    cm.register_provider(ProviderDescriptor(
        "UserProvider", ENTITY_PROVIDER, USER_PATHS, ProviderInterface(LOCAL, NOTIFICATION)))
    cm.register_provider(ProviderDescriptor(
        "TimeProvider", PARAMETER_PROVIDER, frozenset({"environment.time"}), ProviderInterface(LOCAL, QUERY)),
        time_source)
    cm.register_provider(ProviderDescriptor(
        "WeatherProvider", PARAMETER_PROVIDER, frozenset({"environment.weather"}),
        ProviderInterface(REMOTE, QUERY)),
        RemoteSource("WeatherProvider", transport))
    cm.register_provider(ProviderDescriptor(
        "RestaurantsSearchingProvider", CONTEXT_PROVIDER,
        aggregates=("DeviceProvider", "UserProvider", "TimeProvider", "WeatherProvider"),
        service=SERVICE_ID))
    return cm, time_source, transport


class DemoRuntime:
    def __init__(self, restaurants: list[Restaurant] | None = None,
                 strategies: CASAdaptationStrategy | bytes | None = None,
                 clock: Callable[[], datetime] | None = None) -> None:
        self.model = load_demo_model()
        self.context, self.time_source, self.transport = build_context_manager(self.model, clock)
        self.adaptations = register_demo_adaptations()
        self.a2w = A2W(self.adaptations)
        self.catalog = RestaurantCatalog(list(restaurants) if restaurants is not None else [])
        self.a2w.register_service(CoreService(SERVICE_ID, {"search": self.catalog.search}))
        self.a2w.watch(self.context, SERVICE_ID)
        self.controller = RequestController(self.context, self.a2w)
        if strategies is None:
            strategies = data_path("restaurants-cas.xml").read_bytes()
        self.load_strategies(strategies)

    @classmethod
    def from_files(cls, strategies: str | Path | None = None, data: str | Path | None = None) -> DemoRuntime:
        restaurants = load_restaurants(data or data_path("restaurants.json"))
        document = Path(strategies).read_bytes() if strategies else None
        return cls(restaurants, document)

    def load_strategies(self, document: CASAdaptationStrategy | bytes | str) -> CASAdaptationStrategy:
        if isinstance(document, CASAdaptationStrategy):
            cas = document
        else:
            cas = load_strategy_document(document, self.model, self.adaptations)
        self.a2w.register_cas(cas)
        return cas

    def load_restaurants(self, data: list) -> int:
        self.catalog.replace(load_restaurants(data))
        return len(self.catalog.restaurants)

    # context manipulation (what a scenario's set/unset do)

    def set_context(self, path: str, value: Any) -> str:
        """Route a value to the provider supplying ``path``; returns its id."""
        provider = self.context.provider_for(SERVICE_ID, path)
        coerce_value(self.model.descriptor(path), value)  # reject ill-typed values early
        if provider.interface.mode == NOTIFICATION:
            self.context.publish(provider.id, path, value)
        elif provider.interface.locality == REMOTE:
            self.transport.set_value(provider.id, path, value)
        else:
            source = self.context.source(provider.id)
            if not isinstance(source, SimulatedSource):
                raise UnknownPath(f"{path} is not settable")
            source.set(path, value)
        return provider.id

    def unset_context(self, path: str) -> str:
        provider = self.context.provider_for(SERVICE_ID, path)
        if provider.interface.mode == NOTIFICATION:
            self.context.retract(provider.id, path)
        elif provider.interface.locality == REMOTE:
            self.transport.clear(provider.id, path)
        else:
            source = self.context.source(provider.id)
            if isinstance(source, SimulatedSource):
                source.unset(path)
        return provider.id

    def reset_context(self) -> None:
        self.context.reset_values()
        for path in self.context.supplied_paths("TimeProvider"):
            self.time_source.unset(path)
        for path in self.context.supplied_paths("WeatherProvider"):
            self.transport.clear("WeatherProvider", path)
        self.a2w.invalidate(SERVICE_ID)

    def call(self, operation: str, request: Any, mode: str = SYNC,
             service_id: str = SERVICE_ID) -> InvocationResult:
        return self.controller.call(service_id, operation, request, mode)
