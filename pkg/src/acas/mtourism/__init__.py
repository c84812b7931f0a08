"""Restaurants Searching scenario: core service, adaptations, providers, runner."""

from acas.mtourism.runtime import SERVICE_ID, DemoRuntime

__all__ = ["SERVICE_ID", "DemoRuntime"]
