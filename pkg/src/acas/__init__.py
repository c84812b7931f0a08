"""Context-aware service adaptation middleware.

Context is modelled and acquired through providers, adaptation strategies are
bound to context views, and an aspect weaver composes adaptation behaviours
around core service handlers at invocation time.
"""

from acas.artifacts import (
    Adaptation,
    AdaptationBinding,
    AdaptationRegistry,
    AdaptationRule,
    ContextRef,
    SimpleAdaptationStrategy,
    validate_strategy,
)
from acas.cas import CASAdaptationStrategy, CASRegistry, ContextView, CVSAdaptationStrategy, required_paths
from acas.conditions import AdaptationCondition, evaluate_condition, format_condition, parse_condition
from acas.context import ContextModel, ContextSnapshot, ParameterDescriptor, compute_derived, resolve, validate_model
from acas.documents import load_strategy_document, serialize_strategy
from acas.geo import GeoValue, convert_representation, great_circle_distance_km
from acas.providers import ContextManager, ProviderDescriptor, ProviderInterface
from acas.weaver import A2W, CoreService, WovenService, invoke, select_pertinent, weave

__version__ = "0.1.0"

__all__ = [
    "A2W",
    "Adaptation",
    "AdaptationBinding",
    "AdaptationCondition",
    "AdaptationRegistry",
    "AdaptationRule",
    "CASAdaptationStrategy",
    "CASRegistry",
    "ContextManager",
    "ContextModel",
    "ContextRef",
    "ContextSnapshot",
    "ContextView",
    "CoreService",
    "CVSAdaptationStrategy",
    "GeoValue",
    "ParameterDescriptor",
    "ProviderDescriptor",
    "ProviderInterface",
    "SimpleAdaptationStrategy",
    "WovenService",
    "compute_derived",
    "convert_representation",
    "evaluate_condition",
    "format_condition",
    "great_circle_distance_km",
    "invoke",
    "load_strategy_document",
    "parse_condition",
    "required_paths",
    "resolve",
    "select_pertinent",
    "serialize_strategy",
    "validate_model",
    "validate_strategy",
    "weave",
]
