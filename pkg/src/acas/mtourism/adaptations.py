"""Adaptation behaviours for the Restaurants Searching service.

All of them are after-advice: ``(response, args, snapshot) -> response``.
Context values come from bound arguments when the strategy supplies them,
otherwise straight from the snapshot.  None of them mutate their input.
"""

from __future__ import annotations

import copy
from collections.abc import Mapping
from typing import Any

from acas.artifacts import AFTER, AdaptationRegistry
from acas.context import ContextSnapshot
from acas.errors import Unavailable
from acas.geo import GeoValue, great_circle_distance_km

DEFAULT_LANGUAGE = "en"
DEFAULT_RADIUS_KM = 5.0
DEFAULT_OPTIMIZED_PAGE_SIZE = 5
BATTERY_LOW_THRESHOLD = 20
LOW_CONNEXION_MODES = ("2G", "GPRS")


def _context(args: Mapping[str, Any], name: str, snapshot: ContextSnapshot, path: str) -> Any:
    if name in args:
        return args[name]
    return snapshot.resolve(path)


def _with_items(response: dict[str, Any], items: list[dict[str, Any]]) -> dict[str, Any]:
    out = {k: v for k, v in response.items() if k != "items"}
    out["items"] = items
    return out


def _pick(translations: Mapping[str, str], language: str, default: str) -> tuple[str, str] | None:
    for lang in (language, default):
        if lang in translations:
            return lang, translations[lang]
    if translations:
        lang = next(iter(translations))
        return lang, translations[lang]
    return None


def localize(response: dict[str, Any], args: Mapping[str, Any], snapshot: ContextSnapshot) -> dict[str, Any]:
    """Collapse names/descriptions to the user's language (English fallback)."""
    language = _context(args, "language", snapshot, "user.language")
    default = args.get("defaultLanguage", DEFAULT_LANGUAGE)
    items = []
    for item in response.get("items", []):
        item = copy.deepcopy(item)
        names = item.pop("names", {})
        descriptions = item.pop("descriptions", {})
        picked = _pick(names, language, default)
        if picked is not None:
            item["language"], item["name"] = picked
        picked = _pick(descriptions, language, default)
        if picked is not None:
            item["description"] = picked[1]
        items.append(item)
    return _with_items(response, items)


def minute_of_day(value: Any) -> int:
    """Accept ``"HH:MM"`` or an integer minute-of-day."""
    if isinstance(value, bool):
        raise ValueError(f"not a time: {value!r}")
    if isinstance(value, (int, float)):
        minute = int(value)
    else:
        hours, _, minutes = str(value).partition(":")
        minute = int(hours) * 60 + int(minutes or 0)
    if not 0 <= minute < 1440:
        raise ValueError(f"time out of range: {value!r}")
    return minute


def is_open(open_hours, minute: int) -> bool:
    return any(start <= minute < end for start, end in open_hours)


def filter_open(response: dict[str, Any], args: Mapping[str, Any], snapshot: ContextSnapshot) -> dict[str, Any]:
    minute = minute_of_day(_context(args, "time", snapshot, "environment.time"))
    items = [copy.deepcopy(i) for i in response.get("items", []) if is_open(i.get("openHours", []), minute)]
    return _with_items(response, items)


def filter_by_distance(response: dict[str, Any], args: Mapping[str, Any],
                       snapshot: ContextSnapshot) -> dict[str, Any]:
    origin = GeoValue.from_json(_context(args, "origin", snapshot, "user.gps"))
    radius = float(args.get("radiusKm", DEFAULT_RADIUS_KM))
    kept = []
    for item in response.get("items", []):
        distance = great_circle_distance_km(origin, GeoValue.from_json(item["location"]))
        if distance <= radius:
            kept.append((distance, item))
    kept.sort(key=lambda pair: pair[0])  # stable: ties keep input order
    items = []
    for distance, item in kept:
        item = copy.deepcopy(item)
        item["distanceKm"] = round(distance, 2)
        items.append(item)
    return _with_items(response, items)


def optimize_payload(response: dict[str, Any], args: Mapping[str, Any],
                     snapshot: ContextSnapshot) -> dict[str, Any]:
    page_size = int(args.get("pageSize", DEFAULT_OPTIMIZED_PAGE_SIZE))
    items = []
    for item in response.get("items", [])[:page_size]:
        item = copy.deepcopy(item)
        item.pop("photoRef", None)
        items.append(item)
    out = _with_items(response, items)
    out["optimized"] = True
    return out


def filter_preferences(response: dict[str, Any], args: Mapping[str, Any],
                       snapshot: ContextSnapshot) -> dict[str, Any]:
    prefs = _context(args, "preferences", snapshot, "user.preferences")
    if not isinstance(prefs, Mapping):
        raise Unavailable("user.preferences", "preferences must be a record")
    cuisines = {c.casefold() for c in prefs.get("cuisines", ())}
    max_tier = prefs.get("maxPriceTier")
    items = [
        copy.deepcopy(i) for i in response.get("items", [])
        if (not cuisines or i.get("cuisine", "").casefold() in cuisines)
        and (max_tier is None or i.get("priceTier", 0) <= max_tier)
    ]
    return _with_items(response, items)


BEHAVIORS = {
    "localize": localize,
    "filterOpen": filter_open,
    "filterByDistance": filter_by_distance,
    "optimizePayload": optimize_payload,
    "filterPreferences": filter_preferences,
}


def register_demo_adaptations(registry: AdaptationRegistry | None = None) -> AdaptationRegistry:
    registry = registry or AdaptationRegistry()
    for name, fn in BEHAVIORS.items():
        registry.register(name, fn, AFTER)
    return registry
