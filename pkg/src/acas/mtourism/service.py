"""Restaurant fixtures and the unadapted Restaurants Searching core service."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from acas.geo import GeoValue

DEFAULT_PAGE_SIZE = 20


@dataclass(frozen=True)
class Restaurant:
    id: str
    names: dict[str, str]
    descriptions: dict[str, str]
    cuisine: str
    price_tier: int
    location: GeoValue
    open_hours: tuple[tuple[int, int], ...]
    photo_ref: str | None = None

    def __post_init__(self) -> None:
        if not self.names:
            raise ValueError(f"restaurant {self.id} has no name")
        if not 1 <= self.price_tier <= 4:
            raise ValueError(f"restaurant {self.id}: priceTier must be within 1..4")
        for start, end in self.open_hours:
            if not 0 <= start < end <= 1440:
                raise ValueError(f"restaurant {self.id}: bad opening interval {start}-{end}")

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> Restaurant:
        return cls(
            id=data["id"],
            names=dict(data["names"]),
            descriptions=dict(data.get("descriptions", {})),
            cuisine=data["cuisine"],
            price_tier=int(data["priceTier"]),
            location=GeoValue.from_json(data["location"]),
            open_hours=tuple((int(s), int(e)) for s, e in data.get("openHours", [])),
            photo_ref=data.get("photoRef"),
        )

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "id": self.id,
            "names": dict(self.names),
            "descriptions": dict(self.descriptions),
            "cuisine": self.cuisine,
            "priceTier": self.price_tier,
            "location": self.location.to_json(),
            "openHours": [[s, e] for s, e in self.open_hours],
        }
        if self.photo_ref is not None:
            out["photoRef"] = self.photo_ref
        return out


def load_restaurants(source: str | Path | list) -> list[Restaurant]:
    data = source if isinstance(source, list) else json.loads(Path(source).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise ValueError("restaurant data must be a JSON array")
    restaurants = [Restaurant.from_json(item) for item in data]
    ids = [r.id for r in restaurants]
    if len(set(ids)) != len(ids):
        raise ValueError("restaurant ids must be unique")
    return restaurants


@dataclass(frozen=True)
class SearchRequest:
    cuisine_keyword: str | None = None
    max_price: int | None = None
    page: int = 1
    page_size: int = DEFAULT_PAGE_SIZE

    def __post_init__(self) -> None:
        if self.page < 1:
            raise ValueError("page must be >= 1")
        if self.page_size < 1:
            raise ValueError("pageSize must be >= 1")

    @classmethod
    def from_json(cls, data: dict[str, Any] | None) -> SearchRequest:
        data = data or {}
        unknown = set(data) - {"cuisineKeyword", "maxPrice", "page", "pageSize"}
        if unknown:
            raise ValueError(f"unknown search fields: {sorted(unknown)}")
        return cls(
            cuisine_keyword=data.get("cuisineKeyword"),
            max_price=data.get("maxPrice"),
            page=data.get("page", 1),
            page_size=data.get("pageSize", DEFAULT_PAGE_SIZE),
        )


@dataclass
class RestaurantCatalog:
    """Holds the dataset; ``search`` is the core handler."""

    restaurants: list[Restaurant] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def replace(self, restaurants: list[Restaurant]) -> None:
        with self._lock:
            self.restaurants = list(restaurants)

    def search(self, request: dict[str, Any] | None) -> dict[str, Any]:
        return search_restaurants(self.restaurants, SearchRequest.from_json(request))


def search_restaurants(restaurants: list[Restaurant], request: SearchRequest) -> dict[str, Any]:
    keyword = request.cuisine_keyword.casefold() if request.cuisine_keyword else None
    matches = [
        r for r in restaurants
        if (keyword is None or keyword in r.cuisine.casefold())
        and (request.max_price is None or r.price_tier <= request.max_price)
    ]
    start = (request.page - 1) * request.page_size
    page = matches[start:start + request.page_size]
    return {
        "items": [r.to_json() for r in page],
        "page": request.page,
        "pageSize": request.page_size,
        "totalCount": len(matches),
    }
