"""Geographic values, DMS/DD conversion and great-circle distance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from acas.errors import MalformedRepresentation

EARTH_RADIUS_KM = 6371.0

DD = "DD"
DMS = "DMS"
REPRESENTATIONS = (DD, DMS)


@dataclass(frozen=True)
class GeoValue:
    """A position in decimal degrees (the canonical representation)."""

    latitude: float
    longitude: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude <= 90.0:
            raise MalformedRepresentation(f"latitude out of range: {self.latitude}")
        if not -180.0 <= self.longitude <= 180.0:
            raise MalformedRepresentation(f"longitude out of range: {self.longitude}")

    def to_json(self) -> dict:
        return {"latitude": self.latitude, "longitude": self.longitude}

    @classmethod
    def from_json(cls, data) -> GeoValue:
        if isinstance(data, GeoValue):
            return data
        try:
            lat, lon = data["latitude"], data["longitude"]
        except (KeyError, TypeError) as exc:
            raise MalformedRepresentation(f"not a geo value: {data!r}") from exc
        for v in (lat, lon):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise MalformedRepresentation(f"not a geo value: {data!r}")
        return cls(float(lat), float(lon))


@dataclass(frozen=True)
class GeoComponent:
    """One decimal-degree coordinate; ``axis`` decides N/S versus E/W."""

    degrees: float
    axis: Literal["lat", "lon"] = "lat"


@dataclass(frozen=True)
class DmsValue:
    degrees: int
    minutes: int
    seconds: float
    hemisphere: Literal["N", "S", "E", "W"]

    def validate(self) -> None:
        if self.hemisphere not in ("N", "S", "E", "W"):
            raise MalformedRepresentation(f"bad hemisphere {self.hemisphere!r}")
        if not isinstance(self.degrees, int) or self.degrees < 0:
            raise MalformedRepresentation(f"degrees must be a non-negative integer: {self.degrees!r}")
        if not isinstance(self.minutes, int) or not 0 <= self.minutes < 60:
            raise MalformedRepresentation(f"minutes out of range: {self.minutes!r}")
        if not 0 <= self.seconds < 60:
            raise MalformedRepresentation(f"seconds out of range: {self.seconds!r}")
        limit = 90 if self.hemisphere in ("N", "S") else 180
        if self.degrees + self.minutes / 60 + self.seconds / 3600 > limit:
            raise MalformedRepresentation(f"{self} exceeds {limit} degrees")


def dms_to_dd(value: DmsValue) -> GeoComponent:
    value.validate()
    dd = value.degrees + value.minutes / 60 + value.seconds / 3600
    if value.hemisphere in ("S", "W"):
        dd = -dd
    return GeoComponent(dd, "lat" if value.hemisphere in ("N", "S") else "lon")


def dd_to_dms(value: GeoComponent) -> DmsValue:
    limit = 90 if value.axis == "lat" else 180
    if not -limit <= value.degrees <= limit:
        raise MalformedRepresentation(f"{value.degrees} out of range for axis {value.axis}")
    if value.axis == "lat":
        hemisphere = "N" if value.degrees >= 0 else "S"
    else:
        hemisphere = "E" if value.degrees >= 0 else "W"
    magnitude = abs(value.degrees)
    degrees = int(magnitude)
    rest = (magnitude - degrees) * 60
    minutes = int(rest)
    seconds = round((rest - minutes) * 60, 6)
    # rounding may carry into the next minute/degree
    if seconds >= 60:
        seconds -= 60
        minutes += 1
    if minutes >= 60:
        minutes -= 60
        degrees += 1
    return DmsValue(degrees, minutes, seconds, hemisphere)


def convert_representation(value, source: str, target: str):
    """Convert a coordinate between the DMS and DD representations."""
    if source == target:
        raise ValueError("source and target representations must differ")
    if (source, target) == (DMS, DD):
        if not isinstance(value, DmsValue):
            raise MalformedRepresentation(f"expected DmsValue, got {type(value).__name__}")
        return dms_to_dd(value)
    if (source, target) == (DD, DMS):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            value = GeoComponent(float(value))
        if not isinstance(value, GeoComponent):
            raise MalformedRepresentation(f"expected GeoComponent, got {type(value).__name__}")
        return dd_to_dms(value)
    raise MalformedRepresentation(f"unsupported conversion {source} -> {target}")


def great_circle_distance_km(a: GeoValue, b: GeoValue) -> float:
    """Haversine distance on a sphere of radius 6371 km."""
    lat1, lat2 = math.radians(a.latitude), math.radians(b.latitude)
    dlat = lat2 - lat1
    dlon = math.radians(b.longitude - a.longitude)
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))
