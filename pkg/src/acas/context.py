"""Context metamodel, value typing and per-request snapshots."""

from __future__ import annotations

import hashlib
import json
import re
import threading
from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass, field
from datetime import datetime
from functools import cached_property
from types import MappingProxyType
from typing import Any

from acas.errors import (
    Diagnostic,
    MalformedRepresentation,
    TypeMismatch,
    Unavailable,
    UnknownFunction,
)
from acas.geo import REPRESENTATIONS, GeoValue, great_circle_distance_km

SIMPLE, DERIVED, COMPLEX = "simple", "derived", "complex"
KINDS = (SIMPLE, DERIVED, COMPLEX)
VALUE_TYPES = ("number", "string", "boolean", "geo", "record")

_PATH_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")


def is_valid_path(path: str) -> bool:
    return bool(_PATH_RE.match(path))


@dataclass(frozen=True)
class DerivationSpec:
    function_name: str
    inputs: tuple[str, ...]


@dataclass(frozen=True)
class ParameterDescriptor:
    path: str
    kind: str = SIMPLE
    value_type: str = "string"
    unit: str | None = None
    representations: tuple[str, ...] = ()
    derivation: DerivationSpec | None = None


@dataclass(frozen=True)
class Category:
    name: str
    parameters: tuple[ParameterDescriptor, ...] = ()
    categories: tuple[Category, ...] = ()


@dataclass(frozen=True)
class SubContext:
    name: str
    categories: tuple[Category, ...] = ()
    parameters: tuple[ParameterDescriptor, ...] = ()
    children: tuple[SubContext, ...] = ()
    entity: str | None = None  # entity this sub-context describes, if any


@dataclass(frozen=True)
class Entity:
    name: str
    parameters: tuple[ParameterDescriptor, ...] = ()


@dataclass(frozen=True)
class ContextModel:
    name: str
    sub_contexts: tuple[SubContext, ...] = ()
    entities: tuple[Entity, ...] = ()

    def iter_parameters(self) -> Iterator[tuple[str, ParameterDescriptor]]:
        """Yield ``(placement, descriptor)`` for every parameter, tree order."""

        def walk_category(prefix: str, cat: Category):
            where = f"{prefix}/{cat.name}"
            for p in cat.parameters:
                yield where, p
            for sub in cat.categories:
                yield from walk_category(where, sub)

        def walk_sub(prefix: str, sub: SubContext):
            where = f"{prefix}/{sub.name}"
            for p in sub.parameters:
                yield where, p
            for cat in sub.categories:
                yield from walk_category(where, cat)
            for child in sub.children:
                yield from walk_sub(where, child)

        for sub in self.sub_contexts:
            yield from walk_sub("", sub)
        for ent in self.entities:
            for p in ent.parameters:
                yield f"entity:{ent.name}", p

    @cached_property
    def descriptors(self) -> dict[str, ParameterDescriptor]:
        # first declaration wins; duplicates are reported by validate_model
        out: dict[str, ParameterDescriptor] = {}
        for _, p in self.iter_parameters():
            out.setdefault(p.path, p)
        return out

    def descriptor(self, path: str) -> ParameterDescriptor | None:
        return self.descriptors.get(path)


class DerivationRegistry:
    """Name -> function table for derived parameters.

    Written during startup, then frozen; reads need no locking afterwards.
    """

    def __init__(self) -> None:
        self._functions: dict[str, Callable[..., Any]] = {}
        self._frozen = False
        self._lock = threading.Lock()

    def register(self, name: str, fn: Callable[..., Any]) -> None:
        with self._lock:
            if self._frozen:
                raise RuntimeError("derivation registry is frozen")
            if name in self._functions:
                raise ValueError(f"derivation {name!r} already registered")
            self._functions[name] = fn

    def freeze(self) -> None:
        self._frozen = True

    def __contains__(self, name: str) -> bool:
        return name in self._functions

    def get(self, name: str) -> Callable[..., Any]:
        try:
            return self._functions[name]
        except KeyError:
            raise UnknownFunction(name) from None


def _distance_fn(a, b) -> float:
    if not isinstance(a, GeoValue) or not isinstance(b, GeoValue):
        raise TypeMismatch("greatCircleDistanceKm", None, "inputs must be geo values")
    return great_circle_distance_km(a, b)


DERIVATIONS = DerivationRegistry()
DERIVATIONS.register("greatCircleDistanceKm", _distance_fn)


# --- validation ------------------------------------------------------------


def validate_model(model: ContextModel, derivations: DerivationRegistry = DERIVATIONS) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    seen: set[str] = set()
    entity_names = [e.name for e in model.entities]
    for name in sorted({n for n in entity_names if entity_names.count(n) > 1}):
        diags.append(Diagnostic(f"entity:{name}", "duplicate entity"))

    def check_names(where: str, names: list[str], what: str) -> None:
        for n in sorted({n for n in names if names.count(n) > 1}):
            diags.append(Diagnostic(f"{where}/{n}", f"duplicate {what}"))

    def walk_cats(where: str, cats: tuple[Category, ...]) -> None:
        check_names(where, [c.name for c in cats], "category")
        for c in cats:
            walk_cats(f"{where}/{c.name}", c.categories)

    def walk_subs(where: str, subs: tuple[SubContext, ...]) -> None:
        check_names(where, [s.name for s in subs], "sub-context")
        for s in subs:
            if s.entity is not None and s.entity not in entity_names:
                diags.append(Diagnostic(f"{where}/{s.name}", "unknown entity", s.entity))
            walk_cats(f"{where}/{s.name}", s.categories)
            walk_subs(f"{where}/{s.name}", s.children)

    walk_subs("", model.sub_contexts)

    for _, p in model.iter_parameters():
        if p.path in seen:
            diags.append(Diagnostic(p.path, "duplicate path"))
            continue
        seen.add(p.path)
        if not is_valid_path(p.path):
            diags.append(Diagnostic(p.path, "invalid path"))
        if p.kind not in KINDS:
            diags.append(Diagnostic(p.path, "unknown kind", p.kind))
        if p.value_type not in VALUE_TYPES:
            diags.append(Diagnostic(p.path, "unknown value type", p.value_type))
        if (p.kind == DERIVED) != (p.derivation is not None):
            diags.append(Diagnostic(p.path, "derivation mismatch", "derived iff derivation present"))
        if (p.kind == COMPLEX) != bool(p.representations):
            diags.append(Diagnostic(p.path, "representation mismatch", "complex iff representations present"))
        for rep in p.representations:
            if rep not in REPRESENTATIONS:
                diags.append(Diagnostic(p.path, "unknown representation", rep))
        if p.derivation is not None and p.derivation.function_name not in derivations:
            diags.append(Diagnostic(p.path, "unknown derivation function", p.derivation.function_name))

    descriptors = model.descriptors
    for path, p in descriptors.items():
        if p.derivation is None:
            continue
        for inp in p.derivation.inputs:
            if inp not in descriptors:
                diags.append(Diagnostic(path, "unknown derivation input", inp))

    # cycle detection over derivation inputs
    WHITE, GREY, BLACK = 0, 1, 2
    colour = dict.fromkeys(descriptors, WHITE)
    cyclic: set[str] = set()

    def visit(path: str) -> None:
        colour[path] = GREY
        d = descriptors[path].derivation
        for inp in d.inputs if d else ():
            if inp not in colour:
                continue
            if colour[inp] == GREY:
                cyclic.add(path)
            elif colour[inp] == WHITE:
                visit(inp)
        colour[path] = BLACK

    for path in descriptors:
        if colour[path] == WHITE:
            visit(path)
    for path in sorted(cyclic):
        diags.append(Diagnostic(path, "derivation cycle"))
    return diags


# --- values ----------------------------------------------------------------


def freeze(value: Any) -> Any:
    """Deep-freeze JSON-ish data so snapshots cannot be mutated through it."""
    if isinstance(value, Mapping):
        return MappingProxyType({k: freeze(v) for k, v in value.items()})
    if isinstance(value, (list, tuple)):
        return tuple(freeze(v) for v in value)
    return value


def to_jsonable(value: Any) -> Any:
    if isinstance(value, GeoValue):
        return value.to_json()
    if isinstance(value, Mapping):
        return {k: to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


def coerce_value(descriptor: ParameterDescriptor | None, raw: Any) -> Any:
    """Check ``raw`` against the descriptor's value type and return a frozen value."""
    if descriptor is None:
        return freeze(raw)
    vt, path = descriptor.value_type, descriptor.path
    if vt == "number":
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise TypeMismatch("coerce", path, f"expected number, got {raw!r}")
        return raw
    if vt == "string":
        if not isinstance(raw, str):
            raise TypeMismatch("coerce", path, f"expected string, got {raw!r}")
        return raw
    if vt == "boolean":
        if not isinstance(raw, bool):
            raise TypeMismatch("coerce", path, f"expected boolean, got {raw!r}")
        return raw
    if vt == "geo":
        try:
            return GeoValue.from_json(raw)
        except MalformedRepresentation as exc:
            raise TypeMismatch("coerce", path, str(exc)) from exc
    if vt == "record":
        if not isinstance(raw, Mapping):
            raise TypeMismatch("coerce", path, f"expected record, got {raw!r}")
        return freeze(raw)
    return freeze(raw)


# --- snapshots -------------------------------------------------------------


@dataclass(frozen=True)
class SnapshotEntry:
    value: Any
    source: str
    timestamp: datetime


@dataclass(frozen=True, eq=False)
class ContextSnapshot:
    """Immutable view of a service's context at one instant.

    ``model`` (optional) enables lazy computation of derived parameters.
    """

    service_id: str
    captured_at: datetime
    entries: Mapping[str, SnapshotEntry]
    model: ContextModel | None = field(default=None, repr=False)
    derivations: DerivationRegistry = field(default=DERIVATIONS, repr=False)

    def __post_init__(self) -> None:
        if not isinstance(self.entries, MappingProxyType):
            object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    @classmethod
    def of(cls, values: Mapping[str, Any], *, service_id: str = "test", model: ContextModel | None = None,
           at: datetime | None = None, source: str = "literal") -> ContextSnapshot:
        """Build a snapshot from plain values (handy for tests and tooling)."""
        at = at or datetime(1970, 1, 1)
        descriptors = model.descriptors if model else {}
        entries = {
            path: SnapshotEntry(coerce_value(descriptors.get(path), v), source, at)
            for path, v in values.items()
        }
        return cls(service_id, at, entries, model)

    def resolve(self, path: str) -> Any:
        return resolve(self, path)

    def has(self, path: str) -> bool:
        try:
            resolve(self, path)
        except (Unavailable, TypeMismatch, UnknownFunction):
            return False
        return True

    def values(self) -> dict[str, Any]:
        return {p: e.value for p, e in self.entries.items()}

    def digest(self) -> str:
        """Hash of (path, value) pairs; timestamps are deliberately excluded."""
        canonical = json.dumps(
            {p: to_jsonable(e.value) for p, e in self.entries.items()},
            sort_keys=True, separators=(",", ":"), default=str,
        )
        return hashlib.sha256(f"{self.service_id}\n{canonical}".encode()).hexdigest()

    def same_entries(self, other: ContextSnapshot) -> bool:
        return self.service_id == other.service_id and dict(self.entries) == dict(other.entries)


def resolve(snapshot: ContextSnapshot, path: str) -> Any:
    entry = snapshot.entries.get(path)
    if entry is not None:
        return entry.value
    if snapshot.model is not None:
        descriptor = snapshot.model.descriptor(path)
        if descriptor is not None and descriptor.kind == DERIVED:
            return compute_derived(descriptor, snapshot)
    raise Unavailable(path)


def compute_derived(descriptor: ParameterDescriptor, snapshot: ContextSnapshot) -> Any:
    if descriptor.kind != DERIVED or descriptor.derivation is None:
        raise ValueError(f"{descriptor.path} is not a derived parameter")
    fn = snapshot.derivations.get(descriptor.derivation.function_name)
    args = [resolve(snapshot, p) for p in descriptor.derivation.inputs]
    return fn(*args)
