"""XML codec for strategy documents and context-model documents.

Both document kinds share one dialect.  Parsing is strict: unknown elements
or attributes are errors.  Serialization is canonical (document order for
elements, attributes sorted by name, two-space indent, UTF-8) so that
``serialize(load(serialize(x))) == serialize(x)`` byte for byte.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from typing import Any

from acas.artifacts import (
    Adaptation,
    AdaptationBinding,
    AdaptationRegistry,
    AdaptationRule,
    ContextRef,
    SimpleAdaptationStrategy,
)
from acas.cas import CASAdaptationStrategy, ContextView, CVSAdaptationStrategy, validate_cas
from acas.conditions import parse_condition
from acas.context import (
    Category,
    ContextModel,
    DerivationSpec,
    Entity,
    ParameterDescriptor,
    SubContext,
    validate_model,
)
from acas.errors import ConditionSyntaxError, DocumentParseError, ValidationError

XML_DECLARATION = '<?xml version="1.0" encoding="UTF-8"?>\n'


# --- helpers ---------------------------------------------------------------


def _parse_xml(data: bytes | str) -> ET.Element:
    raw = data.encode("utf-8") if isinstance(data, str) else data
    if b"<!DOCTYPE" in raw or b"<!ENTITY" in raw:
        raise DocumentParseError("DTDs and entity declarations are not allowed")
    try:
        return ET.fromstring(raw)
    except ET.ParseError as exc:
        raise DocumentParseError(f"malformed XML: {exc}") from exc


def _check(el: ET.Element, required: tuple[str, ...] = (), optional: tuple[str, ...] = (),
           children: tuple[str, ...] = ()) -> None:
    allowed = set(required) | set(optional)
    for name in el.attrib:
        if name not in allowed:
            raise DocumentParseError(f"unknown attribute {name!r} on <{el.tag}>")
    for name in required:
        if name not in el.attrib:
            raise DocumentParseError(f"<{el.tag}> is missing required attribute {name!r}")
    for child in el:
        if child.tag not in children:
            raise DocumentParseError(f"unknown element <{child.tag}> inside <{el.tag}>")
    if el.text and el.text.strip() and el.tag not in ("condition",):
        raise DocumentParseError(f"unexpected text inside <{el.tag}>")


def _one(el: ET.Element, tag: str) -> ET.Element:
    found = el.findall(tag)
    if len(found) != 1:
        raise DocumentParseError(f"<{el.tag}> needs exactly one <{tag}>, found {len(found)}")
    return found[0]


def _int_attr(el: ET.Element, name: str) -> int:
    try:
        return int(el.attrib[name])
    except ValueError:
        raise DocumentParseError(f"<{el.tag} {name}=...> must be an integer") from None


def _sub(parent: ET.Element, tag: str, **attrs: str | None) -> ET.Element:
    el = ET.SubElement(parent, tag)
    for k in sorted(attrs):
        if attrs[k] is not None:
            el.set(k, attrs[k])
    return el


def _element(tag: str, **attrs: str | None) -> ET.Element:
    el = ET.Element(tag)
    for k in sorted(attrs):
        if attrs[k] is not None:
            el.set(k, attrs[k])
    return el


def _dump(root: ET.Element) -> bytes:
    ET.indent(root, space="  ")
    return (XML_DECLARATION + ET.tostring(root, encoding="unicode") + "\n").encode("utf-8")


def decode_arg(text: str) -> Any:
    """Argument values are JSON literals; anything else is a bare string."""
    try:
        value = json.loads(text)
    except ValueError:
        return text
    if isinstance(value, (dict, list)) or value is None:
        raise DocumentParseError(f"argument values must be scalars, got {text!r}")
    return value


def encode_arg(value: Any) -> str:
    if isinstance(value, str):
        try:
            json.loads(value)
        except ValueError:
            return value
    return json.dumps(value)


# --- strategy documents ----------------------------------------------------


def _parse_binding(el: ET.Element, index: int) -> AdaptationBinding:
    _check(el, required=("priority",), children=("condition", "rule", "adaptation"))
    cond_el = _one(el, "condition")
    _check(cond_el)
    text = (cond_el.text or "").strip()
    try:
        condition = parse_condition(text)
    except ConditionSyntaxError as exc:
        raise DocumentParseError(f"bad condition: {exc}") from exc
    rule_el = _one(el, "rule")
    _check(rule_el, required=("service", "operation", "advice"))
    try:
        rule = AdaptationRule(rule_el.get("service"), rule_el.get("operation"), rule_el.get("advice"))
    except ValueError as exc:
        raise DocumentParseError(str(exc)) from exc
    ad_el = _one(el, "adaptation")
    _check(ad_el, required=("ref",), children=("arg",))
    args: dict[str, Any] = {}
    for arg in ad_el.findall("arg"):
        _check(arg, required=("name",), optional=("value", "path"))
        name = arg.get("name")
        if name in args:
            raise DocumentParseError(f"duplicate argument {name!r}")
        if ("value" in arg.attrib) == ("path" in arg.attrib):
            raise DocumentParseError(f"argument {name!r} needs exactly one of value= or path=")
        args[name] = ContextRef(arg.get("path")) if "path" in arg.attrib else decode_arg(arg.get("value"))
    return AdaptationBinding(condition, rule, Adaptation(ad_el.get("ref"), args),
                             _int_attr(el, "priority"), index)


def parse_strategy_document(data: bytes | str) -> CASAdaptationStrategy:
    """Parse without semantic validation (structure and references only)."""
    root = _parse_xml(data)
    if root.tag != "cas":
        raise DocumentParseError(f"root element must be <cas>, not <{root.tag}>")
    _check(root, required=("service",), children=("contextView", "strategy"))

    views: dict[str, ContextView] = {}
    view_refs: dict[str, list[str]] = {}
    for el in root.findall("contextView"):
        _check(el, required=("name",), children=("param", "view"))
        name = el.get("name")
        if name in views:
            raise DocumentParseError(f"duplicate contextView {name!r}")
        paths = []
        for p in el.findall("param"):
            _check(p, required=("path",))
            paths.append(p.get("path"))
        refs = []
        for v in el.findall("view"):
            _check(v, required=("ref",))
            refs.append(v.get("ref"))
        views[name] = ContextView(name, frozenset(paths))
        view_refs[name] = refs
    for name, refs in view_refs.items():
        for ref in refs:
            if ref not in views:
                raise DocumentParseError(f"contextView {name!r} refers to unknown view {ref!r}")
            views[name].sub_views.append(views[ref])

    cvs: list[CVSAdaptationStrategy] = []
    for el in root.findall("strategy"):
        _check(el, required=("name", "view"), children=("binding",))
        view = views.get(el.get("view"))
        if view is None:
            raise DocumentParseError(f"strategy {el.get('name')!r} refers to unknown view {el.get('view')!r}")
        bindings = tuple(_parse_binding(b, i) for i, b in enumerate(el.findall("binding")))
        cvs.append(CVSAdaptationStrategy(view, SimpleAdaptationStrategy(el.get("name"), bindings)))
    return CASAdaptationStrategy(root.get("service"), tuple(cvs), tuple(views.values()))


def load_strategy_document(data: bytes | str, model: ContextModel | None = None,
                           registry: AdaptationRegistry | None = None) -> CASAdaptationStrategy:
    cas = parse_strategy_document(data)
    diagnostics = validate_cas(cas, model, registry)
    if diagnostics:
        raise ValidationError(diagnostics)
    return cas


def serialize_strategy(cas: CASAdaptationStrategy) -> bytes:
    root = _element("cas", service=cas.service_id)
    for view in cas.views:
        v = _sub(root, "contextView", name=view.name)
        for path in sorted(view.required):
            _sub(v, "param", path=path)
        for sub in view.sub_views:
            _sub(v, "view", ref=sub.name)
    for c in cas.cvs_strategies:
        s = _sub(root, "strategy", name=c.strategy.name, view=c.view.name)
        for b in sorted(c.strategy.bindings, key=lambda b: b.declaration_index):
            be = _sub(s, "binding", priority=str(b.priority))
            _sub(be, "condition").text = b.condition.source_text
            _sub(be, "rule", service=b.rule.target_service, operation=b.rule.target_operation,
                 advice=b.rule.advice)
            ad = _sub(be, "adaptation", ref=b.adaptation.name)
            for name in sorted(b.adaptation.args):
                value = b.adaptation.args[name]
                if isinstance(value, ContextRef):
                    _sub(ad, "arg", name=name, path=value.path)
                else:
                    _sub(ad, "arg", name=name, value=encode_arg(value))
    return _dump(root)


# --- context model documents -----------------------------------------------


def _parse_parameter(el: ET.Element) -> ParameterDescriptor:
    _check(el, required=("path", "kind", "type"), optional=("unit",),
           children=("representation", "derivation"))
    reps = []
    for r in el.findall("representation"):
        _check(r, required=("id",))
        reps.append(r.get("id"))
    derivation = None
    ders = el.findall("derivation")
    if len(ders) > 1:
        raise DocumentParseError(f"parameter {el.get('path')} has several <derivation> elements")
    if ders:
        d = ders[0]
        _check(d, required=("function",), children=("input",))
        inputs = []
        for i in d.findall("input"):
            _check(i, required=("path",))
            inputs.append(i.get("path"))
        derivation = DerivationSpec(d.get("function"), tuple(inputs))
    return ParameterDescriptor(el.get("path"), el.get("kind"), el.get("type"), el.get("unit"),
                               tuple(reps), derivation)


def _parse_category(el: ET.Element) -> Category:
    _check(el, required=("name",), children=("parameter", "category"))
    return Category(el.get("name"),
                    tuple(_parse_parameter(p) for p in el.findall("parameter")),
                    tuple(_parse_category(c) for c in el.findall("category")))


def _parse_subcontext(el: ET.Element) -> SubContext:
    _check(el, required=("name",), optional=("entity",), children=("parameter", "category", "subContext"))
    return SubContext(
        el.get("name"),
        categories=tuple(_parse_category(c) for c in el.findall("category")),
        parameters=tuple(_parse_parameter(p) for p in el.findall("parameter")),
        children=tuple(_parse_subcontext(s) for s in el.findall("subContext")),
        entity=el.get("entity"),
    )


def parse_context_model(data: bytes | str) -> ContextModel:
    root = _parse_xml(data)
    if root.tag != "contextModel":
        raise DocumentParseError(f"root element must be <contextModel>, not <{root.tag}>")
    _check(root, required=("name",), children=("subContext", "entity"))
    entities = []
    for e in root.findall("entity"):
        _check(e, required=("name",), children=("parameter",))
        entities.append(Entity(e.get("name"), tuple(_parse_parameter(p) for p in e.findall("parameter"))))
    return ContextModel(root.get("name"),
                        tuple(_parse_subcontext(s) for s in root.findall("subContext")),
                        tuple(entities))


def load_context_model(data: bytes | str) -> ContextModel:
    model = parse_context_model(data)
    diagnostics = validate_model(model)
    if diagnostics:
        raise ValidationError(diagnostics)
    return model


def _emit_parameter(parent: ET.Element, p: ParameterDescriptor) -> None:
    el = _sub(parent, "parameter", kind=p.kind, path=p.path, type=p.value_type, unit=p.unit)
    for rep in p.representations:
        _sub(el, "representation", id=rep)
    if p.derivation is not None:
        d = _sub(el, "derivation", function=p.derivation.function_name)
        for inp in p.derivation.inputs:
            _sub(d, "input", path=inp)


def _emit_category(parent: ET.Element, c: Category) -> None:
    el = _sub(parent, "category", name=c.name)
    for p in c.parameters:
        _emit_parameter(el, p)
    for sub in c.categories:
        _emit_category(el, sub)


def _emit_subcontext(parent: ET.Element, s: SubContext) -> None:
    el = _sub(parent, "subContext", entity=s.entity, name=s.name)
    for p in s.parameters:
        _emit_parameter(el, p)
    for c in s.categories:
        _emit_category(el, c)
    for child in s.children:
        _emit_subcontext(el, child)


def serialize_context_model(model: ContextModel) -> bytes:
    root = _element("contextModel", name=model.name)
    for s in model.sub_contexts:
        _emit_subcontext(root, s)
    for e in model.entities:
        el = _sub(root, "entity", name=e.name)
        for p in e.parameters:
            _emit_parameter(el, p)
    return _dump(root)
