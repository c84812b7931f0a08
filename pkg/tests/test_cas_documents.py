import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from acas.artifacts import AFTER, AdaptationRegistry
from acas.cas import CASAdaptationStrategy, CASRegistry, ContextView, required_paths, validate_cas
from acas.documents import (
    decode_arg,
    encode_arg,
    load_context_model,
    load_strategy_document,
    parse_context_model,
    parse_strategy_document,
    serialize_context_model,
    serialize_strategy,
)
from acas.errors import CycleDetected, DocumentParseError, UnknownService, ValidationError
from acas.mtourism.adaptations import register_demo_adaptations
from acas.mtourism.runtime import data_path
from generators import random_cas, structurally_equal

HEAD = '<?xml version="1.0" encoding="UTF-8"?>\n'


def doc(body, service="RestaurantsSearching"):
    return f'{HEAD}<cas service="{service}">{body}</cas>'


BINDING = ('<binding priority="1"><condition>{cond}</condition>'
           '<rule service="RestaurantsSearching" operation="search" advice="{advice}" />'
           '<adaptation ref="{ref}">{args}</adaptation></binding>')


def strategy(view_paths, cond="exists(user.language)", ref="localize", advice="after", args=""):
    params = "".join(f'<param path="{p}" />' for p in view_paths)
    return (f'<contextView name="V">{params}</contextView><strategy name="S" view="V">'
            + BINDING.format(cond=cond, ref=ref, advice=advice, args=args) + "</strategy>")


def diag_rules(xml, demo_model):
    with pytest.raises(ValidationError) as info:
        load_strategy_document(xml, demo_model, register_demo_adaptations())
    return {d.rule for d in info.value.diagnostics}


def test_shipped_documents_are_valid(demo_model):
    cas = load_strategy_document(data_path("restaurants-cas.xml").read_bytes(), demo_model,
                                 register_demo_adaptations())
    assert [c.strategy.name for c in cas.cvs_strategies] == [
        "UserAS", "TimeAS", "LocationAS", "BatteryStateAS", "ConnexionModeAS"]
    empty = load_strategy_document(data_path("empty-cas.xml").read_bytes(), demo_model)
    assert empty.cvs_strategies == ()


def test_context_model_round_trip(demo_model):
    raw = data_path("mtourism-context.xml").read_bytes()
    assert serialize_context_model(parse_context_model(raw)) == raw
    assert parse_context_model(serialize_context_model(demo_model)) == demo_model


@pytest.mark.parametrize("xml", [
    "<cas service='S'><bogus /></cas>",
    "<cas service='S' extra='1' />",
    "<cas />",
    "<strategies service='S' />",
    "<cas service='S'",
    '<!DOCTYPE cas [<!ENTITY x "y">]><cas service="S" />',
    doc('<strategy name="S" view="Nope" />'),
    doc('<contextView name="V"><view ref="W" /></contextView>'),
    doc(strategy(["user.language"], cond="user.language ==")),
    doc(strategy(["user.language"], args='<arg name="a" value="1" path="user.gps" />')),
    doc(strategy(["user.language"], args='<arg name="a" />')),
    doc(strategy(["user.language"], args='<arg name="a" value="[1]" />')),
    doc(strategy(["user.language"], advice="sideways")),
    doc(strategy(["user.language"]).replace('priority="1"', 'priority="high"')),
])
def test_strict_parse_errors(xml):
    with pytest.raises(DocumentParseError):
        parse_strategy_document(xml)


def test_validation_rules(demo_model):
    assert "unknown view path" in diag_rules(doc(strategy(["user.shoeSize"])), demo_model)
    assert "unknown adaptation" in diag_rules(doc(strategy(["user.language"], ref="teleport")), demo_model)
    assert "advice mismatch" in diag_rules(doc(strategy(["user.language"], advice="before")), demo_model)
    assert "path outside view" in diag_rules(
        doc(strategy(["user.language"], cond="device.connexionMode == '2G'")), demo_model)
    assert "unknown condition path" in diag_rules(
        doc(strategy(["user.language"], cond="exists(user.nope)")), demo_model)
    assert "unresolvable argument" in diag_rules(
        doc(strategy(["user.language"], args='<arg name="a" path="user.nope" />')), demo_model)
    assert "empty view" in diag_rules(doc(strategy([])), demo_model)
    empty = '<contextView name="V"><param path="user.language" /></contextView><strategy name="S" view="V" />'
    assert "empty strategy" in diag_rules(doc(empty), demo_model)


def test_guarded_path_is_allowed(demo_model):
    xml = doc(strategy(["user.language"], cond="exists(user.gps) and user.language == 'fr'"))
    assert load_strategy_document(xml, demo_model, register_demo_adaptations())


def test_view_cycles():
    a, b = ContextView("A", frozenset({"x.a"})), ContextView("B", frozenset({"x.b"}))
    a.sub_views.append(b)
    assert required_paths(a) == {"x.a", "x.b"}
    b.sub_views.append(a)
    with pytest.raises(CycleDetected):
        required_paths(a)
    cas = CASAdaptationStrategy("S", (), (a, b))
    assert "view cycle" in {d.rule for d in validate_cas(cas)}
    xml = doc('<contextView name="A"><param path="x.a" /><view ref="B" /></contextView>'
              '<contextView name="B"><param path="x.b" /><view ref="A" /></contextView>')
    assert "view cycle" in {d.rule for d in validate_cas(parse_strategy_document(xml))}


def test_random_models_round_trip():
    rng = random.Random(21)
    for _ in range(120):
        cas = random_cas(rng)
        text = serialize_strategy(cas)
        assert structurally_equal(cas, parse_strategy_document(text)) == []
        assert serialize_strategy(parse_strategy_document(text)) == text


@given(st.one_of(st.text(), st.integers(), st.booleans(),
                 st.floats(allow_nan=False, allow_infinity=False)))
def test_arg_codec(value):
    back = decode_arg(encode_arg(value))
    assert back == value and type(back) is type(value)


def test_registry_versions(demo_model):
    reg = CASRegistry({"S": object()})
    with pytest.raises(UnknownService):
        reg.register(CASAdaptationStrategy("T", ()))
    v1 = reg.register(CASAdaptationStrategy("S", ()))
    v2 = reg.register(CASAdaptationStrategy("S", ()))
    assert v2 > v1 and reg.current("S")[1] == v2


def test_adaptation_registry_rejects_duplicates():
    reg = AdaptationRegistry()
    reg.register("x", lambda *a: None, AFTER)
    with pytest.raises(Exception):
        reg.register("x", lambda *a: None, AFTER)
    with pytest.raises(ValueError):
        reg.register("y", lambda *a: None, "sideways")


def test_load_context_model_rejects_cycles():
    xml = (HEAD + '<contextModel name="M"><subContext name="u">'
           '<parameter kind="derived" path="u.d" type="number">'
           '<derivation function="greatCircleDistanceKm"><input path="u.d" /></derivation>'
           '</parameter></subContext></contextModel>')
    with pytest.raises(ValidationError) as info:
        load_context_model(xml)
    assert [d.rule for d in info.value.diagnostics] == ["derivation cycle"]
