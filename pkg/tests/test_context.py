import pytest

from acas.context import (
    COMPLEX,
    DERIVED,
    Category,
    ContextModel,
    ContextSnapshot,
    DerivationRegistry,
    DerivationSpec,
    Entity,
    ParameterDescriptor,
    SubContext,
    compute_derived,
    resolve,
    validate_model,
)
from acas.errors import TypeMismatch, Unavailable, UnknownFunction
from acas.geo import GeoValue

GPS = ParameterDescriptor("user.gps", COMPLEX, "geo", representations=("DD", "DMS"))
HOME = ParameterDescriptor("user.home", COMPLEX, "geo", representations=("DD",))
DIST = ParameterDescriptor("user.dist", DERIVED, "number", "km",
                           derivation=DerivationSpec("greatCircleDistanceKm", ("user.gps", "user.home")))


def small_model(*params):
    return ContextModel("M", (SubContext("user", parameters=tuple(params)),))


def test_demo_model_is_valid(demo_model):
    assert validate_model(demo_model) == []
    subs = {s.name for s in demo_model.sub_contexts}
    assert subs == {"device", "user", "environment"}
    device = next(s for s in demo_model.sub_contexts if s.name == "device")
    assert {c.name for c in device.categories} == {"software", "hardware"}
    assert "device.hardware.battery.level" in demo_model.descriptors


def test_duplicate_path():
    model = ContextModel("M", (SubContext("a", parameters=(ParameterDescriptor("a.x"),)),),
                         (Entity("E", (ParameterDescriptor("a.x"),)),))
    diags = validate_model(model)
    assert [(d.subject, d.rule) for d in diags] == [("a.x", "duplicate path")]


def test_self_derivation_is_a_cycle():
    p = ParameterDescriptor("user.d", DERIVED, "number",
                            derivation=DerivationSpec("greatCircleDistanceKm", ("user.d",)))
    diags = validate_model(small_model(p))
    assert [(d.subject, d.rule) for d in diags] == [("user.d", "derivation cycle")]


def test_two_step_cycle_detected():
    a = ParameterDescriptor("u.a", DERIVED, "number", derivation=DerivationSpec("greatCircleDistanceKm", ("u.b",)))
    b = ParameterDescriptor("u.b", DERIVED, "number", derivation=DerivationSpec("greatCircleDistanceKm", ("u.a",)))
    assert any(d.rule == "derivation cycle" for d in validate_model(small_model(a, b)))


@pytest.mark.parametrize("param,rule", [
    (ParameterDescriptor("u.a", DERIVED, "number"), "derivation mismatch"),
    (ParameterDescriptor("u.a", COMPLEX, "geo"), "representation mismatch"),
    (ParameterDescriptor("u.a", "simple", "colour"), "unknown value type"),
    (ParameterDescriptor("u.a", COMPLEX, "geo", representations=("UTM",)), "unknown representation"),
    (ParameterDescriptor("u.a", DERIVED, "number", derivation=DerivationSpec("nope", ())),
     "unknown derivation function"),
    (ParameterDescriptor("u.a", DERIVED, "number", derivation=DerivationSpec("greatCircleDistanceKm", ("u.z",))),
     "unknown derivation input"),
    (ParameterDescriptor("1bad"), "invalid path"),
])
def test_descriptor_rules(param, rule):
    assert rule in [d.rule for d in validate_model(small_model(param))]


def test_duplicate_category_and_unknown_entity():
    sub = SubContext("device", categories=(Category("hw"), Category("hw")), entity="Ghost")
    rules = {d.rule for d in validate_model(ContextModel("M", (sub,)))}
    assert rules == {"duplicate category", "unknown entity"}


def test_resolve():
    snap = ContextSnapshot.of({"user.language": "fr", "device.hardware.battery.level": 15})
    assert resolve(snap, "user.language") == "fr"
    assert resolve(snap, "device.hardware.battery.level") == 15
    assert resolve(snap, "user.language") is resolve(snap, "user.language")
    with pytest.raises(Unavailable) as info:
        resolve(ContextSnapshot.of({}), "user.gps")
    assert info.value.path == "user.gps"


def test_snapshot_is_immutable():
    snap = ContextSnapshot.of({"user.preferences": {"cuisines": ["moroccan"]}})
    with pytest.raises(TypeError):
        snap.entries["x"] = 1
    prefs = snap.resolve("user.preferences")
    with pytest.raises(TypeError):
        prefs["cuisines"] = []
    assert prefs["cuisines"] == ("moroccan",)


def test_compute_derived_distance():
    model = small_model(GPS, HOME, DIST)
    p = {"latitude": 31.6258, "longitude": -7.9891}
    snap = ContextSnapshot.of({"user.gps": p, "user.home": p}, model=model)
    assert compute_derived(DIST, snap) == 0
    snap = ContextSnapshot.of({"user.gps": {"latitude": 0, "longitude": 0},
                               "user.home": {"latitude": 1, "longitude": 0}}, model=model)
    assert compute_derived(DIST, snap) == pytest.approx(111.195, abs=0.01)
    # lazily computed through resolve as well
    assert resolve(snap, "user.dist") == pytest.approx(111.195, abs=0.01)
    assert snap.has("user.dist")


def test_compute_derived_missing_input():
    snap = ContextSnapshot.of({"user.home": {"latitude": 1, "longitude": 0}}, model=small_model(GPS, HOME, DIST))
    with pytest.raises(Unavailable):
        compute_derived(DIST, snap)
    assert not snap.has("user.dist")


def test_compute_derived_unknown_function():
    bad = ParameterDescriptor("user.x", DERIVED, "number", derivation=DerivationSpec("nope", ()))
    snap = ContextSnapshot.of({}, model=small_model(bad))
    with pytest.raises(UnknownFunction):
        compute_derived(bad, snap)


def test_coercion_rejects_wrong_types():
    model = small_model(GPS, ParameterDescriptor("user.n", value_type="number"))
    with pytest.raises(TypeMismatch):
        ContextSnapshot.of({"user.n": "ten"}, model=model)
    with pytest.raises(TypeMismatch):
        ContextSnapshot.of({"user.n": True}, model=model)
    with pytest.raises(TypeMismatch):
        ContextSnapshot.of({"user.gps": {"latitude": 200, "longitude": 0}}, model=model)
    snap = ContextSnapshot.of({"user.gps": {"latitude": 1, "longitude": 2}}, model=model)
    assert snap.resolve("user.gps") == GeoValue(1, 2)


def test_digest_ignores_timestamps():
    from datetime import datetime

    a = ContextSnapshot.of({"x.y": 1}, at=datetime(2020, 1, 1))
    b = ContextSnapshot.of({"x.y": 1}, at=datetime(2021, 1, 1))
    c = ContextSnapshot.of({"x.y": 2})
    assert a.digest() == b.digest() != c.digest()


def test_derivation_registry_freezes():
    reg = DerivationRegistry()
    reg.register("f", lambda: 1)
    with pytest.raises(ValueError):
        reg.register("f", lambda: 2)
    reg.freeze()
    with pytest.raises(RuntimeError):
        reg.register("g", lambda: 3)
