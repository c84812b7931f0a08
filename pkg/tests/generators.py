"""Random generators and brute-force oracles shared by the property tests.

The expression generator builds its own tuple trees and renders them to text
with full parenthesisation; ``oracle_eval`` evaluates those tuples directly
with Python booleans, so it never touches the parser or the evaluator.
"""

from __future__ import annotations

import itertools
import random
import string

from acas.artifacts import Adaptation, AdaptationBinding, AdaptationRule, ContextRef, SimpleAdaptationStrategy
from acas.cas import CASAdaptationStrategy, ContextView, CVSAdaptationStrategy
from acas.conditions import parse_condition

BOOL_PATHS = ("x.a", "x.b", "x.c")


# --- boolean expressions ---------------------------------------------------


def random_bool_expr(rng: random.Random, paths=BOOL_PATHS, max_depth: int = 3):
    """A tuple tree whose leaves are ``path == literal`` / ``path != literal``."""
    if max_depth == 0 or rng.random() < 0.3:
        return ("atom", rng.choice(paths), rng.choice(["==", "!="]), rng.choice([True, False]))
    kind = rng.choice(["not", "and", "or"])
    if kind == "not":
        return ("not", random_bool_expr(rng, paths, max_depth - 1))
    return (kind, random_bool_expr(rng, paths, max_depth - 1), random_bool_expr(rng, paths, max_depth - 1))


def render(tree) -> str:
    tag = tree[0]
    if tag == "atom":
        _, path, op, lit = tree
        return f"{path} {op} {'true' if lit else 'false'}"
    if tag == "not":
        return f"not ({render(tree[1])})"
    return f"({render(tree[1])}) {tag} ({render(tree[2])})"


def oracle_eval(tree, assignment: dict[str, bool]) -> bool:
    tag = tree[0]
    if tag == "atom":
        _, path, op, lit = tree
        return (assignment[path] == lit) if op == "==" else (assignment[path] != lit)
    if tag == "not":
        return not oracle_eval(tree[1], assignment)
    if tag == "and":
        return oracle_eval(tree[1], assignment) and oracle_eval(tree[2], assignment)
    return oracle_eval(tree[1], assignment) or oracle_eval(tree[2], assignment)


def atom_count(tree) -> int:
    if tree[0] == "atom":
        return 1
    return sum(atom_count(t) for t in tree[1:])


def tree_depth(tree) -> int:
    if tree[0] == "atom":
        return 0
    return 1 + max(tree_depth(t) for t in tree[1:])


def all_assignments(paths=BOOL_PATHS):
    for values in itertools.product([False, True], repeat=len(paths)):
        yield dict(zip(paths, values))


# --- CAS models ------------------------------------------------------------

_CONDITIONS = [
    "device.hardware.battery.level < 20",
    "user.language == 'fr' and device.connexionMode == '2G'",
    "not exists(user.gps)",
    "exists(environment.time) or environment.weather != 'rain'",
    "user.name == 'O\\'Brien & <co>'",
    "device.hardware.memory >= -1.5e3",
]
_PATHS = ["device.hardware.battery.level", "user.language", "user.gps", "environment.time",
          "environment.weather", "device.connexionMode", "user.name", "device.hardware.memory"]


def _ident(rng: random.Random, prefix: str) -> str:
    return prefix + "".join(rng.choice(string.ascii_letters) for _ in range(rng.randint(1, 6)))


def _arg_value(rng: random.Random):
    return rng.choice([
        rng.randint(-1000, 1000),
        round(rng.uniform(-100, 100), 3),
        rng.choice([True, False]),
        rng.choice(["fr", "", "5", "true", "null", " 7", "a&b<c>\"d'", "[1]", "{}", "é"]),
        ContextRef(rng.choice(_PATHS)),
    ])


def random_cas(rng: random.Random) -> CASAdaptationStrategy:
    n_views = rng.randint(0, 4)
    views = [ContextView(f"V{i}", frozenset(rng.sample(_PATHS, rng.randint(1, 3)))) for i in range(n_views)]
    for i, v in enumerate(views):  # nest only towards earlier views: stays acyclic
        if i and rng.random() < 0.4:
            v.sub_views.append(views[rng.randrange(i)])
    cvs = []
    for i, view in enumerate(v for v in views if rng.random() < 0.8):
        bindings = []
        for j in range(rng.randint(1, 4)):
            args = {_ident(rng, "a"): _arg_value(rng) for _ in range(rng.randint(0, 3))}
            bindings.append(AdaptationBinding(
                parse_condition(rng.choice(_CONDITIONS)),
                AdaptationRule(rng.choice(["Svc", "*"]), rng.choice(["op", "*", "search"]),
                               rng.choice(["before", "after", "around", "replace"])),
                Adaptation(_ident(rng, "ad"), args),
                rng.randint(-50, 50),
                j,
            ))
        cvs.append(CVSAdaptationStrategy(view, SimpleAdaptationStrategy(f"S{i}", tuple(bindings))))
    return CASAdaptationStrategy("Svc", tuple(cvs), tuple(views))


def structurally_equal(a: CASAdaptationStrategy, b: CASAdaptationStrategy) -> list[str]:
    """Field-by-field comparison; returns a list of differences (empty if equal)."""
    diffs = []
    if a.service_id != b.service_id:
        diffs.append("service")
    if [v.name for v in a.views] != [v.name for v in b.views]:
        diffs.append("view names")
    for va, vb in zip(a.views, b.views):
        if va.required != vb.required or [s.name for s in va.sub_views] != [s.name for s in vb.sub_views]:
            diffs.append(f"view {va.name}")
    if len(a.cvs_strategies) != len(b.cvs_strategies):
        diffs.append("strategy count")
    for ca, cb in zip(a.cvs_strategies, b.cvs_strategies):
        if (ca.view.name, ca.strategy.name) != (cb.view.name, cb.strategy.name):
            diffs.append(f"strategy {ca.strategy.name}")
        if len(ca.strategy.bindings) != len(cb.strategy.bindings):
            diffs.append(f"binding count {ca.strategy.name}")
        for ba, bb in zip(ca.strategy.bindings, cb.strategy.bindings):
            for field in ("priority", "declaration_index", "rule"):
                if getattr(ba, field) != getattr(bb, field):
                    diffs.append(f"{ca.strategy.name}[{ba.declaration_index}].{field}")
            if ba.condition.source_text != bb.condition.source_text or ba.condition.ast != bb.condition.ast:
                diffs.append(f"{ca.strategy.name}[{ba.declaration_index}].condition")
            if ba.adaptation.name != bb.adaptation.name:
                diffs.append(f"{ca.strategy.name}[{ba.declaration_index}].adaptation")
            for k in set(ba.adaptation.args) | set(bb.adaptation.args):
                x, y = ba.adaptation.args.get(k, KeyError), bb.adaptation.args.get(k, KeyError)
                if x != y or type(x) is not type(y):
                    diffs.append(f"{ca.strategy.name}[{ba.declaration_index}].args.{k}")
    return diffs
