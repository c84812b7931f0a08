"""Condition expressions over context parameters.

Grammar::

    expr    := and_expr ("or" and_expr)*
    and_expr:= unary ("and" unary)*
    unary   := "not" unary | atom
    atom    := "(" expr ")" | "exists" "(" PATH ")" | operand CMP operand
    operand := PATH | NUMBER | STRING | "true" | "false"
    CMP     := == | != | < | <= | > | >=

At least one side of a comparison must be a path.  Strings are single
quoted with backslash escapes for ``\\'`` and ``\\\\``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Union

from acas.context import ContextSnapshot, resolve
from acas.errors import ConditionSyntaxError, TypeMismatch, Unavailable
from acas.geo import GeoValue

COMPARATORS = ("==", "!=", "<=", ">=", "<", ">")
ORDERING = ("<", "<=", ">", ">=")
KEYWORDS = frozenset({"and", "or", "not", "exists", "true", "false"})


@dataclass(frozen=True)
class Path:
    name: str


@dataclass(frozen=True)
class Literal:
    value: Any  # int | float | str | bool


Operand = Union[Path, Literal]


@dataclass(frozen=True)
class Compare:
    op: str
    left: Operand
    right: Operand


@dataclass(frozen=True)
class Exists:
    path: str


@dataclass(frozen=True)
class Not:
    operand: Node


@dataclass(frozen=True)
class And:
    left: Node
    right: Node


@dataclass(frozen=True)
class Or:
    left: Node
    right: Node


Node = Union[Compare, Exists, Not, And, Or]


@dataclass(frozen=True)
class AdaptationCondition:
    source_text: str
    ast: Node

    def paths(self) -> set[str]:
        return referenced_paths(self.ast)

    def guarded_paths(self) -> set[str]:
        return {n.path for n in walk(self.ast) if isinstance(n, Exists)}


# --- tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>-?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<string>'(?:[^'\\]|\\.)*')
  | (?P<op>==|!=|<=|>=|<|>)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number|string|op|lparen|rparen|name|keyword|end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos] == "'":
                raise ConditionSyntaxError("unterminated string", text, pos)
            raise ConditionSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "name" and value in KEYWORDS:
                kind = "keyword"
            tokens.append(_Token(kind, value, pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


def _unquote(token: str) -> str:
    return re.sub(r"\\(.)", r"\1", token[1:-1])


def _quote(value: str) -> str:
    return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def fail(self, message: str, tok: _Token | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ConditionSyntaxError(f"{message}, found {found}", self.text, tok.pos)

    def accept_keyword(self, word: str) -> bool:
        if self.tok.kind == "keyword" and self.tok.text == word:
            self.i += 1
            return True
        return False

    def expect(self, kind: str, what: str) -> _Token:
        if self.tok.kind != kind:
            self.fail(f"expected {what}")
        tok = self.tok
        self.i += 1
        return tok

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail("expected 'and', 'or' or end of input")
        return node

    def expr(self) -> Node:
        node = self.and_expr()
        while self.accept_keyword("or"):
            node = Or(node, self.and_expr())
        return node

    def and_expr(self) -> Node:
        node = self.unary()
        while self.accept_keyword("and"):
            node = And(node, self.unary())
        return node

    def unary(self) -> Node:
        if self.accept_keyword("not"):
            return Not(self.unary())
        return self.atom()

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "lparen":
            self.i += 1
            node = self.expr()
            self.expect("rparen", "')'")
            return node
        if tok.kind == "keyword" and tok.text == "exists":
            self.i += 1
            self.expect("lparen", "'(' after exists")
            path = self.expect("name", "a context path")
            self.expect("rparen", "')'")
            return Exists(path.text)
        left = self.operand()
        if self.tok.kind != "op":
            self.fail("expected a comparison operator")
        op = self.tok.text
        self.i += 1
        right = self.operand()
        if isinstance(left, Literal) and isinstance(right, Literal):
            self.fail("a comparison needs at least one context path", tok)
        return Compare(op, left, right)

    def operand(self) -> Operand:
        tok = self.tok
        if tok.kind == "name":
            self.i += 1
            return Path(tok.text)
        if tok.kind == "number":
            self.i += 1
            text = tok.text
            is_float = any(c in text for c in ".eE")
            return Literal(float(text) if is_float else int(text))
        if tok.kind == "string":
            self.i += 1
            return Literal(_unquote(tok.text))
        if tok.kind == "keyword" and tok.text in ("true", "false"):
            self.i += 1
            return Literal(tok.text == "true")
        self.fail("expected a context path or literal")


def parse_condition(text: str) -> AdaptationCondition:
    return AdaptationCondition(text, _Parser(text).parse())


# --- printing --------------------------------------------------------------


def _format_operand(op: Operand) -> str:
    if isinstance(op, Path):
        return op.name
    v = op.value
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return _quote(v)
    return repr(v)


def format_condition(node: Node) -> str:
    """Render ``node`` so that parsing the result yields an identical tree."""
    if isinstance(node, Compare):
        return f"{_format_operand(node.left)} {node.op} {_format_operand(node.right)}"
    if isinstance(node, Exists):
        return f"exists({node.path})"
    if isinstance(node, Not):
        inner = format_condition(node.operand)
        if isinstance(node.operand, (And, Or)):
            inner = f"({inner})"
        return f"not {inner}"
    word = "and" if isinstance(node, And) else "or"
    parts = []
    for child, is_left in ((node.left, True), (node.right, False)):
        text = format_condition(child)
        # left-assoc chains of the same operator stay flat on the left only
        flat = is_left and type(child) is type(node)
        if isinstance(child, (And, Or)) and not flat:
            text = f"({text})"
        parts.append(text)
    return f" {word} ".join(parts)


def walk(node: Node):
    yield node
    if isinstance(node, Not):
        yield from walk(node.operand)
    elif isinstance(node, (And, Or)):
        yield from walk(node.left)
        yield from walk(node.right)


def referenced_paths(node: Node) -> set[str]:
    out: set[str] = set()
    for n in walk(node):
        if isinstance(n, Exists):
            out.add(n.path)
        elif isinstance(n, Compare):
            out.update(o.name for o in (n.left, n.right) if isinstance(o, Path))
    return out


# --- evaluation ------------------------------------------------------------


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _same_kind(a: Any, b: Any) -> bool:
    if _is_number(a) and _is_number(b):
        return True
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool)
    if isinstance(a, GeoValue) or isinstance(b, GeoValue):
        return isinstance(a, GeoValue) and isinstance(b, GeoValue)
    return type(a) is type(b)


def _value(op: Operand, snapshot: ContextSnapshot) -> Any:
    return resolve(snapshot, op.name) if isinstance(op, Path) else op.value


def _compare(node: Compare, snapshot: ContextSnapshot) -> bool:
    left = _value(node.left, snapshot)
    right = _value(node.right, snapshot)
    if node.op in ("==", "!="):
        equal = _same_kind(left, right) and left == right
        return equal if node.op == "==" else not equal
    if not (_is_number(left) and _is_number(right)):
        culprit = next((o.name for o in (node.left, node.right) if isinstance(o, Path)), None)
        raise TypeMismatch(node.op, culprit, f"ordering needs numbers, got {left!r} and {right!r}")
    if node.op == "<":
        return left < right
    if node.op == "<=":
        return left <= right
    if node.op == ">":
        return left > right
    return left >= right


_EvalError = (Unavailable, TypeMismatch)


def _eval(node: Node, snapshot: ContextSnapshot) -> bool:
    if isinstance(node, Compare):
        return _compare(node, snapshot)
    if isinstance(node, Exists):
        return snapshot.has(node.path)
    if isinstance(node, Not):
        return not _eval(node.operand, snapshot)
    # and/or: an error on one branch is forgiven only if the other branch decides
    decisive = isinstance(node, Or)
    try:
        left = _eval(node.left, snapshot)
    except _EvalError as exc:
        try:
            right = _eval(node.right, snapshot)
        except _EvalError:
            raise exc from None
        if right is decisive:
            return decisive
        raise
    if left is decisive:
        return decisive
    return _eval(node.right, snapshot)


def evaluate_condition(condition: AdaptationCondition | Node, snapshot: ContextSnapshot) -> bool:
    """Evaluate to True/False; raises Unavailable or TypeMismatch on errors."""
    node = condition.ast if isinstance(condition, AdaptationCondition) else condition
    return _eval(node, snapshot)
