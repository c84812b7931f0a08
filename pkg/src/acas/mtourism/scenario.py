"""Line-oriented scenario scripts and the transcript-producing runner.

Script syntax (``#`` starts a comment line)::

    set <path> <json literal>
    unset <path>
    call <service>.<operation> [<json document>]
    expect <pointer> <json literal | absent | present>

Pointers follow RFC 6901 (``/items/0/photoRef``); a ``*`` segment means
"every element", and the expectation must hold for each of them.
"""

from __future__ import annotations

import json
import sys
from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Protocol, TextIO

from acas.errors import ACASError
from acas.weaver import SYNC

ABSENT = "absent"
PRESENT = "present"


class ScenarioSyntaxError(ValueError):
    def __init__(self, line: int, message: str) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class SetCommand:
    line: int
    path: str
    value: Any


@dataclass(frozen=True)
class UnsetCommand:
    line: int
    path: str


@dataclass(frozen=True)
class CallCommand:
    line: int
    service: str
    operation: str
    request: Any


@dataclass(frozen=True)
class ExpectCommand:
    line: int
    pointer: str
    expected: Any  # a JSON value, or the ABSENT/PRESENT markers below
    marker: str | None = None


Command = SetCommand | UnsetCommand | CallCommand | ExpectCommand


def _json(text: str, line: int, what: str) -> Any:
    try:
        return json.loads(text)
    except ValueError as exc:
        raise ScenarioSyntaxError(line, f"{what} is not valid JSON: {text!r}") from exc


def parse_script(text: str) -> list[Command]:
    commands: list[Command] = []
    seen_call = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "set":
            path, _, literal = rest.partition(" ")
            if not path or not literal.strip():
                raise ScenarioSyntaxError(lineno, "usage: set <path> <json literal>")
            commands.append(SetCommand(lineno, path, _json(literal.strip(), lineno, "value")))
        elif word == "unset":
            if not rest or " " in rest:
                raise ScenarioSyntaxError(lineno, "usage: unset <path>")
            commands.append(UnsetCommand(lineno, rest))
        elif word == "call":
            target, _, body = rest.partition(" ")
            service, dot, operation = target.partition(".")
            if not service or not dot or not operation:
                raise ScenarioSyntaxError(lineno, "usage: call <service>.<operation> [<json>]")
            request = _json(body.strip(), lineno, "request") if body.strip() else {}
            commands.append(CallCommand(lineno, service, operation, request))
            seen_call = True
        elif word == "expect":
            pointer, _, literal = rest.partition(" ")
            literal = literal.strip()
            if not pointer or not literal:
                raise ScenarioSyntaxError(lineno, "usage: expect <pointer> <json literal>")
            if pointer and not pointer.startswith("/"):
                raise ScenarioSyntaxError(lineno, f"pointer must start with '/': {pointer!r}")
            if not seen_call:
                raise ScenarioSyntaxError(lineno, "expect before any call")
            if literal in (ABSENT, PRESENT):
                commands.append(ExpectCommand(lineno, pointer, None, literal))
            else:
                commands.append(ExpectCommand(lineno, pointer, _json(literal, lineno, "expected value")))
        else:
            raise ScenarioSyntaxError(lineno, f"unknown command {word!r}")
    return commands


# --- pointers --------------------------------------------------------------


class PointerMissing(LookupError):
    pass


def _segments(pointer: str) -> list[str]:
    if pointer == "":
        return []
    return [s.replace("~1", "/").replace("~0", "~") for s in pointer.split("/")[1:]]


def _step(doc: Any, segment: str, where: str) -> Any:
    if isinstance(doc, dict):
        if segment not in doc:
            raise PointerMissing(where)
        return doc[segment]
    if isinstance(doc, list):
        if not segment.isdigit() or int(segment) >= len(doc):
            raise PointerMissing(where)
        return doc[int(segment)]
    raise PointerMissing(where)


def expand_pointer(doc: Any, pointer: str) -> Iterator[tuple[str, Any | PointerMissing]]:
    """Yield ``(concrete pointer, value or PointerMissing)`` for each target."""

    def walk(node: Any, segments: list[str], prefix: str):
        if not segments:
            yield prefix, node
            return
        head, tail = segments[0], segments[1:]
        if head == "*":
            if not isinstance(node, list):
                yield prefix + "/*", PointerMissing(prefix + "/*")
                return
            for i, child in enumerate(node):
                yield from walk(child, tail, f"{prefix}/{i}")
            return
        escaped = head.replace("~", "~0").replace("/", "~1")
        try:
            child = _step(node, head, prefix + "/" + escaped)
        except PointerMissing as exc:
            yield prefix + "/" + escaped + "".join("/" + s for s in tail), exc
            return
        yield from walk(child, tail, prefix + "/" + escaped)

    yield from walk(doc, _segments(pointer), "")


def json_equal(a: Any, b: Any) -> bool:
    """Equality that keeps booleans apart from numbers."""
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return a == b
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(json_equal(a[k], b[k]) for k in a)
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(json_equal(x, y) for x, y in zip(a, b))
    return type(a) is type(b) and a == b


def check_expect(doc: Any, cmd: ExpectCommand) -> list[tuple[str, str, str]]:
    """Return ``(pointer, expected, actual)`` for every failing target."""
    failures = []
    expected_text = cmd.marker or dumps(cmd.expected)
    for where, value in expand_pointer(doc, cmd.pointer):
        missing = isinstance(value, PointerMissing)
        if cmd.marker == ABSENT:
            ok = missing
        elif cmd.marker == PRESENT:
            ok = not missing
        else:
            ok = not missing and json_equal(value, cmd.expected)
        if not ok:
            failures.append((where, expected_text, "<missing>" if missing else dumps(value)))
    return failures


def dumps(value: Any) -> str:
    return json.dumps(value, sort_keys=True, ensure_ascii=False)


# --- backends --------------------------------------------------------------


class ScenarioBackend(Protocol):
    def set(self, path: str, value: Any) -> None: ...

    def unset(self, path: str) -> None: ...

    def call(self, service: str, operation: str, request: Any, mode: str) -> tuple[Any, list[str]]: ...


class LocalBackend:
    """Drives an in-process :class:`DemoRuntime`."""

    def __init__(self, runtime) -> None:
        self.runtime = runtime

    def set(self, path: str, value: Any) -> None:
        self.runtime.set_context(path, value)

    def unset(self, path: str) -> None:
        self.runtime.unset_context(path)

    def call(self, service: str, operation: str, request: Any, mode: str) -> tuple[Any, list[str]]:
        result = self.runtime.call(operation, request, mode, service_id=service)
        return json.loads(json.dumps(result.response)), result.handle.trace.lines()


class HttpBackend:
    """Drives a running ``acas serve`` instance over HTTP."""

    def __init__(self, base_url: str, client=None) -> None:
        import httpx

        self.client = client or httpx.Client(base_url=base_url, timeout=30.0)

    def _check(self, response) -> Any:
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail")
            except ValueError:
                detail = response.text
            raise RemoteError(f"HTTP {response.status_code}: {detail}")
        return response.json()

    def upload(self, strategies: bytes, restaurants: list) -> None:
        self._check(self.client.put("/data/restaurants", json=restaurants))
        self._check(self.client.put("/strategies/RestaurantsSearching", content=strategies,
                                    headers={"content-type": "application/xml"}))
        self._check(self.client.post("/context/reset"))

    def set(self, path: str, value: Any) -> None:
        self._check(self.client.put(f"/context/{path}", json={"value": value}))

    def unset(self, path: str) -> None:
        self._check(self.client.delete(f"/context/{path}"))

    def call(self, service: str, operation: str, request: Any, mode: str) -> tuple[Any, list[str]]:
        body = self._check(self.client.post(f"/services/{service}/{operation}", params={"mode": mode},
                                            json=request))
        return body["response"], body["trace"]


class RemoteError(ACASError):
    pass


# --- runner ----------------------------------------------------------------

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2


@dataclass
class ScenarioResult:
    exit_code: int
    transcript: str
    passed: int
    failed: int


def execute(commands: list[Command], backend: ScenarioBackend, *, trace: bool = False,
            mode: str = SYNC) -> ScenarioResult:
    out: list[str] = []
    last: Any = None
    have_response = False
    calls = passed = failed = 0
    invalid = False
    for cmd in commands:
        if isinstance(cmd, (SetCommand, UnsetCommand)):
            try:
                if isinstance(cmd, SetCommand):
                    backend.set(cmd.path, cmd.value)
                else:
                    backend.unset(cmd.path)
            except (ACASError, ValueError) as exc:
                out.append(f"!! line {cmd.line}: {exc}")
                invalid = True
                break
        elif isinstance(cmd, CallCommand):
            calls += 1
            try:
                last, lines = backend.call(cmd.service, cmd.operation, cmd.request, mode)
                have_response = True
            except (ACASError, ValueError) as exc:
                out.append(f"!! call {calls} failed (line {cmd.line}): {exc}")
                last, lines, have_response = None, [], False
                failed += 1
                continue
            out.append(f">> call {calls}: {dumps(last)}")
            if trace:
                out.extend(f"-- {line}" for line in lines)
        else:
            problems = check_expect(last, cmd) if have_response else [(cmd.pointer, cmd.marker or dumps(cmd.expected),
                                                                       "<no response>")]
            if problems:
                failed += 1
                for where, expected, actual in problems:
                    out.append(f"!! expect failed (line {cmd.line}): pointer={where} expected={expected} "
                               f"actual={actual}")
            else:
                passed += 1
    out.append(f"== expects passed={passed} failed={failed}")
    code = EXIT_INVALID if invalid else (EXIT_FAILED if failed else EXIT_OK)
    return ScenarioResult(code, "\n".join(out) + "\n", passed, failed)


def run_scenario(script_path: str | Path, strategies_path: str | Path, data_path: str | Path, *,
                 trace: bool = False, mode: str = SYNC, server: str | None = None,
                 out: TextIO | None = None, err: TextIO | None = None) -> int:
    """Run a scenario file end to end and write its transcript; returns the exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    from acas.documents import load_strategy_document
    from acas.errors import DocumentParseError, ValidationError
    from acas.mtourism.runtime import DemoRuntime
    from acas.mtourism.service import load_restaurants

    try:
        commands = parse_script(Path(script_path).read_text(encoding="utf-8"))
        strategies = Path(strategies_path).read_bytes()
        raw_data = json.loads(Path(data_path).read_text(encoding="utf-8"))
        restaurants = load_restaurants(raw_data)
        if server is None:
            runtime = DemoRuntime(restaurants, strategies)
            backend: ScenarioBackend = LocalBackend(runtime)
        else:
            runtime = DemoRuntime(restaurants, None)
            load_strategy_document(strategies, runtime.model, runtime.adaptations)  # fail fast locally
            backend = HttpBackend(server)
            backend.upload(strategies, raw_data)
    except (OSError, ValueError, KeyError, DocumentParseError, ValidationError, RemoteError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID

    result = execute(commands, backend, trace=trace, mode=mode)
    out.write(result.transcript)
    return result.exit_code
