"""Session-oriented tool protocol over newline-delimited JSON.

Requests look like ``{"id": 1, "method": "apply", "params": {...}}`` and each
gets exactly one response line, ``{"id": 1, "result": ...}`` or
``{"id": 1, "error": {"code": "ILLEGAL_MOVE", "message": ..., "data": ...}}``.

Methods: init, state, legal_moves, apply, reset, is_solved, scratchpad_get,
scratchpad_set, adjudicate, close. There is deliberately no method that
returns a solution.

``handle_request`` is a pure transition ``(table, request) -> (table',
response)``; error responses leave the table untouched.
"""

from __future__ import annotations

import json
import logging
import socketserver
import sys
import threading
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional, TextIO

from .adjudicator import adjudicate
from .errors import BindError, ParseError, PuzzleError
from .puzzles import (PuzzleInstance, State, apply_move, initial_state, is_goal, legal_moves,
                      move_text, new_instance, simulator, state_to_json)
from .traces import parse_trace

log = logging.getLogger(__name__)

DEFAULT_MAX_TOOL_CALLS = 200
DEFAULT_SCRATCHPAD_CAP = 64 * 1024

UNKNOWN_METHOD = "UNKNOWN_METHOD"
UNKNOWN_SESSION = "UNKNOWN_SESSION"
ILLEGAL_MOVE = "ILLEGAL_MOVE"
BUDGET = "BUDGET"
MALFORMED = "MALFORMED"


@dataclass(frozen=True)
class Session:
    session_id: str
    instance: PuzzleInstance
    state: State
    move_count: int = 0
    tool_call_count: int = 0
    scratchpad: str = ""
    max_tool_calls: int = DEFAULT_MAX_TOOL_CALLS
    scratchpad_cap: int = DEFAULT_SCRATCHPAD_CAP


@dataclass(frozen=True)
class SessionTable:
    sessions: dict = field(default_factory=dict)
    next_id: int = 1
    max_tool_calls: int = DEFAULT_MAX_TOOL_CALLS
    scratchpad_cap: int = DEFAULT_SCRATCHPAD_CAP

    def get(self, session_id: str) -> Optional[Session]:
        return self.sessions.get(session_id)

    def with_session(self, session: Session) -> "SessionTable":
        sessions = dict(self.sessions)
        sessions[session.session_id] = session
        return replace(self, sessions=sessions)

    def without(self, session_id: str) -> "SessionTable":
        sessions = dict(self.sessions)
        del sessions[session_id]
        return replace(self, sessions=sessions)


class ProtocolError(Exception):
    def __init__(self, code: str, message: str, data: Any = None) -> None:
        super().__init__(message)
        self.code = code
        self.message = message
        self.data = data


def _param(params: dict, name: str, typ, required: bool = True):
    if name not in params:
        if required:
            raise ProtocolError(MALFORMED, f"missing parameter {name!r}")
        return None
    value = params[name]
    if typ is int and (type(value) is not int):
        raise ProtocolError(MALFORMED, f"parameter {name!r} must be an integer")
    if typ is not int and not isinstance(value, typ):
        raise ProtocolError(MALFORMED, f"parameter {name!r} has the wrong type")
    return value


def _session(table: SessionTable, params: dict) -> Session:
    sid = _param(params, "session_id", str)
    session = table.get(sid)
    if session is None:
        raise ProtocolError(UNKNOWN_SESSION, f"no session {sid!r}")
    return session


def _charge(session: Session) -> Session:
    if session.tool_call_count >= session.max_tool_calls:
        raise ProtocolError(BUDGET, "tool call budget exhausted", {"remaining": 0})
    return replace(session, tool_call_count=session.tool_call_count + 1)


def _parse_move(session: Session, raw):
    if isinstance(raw, str):
        text = raw
    elif isinstance(raw, list):
        text = json.dumps(raw)
    else:
        raise ProtocolError(MALFORMED, "move must be a list or a string")
    try:
        trace = parse_trace(session.instance.kind, "[" + text + "]")
    except ParseError as exc:
        raise ProtocolError(MALFORMED, f"bad move: {exc}") from None
    if len(trace) != 1:
        raise ProtocolError(MALFORMED, "exactly one move expected")
    return trace[0]


def _m_init(table: SessionTable, params: dict):
    kind = _param(params, "kind", str)
    n = _param(params, "n", int)
    k = _param(params, "k", int, required=False)
    seed = _param(params, "seed", int, required=False)
    initial = _param(params, "blocks_initial", list, required=False)
    goal = _param(params, "blocks_goal", list, required=False)
    blocks = (initial, goal) if initial is not None or goal is not None else seed
    try:
        instance = new_instance(kind, n, k=k, blocks=blocks)
    except (PuzzleError, TypeError, ValueError) as exc:
        raise ProtocolError(MALFORMED, f"invalid instance: {exc}") from None
    max_calls = _param(params, "max_tool_calls", int, required=False)
    sid = f"s{table.next_id}"
    session = Session(sid, instance, initial_state(instance),
                      max_tool_calls=table.max_tool_calls if max_calls is None else max_calls,
                      scratchpad_cap=table.scratchpad_cap)
    table = replace(table.with_session(session), next_id=table.next_id + 1)
    return table, {"session_id": sid, "instance": instance.to_dict()}


def _m_state(table, params):
    session = _charge(_session(table, params))
    result = {"state": state_to_json(session.state), "move_count": session.move_count}
    return table.with_session(session), result


def _m_legal_moves(table, params):
    session = _charge(_session(table, params))
    moves = [json.loads(move_text(m)) for m in legal_moves(session.instance, session.state)]
    return table.with_session(session), {"moves": moves}


def _m_apply(table, params):
    session = _charge(_session(table, params))
    move = _parse_move(session, params.get("move"))
    sim = simulator(session.instance, session.state)
    problem = sim.check(move)
    if problem is not None:
        reason, detail = problem
        raise ProtocolError(ILLEGAL_MOVE, f"{reason.value}: {detail}",
                            {"reason": reason.value, "move": json.loads(move_text(move))})
    state = apply_move(session.instance, session.state, move)
    session = replace(session, state=state, move_count=session.move_count + 1)
    solved = is_goal(session.instance, state)
    return table.with_session(session), {"ok": True, "solved": solved, "move_count": session.move_count}


def _m_reset(table, params):
    session = _charge(_session(table, params))
    session = replace(session, state=initial_state(session.instance), move_count=0)
    return table.with_session(session), {"ok": True, "state": state_to_json(session.state)}


def _m_is_solved(table, params):
    session = _charge(_session(table, params))
    return table.with_session(session), {"solved": is_goal(session.instance, session.state)}


def _m_scratchpad_get(table, params):
    session = _charge(_session(table, params))
    return table.with_session(session), {"text": session.scratchpad}


def _m_scratchpad_set(table, params):
    session = _session(table, params)
    text = _param(params, "text", str)
    if len(text.encode("utf-8")) > session.scratchpad_cap:
        raise ProtocolError(BUDGET, "scratchpad capacity exceeded",
                            {"remaining": 0, "cap": session.scratchpad_cap})
    session = replace(_charge(session), scratchpad=text)
    return table.with_session(session), {"ok": True, "length": len(text)}


def _m_adjudicate(table, params):
    session = _session(table, params)
    raw = params.get("trace")
    if isinstance(raw, list):
        raw = json.dumps(raw)
    if not isinstance(raw, str):
        raise ProtocolError(MALFORMED, "trace must be a string or a list of moves")
    try:
        trace = parse_trace(session.instance.kind, raw)
    except ParseError as exc:
        raise ProtocolError(MALFORMED, f"bad trace: {exc}") from None
    return table, adjudicate(session.instance, trace).to_dict()


def _m_close(table, params):
    session = _session(table, params)
    return table.without(session.session_id), {"closed": True}


METHODS: dict[str, Callable] = {
    "init": _m_init,
    "state": _m_state,
    "legal_moves": _m_legal_moves,
    "apply": _m_apply,
    "reset": _m_reset,
    "is_solved": _m_is_solved,
    "scratchpad_get": _m_scratchpad_get,
    "scratchpad_set": _m_scratchpad_set,
    "adjudicate": _m_adjudicate,
    "close": _m_close,
}


def _error(req_id, code: str, message: str, data: Any = None) -> dict:
    err = {"code": code, "message": message}
    if data is not None:
        err["data"] = data
    return {"id": req_id, "error": err}


def handle_request(table: SessionTable, request: Any) -> tuple[SessionTable, dict]:
    if not isinstance(request, dict):
        return table, _error(None, MALFORMED, "request must be an object")
    req_id = request.get("id")
    if type(req_id) is not int:
        return table, _error(None, MALFORMED, "request id must be an integer")
    method = request.get("method")
    if not isinstance(method, str):
        return table, _error(req_id, MALFORMED, "method must be a string")
    params = request.get("params", {})
    if not isinstance(params, dict):
        return table, _error(req_id, MALFORMED, "params must be an object")
    handler = METHODS.get(method)
    if handler is None:
        return table, _error(req_id, UNKNOWN_METHOD, f"unknown method {method!r}")
    try:
        new_table, result = handler(table, params)
    except ProtocolError as exc:
        return table, _error(req_id, exc.code, exc.message, exc.data)
    return new_table, {"id": req_id, "result": result}


def encode(message: dict) -> str:
    return json.dumps(message, sort_keys=True, separators=(",", ":"))


class ToolServer:
    """Thread-safe holder of a session table; one lock makes updates atomic."""

    def __init__(self, max_tool_calls: int = DEFAULT_MAX_TOOL_CALLS,
                 scratchpad_cap: int = DEFAULT_SCRATCHPAD_CAP) -> None:
        self.table = SessionTable(max_tool_calls=max_tool_calls, scratchpad_cap=scratchpad_cap)
        self._lock = threading.Lock()

    def handle(self, request: Any) -> dict:
        with self._lock:
            self.table, response = handle_request(self.table, request)
        return response

    def handle_line(self, line: str) -> str:
        try:
            request = json.loads(line)
        except ValueError:
            return encode(_error(None, MALFORMED, "line is not valid JSON"))
        return encode(self.handle(request))


@dataclass
class ServeConfig:
    transport: str = "stdio"
    host: str = "127.0.0.1"
    port: int = 0
    max_tool_calls: int = DEFAULT_MAX_TOOL_CALLS
    scratchpad_cap: int = DEFAULT_SCRATCHPAD_CAP


def serve_stream(server: ToolServer, infile: TextIO, outfile: TextIO) -> int:
    count = 0
    for line in infile:
        if not line.strip():
            continue
        outfile.write(server.handle_line(line) + "\n")
        outfile.flush()
        count += 1
    return count


class _LineHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace")
            if not line.strip():
                continue
            self.wfile.write((self.server.tool_server.handle_line(line) + "\n").encode("utf-8"))
            self.wfile.flush()


class _TCPServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


def serve(config: ServeConfig):
    """Run the protocol on stdio (blocking until EOF) or start a TCP listener.

    For TCP the started ``socketserver`` instance is returned; call
    ``serve_forever`` or run it in a thread, and ``shutdown`` to stop it.
    """
    tool_server = ToolServer(config.max_tool_calls, config.scratchpad_cap)
    if config.transport == "stdio":
        return serve_stream(tool_server, sys.stdin, sys.stdout)
    if config.transport != "tcp":
        raise ValueError(f"unknown transport {config.transport!r}")
    try:
        server = _TCPServer((config.host, config.port), _LineHandler)
    except OSError as exc:
        raise BindError(f"cannot listen on {config.host}:{config.port}: {exc}") from exc
    server.tool_server = tool_server
    log.info("tool server listening on %s:%d", *server.server_address[:2])
    return server
