"""HTTP session API for the workbench UI.

Plain HTTP with JSON payloads; sessions are small and steps are discrete, so
there is no streaming.  Binds 127.0.0.1 by default and carries no auth: this
is a local tool.

Every response carries the session revision; apply/undo/redo requests must
cite the revision they saw and get 409 on a stale one.  Rule errors are 422
with a structured reason; neither ever mutates the session.  Per-session
mutations are serialized under a lock; reads take lock-free snapshots.
"""

from __future__ import annotations

import json
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from . import corpus
from .abduce import rank_candidates
from .derivation import BranchConflict, DerivationError, apply_step, new_session, redo, undo
from .kernel import KernelError
from .parser import format_clause, format_literal, format_program, parse_program
from .rules import FolderRef, RuleError


class SessionStore:
    def __init__(self):
        self._lock = threading.Lock()
        self._sessions: dict = {}

    def create(self, base_program, session_id=None):
        sid = session_id or uuid.uuid4().hex[:12]
        entry = {"session": new_session(base_program, sid), "revision": 0,
                 "lock": threading.Lock()}
        with self._lock:
            self._sessions[sid] = entry
        return sid, entry

    def get(self, sid):
        with self._lock:
            return self._sessions.get(sid)


def session_state(entry) -> dict:
    session = entry["session"]
    program = session.current
    return {
        "session": session.id,
        "revision": entry["revision"],
        "cursor": session.cursor,
        "can_undo": session.cursor > 0,
        "can_redo": session.cursor < len(session.history) - 1,
        "program": format_program(program),
        "clauses": [
            {"id": c.id, "text": format_clause(c),
             "head": format_literal(c.head),
             "body": [format_literal(b) for b in c.body]}
            for c in program.clauses
        ],
        "history": [
            {"index": i,
             "rule": step.application.rule if step.application else None,
             "safety": step.application.safety if step.application else None,
             "request": step.request,
             "diff": step.diff.to_dict() if step.diff else None}
            for i, step in enumerate(session.history)
        ],
    }


class _Handler(BaseHTTPRequestHandler):
    store: SessionStore = None  # set by serve()

    # -- plumbing -----------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, code: int, payload: dict):
        body = json.dumps(payload, indent=2).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", "0"))
        if length == 0:
            return {}
        return json.loads(self.rfile.read(length).decode("utf-8"))

    def do_OPTIONS(self):
        self._send(200, {})

    # -- routing ------------------------------------------------------------

    def do_GET(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        query = {k: v[0] for k, v in parse_qs(url.query).items()}
        try:
            if parts == ["corpus"]:
                entries = corpus.list_entries()
                return self._send(200, {"entries": [{"name": n, "kind": k}
                                                    for n, k in entries]})
            if len(parts) == 2 and parts[0] == "corpus":
                return self._get_corpus(parts[1], query.get("kind"))
            if len(parts) == 2 and parts[0] == "sessions":
                entry = self.store.get(parts[1])
                if entry is None:
                    return self._send(404, {"error": f"no session {parts[1]}"})
                return self._send(200, session_state(entry))
            if len(parts) == 3 and parts[0] == "sessions":
                entry = self.store.get(parts[1])
                if entry is None:
                    return self._send(404, {"error": f"no session {parts[1]}"})
                if parts[2] == "candidates":
                    return self._get_candidates(entry, query)
                if parts[2] == "folds":
                    return self._get_folds(entry, query)
            return self._send(404, {"error": f"no route {url.path}"})
        except KernelError as e:
            return self._send(422, {"error": str(e), "type": type(e).__name__})

    def do_POST(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        try:
            payload = self._read_json()
        except (ValueError, json.JSONDecodeError) as e:
            return self._send(422, {"error": f"bad JSON: {e}", "type": "BadRequest"})
        try:
            if parts == ["sessions"]:
                return self._post_create(payload)
            if len(parts) == 3 and parts[0] == "sessions":
                entry = self.store.get(parts[1])
                if entry is None:
                    return self._send(404, {"error": f"no session {parts[1]}"})
                if parts[2] == "apply":
                    return self._post_apply(entry, payload)
                if parts[2] in ("undo", "redo"):
                    return self._post_move(entry, payload, parts[2])
                if parts[2] == "verify":
                    return self._post_verify(entry, payload)
            return self._send(404, {"error": f"no route {url.path}"})
        except KernelError as e:
            return self._send(422, {"error": str(e), "type": type(e).__name__})

    # -- handlers -----------------------------------------------------------

    def _get_corpus(self, name, kind):
        try:
            entry = corpus.load(name, kind)
        except corpus.UnknownEntry as e:
            return self._send(404, {"error": str(e)})
        if entry.kind == corpus.PROGRAM:
            return self._send(200, {"name": name, "kind": entry.kind,
                                    "text": format_program(entry.payload)})
        if entry.kind == corpus.SCRIPT:
            return self._send(200, {"name": name, "kind": entry.kind,
                                    "script": entry.payload})
        lemma = entry.payload
        return self._send(200, {
            "name": name, "kind": entry.kind,
            "lemma": {"kind": lemma.kind,
                      "side": [format_literal(l) for l in lemma.side_conditions],
                      "lhs": [format_literal(l) for l in lemma.lhs],
                      "rhs": [format_literal(l) for l in lemma.rhs]}})

    def _post_create(self, payload):
        if "base" in payload:
            base = corpus.load_program(payload["base"])
        elif "base_inline" in payload:
            base = parse_program(payload["base_inline"], "inline")
        else:
            return self._send(422, {"error": "pass base (corpus name) or base_inline",
                                    "type": "BadRequest"})
        sid, entry = self.store.create(base, payload.get("session_id"))
        return self._send(200, session_state(entry))

    def _check_revision(self, entry, payload):
        cited = payload.get("revision")
        if cited != entry["revision"]:
            return {"error": f"stale revision {cited}; current is {entry['revision']}",
                    "type": "RevisionConflict", "revision": entry["revision"]}
        return None

    def _post_apply(self, entry, payload):
        with entry["lock"]:
            conflict = self._check_revision(entry, payload)
            if conflict:
                return self._send(409, conflict)
            step = payload.get("step")
            if not isinstance(step, dict) or "rule" not in step:
                return self._send(422, {"error": "step must be a rule request object",
                                        "type": "BadRequest"})
            try:
                new = apply_step(entry["session"], step,
                                 verify_now=bool(payload.get("verify", False)))
            except (RuleError, BranchConflict, DerivationError, KernelError) as e:
                return self._send(422, {"error": str(e), "type": type(e).__name__})
            entry["session"] = new
            entry["revision"] += 1
            return self._send(200, session_state(entry))

    def _post_move(self, entry, payload, which):
        with entry["lock"]:
            conflict = self._check_revision(entry, payload)
            if conflict:
                return self._send(409, conflict)
            try:
                entry["session"] = (undo if which == "undo" else redo)(entry["session"])
            except DerivationError as e:
                return self._send(422, {"error": str(e), "type": type(e).__name__})
            entry["revision"] += 1
            return self._send(200, session_state(entry))

    def _post_verify(self, entry, payload):
        from .verify import ExtensionCache
        from .derivation import _audit_step

        with entry["lock"]:
            session = entry["session"]
            index = payload.get("step", session.cursor)
            if not 1 <= index < len(session.history):
                return self._send(422, {"error": f"no step {index} to verify",
                                        "type": "BadRequest"})
            before = session.history[index - 1].program
            step = session.history[index]
            diff = _audit_step(session, before, step.program, step.application,
                               ExtensionCache())
            history = list(session.history)
            from dataclasses import replace

            history[index] = replace(step, diff=diff)
            entry["session"] = replace(session, history=tuple(history))
            entry["revision"] += 1
            return self._send(200, {"step": index, "diff": diff.to_dict(),
                                    "revision": entry["revision"]})

    def _get_candidates(self, entry, query):
        session = entry["session"]
        clause = query.get("clause")
        if not clause:
            return self._send(422, {"error": "clause query parameter required",
                                    "type": "BadRequest"})
        refs = _parse_folder_refs(session, query.get("folders"))
        folders = [(r, session.resolve_folder(r)) for r in refs]
        ranked = rank_candidates(session.current, session.base, clause, folders)
        return self._send(200, {"clause": clause, "revision": entry["revision"],
                                "candidates": [c.to_dict() for c in ranked]})

    def _get_folds(self, entry, query):
        from .rules import fold_matches

        session = entry["session"]
        clause = query.get("clause")
        if not clause:
            return self._send(422, {"error": "clause query parameter required",
                                    "type": "BadRequest"})
        refs = _parse_folder_refs(session, query.get("folders"))
        out = []
        for ref in refs:
            folder = session.resolve_folder(ref)
            for m in fold_matches(session.current, clause, folder):
                out.append({"folder": ref.to_dict(),
                            "positions": list(m.positions),
                            "replacement": format_literal(m.replacement)})
        return self._send(200, {"clause": clause, "revision": entry["revision"],
                                "matches": out})


def _parse_folder_refs(session, text):
    """Folder refs from 'source:clause,...'; defaults to every base clause
    with a nonempty body plus every new definition."""
    if text:
        refs = []
        for part in text.split(","):
            source, _, cid = part.partition(":")
            refs.append(FolderRef(source, cid))
        return refs
    refs = [FolderRef("base", c.id) for c in session.base.clauses if c.body]
    refs.extend(FolderRef("new_definitions", cid)
                for cid in sorted(session.new_definitions))
    return refs


def create_server(host: str = "127.0.0.1", port: int = 8731) -> ThreadingHTTPServer:
    handler = type("Handler", (_Handler,), {"store": SessionStore()})
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(host: str = "127.0.0.1", port: int = 8731):
    server = create_server(host, port)
    print(f"lpt session API on http://{host}:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
