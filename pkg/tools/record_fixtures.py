#!/usr/bin/env python3
"""Record an API session against the real server for the workbench UI tests.

Drives the Tamaki-Sato opening (unfold, candidates, abductive-folding macro)
over HTTP and writes every request/response exchange to
frontend/tests/fixtures/tamaki_sato_session.json.  The UI tests replay these
exchanges verbatim, which is what pins the UI to server behaviour.
"""

import json
import sys
import threading
import urllib.request
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from lpt.server import create_server

OUT = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"


class Recorder:
    def __init__(self, base):
        self.base = base
        self.exchanges = []

    def call(self, method, path, payload=None):
        data = json.dumps(payload).encode() if payload is not None else None
        req = urllib.request.Request(self.base + path, data=data, method=method,
                                     headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req) as resp:
                status, body = resp.status, json.loads(resp.read().decode())
        except urllib.error.HTTPError as err:
            status, body = err.code, json.loads(err.read().decode())
        self.exchanges.append({"method": method, "path": path,
                               "request": payload, "status": status,
                               "response": body})
        return status, body


def main():
    server = create_server("127.0.0.1", 0)
    port = server.server_address[1]
    threading.Thread(target=server.serve_forever, daemon=True).start()
    rec = Recorder(f"http://127.0.0.1:{port}")

    # fixed session id so the fixture is deterministic
    _, created = rec.call("POST", "/sessions",
                          {"base": "naive_sort", "session_id": "fixture"})
    sid = created["session"]

    _, after_unfold = rec.call("POST", f"/sessions/{sid}/apply",
                               {"revision": 0, "verify": False,
                                "step": {"rule": "unfold", "clause": "c1",
                                         "position": 0}})
    rec_clause = next(c["id"] for c in after_unfold["clauses"]
                      if c["head"].startswith("sort(") and len(c["body"]) == 3)

    _, cands = rec.call("GET", f"/sessions/{sid}/candidates"
                              f"?clause={rec_clause}&folders=base:c1")
    top = cands["candidates"][0]
    assert top["literal"] == "ord1(Ls2)" and top["rank"] == 1

    # the abductive-folding macro: introduce the candidate, then fold
    _, after_intro = rec.call("POST", f"/sessions/{sid}/apply",
                              {"revision": 1, "verify": False,
                               "step": {"rule": "introduce_goal",
                                        "clause": rec_clause,
                                        "literal": top["literal"],
                                        "position": top["insert_position"],
                                        "candidate": {"rank": top["rank"],
                                                      "literal": top["literal"],
                                                      "folders": [top["folder"]]}}})
    _, after_fold = rec.call("POST", f"/sessions/{sid}/apply",
                             {"revision": 2, "verify": False,
                              "step": {"rule": "fold", "clause": rec_clause,
                                       "positions": top["fold_positions"],
                                       "folder": top["folder"]}})
    assert len(after_fold["history"]) == 4

    # a stale apply for the conflict-toast path
    rec.call("POST", f"/sessions/{sid}/apply",
             {"revision": 2, "verify": False,
              "step": {"rule": "unfold", "clause": "c2", "position": 0}})

    # the verification the user triggers explicitly on the fold step
    rec.call("POST", f"/sessions/{sid}/verify", {"step": 3})
    rec.call("GET", f"/sessions/{sid}")

    server.shutdown()
    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / "tamaki_sato_session.json"
    path.write_text(json.dumps(rec.exchanges, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path} ({len(rec.exchanges)} exchanges)")


if __name__ == "__main__":
    main()
