#!/usr/bin/env python3
"""Build the five derivation scripts by driving the session layer, then
freeze them as corpus JSON.  Run from the repository root:

    python tools/gen_scripts.py

Each step is applied against a live session, so the recorded clause ids,
positions and candidate ranks are exactly what a replay will see.  The tool
asserts the expected-final match before writing anything.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from lpt import corpus
from lpt.abduce import rank_candidates
from lpt.derivation import Script, apply_step, new_session, replay
from lpt.parser import format_literal, format_program, format_term
from lpt.rules import FolderRef

OUT = Path(__file__).resolve().parent.parent / "src" / "lpt" / "corpus_data" / "scripts"

BASE_FOLDER = [{"source": "base", "clause": "c1"}]


class Builder:
    def __init__(self, name, base_name):
        self.name = name
        self.base = {"corpus": base_name}
        self.session = new_session(corpus.load_program(base_name), name)
        self.steps = []

    @property
    def program(self):
        return self.session.current

    def find(self, pred_key, body_len=None, body_pred=None, nth=0):
        """Clause id by structural description of the current program."""
        hits = []
        for c in self.program.clauses:
            if c.head.key != pred_key:
                continue
            if body_len is not None and len(c.body) != body_len:
                continue
            if body_pred is not None and not any(
                    lit.key == body_pred for lit in c.body if not lit.is_builtin):
                continue
            hits.append(c.id)
        if not hits:
            raise SystemExit(f"{self.name}: no clause matching {pred_key} "
                             f"body_len={body_len} body_pred={body_pred}")
        return hits[nth]

    def body(self, clause_id):
        return [format_literal(l) for l in self.program.clause(clause_id).body]

    def arg(self, clause_id, position, arg_index):
        lit = self.program.clause(clause_id).body[position]
        return format_term(lit.args[arg_index])

    def with_candidate(self, request, expected_literal, folders=None):
        """Attach the candidate block: the literal this step relies on must
        currently be ranked, and its rank is recorded for replay checking."""
        folders = folders if folders is not None else BASE_FOLDER
        refs = [FolderRef.from_dict(d) for d in folders]
        resolved = [(r, self.session.resolve_folder(r)) for r in refs]
        ranked = rank_candidates(self.program, self.session.base,
                                 request["clause"], resolved)
        rank = next((c.rank for c in ranked if c.fingerprint() == expected_literal), None)
        if rank is None:
            listing = [(c.rank, c.fingerprint()) for c in ranked]
            raise SystemExit(f"{self.name}: literal {expected_literal!r} not ranked; "
                             f"candidates: {listing}")
        request["candidate"] = {"rank": rank, "literal": expected_literal,
                                "folders": folders}
        return request

    def apply(self, request):
        self.session = apply_step(self.session, request)
        self.steps.append(request)
        return self

    def show(self):
        print(f"--- {self.name} ({len(self.steps)} steps) ---")
        print(format_program(self.program))

    def write(self, expected_final):
        script = Script(self.name, self.base, tuple(self.steps), expected_final)
        result = replay(script)
        assert result.matches_expected is True, (
            f"{self.name}: replay does not match {expected_final}\n"
            + format_program(result.final))
        path = OUT / f"{self.name}.json"
        path.write_text(script.to_json(), "utf-8")
        print(f"wrote {path.name} ({len(self.steps)} steps)")


def build_tamaki_sato():
    b = Builder("tamaki_sato", "naive_sort")
    b.apply({"rule": "unfold", "clause": "c1", "position": 0})
    b.apply({"rule": "unfold", "clause": b.find("sort/2", body_len=1), "position": 0})
    rec = b.find("sort/2", body_len=3)
    # the permutation output variable: introduce the order check on it
    lit = f"ord1({b.arg(rec, 0, 1)})"
    b.apply(b.with_candidate(
        {"rule": "introduce_goal", "clause": rec, "literal": lit, "position": 1}, lit))
    b.apply({"rule": "fold", "clause": rec, "positions": [0, 1],
             "folder": {"source": "base", "clause": "c1"}})
    b.apply({"rule": "rename_predicate", "old": "sort/2", "new": "sort_TS/2"})
    b.write("tamaki_sato")


def build_selection():
    b = Builder("selection", "naive_selsort")
    b.apply({"rule": "unfold", "clause": "c1", "position": 0})
    b.apply({"rule": "unfold", "clause": b.find("sort/2", body_len=1), "position": 0})
    rec = b.find("sort/2", body_len=3)
    b.apply({"rule": "unfold", "clause": rec, "position": 2})
    rec = b.find("sort/2", body_len=4)
    # pre-fold state: delete, perm2, minlist, ord2 — the fold's order-check
    # slot is filled by the ord2 atom the unfold produced
    b.apply(b.with_candidate(
        {"rule": "fold", "clause": rec, "positions": [1, 3],
         "folder": {"source": "base", "clause": "c1"}},
        expected_literal=b.body(rec)[3]))
    b.apply({"rule": "apply_lemma", "clause": rec, "lemma": "minlist_transfer",
             "orientation": "ltr"})
    b.apply({"rule": "define", "clauses":
             ["delete_min(A, Ls, Ls1) :- delete(A, Ls, Ls1), minlist(A, Ls1)."]})
    new_def = b.find("delete_min/3")
    b.apply({"rule": "fold", "clause": rec, "positions": [0, 2],
             "folder": {"source": "new_definitions", "clause": new_def}})
    b.apply({"rule": "rename_predicate", "old": "sort/2", "new": "selsort/2"})
    b.write("selection")


def build_mergesort():
    b = Builder("mergesort", "naive_msort")
    b.apply({"rule": "unfold", "clause": "c1", "position": 0})
    b.apply({"rule": "unfold", "clause": b.find("sort/2", body_len=1), "position": 0})
    singleton = b.find("sort/2", body_len=1, body_pred="ord2/1")
    b.apply({"rule": "unfold", "clause": singleton, "position": 0})
    singleton = b.find("sort/2", body_pred="minlist/2")
    b.apply({"rule": "unfold", "clause": singleton, "position": 0})
    singleton = b.find("sort/2", body_len=1, body_pred="ord2/1")
    b.apply({"rule": "unfold", "clause": singleton, "position": 0})

    rec = b.find("sort/2", body_len=5)
    b.apply({"rule": "apply_lemma", "clause": rec, "lemma": "merging",
             "orientation": "ltr"})
    # two abductive folds against the original sort definition (F1, F2)
    b.apply(b.with_candidate(
        {"rule": "fold", "clause": rec, "positions": [1, 3],
         "folder": {"source": "base", "clause": "c1"}},
        expected_literal=b.body(rec)[3]))
    b.apply(b.with_candidate(
        {"rule": "fold", "clause": rec, "positions": [2, 3],
         "folder": {"source": "base", "clause": "c1"}},
        expected_literal=b.body(rec)[3]))
    b.apply({"rule": "define", "clauses":
             ["new(Ls1, Ls2, Ls3) :- shuffle(Ls1, Ls2, Ls3), ord2(Ls3)."]})
    new_def = b.find("new/3")
    b.apply({"rule": "fold", "clause": rec, "positions": [3, 4],
             "folder": {"source": "new_definitions", "clause": new_def}})

    # work on new/3: unfold shuffle, then fold each recursive clause back
    b.apply({"rule": "unfold", "clause": new_def, "position": 0})
    folder = {"source": "new_definitions", "clause": new_def}
    so1 = b.find("new/3", body_len=2, nth=0)
    b.apply({"rule": "unfold", "clause": so1, "position": 1})
    so1 = b.find("new/3", body_len=3)
    b.apply(b.with_candidate(
        {"rule": "fold", "clause": so1, "positions": [0, 2], "folder": folder},
        expected_literal=b.body(so1)[2], folders=[folder]))
    so2 = b.find("new/3", body_len=2, body_pred="shuffle/3")
    b.apply({"rule": "unfold", "clause": so2, "position": 1})
    so2 = b.find("new/3", body_len=3)
    b.apply(b.with_candidate(
        {"rule": "fold", "clause": so2, "positions": [0, 2], "folder": folder},
        expected_literal=b.body(so2)[2], folders=[folder]))

    # the bounding arguments justify the comparisons; minlist then goes
    head_a = b.arg(so1, 1, 0)   # minlist(A, Ls3) in the A-headed clause
    head_b = b.arg(so2, 1, 0)
    b.apply({"rule": "introduce_goal", "clause": so1,
             "literal": f"{head_a} =< {head_b}", "position": 0})
    b.apply({"rule": "introduce_goal", "clause": so2,
             "literal": f"{head_b} =< {head_a}", "position": 0})
    b.apply({"rule": "delete_goal", "clause": so1, "position": 2})
    b.apply({"rule": "delete_goal", "clause": so2, "position": 2})

    for nth in (0, 1):
        base_clause = b.find("new/3", body_len=1, body_pred="ord2/1")
        b.apply({"rule": "delete_goal", "clause": base_clause, "position": 0})
    b.apply({"rule": "rename_predicate", "old": "sort/2", "new": "msort/2"})
    b.write("mergesort")


def build_insertion():
    b = Builder("insertion", "tamaki_sato")
    b.apply({"rule": "rename_predicate", "old": "sort_TS/2", "new": "inssort/2"})
    b.apply({"rule": "define", "clauses": [
        "append([], Ls, Ls).",
        "append([A|Ls1], Ls2, [A|Ls3]) :- append(Ls1, Ls2, Ls3)."]})
    b.apply({"rule": "define", "clauses": [
        "all_less([], A).",
        "all_less([B|Ls], A) :- B =< A, all_less(Ls, A)."]})
    b.apply({"rule": "define", "clauses": [
        "all_leq(A, []).",
        "all_leq(A, [B|Ls]) :- A =< B, all_leq(A, Ls)."]})
    b.apply({"rule": "define", "clauses": [
        "filter(A, [], [], []).",
        "filter(A, [B|Ls1], [B|Ls2], Ls3) :- B =< A, filter(A, Ls1, Ls2, Ls3).",
        "filter(A, [B|Ls1], Ls2, [B|Ls3]) :- A < B, filter(A, Ls1, Ls2, Ls3)."]})

    # replace insert by its append-based definition: tear down, rebuild
    b.apply({"rule": "delete_clause", "clause": b.find("inssort/2", body_len=3),
             "justification": "user_asserted"})
    b.apply({"rule": "delete_clause", "clause": b.find("inssort/2", body_len=0),
             "justification": "user_asserted"})
    b.apply({"rule": "delete_clause", "clause": b.find("insert/3", body_len=0),
             "justification": "user_asserted"})
    b.apply({"rule": "delete_clause", "clause": b.find("insert/3", body_len=1),
             "justification": "user_asserted"})
    b.apply({"rule": "define", "clauses": [
        "insert(A, Zs, Ls) :- append(Ls1, Ls2, Zs), append(Ls1, [A|Ls2], Ls)."]})
    b.apply({"rule": "define", "clauses": [
        "inssort([], []).",
        "inssort([A|Ls], Ls3) :- inssort(Ls, Zs), insert(A, Zs, Ls3), ord1(Ls3)."]})

    rec = b.find("inssort/2", body_len=3)
    b.apply({"rule": "unfold", "clause": rec, "position": 1})
    rec = b.find("inssort/2", body_len=4)
    b.apply({"rule": "apply_lemma", "clause": rec, "lemma": "append_element",
             "orientation": "ltr"})
    # name the pieces of the split for the filter goal
    pivot = b.arg(rec, 6, 1)       # all_less(Ls1, A): the bound A
    zs = b.arg(rec, 1, 2)          # append(Ls1, Ls2, Zs)
    left = b.arg(rec, 1, 0)
    right = b.arg(rec, 1, 1)
    b.apply({"rule": "introduce_goal", "clause": rec,
             "literal": f"filter({pivot}, {zs}, {left}, {right})", "position": 1})
    # the filter goal now carries the whole split contract; drop the rest
    b.apply({"rule": "delete_goal", "clause": rec, "position": 2})  # append(Ls1,Ls2,Zs)
    for _ in range(5):  # ord1(Ls3), ord1(Ls1), ord1(Ls2), all_less, all_leq
        b.apply({"rule": "delete_goal", "clause": rec, "position": 3})
    b.write("insertion")


def build_quicksort():
    b = Builder("quicksort", "mergesort")
    b.apply({"rule": "rename_predicate", "old": "msort/2", "new": "qsort/2"})
    b.apply({"rule": "rename_predicate", "old": "new/3", "new": "append1/3"})
    # the split-based division goes away entirely; partition replaces it
    b.apply({"rule": "delete_clause", "clause": b.find("qsort/2", body_len=4),
             "justification": "user_asserted"})
    b.apply({"rule": "delete_clause", "clause": b.find("qsort/2", body_len=0, nth=1),
             "justification": "user_asserted"})
    b.apply({"rule": "delete_clause", "clause": b.find("qsort/2", body_len=0),
             "justification": "user_asserted"})
    b.apply({"rule": "define", "clauses": [
        "partition(A, [], [], []).",
        "partition(A, [B|Ls], [B|Ls1], Ls2) :- B =< A, partition(A, Ls, Ls1, Ls2).",
        "partition(A, [B|Ls], Ls1, [B|Ls2]) :- A < B, partition(A, Ls, Ls1, Ls2)."]})
    b.apply({"rule": "define", "clauses": [
        "qsort([], []).",
        "qsort([A|Ls], Ls3) :- partition(A, Ls, Ls1, Ls2), qsort(Ls1, Ls4), "
        "qsort(Ls2, Ls5), append1(Ls4, [A|Ls5], Ls3)."]})
    # specialise the merge into concatenation: second list never empty, and
    # the pivot bound makes the B-headed clause and the comparison useless
    b.apply({"rule": "delete_clause",
             "clause": b.find("append1/3", body_len=0, nth=1),
             "justification": "user_asserted"})
    b.apply({"rule": "delete_clause",
             "clause": b.find("append1/3", body_len=2, nth=1),
             "justification": "user_asserted"})
    rec = b.find("append1/3", body_len=2)
    b.apply({"rule": "delete_goal", "clause": rec, "position": 0})
    b.write("quicksort")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    build_tamaki_sato()
    build_selection()
    build_mergesort()
    build_insertion()
    build_quicksort()


if __name__ == "__main__":
    main()
