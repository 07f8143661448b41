"""Session and script layer: ordered program history, step application, undo,
script replay, export.

History is linear: applying a step with the cursor anywhere but the end is a
BranchConflict (undo then re-apply, or open a new session).  Snapshots are
immutable and shared freely between sessions and exported scripts.

Scripts record abductive choices by candidate rank plus the literal text; a
replay recomputes the ranking and fails loudly if heuristic drift changed
the outcome.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .kernel import Clause, KernelError, Program, alpha_equivalent_programs
from .engine import DEFAULT_LIMITS, SolveLimits
from .parser import canonical_program, parse_clause, parse_literal, parse_program
from .rules import (
    FolderRef,
    RuleApplication,
    apply_lemma,
    define,
    delete_clause,
    delete_goal,
    fold,
    introduce_goal,
    rename_predicate,
    unfold,
)
from .verify import ExtensionCache, ExtensionDiff, compare_extensions


class DerivationError(KernelError):
    pass


class BranchConflict(DerivationError):
    pass


class DuplicateDefinition(DerivationError):
    pass


class ReplayError(DerivationError):
    def __init__(self, step_index: int, reason: str):
        self.step_index = step_index
        self.reason = reason
        super().__init__(f"step {step_index}: {reason}")


class CandidateDrift(DerivationError):
    pass


@dataclass(frozen=True)
class HistoryStep:
    program: Program
    application: Optional[RuleApplication]
    diff: Optional[ExtensionDiff]
    request: Optional[dict]


@dataclass(frozen=True)
class Session:
    id: str
    base: Program
    history: tuple
    cursor: int
    new_definitions: dict = field(default_factory=dict)
    audit_domain: frozenset = frozenset({0, 1})
    audit_max_len: int = 3
    limits: SolveLimits = DEFAULT_LIMITS
    # the derived relation the audit watches; follows predicate renames
    audit_pred: Optional[str] = None

    @property
    def current(self) -> Program:
        return self.history[self.cursor].program

    @property
    def at_end(self) -> bool:
        return self.cursor == len(self.history) - 1

    def resolve_folder(self, ref: FolderRef) -> Clause:
        if ref.source == "base":
            return self.base.clause(ref.clause_id)
        if ref.source == "current":
            return self.current.clause(ref.clause_id)
        if ref.source == "new_definitions":
            try:
                return self.new_definitions[ref.clause_id]
            except KeyError:
                raise DerivationError(
                    f"no new definition with clause id {ref.clause_id!r}") from None
        raise DerivationError(f"unknown folder source {ref.source!r}")


def new_session(base: Program, session_id: str = "session",
                audit_domain=frozenset({0, 1}), audit_max_len: int = 3,
                limits: SolveLimits = DEFAULT_LIMITS) -> Session:
    try:
        base = canonical_program(base)
    except KernelError as e:
        raise DuplicateDefinition(str(e)) from e
    audit_pred = base.clauses[0].head.key if base.clauses else None
    return Session(session_id, base, (HistoryStep(base, None, None, None),), 0,
                   {}, frozenset(audit_domain), audit_max_len, limits, audit_pred)


# ---------------------------------------------------------------------------
# Step requests
# ---------------------------------------------------------------------------


def _resolve_candidate_check(session: Session, request: dict):
    """Recompute the candidate ranking and hold the script to its recorded
    choice: same rank, same literal text."""
    from .abduce import rank_candidates

    block = request["candidate"]
    refs = [FolderRef.from_dict(d) for d in block["folders"]]
    folders = [(ref, session.resolve_folder(ref)) for ref in refs]
    candidates = rank_candidates(session.current, session.base, request["clause"],
                                 folders, limits=session.limits)
    rank = block["rank"]
    if rank < 1 or rank > len(candidates):
        raise CandidateDrift(
            f"recorded candidate rank {rank} out of range "
            f"({len(candidates)} candidates)")
    got = candidates[rank - 1].fingerprint()
    if got != block["literal"]:
        raise CandidateDrift(
            f"candidate ranking drifted: rank {rank} is {got!r}, "
            f"script recorded {block['literal']!r}")


def execute_request(session: Session, request: dict):
    """Run one serialized rule application against the current snapshot."""
    rule = request["rule"]
    p = session.current
    if rule == "unfold":
        return unfold(p, request["clause"], request["position"])
    if rule == "fold":
        ref = FolderRef.from_dict(request["folder"])
        folder_clause = session.resolve_folder(ref)
        return fold(p, request["clause"], request["positions"], folder_clause, ref)
    if rule == "introduce_goal":
        literal = parse_literal(request["literal"])
        return introduce_goal(p, request["clause"], literal, request["position"])
    if rule == "delete_goal":
        return delete_goal(p, request["clause"], request["position"])
    if rule == "define":
        clauses = [parse_clause(text, f"d{i}") for i, text in enumerate(request["clauses"])]
        return define(p, clauses)
    if rule == "apply_lemma":
        from . import corpus

        lemma = corpus.load_lemma(request["lemma"])
        return apply_lemma(p, request["clause"], lemma, request["orientation"])
    if rule == "rename_predicate":
        return rename_predicate(p, request["old"], request["new"])
    if rule == "delete_clause":
        return delete_clause(p, request["clause"], request["justification"],
                             request.get("subsumed_by"))
    raise DerivationError(f"unknown rule {rule!r}")


def _audit_step(session: Session, before: Program, after: Program,
                app: RuleApplication, cache: ExtensionCache) -> ExtensionDiff:
    """Extension diff attached by verify_now.

    The audit watches the session's main derived relation (the head
    predicate of the base program's first clause, followed through
    renames): a step is semantics-preserving for the derivation exactly
    when that relation's bounded extension is unchanged.  Rename steps
    compare the relation across its two names.  Define steps of a fresh,
    unreferenced predicate are conservative extensions: no previously
    defined predicate can change, which is checked syntactically and
    recorded as Equal; if existing clauses do reference the new predicate,
    the main relation is compared instead.
    """
    domain = session.audit_domain
    max_len = session.audit_max_len
    limits = session.limits
    pred = session.audit_pred
    if app.rule == "rename_predicate":
        old, new = app.parameters["old"], app.parameters["new"]
        if old == new:
            return ExtensionDiff.equal(old, "identity rename")
        if pred == old:
            return compare_extensions(before, after, old, domain, max_len, limits,
                                      pred_after=new, cache=cache)
        return compare_extensions(before, after, pred, domain, max_len, limits,
                                  cache=cache)
    if app.rule == "define":
        new_keys = set(app.notes.get("predicates", ()))
        referenced = any(
            (not lit.is_builtin) and lit.key in new_keys
            for c in before.clauses for lit in c.body)
        if not referenced:
            return ExtensionDiff.equal(
                ",".join(sorted(new_keys)),
                "conservative extension: defined predicates unreferenced before this step")
    if pred is None:
        return ExtensionDiff.equal("", "no audit predicate")
    return compare_extensions(before, after, pred, domain, max_len, limits, cache=cache)


def apply_step(session: Session, request: dict, verify_now: bool = False,
               cache: Optional[ExtensionCache] = None) -> Session:
    """Append a new snapshot; the cursor must sit at the history end."""
    if not session.at_end:
        raise BranchConflict(
            f"cursor at {session.cursor} of {len(session.history) - 1}; "
            "undo history would be overwritten")
    if "candidate" in request:
        _resolve_candidate_check(session, request)
    before = session.current
    program, app = execute_request(session, request)
    diff = None
    if verify_now:
        cache = cache if cache is not None else ExtensionCache()
        diff = _audit_step(session, before, program, app, cache)
    new_defs = dict(session.new_definitions)
    if app.rule == "define":
        for cid in app.notes.get("new_clause_ids", ()):
            new_defs[cid] = program.clause(cid)
    audit_pred = session.audit_pred
    if app.rule == "rename_predicate" and audit_pred == app.parameters["old"]:
        audit_pred = app.parameters["new"]
    step = HistoryStep(program, app, diff, dict(request))
    return replace(session, history=session.history + (step,),
                   cursor=session.cursor + 1, new_definitions=new_defs,
                   audit_pred=audit_pred)


def undo(session: Session) -> Session:
    if session.cursor == 0:
        raise DerivationError("nothing to undo")
    return replace(session, cursor=session.cursor - 1)


def redo(session: Session) -> Session:
    if session.cursor >= len(session.history) - 1:
        raise DerivationError("nothing to redo")
    return replace(session, cursor=session.cursor + 1)


# ---------------------------------------------------------------------------
# Scripts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Script:
    name: str
    base: dict          # {"corpus": name} or {"inline": program text}
    steps: tuple
    expected_final: Optional[str] = None

    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "base": self.base,
            "steps": list(self.steps),
            "expected_final": self.expected_final,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "Script":
        doc = json.loads(text)
        return Script.from_dict(doc)

    @staticmethod
    def from_dict(doc: dict) -> "Script":
        return Script(doc["name"], doc["base"], tuple(doc["steps"]),
                      doc.get("expected_final"))


def _default_resolver(name: str) -> Program:
    from . import corpus

    return corpus.load_program(name)


def resolve_base(base: dict, resolver: Callable[[str], Program]) -> Program:
    if "corpus" in base:
        return resolver(base["corpus"])
    if "inline" in base:
        return parse_program(base["inline"], "inline")
    raise DerivationError("script base must name a corpus program or carry inline text")


@dataclass
class ReplayResult:
    final: Program
    log: list
    matches_expected: Optional[bool]
    session: Session


def replay(script: Script, resolver: Callable[[str], Program] = _default_resolver,
           verify_now: bool = False, audit_domain=frozenset({0, 1}),
           audit_max_len: int = 3) -> ReplayResult:
    """Apply the script's steps in order; any step error aborts with its
    index.  When the script names an expected final, the result is compared
    alpha-equivalence-wise after restricting to the expected predicates."""
    base = resolve_base(script.base, resolver)
    session = new_session(base, f"replay:{script.name}",
                          audit_domain=audit_domain, audit_max_len=audit_max_len)
    cache = ExtensionCache()
    for i, step in enumerate(script.steps):
        try:
            session = apply_step(session, step, verify_now=verify_now, cache=cache)
        except KernelError as e:
            raise ReplayError(i, str(e)) from e
    final = session.current
    matches: Optional[bool] = None
    if script.expected_final:
        expected = resolver(script.expected_final)
        restricted = final.restrict(expected.predicates())
        matches = alpha_equivalent_programs(restricted, expected)
    log = [s.application for s in session.history[1:]]
    return ReplayResult(final, log, matches, session)


def export_script(session: Session, name: str = "exported",
                  base: Optional[dict] = None,
                  expected_final: Optional[str] = None) -> Script:
    """Script whose replay reproduces the session history up to the cursor."""
    from .parser import format_program

    base_doc = base if base is not None else {"inline": format_program(session.base)}
    steps = tuple(step.request for step in session.history[1:session.cursor + 1])
    return Script(name, base_doc, steps, expected_final)
