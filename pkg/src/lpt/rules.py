"""Transformation rules: each maps a Program to a new Program and records a
typed justification (a RuleApplication) carrying its safety classification.

Safety tags follow the goal-introduction taxonomy: unfolding, folding,
definition, renaming and checked clause deletion preserve semantics; goal
introduction risks thinning the model; goal deletion risks widening it.
Whether a risky step actually changed anything is the verify module's job.

Every rule canonicalizes the variable names of the resulting program, so
literal and position references recorded in scripts stay stable across
replays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .kernel import (
    Atom,
    BUILTIN_OPS,
    Clause,
    KernelError,
    Program,
    Substitution,
    Var,
    match,
    rename_apart,
    term_vars,
    unify,
)
from .parser import canonical_program, format_clause, format_literal
from .engine import compare_builtin
from .kernel import is_ground


class RuleError(KernelError):
    pass


class BuiltinPosition(RuleError):
    pass


class IndexOutOfRange(RuleError):
    pass


class NoMatch(RuleError):
    pass


class VariableConditionViolated(RuleError):
    pass


class SelfFoldWithoutRecursionGuard(RuleError):
    pass


class PredicateAlreadyDefined(RuleError):
    pass


class UnknownPredicate(RuleError):
    pass


class UnknownLemma(RuleError):
    pass


class SubsumptionCheckFailed(RuleError):
    pass


# safety tags
SEMANTICS_PRESERVING = "semantics_preserving"
THINNING_RISK = "thinning_risk"
WIDENING_RISK = "widening_risk"
LEMMA_CONDITIONAL = "lemma_conditional"


@dataclass(frozen=True)
class FolderRef:
    """Where a folder clause comes from: the current snapshot, the session's
    base program (the original definitions), or a later new definition."""

    source: str  # current | base | new_definitions
    clause_id: str

    def to_dict(self):
        return {"source": self.source, "clause": self.clause_id}

    @staticmethod
    def from_dict(d):
        return FolderRef(d["source"], d["clause"])


@dataclass
class RuleApplication:
    rule: str
    target_clause: Optional[str]
    parameters: dict
    safety: str
    notes: dict = field(default_factory=dict)

    def to_dict(self):
        out = {"rule": self.rule, **self.parameters}
        return out


def _check_body_index(clause: Clause, index: int, allow_end: bool = False):
    top = len(clause.body) + (1 if allow_end else 0)
    if not 0 <= index < top:
        raise IndexOutOfRange(
            f"body position {index} out of range for clause {clause.id} "
            f"({len(clause.body)} literals)")


# ---------------------------------------------------------------------------
# Unfold
# ---------------------------------------------------------------------------


def unfold(p: Program, clause_id: str, body_index: int):
    """Resolve the selected body atom against every defining clause of its
    predicate; the target clause is replaced, in place, by the resolvents."""
    target = p.clause(clause_id)
    _check_body_index(target, body_index)
    atom = target.body[body_index]
    if atom.is_builtin:
        raise BuiltinPosition(f"cannot unfold builtin {atom!r}")
    resolvents = []
    next_id = p.next_clause_id()
    for d in p.clauses_for(atom.key):
        d2 = rename_apart(d, target.vars())
        mgu = unify(atom, d2.head)
        if mgu is None:
            continue
        body = target.body[:body_index] + d2.body + target.body[body_index + 1:]
        resolvents.append(Clause(f"c{next_id}", mgu.apply(target.head),
                                 tuple(mgu.apply(b) for b in body)))
        next_id += 1
    step = f"unfold({clause_id}@{body_index})"
    out = canonical_program(p.replace_clause(clause_id, resolvents, step))
    app = RuleApplication(
        "unfold", clause_id, {"clause": clause_id, "position": body_index},
        SEMANTICS_PRESERVING,
        notes={"resolvents": [c.id for c in resolvents],
               "zero_resolvents": not resolvents})
    return out, app


# ---------------------------------------------------------------------------
# Fold
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FoldMatch:
    positions: tuple
    subst: Substitution
    replacement: Atom


def _match_fold(target: Clause, positions: Sequence[int], folder: Clause) -> FoldMatch:
    """Match the folder's entire body onto the selected literals, in order.

    The substitution instantiates folder variables only; the target's terms
    are preserved.  Folder-internal variables (in the body but not the head)
    must map to distinct variables that occur nowhere else in the target.
    """
    selected = [target.body[i] for i in positions]
    if len(folder.body) != len(selected):
        raise NoMatch(
            f"folder {folder.id} has {len(folder.body)} body literals, "
            f"{len(selected)} selected")
    subst = Substitution()
    for pat, lit in zip(folder.body, selected):
        nxt = match(pat, lit, subst)
        if nxt is None:
            raise NoMatch(f"folder literal {pat!r} does not match {lit!r}")
        subst = nxt
    head_vars: list = []
    for a in folder.head.args:
        term_vars(a, head_vars)
    internal = [v for v in {v for lit in folder.body for a in lit.args for v in term_vars(a, [])}
                if v not in head_vars]
    internal.sort(key=lambda v: (v.name, v.index))
    seen = set()
    outside: list = []
    for a in target.head.args:
        term_vars(a, outside)
    for i, lit in enumerate(target.body):
        if i not in positions:
            for a in lit.args:
                term_vars(a, outside)
    # the replacement atom too: an internal image coinciding with a folder
    # head-variable image would leak the existential into the head instance
    for a in subst.apply(folder.head).args:
        term_vars(a, outside)
    for v in internal:
        image = subst.apply(v)
        if not isinstance(image, Var):
            raise VariableConditionViolated(
                f"internal folder variable {v!r} instantiated to non-variable {image!r}")
        if image in seen:
            raise VariableConditionViolated(
                f"internal folder variables map to the same variable {image!r}")
        seen.add(image)
        if image in outside:
            raise VariableConditionViolated(
                f"internal folder variable image {image!r} occurs elsewhere in the target")
    return FoldMatch(tuple(positions), subst, subst.apply(folder.head))


def fold_matches(p: Program, clause_id: str, folder: Clause,
                 positions: Optional[Sequence[int]] = None) -> list:
    """All ways to fold ``folder`` into the clause; each match names the
    selected body positions (an ordered, not necessarily contiguous,
    subsequence)."""
    target = p.clause(clause_id)
    folder = rename_apart(folder, target.vars())
    if positions is not None:
        try:
            return [_match_fold(target, list(positions), folder)]
        except RuleError:
            return []
    import itertools

    found = []
    for combo in itertools.combinations(range(len(target.body)), len(folder.body)):
        try:
            found.append(_match_fold(target, list(combo), folder))
        except RuleError:
            continue
    return found


def fold(p: Program, clause_id: str, body_positions: Sequence[int], folder: Clause,
         folder_ref: Optional[FolderRef] = None):
    """Replace the selected literals by the folder's head instance, placed at
    the first selected position."""
    target = p.clause(clause_id)
    positions = list(body_positions)
    if positions != sorted(set(positions)):
        raise IndexOutOfRange(f"fold positions must be strictly ascending, got {body_positions}")
    for i in positions:
        _check_body_index(target, i)
    folder2 = rename_apart(folder, target.vars())
    m = _match_fold(target, positions, folder2)
    if m.replacement == target.head:
        raise SelfFoldWithoutRecursionGuard(
            f"folding produces {m.replacement!r} :- {m.replacement!r}, an empty-progress loop")
    body = []
    for i, lit in enumerate(target.body):
        if i == positions[0]:
            body.append(m.replacement)
        elif i not in positions:
            body.append(lit)
    new_clause = Clause(target.id, target.head, tuple(body))
    step = f"fold({clause_id}@{positions})"
    out = canonical_program(p.replace_clause(clause_id, [new_clause], step))
    params = {"clause": clause_id, "positions": positions}
    if folder_ref is not None:
        params["folder"] = folder_ref.to_dict()
    app = RuleApplication("fold", clause_id, params, SEMANTICS_PRESERVING,
                          notes={"replacement": format_literal(m.replacement)})
    return out, app


# ---------------------------------------------------------------------------
# Goal introduction / deletion
# ---------------------------------------------------------------------------


def introduce_goal(p: Program, clause_id: str, literal: Atom, position: int):
    """Insert a literal; always correct, may thin the model (verify must later
    confirm or refute the thinning)."""
    target = p.clause(clause_id)
    _check_body_index(target, position, allow_end=True)
    body = target.body[:position] + (literal,) + target.body[position:]
    new_clause = Clause(target.id, target.head, body)
    step = f"introduce_goal({clause_id}@{position})"
    out = canonical_program(p.replace_clause(clause_id, [new_clause], step))
    app = RuleApplication(
        "introduce_goal", clause_id,
        {"clause": clause_id, "literal": format_literal(literal), "position": position},
        THINNING_RISK)
    return out, app


def delete_goal(p: Program, clause_id: str, position: int):
    target = p.clause(clause_id)
    _check_body_index(target, position)
    removed = target.body[position]
    body = target.body[:position] + target.body[position + 1:]
    new_clause = Clause(target.id, target.head, body)
    step = f"delete_goal({clause_id}@{position})"
    out = canonical_program(p.replace_clause(clause_id, [new_clause], step))
    app = RuleApplication(
        "delete_goal", clause_id, {"clause": clause_id, "position": position},
        WIDENING_RISK, notes={"removed": format_literal(removed)})
    return out, app


# ---------------------------------------------------------------------------
# Define
# ---------------------------------------------------------------------------


def define(p: Program, clauses: Sequence[Clause]):
    """Append clauses for predicates not yet defined; usable as fold targets
    under the new-definitions provenance."""
    if not clauses:
        raise RuleError("define requires at least one clause")
    for c in clauses:
        if c.head.pred in BUILTIN_OPS:
            raise RuleError(f"cannot define builtin {c.head.key}")
        if p.clauses_for(c.head.key):
            raise PredicateAlreadyDefined(f"{c.head.key} is already defined")
    next_id = p.next_clause_id()
    fresh = []
    for c in clauses:
        fresh.append(Clause(f"c{next_id}", c.head, c.body))
        next_id += 1
    out = canonical_program(p.append_clauses(fresh, "new_definition"))
    app = RuleApplication(
        "define", fresh[0].id,
        {"clauses": [format_clause(c) for c in fresh]},
        SEMANTICS_PRESERVING,
        notes={"new_clause_ids": [c.id for c in fresh],
               "predicates": sorted({c.head.key for c in fresh})})
    return out, app


# ---------------------------------------------------------------------------
# Lemma application
# ---------------------------------------------------------------------------


def _match_conjunction(patterns, body, subst, used, start_order=None):
    """Assign each pattern literal to a distinct body position, one-way.

    Deterministic: patterns in order, candidate positions ascending, first
    complete assignment wins.  Returns (subst, positions) or None.
    """
    if not patterns:
        return subst, []
    pat = patterns[0]
    for i, lit in enumerate(body):
        if i in used:
            continue
        nxt = match(pat, lit, subst)
        if nxt is None:
            continue
        rest = _match_conjunction(patterns[1:], body, nxt, used | {i})
        if rest is not None:
            final, positions = rest
            return final, [i] + positions
    return None


def apply_lemma(p: Program, clause_id: str, lemma, orientation: str):
    """Rewrite a clause body with an oriented conditional.

    Equivalence lemmas replace the matched side with the other side.  An
    implication lemma applied left-to-right keeps the matched premise and
    inserts its consequences (risking thinning); applied right-to-left it
    removes consequence literals that the still-present premise justifies
    (risking widening).
    """
    if orientation not in ("ltr", "rtl"):
        raise RuleError(f"orientation must be 'ltr' or 'rtl', got {orientation!r}")
    target = p.clause(clause_id)
    fresh = lemma.rename_apart(target.vars())
    side, lhs, rhs = fresh.side_conditions, fresh.lhs, fresh.rhs

    if lemma.kind == "equivalence":
        source, produced = (lhs, rhs) if orientation == "ltr" else (rhs, lhs)
        got = _match_conjunction(list(side) + list(source), target.body, Substitution(), frozenset())
        if got is None:
            raise NoMatch(f"lemma {lemma.id} does not match clause {clause_id}")
        subst, positions = got
        source_positions = positions[len(side):]
        anchor = min(source_positions)
        body = []
        for i, lit in enumerate(target.body):
            if i == anchor:
                body.extend(subst.apply(l) for l in produced)
            elif i in source_positions:
                continue
            else:
                body.append(lit)
        safety = SEMANTICS_PRESERVING
    elif orientation == "ltr":
        got = _match_conjunction(list(side) + list(lhs), target.body, Substitution(), frozenset())
        if got is None:
            raise NoMatch(f"lemma {lemma.id} does not match clause {clause_id}")
        subst, positions = got
        anchor = max(positions[len(side):]) + 1
        body = list(target.body)
        body[anchor:anchor] = [subst.apply(l) for l in rhs]
        safety = THINNING_RISK
    else:
        got = _match_conjunction(list(side) + list(lhs) + list(rhs), target.body,
                                 Substitution(), frozenset())
        if got is None:
            raise NoMatch(f"lemma {lemma.id} does not match clause {clause_id}")
        subst, positions = got
        drop = set(positions[len(side) + len(lhs):])
        body = [lit for i, lit in enumerate(target.body) if i not in drop]
        safety = WIDENING_RISK

    new_clause = Clause(target.id, target.head, tuple(body))
    step = f"apply_lemma({lemma.id}@{clause_id})"
    out = canonical_program(p.replace_clause(clause_id, [new_clause], step))
    app = RuleApplication(
        "apply_lemma", clause_id,
        {"clause": clause_id, "lemma": lemma.id, "orientation": orientation},
        safety)
    return out, app


# ---------------------------------------------------------------------------
# Predicate renaming
# ---------------------------------------------------------------------------


def rename_predicate(p: Program, old: str, new: str):
    from .engine import parse_pred_key

    old_name, old_arity = parse_pred_key(old)
    new_name, new_arity = parse_pred_key(new)
    if old_arity != new_arity:
        raise RuleError(f"rename cannot change arity: {old} -> {new}")
    if new_name in BUILTIN_OPS or old_name in BUILTIN_OPS:
        raise RuleError("cannot rename builtins")
    if old == new:
        return p, RuleApplication("rename_predicate", None,
                                  {"old": old, "new": new}, SEMANTICS_PRESERVING)
    defined = set(p.predicates())
    if old not in defined and old not in p.referenced_predicates():
        raise UnknownPredicate(f"{old} is neither defined nor referenced")
    if new in defined or new in p.referenced_predicates():
        raise PredicateAlreadyDefined(f"{new} already occurs in the program")

    def rename_atom(a: Atom) -> Atom:
        if a.key == old:
            return Atom(new_name, a.args)
        return a

    clauses = tuple(Clause(c.id, rename_atom(c.head), tuple(rename_atom(b) for b in c.body))
                    for c in p.clauses)
    out = canonical_program(Program(p.name, clauses, dict(p.provenance)))
    app = RuleApplication("rename_predicate", None, {"old": old, "new": new},
                          SEMANTICS_PRESERVING)
    return out, app


# ---------------------------------------------------------------------------
# Clause deletion
# ---------------------------------------------------------------------------


def subsumes(general: Clause, specific: Clause) -> bool:
    """Theta-subsumption: an instance of ``general``'s head equals the
    specific head and its instantiated body is contained in the specific
    body (as a multiset)."""
    general = rename_apart(general, specific.vars())
    head = match(general.head, specific.head)
    if head is None:
        return False
    got = _match_conjunction(list(general.body), list(specific.body), head, frozenset())
    return got is not None


def _body_unsatisfiable(p: Program, clause: Clause) -> bool:
    for lit in clause.body:
        if lit.is_builtin and lit.pred in ("leq", "lt"):
            left, right = lit.args
            if is_ground(left) and is_ground(right):
                try:
                    if not compare_builtin(lit.pred, left, right):
                        return True
                except KernelError:
                    continue
        elif not lit.is_builtin and not p.clauses_for(lit.key):
            return True
    return False


def delete_clause(p: Program, clause_id: str, justification: str,
                  subsumed_by: Optional[str] = None):
    target = p.clause(clause_id)
    safety = WIDENING_RISK
    if justification == "subsumed":
        if subsumed_by is None:
            raise SubsumptionCheckFailed("subsumed deletion requires a subsuming clause id")
        subsumer = p.clause(subsumed_by)
        if subsumer.id == target.id or not subsumes(subsumer, target):
            raise SubsumptionCheckFailed(
                f"clause {subsumed_by} does not subsume clause {clause_id}")
        safety = SEMANTICS_PRESERVING
    elif justification == "unsatisfiable_body":
        if not _body_unsatisfiable(p, target):
            raise SubsumptionCheckFailed(
                f"could not verify that the body of {clause_id} is unsatisfiable")
        safety = SEMANTICS_PRESERVING
    elif justification != "user_asserted":
        raise RuleError(f"unknown deletion justification {justification!r}")
    out = canonical_program(p.replace_clause(clause_id, [], f"delete_clause({clause_id})"))
    params = {"clause": clause_id, "justification": justification}
    if subsumed_by is not None:
        params["subsumed_by"] = subsumed_by
    app = RuleApplication("delete_clause", clause_id, params, safety,
                          notes={"removed": format_clause(target)})
    return out, app
