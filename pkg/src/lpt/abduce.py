"""Abductive candidate generation and ranking.

A candidate is a subgoal whose introduction enables a fold: the "plain
complement" of matching part of a folder clause's body against selected
literals of the target clause.  Ranking applies the goal-introduction
heuristics: prefer candidates that keep the recursion well-founded, whose
predicate has a successful most-general query, that coordinate variables
already linked in the clause, and that stay small and general.  Candidates
constraining variables linked to nothing, and self-referential candidates
without a well-founded argument drop, are demoted below everything else.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .kernel import (
    Atom,
    Clause,
    KernelError,
    Program,
    Substitution,
    Var,
    match,
    rename_apart,
    term_size,
    term_vars,
)
from .engine import DEFAULT_LIMITS, SolveLimits, Solver
from .parser import format_literal
from .rules import FolderRef, RuleError, fold, introduce_goal


class NoPartialMatch(KernelError):
    pass


@dataclass(frozen=True)
class WellFoundedOrder:
    """Term-size order: well-founded on ground terms, renaming-invariant."""

    strict: bool = True

    def smaller(self, a, b) -> bool:
        if self.strict:
            return term_size(a) < term_size(b)
        return term_size(a) <= term_size(b)


TERM_SIZE_ORDER = WellFoundedOrder()


@dataclass(frozen=True)
class Complement:
    missing: tuple          # folder-body literals left unmatched, instantiated
    subst: Substitution     # instantiates folder variables only
    matched_target: tuple   # target body positions matched, ascending
    matched_folder: tuple   # folder body indices matched, ascending


def plain_complement(target: Clause, selected_positions: Sequence[int],
                     folder: Clause) -> list:
    """All ways to match a subset of the folder's body onto the selected
    literals; each result lists the instantiated unmatched folder literals.

    The match preserves the target's terms and instantiates folder variables
    only; an empty missing list means a direct fold already applies.  Folder
    variables left uninstantiated surface as fresh variables in the missing
    literals (the folder is renamed apart from the target first).
    """
    if not folder.body:
        raise RuleError(f"folder {folder.id} has an empty body")
    positions = list(selected_positions)
    selected = [target.body[i] for i in positions]
    folder = rename_apart(folder, target.vars())

    results = []

    def walk(sel_i: int, folder_i: int, subst, used_folder):
        if sel_i == len(selected):
            missing = tuple(subst.apply(folder.body[j])
                            for j in range(len(folder.body)) if j not in used_folder)
            results.append(Complement(missing, subst, tuple(positions),
                                      tuple(sorted(used_folder))))
            return
        for j in range(folder_i, len(folder.body)):
            nxt = match(folder.body[j], selected[sel_i], subst)
            if nxt is not None:
                walk(sel_i + 1, j + 1, nxt, used_folder | {j})

    walk(0, 0, Substitution(), frozenset())
    if positions and not results:
        raise NoPartialMatch(
            f"no folder body literal matches the selected literals of {target.id}")
    return results


@dataclass
class CandidateScores:
    enables_fold: bool
    successful_path: bool
    variable_coordination: int
    well_founded: bool
    size_penalty: int
    unlinked: bool
    petitio_demoted: bool

    def to_dict(self):
        return {
            "enables_fold": self.enables_fold,
            "successful_path": self.successful_path,
            "variable_coordination": self.variable_coordination,
            "well_founded": self.well_founded,
            "size_penalty": self.size_penalty,
            "unlinked": self.unlinked,
            "petitio_demoted": self.petitio_demoted,
        }


# Lexicographic rank key.  The heuristics carry no canonical weighting; this
# order is a deliberate choice pinned by tests, and it can be re-ordered here
# without touching the scoring itself.
HEURISTIC_ORDER = (
    "enables_fold",
    "unlinked",            # demotion: constrains variables linked to nothing
    "petitio_demoted",     # demotion: self-reference without well-founded drop
    "well_founded",
    "successful_path",
    "variable_coordination",
    "size_penalty",
)


@dataclass
class AbductiveCandidate:
    literal: Atom
    subst: Substitution
    folder: FolderRef
    insert_position: int
    fold_positions: tuple
    scores: CandidateScores
    rank: int = 0

    def fingerprint(self) -> str:
        return format_literal(self.literal)

    def sort_key(self, folder_order: int):
        s = self.scores
        parts = []
        for name in HEURISTIC_ORDER:
            value = getattr(s, name)
            if name in ("unlinked", "petitio_demoted", "size_penalty"):
                parts.append(value)          # smaller/false is better
            elif name == "variable_coordination":
                parts.append(-value)         # higher is better
            else:
                parts.append(not value)      # true is better
        return (*parts, folder_order, self.insert_position, self.fingerprint())

    def to_dict(self):
        return {
            "literal": self.fingerprint(),
            "folder": self.folder.to_dict(),
            "insert_position": self.insert_position,
            "fold_positions": list(self.fold_positions),
            "scores": self.scores.to_dict(),
            "rank": self.rank,
        }


def _literal_size(lit: Atom) -> int:
    return 1 + sum(term_size(a) for a in lit.args)


def _clause_vars_outside(target: Clause) -> set:
    acc: list = []
    for a in target.head.args:
        term_vars(a, acc)
    for lit in target.body:
        for a in lit.args:
            term_vars(a, acc)
    return set(acc)


def rank_candidates(p: Program, base: Program, clause_id: str,
                    folders: Sequence[tuple],
                    order: WellFoundedOrder = TERM_SIZE_ORDER,
                    limits: SolveLimits = DEFAULT_LIMITS) -> list:
    """Ranked single-literal complements over all folders and selections.

    ``folders`` is a sequence of (FolderRef, Clause) pairs, already resolved
    against their snapshots.  Every emitted candidate literally enables its
    fold: the introduce-then-fold sequence is rehearsed and must succeed.
    """
    target = p.clause(clause_id)
    solver = Solver(p)
    mg_limits = SolveLimits(limits.max_depth, min(limits.max_steps, 200_000), 1)
    candidates = []
    folder_order: dict = {}

    for f_idx, (ref, folder_clause) in enumerate(folders):
        seen_in_folder = set()
        for size in range(len(target.body) + 1):
            for combo in itertools.combinations(range(len(target.body)), size):
                try:
                    complements = plain_complement(target, list(combo), folder_clause)
                except (NoPartialMatch, RuleError):
                    continue
                for comp in complements:
                    if len(comp.missing) != 1:
                        continue
                    literal = comp.missing[0]
                    missing_folder_idx = next(
                        j for j in range(len(folder_clause.body))
                        if j not in comp.matched_folder)
                    insert_pos = _insert_position(comp, missing_folder_idx, len(target.body))
                    dedup = (format_literal(literal), insert_pos)
                    if dedup in seen_in_folder:
                        continue
                    seen_in_folder.add(dedup)
                    cand = _score_candidate(p, target, literal, comp, insert_pos,
                                            missing_folder_idx, ref, folder_clause,
                                            solver, mg_limits, order)
                    if cand is not None:
                        folder_order[id(cand)] = f_idx
                        candidates.append(cand)

    candidates.sort(key=lambda c: c.sort_key(folder_order[id(c)]))
    for i, c in enumerate(candidates):
        c.rank = i + 1
    return candidates


def _insert_position(comp: Complement, missing_folder_idx: int, body_len: int) -> int:
    """Slot the missing literal so the folded literals read in folder-body
    order: right after the image of the nearest preceding matched folder
    literal, or just before the first matched literal."""
    preceding = [t for t, j in zip(comp.matched_target, comp.matched_folder)
                 if j < missing_folder_idx]
    if preceding:
        return max(preceding) + 1
    if comp.matched_target:
        return min(comp.matched_target)
    return body_len


def _score_candidate(p, target, literal, comp, insert_pos, missing_folder_idx,
                     ref, folder_clause, solver, limits, order) -> Optional[AbductiveCandidate]:
    # the candidate exists only to serve a fold: rehearse introduce + fold
    fold_positions = sorted(
        [t if t < insert_pos else t + 1 for t in comp.matched_target] + [insert_pos])
    try:
        p2, _ = introduce_goal(p, target.id, literal, insert_pos)
        fold(p2, target.id, fold_positions, folder_clause, ref)
    except RuleError:
        return None

    cand_vars: list = []
    for a in literal.args:
        term_vars(a, cand_vars)

    existing = _clause_vars_outside(target)
    coordination = sum(1 for v in cand_vars if v in existing)
    unlinked = any(v not in existing for v in cand_vars)

    if literal.is_builtin:
        successful = True
    else:
        mg_query = Atom(literal.pred, tuple(Var(f"Q{i}") for i in range(literal.arity)))
        result = solver.solve((mg_query,), limits)
        successful = bool(result.answers)

    head_instance = comp.subst.apply(folder_clause.head)
    well_founded = any(
        order.smaller(a, b)
        for a, b in zip(head_instance.args, target.head.args))

    petitio = literal.key == target.head.key and not well_founded

    scores = CandidateScores(
        enables_fold=True,
        successful_path=successful,
        variable_coordination=coordination,
        well_founded=well_founded,
        size_penalty=_literal_size(literal),
        unlinked=unlinked,
        petitio_demoted=petitio,
    )
    return AbductiveCandidate(literal, comp.subst, ref, insert_pos,
                              tuple(fold_positions), scores)


def classify_candidate(p: Program, clause_id: str, candidate: AbductiveCandidate,
                       domain=frozenset({0, 1}), max_list_len: int = 2,
                       limits: SolveLimits = DEFAULT_LIMITS) -> str:
    """Advisory classification of what the introduced subgoal contributes.

    Computed from bounded extensions, never used in the rank key: the goal
    is semantics, which is the verify module's business, while ranking stays
    syntactic and fast.

    Returns one of:
      - "subsumed": the literal is already a conjunct of the body;
      - "deducible": the clause-head extension is unchanged, the new
        information was already implied;
      - "contradictory": the extension implodes to empty;
      - "underivable": genuinely new constraining information (the
        extension thins but survives);
      - "undecided": the bounded check hit resource limits (fresh-variable
        candidates can make the strengthened clause diverge).
    """
    from .engine import LimitExceeded
    from .rules import delete_clause
    from .verify import compare_extensions

    target = p.clause(clause_id)
    if candidate.literal in target.body:
        return "subsumed"
    after, _ = introduce_goal(p, clause_id, candidate.literal,
                              candidate.insert_position)
    bounded = SolveLimits(min(limits.max_depth, 2_000),
                          min(limits.max_steps, 200_000), limits.max_answers)
    try:
        diff = compare_extensions(p, after, target.head.key, domain, max_list_len,
                                  bounded)
        if diff.verdict == "equal":
            return "deducible"
        # contradictory when the strengthened clause contributes nothing at
        # all: dropping it outright leaves the extension unchanged (the
        # clause would be erased); imploding outright is the extreme case
        erased, _ = delete_clause(after, clause_id, "user_asserted")
        dead = compare_extensions(after, erased, target.head.key, domain,
                                  max_list_len, bounded)
    except LimitExceeded:
        return "undecided"
    if diff.imploded or dead.verdict == "equal":
        return "contradictory"
    return "underivable"


def weak_predicates(p: Program) -> set:
    """Predicates no ground instance of which is ever derivable: no clauses,
    or every clause body contains a weak user predicate.  Builtins are never
    weak."""
    defined = set(p.predicates())
    referenced = p.referenced_predicates()
    weak = {key for key in referenced if key not in defined}
    changed = True
    while changed:
        changed = False
        for key in defined:
            if key in weak:
                continue
            clauses = p.clauses_for(key)
            if all(any((not lit.is_builtin) and lit.key in weak for lit in c.body)
                   for c in clauses):
                weak.add(key)
                changed = True
    return weak
