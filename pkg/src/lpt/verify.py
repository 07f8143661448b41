"""Semantic safety net: lemma checking, extension comparison, step profiling.

Lemmas are checked exhaustively over a bounded ground universe.  The
enumeration joins the lemma's atoms against bounded extensions instead of
walking the raw cross-product of variable instantiations; the verdict is the
same, the cost is not.

Extension comparison is the thinning/widening/implosion detector that audits
risky transformation steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .kernel import (
    Atom,
    KernelError,
    Program,
    Substitution,
    Var,
    is_ground,
    match,
    term_vars,
)
from .engine import (
    DEFAULT_LIMITS,
    LimitExceeded,
    ModelSummary,
    SolveLimits,
    Solver,
    bounded_extension,
    compare_builtin,
    ground_universe,
)
from .parser import parse_literal


class VerifyError(KernelError):
    pass


# ---------------------------------------------------------------------------
# Lemmas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lemma:
    """Oriented conditional between atom conjunctions.

    Invariant: the right-hand side invents no variables — vars(rhs) is a
    subset of vars(lhs) + vars(side_conditions).
    """

    id: str
    side_conditions: tuple
    lhs: tuple
    rhs: tuple
    kind: str  # equivalence | implication

    def __post_init__(self):
        if self.kind not in ("equivalence", "implication"):
            raise VerifyError(f"lemma kind must be equivalence or implication, got {self.kind!r}")
        if not self.lhs or not self.rhs:
            raise VerifyError(f"lemma {self.id}: both sides must be nonempty")
        allowed = set(self._vars(self.lhs)) | set(self._vars(self.side_conditions))
        extra = [v for v in self._vars(self.rhs) if v not in allowed]
        if extra:
            raise VerifyError(f"lemma {self.id}: rhs invents variables {extra}")

    @staticmethod
    def _vars(literals) -> list:
        acc: list = []
        for lit in literals:
            for a in lit.args:
                term_vars(a, acc)
        return acc

    def vars(self) -> list:
        acc = self._vars(self.side_conditions)
        for v in self._vars(self.lhs) + self._vars(self.rhs):
            if v not in acc:
                acc.append(v)
        return acc

    def rename_apart(self, avoid: Iterable[Var]) -> "Lemma":
        avoid_set = set(avoid)
        mapping: dict = {}
        taken = {(v.name, v.index) for v in avoid_set}
        for v in self.vars():
            if v in avoid_set:
                idx = v.index + 1
                while (v.name, idx) in taken:
                    idx += 1
                taken.add((v.name, idx))
                mapping[v] = Var(v.name, idx)
        if not mapping:
            return self
        sub = Substitution(mapping)
        return Lemma(self.id,
                     tuple(sub.apply(l) for l in self.side_conditions),
                     tuple(sub.apply(l) for l in self.lhs),
                     tuple(sub.apply(l) for l in self.rhs),
                     self.kind)

    @staticmethod
    def from_dict(d: dict) -> "Lemma":
        return Lemma(
            d["id"],
            tuple(parse_literal(s) for s in d.get("side", [])),
            tuple(parse_literal(s) for s in d["lhs"]),
            tuple(parse_literal(s) for s in d["rhs"]),
            d["kind"],
        )


@dataclass
class LemmaVerdict:
    holds: bool
    counterexamples: list = field(default_factory=list)
    instances_checked: int = 0

    def __bool__(self):
        return self.holds


# ---------------------------------------------------------------------------
# Extension cache
# ---------------------------------------------------------------------------


class ExtensionCache:
    """Caches bounded extensions keyed by the sub-program a predicate can
    reach, so unchanged predicates are never recomputed across steps."""

    def __init__(self):
        self.store: dict = {}

    @staticmethod
    def _reachable_fingerprint(program: Program, pred: str):
        from .kernel import canonical_clause

        reached = {pred}
        frontier = [pred]
        while frontier:
            key = frontier.pop()
            for c in program.clauses_for(key):
                for lit in c.body:
                    if not lit.is_builtin and lit.key not in reached:
                        reached.add(lit.key)
                        frontier.append(lit.key)
        clauses = [c for key in sorted(reached) for c in program.clauses_for(key)]
        return tuple(canonical_clause(c) for c in clauses)

    def extension(self, program: Program, pred: str, domain, max_list_len: int,
                  limits: SolveLimits, solver: Optional[Solver] = None) -> ModelSummary:
        key = (pred, frozenset(domain), max_list_len,
               self._reachable_fingerprint(program, pred))
        hit = self.store.get(key)
        if hit is not None:
            return hit
        summary = bounded_extension(program, pred, domain, max_list_len, limits,
                                    solver=solver)
        self.store[key] = summary
        return summary


# ---------------------------------------------------------------------------
# Lemma checking
# ---------------------------------------------------------------------------


def _enumerate_matches(patterns: Sequence[Atom], extensions: dict, subst: Substitution):
    """Yield every substitution grounding all user patterns against the
    extension sets, in a deterministic order; ground builtins are evaluated."""
    users = [p for p in patterns if not p.is_builtin]
    builtins = [p for p in patterns if p.is_builtin]
    ordered = {key: sorted(atoms, key=repr) for key, atoms in extensions.items()}

    def walk(i: int, s: Substitution):
        if i == len(users):
            for b in builtins:
                inst = s.apply(b)
                if not (is_ground(inst.args[0]) and is_ground(inst.args[1])):
                    raise VerifyError(f"builtin {b!r} not grounded by lemma matching")
                if b.pred == "eq":
                    if inst.args[0] != inst.args[1]:
                        return
                elif not compare_builtin(b.pred, inst.args[0], inst.args[1]):
                    return
            yield s
            return
        pat = users[i]
        for ground_atom in ordered[pat.key]:
            nxt = match(pat, ground_atom, s)
            if nxt is not None:
                yield from walk(i + 1, nxt)

    yield from walk(0, subst)


def _holds(atom: Atom, subst: Substitution, extensions: dict, solver: Solver,
           universe_set: set, limits: SolveLimits) -> bool:
    inst = subst.apply(atom)
    if inst.is_builtin:
        if inst.pred == "eq":
            return inst.args[0] == inst.args[1]
        return compare_builtin(inst.pred, inst.args[0], inst.args[1])
    if all(a in universe_set for a in inst.args):
        return inst in extensions[inst.key]
    # instance outside the bounded universe: ask the engine directly
    result = solver.solve((inst,), SolveLimits(limits.max_depth, limits.max_steps, 1))
    if not result.answers and not result.exhausted:
        raise LimitExceeded(f"undecided lemma instance {inst!r}", inst)
    return bool(result.answers)


def check_lemma(lemma: Lemma, p: Program, domain: Iterable[int], max_list_len: int,
                limits: SolveLimits = DEFAULT_LIMITS,
                cache: Optional[ExtensionCache] = None) -> LemmaVerdict:
    """Exhaustively check a lemma over the bounded ground universe.

    For every grounding where the side conditions and lhs hold, the rhs must
    hold; equivalence lemmas are additionally checked in the converse
    direction.  Counterexample substitutions are collected on failure.
    """
    dom = sorted(set(domain))
    cache = cache if cache is not None else ExtensionCache()
    solver = Solver(p)
    keys = {lit.key for lit in (*lemma.side_conditions, *lemma.lhs, *lemma.rhs)
            if not lit.is_builtin}
    defined = set(p.predicates())
    missing = sorted(k for k in keys if k not in defined)
    if missing:
        raise VerifyError(f"lemma {lemma.id}: predicates not defined in program: {missing}")
    extensions = {k: cache.extension(p, k, dom, max_list_len, limits, solver=solver).atoms
                  for k in sorted(keys)}
    universe_set = set(ground_universe(dom, max_list_len))

    verdict = LemmaVerdict(True)

    def run_direction(premises, conclusions):
        ordered = sorted(premises, key=lambda lit: len(extensions.get(lit.key, ()))
                         if not lit.is_builtin else 0)
        for s in _enumerate_matches(ordered, extensions, Substitution()):
            verdict.instances_checked += 1
            if all(_holds(c, s, extensions, solver, universe_set, limits)
                   for c in conclusions):
                continue
            verdict.holds = False
            verdict.counterexamples.append(s.restrict(lemma.vars()))

    run_direction(tuple(lemma.side_conditions) + tuple(lemma.lhs), lemma.rhs)
    if lemma.kind == "equivalence":
        run_direction(tuple(lemma.side_conditions) + tuple(lemma.rhs), lemma.lhs)
    return verdict


# ---------------------------------------------------------------------------
# Extension comparison
# ---------------------------------------------------------------------------

EQUAL = "equal"
THINNED = "thinned"
WIDENED = "widened"
MIXED = "mixed"


@dataclass
class ExtensionDiff:
    verdict: str
    missing: frozenset
    extra: frozenset
    imploded: bool
    predicate: str = ""
    detail: str = ""

    @staticmethod
    def from_sets(before: frozenset, after: frozenset, predicate: str = "",
                  detail: str = "") -> "ExtensionDiff":
        missing = before - after
        extra = after - before
        if not missing and not extra:
            verdict = EQUAL
        elif missing and not extra:
            verdict = THINNED
        elif extra and not missing:
            verdict = WIDENED
        else:
            verdict = MIXED
        imploded = bool(before) and not after
        return ExtensionDiff(verdict, frozenset(missing), frozenset(extra), imploded,
                             predicate, detail)

    @staticmethod
    def equal(predicate: str = "", detail: str = "") -> "ExtensionDiff":
        return ExtensionDiff(EQUAL, frozenset(), frozenset(), False, predicate, detail)

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "predicate": self.predicate,
            "missing": sorted(repr(a) for a in self.missing),
            "extra": sorted(repr(a) for a in self.extra),
            "imploded": self.imploded,
            "detail": self.detail,
        }


def _strip_pred(atoms: frozenset) -> frozenset:
    return frozenset(a.args for a in atoms)


def compare_extensions(before: Program, after: Program, pred: str,
                       domain: Iterable[int], max_list_len: int,
                       limits: SolveLimits = DEFAULT_LIMITS,
                       pred_after: Optional[str] = None,
                       cache: Optional[ExtensionCache] = None) -> ExtensionDiff:
    """Set-difference of the two bounded extensions.

    ``pred_after`` supports comparing across a predicate renaming (the
    "same relation, new name" case); atoms are compared on argument tuples.
    """
    cache = cache if cache is not None else ExtensionCache()
    pred_after = pred_after or pred
    ext_before = cache.extension(before, pred, domain, max_list_len, limits)
    ext_after = cache.extension(after, pred_after, domain, max_list_len, limits)
    name = pred if pred == pred_after else f"{pred}->{pred_after}"
    if pred == pred_after:
        return ExtensionDiff.from_sets(ext_before.atoms, ext_after.atoms, name)
    return ExtensionDiff.from_sets(_strip_pred(ext_before.atoms),
                                   _strip_pred(ext_after.atoms), name)


# ---------------------------------------------------------------------------
# Step profiling
# ---------------------------------------------------------------------------


@dataclass
class ProfileRow:
    n: int
    steps: int
    answers: int
    censored: bool = False


@dataclass
class StepProfile:
    program: str
    predicate: str
    rows: list

    def row(self, n: int) -> ProfileRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)

    def to_rows(self) -> list:
        return [{"program": self.program, "n": r.n, "steps": r.steps,
                 "answers": r.answers, "censored": r.censored} for r in self.rows]


def step_profile(p: Program, pred: str, sizes: Sequence[int],
                 limits: SolveLimits = DEFAULT_LIMITS) -> StepProfile:
    """Resolution steps to the first answer of pred(L, X) where L is the
    reversed list [n, n-1, ..., 1]; rows that hit limits are censored."""
    if not sizes or list(sizes) != sorted(sizes):
        raise VerifyError("sizes must be nonempty and ascending")
    from .engine import parse_pred_key
    from .kernel import int_list

    name, arity = parse_pred_key(pred)
    if arity != 2:
        raise VerifyError(f"step_profile expects a binary sort relation, got {pred}")
    solver = Solver(p)
    rows = []
    for n in sizes:
        goal = Atom(name, (int_list(list(range(n, 0, -1))), Var("Out")))
        result = solver.solve((goal,), SolveLimits(limits.max_depth, limits.max_steps, 1))
        censored = not result.answers and not result.exhausted
        rows.append(ProfileRow(n, result.steps, len(result.answers), censored))
    return StepProfile(p.name, pred, rows)


def format_profile_table(profiles: Sequence[StepProfile]) -> str:
    """Plain-text aligned table, one row per (program, n)."""
    headers = ("program", "n", "steps", "answers", "censored")
    body = []
    for prof in profiles:
        for r in prof.rows:
            body.append((prof.program, str(r.n), str(r.steps), str(r.answers),
                         "yes" if r.censored else "no"))
    widths = [max(len(h), *(len(row[i]) for row in body)) if body else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    lines.append("  ".join("-" * widths[i] for i in range(len(headers))))
    for row in body:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(len(headers))))
    return "\n".join(lines)
