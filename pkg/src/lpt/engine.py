"""SLD resolution with resource limits, step counting, and bounded extensions.

``solve`` runs depth-first, left-to-right resolution over a definite program.
A resolution step is one successful clause resolution or one builtin
evaluation; step counts are deterministic for fixed inputs, which is what the
complexity profiles build on.

``bounded_extension`` enumerates ground queries over a finite integer domain
and list-length cap and calls ``solve`` on each; it deliberately does not use
a bottom-up fixpoint (the Herbrand universe with cons is infinite, and query
enumeration gives the exact finite restriction of the model).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .kernel import (
    NEG_INF,
    Atom,
    Const,
    KernelError,
    Program,
    Struct,
    Substitution,
    Term,
    Var,
    int_list,
    is_ground,
    term_vars,
)


class EngineError(KernelError):
    pass


class NongroundBuiltin(EngineError):
    """A builtin comparison was reached with an unbound argument.

    Signals a moding violation: the corpus programs are moded so that
    left-to-right execution grounds comparisons first.
    """

    def __init__(self, literal: Atom, pending: Sequence[Atom]):
        self.literal = literal
        self.pending = tuple(pending)
        stack = ", ".join(repr(a) for a in self.pending[:8])
        super().__init__(f"builtin {literal!r} called with unbound argument (pending: {stack})")


class LimitExceeded(EngineError):
    def __init__(self, message: str, query: Optional[Atom] = None):
        self.query = query
        super().__init__(message)


@dataclass(frozen=True)
class SolveLimits:
    max_depth: int = 10_000
    max_steps: int = 5_000_000
    max_answers: int = 10_000

    def __post_init__(self):
        if self.max_depth <= 0 or self.max_steps <= 0 or self.max_answers <= 0:
            raise ValueError("limits must be strictly positive")


DEFAULT_LIMITS = SolveLimits()


@dataclass
class AnswerSet:
    answers: list
    steps: int
    exhausted: bool

    def bindings_for(self, var_name: str) -> list:
        v = Var(var_name)
        return [s.apply(v) for s in self.answers]


@dataclass(frozen=True)
class ModelSummary:
    predicate: str
    domain: frozenset
    max_list_len: int
    atoms: frozenset


# ---------------------------------------------------------------------------
# Builtin evaluation over integers + neg_inf
# ---------------------------------------------------------------------------


def _num(term: Term):
    """Comparable rank of a ground numeric term, or None."""
    if isinstance(term, Const):
        if isinstance(term.value, int):
            return (1, term.value)
        if term.value == NEG_INF:
            return (0, 0)
    return None


def compare_builtin(op: str, left: Term, right: Term) -> bool:
    """Ground comparison over integers + neg_inf.

    The order relation is defined on integers and neg_inf only; a ground
    term of any other shape is simply not in the relation, so the
    comparison fails rather than erroring.
    """
    a, b = _num(left), _num(right)
    if a is None or b is None:
        return False
    return a <= b if op == "leq" else a < b


# ---------------------------------------------------------------------------
# The solver
# ---------------------------------------------------------------------------


def _arg_tag(term: Term):
    """Cheap shape descriptor for clause-head indexing; None is a wildcard."""
    if isinstance(term, Var):
        return None
    if isinstance(term, Const):
        return ("c", term.value)
    return ("s", term.functor, len(term.args))


class Solver:
    """Reusable solver for one program: precomputes the clause index.

    Pure and reentrant: each ``solve`` call keeps all mutable state local, so
    one Solver can serve many queries (the bounded-extension enumerations
    lean on this).
    """

    def __init__(self, program: Program):
        self.program = program
        self.index: dict = {}
        for clause in program.clauses:
            entry = (clause, clause.vars(), tuple(_arg_tag(a) for a in clause.head.args))
            self.index.setdefault(clause.head.key, []).append(entry)

    # -- binding environment helpers (trail-based, undone on backtracking) --

    @staticmethod
    def _walk(term, bindings):
        while isinstance(term, Var):
            nxt = bindings.get(term)
            if nxt is None:
                return term
            term = nxt
        return term

    @classmethod
    def _resolve(cls, term, bindings):
        term = cls._walk(term, bindings)
        if isinstance(term, Struct) and term.args:
            return Struct(term.functor, tuple(cls._resolve(a, bindings) for a in term.args))
        return term

    @classmethod
    def _occurs(cls, var, term, bindings):
        term = cls._walk(term, bindings)
        if isinstance(term, Var):
            return term == var
        if isinstance(term, Struct):
            return any(cls._occurs(var, a, bindings) for a in term.args)
        return False

    @classmethod
    def _unify(cls, a, b, bindings, trail) -> bool:
        a = cls._walk(a, bindings)
        b = cls._walk(b, bindings)
        if a == b:
            return True
        if isinstance(a, Var):
            if cls._occurs(a, b, bindings):
                return False
            bindings[a] = b
            trail.append(a)
            return True
        if isinstance(b, Var):
            if cls._occurs(b, a, bindings):
                return False
            bindings[b] = a
            trail.append(b)
            return True
        if isinstance(a, Struct) and isinstance(b, Struct):
            if a.functor != b.functor or len(a.args) != len(b.args):
                return False
            return all(cls._unify(x, y, bindings, trail) for x, y in zip(a.args, b.args))
        return False

    @staticmethod
    def _undo(bindings, trail, mark):
        while len(trail) > mark:
            del bindings[trail.pop()]

    def solve(self, query: Sequence[Atom], limits: SolveLimits = DEFAULT_LIMITS) -> AnswerSet:
        query = tuple(query)
        query_vars: list = []
        for lit in query:
            for arg in lit.args:
                term_vars(arg, query_vars)

        bindings: dict = {}
        trail: list = []
        steps = 0
        pruned = False
        answers: list = []
        fresh = itertools.count(1)

        # goal lists are (atom, rest) cons cells to share tails cheaply
        goals = None
        for lit in reversed(query):
            goals = (lit, goals)

        # each choicepoint: [atom, entries, next_index, rest_goals, depth, trail_mark]
        stack: list = []
        state = (goals, 0)

        while True:
            if state is not None:
                goals, depth = state
                state = None
                if goals is None:
                    subst = Substitution(
                        {v: self._resolve(v, bindings) for v in query_vars
                         if self._walk(v, bindings) is not v})
                    answers.append(subst)
                    if len(answers) >= limits.max_answers:
                        if stack:
                            pruned = True
                        break
                    # fall through to backtracking
                else:
                    atom, rest = goals
                    if atom.pred in ("leq", "lt", "eq") and len(atom.args) == 2:
                        steps += 1
                        if steps >= limits.max_steps:
                            pruned = True
                            break
                        left, right = atom.args
                        if atom.pred == "eq":
                            mark = len(trail)
                            if self._unify(left, right, bindings, trail):
                                state = (rest, depth)
                            else:
                                self._undo(bindings, trail, mark)
                        else:
                            lw = self._resolve(left, bindings)
                            rw = self._resolve(right, bindings)
                            if not (is_ground(lw) and is_ground(rw)):
                                pend = [self._resolve_atom(atom, bindings)]
                                node = rest
                                while node is not None:
                                    pend.append(self._resolve_atom(node[0], bindings))
                                    node = node[1]
                                raise NongroundBuiltin(pend[0], pend[1:])
                            if compare_builtin(atom.pred, lw, rw):
                                state = (rest, depth)
                        if state is not None:
                            continue
                    else:
                        entries = self.index.get(atom.key, ())
                        if depth + 1 > limits.max_depth:
                            pruned = True
                        else:
                            stack.append([atom, entries, 0, rest, depth, len(trail)])
                    # fall through to backtracking

            # backtrack: find the next alternative
            progressed = False
            while stack:
                cp = stack[-1]
                atom, entries, next_i, rest, depth, mark = cp
                self._undo(bindings, trail, mark)
                goal_tags = tuple(_arg_tag(self._walk(a, bindings)) for a in atom.args)
                chosen = None
                while next_i < len(entries):
                    clause, clause_vars, head_tags = entries[next_i]
                    next_i += 1
                    ok = True
                    for g, t in zip(goal_tags, head_tags):
                        if g is not None and t is not None and g != t:
                            ok = False
                            break
                    if ok:
                        chosen = (clause, clause_vars)
                        break
                cp[2] = next_i
                if chosen is None:
                    stack.pop()
                    continue
                clause, clause_vars = chosen
                if clause_vars:
                    stamp = next(fresh)
                    sub = Substitution({v: Var(f"_{v.name}", stamp) for v in clause_vars})
                    head = sub.apply(clause.head)
                    body = tuple(sub.apply(b) for b in clause.body)
                else:
                    head, body = clause.head, clause.body
                if not self._unify_atoms(atom, head, bindings, trail):
                    self._undo(bindings, trail, mark)
                    continue
                steps += 1
                if steps >= limits.max_steps:
                    pruned = True
                    stack = []
                    break
                new_goals = rest
                for lit in reversed(body):
                    new_goals = (lit, new_goals)
                state = (new_goals, depth + 1)
                progressed = True
                break
            if not progressed and state is None:
                break

        exhausted = not pruned
        return AnswerSet(answers, steps, exhausted)

    def _unify_atoms(self, a: Atom, b: Atom, bindings, trail) -> bool:
        if a.pred != b.pred or a.arity != b.arity:
            return False
        return all(self._unify(x, y, bindings, trail) for x, y in zip(a.args, b.args))

    def _resolve_atom(self, atom: Atom, bindings) -> Atom:
        return Atom(atom.pred, tuple(self._resolve(a, bindings) for a in atom.args))


def solve(program: Program, query: Sequence[Atom], limits: SolveLimits = DEFAULT_LIMITS) -> AnswerSet:
    return Solver(program).solve(query, limits)


# ---------------------------------------------------------------------------
# Bounded extensions
# ---------------------------------------------------------------------------


def ground_universe(domain: Iterable[int], max_list_len: int) -> list:
    """Candidate ground argument terms: neg_inf, the domain integers, and all
    domain lists of length <= max_list_len, in a fixed deterministic order."""
    values = sorted(set(domain))
    terms: list = [Const(NEG_INF)]
    terms.extend(Const(v) for v in values)
    for length in range(max_list_len + 1):
        for combo in itertools.product(values, repeat=length):
            terms.append(int_list(list(combo)))
    return terms


def parse_pred_key(key: str):
    name, _, arity = key.partition("/")
    if not arity.isdigit():
        raise ValueError(f"predicate key must look like name/arity, got {key!r}")
    return name, int(arity)


def bounded_extension(program: Program, pred: str, domain: Iterable[int],
                      max_list_len: int, limits: SolveLimits = DEFAULT_LIMITS,
                      solver: Optional[Solver] = None) -> ModelSummary:
    """Ground atoms of ``pred`` provable over the bounded term universe.

    Deterministic for fixed inputs.  The per-query evaluations are
    independent, so they could run concurrently; the contract either way is
    a result identical to this sequential enumeration.

    Raises LimitExceeded if any single ground query hits limits without
    exhausting its search space — a timeout must never silently read as
    failure.
    """
    name, arity = parse_pred_key(pred)
    dom = frozenset(domain)
    universe = ground_universe(dom, max_list_len)
    s = solver if solver is not None else Solver(program)
    one = SolveLimits(limits.max_depth, limits.max_steps, 1)
    atoms = set()
    for combo in itertools.product(universe, repeat=arity):
        goal = Atom(name, combo)
        result = s.solve((goal,), one)
        if result.answers:
            atoms.add(goal)
        elif not result.exhausted:
            raise LimitExceeded(f"query {goal!r} hit limits without exhausting", goal)
    return ModelSummary(pred, dom, max_list_len, frozenset(atoms))
