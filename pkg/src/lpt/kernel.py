"""Syntax kernel: terms, atoms, clauses, programs, substitution, unification.

Everything here is immutable; all operations are pure functions, so values can
be shared freely across threads and program snapshots.

Lists are encoded with the nullary functor ``nil`` and the binary functor
``cons``.  ``neg_inf`` is a distinguished constant that compares strictly
below every integer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union


class KernelError(Exception):
    """Base class for errors raised by the workbench."""


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

NEG_INF = "neg_inf"


@dataclass(frozen=True)
class Var:
    name: str
    index: int = 0

    def display(self) -> str:
        return self.name if self.index == 0 else f"{self.name}_{self.index}"

    def __repr__(self):
        return self.display()


@dataclass(frozen=True)
class Const:
    # int for interpreted integers, str for uninterpreted symbols and neg_inf
    value: Union[int, str]

    def __repr__(self):
        return str(self.value)


@dataclass(frozen=True)
class Struct:
    functor: str
    args: tuple = ()

    def __repr__(self):
        if not self.args:
            return self.functor
        return f"{self.functor}({', '.join(map(repr, self.args))})"


Term = Union[Var, Const, Struct]

NIL = Struct("nil", ())


def cons(head: Term, tail: Term) -> Struct:
    return Struct("cons", (head, tail))


def mk_list(items: Sequence[Term], tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(items):
        out = cons(item, out)
    return out


def int_list(values: Sequence[int]) -> Term:
    return mk_list([Const(v) for v in values])


def list_elements(term: Term) -> Optional[list]:
    """Return the element list of a proper list term, else None."""
    items = []
    while True:
        if isinstance(term, Struct) and term.functor == "nil" and not term.args:
            return items
        if isinstance(term, Struct) and term.functor == "cons" and len(term.args) == 2:
            items.append(term.args[0])
            term = term.args[1]
            continue
        return None


def term_size(term: Term) -> int:
    """Node count; the well-founded order on terms compares these."""
    if isinstance(term, Struct):
        return 1 + sum(term_size(a) for a in term.args)
    return 1


def term_vars(term: Term, acc: Optional[list] = None) -> list:
    """Variables in first-occurrence order (no duplicates)."""
    if acc is None:
        acc = []
    if isinstance(term, Var):
        if term not in acc:
            acc.append(term)
    elif isinstance(term, Struct):
        for a in term.args:
            term_vars(a, acc)
    return acc


def is_ground(term: Term) -> bool:
    if isinstance(term, Var):
        return False
    if isinstance(term, Struct):
        return all(is_ground(a) for a in term.args)
    return True


# ---------------------------------------------------------------------------
# Literals and clauses
# ---------------------------------------------------------------------------

BUILTIN_OPS = ("leq", "lt", "eq")


@dataclass(frozen=True)
class Atom:
    """A body or head literal.  Builtins are atoms named leq/lt/eq of arity 2."""

    pred: str
    args: tuple = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self) -> str:
        return f"{self.pred}/{self.arity}"

    @property
    def is_builtin(self) -> bool:
        return self.pred in BUILTIN_OPS and len(self.args) == 2

    def __repr__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(map(repr, self.args))})"


@dataclass(frozen=True)
class Clause:
    id: str
    head: Atom
    body: tuple = ()

    def vars(self) -> list:
        acc: list = []
        for a in self.head.args:
            term_vars(a, acc)
        for lit in self.body:
            for a in lit.args:
                term_vars(a, acc)
        return acc

    def __repr__(self):
        if not self.body:
            return f"{self.head!r}."
        return f"{self.head!r} :- {', '.join(map(repr, self.body))}."


class DuplicateClauseId(KernelError):
    pass


@dataclass(frozen=True)
class Program:
    """An ordered collection of clauses with stable ids and provenance.

    ``provenance`` maps a clause id to the identifier of the step that
    produced it ("source" for parsed clauses).
    """

    name: str
    clauses: tuple = ()
    provenance: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        for c in self.clauses:
            if c.id in seen:
                raise DuplicateClauseId(f"duplicate clause id {c.id!r} in program {self.name!r}")
            seen.add(c.id)

    def clause(self, clause_id: str) -> Clause:
        for c in self.clauses:
            if c.id == clause_id:
                return c
        raise UnknownClause(f"no clause {clause_id!r} in program {self.name!r}")

    def clauses_for(self, key: str) -> list:
        return [c for c in self.clauses if c.head.key == key]

    def predicates(self) -> list:
        """Defined predicate keys in first-definition order."""
        out: list = []
        for c in self.clauses:
            if c.head.key not in out:
                out.append(c.head.key)
        return out

    def referenced_predicates(self) -> set:
        refs = set()
        for c in self.clauses:
            for lit in c.body:
                if not lit.is_builtin:
                    refs.add(lit.key)
        return refs

    def next_clause_id(self) -> int:
        top = 0
        for c in self.clauses:
            if c.id.startswith("c") and c.id[1:].isdigit():
                top = max(top, int(c.id[1:]))
        return top + 1

    def replace_clause(self, clause_id: str, replacements: Sequence[Clause],
                       step: str) -> "Program":
        """New program with ``clause_id`` swapped, in place, for ``replacements``."""
        self.clause(clause_id)  # raise early on unknown id
        out = []
        for c in self.clauses:
            if c.id == clause_id:
                out.extend(replacements)
            else:
                out.append(c)
        prov = dict(self.provenance)
        prov.pop(clause_id, None)
        for c in replacements:
            prov[c.id] = step
        return Program(self.name, tuple(out), prov)

    def append_clauses(self, new_clauses: Sequence[Clause], step: str) -> "Program":
        prov = dict(self.provenance)
        for c in new_clauses:
            prov[c.id] = step
        return Program(self.name, self.clauses + tuple(new_clauses), prov)

    def restrict(self, keys: Iterable[str]) -> "Program":
        wanted = set(keys)
        kept = tuple(c for c in self.clauses if c.head.key in wanted)
        prov = {c.id: self.provenance.get(c.id, "source") for c in kept}
        return Program(self.name, kept, prov)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def __len__(self):
        return len(self.clauses)


class UnknownClause(KernelError):
    pass


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------


class Substitution:
    """Idempotent variable -> term map (solved form, occurs-checked)."""

    __slots__ = ("bindings",)

    def __init__(self, bindings: Optional[Mapping[Var, Term]] = None):
        self.bindings: dict = dict(bindings) if bindings else {}

    def __bool__(self):
        return bool(self.bindings)

    def __eq__(self, other):
        return isinstance(other, Substitution) and self.bindings == other.bindings

    def __repr__(self):
        inside = ", ".join(f"{v!r} -> {t!r}" for v, t in self.bindings.items())
        return "{" + inside + "}"

    def apply(self, x):
        """Apply to a Term, Atom, Clause, or sequence of literals."""
        if isinstance(x, Var):
            return self.bindings.get(x, x)
        if isinstance(x, Const):
            return x
        if isinstance(x, Struct):
            if not x.args:
                return x
            return Struct(x.functor, tuple(self.apply(a) for a in x.args))
        if isinstance(x, Atom):
            return Atom(x.pred, tuple(self.apply(a) for a in x.args))
        if isinstance(x, Clause):
            return Clause(x.id, self.apply(x.head), tuple(self.apply(b) for b in x.body))
        if isinstance(x, (tuple, list)):
            return type(x)(self.apply(e) for e in x)
        raise TypeError(f"cannot apply substitution to {type(x).__name__}")

    def bind(self, var: Var, term: Term) -> Optional["Substitution"]:
        """Extend with var -> term, keeping the solved form; None on occurs check."""
        term = self.apply(term)
        if term == var:
            return self
        if occurs_in(var, term):
            return None
        single = Substitution({var: term})
        new = {v: single.apply(t) for v, t in self.bindings.items()}
        new[var] = term
        return Substitution(new)

    def restrict(self, variables: Iterable[Var]) -> "Substitution":
        keep = set(variables)
        return Substitution({v: t for v, t in self.bindings.items() if v in keep})


def occurs_in(var: Var, term: Term) -> bool:
    if isinstance(term, Var):
        return term == var
    if isinstance(term, Struct):
        return any(occurs_in(var, a) for a in term.args)
    return False


EMPTY_SUBST = Substitution()


# ---------------------------------------------------------------------------
# Unification and one-way matching
# ---------------------------------------------------------------------------


def unify(a, b, subst: Optional[Substitution] = None) -> Optional[Substitution]:
    """Most general unifier of two terms or literals, or None on failure.

    The occurs check is always on: the engine is a verification tool and the
    bounded inputs keep the cost negligible.
    """
    s = subst if subst is not None else Substitution()
    if isinstance(a, Atom) and isinstance(b, Atom):
        if a.pred != b.pred or a.arity != b.arity:
            return None
        for x, y in zip(a.args, b.args):
            s = unify(x, y, s)
            if s is None:
                return None
        return s
    if isinstance(a, Atom) or isinstance(b, Atom):
        return None

    a = s.apply(a)
    b = s.apply(b)
    if a == b:
        return s
    if isinstance(a, Var):
        return s.bind(a, b)
    if isinstance(b, Var):
        return s.bind(b, a)
    if isinstance(a, Struct) and isinstance(b, Struct):
        if a.functor != b.functor or len(a.args) != len(b.args):
            return None
        for x, y in zip(a.args, b.args):
            s = unify(x, y, s)
            if s is None:
                return None
        return s
    return None


apply_substitution = Substitution.apply  # spec-facing alias; s.apply(x) is idiomatic


def match(pattern, target, subst: Optional[Substitution] = None) -> Optional[Substitution]:
    """One-way match: instantiate pattern variables only, leave target intact.

    Succeeds iff result.apply(pattern) == target exactly.
    """
    s = subst if subst is not None else Substitution()
    if isinstance(pattern, Atom) and isinstance(target, Atom):
        if pattern.pred != target.pred or pattern.arity != target.arity:
            return None
        for x, y in zip(pattern.args, target.args):
            s = match(x, y, s)
            if s is None:
                return None
        return s
    if isinstance(pattern, Atom) or isinstance(target, Atom):
        return None

    if isinstance(pattern, Var):
        bound = s.bindings.get(pattern)
        if bound is not None:
            return s if bound == target else None
        return Substitution({**s.bindings, pattern: target})
    if isinstance(pattern, Const):
        return s if pattern == target else None
    if isinstance(pattern, Struct):
        if not (isinstance(target, Struct) and target.functor == pattern.functor
                and len(target.args) == len(pattern.args)):
            return None
        for x, y in zip(pattern.args, target.args):
            s = match(x, y, s)
            if s is None:
                return None
        return s
    return None


# ---------------------------------------------------------------------------
# Renaming and alpha-equivalence
# ---------------------------------------------------------------------------


def rename_apart(clause: Clause, avoid: Iterable[Var]) -> Clause:
    """Alpha-variant of ``clause`` sharing no variable with ``avoid``.

    Fresh variables keep their base name and get the smallest index that
    collides with nothing in ``avoid`` or the clause, so the result is
    deterministic.
    """
    avoid_set = set(avoid)
    own = clause.vars()
    if not (avoid_set & set(own)):
        return clause
    taken = {(v.name, v.index) for v in avoid_set} | {(v.name, v.index) for v in own}
    mapping: dict = {}
    for v in own:
        if v in avoid_set:
            idx = v.index + 1
            while (v.name, idx) in taken:
                idx += 1
            taken.add((v.name, idx))
            mapping[v] = Var(v.name, idx)
    return Substitution(mapping).apply(clause)


def canonical_clause(clause: Clause) -> tuple:
    """Hashable form invariant under variable renaming; body order preserved."""
    numbering: dict = {}

    def conv(term):
        if isinstance(term, Var):
            if term not in numbering:
                numbering[term] = len(numbering)
            return ("v", numbering[term])
        if isinstance(term, Const):
            return ("c", term.value)
        return ("s", term.functor, tuple(conv(a) for a in term.args))

    def conv_atom(atom):
        return (atom.pred, tuple(conv(a) for a in atom.args))

    return (conv_atom(clause.head), tuple(conv_atom(b) for b in clause.body))


def alpha_equivalent_clauses(a: Clause, b: Clause) -> bool:
    return canonical_clause(a) == canonical_clause(b)


def alpha_equivalent_programs(p1: Program, p2: Program) -> bool:
    """Clause-set equality up to per-clause variable renaming.

    Clause order is ignored; body order within a clause is significant.
    """
    left = sorted(map(canonical_clause, p1.clauses), key=repr)
    right = sorted(map(canonical_clause, p2.clauses), key=repr)
    return left == right
