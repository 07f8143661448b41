"""Prolog-like concrete syntax: parser and canonical pretty-printer.

The text format is a small Prolog subset: ``:-`` for the arrow, ``,`` for
conjunction, ``[H|T]`` lists, ``=<`` / ``<`` / ``=`` builtins, ``%`` line
comments, UTF-8 input.  Pretty-printing then reparsing yields an
alpha-equivalent program.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .kernel import (
    NEG_INF,
    Atom,
    Clause,
    Const,
    KernelError,
    Program,
    Struct,
    Term,
    Var,
    list_elements,
)


class ParseError(KernelError):
    def __init__(self, message: str, line: int, column: int, expected: Optional[str] = None):
        self.line = line
        self.column = column
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at line {line}, column {column}{hint}")


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_PUNCT = {":-", "=<", "<", "=", "(", ")", "[", "]", "|", ",", "."}


@dataclass(frozen=True)
class Token:
    kind: str  # name | var | int | punct | eof
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == ":" and text[i:i + 2] == ":-":
            tokens.append(Token("punct", ":-", line, col))
            i += 2
            col += 2
            continue
        if ch == "=" and text[i:i + 2] == "=<":
            tokens.append(Token("punct", "=<", line, col))
            i += 2
            col += 2
            continue
        if ch in "<=()[]|,.":
            tokens.append(Token("punct", ch, line, col))
            i += 1
            col += 1
            continue
        if ch == "-" and i + 1 < n and text[i + 1].isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "var" if (ch.isupper() or ch == "_") else "name"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_BUILTIN_BY_OP = {"=<": "leq", "<": "lt", "=": "eq"}


class _Parser:
    def __init__(self, tokens: list):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == text:
            return self.take()
        shown = tok.text or "end of input"
        raise ParseError(f"unexpected {shown!r}", tok.line, tok.column, expected=repr(text))

    def parse_program(self, name: str) -> Program:
        clauses = []
        while self.peek().kind != "eof":
            clauses.append(self.parse_clause(f"c{len(clauses) + 1}"))
        return Program(name, tuple(clauses), {c.id: "source" for c in clauses})

    def parse_clause(self, clause_id: str) -> Clause:
        head = self.parse_literal()
        if head.is_builtin:
            tok = self.peek()
            raise ParseError("builtin cannot be a clause head", tok.line, tok.column)
        body: list = []
        tok = self.peek()
        if tok.kind == "punct" and tok.text == ":-":
            self.take()
            body.append(self.parse_literal())
            while self.peek().kind == "punct" and self.peek().text == ",":
                self.take()
                body.append(self.parse_literal())
        self.expect(".")
        return Clause(clause_id, head, tuple(body))

    def parse_literal(self) -> Atom:
        tok = self.peek()
        term = self.parse_term()
        nxt = self.peek()
        if nxt.kind == "punct" and nxt.text in _BUILTIN_BY_OP:
            op = self.take().text
            rhs = self.parse_term()
            return Atom(_BUILTIN_BY_OP[op], (term, rhs))
        if isinstance(term, Struct) and term.functor not in ("nil", "cons"):
            return Atom(term.functor, term.args)
        if isinstance(term, Const) and isinstance(term.value, str) and term.value != NEG_INF:
            return Atom(term.value, ())
        raise ParseError("term is not a valid literal", tok.line, tok.column,
                         expected="a predicate atom or builtin comparison")

    def parse_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "var":
            self.take()
            return Var(tok.text)
        if tok.kind == "int":
            self.take()
            return Const(int(tok.text))
        if tok.kind == "name":
            self.take()
            if self.peek().kind == "punct" and self.peek().text == "(":
                self.take()
                args = [self.parse_term()]
                while self.peek().kind == "punct" and self.peek().text == ",":
                    self.take()
                    args.append(self.parse_term())
                self.expect(")")
                return Struct(tok.text, tuple(args))
            return Const(tok.text)
        if tok.kind == "punct" and tok.text == "[":
            return self.parse_list()
        shown = tok.text or "end of input"
        raise ParseError(f"unexpected {shown!r}", tok.line, tok.column, expected="a term")

    def parse_list(self) -> Term:
        self.expect("[")
        if self.peek().kind == "punct" and self.peek().text == "]":
            self.take()
            return Struct("nil", ())
        items = [self.parse_term()]
        while self.peek().kind == "punct" and self.peek().text == ",":
            self.take()
            items.append(self.parse_term())
        tail: Term = Struct("nil", ())
        if self.peek().kind == "punct" and self.peek().text == "|":
            self.take()
            tail = self.parse_term()
        self.expect("]")
        out = tail
        for item in reversed(items):
            out = Struct("cons", (item, out))
        return out


def parse_program(text: str, name: str = "program") -> Program:
    return _Parser(tokenize(text)).parse_program(name)


def parse_clause(text: str, clause_id: str = "c1") -> Clause:
    parser = _Parser(tokenize(text))
    clause = parser.parse_clause(clause_id)
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column)
    return clause


def parse_literal(text: str) -> Atom:
    parser = _Parser(tokenize(text))
    lit = parser.parse_literal()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column)
    return lit


def parse_query(text: str) -> list:
    """Comma-separated literal conjunction, optional trailing dot."""
    parser = _Parser(tokenize(text))
    goals = [parser.parse_literal()]
    while parser.peek().kind == "punct" and parser.peek().text == ",":
        parser.take()
        goals.append(parser.parse_literal())
    if parser.peek().kind == "punct" and parser.peek().text == ".":
        parser.take()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column)
    return goals


# ---------------------------------------------------------------------------
# Pretty-printer
# ---------------------------------------------------------------------------

_OP_BY_BUILTIN = {"leq": "=<", "lt": "<", "eq": "="}


def format_term(term: Term) -> str:
    if isinstance(term, Var):
        return term.display()
    if isinstance(term, Const):
        return str(term.value)
    elements = list_elements(term)
    if elements is not None:
        return "[" + ", ".join(format_term(e) for e in elements) + "]"
    # improper list: [a, b | T]
    if isinstance(term, Struct) and term.functor == "cons" and len(term.args) == 2:
        items = []
        while isinstance(term, Struct) and term.functor == "cons" and len(term.args) == 2:
            items.append(term.args[0])
            term = term.args[1]
        inner = ", ".join(format_term(e) for e in items)
        return f"[{inner} | {format_term(term)}]"
    if isinstance(term, Struct):
        if not term.args:
            return term.functor
        return f"{term.functor}({', '.join(format_term(a) for a in term.args)})"
    raise TypeError(f"not a term: {term!r}")


def format_literal(lit: Atom) -> str:
    if lit.is_builtin:
        left, right = lit.args
        return f"{format_term(left)} {_OP_BY_BUILTIN[lit.pred]} {format_term(right)}"
    if not lit.args:
        return lit.pred
    return f"{lit.pred}({', '.join(format_term(a) for a in lit.args)})"


def format_clause(clause: Clause) -> str:
    head = format_literal(clause.head)
    if not clause.body:
        return f"{head}."
    return f"{head} :- {', '.join(format_literal(b) for b in clause.body)}."


def _listy_positions(program: Program) -> dict:
    """Per predicate key, which argument positions carry list terms.

    Seeded by literal nil/cons occurrences, then propagated through shared
    variables until fixpoint; drives the Ls/A split in canonical naming.
    """
    listy: dict = {}

    def atoms(clause):
        yield clause.head
        yield from clause.body

    def mark(key, i):
        slots = listy.setdefault(key, set())
        if i not in slots:
            slots.add(i)
            return True
        return False

    def is_list_term(t, list_vars):
        if isinstance(t, Struct) and t.functor in ("nil", "cons"):
            return True
        return isinstance(t, Var) and t in list_vars

    changed = True
    while changed:
        changed = False
        for clause in program.clauses:
            list_vars = set()
            grew = True

            def scan(term):
                # a variable seen in cons-tail position is a list
                nonlocal grew
                if isinstance(term, Struct) and term.functor == "cons" and len(term.args) == 2:
                    tail = term.args[1]
                    if isinstance(tail, Var) and tail not in list_vars:
                        list_vars.add(tail)
                        grew = True
                    scan(term.args[0])
                    scan(term.args[1])
                elif isinstance(term, Struct):
                    for a in term.args:
                        scan(a)

            while grew:
                grew = False
                for atom in atoms(clause):
                    if atom.is_builtin:
                        continue
                    for i, arg in enumerate(atom.args):
                        if i in listy.get(atom.key, ()) and isinstance(arg, Var):
                            if arg not in list_vars:
                                list_vars.add(arg)
                                grew = True
                for atom in atoms(clause):
                    for arg in atom.args:
                        scan(arg)
            for atom in atoms(clause):
                if atom.is_builtin:
                    continue
                for i, arg in enumerate(atom.args):
                    if is_list_term(arg, list_vars):
                        if mark(atom.key, i):
                            changed = True
    return listy


_ELEMENT_NAMES = "ABCDEFGHIJKMNPQRSTUVW"


def canonical_program(program: Program) -> Program:
    """Rename every clause's variables to the stable scheme A, B, Ls, Ls1, ...

    List-valued variables (inferred from nil/cons usage) are named Ls, Ls1,
    Ls2, ...; the rest get A, B, C, ...  Deterministic, so pretty output is
    stable across runs and suitable for golden files and UI diffs.
    """
    listy = _listy_positions(program)
    out = []
    for clause in program.clauses:
        list_vars = set()

        def collect(atom):
            for i, arg in enumerate(atom.args):
                if isinstance(arg, Var) and not atom.is_builtin and i in listy.get(atom.key, ()):
                    list_vars.add(arg)

        def tails(term):
            if isinstance(term, Struct) and term.functor == "cons" and len(term.args) == 2:
                if isinstance(term.args[1], Var):
                    list_vars.add(term.args[1])
                tails(term.args[0])
                tails(term.args[1])
            elif isinstance(term, Struct):
                for a in term.args:
                    tails(a)

        collect(clause.head)
        for lit in clause.body:
            collect(lit)
            for a in lit.args:
                tails(a)
        for a in clause.head.args:
            tails(a)

        mapping: dict = {}
        n_list = 0
        n_elem = 0
        for v in clause.vars():
            if v in list_vars:
                fresh = Var("Ls") if n_list == 0 else Var(f"Ls{n_list}")
                n_list += 1
            else:
                if n_elem < len(_ELEMENT_NAMES):
                    fresh = Var(_ELEMENT_NAMES[n_elem])
                else:
                    fresh = Var(f"X{n_elem}")
                n_elem += 1
            mapping[v] = fresh
        from .kernel import Substitution

        out.append(Substitution(mapping).apply(clause))
    return Program(program.name, tuple(out), dict(program.provenance))


def format_program(program: Program, canonical: bool = True) -> str:
    shown = canonical_program(program) if canonical else program
    return "\n".join(format_clause(c) for c in shown.clauses) + ("\n" if shown.clauses else "")
