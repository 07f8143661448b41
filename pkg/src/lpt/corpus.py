"""Named corpus assets: programs, lemmas, and derivation scripts.

Programs ship as program-text files and scripts as JSON documents embedded in
the distribution; everything is parsed and validated on load.  The five
derivation names (tamaki_sato, insertion, selection, mergesort, quicksort)
exist both as a Script and as its expected-final Program, so entry names are
unique per kind, not globally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .kernel import KernelError, Program
from .parser import format_program, parse_program
from .verify import Lemma


class UnknownEntry(KernelError):
    pass


class AmbiguousEntry(KernelError):
    pass


PROGRAM = "program"
LEMMA = "lemma"
SCRIPT = "script"


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    kind: str
    payload: object  # Program | Lemma | dict (script document)


def _data_root():
    return resources.files("lpt") / "corpus_data"


def _program_names() -> list:
    names = [p.name[:-3] for p in _data_root().joinpath("programs").iterdir()
             if p.name.endswith(".pl")]
    return sorted(names)


def _script_names() -> list:
    names = [p.name[:-5] for p in _data_root().joinpath("scripts").iterdir()
             if p.name.endswith(".json")]
    return sorted(names)


def _lemma_docs() -> list:
    return json.loads(_data_root().joinpath("lemmas.json").read_text("utf-8"))


def list_entries(kind: Optional[str] = None) -> list:
    """Entry names in deterministic order, optionally filtered by kind."""
    out = []
    if kind in (None, PROGRAM):
        out.extend((name, PROGRAM) for name in _program_names())
    if kind in (None, LEMMA):
        out.extend((d["id"], LEMMA) for d in _lemma_docs())
    if kind in (None, SCRIPT):
        out.extend((name, SCRIPT) for name in _script_names())
    if kind is not None:
        return [name for name, _ in out]
    return out


def load_program(name: str) -> Program:
    path = _data_root() / "programs" / f"{name}.pl"
    try:
        text = path.read_text("utf-8")
    except FileNotFoundError:
        raise UnknownEntry(f"no corpus program named {name!r}") from None
    program = parse_program(text, name)
    # round-trip validation: pretty-print then reparse must be alpha-equivalent
    from .kernel import alpha_equivalent_programs

    reparsed = parse_program(format_program(program), name)
    if not alpha_equivalent_programs(program, reparsed):
        raise KernelError(f"corpus program {name!r} fails the parse round-trip")
    return program


def load_lemma(name: str) -> Lemma:
    for d in _lemma_docs():
        if d["id"] == name:
            return Lemma.from_dict(d)
    raise UnknownEntry(f"no corpus lemma named {name!r}")


def load_script(name: str) -> dict:
    path = _data_root() / "scripts" / f"{name}.json"
    try:
        text = path.read_text("utf-8")
    except FileNotFoundError:
        raise UnknownEntry(f"no corpus script named {name!r}") from None
    return json.loads(text)


def all_lemmas() -> list:
    return [Lemma.from_dict(d) for d in _lemma_docs()]


def load(name: str, kind: Optional[str] = None) -> CorpusEntry:
    """Resolve a named entry; pass ``kind`` when a name exists in more than
    one kind (the five derivations name both a script and a program)."""
    kinds = []
    if name in _program_names():
        kinds.append(PROGRAM)
    if any(d["id"] == name for d in _lemma_docs()):
        kinds.append(LEMMA)
    if name in _script_names():
        kinds.append(SCRIPT)
    if kind is not None:
        if kind not in kinds:
            raise UnknownEntry(f"no corpus {kind} named {name!r}")
        chosen = kind
    elif not kinds:
        raise UnknownEntry(f"no corpus entry named {name!r}")
    elif len(kinds) > 1:
        raise AmbiguousEntry(f"{name!r} names a {' and a '.join(kinds)}; pass kind=")
    else:
        chosen = kinds[0]
    if chosen == PROGRAM:
        return CorpusEntry(name, PROGRAM, load_program(name))
    if chosen == LEMMA:
        return CorpusEntry(name, LEMMA, load_lemma(name))
    return CorpusEntry(name, SCRIPT, load_script(name))


def export_to_directory(target: str) -> list:
    """Copy every corpus asset into ``target``; returns the written paths."""
    root = Path(target)
    (root / "programs").mkdir(parents=True, exist_ok=True)
    (root / "scripts").mkdir(parents=True, exist_ok=True)
    written = []
    for name in _program_names():
        text = (_data_root() / "programs" / f"{name}.pl").read_text("utf-8")
        path = root / "programs" / f"{name}.pl"
        path.write_text(text, "utf-8")
        written.append(str(path))
    lemmas = (_data_root() / "lemmas.json").read_text("utf-8")
    path = root / "lemmas.json"
    path.write_text(lemmas, "utf-8")
    written.append(str(path))
    for name in _script_names():
        text = (_data_root() / "scripts" / f"{name}.json").read_text("utf-8")
        path = root / "scripts" / f"{name}.json"
        path.write_text(text, "utf-8")
        written.append(str(path))
    return sorted(written)
