"""Command-line entry point.

Subcommands: run (solve a query), replay (run a derivation script), verify
(lemma or extension comparison), bench (step profiles, optionally rendered),
candidates (ranked abductive candidates), corpus (list/show/export assets),
serve (HTTP session API).

Exit codes: 0 success, 1 step or verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import corpus
from .engine import LimitExceeded, SolveLimits, Solver
from .kernel import KernelError, Program
from .parser import ParseError, format_program, format_term, parse_program, parse_query
from .verify import check_lemma, compare_extensions, step_profile

SORTERS = {
    "naive_sort": "sort/2",
    "tamaki_sato": "sort_TS/2",
    "insertion": "inssort/2",
    "selection": "selsort/2",
    "mergesort": "msort/2",
    "quicksort": "qsort/2",
}


@dataclass
class CommandResult:
    exit_code: int
    stdout_payload: str
    diagnostics: list = field(default_factory=list)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _limits(args) -> SolveLimits:
    return SolveLimits(args.max_depth, args.max_steps, args.max_answers)


def _domain(text: str) -> frozenset:
    try:
        return frozenset(int(x) for x in text.split(",") if x.strip() != "")
    except ValueError:
        raise _UsageError(f"bad domain {text!r}; expected comma-separated integers")


def _load_program(ref: str) -> Program:
    path = Path(ref)
    if ref.endswith(".pl") or path.exists():
        return parse_program(path.read_text("utf-8"), path.stem)
    return corpus.load_program(ref)


def _common_flags(parser, suppress: bool):
    # shared flags are accepted both before and after the subcommand; a
    # value given after the subcommand wins
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--format", choices=["text", "json"],
                        default=d if suppress else "text")
    parser.add_argument("--domain", default=d if suppress else "0,1,2",
                        help="verification domain, e.g. 0,1,2")
    parser.add_argument("--max-list-len", type=int, default=d if suppress else 3)
    parser.add_argument("--max-depth", type=int, default=d if suppress else 10_000)
    parser.add_argument("--max-steps", type=int, default=d if suppress else 5_000_000)
    parser.add_argument("--max-answers", type=int, default=d if suppress else 10_000)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="lpt", description=__doc__)
    _common_flags(top, suppress=False)
    common = _Parser(add_help=False)
    _common_flags(common, suppress=True)
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="solve a query against a program",
                         parents=[common])
    run.add_argument("program", help="corpus program name or .pl file")
    run.add_argument("-q", "--query", required=True)

    rep = sub.add_parser("replay", help="replay a derivation script", parents=[common])
    rep.add_argument("script")
    rep.add_argument("--verify", action="store_true",
                     help="attach extension diffs to every step")

    ver = sub.add_parser("verify", help="check lemmas or compare extensions")
    versub = ver.add_subparsers(dest="verify_what", required=True, parser_class=_Parser)
    vl = versub.add_parser("lemma", parents=[common])
    vl.add_argument("name", nargs="?", help="lemma id; default: all")
    vl.add_argument("--program", default="lemma_env")
    vc = versub.add_parser("compare", parents=[common])
    vc.add_argument("--before", required=True)
    vc.add_argument("--after", required=True)
    vc.add_argument("--pred", required=True)
    vc.add_argument("--pred-after", default=None)

    bench = sub.add_parser("bench", help="step profiles on reversed inputs", parents=[common])
    bench.add_argument("programs", nargs="*", default=[],
                       help=f"default: {' '.join(SORTERS)}")
    bench.add_argument("--sizes", default="1,2,3,4,5,6")
    bench.add_argument("--plot", help="render a figure to this path (png/pdf/svg)")
    bench.add_argument("--csv", help="write rows to this CSV path")
    bench.add_argument("--json-out", help="write rows to this JSON path")

    cand = sub.add_parser("candidates", help="ranked abductive candidates", parents=[common])
    cand.add_argument("--script", help="corpus script providing the state")
    cand.add_argument("--at", type=int, default=None,
                      help="rank at the state before this step index")
    cand.add_argument("--program", help="program (with --clause) instead of a script")
    cand.add_argument("--clause")
    cand.add_argument("--folders", default="base:c1",
                      help="comma list of source:clause refs, e.g. base:c1")
    cand.add_argument("--classify", action="store_true",
                      help="attach the advisory contribution class per candidate "
                           "(deducible/subsumed/contradictory/underivable)")

    corp = sub.add_parser("corpus", help="list, show, or export corpus assets")
    corpsub = corp.add_subparsers(dest="corpus_what", required=True, parser_class=_Parser)
    corpsub.add_parser("list", parents=[common])
    cs = corpsub.add_parser("show", parents=[common])
    cs.add_argument("name")
    cs.add_argument("--kind", choices=["program", "lemma", "script"], default=None)
    ce = corpsub.add_parser("export", parents=[common])
    ce.add_argument("directory")

    serve = sub.add_parser("serve", help="start the HTTP session API", parents=[common])
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int,
                       default=int(os.environ.get("LPT_PORT", "8731")))
    return top


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def _cmd_run(args) -> CommandResult:
    program = _load_program(args.program)
    try:
        goals = parse_query(args.query)
    except ParseError as e:
        return CommandResult(2, "", [f"query syntax error: {e}"])
    try:
        result = Solver(program).solve(goals, _limits(args))
    except KernelError as e:
        return CommandResult(1, "", [str(e)])
    qvars: list = []
    from .kernel import term_vars

    for g in goals:
        for a in g.args:
            term_vars(a, qvars)
    if args.format == "json":
        payload = {
            "answers": [{v.display(): format_term(s.apply(v)) for v in qvars}
                        for s in result.answers],
            "steps": result.steps,
            "exhausted": result.exhausted,
        }
        return CommandResult(0, json.dumps(payload, indent=2))
    lines = []
    if not result.answers:
        lines.append("no")
    for s in result.answers:
        if qvars:
            lines.append(", ".join(f"{v.display()} = {format_term(s.apply(v))}"
                                   for v in qvars))
        else:
            lines.append("yes")
    lines.append(f"% {len(result.answers)} answer(s), {result.steps} steps, "
                 f"exhausted={str(result.exhausted).lower()}")
    return CommandResult(0, "\n".join(lines))


def _cmd_replay(args) -> CommandResult:
    from .derivation import ReplayError, Script, replay

    script = Script.from_dict(corpus.load_script(args.script))
    try:
        result = replay(script, verify_now=args.verify,
                        audit_domain=_domain(args.domain) if args.verify else frozenset({0, 1}))
    except ReplayError as e:
        return CommandResult(1, "", [str(e)])
    lines = [f"replayed {args.script}: {len(result.log)} steps"]
    if args.verify:
        for i, step in enumerate(result.session.history[1:]):
            diff = step.diff
            lines.append(f"  step {i:2d} {step.application.rule:<17} "
                         f"{step.application.safety:<22} {diff.verdict if diff else '-'}")
    if result.matches_expected is not None:
        lines.append(f"matches expected: {str(result.matches_expected).lower()}")
    if args.format == "json":
        payload = {
            "script": args.script,
            "steps": len(result.log),
            "matches_expected": result.matches_expected,
            "final": format_program(result.final),
        }
        if args.verify:
            payload["audit"] = [
                {"rule": s.application.rule, "safety": s.application.safety,
                 "diff": s.diff.to_dict() if s.diff else None}
                for s in result.session.history[1:]]
        return CommandResult(0 if result.matches_expected is not False else 1,
                             json.dumps(payload, indent=2))
    code = 0 if result.matches_expected is not False else 1
    return CommandResult(code, "\n".join(lines))


def _cmd_verify(args) -> CommandResult:
    domain = _domain(args.domain)
    limits = _limits(args)
    if args.verify_what == "lemma":
        program = _load_program(args.program)
        names = [args.name] if args.name else corpus.list_entries("lemma")
        lines = []
        failures = 0
        payload = []
        from .verify import ExtensionCache

        cache = ExtensionCache()
        for name in names:
            lemma = corpus.load_lemma(name)
            verdict = check_lemma(lemma, program, domain, args.max_list_len,
                                  limits, cache=cache)
            status = "holds" if verdict.holds else "FAILS"
            lines.append(f"{name:<18} {status}  ({verdict.instances_checked} instances, "
                         f"{len(verdict.counterexamples)} counterexamples)")
            payload.append({"lemma": name, "holds": verdict.holds,
                            "instances": verdict.instances_checked,
                            "counterexamples": [str(c) for c in verdict.counterexamples[:5]]})
            if not verdict.holds:
                failures += 1
                for c in verdict.counterexamples[:3]:
                    lines.append(f"    counterexample: {c}")
        code = 0 if failures == 0 else 1
        if args.format == "json":
            return CommandResult(code, json.dumps(payload, indent=2))
        return CommandResult(code, "\n".join(lines))

    before = _load_program(args.before)
    after = _load_program(args.after)
    try:
        diff = compare_extensions(before, after, args.pred, domain,
                                  args.max_list_len, limits,
                                  pred_after=args.pred_after)
    except LimitExceeded as e:
        return CommandResult(1, "", [str(e)])
    if args.format == "json":
        return CommandResult(0 if diff.verdict == "equal" else 1,
                             json.dumps(diff.to_dict(), indent=2))
    lines = [f"verdict: {diff.verdict}  (imploded={str(diff.imploded).lower()})",
             f"missing: {len(diff.missing)}", f"extra: {len(diff.extra)}"]
    for a in sorted(map(repr, diff.missing))[:10]:
        lines.append(f"  - {a}")
    for a in sorted(map(repr, diff.extra))[:10]:
        lines.append(f"  + {a}")
    return CommandResult(0 if diff.verdict == "equal" else 1, "\n".join(lines))


def _cmd_bench(args) -> CommandResult:
    from .report import (format_profile_table, render_profile_figure,
                         write_profile_csv, write_profile_json)

    names = args.programs or list(SORTERS)
    sizes = [int(x) for x in args.sizes.split(",")]
    limits = _limits(args)
    profiles = []
    diagnostics = []
    for name in names:
        program = _load_program(name)
        pred = SORTERS.get(name)
        if pred is None:
            first = program.clauses[0].head
            pred = first.key
        profiles.append(step_profile(program, pred, sizes, limits))
    for p in profiles:
        for r in p.rows:
            if r.censored:
                diagnostics.append(f"{p.program} n={r.n}: censored (limits hit)")
    outputs = []
    if args.csv:
        outputs.append(write_profile_csv(profiles, args.csv))
    if args.json_out:
        outputs.append(write_profile_json(profiles, args.json_out))
    if args.plot:
        outputs.append(render_profile_figure(profiles, args.plot))
    if args.format == "json":
        payload = [row for p in profiles for row in p.to_rows()]
        return CommandResult(0, json.dumps(payload, indent=2), diagnostics)
    text = format_profile_table(profiles)
    if outputs:
        text += "\n" + "\n".join(f"wrote {o}" for o in outputs)
    return CommandResult(0, text, diagnostics)


def _cmd_candidates(args) -> CommandResult:
    from .abduce import rank_candidates
    from .derivation import Script, apply_step, new_session
    from .rules import FolderRef

    if args.script:
        doc = corpus.load_script(args.script)
        script = Script.from_dict(doc)
        at = args.at
        if at is None:
            at = next((i for i, s in enumerate(script.steps) if "candidate" in s),
                      len(script.steps))
        from .derivation import resolve_base

        session = new_session(resolve_base(script.base, corpus.load_program),
                              f"candidates:{args.script}")
        for step in script.steps[:at]:
            session = apply_step(session, step)
        if at < len(script.steps) and "candidate" in script.steps[at]:
            step = script.steps[at]
            clause = step["clause"]
            refs = [FolderRef.from_dict(d) for d in step["candidate"]["folders"]]
        elif args.clause:
            clause = args.clause
            refs = [FolderRef(*r.split(":")) for r in args.folders.split(",")]
        else:
            return CommandResult(2, "", [f"step {at} of {args.script} has no candidate "
                                         "block; pass --clause"])
    elif args.program and args.clause:
        session = new_session(_load_program(args.program), "candidates")
        clause = args.clause
        refs = [FolderRef(*r.split(":")) for r in args.folders.split(",")]
    else:
        return CommandResult(2, "", ["pass --script or both --program and --clause"])

    folders = [(r, session.resolve_folder(r)) for r in refs]
    ranked = rank_candidates(session.current, session.base, clause, folders,
                             limits=_limits(args))
    classes = {}
    if getattr(args, "classify", False):
        from .abduce import classify_candidate

        classes = {id(c): classify_candidate(session.current, clause, c,
                                             _domain(args.domain),
                                             min(args.max_list_len, 2))
                   for c in ranked}
    if args.format == "json":
        payload = []
        for c in ranked:
            doc = c.to_dict()
            if classes:
                doc["contribution"] = classes[id(c)]
            payload.append(doc)
        return CommandResult(0, json.dumps(payload, indent=2))
    lines = [f"clause {clause}: {len(ranked)} candidate(s)"]
    for c in ranked:
        s = c.scores
        marks = "".join([
            "F" if s.enables_fold else "-",
            "W" if s.well_founded else "-",
            "S" if s.successful_path else "-",
        ])
        lines.append(f"  #{c.rank} {c.fingerprint():<24} [{marks}] "
                     f"coord={s.variable_coordination} size={s.size_penalty}"
                     + (f"  class={classes[id(c)]}" if classes else "")
                     + ("  (unlinked)" if s.unlinked else "")
                     + ("  (petitio)" if s.petitio_demoted else ""))
    return CommandResult(0, "\n".join(lines))


def _cmd_corpus(args) -> CommandResult:
    if args.corpus_what == "list":
        entries = corpus.list_entries()
        if args.format == "json":
            return CommandResult(0, json.dumps([{"name": n, "kind": k}
                                                for n, k in entries], indent=2))
        return CommandResult(0, "\n".join(f"{k:<8} {n}" for n, k in entries))
    if args.corpus_what == "show":
        entry = corpus.load(args.name, args.kind)
        if entry.kind == corpus.PROGRAM:
            return CommandResult(0, format_program(entry.payload))
        if entry.kind == corpus.SCRIPT:
            return CommandResult(0, json.dumps(entry.payload, indent=2, sort_keys=True))
        lemma = entry.payload
        arrow = "<=>" if lemma.kind == "equivalence" else "=>"
        from .parser import format_literal

        side = " & ".join(map(format_literal, lemma.side_conditions)) or "true"
        return CommandResult(0, f"[{side}]  " +
                             " & ".join(map(format_literal, lemma.lhs)) +
                             f"  {arrow}  " +
                             " & ".join(map(format_literal, lemma.rhs)))
    written = corpus.export_to_directory(args.directory)
    return CommandResult(0, "\n".join(written))


def _cmd_serve(args) -> CommandResult:
    from .server import serve_forever

    serve_forever(args.host, args.port)
    return CommandResult(0, "")


def dispatch(argv) -> CommandResult:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        return CommandResult(2, "", [f"usage error: {e}"])
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "replay":
            return _cmd_replay(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "candidates":
            return _cmd_candidates(args)
        if args.command == "corpus":
            return _cmd_corpus(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except _UsageError as e:
        return CommandResult(2, "", [f"usage error: {e}"])
    except ParseError as e:
        return CommandResult(2, "", [f"syntax error: {e}"])
    except corpus.UnknownEntry as e:
        return CommandResult(2, "", [str(e)])
    except KernelError as e:
        return CommandResult(1, "", [str(e)])
    return CommandResult(2, "", ["unknown command"])


def main(argv=None) -> int:
    result = dispatch(sys.argv[1:] if argv is None else argv)
    if result.stdout_payload:
        print(result.stdout_payload)
    for line in result.diagnostics:
        print(line, file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
