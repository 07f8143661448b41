import pytest

from lpt import corpus
from lpt.abduce import (
    NoPartialMatch,
    plain_complement,
    rank_candidates,
    weak_predicates,
)
from lpt.derivation import apply_step, new_session
from lpt.parser import format_literal, parse_program
from lpt.rules import FolderRef


def folder_pairs(session, *refs):
    return [(r, session.resolve_folder(r)) for r in refs]


# ---------------------------------------------------------------------------
# plain complements
# ---------------------------------------------------------------------------


def test_plain_complement_single_missing():
    p = parse_program("p :- q, t. s :- q, r.")
    got = plain_complement(p.clause("c1"), [0], p.clause("c2"))
    assert len(got) == 1
    assert [format_literal(m) for m in got[0].missing] == ["r"]


def test_plain_complement_preserves_target_terms():
    p = parse_program(
        "top(Ls1, Ls3) :- perm1(Ls1, Ls2), insert(A, Ls2, Ls3), ord1(Ls3)."
        "sorty(L, M) :- perm1(L, M), ord1(M).")
    got = plain_complement(p.clause("c1"), [0], p.clause("c2"))
    assert [format_literal(m) for c in got for m in c.missing] == ["ord1(Ls2)"]


def test_plain_complement_full_match_is_empty():
    p = parse_program("p :- q, r. s :- q, r.")
    got = plain_complement(p.clause("c1"), [0, 1], p.clause("c2"))
    assert got[0].missing == ()


def test_plain_complement_empty_selection_gives_whole_body():
    p = parse_program("p :- t. s :- q, r.")
    got = plain_complement(p.clause("c1"), [], p.clause("c2"))
    assert [format_literal(m) for m in got[0].missing] == ["q", "r"]


def test_plain_complement_no_partial_match():
    p = parse_program("p :- t. s :- q, r.")
    with pytest.raises(NoPartialMatch):
        plain_complement(p.clause("c1"), [0], p.clause("c2"))


# ---------------------------------------------------------------------------
# ranking
# ---------------------------------------------------------------------------


def test_successful_path_preference():
    # candidates r (via folder s) and m (via folder u); r must rank first
    # because the query <- r succeeds while <- m fails
    base = parse_program("p :- q, t. s :- q, r. u :- m, t. r. q. t.")
    session = new_session(base)
    folders = folder_pairs(session, FolderRef("base", "c2"), FolderRef("base", "c3"))
    ranked = rank_candidates(session.current, session.base, "c1", folders)
    names = [c.fingerprint() for c in ranked]
    assert names[0] == "r"
    assert "m" in names
    assert ranked[0].scores.successful_path
    assert not next(c for c in ranked if c.fingerprint() == "m").scores.successful_path


def test_unmatched_folder_variables_stay_fresh_and_demote():
    # the complement literal keeps the folder's unmatched variable fresh;
    # tying it to an existing variable is the human's call (edit the literal
    # before introducing it), so the raw candidate is demoted as unlinked
    base = parse_program(
        "p(X, Y) :- q(X), r(Y). q(X) :- s(X). r(Y) :- t(Y)."
        "m(X, Y) :- q(X), l(Y). n(X, Y) :- o(X), r(Y)."
        "s(1). t(1). l(1). o(1).")
    session = new_session(base)
    folders = folder_pairs(session, FolderRef("base", "c4"))
    ranked = rank_candidates(session.current, session.base, "c1", folders)
    top = ranked[0]
    assert top.literal.pred == "l"
    assert top.scores.unlinked
    assert top.scores.variable_coordination == 0
    # coordinating the variable by hand still enables the fold
    from lpt.parser import parse_literal
    from lpt.rules import fold, introduce_goal

    p2, _ = introduce_goal(session.current, "c1", parse_literal("l(B)"), 1)
    folded, _ = fold(p2, "c1", [0, 1], session.resolve_folder(FolderRef("base", "c4")))
    assert any(l.key == "m/2" for l in folded.clause("c1").body)


def test_tamaki_sato_state_ranks_order_check_first(naive_sort):
    session = new_session(naive_sort)
    session = apply_step(session, {"rule": "unfold", "clause": "c1", "position": 0})
    rec = next(c.id for c in session.current.clauses
               if c.head.key == "sort/2" and len(c.body) == 3)
    folders = folder_pairs(session, FolderRef("base", "c1"))
    ranked = rank_candidates(session.current, session.base, rec, folders)
    top = ranked[0]
    assert top.fingerprint() == "ord1(Ls2)"
    assert top.scores.well_founded
    assert top.scores.successful_path
    assert top.insert_position == 1


def test_every_candidate_enables_its_fold(naive_sort):
    from lpt.rules import fold, introduce_goal

    session = new_session(naive_sort)
    session = apply_step(session, {"rule": "unfold", "clause": "c1", "position": 0})
    rec = next(c.id for c in session.current.clauses
               if c.head.key == "sort/2" and len(c.body) == 3)
    folders = folder_pairs(session, FolderRef("base", "c1"))
    for cand in rank_candidates(session.current, session.base, rec, folders):
        p2, _ = introduce_goal(session.current, rec, cand.literal, cand.insert_position)
        folder = session.resolve_folder(cand.folder)
        fold(p2, rec, list(cand.fold_positions), folder)  # must not raise


def test_ranking_is_deterministic(naive_sort):
    session = new_session(naive_sort)
    session = apply_step(session, {"rule": "unfold", "clause": "c1", "position": 0})
    rec = next(c.id for c in session.current.clauses
               if c.head.key == "sort/2" and len(c.body) == 3)
    folders = folder_pairs(session, FolderRef("base", "c1"))
    a = [c.to_dict() for c in rank_candidates(session.current, session.base, rec, folders)]
    b = [c.to_dict() for c in rank_candidates(session.current, session.base, rec, folders)]
    assert a == b


def test_no_folders_no_candidates(naive_sort):
    session = new_session(naive_sort)
    assert rank_candidates(session.current, session.base, "c1", []) == []


# ---------------------------------------------------------------------------
# weak predicates
# ---------------------------------------------------------------------------


def test_weak_undefined_propagates():
    p = parse_program("p :- q.")
    assert weak_predicates(p) == {"q/0", "p/0"}


def test_weak_none_when_grounded():
    p = parse_program("p :- q. q.")
    assert weak_predicates(p) == set()


def test_builtins_never_weak():
    p = parse_program("p(X) :- X =< 1.")
    assert weak_predicates(p) == set()


def test_corpus_programs_have_no_weak_predicates():
    for name in corpus.list_entries("program"):
        program = corpus.load_program(name)
        assert weak_predicates(program) == set(), name


def test_weak_predicates_have_empty_extensions():
    from lpt.engine import bounded_extension

    p = parse_program("p :- q. r(1).")
    weak = weak_predicates(p)
    assert weak == {"q/0", "p/0"}
    for pred in weak:
        if p.clauses_for(pred):  # undefined predicates have nothing to query
            assert bounded_extension(p, pred, {0, 1}, 2).atoms == frozenset()


def test_occam_classification(naive_sort):
    from lpt.abduce import classify_candidate

    session = new_session(naive_sort)
    session = apply_step(session, {"rule": "unfold", "clause": "c1", "position": 0})
    rec = next(c.id for c in session.current.clauses
               if c.head.key == "sort/2" and len(c.body) == 3)
    folders = folder_pairs(session, FolderRef("base", "c1"))
    ranked = rank_candidates(session.current, session.base, rec, folders)
    top = ranked[0]  # ord1(Ls2): implied by the context, so deducible
    assert classify_candidate(session.current, rec, top) == "deducible"

    # an unsatisfiable literal classifies as contradictory
    from dataclasses import replace
    from lpt.parser import parse_literal

    broken = replace(top, literal=parse_literal("1 < 0"), insert_position=1)
    assert classify_candidate(session.current, rec, broken) == "contradictory"

    # a duplicate of an existing conjunct is subsumed
    dup = replace(top, literal=session.current.clause(rec).body[0])
    assert classify_candidate(session.current, rec, dup) == "subsumed"
