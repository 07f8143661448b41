import pytest

from lpt import corpus
from lpt.derivation import (
    BranchConflict,
    CandidateDrift,
    ReplayError,
    Script,
    apply_step,
    export_script,
    new_session,
    redo,
    replay,
    undo,
)
from lpt.kernel import alpha_equivalent_programs
from lpt.parser import format_program, parse_program
from lpt.rules import SEMANTICS_PRESERVING


def test_new_session_snapshot(naive_sort):
    s = new_session(naive_sort)
    assert len(s.history) == 1
    assert s.cursor == 0
    assert s.audit_pred == "sort/2"


def test_new_session_empty_program():
    s = new_session(parse_program(""))
    assert len(s.history) == 1
    assert s.current.clauses == ()


def test_apply_unfold_then_undo_redo(naive_sort):
    s = new_session(naive_sort)
    s2 = apply_step(s, {"rule": "unfold", "clause": "c1", "position": 0})
    assert len(s2.history) == 2 and s2.cursor == 1
    back = undo(s2)
    assert back.cursor == 0
    assert back.current is s2.history[0].program  # snapshots shared, not copied
    again = redo(back)
    assert again.current is s2.current


def test_apply_after_undo_is_branch_conflict(naive_sort):
    s = new_session(naive_sort)
    s2 = apply_step(s, {"rule": "unfold", "clause": "c1", "position": 0})
    back = undo(s2)
    with pytest.raises(BranchConflict):
        apply_step(back, {"rule": "unfold", "clause": "c2", "position": 0})


def test_reapplying_recorded_step_reproduces_snapshot(naive_sort):
    # rules are deterministic: the recorded step replayed from the same
    # state yields the identical snapshot
    s = new_session(naive_sort)
    step = {"rule": "unfold", "clause": "c1", "position": 0}
    s2 = apply_step(s, step)
    replayed = apply_step(new_session(naive_sort), step)
    assert format_program(replayed.current) == format_program(s2.current)


def test_verify_now_attaches_equal_diff(naive_sort):
    s = new_session(naive_sort, audit_domain={0, 1}, audit_max_len=2)
    s2 = apply_step(s, {"rule": "unfold", "clause": "c1", "position": 0},
                    verify_now=True)
    step = s2.history[1]
    assert step.application.safety == SEMANTICS_PRESERVING
    assert step.diff is not None and step.diff.verdict == "equal"


def test_rule_errors_propagate(naive_sort):
    s = new_session(naive_sort)
    from lpt.rules import IndexOutOfRange

    with pytest.raises(IndexOutOfRange):
        apply_step(s, {"rule": "unfold", "clause": "c1", "position": 9})


def test_candidate_drift_detected(naive_sort):
    s = new_session(naive_sort)
    s = apply_step(s, {"rule": "unfold", "clause": "c1", "position": 0})
    rec = next(c.id for c in s.current.clauses
               if c.head.key == "sort/2" and len(c.body) == 3)
    bad = {"rule": "introduce_goal", "clause": rec, "literal": "ord1(Ls2)",
           "position": 1,
           "candidate": {"rank": 1, "literal": "something_else(X)",
                         "folders": [{"source": "base", "clause": "c1"}]}}
    with pytest.raises(CandidateDrift):
        apply_step(s, bad)


def test_export_replay_round_trip(naive_sort):
    script = Script.from_dict(corpus.load_script("tamaki_sato"))
    result = replay(script)
    exported = export_script(result.session, "tamaki_sato",
                             base={"corpus": "naive_sort"},
                             expected_final="tamaki_sato")
    assert exported.steps == script.steps
    # replaying the export reproduces the identical final snapshot
    again = replay(exported)
    assert format_program(again.final) == format_program(result.final)
    # export/replay/export is a fixpoint
    exported2 = export_script(again.session, "tamaki_sato",
                              base={"corpus": "naive_sort"},
                              expected_final="tamaki_sato")
    assert exported2 == exported


def test_export_fresh_session_is_empty(naive_sort):
    s = new_session(naive_sort)
    assert export_script(s).steps == ()


def test_script_json_round_trip_bit_exact():
    script = Script.from_dict(corpus.load_script("mergesort"))
    text = script.to_json()
    assert Script.from_json(text) == script
    assert Script.from_json(text).to_json() == text


def test_replay_reports_failing_step_index(naive_sort):
    script = Script("broken", {"corpus": "naive_sort"},
                    ({"rule": "unfold", "clause": "c1", "position": 0},
                     {"rule": "unfold", "clause": "c1", "position": 0}), None)
    with pytest.raises(ReplayError) as err:
        replay(script)
    assert err.value.step_index == 1


def test_replay_empty_script_returns_base(naive_sort):
    script = Script("empty", {"corpus": "naive_sort"}, (), None)
    result = replay(script)
    assert alpha_equivalent_programs(result.final, naive_sort)
    assert result.matches_expected is None


def test_replay_determinism():
    script = Script.from_dict(corpus.load_script("selection"))
    a = replay(script)
    b = replay(script)
    assert format_program(a.final) == format_program(b.final)
    assert [x.rule for x in a.log] == [x.rule for x in b.log]


def test_undo_never_mutates_snapshots(naive_sort):
    s = new_session(naive_sort)
    s2 = apply_step(s, {"rule": "unfold", "clause": "c1", "position": 0})
    before = format_program(s2.history[1].program)
    undo(s2)
    redo(undo(s2))
    assert format_program(s2.history[1].program) == before
