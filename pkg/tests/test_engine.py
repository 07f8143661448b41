import itertools

import pytest

from lpt import corpus
from lpt.engine import (
    LimitExceeded,
    NongroundBuiltin,
    SolveLimits,
    Solver,
    bounded_extension,
    solve,
)
from lpt.kernel import Atom, Var, int_list
from lpt.parser import format_term, parse_program, parse_query


def answers_for(result, var="X"):
    return {format_term(s.apply(Var(var))) for s in result.answers}


def brute_force_permutations(values):
    return {tuple(p) for p in itertools.permutations(values)}


def test_naive_sort_finds_the_sorted_permutation(naive_sort):
    # oracle: enumerate all permutations of [2,1], keep the ordered one
    expected = [p for p in brute_force_permutations((2, 1))
                if all(a <= b for a, b in zip(p, p[1:]))]
    assert expected == [(1, 2)]
    result = solve(naive_sort, parse_query("sort([2,1], X)"))
    assert answers_for(result) == {"[1, 2]"}
    assert result.exhausted


def test_perm1_enumerates_both_permutations(naive_sort):
    result = solve(naive_sort, parse_query("perm1([1,2], X)"))
    got = {tuple(int(t) for t in a.strip("[]").split(", ")) if a != "[]" else ()
           for a in answers_for(result)}
    assert got == brute_force_permutations((1, 2))


def test_ord1_rejects_descending(naive_sort):
    result = solve(naive_sort, parse_query("ord1([2,1])"))
    assert result.answers == []
    assert result.exhausted


def test_determinism(naive_sort):
    q = parse_query("sort([2,0,1], X)")
    r1 = solve(naive_sort, q)
    r2 = solve(naive_sort, q)
    assert r1.steps == r2.steps
    assert [str(a) for a in r1.answers] == [str(a) for a in r2.answers]


def test_answer_soundness_spot_check(naive_sort):
    # every answer, re-solved as a ground query, must succeed
    q = parse_query("sort([1,0,1], X)")
    result = solve(naive_sort, q)
    assert result.answers
    for s in result.answers:
        ground = [s.apply(g) for g in q]
        again = solve(naive_sort, ground)
        assert again.answers


def test_step_limit_reported_as_not_exhausted(naive_sort):
    result = solve(naive_sort, parse_query("sort([5,4,3,2,1], X)"),
                   SolveLimits(max_steps=20))
    assert not result.exhausted
    assert result.answers == []


def test_max_answers_limit(naive_sort):
    result = solve(naive_sort, parse_query("perm1([1,2,3], X)"),
                   SolveLimits(max_answers=2))
    assert len(result.answers) == 2
    assert not result.exhausted


def test_depth_limit():
    p = parse_program("loop(X) :- loop(X).")
    result = solve(p, parse_query("loop(1)"), SolveLimits(max_depth=50))
    assert result.answers == []
    assert not result.exhausted


def test_nonground_builtin_error():
    p = parse_program("bad(A, B) :- A =< B.")
    with pytest.raises(NongroundBuiltin) as err:
        solve(p, parse_query("bad(X, Y)"))
    assert err.value.literal.pred == "leq"


def test_eq_builtin_binds():
    p = parse_program("pick(A, B, C) :- A < B, C = A.")
    result = solve(p, parse_query("pick(1, 2, X)"))
    assert answers_for(result) == {"1"}


def test_neg_inf_comparisons():
    p = parse_program("below(A, B) :- A < B. weakly(A, B) :- A =< B.")
    assert solve(p, parse_query("below(neg_inf, 0)")).answers
    assert solve(p, parse_query("below(neg_inf, -5)")).answers
    assert not solve(p, parse_query("below(neg_inf, neg_inf)")).answers
    assert solve(p, parse_query("weakly(neg_inf, neg_inf)")).answers
    assert not solve(p, parse_query("below(0, neg_inf)")).answers


def test_findmin_uses_neg_inf():
    p = corpus.load_program("findmin")
    result = solve(p, parse_query("findmin(X, [])"))
    assert answers_for(result) == {"neg_inf"}
    result = solve(p, parse_query("findmin(X, [2,0,1])"))
    assert "0" in answers_for(result)


def test_bounded_extension_ord1_matches_brute_force(naive_sort, shared_cache):
    # oracle: check all 7 lists over {0,1} with length <= 2 in Python
    expected = set()
    for length in range(3):
        for combo in itertools.product((0, 1), repeat=length):
            if all(a <= b for a, b in zip(combo, combo[1:])):
                expected.add(Atom("ord1", (int_list(list(combo)),)))
    summary = bounded_extension(naive_sort, "ord1/1", {0, 1}, 2)
    assert summary.atoms == frozenset(expected)


def test_bounded_extension_naive_equals_tamaki_sato(naive_sort, shared_cache):
    ts = corpus.load_program("tamaki_sato")
    ext_naive = shared_cache.extension(naive_sort, "sort/2", {0, 1}, 2, SolveLimits())
    ext_ts = shared_cache.extension(ts, "sort_TS/2", {0, 1}, 2, SolveLimits())
    assert {a.args for a in ext_naive.atoms} == {a.args for a in ext_ts.atoms}


def test_bounded_extension_len_zero():
    p = parse_program("nil_only([]).")
    summary = bounded_extension(p, "nil_only/1", set(), 0)
    assert summary.atoms == frozenset({Atom("nil_only", (int_list([]),))})


def test_bounded_extension_limit_exceeded():
    p = parse_program("loop(X) :- loop(X). p([]) :- loop(1).")
    with pytest.raises(LimitExceeded):
        bounded_extension(p, "p/1", {0}, 1, SolveLimits(max_depth=30))


def test_monotone_step_growth_naive_vs_mergesort(naive_sort):
    msort = corpus.load_program("mergesort")
    naive_solver, msort_solver = Solver(naive_sort), Solver(msort)
    prev = 0
    for n in range(1, 7):
        goal = Atom("sort", (int_list(list(range(n, 0, -1))), Var("X")))
        r = naive_solver.solve((goal,), SolveLimits(max_answers=1))
        assert r.steps > prev
        prev = r.steps
        mgoal = Atom("msort", (int_list(list(range(n, 0, -1))), Var("X")))
        m = msort_solver.solve((mgoal,), SolveLimits(max_answers=1))
        if n >= 3:
            assert r.steps > m.steps


def test_limits_must_be_positive():
    with pytest.raises(ValueError):
        SolveLimits(max_depth=0)
    with pytest.raises(ValueError):
        SolveLimits(max_steps=-1)
