import pytest

from lpt import corpus
from lpt.engine import SolveLimits
from lpt.kernel import Atom, int_list
from lpt.parser import parse_literal, parse_program
from lpt.verify import (
    Lemma,
    VerifyError,
    check_lemma,
    compare_extensions,
    format_profile_table,
    step_profile,
)

DOMAIN = {0, 1, 2}


def test_insert_property_holds(lemma_env, shared_cache):
    verdict = check_lemma(corpus.load_lemma("insert"), lemma_env, DOMAIN, 3,
                          cache=shared_cache)
    assert verdict.holds
    assert verdict.counterexamples == []


def test_merging_property_holds_small_bounds(lemma_env, shared_cache):
    verdict = check_lemma(corpus.load_lemma("merging"), lemma_env, {0, 1}, 3,
                          cache=shared_cache)
    assert verdict.holds


def test_corrupted_lemma_fails_with_counterexample(lemma_env, shared_cache):
    # minlist with swapped arguments cannot follow from orderedness
    bad = Lemma("bad",
                (parse_literal("append([A], Ls1, Ls2)"),),
                (parse_literal("ord1(Ls2)"),),
                (parse_literal("minlist(Ls1, A)"),),
                "implication")
    verdict = check_lemma(bad, lemma_env, {0, 1}, 2, cache=shared_cache)
    assert not verdict.holds
    assert verdict.counterexamples


def test_lemma_requires_defined_predicates(shared_cache):
    p = parse_program("p(1).")
    with pytest.raises(VerifyError):
        check_lemma(corpus.load_lemma("insert"), p, {0, 1}, 2, cache=shared_cache)


def test_rhs_variable_invention_rejected():
    with pytest.raises(VerifyError):
        Lemma("bad", (), (parse_literal("p(X)"),), (parse_literal("q(Y)"),),
              "implication")


def test_compare_equal_reflexive(naive_sort, shared_cache):
    diff = compare_extensions(naive_sort, naive_sort, "sort/2", {0, 1}, 2,
                              cache=shared_cache)
    assert diff.verdict == "equal"
    assert not diff.imploded


def test_compare_naive_vs_tamaki_sato_equal(naive_sort, shared_cache):
    ts = corpus.load_program("tamaki_sato")
    diff = compare_extensions(naive_sort, ts, "sort/2", DOMAIN, 3,
                              pred_after="sort_TS/2", cache=shared_cache)
    assert diff.verdict == "equal"


def test_compare_is_antisymmetric(naive_sort, shared_cache):
    from lpt.rules import delete_goal

    widened, _ = delete_goal(naive_sort, "c1", 1)  # drop the order check
    d1 = compare_extensions(naive_sort, widened, "sort/2", {0, 1}, 2,
                            cache=shared_cache)
    d2 = compare_extensions(widened, naive_sort, "sort/2", {0, 1}, 2,
                            cache=shared_cache)
    assert d1.verdict == "widened" and d2.verdict == "thinned"
    assert d1.extra == d2.missing and d1.missing == d2.extra


def test_deleting_order_check_widens_to_all_permutations(naive_sort, shared_cache):
    from lpt.rules import delete_goal

    widened, _ = delete_goal(naive_sort, "c1", 1)
    diff = compare_extensions(naive_sort, widened, "sort/2", {0, 1}, 2,
                              cache=shared_cache)
    # the unsorted pair [1,0] -> [0,1] is already present; what appears is
    # every non-sorted permutation image like sort([1,0],[1,0])
    assert Atom("sort", (int_list([1, 0]), int_list([1, 0]))) in diff.extra


def test_unsatisfiable_introduction_implodes(naive_sort, shared_cache):
    from lpt.rules import introduce_goal

    thinned, _ = introduce_goal(naive_sort, "c1", parse_literal("1 < 0"), 2)
    diff = compare_extensions(naive_sort, thinned, "sort/2", {0, 1}, 2,
                              cache=shared_cache)
    assert diff.verdict == "thinned"
    assert diff.imploded


def test_idempotent_introduction_keeps_extension(naive_sort, shared_cache):
    from lpt.parser import canonical_program
    from lpt.rules import introduce_goal

    base = canonical_program(naive_sort)  # sort(Ls, Ls1) :- perm1(Ls, Ls1), ord1(Ls1).
    doubled, _ = introduce_goal(base, "c1", parse_literal("ord1(Ls1)"), 2)
    clause = doubled.clause("c1")
    assert [l.key for l in clause.body].count("ord1/1") == 2
    assert clause.body[1] == clause.body[2]
    diff = compare_extensions(base, doubled, "sort/2", {0, 1}, 2,
                              cache=shared_cache)
    assert diff.verdict == "equal"


# ---------------------------------------------------------------------------
# step profiles
# ---------------------------------------------------------------------------


def test_step_profile_rows(naive_sort):
    profile = step_profile(naive_sort, "sort/2", [1, 2, 3])
    assert [r.n for r in profile.rows] == [1, 2, 3]
    assert all(r.steps > 0 and r.answers == 1 and not r.censored
               for r in profile.rows)
    assert profile.rows[0].steps < profile.rows[2].steps


def test_step_profile_censors_on_limits(naive_sort):
    profile = step_profile(naive_sort, "sort/2", [6],
                           SolveLimits(max_steps=50))
    assert profile.rows[0].censored


def test_step_profile_requires_ascending_sizes(naive_sort):
    with pytest.raises(VerifyError):
        step_profile(naive_sort, "sort/2", [3, 1])


def test_profile_table_formatting(naive_sort):
    table = format_profile_table([step_profile(naive_sort, "sort/2", [1, 2])])
    lines = table.splitlines()
    assert lines[0].split() == ["program", "n", "steps", "answers", "censored"]
    assert "naive_sort" in lines[2]


def test_step_profile_size_zero(naive_sort):
    profile = step_profile(naive_sort, "sort/2", [0])
    row = profile.rows[0]
    assert row.n == 0 and row.answers == 1 and not row.censored
    assert row.steps <= 5  # the empty list sorts in a handful of steps


def test_lemma_sides_must_be_nonempty():
    with pytest.raises(VerifyError):
        Lemma("bad", (), (), (parse_literal("p(X)"),), "implication")
    with pytest.raises(VerifyError):
        Lemma("bad", (), (parse_literal("p(X)"),), (), "implication")
