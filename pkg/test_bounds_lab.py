import math

import numpy as np
import pytest

from bounds_lab import (Epsilon, check_bl_theorem, check_gluing_sandwich, check_local_main_theorem,
                        check_main_theorem, check_nonstar_bound, check_theorem2,
                        check_wye_degree_bound, cut_deltas, depth_two_wye_count,
                        gluing_sandwich_reports, glued_profile_distances, resolve_checker,
                        search_equality_trees, sweep, theorem2_on_millipedes, wye_exponent_ratio)
from corpus_io import load_corpus
from profile_engine import (KProfile, Profile5, UndefinedProfileError, centered_counts, k_profile,
                            profile5_fast)
from tree_core import (PreconditionError, caterpillar, depth_two_tree, path_tree, random_tree,
                       star_tree, wye_tree)


@pytest.fixture(scope="module")
def small_trees():
    return load_corpus("exhaustive:12")


@pytest.fixture(scope="module")
def random_trees():
    return load_corpus("random:10000:1-60:2024")


# Y <= 9S + P + 6 and Y <= 36S + P + 4

def test_main_theorem_examples():
    report = check_main_theorem(path_tree(5))
    assert (report.lhs, report.rhs, report.slack, report.holds) == (0, 7, 7, True)
    assert check_main_theorem(star_tree(4)).slack == 15


def test_bl_theorem_examples():
    assert check_bl_theorem(path_tree(5)).slack == 5
    assert check_bl_theorem(wye_tree()).slack == 3


@pytest.mark.parametrize("n", range(2, 11))
def test_main_theorem_is_tight_on_degree_four_caterpillars(n):
    t = caterpillar([4] * n)
    assert profile5_fast(t) == Profile5(9 * (n - 2), n, 18 * (n - 1))
    assert check_main_theorem(t).slack == 6


def test_both_theorems_hold_exhaustively(small_trees):
    for t in small_trees:
        main = check_main_theorem(t)
        bl = check_bl_theorem(t)
        assert main.holds and bl.holds
        assert bl.slack - main.slack == 27 * profile5_fast(t).S - 2


@pytest.mark.parametrize("checker", [check_main_theorem, check_bl_theorem, check_wye_degree_bound],
                         ids=["main", "bl", "wye"])
def test_bounds_hold_on_both_corpora(checker, small_trees, random_trees):
    for trees in (small_trees, random_trees):
        reports = sweep(checker, trees)
        assert len(reports) == len(trees)
        assert all(r.holds for r in reports)


def test_report_row_carries_tree_summary():
    row = check_main_theorem(star_tree(4)).to_row(3)
    assert row["index"] == 3
    assert row["n"] == 5
    assert row["max_degree"] == 4
    assert row["degree_histogram"] == "1:4;4:1"


# Local form

def test_local_form_sums_to_the_main_theorem():
    for t in load_corpus("exhaustive:9"):
        if t.n < 3:
            continue
        degrees = t.degrees()
        parts = centered_counts(t)
        total = 0
        for v in range(t.n):
            if degrees[v] <= 1:
                continue
            gamma = 2 - sum(1 for u in t.adjacency[v] if degrees[u] > 1)
            total += 9 * parts[v].S + parts[v].P - parts[v].Y + 3 * gamma
        assert total == check_main_theorem(t).slack


def test_local_form_holds_where_it_applies():
    checked = 0
    for t in load_corpus("exhaustive:12"):
        if t.max_degree() > 4 or 2 in t.degrees():
            continue
        assert check_local_main_theorem(t).holds
        checked += 1
    assert checked > 10


def test_local_form_preconditions():
    with pytest.raises(PreconditionError):
        check_local_main_theorem(path_tree(5))
    with pytest.raises(PreconditionError):
        check_local_main_theorem(star_tree(5))


# Non-star and wye bounds

@pytest.mark.parametrize("k", range(3, 65))
def test_epsilon_range(k):
    eps = Epsilon(k)
    assert k - 2 < eps.value < k - 1
    assert eps.alpha * (k - 2) == pytest.approx(k - 2 + 1 / eps.alpha)


def test_epsilon_needs_k_at_least_three():
    with pytest.raises(PreconditionError):
        Epsilon(2)


def test_nonstar_bound_examples():
    report = check_nonstar_bound(star_tree(9), 5)
    assert report.lhs == 0 and report.holds
    report = check_nonstar_bound(path_tree(10), 5)
    assert report.lhs == 6
    assert report.rhs == pytest.approx(math.e * 24 * 8 * 2 ** Epsilon(5).value)
    with pytest.raises(PreconditionError):
        check_nonstar_bound(path_tree(10), 3)


@pytest.mark.parametrize("k", [5, 6, 7])
def test_nonstar_bound_on_both_corpora(k, small_trees, random_trees):
    checker = resolve_checker("nonstar", k)
    for trees in (small_trees, random_trees):
        assert all(r.holds for r in sweep(checker, trees))


def test_wye_bound_examples():
    assert check_wye_degree_bound(star_tree(7)).lhs == 0
    d = 20
    c = max(1, int(math.floor(d ** ((1 + math.sqrt(3)) / 2))))
    t = depth_two_tree(d, c)
    report = check_wye_degree_bound(t)
    assert report.lhs == depth_two_wye_count(d, c) == profile5_fast(t).Y
    assert report.holds


def test_wye_exponent_ratio():
    for d in (10, 20, 40, 80):
        assert wye_exponent_ratio(d) <= 2
        assert 0.1 < wye_exponent_ratio(d, alpha=math.sqrt(3) - 1) <= 2
    assert wye_exponent_ratio(80) < wye_exponent_ratio(10)


# Gluing

def test_gluing_two_edges():
    reports = {r.name: r for r in gluing_sandwich_reports(path_tree(2), path_tree(2), 5)}
    upper = reports["glue5_z_upper"]
    assert (upper.lhs, upper.rhs) == (4, 12)
    assert all(r.holds for r in reports.values())


def test_gluing_sandwich_k5_on_random_pairs():
    rng = np.random.default_rng(12)
    for i in range(1000):
        s = random_tree(int(rng.integers(1, 16)), 3 * i)
        t = random_tree(int(rng.integers(1, 16)), 3 * i + 1)
        assert check_gluing_sandwich(s, t, 5).holds


def test_gluing_sandwich_stars():
    assert check_gluing_sandwich(star_tree(4), star_tree(4), 5).holds


def test_gluing_upper_inequality_not_claimed_for_three():
    assert not check_gluing_sandwich(path_tree(2), path_tree(2), 3).holds


def test_gluing_needs_k_at_least_three():
    with pytest.raises(PreconditionError):
        gluing_sandwich_reports(path_tree(2), path_tree(2), 2)


def test_glued_profiles_approach_the_last_tree():
    distances = glued_profile_distances([star_tree(m) for m in (10, 20, 40, 80, 160)], 5)
    assert distances[0] == 0
    assert distances[-1] < 0.05


# Profile bound

def test_profile_bound_on_pure_profiles():
    report = check_theorem2(KProfile(5, (0, 1, 0)))
    assert report.holds and report.slack == pytest.approx(0)
    assert check_theorem2(KProfile(5, (1, 0, 0))).holds
    assert check_theorem2(k_profile(star_tree(5), 6)).holds


def test_profile_bound_errors():
    with pytest.raises(UndefinedProfileError):
        check_theorem2(KProfile(5, (0, 0, 0)))
    with pytest.raises(PreconditionError):
        check_theorem2(k_profile(path_tree(6), 4))


@pytest.mark.parametrize("d", range(4))
def test_profile_bound_along_millipedes(d):
    result = theorem2_on_millipedes((d,), (100, 1000, 10000))
    assert result.holds
    assert result.monotone
    assert all(r.holds for r in result.reports)


# Cutting

def test_cut_deltas_on_path():
    assert cut_deltas(path_tree(5), 1, 2, 0, 0) == Profile5(1, 0, 0)


def test_plain_cut_deltas_are_non_negative():
    rng = np.random.default_rng(4)
    for seed in range(200):
        t = random_tree(int(rng.integers(2, 30)), seed)
        u, v = t.edges()[int(rng.integers(0, t.n - 1))]
        delta = cut_deltas(t, u, v, 0, 0)
        assert min(delta.P, delta.S, delta.Y) >= 0


# Equality search

def test_search_finds_small_equality_tree():
    result = search_equality_trees(0, 100000, seed=1)
    assert result.converged
    assert result.gap == 0
    assert result.profile.Y >= 1
    assert profile5_fast(result.tree) == result.profile


def test_search_with_moderate_target():
    result = search_equality_trees(10, 400000, seed=1)
    assert result.converged
    assert min(result.profile.P, result.profile.S, result.profile.Y) >= 10
    assert result.profile.Y == 9 * result.profile.S + result.profile.P


def test_search_reaches_target_one_hundred():
    result = search_equality_trees(100, 1000000, seed=7)
    assert result.converged
    assert min(result.profile.P, result.profile.S, result.profile.Y) >= 100
    assert check_main_theorem(result.tree).slack == 6


def test_search_is_deterministic():
    first = search_equality_trees(5, 50000, seed=3)
    second = search_equality_trees(5, 50000, seed=3)
    assert first.tree.edges() == second.tree.edges()
    assert first.moves == second.moves


def test_general_search_reports_exact_counts():
    result = search_equality_trees(1, 20000, seed=2, general=True)
    assert profile5_fast(result.tree) == result.profile
    if result.converged:
        assert result.gap == 0
