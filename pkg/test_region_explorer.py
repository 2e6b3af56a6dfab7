import random
from fractions import Fraction as F

import pandas as pd
import pytest

from corpus_io import load_corpus
from profile_engine import Profile5, profile5_fast
from region_explorer import (DegenerateFacetError, FacetLine, compare_hulls, contains_point,
                             convergence_distances, default_families, emit_region_plot,
                             estimate_facet_constant, facet_from_hull_edge, facet_from_profiles,
                             family_accumulation_point, hull2d, hull_facets, limit_profile,
                             limit_profiles, paired_family, period_counts, simple_families)
from tree_core import MillipedeSpec, PreconditionError, millipede

PER_PERIOD = [
    ((0,), (1, 0, 0)),
    ((1,), (4, 0, 4)),
    ((2,), (9, 1, 18)),
    ((3,), (16, 5, 48)),
    ((0, 0, 3, 4, 4, 3), (58, 40, 252)),
    ((0, 0, 3, 5, 5, 3), (68, 80, 384)),
    ((0, 0, 4, 6, 6, 4), (94, 170, 664)),
    ((0, 0, 5, 7, 7, 5), (124, 322, 1054)),
    ((0, 0, 4, 5, 4), (47, 65, 290)),
    ((0, 0, 5, 6, 5), (62, 140, 492)),
    ((0, 0, 6, 7, 6), (79, 266, 770)),
    ((0, 0, 6, 6), (28, 140, 336)),
]


# Limit profiles

@pytest.mark.parametrize("d, expected", PER_PERIOD)
def test_period_counts(d, expected):
    assert period_counts(d) == expected


@pytest.mark.parametrize("d, expected", PER_PERIOD)
def test_limit_profile_matches_period_counts(d, expected):
    limit = limit_profile(d)
    assert limit.per_period == expected
    assert sum(limit.p) == 1
    assert limit.p == tuple(F(x, sum(expected)) for x in expected)


def test_paired_family_closed_form():
    for d in range(6, 13):
        expected = (4 * (d + 1), (d + 2) * (d + 1) * d * (d - 1) // 12, d * (d + 1) * (d + 2))
        assert period_counts(paired_family(d)) == expected


def test_increments_are_constant_per_period():
    d = (0, 0, 3, 4, 4, 3)
    counts = []
    for n in (20, 26, 32, 38):
        prof = profile5_fast(millipede(MillipedeSpec(d, n, pendant_offset=0)))
        counts.append((prof.P, prof.S, prof.Y))
    increments = {tuple(b - a for a, b in zip(x, y)) for x, y in zip(counts, counts[1:])}
    assert increments == {(58, 40, 252)}


def test_path_family_limit():
    assert limit_profile((0,)).p == (1, 0, 0)


def test_offset_two_family_matches_offset_zero():
    assert limit_profile((0,), pendant_offset=2).per_period == period_counts((2,))


def test_limit_profiles_keep_family_order():
    families = default_families(8)
    profiles = limit_profiles(families)
    assert [q.d for q in profiles] == [tuple(d) for d in families]
    for q in profiles:
        assert all(x >= 0 for x in q.p)


def test_row_format():
    row = limit_profile((2,)).to_row()
    assert row == {"family": "(2)", "p1_num": 9, "p1_den": 28, "p2_num": 1, "p2_den": 28,
                   "p3_num": 9, "p3_den": 14}


@pytest.mark.parametrize("d", [(1,), (2,)])
def test_convergence_is_first_order(d):
    lengths = [50, 100, 200, 400]
    distances = convergence_distances(d, lengths)
    assert all(b < a for a, b in zip(distances, distances[1:]))
    assert all(n * dist <= F(3, 2) * 50 * distances[0] for n, dist in zip(lengths, distances))


def test_convergence_distance_closed_form():
    # spine degree 4, ends of degree 3: P = 9n-24, S = n-2, Y = 18n-36
    (dist,) = convergence_distances((2,), [40])
    assert dist == F(228, 28 * (28 * 40 - 62))


def test_paired_family_accumulates_at_all_stars():
    assert family_accumulation_point(paired_family, 6) == (0, 1, 0)


def test_default_families():
    families = default_families(12)
    assert families[:4] == simple_families()
    assert (0, 0, 3, 4, 4, 3) in families
    assert families[-1] == (0, 0, 12, 12)
    assert len(families) == 4 + 1 + 3 + 3 + 7


# Hulls

def test_hull_of_few_points():
    assert hull2d([]) == []
    assert hull2d([(F(1, 2), F(1, 3))]) == [(F(1, 2), F(1, 3))]
    assert hull2d([(0, 0), (1, 1), (2, 2)]) == [(0, 0), (2, 2)]


def test_hull_of_square_with_interior_point():
    points = [(1, 1), (0, 1), (F(1, 2), F(1, 2)), (1, 0), (0, 0), (F(1, 2), 0)]
    assert hull2d(points) == [(0, 0), (1, 0), (1, 1), (0, 1)]


def test_hull_ignores_input_order():
    rng = random.Random(1)
    points = [(F(rng.randint(0, 50), 50), F(rng.randint(0, 50), 50)) for _ in range(60)]
    hull = hull2d(points)
    shuffled = list(points)
    rng.shuffle(shuffled)
    assert hull2d(shuffled) == hull
    assert all(contains_point(hull, q) for q in points)


def test_contains_point_on_segment():
    segment = hull2d([(0, 0), (2, 2)])
    assert contains_point(segment, (1, 1))
    assert not contains_point(segment, (3, 3))
    assert not contains_point(segment, (1, 0))


def test_full_hull_strictly_contains_simple_hull():
    profiles = {q.d: q.point for q in limit_profiles(default_families())}
    simple = hull2d(profiles[d] for d in simple_families())
    full = hull2d(profiles.values())
    comparison = compare_hulls(simple, full)
    assert comparison.contained
    assert comparison.strict
    assert profiles[(0, 0, 3, 4, 4, 3)] in comparison.new_vertices


# Facets

@pytest.mark.parametrize("first, second, a_S, a_P", [
    ((1,), (2,), F(9), F(1)),
    ((2,), (3,), F(144, 29), F(42, 29)),
    ((3,), (0, 0, 3, 4, 4, 3), F(624, 175), F(66, 35)),
    ((0, 0, 3, 4, 4, 3), (0, 0, 3, 5, 5, 3), F(107, 40), F(5, 2)),
])
def test_facet_from_profiles(first, second, a_S, a_P):
    q1, q2 = limit_profile(first), limit_profile(second)
    line = facet_from_profiles(q1, q2)
    assert (line.a_S, line.a_P) == (a_S, a_P)
    assert facet_from_profiles(q1.per_period, q2.per_period) == line
    assert facet_from_hull_edge(q1.point, q2.point) == line
    assert line.excess(Profile5(*q1.per_period)) == 0


def test_degenerate_facets():
    with pytest.raises(DegenerateFacetError):
        facet_from_profiles((9, 1, 18), (18, 2, 36))
    with pytest.raises(DegenerateFacetError):
        facet_from_hull_edge((F(1), F(0)), (F(1, 2), F(0)))


def test_hull_facets_of_default_families():
    points = [q.point for q in limit_profiles(default_families())]
    lines = {(line.a_S, line.a_P) for _, _, line in hull_facets(points)}
    assert {(F(9), F(1)), (F(144, 29), F(42, 29)), (F(624, 175), F(66, 35)),
            (F(107, 40), F(5, 2))} <= lines


def test_facet_constants_over_small_trees():
    corpus = load_corpus("exhaustive:12")
    assert 0 <= estimate_facet_constant(FacetLine(F(9), F(1)), corpus) <= 6
    assert 0 <= estimate_facet_constant(FacetLine(F(36), F(1)), corpus) <= 4
    assert isinstance(estimate_facet_constant(FacetLine(F(144, 29), F(42, 29)), corpus), float)
    with pytest.raises(PreconditionError):
        estimate_facet_constant(FacetLine(F(9), F(1)), [])


# Region plot

def test_region_plot_files(tmp_path):
    csv_path = tmp_path / "limits.csv"
    svg_path = tmp_path / "plots" / "region.svg"
    region = emit_region_plot(simple_families(), str(csv_path), str(svg_path))

    frame = pd.read_csv(csv_path)
    assert list(frame["family"]) == ["(0)", "(1)", "(2)", "(3)"]
    assert list(frame.columns) == ["family", "p1_num", "p1_den", "p2_num", "p2_den", "p3_num", "p3_den"]
    svg = svg_path.read_text(encoding="utf-8")
    assert svg.startswith("<svg")
    assert svg.count("<title>") == 4
    assert len(region.simple_hull) == 4


def test_region_plot_is_deterministic(tmp_path):
    marked = [("limit", (F(0), F(1)))]
    emit_region_plot(default_families(8), str(tmp_path / "a.csv"), str(tmp_path / "a.svg"), marked=marked)
    emit_region_plot(default_families(8), str(tmp_path / "b.csv"), str(tmp_path / "b.svg"), marked=marked)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    frame = pd.read_csv(tmp_path / "a.csv")
    assert len(frame) == len(default_families(8))
    for row in frame.itertuples():
        p1, p2 = F(int(row.p1_num), int(row.p1_den)), F(int(row.p2_num), int(row.p2_den))
        assert p1 >= 0 and p2 >= 0
        assert p1 + p2 <= 1
        assert p1 + p2 + F(int(row.p3_num), int(row.p3_den)) == 1


def test_region_marked_points_only_widen_the_outer_hull():
    region = emit_region_plot(default_families(8), marked=[("limit", (F(0), F(1)))])
    assert (F(0), F(1)) in region.full_hull
    assert (F(0), F(1)) not in region.simple_hull


def test_region_plot_unwritable_path(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_region_plot(simple_families(), str(blocker / "limits.csv"))
