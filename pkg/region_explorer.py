"""
Region Explorer
===============

Limiting 5-profiles of millipede families, their projection to the
(path fraction, star fraction) plane, exact convex hulls, facet lines and
the region plot.

Family labels follow the spine-degree convention: a family (d_1..d_l) has
spine vertices of degree d_i + 2, i.e. pendant_offset = 0
(config.FAMILY_PENDANT_OFFSET).
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import partial
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import config
from corpus_io import write_csv
from profile_engine import Profile5, caterpillar_vertex_counts, profile5_fast, profile_map
from tree_core import MillipedeSpec, PreconditionError, Tree, millipede

logger = logging.getLogger(__name__)

Point = Tuple[Fraction, Fraction]


class LimitProfileError(RuntimeError):
    """Per-period increments did not stabilise"""


class DegenerateFacetError(ValueError):
    """Two profiles do not determine a facet line"""


def family_label(d: Sequence[int]) -> str:
    return "(" + ",".join(str(x) for x in d) + ")"


@dataclass(frozen=True)
class LimitProfile:
    d: Tuple[int, ...]
    p: Tuple[Fraction, Fraction, Fraction]
    per_period: Tuple[int, int, int]
    pendant_offset: int = config.FAMILY_PENDANT_OFFSET

    @property
    def label(self) -> str:
        return family_label(self.d)

    @property
    def point(self) -> Point:
        return self.p[0], self.p[1]

    def to_row(self) -> dict:
        row = {"family": self.label}
        for i, value in enumerate(self.p, start=1):
            row[f"p{i}_num"] = value.numerator
            row[f"p{i}_den"] = value.denominator
        return row


@dataclass(frozen=True)
class FacetLine:
    """Y <= a_S * S + a_P * P + c; c is only ever a corpus lower bound"""

    a_S: Fraction
    a_P: Fraction
    c: Optional[float] = None

    def excess(self, profile: Profile5) -> Fraction:
        return profile.Y - self.a_S * profile.S - self.a_P * profile.P


# Limit profiles

def _normalise(counts: Sequence[int]) -> Tuple[Fraction, Fraction, Fraction]:
    total = sum(counts)
    if total <= 0:
        raise LimitProfileError(f"per-period counts {tuple(counts)} have no 5-vertex subtrees")
    return tuple(Fraction(c, total) for c in counts)


def limit_profile(d: Sequence[int], pendant_offset: int = config.FAMILY_PENDANT_OFFSET) -> LimitProfile:
    """Exact limit of p^(5)(T_n^D) as n grows

    Counts are linear in n once both spine ends are out of reach of a
    5-vertex subtree, so the increment over one period gives the limit.
    Three consecutive increments must agree; otherwise n0 doubles.

    Raises:
        LimitProfileError: Increments still disagree after
            config.LIMIT_PROFILE_MAX_RETRIES attempts
    """
    d = tuple(d)
    period = len(d)
    if period < 1:
        raise PreconditionError("a family needs a non-empty pendant sequence")
    n0 = 2 * period + config.LIMIT_PROFILE_SPAN

    for attempt in range(config.LIMIT_PROFILE_MAX_RETRIES):
        counts = []
        for step in range(4):
            prof = profile5_fast(millipede(MillipedeSpec(d, n0 + step * period, pendant_offset)))
            counts.append((prof.P, prof.S, prof.Y))
        increments = {tuple(b - a for a, b in zip(counts[i], counts[i + 1])) for i in range(3)}
        if len(increments) == 1:
            per_period = increments.pop()
            logger.debug("Limit profile %s: per period %s (n0=%d)", family_label(d), per_period, n0)
            return LimitProfile(d, _normalise(per_period), per_period, pendant_offset)
        logger.debug("Limit profile %s: increments unstable at n0=%d, retrying", family_label(d), n0)
        n0 *= 2
    raise LimitProfileError(f"increments for {family_label(d)} did not stabilise")


def period_counts(d: Sequence[int], pendant_offset: int = config.FAMILY_PENDANT_OFFSET) -> Tuple[int, int, int]:
    """(P, S, Y) contributed by one period of an infinite spine

    Evaluates the spine-vertex formulas on three copies of the period and
    keeps the middle one.
    """
    d = tuple(d)
    period = len(d)
    degrees = [x + pendant_offset + 2 for x in d] * 3
    totals = [0, 0, 0]
    for j in range(period, 2 * period):
        for i, value in enumerate(caterpillar_vertex_counts(degrees, j)):
            totals[i] += value
    return tuple(totals)


def limit_profiles(families: Sequence[Sequence[int]], pendant_offset: int = config.FAMILY_PENDANT_OFFSET,
                   executor=None) -> List[LimitProfile]:
    return profile_map(partial(limit_profile, pendant_offset=pendant_offset),
                       [tuple(d) for d in families], executor)


def convergence_distances(d: Sequence[int], lengths: Sequence[int],
                          pendant_offset: int = config.FAMILY_PENDANT_OFFSET) -> List[Fraction]:
    """L1 distance between p^(5)(T_n^D) and the limit, for each n"""
    limit = limit_profile(d, pendant_offset)
    distances = []
    for n in lengths:
        prof = profile5_fast(millipede(MillipedeSpec(tuple(d), n, pendant_offset)))
        p = _normalise((prof.P, prof.S, prof.Y))
        distances.append(sum((abs(a - b) for a, b in zip(p, limit.p)), Fraction(0)))
    return distances


def paired_family(d: int) -> Tuple[int, ...]:
    """Member d of the (0,0,d,d) family"""
    return (0, 0, d, d)


def family_accumulation_point(template: Callable[[int], Sequence[int]], start: int,
                              pendant_offset: int = config.FAMILY_PENDANT_OFFSET,
                              samples: int = 7) -> Tuple[Fraction, Fraction, Fraction]:
    """Limit of the limit profiles of template(d) as d grows

    Per-period counts are polynomials in d of degree at most four, so the
    highest non-vanishing finite difference of the total picks the
    dominant terms.
    """
    rows = [period_counts(template(start + i), pendant_offset) for i in range(samples)]
    series = [[row[i] for row in rows] for i in range(3)]
    series.append([sum(row) for row in rows])

    def differences(values: List[int], order: int) -> int:
        for _ in range(order):
            values = [b - a for a, b in zip(values, values[1:])]
        return values[0]

    for order in range(samples - 1, -1, -1):
        lead_total = differences(series[3], order)
        if lead_total != 0:
            return tuple(Fraction(differences(series[i], order), lead_total) for i in range(3))
    raise LimitProfileError("family has no 5-vertex subtrees")


def simple_families() -> List[Tuple[int, ...]]:
    """The (d)-millipedes for d = 0..3"""
    return [(d,) for d in range(4)]


def default_families(dmax: int = config.DEFAULT_DMAX) -> List[Tuple[int, ...]]:
    families = simple_families()
    families.append((0, 0, 3, 4, 4, 3))
    families.extend((0, 0, d, d + 2, d + 2, d) for d in range(3, 6))
    families.extend((0, 0, d, d + 1, d) for d in range(4, 7))
    families.extend(paired_family(d) for d in range(6, dmax + 1))
    return families


# Hulls and facets

def _cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull2d(points: Iterable[Point]) -> List[Point]:
    """Convex hull, counterclockwise from the lowest-then-leftmost point

    Exact monotone chain; collinear points are dropped.
    """
    pts = sorted(set((Fraction(x), Fraction(y)) for x, y in points))
    if len(pts) <= 2:
        return pts

    lower: List[Point] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) <= 2:
        return [pts[0], pts[-1]]

    start = min(range(len(hull)), key=lambda i: (hull[i][1], hull[i][0]))
    return hull[start:] + hull[:start]


def contains_point(hull: Sequence[Point], q: Point) -> bool:
    """q inside or on the boundary of a hull from hull2d"""
    if not hull:
        return False
    if len(hull) == 1:
        return tuple(hull[0]) == tuple(q)
    if len(hull) == 2:
        a, b = hull
        if _cross(a, b, q) != 0:
            return False
        return (min(a[0], b[0]) <= q[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= q[1] <= max(a[1], b[1]))
    return all(_cross(hull[i], hull[(i + 1) % len(hull)], q) >= 0 for i in range(len(hull)))


@dataclass(frozen=True)
class HullComparison:
    contained: bool
    new_vertices: Tuple[Point, ...]

    @property
    def strict(self) -> bool:
        return self.contained and bool(self.new_vertices)


def compare_hulls(inner: Sequence[Point], outer: Sequence[Point]) -> HullComparison:
    """Is inner inside outer, and which outer vertices lie outside inner"""
    contained = all(contains_point(outer, q) for q in inner)
    new_vertices = tuple(q for q in outer if not contains_point(inner, q))
    return HullComparison(contained, new_vertices)


def _homogeneous(q) -> Tuple[Fraction, Fraction, Fraction]:
    if isinstance(q, LimitProfile):
        return tuple(Fraction(x) for x in q.per_period)
    if isinstance(q, Profile5):
        return Fraction(q.P), Fraction(q.S), Fraction(q.Y)
    return tuple(Fraction(x) for x in q)


def facet_from_profiles(q1, q2) -> FacetLine:
    """The line Y = a_S S + a_P P through two profiles, in count space

    Profiles may be LimitProfile, Profile5 or (P, S, Y) triples; any
    positive rescaling of a triple gives the same line.
    """
    p1, s1, y1 = _homogeneous(q1)
    p2, s2, y2 = _homogeneous(q2)
    det = s1 * p2 - s2 * p1
    if det == 0:
        raise DegenerateFacetError("profiles are proportional in (P, S); no unique facet line")
    a_S = (y1 * p2 - y2 * p1) / det
    a_P = (s1 * y2 - s2 * y1) / det
    return FacetLine(a_S, a_P)


def facet_from_hull_edge(a: Point, b: Point) -> FacetLine:
    """Count-space facet of the profile-space line through a and b

    The line alpha*p1 + beta*p2 = 1 corresponds to Y = (beta-1) S + (alpha-1) P
    because p3 = 1 - p1 - p2.
    """
    det = a[0] * b[1] - a[1] * b[0]
    if det == 0:
        raise DegenerateFacetError(f"edge {a}-{b} passes through the origin")
    alpha = Fraction(b[1] - a[1]) / det
    beta = Fraction(a[0] - b[0]) / det
    return FacetLine(beta - 1, alpha - 1)


def hull_facets(points: Iterable[Point]) -> List[Tuple[Point, Point, FacetLine]]:
    """Hull edges that bound Y from above, with their count-space lines"""
    hull = hull2d(points)
    if len(hull) < 3:
        return []
    facets = []
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        try:
            line = facet_from_hull_edge(a, b)
        except DegenerateFacetError:
            continue
        alpha, beta = line.a_P + 1, line.a_S + 1
        if all(alpha * q[0] + beta * q[1] >= 1 for q in hull):
            facets.append((a, b, line))
    return facets


def estimate_facet_constant(line: FacetLine, corpus: Iterable[Tree]) -> float:
    """Largest Y - a_S S - a_P P over the corpus

    Only a lower bound on the universal constant of the facet inequality.
    """
    best = None
    for t in corpus:
        value = line.excess(profile5_fast(t))
        if best is None or value > best:
            best = value
    if best is None:
        raise PreconditionError("facet constant estimate needs a non-empty corpus")
    return float(best)


def facet_constants(lines: Sequence[FacetLine], corpus: Sequence[Tree]) -> List[FacetLine]:
    return [replace(line, c=estimate_facet_constant(line, corpus)) for line in lines]


# Output

@dataclass(frozen=True)
class RegionData:
    profiles: Tuple[LimitProfile, ...]
    marked: Tuple[Tuple[str, Point], ...]
    simple_hull: Tuple[Point, ...]
    full_hull: Tuple[Point, ...]


def build_region(families: Sequence[Sequence[int]], pendant_offset: int = config.FAMILY_PENDANT_OFFSET,
                 marked: Sequence[Tuple[str, Point]] = (), executor=None) -> RegionData:
    """Limit profiles plus the hull of the (d) families and the hull of everything"""
    profiles = tuple(limit_profiles(families, pendant_offset, executor))
    simple = {tuple(d) for d in simple_families()}
    simple_points = [q.point for q in profiles if q.d in simple]
    all_points = [q.point for q in profiles] + [point for _, point in marked]
    return RegionData(profiles, tuple(marked), tuple(hull2d(simple_points)), tuple(hull2d(all_points)))


def _svg_xy(point: Point) -> Tuple[str, str]:
    span = config.SVG_SIZE - 2 * config.SVG_MARGIN
    x = config.SVG_MARGIN + float(point[0]) * span
    y = config.SVG_SIZE - config.SVG_MARGIN - float(point[1]) * span
    return f"{x:.{config.SVG_DECIMALS}f}", f"{y:.{config.SVG_DECIMALS}f}"


def _svg_polygon(hull: Sequence[Point], colour: str) -> str:
    coords = " ".join(",".join(_svg_xy(q)) for q in hull)
    if len(hull) >= 3:
        return f'<polygon points="{coords}" fill="none" stroke="{colour}" stroke-width="1.5"/>'
    return f'<polyline points="{coords}" fill="none" stroke="{colour}" stroke-width="1.5"/>'


def render_svg(region: RegionData) -> str:
    """Scatter of limit profiles with both hulls; axes fixed to [0,1]^2"""
    size = config.SVG_SIZE
    mark = config.SVG_MARK_SIZE
    colors = config.COLORS
    origin = _svg_xy((Fraction(0), Fraction(0)))
    x_end = _svg_xy((Fraction(1), Fraction(0)))
    y_end = _svg_xy((Fraction(0), Fraction(1)))

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="{colors["background"]}"/>',
        f'<polygon points="{",".join(origin)} {",".join(x_end)} {",".join(y_end)}" '
        f'fill="none" stroke="{colors["simplex"]}" stroke-dasharray="4,4"/>',
        f'<line x1="{origin[0]}" y1="{origin[1]}" x2="{x_end[0]}" y2="{x_end[1]}" stroke="{colors["axis"]}"/>',
        f'<line x1="{origin[0]}" y1="{origin[1]}" x2="{y_end[0]}" y2="{y_end[1]}" stroke="{colors["axis"]}"/>',
        f'<text x="{x_end[0]}" y="{float(origin[1]) + 20:.{config.SVG_DECIMALS}f}" '
        f'font-size="12" text-anchor="end">path fraction</text>',
        f'<text x="{float(origin[0]) - 8:.{config.SVG_DECIMALS}f}" y="{y_end[1]}" '
        f'font-size="12" text-anchor="start" transform="rotate(-90 {float(origin[0]) - 8:.{config.SVG_DECIMALS}f} '
        f'{y_end[1]})">star fraction</text>',
    ]
    if region.full_hull:
        lines.append(_svg_polygon(region.full_hull, colors["full_hull"]))
    if region.simple_hull:
        lines.append(_svg_polygon(region.simple_hull, colors["simple_hull"]))
    for q in region.profiles:
        x, y = (float(v) for v in _svg_xy(q.point))
        lines.append(f'<g stroke="{colors["point"]}"><title>{q.label}</title>'
                     f'<line x1="{x - mark:.{config.SVG_DECIMALS}f}" y1="{y:.{config.SVG_DECIMALS}f}" '
                     f'x2="{x + mark:.{config.SVG_DECIMALS}f}" y2="{y:.{config.SVG_DECIMALS}f}"/>'
                     f'<line x1="{x:.{config.SVG_DECIMALS}f}" y1="{y - mark:.{config.SVG_DECIMALS}f}" '
                     f'x2="{x:.{config.SVG_DECIMALS}f}" y2="{y + mark:.{config.SVG_DECIMALS}f}"/></g>')
    for label, point in region.marked:
        x, y = _svg_xy(point)
        lines.append(f'<circle cx="{x}" cy="{y}" r="{mark}" fill="{colors["marked_point"]}">'
                     f'<title>{label}</title></circle>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_region_plot(families: Sequence[Sequence[int]], csv_path: Optional[str] = None,
                     svg_path: Optional[str] = None,
                     pendant_offset: int = config.FAMILY_PENDANT_OFFSET,
                     marked: Sequence[Tuple[str, Point]] = (), executor=None) -> RegionData:
    """Write the limit-profile CSV and the SVG region plot

    One CSV row per family; marked points (such as an accumulation point)
    appear in the SVG and in the outer hull only. Output bytes depend only
    on the inputs.

    Raises:
        OSError: A path cannot be written
    """
    region = build_region(families, pendant_offset, marked, executor)
    if csv_path:
        write_csv((q.to_row() for q in region.profiles), config.REGION_CSV_HEADER, csv_path)
    if svg_path:
        folder = os.path.dirname(svg_path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        with open(svg_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(render_svg(region))
        logger.info("Wrote region plot to %s", svg_path)
    return region
