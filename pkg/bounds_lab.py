"""
Bounds Lab
==========

Evaluators for the subtree-count inequalities, sweeps over corpora, and the
annealing search for trees with Y = 9S + P.

Integer-only bounds are compared exactly. Bounds involving e, sqrt(3) or
epsilon are evaluated in float64 and fail only when the slack is below
-config.FLOAT_RELATIVE_TOLERANCE * max(1, |rhs|).
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import partial
from math import comb, factorial
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from profile_engine import (KProfile, Profile5, caterpillar_vertex_counts,
                            centered_counts, k_profile, nonstar_count, profile5_fast, profile_map)
from tree_core import (PreconditionError, Tree, caterpillar, cut, glue, millipede,
                       MillipedeSpec, random_tree)

logger = logging.getLogger(__name__)

Number = Union[int, float]


@dataclass(frozen=True)
class TreeSummary:
    n: int
    max_degree: int
    degree_histogram: Tuple[Tuple[int, int], ...]

    @classmethod
    def of(cls, t: Tree) -> "TreeSummary":
        histogram = tuple(sorted(Counter(t.degrees()).items()))
        return cls(t.n, t.max_degree(), histogram)

    def histogram_text(self) -> str:
        return ";".join(f"{degree}:{count}" for degree, count in self.degree_histogram)


@dataclass(frozen=True)
class BoundReport:
    """One evaluated inequality lhs <= rhs"""

    name: str
    lhs: Number
    rhs: Number
    slack: Number
    holds: bool
    tree_summary: Optional[TreeSummary] = None
    exact: bool = True

    def to_row(self, index: int) -> dict:
        summary = self.tree_summary
        return {
            "index": index,
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "holds": self.holds,
            "n": summary.n if summary else "",
            "max_degree": summary.max_degree if summary else "",
            "degree_histogram": summary.histogram_text() if summary else "",
        }


def exact_report(name: str, lhs: int, rhs: int, summary: Optional[TreeSummary] = None) -> BoundReport:
    slack = rhs - lhs
    return BoundReport(name, lhs, rhs, slack, slack >= 0, summary, exact=True)


def float_report(name: str, lhs: float, rhs: float, summary: Optional[TreeSummary] = None) -> BoundReport:
    lhs = float(lhs)
    rhs = float(rhs)
    slack = rhs - lhs
    tolerance = config.FLOAT_RELATIVE_TOLERANCE * max(1.0, abs(rhs))
    return BoundReport(name, lhs, rhs, slack, slack >= -tolerance, summary, exact=False)


@dataclass(frozen=True)
class Epsilon:
    """epsilon(k) = (k-2 + sqrt((k-2)^2 + 4(k-2))) / 2, the non-star exponent"""

    k: int

    def __post_init__(self):
        if self.k < 3:
            raise PreconditionError(f"epsilon is defined for k >= 3, got {self.k}")

    @property
    def value(self) -> float:
        m = self.k - 2
        return (m + math.sqrt(m * m + 4 * m)) / 2

    @property
    def alpha(self) -> float:
        """alpha with alpha * (k-2) = k-2 + 1/alpha"""
        return self.value / (self.k - 2)


# Single-tree checks

def check_main_theorem(t: Tree) -> BoundReport:
    """Y <= 9S + P + 6"""
    prof = profile5_fast(t)
    return exact_report("main", prof.Y, 9 * prof.S + prof.P + 6, TreeSummary.of(t))


def check_bl_theorem(t: Tree) -> BoundReport:
    """Y <= 36S + P + 4"""
    prof = profile5_fast(t)
    return exact_report("bl", prof.Y, 36 * prof.S + prof.P + 4, TreeSummary.of(t))


def check_local_main_theorem(t: Tree) -> BoundReport:
    """Per-vertex form 9S(v) + P(v) - Y(v) + 3*gamma(v) >= 0

    gamma(v) = 2 - (non-leaf neighbours of v), summed over non-leaf v it is 2,
    so the local inequalities add up to Y <= 9S + P + 6. Only claimed for trees
    with maximum degree at most 4 and no vertex of degree 2. The report carries
    the tightest vertex.
    """
    degrees = t.degrees()
    if t.max_degree() > 4 or 2 in degrees:
        raise PreconditionError("local form needs maximum degree <= 4 and no degree-2 vertex")
    summary = TreeSummary.of(t)
    parts = centered_counts(t)
    worst = None
    for v in range(t.n):
        if degrees[v] <= 1:
            continue
        gamma = 2 - sum(1 for u in t.adjacency[v] if degrees[u] > 1)
        lhs = parts[v].Y
        rhs = 9 * parts[v].S + parts[v].P + 3 * gamma
        if worst is None or rhs - lhs < worst[1] - worst[0]:
            worst = (lhs, rhs)
    if worst is None:
        return exact_report("local", 0, 0, summary)
    return exact_report("local", worst[0], worst[1], summary)


def check_nonstar_bound(t: Tree, k: int) -> BoundReport:
    """R_k(T) <= e (k-1)! sum_{d_v >= 2} d_v^epsilon"""
    if k < 4:
        raise PreconditionError(f"non-star bound needs k >= 4, got {k}")
    eps = Epsilon(k).value
    degrees = np.asarray(t.degrees(), dtype=np.float64)
    power_sum = np.sum(np.power(degrees[degrees >= 2], eps))
    rhs = math.e * factorial(k - 1) * float(power_sum)
    return float_report(f"nonstar{k}", nonstar_count(t, k), rhs, TreeSummary.of(t))


def check_wye_degree_bound(t: Tree) -> BoundReport:
    """Y <= 2 sum_v d_v^(2+sqrt(3))"""
    degrees = np.asarray(t.degrees(), dtype=np.float64)
    rhs = 2.0 * float(np.sum(np.power(degrees, 2.0 + math.sqrt(3.0))))
    return float_report("wye", profile5_fast(t).Y, rhs, TreeSummary.of(t))


def _profile_of(t: Tree, k: int) -> KProfile:
    return profile5_fast(t).to_kprofile() if k == 5 else k_profile(t, k)


def gluing_sandwich_reports(s: Tree, t: Tree, k: int) -> List[BoundReport]:
    """Both gluing inequalities for every type index and for Z_k

    Lower: c_i(S) + c_i(T) <= c_i(S glued T).
    Upper: c_i(S glued T) <= c_i(S) + c_i(T) + (k-2)! D(S)^(k-3) + (k-2)! D(T)^(k-3),
    where a single-vertex tree counts with D = 1: it still carries one
    subtree through the new path.
    """
    if k < 3:
        raise PreconditionError(f"gluing sandwich needs k >= 3, got {k}")
    glued = glue(s, t, k)
    summary = TreeSummary.of(glued)
    ps, pt, pg = _profile_of(s, k), _profile_of(t, k), _profile_of(glued, k)
    extra = (factorial(k - 2) * max(s.max_degree(), 1) ** (k - 3)
             + factorial(k - 2) * max(t.max_degree(), 1) ** (k - 3))

    reports = []
    coordinates = list(zip(ps.counts, pt.counts, pg.counts)) + [(ps.z, pt.z, pg.z)]
    for i, (cs, ct, cg) in enumerate(coordinates):
        label = f"glue{k}_z" if i == len(coordinates) - 1 else f"glue{k}_t{i + 1}"
        reports.append(exact_report(label + "_lower", cs + ct, cg, summary))
        reports.append(exact_report(label + "_upper", cg, cs + ct + extra, summary))
    return reports


def check_gluing_sandwich(s: Tree, t: Tree, k: int) -> BoundReport:
    """Tightest of the gluing inequalities on the default-leaf glued tree"""
    reports = gluing_sandwich_reports(s, t, k)
    worst = min(reports, key=lambda r: r.slack)
    return BoundReport(f"glue{k}", worst.lhs, worst.rhs, worst.slack,
                       all(r.holds for r in reports), worst.tree_summary)


def theorem2_bound(p1: float, k: int) -> float:
    """Lower bound on the star fraction p_2 given the path fraction p_1"""
    if k < 5:
        raise PreconditionError(f"the profile bound needs k >= 5, got {k}")
    if k == 5:
        root3 = math.sqrt(3.0)
        return 1.0 - p1 - 2.0 * 4.0 ** (2.0 + root3) * p1 ** ((2.0 - root3) / 4.0)
    eps = Epsilon(k).value
    return 1.0 - math.e * factorial(k - 1) * (k - 1) ** eps * p1 ** (1.0 - eps / (k - 1))


def check_theorem2(profile: KProfile) -> BoundReport:
    """p_2 >= bound(p_1); advisory on finite trees

    Raises:
        PreconditionError: k < 5
        UndefinedProfileError: z = 0
    """
    if profile.k < 5:
        raise PreconditionError(f"the profile bound needs k >= 5, got {profile.k}")
    p = profile.p
    bound = theorem2_bound(float(p[0]), profile.k)
    return float_report(f"thm2_k{profile.k}", bound, float(p[1]))


@dataclass(frozen=True)
class Theorem2Sweep:
    spec: MillipedeSpec
    lengths: Tuple[int, ...]
    reports: Tuple[BoundReport, ...]

    @property
    def monotone(self) -> bool:
        """Slack at the largest n is not below the previous one (up to 1e-6)"""
        if len(self.reports) < 2:
            return True
        return self.reports[-1].slack >= self.reports[-2].slack - 1e-6

    @property
    def holds(self) -> bool:
        return self.reports[-1].holds and self.monotone


def theorem2_on_millipedes(d: Sequence[int], lengths: Sequence[int],
                           pendant_offset: int = config.DEFAULT_PENDANT_OFFSET) -> Theorem2Sweep:
    """k = 5 profile bound along the millipede sequence T_n^D, n in lengths"""
    lengths = tuple(sorted(lengths))
    reports = []
    spec = None
    for n in lengths:
        spec = MillipedeSpec(tuple(d), n, pendant_offset)
        t = millipede(spec)
        report = check_theorem2(profile5_fast(t).to_kprofile())
        reports.append(BoundReport(report.name, report.lhs, report.rhs, report.slack, report.holds,
                                   TreeSummary.of(t), exact=False))
        logger.debug("Profile bound on %s n=%d: slack %.6g", spec.label, n, report.slack)
    return Theorem2Sweep(spec, lengths, tuple(reports))


# Constructions studied through their counts

def cut_deltas(t: Tree, u: int, v: int, i: int, j: int) -> Profile5:
    """Profile5(T) - Profile5(T_1) - Profile5(T_2) for the (i,j)-cut at {u,v}"""
    first, second = cut(t, u, v, i, j)
    return profile5_fast(t) - profile5_fast(first) - profile5_fast(second)


def depth_two_wye_count(d: int, c: int) -> int:
    """Y of the depth-two tree with root degree d and child degree c"""
    return d * (comb(d - 1, 2) * (c - 1) + comb(c - 1, 2) * (d - 1))


def wye_exponent_ratio(d: int, alpha: float = (1.0 + math.sqrt(3.0)) / 2.0) -> float:
    """Y / sum_v d_v^(2+sqrt(3)) on the depth-two tree with c = floor(d^alpha)

    With alpha = sqrt(3) - 1 both sides grow like d^(2+sqrt(3)), which is what
    makes the exponent optimal.
    """
    c = max(1, int(math.floor(d ** alpha)))
    exponent = 2.0 + math.sqrt(3.0)
    power_sum = d ** exponent + d * c ** exponent + d * (c - 1)
    return depth_two_wye_count(d, c) / power_sum


def glued_profile_distances(trees: Sequence[Tree], k: int) -> List[float]:
    """L1 distance between p(T'_n) and p(T_n) where T'_n glues T_1..T_n"""
    distances = []
    glued = None
    for t in trees:
        glued = t if glued is None else glue(glued, t, k)
        distances.append(float(_profile_of(glued, k).l1_distance(_profile_of(t, k))))
    return distances


# Sweeps

def resolve_checker(name: str, k: Optional[int] = None) -> Callable[[Tree], BoundReport]:
    """Single-tree checker for a CLI bound name"""
    if name == "main":
        return check_main_theorem
    if name == "bl":
        return check_bl_theorem
    if name == "local":
        return check_local_main_theorem
    if name == "wye":
        return check_wye_degree_bound
    if name == "nonstar":
        return partial(check_nonstar_bound, k=k or 5)
    if name == "thm2":
        return partial(_theorem2_for_tree, k=k or 5)
    raise PreconditionError(f"unknown bound {name!r}")


def _theorem2_for_tree(t: Tree, k: int) -> BoundReport:
    report = check_theorem2(_profile_of(t, k))
    return BoundReport(report.name, report.lhs, report.rhs, report.slack, report.holds,
                       TreeSummary.of(t), exact=False)


def sweep(checker: Callable[[Tree], BoundReport], trees: Sequence[Tree], executor=None) -> List[BoundReport]:
    reports = profile_map(checker, trees, executor)
    failed = sum(1 for r in reports if not r.holds)
    logger.info("Checked %d trees, %d failures", len(reports), failed)
    return reports


# Equality search

@dataclass(frozen=True)
class SearchResult:
    tree: Tree
    profile: Profile5
    converged: bool
    moves: int
    restarts: int
    spine_degrees: Optional[Tuple[int, ...]] = None

    @property
    def gap(self) -> int:
        return self.profile.Y - 9 * self.profile.S - self.profile.P


def _energy(totals: Sequence[int], target: int) -> float:
    paths, stars, wyes = totals
    gap = abs(wyes - 9 * stars - paths)
    shortfall = max(0, max(target, 1) - min(paths, stars, wyes))
    return gap + config.SEARCH_GROWTH_WEIGHT * shortfall


def _is_witness(totals: Sequence[int], target: int) -> bool:
    paths, stars, wyes = totals
    return wyes == 9 * stars + paths and min(paths, stars, wyes) >= target and wyes >= 1


def _accept(delta: float, rng) -> bool:
    if delta <= 0:
        return True
    return rng.random() < math.exp(-delta / config.SEARCH_TEMPERATURE)


class _CaterpillarWalk:
    """Annealing state over spine degrees; a move touches at most three spine vertices"""

    def __init__(self, degrees: List[int]):
        self.degrees = degrees
        self.parts = [caterpillar_vertex_counts(degrees, j) for j in range(len(degrees))]
        self.totals = [sum(part[i] for part in self.parts) for i in range(3)]

    def _required(self, j: int) -> int:
        m = len(self.degrees)
        return max(1, (j > 0) + (j < m - 1))

    def _refresh(self, indices: Sequence[int]) -> List[int]:
        totals = list(self.totals)
        for j in indices:
            old = self.parts[j]
            new = caterpillar_vertex_counts(self.degrees, j)
            self.parts[j] = new
            for i in range(3):
                totals[i] += new[i] - old[i]
        return totals

    def _around(self, j: int) -> List[int]:
        return [i for i in (j - 1, j, j + 1) if 0 <= i < len(self.degrees)]

    def step(self, rng, target: int) -> bool:
        """Propose one move and accept or undo it; returns whether state changed"""
        before = _energy(self.totals, target)
        roll = rng.random()
        half = config.SEARCH_EXTEND_PROBABILITY / 2

        if roll < half:
            end = len(self.degrees) - 1
            if self.degrees[end] < (2 if end > 0 else 1):
                return False
            self.degrees.append(self.degrees[end])
            self.parts.append((0, 0, 0))
            totals = self._refresh(self._around(end + 1))
            if _accept(_energy(totals, target) - before, rng):
                self.totals = totals
                return True
            self.degrees.pop()
            self.parts.pop()
            self._refresh(self._around(end))
            return False

        if roll < 2 * half:
            end = len(self.degrees) - 1
            if end == 0:
                return False
            removed_degree, removed_part = self.degrees.pop(), self.parts.pop()
            totals = self._refresh(self._around(end - 1))
            totals = [totals[i] - removed_part[i] for i in range(3)]
            if _accept(_energy(totals, target) - before, rng):
                self.totals = totals
                return True
            self.degrees.append(removed_degree)
            self.parts.append(removed_part)
            self._refresh(self._around(end - 1))
            return False

        j = int(rng.integers(0, len(self.degrees)))
        delta = 1 if rng.random() < 0.5 else -1
        if self.degrees[j] + delta < self._required(j):
            return False
        self.degrees[j] += delta
        totals = self._refresh(self._around(j))
        if _accept(_energy(totals, target) - before, rng):
            self.totals = totals
            return True
        self.degrees[j] -= delta
        self._refresh(self._around(j))
        return False


class _IndexedSet:
    """Set with O(1) add, remove and uniform choice"""

    def __init__(self, items=()):
        self.items: List[int] = []
        self.position: Dict[int, int] = {}
        for item in items:
            self.add(item)

    def add(self, item: int):
        if item not in self.position:
            self.position[item] = len(self.items)
            self.items.append(item)

    def discard(self, item: int):
        index = self.position.pop(item, None)
        if index is None:
            return
        last = self.items.pop()
        if index < len(self.items):
            self.items[index] = last
            self.position[last] = index

    def choice(self, rng) -> int:
        return self.items[int(rng.integers(0, len(self.items)))]

    def __len__(self):
        return len(self.items)


class _GeneralWalk:
    """Annealing state over arbitrary trees: attach or detach a leaf"""

    def __init__(self, t: Tree):
        self.adjacency: Dict[int, set] = {v: set(t.adjacency[v]) for v in range(t.n)}
        self.next_id = t.n
        self.vertices = _IndexedSet(range(t.n))
        self.leaves = _IndexedSet(v for v in range(t.n) if len(self.adjacency[v]) == 1)
        self.parts = {v: self._part(v) for v in range(t.n)}
        self.totals = [sum(part[i] for part in self.parts.values()) for i in range(3)]

    def _part(self, v: int) -> Tuple[int, int, int]:
        d = len(self.adjacency[v])
        arms = [len(self.adjacency[u]) - 1 for u in self.adjacency[v]]
        arm_sum = sum(arms)
        paths = (arm_sum * arm_sum - sum(a * a for a in arms)) // 2
        wyes = comb(d - 1, 2) * arm_sum if d >= 3 else 0
        return paths, comb(d, 4), wyes

    def _update(self, indices) -> None:
        for v in indices:
            new = self._part(v)
            old = self.parts.get(v, (0, 0, 0))
            self.parts[v] = new
            for i in range(3):
                self.totals[i] += new[i] - old[i]

    def _mark_leaf(self, v: int):
        if len(self.adjacency[v]) == 1:
            self.leaves.add(v)
        else:
            self.leaves.discard(v)

    def attach(self, v: int, w: int):
        self.adjacency[w] = {v}
        self.adjacency[v].add(w)
        self.vertices.add(w)
        self._mark_leaf(w)
        self._mark_leaf(v)
        self._update([v] + list(self.adjacency[v]))

    def detach(self, w: int) -> int:
        (v,) = self.adjacency[w]
        self.adjacency[v].discard(w)
        del self.adjacency[w]
        self.vertices.discard(w)
        self.leaves.discard(w)
        old = self.parts.pop(w)
        for i in range(3):
            self.totals[i] -= old[i]
        self._mark_leaf(v)
        self._update([v] + list(self.adjacency[v]))
        return v

    def step(self, rng, target: int) -> bool:
        before = _energy(self.totals, target)
        if rng.random() < 0.5 or len(self.vertices) <= 2:
            v = self.vertices.choice(rng)
            w = self.next_id
            self.next_id += 1
            self.attach(v, w)
            if _accept(_energy(self.totals, target) - before, rng):
                return True
            self.detach(w)
            return False
        w = self.leaves.choice(rng)
        v = self.detach(w)
        if _accept(_energy(self.totals, target) - before, rng):
            return True
        self.attach(v, w)
        return False

    def to_tree(self) -> Tree:
        labels = {v: i for i, v in enumerate(sorted(self.adjacency))}
        edges = [(labels[u], labels[w]) for u in self.adjacency for w in self.adjacency[u] if u < w]
        return Tree.from_edges(len(labels), edges, validate=False)


def _run_restart(task) -> SearchResult:
    """One seeded annealing run; stops at the first witness"""
    target, budget, seed, general = task
    rng = np.random.default_rng(seed)
    if general:
        low, high = config.SEARCH_GENERAL_INITIAL_ORDER
        walk = _GeneralWalk(random_tree(int(rng.integers(low, high + 1)), int(rng.integers(0, 2 ** 32))))
        snapshot = walk.to_tree
    else:
        low, high = config.SEARCH_INITIAL_SPINE
        m = int(rng.integers(low, high + 1))
        degrees = rng.integers(config.SEARCH_INITIAL_MIN_DEGREE,
                               config.SEARCH_INITIAL_MAX_DEGREE + 1, size=m).tolist()
        walk = _CaterpillarWalk(degrees)
        snapshot = lambda: tuple(walk.degrees)

    best_energy = _energy(walk.totals, target)
    best = snapshot()
    moves = 0
    while moves < budget and not _is_witness(walk.totals, target):
        moves += 1
        if walk.step(rng, target):
            energy = _energy(walk.totals, target)
            if energy < best_energy:
                best_energy = energy
                best = snapshot()
    if _is_witness(walk.totals, target):
        best = snapshot()

    if general:
        tree, spine = best, None
    else:
        tree, spine = caterpillar(best), best
    profile = profile5_fast(tree)
    return SearchResult(tree, profile, _is_witness((profile.P, profile.S, profile.Y), target),
                        moves, 1, spine)


def search_equality_trees(target_P: int, budget: int, seed: int,
                          restarts: Optional[int] = None, general: bool = False,
                          executor=None) -> SearchResult:
    """Anneal towards a tree with Y = 9S + P and min(P, S, Y) >= target_P

    Energy is |Y - 9S - P| plus the shortfall of min(P, S, Y) below the
    target. The budget is split over independent seeded restarts; the first
    converged restart wins, otherwise the lowest-energy one. The returned
    profile is an exact recount of the returned tree.

    Args:
        target_P: Lower bound required for each of P, S and Y
        budget: Total number of proposed moves
        seed: Seed for all restarts
        restarts: Number of restarts (defaults to config.SEARCH_RESTARTS)
        general: Use leaf attach/detach moves on arbitrary trees
        executor: Optional executor running restarts in parallel

    Returns:
        SearchResult: Best tree found, flagged converged or not
    """
    restarts = restarts or config.SEARCH_RESTARTS
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2 ** 32, size=restarts).tolist()
    per_restart = max(1, budget // restarts)
    tasks = [(target_P, per_restart, s, general) for s in seeds]

    if executor is None:
        results = []
        for task in tasks:
            results.append(_run_restart(task))
            if results[-1].converged:
                break
    else:
        results = list(executor.map(_run_restart, tasks))
        for i, result in enumerate(results):
            if result.converged:
                results = results[:i + 1]
                break

    def rank(item):
        index, result = item
        prof = result.profile
        return (not result.converged, _energy((prof.P, prof.S, prof.Y), target_P), index)

    _, chosen = min(enumerate(results), key=rank)
    total_moves = sum(r.moves for r in results)
    logger.info("Equality search: converged=%s after %d moves over %d restarts (P=%d S=%d Y=%d)",
                chosen.converged, total_moves, len(results),
                chosen.profile.P, chosen.profile.S, chosen.profile.Y)
    return SearchResult(chosen.tree, chosen.profile, chosen.converged, total_moves, len(results),
                        chosen.spine_degrees)
