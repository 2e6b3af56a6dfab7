"""
Profile Engine
==============

Exact subtree counting. A one-pass census of connected k-vertex subsets
classifies every copy by isomorphism type; degree formulas give the 5-vertex
path, star and wye counts without enumeration.

Counts are copies: vertex subsets inducing a subtree of the given type.
Injective homomorphism counts are copies times |Aut(R)|.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import config
from tree_core import (PreconditionError, Tree, automorphism_count, canonical_string,
                       ordered_types)

logger = logging.getLogger(__name__)


class UndefinedProfileError(ValueError):
    """Profile requested for a tree with no k-vertex subtrees"""


@dataclass(frozen=True)
class KProfile:
    """Copy counts of every k-vertex type, in enumerate_trees order"""

    k: int
    counts: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if any(c < 0 for c in self.counts):
            raise ValueError(f"counts must be non-negative, got {self.counts}")

    @property
    def z(self) -> int:
        return sum(self.counts)

    @property
    def p(self) -> Tuple[Fraction, ...]:
        """Normalized profile; raises UndefinedProfileError when z = 0"""
        z = self.z
        if z == 0:
            raise UndefinedProfileError(f"no {self.k}-vertex subtrees, profile undefined")
        return tuple(Fraction(c, z) for c in self.counts)

    def homomorphism_counts(self) -> Tuple[int, ...]:
        types = ordered_types(self.k)
        return tuple(c * automorphism_count(tree) for c, (tree, _) in zip(self.counts, types))

    def l1_distance(self, other: "KProfile") -> Fraction:
        if other.k != self.k:
            raise ValueError(f"cannot compare a {self.k}-profile with a {other.k}-profile")
        return sum((abs(a - b) for a, b in zip(self.p, other.p)), Fraction(0))


@dataclass(frozen=True)
class Profile5:
    """5-vertex path, star and wye counts"""

    P: int
    S: int
    Y: int

    @property
    def total(self) -> int:
        return self.P + self.S + self.Y

    def to_kprofile(self) -> KProfile:
        return KProfile(5, (self.P, self.S, self.Y))

    @classmethod
    def from_kprofile(cls, profile: KProfile) -> "Profile5":
        if profile.k != 5:
            raise ValueError(f"expected a 5-profile, got k={profile.k}")
        return cls(*profile.counts)

    def __add__(self, other: "Profile5") -> "Profile5":
        return Profile5(self.P + other.P, self.S + other.S, self.Y + other.Y)

    def __sub__(self, other: "Profile5") -> "Profile5":
        return Profile5(self.P - other.P, self.S - other.S, self.Y - other.Y)


# Census

def connected_subsets(t: Tree, k: int, roots: Optional[Sequence[int]] = None) -> Iterator[Tuple[int, ...]]:
    """Every connected k-vertex subset whose smallest vertex is in roots

    Each subset is produced once: from its minimum vertex r, candidate
    boundary vertices larger than r are either taken or dropped for good.
    In a tree a dropped vertex never comes back as a candidate.
    """
    adjacency = t.adjacency
    roots = range(t.n) if roots is None else roots
    for root in roots:
        stack = [((root,), tuple(w for w in adjacency[root] if w > root))]
        while stack:
            subset, candidates = stack.pop()
            if len(subset) == k:
                yield subset
                continue
            if not candidates:
                continue
            v = candidates[-1]
            rest = candidates[:-1]
            stack.append((subset, rest))
            stack.append((subset + (v,),
                          rest + tuple(w for w in adjacency[v] if w > root and w not in subset)))


@lru_cache(maxsize=None)
def _type_index(k: int) -> "_TypeIndex":
    return _TypeIndex(k)


class _TypeIndex:
    """Maps a connected k-subset to its coordinate in the k-profile"""

    def __init__(self, k: int):
        types = ordered_types(k)
        self.size = len(types)
        self.by_code = {code.code.decode("ascii"): i for i, (_, code) in enumerate(types)}
        signatures = Counter(tuple(sorted(tree.degrees())) for tree, _ in types)
        self.by_signature = {}
        for i, (tree, _) in enumerate(types):
            signature = tuple(sorted(tree.degrees()))
            if signatures[signature] == 1:
                self.by_signature[signature] = i

    def classify(self, t: Tree, subset: Tuple[int, ...]) -> int:
        members = set(subset)
        inner = [[w for w in t.adjacency[v] if w in members] for v in subset]
        signature = tuple(sorted(len(row) for row in inner))
        index = self.by_signature.get(signature)
        if index is not None:
            return index
        position = {v: i for i, v in enumerate(subset)}
        local = [[position[w] for w in row] for row in inner]
        return self.by_code[canonical_string(local)]


def census_counts(t: Tree, k: int, roots: Optional[Sequence[int]] = None) -> List[int]:
    """Per-type copy counts over the subsets rooted at roots"""
    index = _type_index(k)
    counts = [0] * index.size
    for subset in connected_subsets(t, k, roots):
        counts[index.classify(t, subset)] += 1
    return counts


def _census_task(task) -> List[int]:
    t, k, roots = task
    return census_counts(t, k, roots)


def k_profile(t: Tree, k: int, executor=None, chunks: Optional[int] = None) -> KProfile:
    """k-profile of t from a single census pass

    Args:
        t: Tree to profile
        k: Subtree order (k >= 1, at most config.MAX_ENUMERATION_ORDER)
        executor: Optional concurrent.futures executor; roots are split
            into chunks and partial counts added
        chunks: Number of root chunks when an executor is given (defaults
            to config.ROOT_CHUNKS_PER_WORKER; callers knowing the pool size
            pass a multiple of it)

    Returns:
        KProfile: Exact counts in enumerate_trees order
    """
    if k < 1:
        raise PreconditionError(f"subtree order must be at least 1, got {k}")
    if executor is None:
        return KProfile(k, tuple(census_counts(t, k)))

    chunks = max(1, min(t.n, chunks or config.ROOT_CHUNKS_PER_WORKER))
    tasks = [(t, k, tuple(range(start, t.n, chunks))) for start in range(chunks)]
    totals = [0] * len(ordered_types(k))
    for partial in executor.map(_census_task, tasks):
        totals = [a + b for a, b in zip(totals, partial)]
    return KProfile(k, tuple(totals))


def count_copies(r: Tree, t: Tree, homomorphisms: bool = False) -> int:
    """Number of vertex subsets of t inducing a subtree isomorphic to r

    With homomorphisms=True the injective homomorphism count is returned.
    """
    k = r.n
    if k > t.n:
        return 0
    target_code = canonical_string(r.adjacency)
    target_signature = tuple(sorted(r.degrees()))
    copies = 0
    for subset in connected_subsets(t, k):
        members = set(subset)
        inner = [[w for w in t.adjacency[v] if w in members] for v in subset]
        if tuple(sorted(len(row) for row in inner)) != target_signature:
            continue
        position = {v: i for i, v in enumerate(subset)}
        if canonical_string([[position[w] for w in row] for row in inner]) == target_code:
            copies += 1
    return copies * automorphism_count(r) if homomorphisms else copies


def naive_k_profile(t: Tree, k: int) -> KProfile:
    """C(n, k) subset filter; slow, used as an independent oracle"""
    index = {code.code.decode("ascii"): i for i, (_, code) in enumerate(ordered_types(k))}
    counts = [0] * len(index)
    for subset in combinations(range(t.n), k):
        members = set(subset)
        edges = sum(1 for v in subset for w in t.adjacency[v] if w in members) // 2
        if edges != k - 1:
            continue
        position = {v: i for i, v in enumerate(subset)}
        local = [[position[w] for w in t.adjacency[v] if w in members] for v in subset]
        counts[index[canonical_string(local)]] += 1
    return KProfile(k, tuple(counts))


def subtree_total(t: Tree, k: int) -> int:
    """Z_k(T) by a rooted polynomial product, truncated at degree k"""
    if k < 1:
        raise PreconditionError(f"subtree order must be at least 1, got {k}")
    parent = [-1] * t.n
    order = [0]
    seen = [False] * t.n
    seen[0] = True
    for u in order:
        for w in t.adjacency[u]:
            if not seen[w]:
                seen[w] = True
                parent[w] = u
                order.append(w)

    # poly[v][j]: connected j-subsets whose top vertex is v
    poly: Dict[int, List[int]] = {}
    total = 0
    for v in reversed(order):
        current = [0, 1] + [0] * (k - 1)
        for w in t.adjacency[v]:
            if w == parent[v]:
                continue
            child = poly.pop(w)
            merged = [0] * (k + 1)
            for i, a in enumerate(current):
                if a == 0:
                    continue
                merged[i] += a
                for j in range(1, k + 1 - i):
                    merged[i + j] += a * child[j]
            current = merged
        poly[v] = current
        total += current[k]
    return total


# Degree formulas

def centered_counts(t: Tree) -> List[Profile5]:
    """Per-vertex P(v), S(v), Y(v)

    P(v): 5-paths with middle vertex v. S(v): 5-stars centred at v.
    Y(v): wyes whose degree-3 vertex is v.
    """
    degrees = t.degrees()
    result = []
    for v in range(t.n):
        d = degrees[v]
        arms = [degrees[u] - 1 for u in t.adjacency[v]]
        arm_sum = sum(arms)
        paths = (arm_sum * arm_sum - sum(a * a for a in arms)) // 2
        stars = comb(d, 4)
        wyes = comb(d - 1, 2) * arm_sum if d >= 3 else 0
        result.append(Profile5(paths, stars, wyes))
    return result


def profile5_fast(t: Tree) -> Profile5:
    total = Profile5(0, 0, 0)
    for part in centered_counts(t):
        total = total + part
    return total


def wye_count_by_edges(t: Tree) -> int:
    """Y(T) summed over edges: the degree-3 end and the end carrying the long leg"""
    degrees = t.degrees()
    return sum(comb(degrees[u] - 1, 2) * (degrees[v] - 1) + comb(degrees[v] - 1, 2) * (degrees[u] - 1)
               for u, v in t.edges())


def caterpillar_vertex_counts(spine_degrees: Sequence[int], j: int) -> Tuple[int, int, int]:
    """(P(v), S(v), Y(v)) of spine vertex j of caterpillar(spine_degrees)

    Pendant leaves contribute nothing, so the whole caterpillar profile is
    the sum over spine vertices.
    """
    d = spine_degrees[j]
    arms = []
    if j > 0:
        arms.append(spine_degrees[j - 1] - 1)
    if j < len(spine_degrees) - 1:
        arms.append(spine_degrees[j + 1] - 1)
    paths = arms[0] * arms[1] if len(arms) == 2 else 0
    wyes = comb(d - 1, 2) * sum(arms) if d >= 3 else 0
    return paths, comb(d, 4), wyes


def caterpillar_profile5(spine_degrees: Sequence[int]) -> Profile5:
    totals = [0, 0, 0]
    for j in range(len(spine_degrees)):
        for i, value in enumerate(caterpillar_vertex_counts(spine_degrees, j)):
            totals[i] += value
    return Profile5(*totals)


def star_count(t: Tree, k: int) -> int:
    """Copies of K_{1,k-1} for k >= 3"""
    if k < 3:
        raise PreconditionError(f"star identity needs k >= 3, got {k}")
    return sum(comb(d, k - 1) for d in t.degrees())


def nonstar_count(t: Tree, k: int) -> int:
    """R_k(T): k-vertex subtrees that are not stars

    The only 2-vertex tree is K_{1,1}, so R_2 = 0.
    """
    if k < 2:
        raise PreconditionError(f"non-star count needs k >= 2, got {k}")
    if k == 2:
        return 0
    total = profile5_fast(t).total if k == 5 else subtree_total(t, k)
    return total - star_count(t, k)


def profile_map(function: Callable, trees: Sequence[Tree], executor=None) -> List:
    """Apply function to every tree, in input order, optionally through an executor"""
    if executor is None:
        return [function(t) for t in trees]
    return list(executor.map(function, trees))
