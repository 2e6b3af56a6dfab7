"""
Tree Core
=========

Immutable unlabeled trees, canonical codes, exhaustive enumeration and the
constructions used when studying local profiles: millipedes and general
caterpillars, gluing along a path, (i,j)-cuts and uniform random labeled trees.

Vertices are 0-based; a millipede spine v_1..v_n occupies indices 0..n-1.
"""

from __future__ import annotations

import logging
from collections import Counter, deque
from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

import config

logger = logging.getLogger(__name__)


class TreeError(ValueError):
    """Input does not describe a valid tree"""


class PreconditionError(TreeError):
    """An operation was called outside its domain"""


class CapabilityError(TreeError):
    """Request exceeds a configured computational limit"""


class TreeFormatError(TreeError):
    """Malformed tree text"""


@dataclass(frozen=True)
class Tree:
    """Unlabeled tree stored as sorted adjacency tuples"""

    n: int
    adjacency: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise TreeError(f"a tree needs at least one vertex, got n={self.n}")
        if len(self.adjacency) != self.n:
            raise TreeError(f"adjacency has {len(self.adjacency)} rows for n={self.n}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]], validate: bool = True) -> "Tree":
        """Build a tree from an edge list

        Args:
            n: Number of vertices
            edges: Pairs (u, v) with 0 <= u, v < n
            validate: Check connectivity, edge count and multi-edges with networkx

        Returns:
            Tree: The tree with sorted adjacency lists
        """
        if n < 1:
            raise TreeError(f"a tree needs at least one vertex, got n={n}")
        edge_list = [(int(u), int(v)) for u, v in edges]
        adjacency: List[List[int]] = [[] for _ in range(n)]
        for u, v in edge_list:
            if not (0 <= u < n and 0 <= v < n):
                raise TreeError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise TreeError(f"self-loop at vertex {u}")
            adjacency[u].append(v)
            adjacency[v].append(u)

        if validate:
            if len(edge_list) != n - 1:
                raise TreeError(f"a tree on {n} vertices has {n - 1} edges, got {len(edge_list)}")
            graph = nx.Graph()
            graph.add_nodes_from(range(n))
            graph.add_edges_from(edge_list)
            if graph.number_of_edges() != len(edge_list):
                raise TreeError("parallel edges are not allowed")
            if not nx.is_tree(graph):
                raise TreeError("edges do not form a connected acyclic graph")

        return cls(n, tuple(tuple(sorted(row)) for row in adjacency))

    def degree(self, v: int) -> int:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range for a tree on {self.n} vertices")
        return len(self.adjacency[v])

    def degrees(self) -> Tuple[int, ...]:
        return tuple(len(row) for row in self.adjacency)

    def max_degree(self) -> int:
        return max(len(row) for row in self.adjacency)

    def is_leaf(self, v: int) -> bool:
        """A vertex of degree at most one; the single-vertex tree counts"""
        return self.degree(v) <= 1

    def leaves(self) -> List[int]:
        return [v for v in range(self.n) if len(self.adjacency[v]) <= 1]

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def relabeled(self, permutation: Sequence[int]) -> "Tree":
        """Copy of the tree where vertex v becomes permutation[v]"""
        if sorted(permutation) != list(range(self.n)):
            raise TreeError("relabeling must be a permutation of the vertex set")
        return Tree.from_edges(self.n, ((permutation[u], permutation[v]) for u, v in self.edges()),
                               validate=False)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges())
        return graph


@dataclass(frozen=True, order=True)
class CanonicalCode:
    """Byte string equal for two trees exactly when they are isomorphic"""

    code: bytes

    def __str__(self):
        return self.code.decode("ascii")


def degree(t: Tree, v: int) -> int:
    return t.degree(v)


def max_degree(t: Tree) -> int:
    return t.max_degree()


# Canonical forms

def tree_centers(adjacency: Sequence[Sequence[int]]) -> List[int]:
    """Center or bicenter of a tree, by repeatedly peeling leaves"""
    n = len(adjacency)
    if n <= 2:
        return list(range(n))
    deg = [len(row) for row in adjacency]
    leaves = [v for v in range(n) if deg[v] <= 1]
    removed = len(leaves)
    while removed < n:
        next_leaves = []
        for u in leaves:
            deg[u] = 0
            for w in adjacency[u]:
                if deg[w] > 0:
                    deg[w] -= 1
                    if deg[w] == 1:
                        next_leaves.append(w)
        removed += len(next_leaves)
        leaves = next_leaves
    return sorted(leaves)


def _encode_rooted(adjacency: Sequence[Sequence[int]], root: int,
                   blocked: Optional[int] = None) -> Tuple[str, int]:
    """Parenthesis code and automorphism count of the tree hanging from root

    The edge to `blocked` is ignored, which lets a bicentral tree be split
    into its two halves.
    """
    parent = {root: blocked}
    order = [root]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in adjacency[u]:
            if w != parent[u] and w not in parent:
                parent[w] = u
                order.append(w)
                queue.append(w)

    codes: Dict[int, str] = {}
    auts: Dict[int, int] = {}
    for u in reversed(order):
        child_codes = sorted(codes.pop(w) for w in adjacency[u] if w != parent[u] and w in codes)
        aut = 1
        for w in adjacency[u]:
            if w != parent[u] and w in auts:
                aut *= auts.pop(w)
        for multiplicity in Counter(child_codes).values():
            aut *= factorial(multiplicity)
        codes[u] = "(" + "".join(child_codes) + ")"
        auts[u] = aut
    return codes[root], auts[root]


def canonical_string(adjacency: Sequence[Sequence[int]]) -> str:
    """Center-rooted AHU string of a tree given by adjacency lists"""
    return min(_encode_rooted(adjacency, c)[0] for c in tree_centers(adjacency))


def canonicalize(t: Tree) -> CanonicalCode:
    return CanonicalCode(canonical_string(t.adjacency).encode("ascii"))


def automorphism_count(t: Tree) -> int:
    """Order of the automorphism group of t"""
    centers = tree_centers(t.adjacency)
    if len(centers) == 1:
        return _encode_rooted(t.adjacency, centers[0])[1]
    a, b = centers
    code_a, aut_a = _encode_rooted(t.adjacency, a, blocked=b)
    code_b, aut_b = _encode_rooted(t.adjacency, b, blocked=a)
    return aut_a * aut_b * (2 if code_a == code_b else 1)


# Small named trees

def single_vertex() -> Tree:
    return Tree(1, ((),))


def path_tree(n: int) -> Tree:
    """Path on n vertices"""
    return Tree.from_edges(n, ((i, i + 1) for i in range(n - 1)), validate=False)


def star_tree(leaves: int) -> Tree:
    """K_{1,leaves} with the center at vertex 0"""
    return Tree.from_edges(leaves + 1, ((0, i) for i in range(1, leaves + 1)), validate=False)


def spider_tree(legs: Sequence[int]) -> Tree:
    """Center 0 with one pendant path per entry of legs (lengths in edges)"""
    edges = []
    next_id = 1
    for length in legs:
        previous = 0
        for _ in range(length):
            edges.append((previous, next_id))
            previous = next_id
            next_id += 1
    return Tree.from_edges(next_id, edges, validate=False)


def wye_tree() -> Tree:
    """The 5-vertex tree with one degree-3 vertex and legs 2, 1, 1"""
    return spider_tree((2, 1, 1))


def attach_leaf(t: Tree, v: int) -> Tree:
    """Copy of t with a new leaf n attached to v"""
    t.degree(v)
    return Tree.from_edges(t.n + 1, t.edges() + [(v, t.n)], validate=False)


# Enumeration

@lru_cache(maxsize=None)
def _trees_by_code(k: int) -> Tuple[Tuple[Tree, CanonicalCode], ...]:
    """All k-vertex trees, one per isomorphism type, sorted by canonical code"""
    if k == 1:
        base = single_vertex()
        return ((base, canonicalize(base)),)
    found: Dict[CanonicalCode, Tree] = {}
    for smaller, _ in _trees_by_code(k - 1):
        for v in range(smaller.n):
            grown = attach_leaf(smaller, v)
            found.setdefault(canonicalize(grown), grown)
    logger.debug("Enumerated %d trees on %d vertices", len(found), k)
    return tuple((found[code], code) for code in sorted(found))


@lru_cache(maxsize=None)
def _ordered_types(k: int) -> Tuple[Tuple[Tree, CanonicalCode], ...]:
    everything = _trees_by_code(k)
    if k < 4:
        return everything
    path_code = canonicalize(path_tree(k))
    star_code = canonicalize(star_tree(k - 1))
    by_code = dict((code, tree) for tree, code in everything)
    head = ((by_code[path_code], path_code), (by_code[star_code], star_code))
    rest = tuple((tree, code) for tree, code in everything if code not in (path_code, star_code))
    return head + rest


def ordered_types(k: int, limit: Optional[int] = None) -> Tuple[Tuple[Tree, CanonicalCode], ...]:
    """(tree, code) pairs in profile coordinate order: path, star, then by code"""
    limit = config.MAX_ENUMERATION_ORDER if limit is None else limit
    if k < 1:
        raise PreconditionError(f"tree order must be at least 1, got {k}")
    if k > limit:
        raise CapabilityError(f"enumeration of {k}-vertex trees exceeds the limit {limit}")
    return _ordered_types(k)


def enumerate_trees(k: int, limit: Optional[int] = None) -> List[Tree]:
    """One tree per isomorphism type on k vertices, in a fixed order

    The first coordinates are the path and the star (k >= 4), so for k = 5
    the order is (path, star, wye).

    Args:
        k: Number of vertices
        limit: Largest allowed k (defaults to config.MAX_ENUMERATION_ORDER)

    Returns:
        list: Trees T_1^k, ..., T_{N_k}^k
    """
    return [tree for tree, _ in ordered_types(k, limit)]


# Millipedes and caterpillars

@dataclass(frozen=True)
class MillipedeSpec:
    """Periodic pendant sequence d = (d_1..d_l) along a spine of n vertices

    Spine vertex v_j carries d_i + pendant_offset leaves where i = j (mod l),
    residues taken in 1..l.
    """

    d: Tuple[int, ...]
    n: int
    pendant_offset: int = config.DEFAULT_PENDANT_OFFSET

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(int(x) for x in self.d))
        if len(self.d) < 1:
            raise PreconditionError("a millipede needs a non-empty pendant sequence")
        if self.n < 1:
            raise PreconditionError(f"spine length must be at least 1, got {self.n}")
        if any(x < 0 for x in self.d):
            raise PreconditionError(f"pendant sequence must be non-negative, got {self.d}")
        if min(self.d) + self.pendant_offset < 0:
            raise PreconditionError("pendant offset makes a pendant count negative")

    @property
    def period(self) -> int:
        return len(self.d)

    @property
    def label(self) -> str:
        return "(" + ",".join(str(x) for x in self.d) + ")"

    def pendants(self, j: int) -> int:
        """Pendant count at 0-based spine index j"""
        return self.d[j % self.period] + self.pendant_offset

    def vertex_count(self) -> int:
        return self.n + sum(self.pendants(j) for j in range(self.n))


def millipede(spec: MillipedeSpec) -> Tree:
    """The D-millipede T_n^D; spine vertices are 0..n-1, pendants follow"""
    edges = [(j, j + 1) for j in range(spec.n - 1)]
    next_id = spec.n
    for j in range(spec.n):
        for _ in range(spec.pendants(j)):
            edges.append((j, next_id))
            next_id += 1
    return Tree.from_edges(next_id, edges, validate=False)


def caterpillar(spine_degrees: Sequence[int]) -> Tree:
    """Caterpillar whose spine vertex j (index j) has degree spine_degrees[j]"""
    m = len(spine_degrees)
    if m < 1:
        raise PreconditionError("a caterpillar needs at least one spine vertex")
    edges = [(j, j + 1) for j in range(m - 1)]
    next_id = m
    for j, target in enumerate(spine_degrees):
        spine_neighbors = (j > 0) + (j < m - 1)
        pendants = target - spine_neighbors
        if pendants < 0:
            raise PreconditionError(f"spine vertex {j} cannot have degree {target}")
        for _ in range(pendants):
            edges.append((j, next_id))
            next_id += 1
    return Tree.from_edges(next_id, edges, validate=False)


def depth_two_tree(d: int, c: int) -> Tree:
    """Root 0 of degree d whose children all have degree c"""
    if d < 1 or c < 1:
        raise PreconditionError(f"depth-two tree needs d >= 1 and c >= 1, got d={d}, c={c}")
    edges = []
    next_id = d + 1
    for child in range(1, d + 1):
        edges.append((0, child))
        for _ in range(c - 1):
            edges.append((child, next_id))
            next_id += 1
    return Tree.from_edges(next_id, edges, validate=False)


# Gluing and cutting

def _require_vertex(t: Tree, v: int, role: str) -> None:
    if not 0 <= v < t.n:
        raise PreconditionError(f"{role} {v} out of range for a tree on {t.n} vertices")


def glue(s: Tree, t: Tree, k: int, leaf_s: Optional[int] = None, leaf_t: Optional[int] = None) -> Tree:
    """S glued to T along a path with k-1 new vertices

    The chosen leaves end up at distance exactly k. Vertices of s keep their
    indices, the new path follows, then the vertices of t shifted by |s|+k-1.

    Args:
        s, t: Trees to join
        k: Distance between the chosen leaves in the result (k >= 2)
        leaf_s, leaf_t: Leaves to join; default to the lowest-index leaf

    Returns:
        Tree: S glued to T, on |s| + |t| + k - 1 vertices
    """
    if k < 2:
        raise PreconditionError(f"gluing needs k >= 2, got {k}")
    leaf_s = s.leaves()[0] if leaf_s is None else leaf_s
    leaf_t = t.leaves()[0] if leaf_t is None else leaf_t
    _require_vertex(s, leaf_s, "leaf")
    _require_vertex(t, leaf_t, "leaf")
    if not s.is_leaf(leaf_s):
        raise PreconditionError(f"vertex {leaf_s} is not a leaf of the first tree")
    if not t.is_leaf(leaf_t):
        raise PreconditionError(f"vertex {leaf_t} is not a leaf of the second tree")

    shift = s.n + k - 1
    edges = s.edges() + [(u + shift, v + shift) for u, v in t.edges()]
    chain = [leaf_s] + list(range(s.n, s.n + k - 1)) + [leaf_t + shift]
    edges.extend(zip(chain, chain[1:]))
    return Tree.from_edges(s.n + t.n + k - 1, edges, validate=False)


def glue_chain(trees: Sequence[Tree], k: int) -> Tree:
    """T_1 glued to T_2 ... glued to T_m, always on lowest-index leaves"""
    if not trees:
        raise PreconditionError("glue_chain needs at least one tree")
    result = trees[0]
    for nxt in trees[1:]:
        result = glue(result, nxt, k)
    return result


def _pendant_side(t: Tree, root: int, blocked: int, extra: int) -> Tuple[Tree, List[Optional[int]]]:
    """Component of root once the edge to blocked is gone, plus a pendant path

    Vertices are relabeled in BFS order from root (root becomes 0); the
    `extra` new path vertices follow. Returns the tree and, for each new
    index, the original index or None for path vertices.
    """
    original = [root]
    index = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in t.adjacency[u]:
            if w not in index and not (u == root and w == blocked):
                index[w] = len(original)
                original.append(w)
                queue.append(w)

    edges = [(index[u], index[w]) for u in original for w in t.adjacency[u]
             if w in index and index[u] < index[w]]
    m = len(original)
    previous = 0
    for step in range(extra):
        edges.append((previous, m + step))
        previous = m + step
    labels: List[Optional[int]] = list(original) + [None] * extra
    return Tree.from_edges(m + extra, edges, validate=False), labels


def cut_labelled(t: Tree, u: int, v: int, i: int, j: int):
    """(i,j)-cut that also reports where each vertex came from

    Returns:
        tuple: ((T_1, labels_1), (T_2, labels_2)), labels as in _pendant_side
    """
    _require_vertex(t, u, "vertex")
    _require_vertex(t, v, "vertex")
    if v not in t.adjacency[u]:
        raise PreconditionError(f"{{{u}, {v}}} is not an edge")
    if i < 0 or j < 0:
        raise PreconditionError(f"path lengths must be non-negative, got i={i}, j={j}")
    return _pendant_side(t, u, v, i), _pendant_side(t, v, u, j)


def cut(t: Tree, u: int, v: int, i: int, j: int) -> Tuple[Tree, Tree]:
    """Remove {u,v}, hang an i-edge path on u and a j-edge path on v

    u is vertex 0 of T_1 and v is vertex 0 of T_2.
    """
    (first, _), (second, _) = cut_labelled(t, u, v, i, j)
    return first, second


# Random generation

def random_tree(n: int, seed: int) -> Tree:
    """Uniform random labeled tree on n vertices via a Prüfer sequence"""
    if n < 1:
        raise PreconditionError(f"tree order must be at least 1, got {n}")
    if n == 1:
        return single_vertex()
    if n == 2:
        return path_tree(2)
    rng = np.random.default_rng(seed)
    sequence = rng.integers(0, n, size=n - 2).tolist()
    graph = nx.from_prufer_sequence(sequence)
    return Tree.from_edges(n, graph.edges(), validate=False)
