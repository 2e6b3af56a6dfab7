"""
Corpus I/O
==========

Tree text format, corpus specifications for sweeps, and streamed CSV output.

Tree text format: first line "n", then n-1 lines "u v" (0 <= u < v < n),
ASCII decimal, newline-terminated. A file may hold several trees one after
another; blank lines between blocks are ignored.
"""

import contextlib
import logging
import os
import sys
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

import config
from tree_core import (MillipedeSpec, PreconditionError, Tree, TreeError, TreeFormatError,
                       CapabilityError, enumerate_trees, millipede, random_tree)

logger = logging.getLogger(__name__)


# Tree text format

def format_tree(t: Tree) -> str:
    lines = [str(t.n)]
    lines.extend(f"{u} {v}" for u, v in sorted(t.edges()))
    return "\n".join(lines) + "\n"


def _parse_int(token: str, line_no: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise TreeFormatError(f"line {line_no}: expected an integer, got {token!r}") from None


def parse_trees(text: str) -> List[Tree]:
    """Parse every tree block in text

    Args:
        text: Contents of a tree file

    Returns:
        list: Trees in file order

    Raises:
        TreeFormatError: Malformed numbers, truncated blocks, or edges that
            do not form a tree
    """
    rows = [(no, line.split()) for no, line in enumerate(text.splitlines(), start=1)]
    rows = [(no, tokens) for no, tokens in rows if tokens]

    trees = []
    pos = 0
    while pos < len(rows):
        no, tokens = rows[pos]
        if len(tokens) != 1:
            raise TreeFormatError(f"line {no}: expected a vertex count, got {' '.join(tokens)!r}")
        n = _parse_int(tokens[0], no)
        if n < 1:
            raise TreeFormatError(f"line {no}: vertex count must be at least 1, got {n}")
        block = rows[pos + 1:pos + n]
        if len(block) != n - 1:
            raise TreeFormatError(f"line {no}: tree on {n} vertices needs {n - 1} edge lines, "
                                  f"found {len(block)}")
        edges = []
        for edge_no, edge_tokens in block:
            if len(edge_tokens) != 2:
                raise TreeFormatError(f"line {edge_no}: expected 'u v', got {' '.join(edge_tokens)!r}")
            edges.append((_parse_int(edge_tokens[0], edge_no), _parse_int(edge_tokens[1], edge_no)))
        try:
            trees.append(Tree.from_edges(n, edges))
        except TreeFormatError:
            raise
        except TreeError as e:
            raise TreeFormatError(f"tree starting at line {no}: {e}") from e
        pos += n
    return trees


def parse_tree(text: str) -> Tree:
    trees = parse_trees(text)
    if len(trees) != 1:
        raise TreeFormatError(f"expected exactly one tree, found {len(trees)}")
    return trees[0]


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="ascii") as handle:
            return handle.read()
    except UnicodeDecodeError as e:
        raise TreeFormatError(f"{path}: byte {e.start} is not ASCII") from None


def read_trees(path: str) -> List[Tree]:
    trees = parse_trees(_read_text(path))
    logger.debug("Read %d trees from %s", len(trees), path)
    return trees


def read_tree(path: str) -> Tree:
    return parse_tree(_read_text(path))


def write_trees(trees: Iterable[Tree], path: str) -> int:
    """Write trees as consecutive blocks; returns how many were written"""
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    written = 0
    with open(path, "w", encoding="ascii", newline="\n") as handle:
        for t in trees:
            handle.write(format_tree(t))
            written += 1
    logger.debug("Wrote %d trees to %s", written, path)
    return written


def write_tree(t: Tree, path: str) -> None:
    write_trees([t], path)


# Corpus specifications

@dataclass(frozen=True)
class CorpusSpec:
    """Where a sweep gets its trees from

    kinds:
        exhaustive  every isomorphism type with 1..max_n vertices
        random      `count` uniform labeled trees, orders in [min_n, max_n]
        file        every tree block in `path`
        millipede   the single tree millipede(spec)
    """

    kind: str
    max_n: int = 0
    min_n: int = 0
    count: int = 0
    seed: Optional[int] = None
    path: Optional[str] = None
    millipede: Optional[MillipedeSpec] = None

    def __post_init__(self):
        if self.kind not in ("exhaustive", "random", "file", "millipede"):
            raise PreconditionError(f"unknown corpus kind {self.kind!r}")
        if self.kind == "exhaustive" and not 1 <= self.max_n <= config.MAX_EXHAUSTIVE_ORDER:
            raise CapabilityError(f"exhaustive corpus needs 1 <= N <= {config.MAX_EXHAUSTIVE_ORDER}, "
                                  f"got {self.max_n}")
        if self.kind == "random":
            if self.seed is None:
                raise PreconditionError("random corpora need an explicit seed")
            if self.count < 0 or not 1 <= self.min_n <= self.max_n:
                raise PreconditionError(f"bad random corpus parameters count={self.count}, "
                                        f"n={self.min_n}-{self.max_n}")
        if self.kind == "file" and not self.path:
            raise PreconditionError("file corpus needs a path")
        if self.kind == "millipede" and self.millipede is None:
            raise PreconditionError("millipede corpus needs a MillipedeSpec")


def parse_int_list(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip() != "")
    except ValueError:
        raise PreconditionError(f"expected a comma-separated integer list, got {text!r}") from None


def parse_corpus_spec(text: str) -> CorpusSpec:
    """Parse exhaustive:N, random:count:n:seed, file:path or millipede:D:n

    For random corpora n is either a single order or a range LO-HI.
    """
    kind, _, rest = text.partition(":")
    try:
        if kind == "exhaustive":
            return CorpusSpec("exhaustive", max_n=int(rest))
        if kind == "random":
            count, orders, seed = rest.split(":")
            low, _, high = orders.partition("-")
            low_n = int(low)
            high_n = int(high) if high else low_n
            return CorpusSpec("random", count=int(count), min_n=low_n, max_n=high_n, seed=int(seed))
        if kind == "file":
            return CorpusSpec("file", path=rest)
        if kind == "millipede":
            d_text, n_text = rest.rsplit(":", 1)
            spec = MillipedeSpec(parse_int_list(d_text), int(n_text))
            return CorpusSpec("millipede", millipede=spec)
    except ValueError as e:
        if isinstance(e, TreeError):
            raise
        raise PreconditionError(f"cannot parse corpus spec {text!r}: {e}") from None
    raise PreconditionError(f"unknown corpus kind in {text!r}")


def iter_corpus(spec: CorpusSpec) -> Iterator[Tree]:
    """Trees of a corpus in a deterministic order"""
    if spec.kind == "exhaustive":
        for k in range(1, spec.max_n + 1):
            yield from enumerate_trees(k, limit=config.MAX_EXHAUSTIVE_ORDER)
    elif spec.kind == "random":
        rng = np.random.default_rng(spec.seed)
        orders = rng.integers(spec.min_n, spec.max_n + 1, size=spec.count)
        seeds = rng.integers(0, 2 ** 32, size=spec.count)
        for order, seed in zip(orders.tolist(), seeds.tolist()):
            yield random_tree(order, seed)
    elif spec.kind == "file":
        yield from read_trees(spec.path)
    else:
        yield millipede(spec.millipede)


def load_corpus(text: str) -> List[Tree]:
    trees = list(iter_corpus(parse_corpus_spec(text)))
    logger.info("Corpus %s: %d trees", text, len(trees))
    return trees


# CSV output

@contextlib.contextmanager
def open_output(path: Optional[str]):
    """Text handle for path, or stdout for None / '-'"""
    if path in (None, "-"):
        yield sys.stdout
        return
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        yield handle


def stream_csv(rows: Iterable[dict], header: Sequence[str], handle,
               chunk_size: Optional[int] = None) -> int:
    """Write dict rows as CSV in chunks through pandas

    Args:
        rows: Row dicts keyed by header names (extra keys are dropped)
        header: Column order
        handle: Open text handle
        chunk_size: Rows per DataFrame (defaults to config.CSV_CHUNK_SIZE)

    Returns:
        int: Number of data rows written
    """
    chunk_size = chunk_size or config.CSV_CHUNK_SIZE
    terminator = config.CSV_LINE_TERMINATOR
    written = 0
    chunk: List[dict] = []

    def flush(first: bool):
        frame = pd.DataFrame(chunk, columns=list(header))
        frame.to_csv(handle, header=first, index=False, lineterminator=terminator)

    for row in rows:
        chunk.append(row)
        if len(chunk) >= chunk_size:
            flush(written == 0)
            written += len(chunk)
            chunk = []
    if chunk or written == 0:
        flush(written == 0)
        written += len(chunk)
    return written


def write_csv(rows: Iterable[dict], header: Sequence[str], path: Optional[str]) -> int:
    with open_output(path) as handle:
        count = stream_csv(rows, header, handle)
    if path not in (None, "-"):
        logger.info("Wrote %d rows to %s", count, path)
    return count
