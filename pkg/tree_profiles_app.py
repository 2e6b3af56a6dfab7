#!/usr/bin/env python3
"""
Tree Profiles
Command-line front end: profiles, constructions, bound sweeps, the equality
search and the region plot.

Exit codes: 0 success, 1 a bound check failed or the search did not
converge, 2 usage or I/O error.
"""

import argparse
import contextlib
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import islice
from typing import Iterable, Iterator, List, Optional

import psutil

import config
from bounds_lab import (BoundReport, check_gluing_sandwich, resolve_checker,
                        search_equality_trees)
from corpus_io import (CorpusSpec, format_tree, iter_corpus, load_corpus, open_output,
                       parse_corpus_spec, parse_int_list, read_tree, read_trees,
                       stream_csv, write_csv, write_trees)
from profile_engine import UndefinedProfileError, k_profile
from region_explorer import (DegenerateFacetError, LimitProfileError, default_families,
                             emit_region_plot, facet_constants, family_accumulation_point,
                             hull_facets, paired_family, simple_families)
from tree_core import MillipedeSpec, Tree, TreeError, cut, glue, millipede
from unified_logging import log_exception, setup_unified_logging

logger = logging.getLogger(config.APP_NAME)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

BOUND_NAMES = ["main", "bl", "local", "nonstar", "wye", "glue", "thm2"]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--log-folder', help='Also write a DEBUG log file in this folder')
    common.add_argument('--verbose', action='store_true', help='Console logging at DEBUG level')
    common.add_argument('--jobs', type=int, default=1,
                        help='Worker processes (0 = physical core count)')

    parser = argparse.ArgumentParser(prog='tree_profiles',
                                     description='Local subtree profiles of trees')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('profile', parents=[common], help='k-profiles of trees from a file')
    p.add_argument('--k', default='5', help='Subtree order or comma list of orders')
    p.add_argument('--tree', required=True, help='Tree file (one or more blocks)')
    p.add_argument('--out', help='CSV output (default stdout)')

    p = sub.add_parser('millipede', parents=[common], help='Write a millipede tree')
    p.add_argument('--d', required=True, help='Pendant sequence, e.g. 0,0,3,4,4,3')
    p.add_argument('--n', type=int, required=True, help='Spine length')
    p.add_argument('--offset', type=int, default=config.DEFAULT_PENDANT_OFFSET,
                   help='Pendants per spine vertex beyond d_i')
    p.add_argument('--out', help='Tree file (default stdout)')

    p = sub.add_parser('glue', parents=[common], help='Glue two trees along a path')
    p.add_argument('--s', required=True, help='First tree file')
    p.add_argument('--t', required=True, help='Second tree file')
    p.add_argument('--k', type=int, required=True, help='Distance between the glued leaves')
    p.add_argument('--leaf-s', type=int, help='Leaf of the first tree (default lowest index)')
    p.add_argument('--leaf-t', type=int, help='Leaf of the second tree (default lowest index)')
    p.add_argument('--out', help='Tree file (default stdout)')

    p = sub.add_parser('cut', parents=[common], help='(i,j)-cut of a tree at an edge')
    p.add_argument('--tree', required=True, help='Tree file')
    p.add_argument('--u', type=int, required=True)
    p.add_argument('--v', type=int, required=True)
    p.add_argument('--i', type=int, default=0, help='Pendant path length at u')
    p.add_argument('--j', type=int, default=0, help='Pendant path length at v')
    p.add_argument('--out', help='File for both pieces (default stdout)')

    p = sub.add_parser('verify', parents=[common], help='Check a bound over a corpus')
    p.add_argument('--bound', required=True, choices=BOUND_NAMES)
    p.add_argument('--corpus', required=True,
                   help='exhaustive:N | random:count:n:seed | file:path | millipede:D:n')
    p.add_argument('--k', default='5', help='Order(s) for nonstar, glue and thm2')
    p.add_argument('--out', help='CSV output (default stdout)')

    p = sub.add_parser('search', parents=[common], help='Search for trees with Y = 9S + P')
    p.add_argument('--target', type=int, required=True, help='Required minimum of P, S and Y')
    p.add_argument('--budget', type=int, default=1000000, help='Total number of moves')
    p.add_argument('--seed', type=int, required=True)
    p.add_argument('--restarts', type=int, default=config.SEARCH_RESTARTS)
    p.add_argument('--general', action='store_true', help='Leaf moves on arbitrary trees')
    p.add_argument('--out', help='Write the found tree here')

    p = sub.add_parser('region', parents=[common], help='Limit profiles, hulls and the region plot')
    p.add_argument('--families', default='default',
                   help="'default', 'simple' or families separated by ';', e.g. '1;2;0,0,3,4,4,3'")
    p.add_argument('--dmax', type=int, default=config.DEFAULT_DMAX,
                   help='Largest d of the (0,0,d,d) family')
    p.add_argument('--offset', type=int, default=config.FAMILY_PENDANT_OFFSET)
    p.add_argument('--csv', help='Limit profile CSV (default stdout)')
    p.add_argument('--svg', help='SVG plot')
    p.add_argument('--constants', metavar='CORPUS',
                   help='Print facet-constant lower bounds over this corpus')
    return parser


def worker_count(jobs: int) -> int:
    """--jobs value to a process count; 0 means one per physical core"""
    if jobs > 0:
        return jobs
    return psutil.cpu_count(logical=False) or 1


def make_executor(jobs: int):
    """Process pool for --jobs, or a null context for a single process"""
    if jobs == 1:
        return contextlib.nullcontext(None)
    workers = worker_count(jobs)
    logger.debug("Using %d worker processes", workers)
    return ProcessPoolExecutor(max_workers=workers)


def cmd_profile(args, executor) -> int:
    orders = parse_int_list(args.k)
    trees = read_trees(args.tree)
    several = len(trees) * len(orders) > 1
    header = (['tree', 'k'] if several else []) + config.PROFILE_CSV_HEADER
    chunks = config.ROOT_CHUNKS_PER_WORKER * worker_count(args.jobs)

    def rows():
        for tree_index, t in enumerate(trees):
            for k in orders:
                profile = k_profile(t, k, executor=executor, chunks=chunks)
                for i, count in enumerate(profile.counts):
                    row = {'type_index': i + 1, 'count': count,
                           'probability_num': '', 'probability_den': ''}
                    if profile.z > 0:
                        row['probability_num'] = profile.p[i].numerator
                        row['probability_den'] = profile.p[i].denominator
                    if several:
                        row.update(tree=tree_index, k=k)
                    yield row

    write_csv(rows(), header, args.out)
    return EXIT_OK


def _write_tree_text(text: str, path: Optional[str]):
    with open_output(path) as handle:
        handle.write(text)


def cmd_millipede(args, executor) -> int:
    spec = MillipedeSpec(parse_int_list(args.d), args.n, args.offset)
    t = millipede(spec)
    logger.info("Millipede %s n=%d: %d vertices, max degree %d", spec.label, spec.n, t.n, t.max_degree())
    _write_tree_text(format_tree(t), args.out)
    return EXIT_OK


def cmd_glue(args, executor) -> int:
    t = glue(read_tree(args.s), read_tree(args.t), args.k, args.leaf_s, args.leaf_t)
    logger.info("Glued tree has %d vertices", t.n)
    _write_tree_text(format_tree(t), args.out)
    return EXIT_OK


def cmd_cut(args, executor) -> int:
    first, second = cut(read_tree(args.tree), args.u, args.v, args.i, args.j)
    logger.info("Cut pieces have %d and %d vertices", first.n, second.n)
    if args.out:
        write_trees([first, second], args.out)
    else:
        _write_tree_text(format_tree(first) + format_tree(second), None)
    return EXIT_OK


def _applies(bound: str, t: Tree, k: Optional[int]) -> bool:
    if bound == 'local':
        return t.max_degree() <= 4 and 2 not in t.degrees()
    if bound == 'thm2':
        return t.n >= k
    return True


def _batches(items: Iterable, size: int) -> Iterator[list]:
    it = iter(items)
    while True:
        batch = list(islice(it, size))
        if not batch:
            return
        yield batch


def _verify_reports(args, spec: CorpusSpec, executor) -> Iterator[BoundReport]:
    """Reports in corpus order, one k after another; the corpus is re-read per k"""
    orders = parse_int_list(args.k)

    if args.bound == 'glue':
        for k in orders:
            trees = iter_corpus(spec)
            for s, t in zip(trees, trees):
                yield check_gluing_sandwich(s, t, k)
        return

    for k in (orders if args.bound in ('nonstar', 'thm2') else [None]):
        checker = resolve_checker(args.bound, k)
        skipped = 0
        for batch in _batches(iter_corpus(spec), config.VERIFY_BATCH_SIZE):
            kept = [t for t in batch if _applies(args.bound, t, k)]
            skipped += len(batch) - len(kept)
            if executor is None:
                yield from map(checker, kept)
            else:
                yield from executor.map(checker, kept)
        if skipped:
            logger.info("Bound %s (k=%s) does not apply to %d trees", args.bound, k, skipped)


def cmd_verify(args, executor) -> int:
    spec = parse_corpus_spec(args.corpus)
    tally = {'checks': 0, 'failed': 0}

    def rows():
        for i, report in enumerate(_verify_reports(args, spec, executor)):
            tally['checks'] += 1
            if not report.holds:
                tally['failed'] += 1
            yield report.to_row(i)

    write_csv(rows(), config.BOUND_CSV_HEADER, args.out)
    if tally['failed']:
        logger.error("Bound %s failed on %d of %d checks", args.bound, tally['failed'], tally['checks'])
        return EXIT_FAILED
    logger.info("Bound %s holds on all %d checks", args.bound, tally['checks'])
    return EXIT_OK


def cmd_search(args, executor) -> int:
    result = search_equality_trees(args.target, args.budget, args.seed, args.restarts,
                                   general=args.general, executor=executor)
    row = {'P': result.profile.P, 'S': result.profile.S, 'Y': result.profile.Y,
           'converged': result.converged, 'moves': result.moves, 'n': result.tree.n}
    stream_csv([row], list(row), sys.stdout)
    if args.out:
        write_trees([result.tree], args.out)
    return EXIT_OK if result.converged else EXIT_FAILED


def _families_from_args(args):
    if args.families == 'default':
        return default_families(args.dmax)
    if args.families == 'simple':
        return simple_families()
    return [parse_int_list(part) for part in args.families.split(';') if part.strip()]


def cmd_region(args, executor) -> int:
    families = _families_from_args(args)
    marked = []
    if args.families == 'default':
        limit = family_accumulation_point(paired_family, 6, args.offset)
        marked.append(("(0,0,d,d) as d grows", (limit[0], limit[1])))

    region = emit_region_plot(families, csv_path=args.csv or '-', svg_path=args.svg,
                              pendant_offset=args.offset, marked=marked, executor=executor)
    facets = hull_facets(q.point for q in region.profiles)
    for a, b, line in facets:
        logger.info("Facet Y <= %s S + %s P through %s and %s", line.a_S, line.a_P, a, b)

    if args.constants:
        corpus = load_corpus(args.constants)
        rows = []
        for line in facet_constants([line for _, _, line in facets], corpus):
            rows.append({'a_S': str(line.a_S), 'a_P': str(line.a_P), 'constant_lower_bound': line.c})
        stream_csv(rows, ['a_S', 'a_P', 'constant_lower_bound'], sys.stdout)
    return EXIT_OK


COMMANDS = {
    'profile': cmd_profile,
    'millipede': cmd_millipede,
    'glue': cmd_glue,
    'cut': cmd_cut,
    'verify': cmd_verify,
    'search': cmd_search,
    'region': cmd_region,
}


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, dispatch one subcommand and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    setup_unified_logging(config.APP_NAME, args.log_folder, 'DEBUG' if args.verbose else None)
    if args.jobs < 0:
        logger.error("--jobs must be 0 or positive, got %d", args.jobs)
        return EXIT_USAGE

    try:
        with make_executor(args.jobs) as executor:
            return COMMANDS[args.command](args, executor)
    except (TreeError, DegenerateFacetError, LimitProfileError, UndefinedProfileError) as e:
        logger.error("%s: %s", args.command, e)
        return EXIT_USAGE
    except OSError as e:
        logger.error("%s: I/O error: %s", args.command, e)
        return EXIT_USAGE


def main():
    sys.excepthook = log_exception
    sys.exit(run())


if __name__ == "__main__":
    main()
