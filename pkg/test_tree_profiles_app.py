import argparse
import io
from itertools import islice

import pandas as pd
import pytest

from corpus_io import parse_corpus_spec, read_tree, read_trees, write_trees
from tree_core import MillipedeSpec, canonicalize, millipede, path_tree, star_tree
from tree_profiles_app import EXIT_FAILED, EXIT_OK, EXIT_USAGE, _verify_reports, run


def csv_rows(text):
    return pd.read_csv(io.StringIO(text))


@pytest.fixture
def path_file(tmp_path):
    path = tmp_path / "p5.txt"
    write_trees([path_tree(5)], str(path))
    return str(path)


def test_profile_of_a_path(path_file, capsys):
    assert run(["profile", "--k", "5", "--tree", path_file]) == EXIT_OK
    frame = csv_rows(capsys.readouterr().out)
    assert list(frame["count"]) == [1, 0, 0]
    assert list(frame["probability_num"]) == [1, 0, 0]


def test_profile_of_several_orders(path_file, tmp_path):
    out = tmp_path / "profile.csv"
    assert run(["profile", "--k", "3,4,5", "--tree", path_file, "--out", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert sorted(set(frame["k"])) == [3, 4, 5]
    assert frame[frame["k"] == 4]["count"].tolist() == [2, 0]


def test_profile_without_subtrees_leaves_probabilities_empty(tmp_path, capsys):
    path = tmp_path / "p3.txt"
    write_trees([path_tree(3)], str(path))
    assert run(["profile", "--tree", str(path)]) == EXIT_OK
    frame = csv_rows(capsys.readouterr().out)
    assert frame["probability_num"].isna().all()


def test_millipede_command(tmp_path):
    out = tmp_path / "m.txt"
    assert run(["millipede", "--d", "0,0,3,4,4,3", "--n", "6", "--out", str(out)]) == EXIT_OK
    t = read_tree(str(out))
    assert t.n == 32
    assert canonicalize(t) == canonicalize(millipede(MillipedeSpec((0, 0, 3, 4, 4, 3), 6)))


def test_glue_command(tmp_path):
    s = tmp_path / "s.txt"
    write_trees([path_tree(2)], str(s))
    out = tmp_path / "glued.txt"
    assert run(["glue", "--s", str(s), "--t", str(s), "--k", "2", "--out", str(out)]) == EXIT_OK
    assert canonicalize(read_tree(str(out))) == canonicalize(path_tree(5))


def test_glue_command_rejects_non_leaf(tmp_path):
    s = tmp_path / "s.txt"
    write_trees([star_tree(3)], str(s))
    assert run(["glue", "--s", str(s), "--t", str(s), "--k", "3", "--leaf-s", "0"]) == EXIT_USAGE


def test_glue_command_rejects_leaf_out_of_range(tmp_path):
    s = tmp_path / "s.txt"
    write_trees([path_tree(2)], str(s))
    assert run(["glue", "--s", str(s), "--t", str(s), "--k", "3", "--leaf-s", "7"]) == EXIT_USAGE


def test_cut_command_rejects_vertex_out_of_range(path_file):
    assert run(["cut", "--tree", path_file, "--u", "99", "--v", "0"]) == EXIT_USAGE


def test_cut_command(path_file, tmp_path):
    out = tmp_path / "pieces.txt"
    assert run(["cut", "--tree", path_file, "--u", "1", "--v", "2", "--out", str(out)]) == EXIT_OK
    assert [t.n for t in read_trees(str(out))] == [2, 3]


def test_verify_main_exhaustive(tmp_path):
    out = tmp_path / "main.csv"
    assert run(["verify", "--bound", "main", "--corpus", "exhaustive:12", "--out", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert len(frame) == 987
    assert frame["holds"].all()


@pytest.mark.parametrize("bound", ["bl", "local", "wye", "nonstar"])
def test_verify_other_bounds(bound, tmp_path):
    out = tmp_path / f"{bound}.csv"
    assert run(["verify", "--bound", bound, "--corpus", "random:200:1-30:5", "--out", str(out)]) == EXIT_OK


def test_verify_profile_bound_on_a_millipede(tmp_path):
    out = tmp_path / "thm2.csv"
    assert run(["verify", "--bound", "thm2", "--corpus", "millipede:2:200", "--out", str(out)]) == EXIT_OK
    assert len(pd.read_csv(out)) == 1


def test_verify_glue_reports_failure_at_three(tmp_path):
    corpus = tmp_path / "pairs.txt"
    write_trees([path_tree(2), path_tree(2)], str(corpus))
    out = tmp_path / "glue.csv"
    args = ["verify", "--bound", "glue", "--corpus", f"file:{corpus}", "--out", str(out)]
    assert run(args + ["--k", "5"]) == EXIT_OK
    assert run(args + ["--k", "3"]) == EXIT_FAILED
    assert not pd.read_csv(out)["holds"].all()


def test_verify_is_reproducible(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (first, second):
        assert run(["verify", "--bound", "nonstar", "--k", "6", "--corpus", "random:100:1-40:9",
                    "--out", str(out)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_verify_with_workers_matches_serial(tmp_path):
    corpus = tmp_path / "paths.txt"
    write_trees([path_tree(5), path_tree(6)], str(corpus))
    serial, parallel = tmp_path / "serial.csv", tmp_path / "parallel.csv"
    args = ["verify", "--bound", "thm2", "--k", "5,6", "--corpus", f"file:{corpus}"]
    assert run(args + ["--out", str(serial)]) == EXIT_OK
    assert run(args + ["--out", str(parallel), "--jobs", "2"]) == EXIT_OK
    assert serial.read_bytes() == parallel.read_bytes()
    assert len(pd.read_csv(serial)) == 3


def test_verify_on_all_physical_cores(tmp_path):
    serial, parallel = tmp_path / "serial.csv", tmp_path / "parallel.csv"
    args = ["verify", "--bound", "main", "--corpus", "exhaustive:9"]
    assert run(args + ["--out", str(serial)]) == EXIT_OK
    assert run(args + ["--out", str(parallel), "--jobs", "0"]) == EXIT_OK
    assert serial.read_bytes() == parallel.read_bytes()


def test_verify_reports_are_produced_lazily():
    args = argparse.Namespace(bound="main", k="5")
    reports = _verify_reports(args, parse_corpus_spec("exhaustive:14"), None)
    first = list(islice(reports, 3))
    assert [r.tree_summary.n for r in first] == [1, 2, 3]


def test_search_command(tmp_path, capsys):
    out = tmp_path / "witness.txt"
    assert run(["search", "--target", "0", "--budget", "100000", "--seed", "1",
                "--out", str(out)]) == EXIT_OK
    row = csv_rows(capsys.readouterr().out).iloc[0]
    assert row["Y"] == 9 * row["S"] + row["P"]
    assert read_tree(str(out)).n == row["n"]


def test_region_command(tmp_path):
    csv_path, svg_path = tmp_path / "limits.csv", tmp_path / "region.svg"
    assert run(["region", "--families", "simple", "--csv", str(csv_path), "--svg", str(svg_path)]) == EXIT_OK
    assert len(pd.read_csv(csv_path)) == 4
    assert svg_path.read_text(encoding="utf-8").startswith("<svg")


def test_region_command_with_custom_families_and_constants(tmp_path, capsys):
    csv_path = tmp_path / "limits.csv"
    assert run(["region", "--families", "1;2;3;0,0,3,4,4,3", "--csv", str(csv_path),
                "--constants", "exhaustive:8"]) == EXIT_OK
    frame = csv_rows(capsys.readouterr().out)
    assert list(frame.columns) == ["a_S", "a_P", "constant_lower_bound"]
    assert len(frame) >= 2


def test_default_region_writes_csv_to_stdout(capsys):
    assert run(["region", "--dmax", "7"]) == EXIT_OK
    frame = csv_rows(capsys.readouterr().out)
    assert len(frame) == 4 + 1 + 3 + 3 + 2


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["millipede", "--n", "3"],
    ["verify", "--bound", "nope", "--corpus", "exhaustive:3"],
    ["verify", "--bound", "main", "--corpus", "exhaustive:20"],
    ["verify", "--bound", "main", "--corpus", "random:10:5"],
    ["millipede", "--d", "1", "--n", "3", "--jobs", "-1"],
])
def test_usage_errors(argv):
    assert run(argv) == EXIT_USAGE


def test_bad_tree_file(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("4\n0 1\n1 2\n2 0\n")
    assert run(["profile", "--tree", str(bad)]) == EXIT_USAGE
    assert run(["profile", "--tree", str(tmp_path / "missing.txt")]) == EXIT_USAGE


def test_non_ascii_tree_file(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_bytes(b"2\n0 1\xff\n")
    assert run(["profile", "--tree", str(bad)]) == EXIT_USAGE


def test_log_folder_gets_a_file(path_file, tmp_path):
    logs = tmp_path / "logs"
    assert run(["profile", "--tree", path_file, "--log-folder", str(logs), "--verbose"]) == EXIT_OK
    assert any(logs.iterdir())
