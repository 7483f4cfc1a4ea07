import json
import subprocess
import sys

import numpy as np
import pytest

from citeresist.cli import main
from citeresist.exact import exact_all_pairs
from citeresist.graph import load_graph
from citeresist.matrix import DistanceMatrix
from citeresist.synthetic import planted_topics

TOY = "p1\ts1\np2\ts1\np3\ts1\np1\ts2\np2\ts2\n"


@pytest.fixture
def toy(tmp_path):
    path = tmp_path / "toy.tsv"
    path.write_text(TOY)
    return path


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    """A planted two-topic corpus with its edge file and topic file."""
    root = tmp_path_factory.mktemp("corpus")
    c = planted_topics(np.random.default_rng(5), 40, 120, [12], mean_degree=8)
    edges = root / "edges.tsv"
    edges.write_text("".join(f"{a}\t{b}\n" for a, b in c.edges))
    topics = root / "topics.csv"
    rows = sorted((p, t) for t, ms in c.topics.items() for p in ms)
    topics.write_text("paper_id,topic_label\n" + "".join(f"{p},{t}\n" for p, t in rows))
    return edges, topics


def run(*argv):
    return main([str(a) for a in argv])


def read_matrix(path):
    with open(path, newline="") as fh:
        return DistanceMatrix.from_csv(fh)


class TestDistances:
    def test_toy(self, toy, tmp_path, capsys):
        out = tmp_path / "out"
        assert run("distances", "--input", toy, "--out", out, "--epsilon", "1e-6") == 0
        lines = (out / "distances.csv").read_text().splitlines()
        assert lines[0] == "paper_a,paper_b,resistance,lower,upper,iterations,converged"
        assert len(lines) == 4
        assert "pairs 3" in capsys.readouterr().err
        assert (out / "pruning.csv").read_text() == "node_id,reason\n"

    def test_matches_oracle(self, corpus, tmp_path):
        edges, _ = corpus
        out = tmp_path / "out"
        assert run("distances", "--input", edges, "--out", out, "--epsilon", "1e-3") == 0
        got = read_matrix(out / "distances.csv")
        _, g, _ = load_graph(edges)
        ref = exact_all_pairs(g, got.ids)
        assert np.abs(got.resistance - ref.resistance).max() <= 1e-3

    def test_exact_flag(self, toy, tmp_path):
        out = tmp_path / "out"
        assert run("distances", "--input", toy, "--out", out, "--exact") == 0
        m = read_matrix(out / "distances.csv")
        assert m.all_converged and np.all(m.iterations == 0)

    def test_disconnected(self, tmp_path, capsys):
        path = tmp_path / "two.tsv"
        path.write_text("a\ts1\nb\ts1\nc\ts2\nd\ts2\n")
        assert run("distances", "--input", path, "--out", tmp_path / "o") == 4
        assert "component" in capsys.readouterr().err

    def test_not_converged(self, toy, tmp_path):
        out = tmp_path / "out"
        code = run("distances", "--input", toy, "--out", out, "--epsilon", "1e-12", "--max-iter", "1")
        assert code == 3
        assert "false" in (out / "distances.csv").read_text()

    def test_missing_input(self, tmp_path):
        assert run("distances", "--input", tmp_path / "nope.tsv", "--out", tmp_path) == 2

    def test_parse_error(self, tmp_path, capsys):
        path = tmp_path / "bad.tsv"
        path.write_text("p1\ts1\np2\n")
        assert run("distances", "--input", path, "--out", tmp_path / "o") == 2
        assert "line 2" in capsys.readouterr().err

    def test_comma_delimiter(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text(TOY.replace("\t", ","))
        assert run("distances", "--input", path, "--delimiter", "comma", "--out", tmp_path / "o") == 0

    def test_bad_threads(self, toy, tmp_path):
        assert run("distances", "--input", toy, "--threads", "0", "--out", tmp_path) == 2


class TestPair:
    def test_unit_edge(self, tmp_path, capsys):
        path = tmp_path / "e.tsv"
        # q cites r, so q is a paper and survives pruning; r does not
        path.write_text("p\tq\nq\tr\n")
        assert run("pair", "p", "q", "--input", path, "--weighting", "unit", "--out", tmp_path / "o") == 0
        row = capsys.readouterr().out.splitlines()[1].split(",")
        assert row[:3] == ["p", "q", "1"] and row[-1] == "true"
        assert (tmp_path / "o" / "pair.csv").exists()

    def test_bounds_in_row(self, toy, tmp_path, capsys):
        assert run("pair", "p1", "p3", "--input", toy, "--out", tmp_path) == 0
        _, _, r, lo, hi, _, _ = capsys.readouterr().out.splitlines()[1].split(",")
        assert float(lo) <= float(r) <= float(hi)

    def test_disconnected(self, tmp_path):
        path = tmp_path / "two.tsv"
        path.write_text("a\ts1\nb\ts1\nc\ts2\nd\ts2\n")
        assert run("pair", "a", "c", "--input", path, "--out", tmp_path) == 4

    def test_unknown_node(self, toy, tmp_path):
        assert run("pair", "p1", "zz", "--input", toy, "--out", tmp_path) == 2


class TestSample:
    def test_exhaustion(self, toy, tmp_path):
        out = tmp_path / "o"
        assert run("sample", "--input", toy, "--out", out, "--seed", "3") == 0
        lines = (out / "sample_estimate.csv").read_text().splitlines()
        assert lines[0] == "# seed=3"
        n, N, _, se = lines[2].split(",")
        assert n == N == "3" and se == "0"
        assert (out / "sample_distances.csv").read_text().startswith("# seed=3\n")


class TestAnalysisCommands:
    @pytest.fixture
    def matrix_path(self, corpus, tmp_path):
        edges, _ = corpus
        out = tmp_path / "d"
        assert run("distances", "--input", edges, "--out", out) == 0
        return out / "distances.csv"

    def test_rank(self, corpus, matrix_path, tmp_path):
        _, topics = corpus
        out = tmp_path / "r"
        assert run("rank", "--matrix", matrix_path, "--topics", topics, "--label", "topic0", "--out", out) == 0
        lines = (out / "ranking.csv").read_text().splitlines()
        assert lines[0] == "rank,paper_id,score,is_topic_member,cumulative_topic_count"

    def test_rank_unknown_label(self, corpus, matrix_path, tmp_path, capsys):
        _, topics = corpus
        assert run("rank", "--matrix", matrix_path, "--topics", topics, "--label", "nope", "--out", tmp_path) == 2
        assert "topic0" in capsys.readouterr().err

    def test_cluster(self, matrix_path, tmp_path):
        out = tmp_path / "c"
        assert run("cluster", "--matrix", matrix_path, "--k", "2", "--out", out) == 0
        labels = (out / "clusters.csv").read_text().splitlines()[1:]
        assert {line.split(",")[1] for line in labels} == {"0", "1"}
        m = read_matrix(matrix_path)
        assert len((out / "dendrogram.csv").read_text().splitlines()) == m.n

    def test_cluster_bad_k(self, matrix_path, tmp_path):
        assert run("cluster", "--matrix", matrix_path, "--k", "0", "--out", tmp_path) == 2

    def test_histogram(self, matrix_path, tmp_path):
        out = tmp_path / "h"
        assert run("histogram", "--matrix", matrix_path, "--bins", "10", "--out", out) == 0
        rows = (out / "histogram.csv").read_text().splitlines()[1:]
        m = read_matrix(matrix_path)
        assert len(rows) == 10 and sum(int(r.split(",")[2]) for r in rows) == len(m)

    def test_couple_all(self, toy, tmp_path):
        out = tmp_path / "k"
        assert run("couple", "--input", toy, "--out", out) == 0
        lines = (out / "coupling.csv").read_text().splitlines()
        assert lines[0] == "paper_a,paper_b,coupling_unweighted,coupling_weighted,cosine"
        assert len(lines) == 4

    def test_couple_pair_file(self, toy, tmp_path):
        pairs = tmp_path / "pairs.tsv"
        pairs.write_text("p1\tp2\n")
        out = tmp_path / "k"
        assert run("couple", "--input", toy, "--pairs", pairs, "--out", out) == 0
        # p1 and p2 share s1 (k=3) and s2 (k=2)
        row = (out / "coupling.csv").read_text().splitlines()[1].split(",")
        assert float(row[2]) == pytest.approx(1 / 3 + 1 / 2, rel=1e-11)


def test_manifest(toy, tmp_path):
    out = tmp_path / "o"
    run("distances", "--input", toy, "--out", out, "--threads", "1")
    manifest = json.loads((out / "distances_manifest.json").read_text())
    assert manifest["command"] == "distances"
    assert manifest["outputs"] == ["distances.csv", "pruning.csv"]
    assert list(manifest["inputs"].values())[0] == __import__("hashlib").sha256(TOY.encode()).hexdigest()
    assert manifest["config"]["epsilon"] == 0.1
    assert "threads" not in manifest["config"] and "out" not in manifest["config"]
    assert {"numpy", "scipy", "numba", "citeresist"} <= manifest["versions"].keys()


def test_module_entry_point(toy, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "citeresist", "pair", "p1", "p2", "--input", str(toy), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("paper_a,paper_b,resistance")
