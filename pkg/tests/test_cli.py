import json

import pytest
from pipelines import full_pipeline, run

from pathmetrics.cli import main
from pathmetrics.hierarchy import HierarchyTree


@pytest.fixture(scope="module")
def outputs(tmp_path_factory):
    return full_pipeline(tmp_path_factory.mktemp("pipeline"))


class TestPipeline:
    def test_ingest_archive_and_stats(self, outputs):
        lines = (outputs / "nj.jsonl").read_text().splitlines()
        assert len(lines) == 3
        stats = json.loads((outputs / "nj_stats.json").read_text())
        assert stats["total"] == 3777 and stats["pairs"] == 2

    def test_stats_outputs(self, outputs):
        assert (outputs / "stats" / "path_frequency.csv").read_text().count("\n") == 4
        assert (outputs / "stats" / "path_frequency.png").read_bytes()[:4] == b"\x89PNG"
        assert "Lin" in (outputs / "stats" / "path_counts.csv").read_text()

    def test_metric_csv(self, outputs):
        text = (outputs / "d2.csv").read_text()
        assert text.startswith("# metric=weighted_jaccard weights=frequency\n")
        assert "edge,BR>Lin#0" in (outputs / "routing.csv").read_text()

    def test_dot_and_sidecar(self, outputs):
        dot = (outputs / "lin_b.dot").read_text()
        assert dot.startswith("digraph")
        assert 'label="0.71"' in dot and "#808080" in dot
        rows = (outputs / "lin_b.csv").read_text().splitlines()
        assert rows[0] == "edge,reference,similarity" and len(rows) == 15

    def test_hierarchy_outputs(self, outputs):
        hier = outputs / "hier"
        for name in ("distances.csv", "hierarchy.nwk", "hierarchy.json", "hierarchy.png", "schedule.csv"):
            assert (hier / name).exists(), name
        tree = HierarchyTree.from_newick((hier / "hierarchy.nwk").read_text())
        assert len(tree.leaves()) == 8
        assert len((hier / "schedule.csv").read_text().splitlines()) == 1 + 2 * tree.round_size()

    def test_schedule_from_tree(self, outputs):
        rows = (outputs / "schedule.csv").read_text().splitlines()
        tree = HierarchyTree.from_newick((outputs / "hier" / "hierarchy.nwk").read_text())
        assert len(rows) == 1 + 3 * tree.round_size()

    def test_classify_outputs(self, outputs):
        report = json.loads((outputs / "cls" / "classification.json").read_text())
        assert report["classified_as"] == "star"
        assert (outputs / "cls" / "signature.png").exists()


class TestSubcommands:
    def test_generate_to_stdout(self, capsys):
        assert main(["generate", "--kind", "mesh", "--n", "3"]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 6

    def test_placeholder_policy(self, tmp_path):
        log = tmp_path / "t.log"
        log.write_text("1 a b x *\n2 a b x *\n")
        run("ingest", "--input", log, "--output", tmp_path / "a.jsonl", "--unknown-hop", "placeholder")
        assert '"frequency": 2' in (tmp_path / "a.jsonl").read_text()

    def test_weights_file(self, tmp_path):
        log = tmp_path / "t.log"
        log.write_text("1 a b x\n2 a b y\n")
        run("ingest", "--input", log, "--output", tmp_path / "a.jsonl")
        (tmp_path / "w.csv").write_text("path,weight\na>b#0,3\na>b#1,1\n")
        run("metrics", "--input", tmp_path / "a.jsonl", "--metric", "vardi", "--weights", "file",
            "--weights-file", tmp_path / "w.csv", "--output", tmp_path / "d.csv")
        assert "a->x,0.000000,4.000000" in (tmp_path / "d.csv").read_text()

    def test_schedule_from_json_tree(self, tmp_path, regional_tree):
        (tmp_path / "t.json").write_text(regional_tree.to_json())
        run("schedule", "--tree", tmp_path / "t.json", "--output", tmp_path / "s.csv")
        assert len((tmp_path / "s.csv").read_text().splitlines()) == 65


class TestErrors:
    def test_unknown_reference_edge(self, outputs, capsys):
        code = main(["similarity-map", "--input", str(outputs / "nj.jsonl"),
                     "--reference-edge", "X->Y", "--output", str(outputs / "bad.dot")])
        assert code == 1 and "X->Y" in capsys.readouterr().err

    def test_missing_input(self, tmp_path, capsys):
        assert main(["metrics", "--input", str(tmp_path / "nope.jsonl")]) == 1
        assert "error" in capsys.readouterr().err

    def test_weights_file_required(self, outputs):
        assert main(["metrics", "--input", str(outputs / "nj.jsonl"), "--weights", "file"]) == 1

    def test_generate_needs_one_source(self):
        assert main(["generate"]) == 1
        assert main(["generate", "--kind", "star", "--scenario", "nj-table"]) == 1

    def test_unknown_scenario(self, capsys):
        assert main(["generate", "--scenario", "moon"]) == 1
        assert "unknown scenario" in capsys.readouterr().err

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as info:
            main(["stats", "--bogus"])
        assert info.value.code == 2

    def test_nonpositive_bin_width(self):
        with pytest.raises(SystemExit):
            main(["stats", "--input", "x", "--output", "y", "--bin-width", "0"])

    def test_untested_pair_hierarchy(self, tmp_path, capsys):
        log = tmp_path / "t.log"
        log.write_text("1 a b x\n2 b c x\n")
        run("ingest", "--input", log, "--output", tmp_path / "a.jsonl")
        assert main(["hierarchy", "--input", str(tmp_path / "a.jsonl"), "--output", str(tmp_path / "h")]) == 1
        assert "a->c" in capsys.readouterr().err
