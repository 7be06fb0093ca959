"""Report rendering: CSV contents and figure files."""

import csv
import json
import types
from pathlib import Path

import pytest

from insightkg.pipeline import PipelineConfig, run_pipeline
from insightkg.report import build_report, forest_report, metrics_report
from insightkg.trees import Forest, TreeParams

from test_pipeline import write_fig1_workspace

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@pytest.fixture(scope="module")
def reported(tmp_path_factory):
    root = tmp_path_factory.mktemp("report")
    cfg = PipelineConfig.from_file(write_fig1_workspace(root))
    store = run_pipeline(cfg)
    report_dir = root / "report"
    paths = build_report(store, report_dir)
    return store, report_dir, paths


def read_rows(path: Path) -> list[list[str]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


class TestBuildReport:
    def test_writes_every_view(self, reported):
        _, report_dir, paths = reported
        names = {p.name for p in paths}
        assert names == {
            "citations.csv", "citations.png",
            "relevance_matrix.csv", "relevance_matrix.png",
            "forests.csv", "forest_inheritance.png", "forest_relevance.png",
            "metrics.csv", "metrics.png",
        }
        for path in paths:
            assert path.parent == report_dir
            assert path.stat().st_size > 0

    def test_figures_are_png(self, reported):
        _, _, paths = reported
        for path in paths:
            if path.suffix == ".png":
                assert path.read_bytes()[:8] == PNG_MAGIC, path.name

    def test_creates_nested_directory(self, reported, tmp_path):
        store, _, _ = reported
        nested = tmp_path / "a" / "b" / "report"
        paths = build_report(store, nested)
        assert nested.is_dir() and len(paths) == 9


class TestCitationCsv:
    def test_ranked_by_in_degree_then_id(self, reported):
        store, report_dir, _ = reported
        rows = read_rows(report_dir / "citations.csv")
        assert rows[0] == ["paper_id", "title", "cited_by"]
        assert len(rows) == 1 + 7
        assert rows[1] == ["1", "HotpotQA saturation leakage", "4"]
        counts = [int(r[2]) for r in rows[1:]]
        assert counts == sorted(counts, reverse=True)
        # Ties broken by ascending paper id.
        tied = [r[0] for r in rows[1:] if r[2] == "0"]
        assert tied == sorted(tied, key=int)


class TestMatrixCsv:
    def test_masked_cells_blank_and_values_echo_store(self, reported):
        store, report_dir, _ = reported
        rows = read_rows(report_dir / "relevance_matrix.csv")
        ids = [int(p) for p in rows[0][1:]]
        assert ids == list(store.matrix.paper_ids)
        for i, row in enumerate(rows[1:]):
            assert int(row[0]) == ids[i]
            for j, cell in enumerate(row[1:]):
                if store.matrix.valid[i, j]:
                    assert abs(float(cell) - store.matrix.scores[i, j]) < 1e-6
                else:
                    assert cell == ""
        # The diagonal is always masked.
        for i in range(len(ids)):
            assert rows[1 + i][1 + i] == ""


class TestForestCsv:
    def test_one_row_per_node(self, reported):
        store, report_dir, _ = reported
        rows = read_rows(report_dir / "forests.csv")
        expected = sum(len(store.forests[k].nodes) for k in ("inheritance", "relevance"))
        assert len(rows) == 1 + expected

    def test_inheritance_rows_have_no_edge_value(self, reported):
        _, report_dir, _ = reported
        rows = read_rows(report_dir / "forests.csv")
        for kind, parent, _, _, edge_value, rank in (r for r in rows[1:]):
            if kind == "inheritance":
                assert edge_value == ""
            elif parent != "":
                float(edge_value)  # relevance child edges carry the chain value
            float(rank)


class TestMetrics:
    def test_macro_row_last(self, reported):
        _, report_dir, _ = reported
        rows = read_rows(report_dir / "metrics.csv")
        assert rows[0] == ["class", "precision", "recall", "f1"]
        assert rows[-1] == ["macro_f1", "", "", "1.0000"]
        assert [r[0] for r in rows[1:-1]] == ["resolved", "neutral", "finding"]

    def test_skipped_when_no_eval_artifact(self, tmp_path):
        from conftest import compose_doc

        docs = [
            compose_doc(1, "hotpot a", [("Conclusion", ["We confirm alpha.", "Open problem remains beta."])]),
            compose_doc(2, "hotpot b", [("Conclusion", ["We confirm gamma.", "Open problem remains delta."])]),
        ]
        corpus = tmp_path / "corpus.jsonl"
        with open(corpus, "w", encoding="utf-8") as fh:
            for doc in docs:
                fh.write(json.dumps(doc) + "\n")
        rows = [
            {"text": "We confirm alpha.", "label": "resolved", "split": "train"},
            {"text": "We confirm gamma.", "label": "resolved", "split": "train"},
            {"text": "Open problem remains beta.", "label": "finding", "split": "train"},
            {"text": "Open problem remains delta.", "label": "finding", "split": "train"},
        ]
        labels = tmp_path / "labels.jsonl"
        with open(labels, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
        cfg = PipelineConfig(
            corpus=str(corpus), topic="hotpot", out_dir=str(tmp_path / "out"),
            labels=str(labels), kernel="linear", grid_c=[10.0], folds=2,
        )
        store = run_pipeline(cfg)
        report_dir = tmp_path / "report"
        assert metrics_report(store, report_dir) == []
        names = {p.name for p in build_report(store, report_dir)}
        assert "metrics.csv" not in names and "metrics.png" not in names
        assert len(names) == 7


class TestEmptyForestFigure:
    def test_placeholder_rendered(self, reported, tmp_path):
        store, _, _ = reported
        bare = types.SimpleNamespace(
            subset=store.subset,
            forests={
                "inheritance": Forest("inheritance", TreeParams(1, 1, 1)),
                "relevance": Forest("relevance", TreeParams(1, 1, 1)),
            },
        )
        paths = forest_report(bare, tmp_path)
        names = {p.name for p in paths}
        assert names == {"forests.csv", "forest_inheritance.png", "forest_relevance.png"}
        for path in paths:
            if path.suffix == ".png":
                assert path.read_bytes()[:8] == PNG_MAGIC
        assert read_rows(tmp_path / "forests.csv") == [
            ["kind", "parent_id", "paper_id", "depth", "edge_value", "rank_score"]
        ]
