"""Config handling, stage artifacts, reruns, and snapshot rehydration."""

import json
from pathlib import Path

import pytest

from insightkg.classifier import read_bundles
from insightkg.errors import PipelineError
from insightkg.pipeline import (
    ARTIFACTS,
    STAGE_CODES,
    KgStore,
    PipelineConfig,
    _partial,
    load_store,
    read_sentences,
    run_pipeline,
    stage_ingest,
)
from insightkg.trees import TreeParams

from conftest import fig1_docs

GOLDEN = Path(__file__).parent / "data" / "fig1_golden.json"

NEUTRAL_TRAIN = [
    "We study answering over two documents.",
    "The dataset contains many paragraphs.",
    "Models read the corpus in order.",
    "This section reviews related systems.",
]
EXTRA_RESOLVED = ["We confirm the effect persists.", "We confirm gains on both splits."]
EXTRA_FINDING = ["Open problem remains scaling.", "Open problem remains latency."]


def write_fig1_workspace(root: Path, reverse_corpus: bool = False) -> Path:
    """Corpus + labels + config for a full run over the citation fixture."""
    docs = fig1_docs()
    if reverse_corpus:
        docs = list(reversed(docs))
    corpus_path = root / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc) + "\n")

    # Conclusion sentences double as training data: the two insight classes
    # carry their marker tokens, neutrals come from unrelated prose.
    from conftest import _FIG1_WORDS

    rows = []
    for _, resolved, finding in _FIG1_WORDS.values():
        rows.append({"text": resolved, "label": "resolved", "split": "train"})
        rows.append({"text": finding, "label": "finding", "split": "train"})
    for text in EXTRA_RESOLVED:
        rows.append({"text": text, "label": "resolved", "split": "train"})
    for text in EXTRA_FINDING:
        rows.append({"text": text, "label": "finding", "split": "train"})
    for text in NEUTRAL_TRAIN:
        rows.append({"text": text, "label": "neutral", "split": "train"})
    # Held-out sentences reuse training vocabulary so the tiny model has a
    # fair shot; out-of-vocabulary tokens would swamp the marker signal.
    rows.append({"text": "We confirm decomposition and retrieval.", "label": "resolved", "split": "test"})
    rows.append({"text": "Open problem remains attention.", "label": "finding", "split": "test"})
    rows.append({"text": "The dataset contains paragraphs.", "label": "neutral", "split": "test"})
    labels_path = root / "labels.jsonl"
    with open(labels_path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")

    config = {
        "corpus": "corpus.jsonl",
        "topic": "hotpot",
        "out_dir": "out",
        "provider": {"kind": "hash-tfidf", "dim": 256, "seed": 7},
        "labels": "labels.jsonl",
        "kernel": "linear",
        "grid_c": [10.0],
        "folds": 2,
        "inheritance_params": {"N": 1, "M": 2, "T": 3},
        "relevance_params": {"N": 3, "M": 3, "T": 3},
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    return config_path


class TestConfig:
    def test_relative_paths_resolve_against_config_dir(self, tmp_path):
        config_path = write_fig1_workspace(tmp_path)
        cfg = PipelineConfig.from_file(config_path)
        assert cfg.corpus == str(tmp_path / "corpus.jsonl")
        assert cfg.out_dir == str(tmp_path / "out")
        assert cfg.labels == str(tmp_path / "labels.jsonl")

    def test_absolute_paths_kept(self, tmp_path):
        obj = {"corpus": str(tmp_path / "c.jsonl"), "topic": "t", "out_dir": str(tmp_path)}
        cfg = PipelineConfig.from_dict(obj, base_dir=Path("/elsewhere"))
        assert cfg.corpus == str(tmp_path / "c.jsonl")

    def test_bad_json_is_config_error(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{broken", encoding="utf-8")
        with pytest.raises(PipelineError) as err:
            PipelineConfig.from_file(path)
        assert err.value.stage == "config"
        assert err.value.code == STAGE_CODES["config"] == 2

    def test_hash_excludes_paths_but_not_parameters(self, tmp_path):
        config_path = write_fig1_workspace(tmp_path)
        cfg = PipelineConfig.from_file(config_path)
        moved = PipelineConfig.from_dict(
            json.loads(config_path.read_text()), base_dir=Path("/other/place")
        )
        assert cfg.config_hash() == moved.config_hash()
        different = PipelineConfig.from_dict(
            {**json.loads(config_path.read_text()), "grid_c": [1.0]},
            base_dir=tmp_path,
        )
        assert different.config_hash() != cfg.config_hash()

    def test_validate_requires_corpus_file(self, tmp_path):
        cfg = PipelineConfig(
            corpus=str(tmp_path / "absent.jsonl"),
            topic="t",
            out_dir=str(tmp_path),
            labels=None,
            model_path=None,
        )
        with pytest.raises(PipelineError) as err:
            cfg.validate()
        assert err.value.stage == "config"

    def test_validate_requires_labels_or_model(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        corpus.write_text("", encoding="utf-8")
        cfg = PipelineConfig(corpus=str(corpus), topic="t", out_dir=str(tmp_path))
        with pytest.raises(PipelineError, match="label file .* or a saved model"):
            cfg.validate()

    def test_tree_param_block_validated(self, tmp_path):
        obj = {
            "corpus": "c",
            "topic": "t",
            "out_dir": "o",
            "inheritance_params": {"N": 0, "M": 1, "T": 1},
        }
        with pytest.raises(PipelineError):
            PipelineConfig.from_dict(obj, base_dir=tmp_path)


class TestPartialWrites:
    def test_failure_leaves_partial_marker_not_artifact(self, tmp_path):
        target = tmp_path / "artifact.json"
        with pytest.raises(RuntimeError):
            with _partial(target) as tmp_name:
                Path(tmp_name).write_text("half done", encoding="utf-8")
                raise RuntimeError("boom")
        assert not target.exists()
        assert (tmp_path / "artifact.json.partial").exists()

    def test_success_renames_into_place(self, tmp_path):
        target = tmp_path / "artifact.json"
        with _partial(target) as tmp_name:
            Path(tmp_name).write_text("done", encoding="utf-8")
        assert target.read_text() == "done"
        assert not (tmp_path / "artifact.json.partial").exists()


class TestStageFailures:
    def test_unreadable_corpus_fails_in_ingest_with_its_code(self, tmp_path):
        cfg = PipelineConfig(
            corpus=str(tmp_path / "missing.jsonl"),
            topic="t",
            out_dir=str(tmp_path),
        )
        with pytest.raises(PipelineError) as err:
            stage_ingest(cfg)
        assert err.value.stage == "ingest"
        assert err.value.code == STAGE_CODES["ingest"] == 3

    def test_stage_codes_are_stable(self):
        assert STAGE_CODES == {
            "config": 2, "ingest": 3, "segment": 4, "train": 5, "classify": 6,
            "relate": 7, "trees": 8, "export": 9, "serve": 10,
        }


@pytest.fixture(scope="module")
def fig1_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("fig1run")
    config_path = write_fig1_workspace(root)
    cfg = PipelineConfig.from_file(config_path)
    store = run_pipeline(cfg)
    return root, cfg, store


class TestFullRun:
    def test_all_artifacts_written(self, fig1_run):
        root, cfg, _ = fig1_run
        out = Path(cfg.out_dir)
        for name in ARTIFACTS.values():
            assert (out / name).is_file(), name
        assert not list(out.glob("*.partial"))

    def test_inheritance_export_matches_hand_golden(self, fig1_run):
        _, cfg, _ = fig1_run
        got = (Path(cfg.out_dir) / ARTIFACTS["kg_inheritance"]).read_bytes()
        assert got == GOLDEN.read_bytes()

    def test_trained_model_labels_conclusion_sentences_correctly(self, fig1_run):
        _, cfg, store = fig1_run
        by_id = {b.paper_id: b for b in store.bundles}
        assert len(by_id) == 7
        for bundle in store.bundles:
            assert bundle.resolved_text.startswith("We confirm")
            assert bundle.finding_text.startswith("Open problem")
            assert not bundle.flagged

    def test_rerun_is_byte_identical_on_exports(self, fig1_run, tmp_path):
        root, cfg, _ = fig1_run
        second = write_fig1_workspace(tmp_path)
        cfg2 = PipelineConfig.from_file(second)
        run_pipeline(cfg2)
        for name in ("kg_inheritance", "kg_relevance", "matrix", "subset", "model"):
            a = (Path(cfg.out_dir) / ARTIFACTS[name]).read_bytes()
            b = (Path(cfg2.out_dir) / ARTIFACTS[name]).read_bytes()
            assert a == b, name

    def test_corpus_permutation_changes_nothing(self, fig1_run, tmp_path):
        root, cfg, _ = fig1_run
        second = write_fig1_workspace(tmp_path, reverse_corpus=True)
        cfg2 = PipelineConfig.from_file(second)
        run_pipeline(cfg2)
        for name in ("kg_inheritance", "kg_relevance", "matrix"):
            a = (Path(cfg.out_dir) / ARTIFACTS[name]).read_bytes()
            b = (Path(cfg2.out_dir) / ARTIFACTS[name]).read_bytes()
            assert a == b, name

    def test_sentences_artifact_rehydrates(self, fig1_run):
        _, cfg, _ = fig1_run
        segmented = read_sentences(Path(cfg.out_dir) / ARTIFACTS["sentences"])
        assert set(segmented) == {1, 2, 3, 4, 5, 6, 7}
        assert [s.index for s in segmented[1]] == [0, 1]
        assert segmented[1][0].text.startswith("We confirm")

    def test_eval_artifact_has_metrics(self, fig1_run):
        _, cfg, _ = fig1_run
        report = json.loads((Path(cfg.out_dir) / ARTIFACTS["eval"]).read_text())
        assert set(report) == {"classes", "confusion", "per_class", "macro_f1"}
        assert report["macro_f1"] == 1.0  # three easy held-out sentences

    def test_bundle_artifact_round_trips(self, fig1_run):
        _, cfg, store = fig1_run
        loaded = read_bundles(Path(cfg.out_dir) / ARTIFACTS["bundles"])
        assert loaded == store.bundles


class TestStore:
    def test_load_store_matches_freshly_built(self, fig1_run):
        _, cfg, store = fig1_run
        loaded = load_store(cfg)
        from insightkg.kg import export_kg

        for kind in ("inheritance", "relevance"):
            assert export_kg(loaded.graphs[kind]) == export_kg(store.graphs[kind])
        assert loaded.config_hash == store.config_hash
        assert loaded.built_at == store.built_at

    def test_load_store_missing_artifact_is_serve_error(self, fig1_run, tmp_path):
        _, cfg, _ = fig1_run
        broken = PipelineConfig(**{**cfg.__dict__, "out_dir": str(tmp_path)})
        with pytest.raises(PipelineError) as err:
            load_store(broken)
        assert err.value.stage == "serve"
        assert err.value.code == STAGE_CODES["serve"] == 10

    def test_kg_for_default_params_returns_snapshot_graph(self, fig1_run):
        _, _, store = fig1_run
        assert store.kg_for("inheritance") is store.graphs["inheritance"]
        assert store.kg_for("inheritance", TreeParams(1, 2, 3)) is store.graphs["inheritance"]

    def test_kg_for_rebuilds_on_different_params(self, fig1_run):
        _, _, store = fig1_run
        # With two roots the lone papers 5 and 6 start entering as trees.
        graph = store.kg_for("inheritance", TreeParams(2, 2, 3))
        ids = {n.id for n in graph.nodes}
        assert ids == {1, 2, 3, 4, 7, 5}
        # Snapshot graph untouched.
        assert {n.id for n in store.graphs["inheritance"].nodes} == {1, 2, 3, 4, 7}

    def test_paper_detail_shape(self, fig1_run):
        _, _, store = fig1_run
        detail = store.paper_detail(1)
        assert detail == {
            "title": "HotpotQA saturation leakage",
            "keywords": ["leakage", "saturation", "decomposition", "retrieval", "confirm"],
            "resolved_text": "We confirm saturation and decomposition and retrieval.",
            "finding_text": "Open problem remains leakage.",
            "cited_by_count": 4,
        }
        assert store.paper_detail(999) is None

    def test_meta_counts(self, fig1_run):
        _, _, store = fig1_run
        meta = store.meta()
        assert meta["topic"] == "hotpot"
        assert meta["counts"]["papers"] == 7
        assert meta["counts"]["citation_edges"] == 8
        assert meta["counts"]["bundles"] == 7
        assert meta["counts"]["kg_inheritance_nodes"] == 5
        assert meta["params"]["inheritance"] == {"N": 1, "M": 2, "T": 3}
        assert meta["provider_tag"].startswith("hash-tfidf/dim=256/seed=7/")


class TestFlaggedPapers:
    def test_paper_without_insight_sentences_still_gets_bundle(self, tmp_path):
        from conftest import compose_doc

        docs = [
            compose_doc(1, "hotpot full", [("Conclusion", ["We confirm alpha.", "Open problem remains beta."])]),
            compose_doc(2, "hotpot also full", [("Conclusion", ["We confirm gamma.", "Open problem remains delta."])]),
            compose_doc(3, "hotpot empty conclusion", [("Conclusion", [])]),
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
            corpus=str(corpus),
            topic="hotpot",
            out_dir=str(tmp_path / "out"),
            labels=str(labels),
            kernel="linear",
            grid_c=[10.0],
            folds=2,
            inheritance_params=TreeParams(1, 1, 1),
            relevance_params=TreeParams(1, 1, 1),
        )
        store = run_pipeline(cfg)
        by_id = {b.paper_id: b for b in store.bundles}
        assert by_id[3].flagged
        assert by_id[3].resolved_text == ""
        # The flagged paper's matrix row and column are fully masked.
        i = store.matrix.index_of(3)
        assert not store.matrix.valid[i].any()
        assert not store.matrix.valid[:, i].any()
