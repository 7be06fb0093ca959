"""End-to-end orchestration and artifact persistence.

Each stage reads the previous stage's file artifacts and writes its own, so
stages can be re-run in isolation from the CLI. Writes go through a
".partial" temp name and are renamed into place only on success; an aborted
stage leaves the marker behind instead of a half-written artifact.

Stage failures surface as PipelineError with a stable stage name and exit
code so shell callers can tell where a run died.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import corpus as corpus_mod
from . import classifier as classifier_mod
from .embedding import DocumentFrequencyTable, ProviderConfig, make_provider
from .errors import InsightKgError, InvalidArgument, PipelineError
from .kg import EDGE_KEYWORD_COUNT, KEYWORD_COUNT, KnowledgeGraph, assemble_kg, save_kg
from .relevance import RelevanceMatrix, build_relevance_matrix
from .segmenter import OverrideSet, SentenceSpan, default_abbreviations, segment
from .trees import Forest, TreeParams, build_inheritance_forest, build_relevance_forest, write_trace

log = logging.getLogger(__name__)

STAGE_CODES = {
    "config": 2,
    "ingest": 3,
    "segment": 4,
    "train": 5,
    "classify": 6,
    "relate": 7,
    "trees": 8,
    "export": 9,
    "serve": 10,
}

ARTIFACTS = {
    "subset": "subset.jsonl",
    "edges": "edges.csv",
    "df": "df.json",
    "sentences": "sentences.jsonl",
    "model": "model.json",
    "eval": "eval.json",
    "bundles": "bundles.jsonl",
    "matrix": "matrix.json",
    "forest_inheritance": "forest_inheritance.json",
    "forest_relevance": "forest_relevance.json",
    "trace_inheritance": "trace_inheritance.jsonl",
    "trace_relevance": "trace_relevance.jsonl",
    "kg_inheritance": "kg_inheritance.json",
    "kg_relevance": "kg_relevance.json",
    "meta": "meta.json",
}

DEFAULT_TREE_PARAMS = TreeParams(3, 3, 3)


@dataclass
class PipelineConfig:
    corpus: str
    topic: str
    out_dir: str
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    labels: str | None = None
    model_path: str | None = None
    kernel: str = "rbf"
    grid_c: Sequence[float] = classifier_mod.DEFAULT_GRID_C
    grid_gamma: Sequence[float] = classifier_mod.DEFAULT_GRID_GAMMA
    folds: int = classifier_mod.DEFAULT_FOLDS
    inheritance_params: TreeParams = DEFAULT_TREE_PARAMS
    relevance_params: TreeParams = DEFAULT_TREE_PARAMS
    keyword_count: int = KEYWORD_COUNT
    edge_keyword_count: int = EDGE_KEYWORD_COUNT
    overrides: str | None = None
    addr: str = "127.0.0.1:8765"

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        """Load a JSON config file; tree params accept {"N","M","T"} blocks."""
        try:
            with open(path, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise PipelineError("config", STAGE_CODES["config"], f"cannot read config: {exc}")
        except json.JSONDecodeError as exc:
            raise PipelineError("config", STAGE_CODES["config"], f"config is not valid JSON: {exc}")
        return cls.from_dict(obj, base_dir=Path(path).parent)

    @classmethod
    def from_dict(cls, obj: dict, base_dir: Path | None = None) -> "PipelineConfig":
        def resolve(value):
            if value is None or base_dir is None:
                return value
            p = Path(value)
            return str(p if p.is_absolute() else base_dir / p)

        try:
            kwargs = {
                "corpus": resolve(obj["corpus"]),
                "topic": obj["topic"],
                "out_dir": resolve(obj["out_dir"]),
            }
            if "provider" in obj:
                kwargs["provider"] = ProviderConfig.from_dict(obj["provider"])
            for key in ("labels", "model_path", "overrides"):
                if obj.get(key) is not None:
                    kwargs[key] = resolve(obj[key])
            for key in ("kernel", "grid_c", "grid_gamma", "folds", "keyword_count",
                        "edge_keyword_count", "addr"):
                if key in obj:
                    kwargs[key] = obj[key]
            for key in ("inheritance_params", "relevance_params"):
                if key in obj:
                    block = obj[key]
                    kwargs[key] = TreeParams(block["N"], block["M"], block["T"])
        except (KeyError, TypeError, InvalidArgument) as exc:
            raise PipelineError("config", STAGE_CODES["config"], f"bad config: {exc}")
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "corpus": self.corpus,
            "topic": self.topic,
            "out_dir": self.out_dir,
            "provider": {
                "kind": self.provider.kind,
                "dim": self.provider.dim,
                "seed": self.provider.seed,
                "endpoint": self.provider.endpoint,
            },
            "labels": self.labels,
            "model_path": self.model_path,
            "kernel": self.kernel,
            "grid_c": list(self.grid_c),
            "grid_gamma": list(self.grid_gamma),
            "folds": self.folds,
            "inheritance_params": self.inheritance_params.to_dict(),
            "relevance_params": self.relevance_params.to_dict(),
            "keyword_count": self.keyword_count,
            "edge_keyword_count": self.edge_keyword_count,
            "overrides": self.overrides,
            "addr": self.addr,
        }

    def config_hash(self) -> str:
        # Paths are excluded so moving a workspace does not change the hash.
        obj = self.to_dict()
        for key in ("corpus", "out_dir", "labels", "model_path", "overrides", "addr"):
            obj.pop(key, None)
        payload = json.dumps(obj, sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def validate(self) -> None:
        if not Path(self.corpus).is_file():
            raise PipelineError(
                "config", STAGE_CODES["config"], f"corpus file not found: {self.corpus}"
            )
        if not self.topic:
            raise PipelineError("config", STAGE_CODES["config"], "topic keyword is empty")
        for name, path in (("labels", self.labels), ("model_path", self.model_path),
                           ("overrides", self.overrides)):
            if path is not None and not Path(path).is_file():
                raise PipelineError(
                    "config", STAGE_CODES["config"], f"{name} file not found: {path}"
                )
        if self.model_path is None and self.labels is None:
            raise PipelineError(
                "config", STAGE_CODES["config"],
                "either a label file (to train) or a saved model is required",
            )


@contextmanager
def _partial(path: Path):
    """Write to <path>.partial, rename into place only if the block succeeds."""
    marker = path.with_name(path.name + ".partial")
    yield marker
    os.replace(marker, path)


def _wrap_stage(stage: str):
    @contextmanager
    def guard():
        try:
            yield
        except PipelineError:
            raise
        except InsightKgError as exc:
            raise PipelineError(stage, STAGE_CODES[stage], str(exc)) from exc
        except OSError as exc:
            raise PipelineError(stage, STAGE_CODES[stage], f"io failure: {exc}") from exc

    return guard()


# ---------------------------------------------------------------------------
# Stages. Each takes what it needs, writes its artifacts, returns its product.


def df_from_subset(subset: corpus_mod.TopicSubset) -> DocumentFrequencyTable:
    """One DF document per paper: title plus insight text."""
    return DocumentFrequencyTable.from_texts(
        p.title + "\n" + p.insight_text for p in subset.papers
    )


def stage_ingest(cfg: PipelineConfig) -> tuple[corpus_mod.TopicSubset, DocumentFrequencyTable]:
    out = Path(cfg.out_dir)
    with _wrap_stage("ingest"):
        subset = corpus_mod.load_subset(cfg.corpus, cfg.topic)
        with _partial(out / ARTIFACTS["subset"]) as papers_tmp:
            with _partial(out / ARTIFACTS["edges"]) as edges_tmp:
                corpus_mod.write_subset(subset, papers_tmp, edges_tmp)
        df = df_from_subset(subset)
        with _partial(out / ARTIFACTS["df"]) as tmp:
            df.save(tmp)
        log.info(
            "ingest: %d papers, %d citation edges, %d malformed dropped",
            len(subset.papers), len(subset.citation_edges), subset.malformed_document_count,
        )
        return subset, df


def stage_segment(cfg: PipelineConfig, subset: corpus_mod.TopicSubset) -> dict[int, list[SentenceSpan]]:
    out = Path(cfg.out_dir)
    with _wrap_stage("segment"):
        abbreviations = default_abbreviations()
        overrides = OverrideSet.load(cfg.overrides) if cfg.overrides else None
        segmented: dict[int, list[SentenceSpan]] = {}
        for paper in subset.papers:
            segmented[paper.corpus_id] = segment(
                paper.insight_text,
                paper_id=paper.corpus_id,
                abbreviations=abbreviations,
                overrides=overrides,
            )
        with _partial(out / ARTIFACTS["sentences"]) as tmp:
            with open(tmp, "w", encoding="utf-8") as fh:
                for paper_id in sorted(segmented):
                    for span in segmented[paper_id]:
                        fh.write(json.dumps({
                            "paper_id": span.paper_id,
                            "index": span.index,
                            "text": span.text,
                            "start": span.char_range[0],
                            "end": span.char_range[1],
                        }, sort_keys=True, ensure_ascii=False))
                        fh.write("\n")
        return segmented


def read_sentences(path: str | Path) -> dict[int, list[SentenceSpan]]:
    """Load the segment stage's artifact back into per-paper span lists."""
    segmented: dict[int, list[SentenceSpan]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            span = SentenceSpan(
                paper_id=int(obj["paper_id"]),
                index=int(obj["index"]),
                text=obj["text"],
                char_range=(int(obj["start"]), int(obj["end"])),
            )
            segmented.setdefault(span.paper_id, []).append(span)
    for spans in segmented.values():
        spans.sort(key=lambda s: s.index)
    return segmented


def stage_train(cfg: PipelineConfig, provider) -> classifier_mod.OvrModel:
    out = Path(cfg.out_dir)
    with _wrap_stage("train"):
        if cfg.model_path:
            model = classifier_mod.OvrModel.load(cfg.model_path)
            if model.provider_tag != provider.tag:
                raise PipelineError(
                    "train", STAGE_CODES["train"],
                    f"saved model was trained against provider {model.provider_tag!r}, "
                    f"current provider is {provider.tag!r}",
                )
            return model
        sentences = classifier_mod.load_labeled(cfg.labels)
        train_set = [s for s in sentences if s.split == "train"]
        test_set = [s for s in sentences if s.split == "test"]
        if not train_set:
            raise PipelineError("train", STAGE_CODES["train"], "label file has no train rows")
        vectors = provider.embed_many([s.text for s in train_set])
        model = classifier_mod.train(
            vectors,
            [s.label for s in train_set],
            kernel=cfg.kernel,
            grid_c=cfg.grid_c,
            grid_gamma=cfg.grid_gamma,
            folds=cfg.folds,
        )
        with _partial(out / ARTIFACTS["model"]) as tmp:
            model.save(tmp)
        if test_set:
            report = classifier_mod.evaluate(
                model,
                provider.embed_many([s.text for s in test_set]),
                [s.label for s in test_set],
            )
            with _partial(out / ARTIFACTS["eval"]) as tmp:
                with open(tmp, "w", encoding="utf-8") as fh:
                    json.dump(report.to_dict(), fh, sort_keys=True)
            log.info("train: macro-F1 %.3f on %d test sentences", report.macro_f1, len(test_set))
        return model


def stage_classify(
    cfg: PipelineConfig,
    model: classifier_mod.OvrModel,
    provider,
    subset: corpus_mod.TopicSubset,
    segmented: dict[int, list[SentenceSpan]],
) -> list[classifier_mod.InsightBundle]:
    out = Path(cfg.out_dir)
    with _wrap_stage("classify"):
        labeler = classifier_mod.SentenceClassifier(model, provider)
        # Keyed off the subset, not the sentence file: a paper with no
        # insight sentences still needs its (flagged) bundle downstream.
        pairs = [
            (paper_id, [span.text for span in segmented.get(paper_id, [])])
            for paper_id in subset.ids()
        ]
        bundles = classifier_mod.extract_insight_bundles(pairs, labeler)
        with _partial(out / ARTIFACTS["bundles"]) as tmp:
            classifier_mod.write_bundles(bundles, tmp)
        return bundles


def stage_relate(
    cfg: PipelineConfig, bundles: Sequence[classifier_mod.InsightBundle], provider
) -> RelevanceMatrix:
    out = Path(cfg.out_dir)
    with _wrap_stage("relate"):
        matrix = build_relevance_matrix(bundles, provider)
        with _partial(out / ARTIFACTS["matrix"]) as tmp:
            matrix.save(tmp)
        return matrix


def stage_trees(
    cfg: PipelineConfig, subset: corpus_mod.TopicSubset, matrix: RelevanceMatrix
) -> dict[str, Forest]:
    out = Path(cfg.out_dir)
    with _wrap_stage("trees"):
        inheritance, trace_i = build_inheritance_forest(
            subset.ids(), subset.citation_edges, cfg.inheritance_params
        )
        relevance, trace_r = build_relevance_forest(matrix, cfg.relevance_params)
        with _partial(out / ARTIFACTS["forest_inheritance"]) as tmp:
            inheritance.save(tmp)
        with _partial(out / ARTIFACTS["trace_inheritance"]) as tmp:
            write_trace(trace_i, tmp)
        with _partial(out / ARTIFACTS["forest_relevance"]) as tmp:
            relevance.save(tmp)
        with _partial(out / ARTIFACTS["trace_relevance"]) as tmp:
            write_trace(trace_r, tmp)
        return {"inheritance": inheritance, "relevance": relevance}


def stage_export(
    cfg: PipelineConfig,
    forests: dict[str, Forest],
    subset: corpus_mod.TopicSubset,
    bundles: Sequence[classifier_mod.InsightBundle],
    df: DocumentFrequencyTable,
) -> dict[str, KnowledgeGraph]:
    out = Path(cfg.out_dir)
    with _wrap_stage("export"):
        graphs = {}
        for kind, forest in forests.items():
            graph = assemble_kg(
                forest, subset, bundles, df,
                keyword_count=cfg.keyword_count,
                edge_keyword_count=cfg.edge_keyword_count,
            )
            with _partial(out / ARTIFACTS[f"kg_{kind}"]) as tmp:
                save_kg(graph, tmp)
            graphs[kind] = graph
        return graphs


# ---------------------------------------------------------------------------
# Snapshot


@dataclass
class KgStore:
    """Immutable snapshot the HTTP service reads from.

    Parameter overrides rebuild forests and graphs in memory from the cached
    matrix and citation graph; the snapshot's files are never touched.
    """

    config: PipelineConfig
    subset: corpus_mod.TopicSubset
    df: DocumentFrequencyTable
    bundles: list[classifier_mod.InsightBundle]
    matrix: RelevanceMatrix
    forests: dict[str, Forest]
    graphs: dict[str, KnowledgeGraph]
    config_hash: str
    built_at: str

    def params_for(self, kind: str) -> TreeParams:
        return (
            self.config.inheritance_params
            if kind == "inheritance"
            else self.config.relevance_params
        )

    def kg_for(self, kind: str, params: TreeParams | None = None) -> KnowledgeGraph:
        if kind not in ("inheritance", "relevance"):
            raise InvalidArgument(f"unknown graph kind: {kind!r}")
        if params is None or params == self.params_for(kind):
            return self.graphs[kind]
        if kind == "inheritance":
            forest, _ = build_inheritance_forest(
                self.subset.ids(), self.subset.citation_edges, params
            )
        else:
            forest, _ = build_relevance_forest(self.matrix, params)
        return assemble_kg(
            forest, self.subset, self.bundles, self.df,
            keyword_count=self.config.keyword_count,
            edge_keyword_count=self.config.edge_keyword_count,
        )

    def paper_detail(self, paper_id: int) -> dict | None:
        papers = self.subset.by_id()
        paper = papers.get(paper_id)
        if paper is None:
            return None
        from .kg import extract_keywords  # local import avoids a cycle at module load

        bundle = next((b for b in self.bundles if b.paper_id == paper_id), None)
        cited_by = corpus_mod.in_citation_counts(self.subset).get(paper_id, 0)
        return {
            "title": paper.title,
            "keywords": extract_keywords(paper, self.df, k=self.config.keyword_count),
            "resolved_text": bundle.resolved_text if bundle else "",
            "finding_text": bundle.finding_text if bundle else "",
            "cited_by_count": cited_by,
        }

    def meta(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "built_at": self.built_at,
            "topic": self.config.topic,
            "provider_tag": make_provider(self.config.provider, self.df).tag,
            "counts": {
                "papers": len(self.subset.papers),
                "citation_edges": len(self.subset.citation_edges),
                "bundles": len(self.bundles),
                "kg_inheritance_nodes": len(self.graphs["inheritance"].nodes),
                "kg_relevance_nodes": len(self.graphs["relevance"].nodes),
            },
            "params": {
                "inheritance": self.config.inheritance_params.to_dict(),
                "relevance": self.config.relevance_params.to_dict(),
            },
        }


def run_pipeline(cfg: PipelineConfig) -> KgStore:
    """Execute every stage in order and return the loaded snapshot."""
    cfg.validate()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    subset, df = stage_ingest(cfg)
    segmented = stage_segment(cfg, subset)
    provider = make_provider(cfg.provider, df)
    model = stage_train(cfg, provider)
    bundles = stage_classify(cfg, model, provider, subset, segmented)
    matrix = stage_relate(cfg, bundles, provider)
    forests = stage_trees(cfg, subset, matrix)
    graphs = stage_export(cfg, forests, subset, bundles, df)

    built_at = datetime.now(timezone.utc).isoformat()
    with _wrap_stage("export"):
        store = KgStore(
            config=cfg,
            subset=subset,
            df=df,
            bundles=list(bundles),
            matrix=matrix,
            forests=forests,
            graphs=graphs,
            config_hash=cfg.config_hash(),
            built_at=built_at,
        )
        with _partial(out / ARTIFACTS["meta"]) as tmp:
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(store.meta(), fh, sort_keys=True)
    return store


def load_store(cfg: PipelineConfig) -> KgStore:
    """Rehydrate a snapshot from a completed output directory."""
    out = Path(cfg.out_dir)
    missing = [
        name for name in ("subset", "edges", "df", "bundles", "matrix",
                          "forest_inheritance", "forest_relevance",
                          "kg_inheritance", "kg_relevance", "meta")
        if not (out / ARTIFACTS[name]).is_file()
    ]
    if missing:
        raise PipelineError(
            "serve", STAGE_CODES["serve"],
            f"output directory is missing artifacts: {', '.join(ARTIFACTS[m] for m in missing)}",
        )
    with _wrap_stage("serve"):
        subset = corpus_mod.read_subset(
            out / ARTIFACTS["subset"], out / ARTIFACTS["edges"], cfg.topic
        )
        df = DocumentFrequencyTable.load(out / ARTIFACTS["df"])
        bundles = classifier_mod.read_bundles(out / ARTIFACTS["bundles"])
        matrix = RelevanceMatrix.load(out / ARTIFACTS["matrix"])
        forests = {
            "inheritance": Forest.load(out / ARTIFACTS["forest_inheritance"]),
            "relevance": Forest.load(out / ARTIFACTS["forest_relevance"]),
        }
        graphs = {
            kind: assemble_kg(
                forests[kind], subset, bundles, df,
                keyword_count=cfg.keyword_count,
                edge_keyword_count=cfg.edge_keyword_count,
            )
            for kind in forests
        }
        with open(out / ARTIFACTS["meta"], "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    return KgStore(
        config=cfg,
        subset=subset,
        df=df,
        bundles=bundles,
        matrix=matrix,
        forests=forests,
        graphs=graphs,
        config_hash=meta.get("config_hash", cfg.config_hash()),
        built_at=meta.get("built_at", ""),
    )
