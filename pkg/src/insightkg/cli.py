"""Command-line entry points.

Stages can run one at a time (each rereads the previous stage's artifacts
from the output directory) or all at once with ``run-all --config``. Every
command exits 0 on success; failures exit with the failing stage's code
(config=2, ingest=3, segment=4, train=5, classify=6, relate=7, trees=8,
export=9, serve=10) so shell pipelines can tell where a run died.
"""

from __future__ import annotations

import functools
import json
import logging
import sys
from pathlib import Path

import click

from . import __version__
from . import corpus as corpus_mod
from . import classifier as classifier_mod
from . import pipeline as pipeline_mod
from .demo import build_demo
from .embedding import DocumentFrequencyTable, ProviderConfig, make_provider
from .errors import InsightKgError, PipelineError
from .pipeline import ARTIFACTS, STAGE_CODES, PipelineConfig
from .relevance import RelevanceMatrix
from .server import serve as serve_store
from .trees import Forest, TreeParams

log = logging.getLogger(__name__)


def _fail(exc: Exception) -> None:
    if isinstance(exc, PipelineError):
        click.echo(f"error [{exc.stage}]: {exc}", err=True)
        sys.exit(exc.code)
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


def _stage_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except InsightKgError as exc:
            _fail(exc)

    return wrapper


def _load_config(config_path: str | None, **overrides) -> PipelineConfig:
    """Config file first, explicit flags on top.

    Without a config file, stage commands past ingest only need the output
    directory: they rehydrate everything else from its artifacts.
    """
    if config_path:
        cfg = PipelineConfig.from_file(config_path)
    else:
        cfg = PipelineConfig(
            corpus=overrides.get("corpus") or "",
            topic=overrides.get("topic") or "",
            out_dir=overrides.get("out_dir") or "out",
        )
    for name, value in overrides.items():
        if value is not None and hasattr(cfg, name):
            setattr(cfg, name, value)
    return cfg


def _subset(cfg: PipelineConfig) -> corpus_mod.TopicSubset:
    out = Path(cfg.out_dir)
    return corpus_mod.read_subset(
        out / ARTIFACTS["subset"], out / ARTIFACTS["edges"], cfg.topic
    )


def _provider(cfg: PipelineConfig):
    df = DocumentFrequencyTable.load(Path(cfg.out_dir) / ARTIFACTS["df"])
    return make_provider(cfg.provider, df)


def _model(cfg: PipelineConfig) -> classifier_mod.OvrModel:
    path = cfg.model_path or str(Path(cfg.out_dir) / ARTIFACTS["model"])
    return classifier_mod.OvrModel.load(path)


_config_option = click.option(
    "--config", "config_path", type=click.Path(), default=None,
    help="JSON config file; explicit flags override its values.",
)
_out_option = click.option(
    "--out", "out_dir", type=click.Path(), default=None,
    help="Artifact directory (default ./out or the config's out_dir).",
)


@click.group()
@click.version_option(version=__version__)
@click.option("--verbose", is_flag=True, help="Log stage progress to stderr.")
def main(verbose: bool):
    """Build and serve explorable paper knowledge graphs."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


@main.command()
@_config_option
@click.option("--corpus", type=click.Path(), default=None, help="Corpus JSONL file.")
@click.option("--topic", default=None, help="Topic keyword to filter on.")
@_out_option
@_stage_errors
def ingest(config_path, corpus, topic, out_dir):
    """Filter the corpus by topic and extract the citation graph."""
    cfg = _load_config(config_path, corpus=corpus, topic=topic, out_dir=out_dir)
    if not cfg.corpus:
        raise PipelineError("config", STAGE_CODES["config"], "--corpus is required")
    if not cfg.topic:
        raise PipelineError("config", STAGE_CODES["config"], "--topic is required")
    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    subset, _ = pipeline_mod.stage_ingest(cfg)
    click.echo(
        f"ingested {len(subset.papers)} papers, "
        f"{len(subset.citation_edges)} citation edges "
        f"({subset.malformed_document_count} malformed documents skipped)"
    )


@main.command()
@_config_option
@click.option("--topic", default=None, help="Topic keyword used at ingest time.")
@_out_option
@click.option("--overrides", type=click.Path(), default=None,
              help="JSONL file of manual split/join corrections.")
@_stage_errors
def segment(config_path, topic, out_dir, overrides):
    """Split each paper's insight sections into sentences."""
    cfg = _load_config(config_path, topic=topic, out_dir=out_dir, overrides=overrides)
    segmented = pipeline_mod.stage_segment(cfg, _subset(cfg))
    total = sum(len(spans) for spans in segmented.values())
    click.echo(f"segmented {total} sentences across {len(segmented)} papers")


@main.command()
@_config_option
@click.option("--labels", type=click.Path(), default=None, help="Labeled sentence JSONL.")
@click.option("--kernel", type=click.Choice(["linear", "rbf"]), default=None)
@click.option("--grid-c", default=None, help="Comma-separated C values.")
@click.option("--grid-gamma", default=None, help="Comma-separated gamma values.")
@click.option("--folds", type=int, default=None)
@_out_option
@_stage_errors
def train(config_path, labels, kernel, grid_c, grid_gamma, folds, out_dir):
    """Grid-search and train the issue-status classifier."""
    overrides = {"labels": labels, "kernel": kernel, "folds": folds, "out_dir": out_dir}
    if grid_c:
        overrides["grid_c"] = [float(v) for v in grid_c.split(",")]
    if grid_gamma:
        overrides["grid_gamma"] = [float(v) for v in grid_gamma.split(",")]
    cfg = _load_config(config_path, **overrides)
    cfg.model_path = None  # explicit train always fits a fresh model
    if not cfg.labels:
        raise PipelineError("config", STAGE_CODES["config"], "--labels is required")
    model = pipeline_mod.stage_train(cfg, _provider(cfg))
    chosen = model.training.get("chosen", {})
    click.echo(
        f"trained on grid cell C={chosen.get('C')} gamma={chosen.get('gamma')} "
        f"(cv macro-F1 {chosen.get('macro_f1', 0.0):.3f})"
    )
    for warning in model.warnings:
        click.echo(f"warning: {warning}", err=True)


@main.command()
@_config_option
@click.option("--model", "model_path", type=click.Path(), default=None,
              help="Saved model JSON (default: the out directory's model).")
@_out_option
@_stage_errors
def classify(config_path, model_path, out_dir):
    """Label insight sentences and build per-paper bundles."""
    cfg = _load_config(config_path, model_path=model_path, out_dir=out_dir)
    subset = _subset(cfg)
    segmented = pipeline_mod.read_sentences(Path(cfg.out_dir) / ARTIFACTS["sentences"])
    bundles = pipeline_mod.stage_classify(cfg, _model(cfg), _provider(cfg), subset, segmented)
    flagged = sum(1 for b in bundles if b.flagged)
    click.echo(f"bundled {len(bundles)} papers ({flagged} without insight sentences)")


@main.command()
@_config_option
@_out_option
@_stage_errors
def relate(config_path, out_dir):
    """Compute the finding-to-resolved relevance matrix."""
    cfg = _load_config(config_path, out_dir=out_dir)
    bundles = classifier_mod.read_bundles(Path(cfg.out_dir) / ARTIFACTS["bundles"])
    matrix = pipeline_mod.stage_relate(cfg, bundles, _provider(cfg))
    click.echo(
        f"matrix over {len(matrix.paper_ids)} papers, "
        f"{int(matrix.valid.sum())} valid chain values"
    )


@main.command()
@_config_option
@click.option("--kind", type=click.Choice(["inheritance", "relevance", "both"]),
              default="both", show_default=True)
@click.option("--n", "n_roots", type=int, default=None, help="Max root papers N.")
@click.option("--m", "m_leaves", type=int, default=None, help="Max leaves per node M.")
@click.option("--t", "t_depth", type=int, default=None, help="Max depth T.")
@_out_option
@_stage_errors
def trees(config_path, kind, n_roots, m_leaves, t_depth, out_dir):
    """Grow the citation and relevance forests."""
    cfg = _load_config(config_path, out_dir=out_dir)
    if any(v is not None for v in (n_roots, m_leaves, t_depth)):
        for attr in ("inheritance_params", "relevance_params"):
            base = getattr(cfg, attr)
            setattr(cfg, attr, TreeParams(
                n_roots if n_roots is not None else base.N,
                m_leaves if m_leaves is not None else base.M,
                t_depth if t_depth is not None else base.T,
            ))
    subset = _subset(cfg)
    matrix = RelevanceMatrix.load(Path(cfg.out_dir) / ARTIFACTS["matrix"])
    forests = pipeline_mod.stage_trees(cfg, subset, matrix)
    for name, forest in forests.items():
        if kind in (name, "both"):
            click.echo(f"{name}: {len(forest.roots)} trees, {len(forest.nodes)} nodes")


@main.command()
@_config_option
@_out_option
@_stage_errors
def export(config_path, out_dir):
    """Assemble and export both knowledge graphs."""
    cfg = _load_config(config_path, out_dir=out_dir)
    out = Path(cfg.out_dir)
    subset = _subset(cfg)
    bundles = classifier_mod.read_bundles(out / ARTIFACTS["bundles"])
    df = DocumentFrequencyTable.load(out / ARTIFACTS["df"])
    forests = {
        name: Forest.load(out / ARTIFACTS[f"forest_{name}"])
        for name in ("inheritance", "relevance")
    }
    graphs = pipeline_mod.stage_export(cfg, forests, subset, bundles, df)
    for name, graph in graphs.items():
        click.echo(f"kg_{name}.json: {len(graph.nodes)} nodes, {len(graph.edges)} edges")


@main.command()
@_config_option
@click.option("--addr", default=None, help="host:port to bind (default from config).")
@_out_option
@_stage_errors
def serve(config_path, addr, out_dir):
    """Serve the built graphs and paper details over HTTP."""
    cfg = _load_config(config_path, addr=addr, out_dir=out_dir)
    store = pipeline_mod.load_store(cfg)
    click.echo(f"serving {cfg.topic!r} snapshot on http://{cfg.addr}", err=True)
    try:
        serve_store(store, cfg.addr)
    except OSError as exc:
        raise PipelineError("serve", STAGE_CODES["serve"], f"cannot bind {cfg.addr}: {exc}")
    except KeyboardInterrupt:
        click.echo("stopped", err=True)


@main.command("run-all")
@click.option("--config", "config_path", type=click.Path(), required=True,
              help="JSON config describing the whole run.")
@_stage_errors
def run_all(config_path):
    """Run every stage from ingest to export."""
    cfg = PipelineConfig.from_file(config_path)
    store = pipeline_mod.run_pipeline(cfg)
    counts = store.meta()["counts"]
    click.echo(
        f"pipeline complete: {counts['papers']} papers, "
        f"kg_inheritance {counts['kg_inheritance_nodes']} nodes, "
        f"kg_relevance {counts['kg_relevance_nodes']} nodes "
        f"(artifacts under {cfg.out_dir})"
    )


@main.command()
@_config_option
@_out_option
@click.option("--report-dir", type=click.Path(), default=None,
              help="Where to write figures and CSVs (default <out>/report).")
@_stage_errors
def report(config_path, out_dir, report_dir):
    """Render figures and CSV summaries from a completed build."""
    from .report import build_report  # matplotlib import deferred to use

    cfg = _load_config(config_path, out_dir=out_dir)
    store = pipeline_mod.load_store(cfg)
    target = Path(report_dir) if report_dir else Path(cfg.out_dir) / "report"
    written = build_report(store, target)
    for path in written:
        click.echo(str(path))


@main.command()
@click.option("--dir", "workdir", type=click.Path(), default="demo",
              show_default=True, help="Directory for the demo workspace.")
@_stage_errors
def demo(workdir):
    """Generate a synthetic corpus, labels, frozen model, and config."""
    paths = build_demo(workdir)
    for name, path in paths.items():
        click.echo(f"{name}: {path}")
    click.echo(f"next: insightkg run-all --config {paths['config']}")


if __name__ == "__main__":
    main()
