"""Three-class sentence classifier: Issue Resolved / Neutral / Issue Finding.

One binary machine per class (one-vs-rest); prediction is the argmax of the
three decision values with exact ties broken by the fixed class order
resolved > neutral > finding. Hyperparameters come from a grid search scored
by stratified k-fold cross-validation macro-F1.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .embedding import EmbeddingVector
from .errors import InputError, InvalidArgument
from .svm import DEFAULT_MAX_ITER, DEFAULT_TOL, BinarySvm, KernelSpec

log = logging.getLogger(__name__)

CLASSES = ("resolved", "neutral", "finding")
SPLITS = ("train", "test")

DEFAULT_GRID_C = (0.1, 1.0, 10.0, 100.0)
DEFAULT_GRID_GAMMA = (0.001, 0.01, 0.1, 1.0)
DEFAULT_FOLDS = 5

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class LabeledSentence:
    text: str
    label: str
    split: str

    def __post_init__(self):
        if not self.text:
            raise InvalidArgument("labeled sentence text must be non-empty")
        if self.label not in CLASSES:
            raise InvalidArgument(f"unknown label: {self.label!r}")
        if self.split not in SPLITS:
            raise InvalidArgument(f"unknown split: {self.split!r}")


def load_labeled(path: str | Path) -> list[LabeledSentence]:
    """Read sentences from JSON Lines with text / label / split fields."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                out.append(
                    LabeledSentence(
                        str(obj["text"]),
                        str(obj["label"]).lower(),
                        str(obj["split"]).lower(),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, InvalidArgument) as exc:
                raise InputError(f"bad label record on line {lineno}: {exc}") from exc
    return out


def label_counts(sentences: Iterable[LabeledSentence]) -> dict[str, dict[str, int]]:
    counts = {split: {label: 0 for label in CLASSES} for split in SPLITS}
    for s in sentences:
        counts[s.split][s.label] += 1
    return counts


# ---------------------------------------------------------------------------
# Metrics


def confusion_matrix(
    true: Sequence[str], pred: Sequence[str], classes: Sequence[str] = CLASSES
) -> list[list[int]]:
    """Counts with rows = true class, columns = predicted class."""
    index = {c: k for k, c in enumerate(classes)}
    matrix = [[0] * len(classes) for _ in classes]
    for t, p in zip(true, pred):
        matrix[index[t]][index[p]] += 1
    return matrix


def _prf(matrix: list[list[int]], k: int) -> tuple[float, float, float]:
    tp = matrix[k][k]
    pred_total = sum(row[k] for row in matrix)
    true_total = sum(matrix[k])
    precision = tp / pred_total if pred_total else 0.0
    recall = tp / true_total if true_total else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return precision, recall, f1


@dataclass
class EvalReport:
    classes: tuple[str, ...]
    confusion: list[list[int]]
    per_class: dict[str, dict[str, float]]
    macro_f1: float

    @classmethod
    def from_predictions(
        cls, true: Sequence[str], pred: Sequence[str], classes: Sequence[str] = CLASSES
    ) -> "EvalReport":
        matrix = confusion_matrix(true, pred, classes)
        per_class = {}
        total_f1 = 0.0
        for k, name in enumerate(classes):
            precision, recall, f1 = _prf(matrix, k)
            per_class[name] = {"precision": precision, "recall": recall, "f1": f1}
            total_f1 += f1
        return cls(tuple(classes), matrix, per_class, total_f1 / len(classes))

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "confusion": self.confusion,
            "per_class": self.per_class,
            "macro_f1": self.macro_f1,
        }

    def rounded(self) -> dict:
        """Display form: metrics to 2 decimals, counts untouched."""
        return {
            "classes": list(self.classes),
            "confusion": self.confusion,
            "per_class": {
                name: {k: round(v, 2) for k, v in metrics.items()}
                for name, metrics in self.per_class.items()
            },
            "macro_f1": round(self.macro_f1, 2),
        }


# ---------------------------------------------------------------------------
# Model


def _check_vectors(vectors: Sequence[EmbeddingVector]) -> str:
    if not vectors:
        raise InvalidArgument("no vectors supplied")
    tag = vectors[0].provider_tag
    dim = vectors[0].dim
    for v in vectors:
        if v.provider_tag != tag:
            raise InvalidArgument("vectors mix embedding providers")
        if v.dim != dim:
            raise InvalidArgument("vectors mix embedding dimensions")
    return tag


@dataclass
class OvrModel:
    """One-vs-rest SVM over the fixed three-class order."""

    machines: dict[str, BinarySvm]
    provider_tag: str
    training: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    classes: tuple[str, ...] = CLASSES

    def decision_row(self, vec: EmbeddingVector) -> np.ndarray:
        if vec.provider_tag != self.provider_tag:
            raise InvalidArgument(
                f"vector from provider {vec.provider_tag!r} does not match model "
                f"provider {self.provider_tag!r}"
            )
        x = vec.values.reshape(1, -1)
        return np.array([float(self.machines[c].decision(x)[0]) for c in self.classes])

    def classify(self, vec: EmbeddingVector) -> str:
        # argmax takes the first maximum, which is the fixed tie-break order
        return self.classes[int(np.argmax(self.decision_row(vec)))]

    def to_dict(self) -> dict:
        return {
            "version": MODEL_FORMAT_VERSION,
            "classes": list(self.classes),
            "provider_tag": self.provider_tag,
            "machines": {c: self.machines[c].to_dict() for c in self.classes},
            "training": self.training,
            "warnings": self.warnings,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "OvrModel":
        version = obj.get("version")
        if version != MODEL_FORMAT_VERSION:
            raise InputError(f"unsupported model format version: {version!r}")
        classes = tuple(obj["classes"])
        return cls(
            machines={c: BinarySvm.from_dict(obj["machines"][c]) for c in classes},
            provider_tag=obj["provider_tag"],
            training=obj.get("training", {}),
            warnings=list(obj.get("warnings", [])),
            classes=classes,
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path: str | Path) -> "OvrModel":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def stratified_folds(
    labels: Sequence[str], k: int, classes: Sequence[str] = CLASSES
) -> list[list[int]]:
    """Deterministic round-robin assignment per class, in input order."""
    folds: list[list[int]] = [[] for _ in range(k)]
    position = {c: 0 for c in classes}
    for i, label in enumerate(labels):
        folds[position[label] % k].append(i)
        position[label] += 1
    return folds


def _fit_machines(
    X: np.ndarray,
    labels: Sequence[str],
    kernel: KernelSpec,
    C: float,
    classes: Sequence[str],
    tol: float,
    max_iter: int,
) -> dict[str, BinarySvm]:
    machines = {}
    for c in classes:
        y = np.where(np.asarray(labels) == c, 1.0, -1.0)
        machines[c] = BinarySvm(kernel, C).fit(X, y, tol=tol, max_iter=max_iter)
    return machines


def _predict_rows(machines: dict[str, BinarySvm], classes: Sequence[str], X: np.ndarray) -> list[str]:
    scores = np.stack([machines[c].decision(X) for c in classes], axis=1)
    return [classes[int(k)] for k in np.argmax(scores, axis=1)]


def train(
    vectors: Sequence[EmbeddingVector],
    labels: Sequence[str],
    kernel: str = "rbf",
    grid_c: Sequence[float] = DEFAULT_GRID_C,
    grid_gamma: Sequence[float] = DEFAULT_GRID_GAMMA,
    folds: int = DEFAULT_FOLDS,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> OvrModel:
    """Grid-search hyperparameters by stratified CV, then fit the final model.

    Cells are scored by the mean over folds of out-of-fold macro-F1; ties go
    to the smaller C, then the smaller gamma.
    """
    tag = _check_vectors(vectors)
    if len(vectors) != len(labels):
        raise InvalidArgument("vectors and labels differ in length")
    present = sorted(set(labels))
    for label in present:
        if label not in CLASSES:
            raise InvalidArgument(f"unknown label: {label!r}")
    if len(present) < 2:
        raise InvalidArgument("training data must contain at least two classes")
    class_min = min(sum(1 for l in labels if l == c) for c in present)
    if folds < 2 or folds > class_min:
        raise InvalidArgument(
            f"folds must be between 2 and the smallest class count ({class_min})"
        )

    X = np.stack([v.values for v in vectors])
    labels = list(labels)
    # Classes absent from the data get no machine; decision order keeps the
    # fixed tuple so tie-break semantics never depend on the data.
    active = tuple(c for c in CLASSES if c in present)

    if kernel == "linear":
        cells = [(float(c), None) for c in sorted(grid_c)]
    elif kernel == "rbf":
        cells = [(float(c), float(g)) for c in sorted(grid_c) for g in sorted(grid_gamma)]
    else:
        raise InvalidArgument(f"unknown kernel: {kernel!r}")
    if not cells:
        raise InvalidArgument("hyperparameter grid is empty")

    fold_sets = stratified_folds(labels, folds, classes=active)
    fold_masks = []
    for test_idx in fold_sets:
        mask = np.zeros(len(labels), dtype=bool)
        mask[test_idx] = True
        fold_masks.append(mask)

    best = cells[0]
    best_score = -1.0
    cv_scores = []
    for C, gamma in cells:
        spec = KernelSpec(kernel, gamma)
        fold_scores = []
        for mask in fold_masks:
            train_labels = [l for l, m in zip(labels, mask) if not m]
            machines = _fit_machines(
                X[~mask], train_labels, spec, C, active, tol, max_iter
            )
            pred = _predict_rows(machines, active, X[mask])
            true = [l for l, m in zip(labels, mask) if m]
            fold_scores.append(
                EvalReport.from_predictions(true, pred, classes=active).macro_f1
            )
        score = sum(fold_scores) / len(fold_scores)
        cv_scores.append({"C": C, "gamma": gamma, "macro_f1": score})
        if score > best_score:  # strict: earlier cells win ties
            best_score = score
            best = (C, gamma)

    C, gamma = best
    spec = KernelSpec(kernel, gamma)
    machines = _fit_machines(X, labels, spec, C, active, tol, max_iter)
    warnings = []
    for c, machine in machines.items():
        if not machine.converged:
            message = (
                f"machine for {c!r} stopped at {machine.iterations} iterations "
                f"with KKT violation {machine.kkt_violation:.3e}"
            )
            warnings.append(message)
            log.warning("%s", message)
    return OvrModel(
        machines=machines,
        provider_tag=tag,
        training={
            "kernel": kernel,
            "grid_c": [c for c, _ in cells] if kernel == "linear" else sorted(set(grid_c)),
            "grid_gamma": [] if kernel == "linear" else sorted(set(grid_gamma)),
            "folds": folds,
            "cv_scores": cv_scores,
            "chosen": {"C": C, "gamma": gamma, "macro_f1": best_score},
        },
        warnings=warnings,
        classes=active,
    )


def evaluate(
    model: OvrModel,
    vectors: Sequence[EmbeddingVector],
    labels: Sequence[str],
) -> EvalReport:
    if not vectors:
        raise InvalidArgument("cannot evaluate on an empty test set")
    if len(vectors) != len(labels):
        raise InvalidArgument("vectors and labels differ in length")
    pred = [model.classify(v) for v in vectors]
    return EvalReport.from_predictions(list(labels), pred)


# ---------------------------------------------------------------------------
# Insight bundles


class SentenceClassifier:
    """Glue between an embedding provider and a trained model."""

    def __init__(self, model: OvrModel, provider):
        if provider.tag != model.provider_tag:
            raise InvalidArgument(
                f"provider {provider.tag!r} does not match model provider "
                f"{model.provider_tag!r}"
            )
        self.model = model
        self.provider = provider

    def label_for(self, text: str) -> str:
        return self.model.classify(self.provider.embed(text))


@dataclass
class InsightBundle:
    paper_id: int
    resolved_text: str
    finding_text: str
    resolved_indices: list[int]
    finding_indices: list[int]
    flagged: bool  # no resolved and no finding sentence found

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "resolved_text": self.resolved_text,
            "finding_text": self.finding_text,
            "resolved_indices": self.resolved_indices,
            "finding_indices": self.finding_indices,
            "flagged": self.flagged,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "InsightBundle":
        return cls(
            paper_id=int(obj["paper_id"]),
            resolved_text=obj["resolved_text"],
            finding_text=obj["finding_text"],
            resolved_indices=[int(i) for i in obj["resolved_indices"]],
            finding_indices=[int(i) for i in obj["finding_indices"]],
            flagged=bool(obj["flagged"]),
        )


def extract_insight_bundles(
    segmented: Sequence[tuple[int, Sequence[str]]],
    labeler,
) -> list[InsightBundle]:
    """Classify each paper's sentences and join them per label.

    ``segmented`` pairs a paper id with its insight sentences in document
    order; ``labeler`` is anything with a ``label_for(text) -> label`` method.
    Sentences join with a single space. Papers with neither a resolved nor a
    finding sentence come back flagged with two empty texts.
    """
    bundles = []
    for paper_id, sentences in segmented:
        resolved: list[int] = []
        finding: list[int] = []
        for i, sentence in enumerate(sentences):
            label = labeler.label_for(sentence)
            if label == "resolved":
                resolved.append(i)
            elif label == "finding":
                finding.append(i)
        bundles.append(
            InsightBundle(
                paper_id=paper_id,
                resolved_text=" ".join(sentences[i] for i in resolved),
                finding_text=" ".join(sentences[i] for i in finding),
                resolved_indices=resolved,
                finding_indices=finding,
                flagged=not resolved and not finding,
            )
        )
    return bundles


def write_bundles(bundles: Sequence[InsightBundle], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for bundle in bundles:
            fh.write(json.dumps(bundle.to_dict(), sort_keys=True, ensure_ascii=False))
            fh.write("\n")


def read_bundles(path: str | Path) -> list[InsightBundle]:
    bundles = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                bundles.append(InsightBundle.from_dict(json.loads(line)))
    return bundles
