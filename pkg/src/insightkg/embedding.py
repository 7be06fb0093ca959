"""Sentence embeddings behind a pluggable provider contract.

Two providers implement the same surface:

* ``HashTfidfProvider`` — deterministic local stand-in: TF-IDF weights over a
  document-frequency table, signed feature hashing into ``dim`` buckets,
  L2 normalization. Stable across runs, machines and corpus input order.
* ``RemoteProvider`` — HTTP POST ``/embed`` with ``{"texts": [...]}``,
  expecting ``{"dim": int, "vectors": [[float, ...], ...]}`` in request
  order, so any transformer host can be dropped in.

Texts with no information (empty after trimming, or all stopwords) become a
flagged zero vector which downstream similarity refuses to score.
"""

from __future__ import annotations

import hashlib
import json
import math
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument, ProtocolError, ProviderError, UndefinedSimilarity
from .textutil import tokenize

MIN_DIM = 8
DEFAULT_DIM = 1024


@dataclass(frozen=True)
class EmbeddingVector:
    """A unit vector (or a flagged zero vector) tied to its provider."""

    values: np.ndarray
    provider_tag: str
    is_zero: bool = False

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("embedding components must be finite")
        if not self.is_zero and abs(float(np.linalg.norm(values)) - 1.0) > 1e-6:
            raise InvalidArgument("non-flagged embedding vectors must be unit length")


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Dot product of two unit vectors from the same provider, in [-1, 1]."""
    if a.provider_tag != b.provider_tag:
        raise InvalidArgument(
            f"cannot compare embeddings from different providers: "
            f"{a.provider_tag!r} vs {b.provider_tag!r}"
        )
    if a.is_zero or b.is_zero:
        raise UndefinedSimilarity("cosine of a flagged zero vector is undefined")
    return float(np.clip(np.dot(a.values, b.values), -1.0, 1.0))


class DocumentFrequencyTable:
    """Token -> number of documents containing it, plus the document count.

    Built from an unordered bag of documents, so permuting the corpus never
    changes a vector.
    """

    def __init__(self, n_docs: int, counts: dict[str, int]):
        self.n_docs = n_docs
        self.counts = counts

    @classmethod
    def from_texts(cls, texts: Iterable[str]) -> "DocumentFrequencyTable":
        counts: dict[str, int] = {}
        n = 0
        for text in texts:
            n += 1
            for token in set(tokenize(text)):
                counts[token] = counts.get(token, 0) + 1
        return cls(n, counts)

    def idf(self, token: str) -> float:
        # Smoothed so unseen tokens stay finite and every weight is > 0.
        return math.log((1 + self.n_docs) / (1 + self.counts.get(token, 0))) + 1.0

    def content_hash(self) -> str:
        payload = json.dumps(
            {"n_docs": self.n_docs, "df": dict(sorted(self.counts.items()))},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(
                {"n_docs": self.n_docs, "df": dict(sorted(self.counts.items()))},
                fh,
                sort_keys=True,
            )

    @classmethod
    def load(cls, path: str | Path) -> "DocumentFrequencyTable":
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        return cls(int(obj["n_docs"]), {k: int(v) for k, v in obj["df"].items()})


@dataclass
class ProviderConfig:
    """Provider selection and parameters, one config for the whole pipeline."""

    kind: str = "hash-tfidf"  # "hash-tfidf" | "remote"
    dim: int = DEFAULT_DIM
    seed: int = 0
    endpoint: str = ""
    timeout_s: float = 10.0
    batch_size: int = 64
    max_in_flight: int = 4

    def __post_init__(self):
        if self.kind not in ("hash-tfidf", "remote"):
            raise InvalidArgument(f"unknown provider kind: {self.kind!r}")
        if self.dim < MIN_DIM:
            raise InvalidArgument(f"embedding dim must be >= {MIN_DIM}")
        if self.kind == "remote" and not self.endpoint:
            raise InvalidArgument("remote provider requires an endpoint")

    @classmethod
    def from_dict(cls, obj: dict) -> "ProviderConfig":
        return cls(**{k: obj[k] for k in obj if k in cls.__dataclass_fields__})


class HashTfidfProvider:
    """Deterministic local provider: TF-IDF + signed feature hashing."""

    def __init__(self, df_table: DocumentFrequencyTable, dim: int = DEFAULT_DIM, seed: int = 0):
        if dim < MIN_DIM:
            raise InvalidArgument(f"embedding dim must be >= {MIN_DIM}")
        self.df = df_table
        self.dim = dim
        self.seed = seed
        self.tag = f"hash-tfidf/dim={dim}/seed={seed}/df={df_table.content_hash()}"

    def _bucket(self, token: str) -> tuple[int, float]:
        digest = hashlib.blake2b(
            token.encode("utf-8"), digest_size=8, key=str(self.seed).encode("utf-8")
        ).digest()
        h = int.from_bytes(digest, "big")
        sign = 1.0 if h & (1 << 63) else -1.0
        return h % self.dim, sign

    def embed(self, text: str) -> EmbeddingVector:
        values = np.zeros(self.dim, dtype=np.float64)
        tokens = tokenize(text)
        if not text.strip() or not tokens:
            return EmbeddingVector(values, self.tag, is_zero=True)
        tf: dict[str, int] = {}
        for token in tokens:
            tf[token] = tf.get(token, 0) + 1
        for token in sorted(tf):
            bucket, sign = self._bucket(token)
            values[bucket] += sign * tf[token] * self.df.idf(token)
        norm = float(np.linalg.norm(values))
        if norm == 0.0:
            # All weights cancelled inside shared buckets; treat as no signal.
            return EmbeddingVector(values, self.tag, is_zero=True)
        return EmbeddingVector(values / norm, self.tag)

    def embed_many(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        return [self.embed(t) for t in texts]


class RemoteProvider:
    """HTTP client for a remote embedding service."""

    def __init__(
        self,
        endpoint: str,
        dim: int,
        timeout_s: float = 10.0,
        batch_size: int = 64,
        max_in_flight: int = 4,
    ):
        if dim < MIN_DIM:
            raise InvalidArgument(f"embedding dim must be >= {MIN_DIM}")
        self.endpoint = endpoint.rstrip("/")
        self.dim = dim
        self.timeout_s = timeout_s
        self.batch_size = max(1, batch_size)
        self.max_in_flight = max(1, max_in_flight)
        cfg_hash = hashlib.sha256(f"{self.endpoint}|{dim}".encode("utf-8")).hexdigest()[:12]
        self.tag = f"remote/{cfg_hash}/dim={dim}"

    def _post(self, texts: list[str]) -> list[list[float]]:
        payload = json.dumps({"texts": texts}).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint + "/embed",
            data=payload,
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout_s) as response:
                body = response.read()
                status = response.status
        except urllib.error.HTTPError as exc:
            raise ProviderError(
                f"embedding service returned HTTP {exc.code}",
                endpoint=self.endpoint,
                status=exc.code,
            ) from exc
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise ProviderError(
                f"embedding service unreachable: {exc}", endpoint=self.endpoint
            ) from exc
        if status != 200:
            raise ProviderError(
                f"embedding service returned HTTP {status}",
                endpoint=self.endpoint,
                status=status,
            )
        try:
            obj = json.loads(body)
            dim = int(obj["dim"])
            vectors = obj["vectors"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed embedding response: {exc}") from exc
        if dim != self.dim:
            raise ProtocolError(
                f"embedding service reports dim={dim}, expected {self.dim}"
            )
        if len(vectors) != len(texts):
            raise ProtocolError(
                f"embedding service returned {len(vectors)} vectors for "
                f"{len(texts)} texts"
            )
        return vectors

    def _to_vector(self, raw: list[float]) -> EmbeddingVector:
        values = np.asarray(raw, dtype=np.float64)
        if values.shape != (self.dim,):
            raise ProtocolError(f"vector of length {values.shape}, expected {self.dim}")
        norm = float(np.linalg.norm(values))
        if norm == 0.0:
            return EmbeddingVector(values, self.tag, is_zero=True)
        return EmbeddingVector(values / norm, self.tag)

    def embed(self, text: str) -> EmbeddingVector:
        if not text.strip():
            return EmbeddingVector(np.zeros(self.dim), self.tag, is_zero=True)
        return self._to_vector(self._post([text])[0])

    def embed_many(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        """Embed in batches; batches run concurrently up to the in-flight cap.

        Results are keyed by input position, so completion order is
        irrelevant.
        """
        results: list[EmbeddingVector | None] = [None] * len(texts)
        jobs: list[tuple[list[int], list[str]]] = []
        pending_idx: list[int] = []
        pending_txt: list[str] = []
        for i, text in enumerate(texts):
            if not text.strip():
                results[i] = EmbeddingVector(np.zeros(self.dim), self.tag, is_zero=True)
                continue
            pending_idx.append(i)
            pending_txt.append(text)
            if len(pending_txt) == self.batch_size:
                jobs.append((pending_idx, pending_txt))
                pending_idx, pending_txt = [], []
        if pending_txt:
            jobs.append((pending_idx, pending_txt))

        def run(job: tuple[list[int], list[str]]):
            indices, batch = job
            return indices, self._post(batch)

        if jobs:
            with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
                for indices, vectors in pool.map(run, jobs):
                    for i, raw in zip(indices, vectors):
                        results[i] = self._to_vector(raw)
        missing = [i for i, r in enumerate(results) if r is None]
        if missing:
            raise ProtocolError(f"no vector returned for inputs {missing[:5]}")
        return results  # type: ignore[return-value]


def make_provider(cfg: ProviderConfig, df_table: DocumentFrequencyTable | None = None):
    """Instantiate the provider selected by ``cfg``."""
    if cfg.kind == "hash-tfidf":
        if df_table is None:
            raise InvalidArgument("hash-tfidf provider requires a document-frequency table")
        return HashTfidfProvider(df_table, dim=cfg.dim, seed=cfg.seed)
    return RemoteProvider(
        cfg.endpoint,
        dim=cfg.dim,
        timeout_s=cfg.timeout_s,
        batch_size=cfg.batch_size,
        max_in_flight=cfg.max_in_flight,
    )
