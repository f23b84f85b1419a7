"""Asset and material manifests plus lexical retrieval.

Manifests are JSONL, one record per line. Retrieval is TF-IDF cosine over
lowercased alphanumeric tokens of description+tags; fully deterministic,
with score ties broken by ascending record id.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ManifestError
from .geometry.mesh import TriangleMesh, load_obj

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass
class AssetRecord:
    id: str
    description: str
    tags: list = field(default_factory=list)
    mesh_path: str = ""
    half_extents: tuple = (0.5, 0.5, 0.5)
    receptacle_hint: bool | None = None

    def __post_init__(self):
        if any(h <= 0 for h in self.half_extents):
            raise ManifestError(f"half_extents must be positive for asset '{self.id}'")


@dataclass
class MaterialRecord:
    id: str
    description: str
    tags: list = field(default_factory=list)

    def __post_init__(self):
        if not self.description:
            raise ManifestError(f"description must be non-empty for material '{self.id}'")


@dataclass
class RetrievalResult:
    query: str
    ranked: list  # [(id, score)] descending score, ascending id on ties

    @property
    def best(self):
        return self.ranked[0] if self.ranked else None


class _TfidfIndex:
    """Inverted TF-IDF index with smoothed idf: ln((1+N)/(1+df)) + 1."""

    def __init__(self, docs: dict[str, list[str]]):
        self.n_docs = len(docs)
        df = Counter()
        for tokens in docs.values():
            df.update(set(tokens))
        self.idf = {t: math.log((1 + self.n_docs) / (1 + d)) + 1.0 for t, d in df.items()}
        self.postings: dict[str, list] = {}
        self.norms: dict[str, float] = {}
        for doc_id, tokens in docs.items():
            tf = Counter(tokens)
            weights = {t: c * self.idf[t] for t, c in tf.items()}
            norm = math.sqrt(sum(w * w for w in weights.values()))
            self.norms[doc_id] = norm
            for t, w in weights.items():
                self.postings.setdefault(t, []).append((doc_id, w))

    def query(self, text: str, top_k: int) -> list:
        tf = Counter(t for t in tokenize(text) if t in self.idf)
        if not tf:
            return []
        qw = {t: c * self.idf[t] for t, c in tf.items()}
        qnorm = math.sqrt(sum(w * w for w in qw.values()))
        scores: dict[str, float] = {}
        for t, w in qw.items():
            for doc_id, dw in self.postings.get(t, []):
                scores[doc_id] = scores.get(doc_id, 0.0) + w * dw
        ranked = [
            (doc_id, s / (qnorm * self.norms[doc_id]))
            for doc_id, s in scores.items()
            if s > 0.0
        ]
        ranked.sort(key=lambda kv: (-kv[1], kv[0]))
        return ranked[:top_k]


def _read_jsonl(path: Path):
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            yield lineno, json.loads(line)
        except json.JSONDecodeError as e:
            raise ManifestError(f"{path.name}:{lineno}: invalid JSON: {e}") from None


class AssetIndex:
    """Loaded asset manifest with retrieval and cached mesh loading."""

    def __init__(self, records: dict[str, AssetRecord], base_dir: Path):
        self.records = records
        self.base_dir = base_dir
        self._index = _TfidfIndex(
            {rid: tokenize(" ".join([r.description, *r.tags])) for rid, r in records.items()}
        )
        self._mesh_cache: dict[str, TriangleMesh] = {}

    def __len__(self):
        return len(self.records)

    def __contains__(self, asset_id):
        return asset_id in self.records

    def retrieve(self, query: str, top_k: int = 5) -> RetrievalResult:
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        return RetrievalResult(query=query, ranked=self._index.query(query, top_k))

    def mesh_for(self, asset_id: str) -> TriangleMesh:
        if asset_id not in self.records:
            raise ManifestError(f"unknown asset id '{asset_id}'")
        if asset_id not in self._mesh_cache:
            rec = self.records[asset_id]
            self._mesh_cache[asset_id] = load_obj(self.base_dir / rec.mesh_path)
        return self._mesh_cache[asset_id]


class MaterialIndex:
    def __init__(self, records: dict[str, MaterialRecord]):
        self.records = records
        self._index = _TfidfIndex(
            {rid: tokenize(" ".join([r.description, *r.tags])) for rid, r in records.items()}
        )

    def __len__(self):
        return len(self.records)

    def __contains__(self, material_id):
        return material_id in self.records

    def retrieve(self, query: str, top_k: int = 5) -> RetrievalResult:
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        return RetrievalResult(query=query, ranked=self._index.query(query, top_k))


def load_asset_manifest(path) -> AssetIndex:
    path = Path(path)
    records: dict[str, AssetRecord] = {}
    first_line: dict[str, int] = {}
    for lineno, obj in _read_jsonl(path):
        try:
            rec = AssetRecord(
                id=str(obj["id"]),
                description=str(obj["description"]),
                tags=[str(t) for t in obj.get("tags", [])],
                mesh_path=str(obj["mesh_path"]),
                half_extents=tuple(float(v) for v in obj["half_extents"]),
                receptacle_hint=obj.get("receptacle_hint"),
            )
        except KeyError as e:
            raise ManifestError(f"{path.name}:{lineno}: missing field {e}") from None
        if rec.id in records:
            raise ManifestError(
                f"{path.name}: duplicate id '{rec.id}' "
                f"(lines {first_line[rec.id]} and {lineno})"
            )
        mesh_file = path.parent / rec.mesh_path
        if not mesh_file.is_file():
            raise ManifestError(f"{path.name}:{lineno}: mesh file not found: {rec.mesh_path}")
        records[rec.id] = rec
        first_line[rec.id] = lineno
    return AssetIndex(records, path.parent)


def load_material_manifest(path) -> MaterialIndex:
    path = Path(path)
    records: dict[str, MaterialRecord] = {}
    first_line: dict[str, int] = {}
    for lineno, obj in _read_jsonl(path):
        try:
            rec = MaterialRecord(
                id=str(obj["id"]),
                description=str(obj["description"]),
                tags=[str(t) for t in obj.get("tags", [])],
            )
        except KeyError as e:
            raise ManifestError(f"{path.name}:{lineno}: missing field {e}") from None
        if rec.id in records:
            raise ManifestError(
                f"{path.name}: duplicate id '{rec.id}' "
                f"(lines {first_line[rec.id]} and {lineno})"
            )
        records[rec.id] = rec
        first_line[rec.id] = lineno
    return MaterialIndex(records)
