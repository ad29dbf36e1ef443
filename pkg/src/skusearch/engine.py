"""Query orchestration: part-number branch, trie suggestions, hybrid pipeline.

A search first tries the part-number branch (pattern match + serial lookup).
When that cannot answer, the user-activated pipeline runs: spell-correct the
query, fan out to lexical and semantic retrieval concurrently, union the
candidate sets, then re-rank by normalized LCS against the original query.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .abbrev import AbbrevDictionary, load_bundled_dict
from .catalog import Catalog, CatalogError, compute_stats, load_catalog, normalize_text, save_catalog
from .lexical import TfidfIndex, build_tfidf_index, load_tfidf_index, save_tfidf_index, top_k_lexical
from .partnum import PartNumberPattern, SerialIndex, build_serial_index, lookup_related, matches_pattern
from .ranker import Candidate, lcs_length, rerank, union_candidates
from .semantic import (
    BuiltinEmbedder,
    EmbeddingError,
    EmbeddingIndex,
    RemoteEmbeddingClient,
    build_embedding_index,
    top_k_semantic,
)
from .spell import SpellDictionary, build_spell_dict, correct_query
from .trie import Trie, build_trie

STATE_FORMAT_VERSION = 1


class EngineBuildError(RuntimeError):
    """A sub-index failed to build; the message names the component."""


@dataclass(frozen=True)
class EngineConfig:
    k1: int = 50
    k2: int = 50
    top_n: int = 10
    suggest_limit: int = 10
    tfidf_granularity: str = "char"
    tfidf_ngram_range: tuple[int, int] = (1, 3)
    tfidf_max_features: int = 5000
    semantic_enabled: bool = True
    spell_enabled: bool = True
    rerank_enabled: bool = True
    latency_budget_ms: int = 300
    part_serial_len: int = 3
    part_product_len: int = 5
    embedding_provider: str = "builtin"
    embedding_endpoint: str = ""
    embedding_model: str = ""
    embedding_dimension: int = 384
    embedding_timeout_ms: int = 2000
    embedding_max_retries: int = 2
    embedding_batch_size: int = 64
    embedding_auth_env: str = ""

    def __post_init__(self):
        for name in ("k1", "k2", "top_n", "suggest_limit"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.tfidf_max_features < 100:
            raise ValueError("tfidf_max_features must be >= 100")
        if self.tfidf_granularity not in ("char", "word"):
            raise ValueError(f"unknown tfidf_granularity {self.tfidf_granularity!r}")
        if self.embedding_provider not in ("builtin", "remote"):
            raise ValueError(f"unknown embedding_provider {self.embedding_provider!r}")
        if self.embedding_provider == "remote" and self.semantic_enabled and not self.embedding_endpoint:
            raise ValueError("remote embedding provider requires an endpoint")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tfidf_ngram_range"] = list(self.tfidf_ngram_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EngineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "tfidf_ngram_range" in d:
            d = dict(d)
            d["tfidf_ngram_range"] = tuple(d["tfidf_ngram_range"])
        return cls(**d)

    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @property
    def part_pattern(self) -> PartNumberPattern:
        return PartNumberPattern(
            serial_len=self.part_serial_len, product_len=self.part_product_len
        )


def load_config(path: str | Path) -> EngineConfig:
    return EngineConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def make_provider(config: EngineConfig, transport=None):
    if config.embedding_provider == "builtin":
        return BuiltinEmbedder(dimension=config.embedding_dimension)
    return RemoteEmbeddingClient(
        endpoint=config.embedding_endpoint,
        model=config.embedding_model,
        dimension=config.embedding_dimension,
        timeout_ms=config.embedding_timeout_ms,
        max_retries=config.embedding_max_retries,
        batch_size=config.embedding_batch_size,
        auth_env=config.embedding_auth_env or None,
        transport=transport,
    )


@dataclass
class EngineState:
    """Everything a query needs; immutable once built, shared across threads."""

    catalog: Catalog
    config: EngineConfig
    abbrev: AbbrevDictionary
    serial_index: SerialIndex
    trie: Trie
    spell: SpellDictionary
    tfidf: TfidfIndex
    embeddings: EmbeddingIndex | None
    provider: object
    fingerprint: str
    executor: ThreadPoolExecutor = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.executor is None:
            self.executor = ThreadPoolExecutor(max_workers=2, thread_name_prefix="branch")


@dataclass(frozen=True)
class SearchHit:
    sku_id: int
    part_number: str
    item_name: str
    friendly_name: str | None
    description: str | None
    scores: dict[str, float]
    matched_field: str | None = None

    def to_dict(self) -> dict:
        return {
            "sku_id": self.sku_id,
            "part_number": self.part_number,
            "item_name": self.item_name,
            "friendly_name": self.friendly_name,
            "description": self.description,
            "scores": self.scores,
            "nlcs_score": self.scores.get("nlcs"),
            "matched_field": self.matched_field,
        }


@dataclass(frozen=True)
class SearchResponse:
    query: str
    branch: str  # "part_number" | "hybrid"
    results: tuple[SearchHit, ...]
    corrected_query: str | None
    degraded: bool
    elapsed_ms: float

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "branch": self.branch,
            "results": [h.to_dict() for h in self.results],
            "corrected_query": self.corrected_query,
            "degraded": self.degraded,
            "elapsed_ms": self.elapsed_ms,
        }


@dataclass(frozen=True)
class Suggestion:
    key: str
    sku_id: int
    field_kind: str


@dataclass(frozen=True)
class SuggestResponse:
    suggestions: tuple[Suggestion, ...]
    elapsed_ms: float

    def to_dict(self) -> dict:
        return {
            "suggestions": [
                {"key": s.key, "sku_id": s.sku_id, "field_kind": s.field_kind}
                for s in self.suggestions
            ],
            "elapsed_ms": self.elapsed_ms,
        }


def _build_component(name: str, fn):
    try:
        return fn()
    except Exception as exc:
        raise EngineBuildError(f"{name} build failed: {exc}") from exc


def build_indexes(
    catalog: Catalog,
    config: EngineConfig,
    index_dir: str | Path | None = None,
    abbrev: AbbrevDictionary | None = None,
    transport=None,
) -> EngineState:
    """Build every query structure from the catalog; optionally persist them."""
    if abbrev is None:
        abbrev = load_bundled_dict()
    serial_index = _build_component(
        "serial index", lambda: build_serial_index(catalog, config.part_pattern)
    )
    trie = _build_component("trie", lambda: build_trie(catalog))
    spell = _build_component(
        "spell dictionary", lambda: build_spell_dict(compute_stats(catalog), abbrev)
    )
    tfidf = _build_component(
        "tfidf index",
        lambda: build_tfidf_index(
            catalog,
            granularity=config.tfidf_granularity,
            ngram_range=config.tfidf_ngram_range,
            max_features=config.tfidf_max_features,
        ),
    )
    provider = make_provider(config, transport=transport)
    embeddings = None
    if config.semantic_enabled:
        embeddings = _build_component(
            "embedding index", lambda: build_embedding_index(catalog, provider)
        )
    state = EngineState(
        catalog=catalog,
        config=config,
        abbrev=abbrev,
        serial_index=serial_index,
        trie=trie,
        spell=spell,
        tfidf=tfidf,
        embeddings=embeddings,
        provider=provider,
        fingerprint=config.fingerprint(),
    )
    if index_dir is not None:
        save_state(state, index_dir)
    return state


def save_state(state: EngineState, index_dir: str | Path) -> None:
    """One artifact per structure plus a manifest; no timestamps anywhere."""
    out = Path(index_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_catalog(state.catalog, out / "catalog.jsonl", format="jsonl")
    _dump_json(out / "abbrev.json", state.abbrev.entries)
    _dump_json(
        out / "serial_index.json",
        {"serials": state.serial_index.serials, "skipped": state.serial_index.skipped},
    )
    _dump_json(out / "spell.json", {"word_frequency": state.spell.word_frequency})
    trie_entries = []
    for record in state.catalog:
        for kind in ("part_number", "item_name", "friendly_name"):
            value = getattr(record, kind)
            if value is None:
                continue
            key = normalize_text(value)
            if key:
                trie_entries.append([key, record.sku_id, kind])
    _dump_json(out / "trie.json", {"entries": trie_entries})
    save_tfidf_index(state.tfidf, out / "lexical")
    if state.embeddings is not None:
        sem = out / "semantic"
        sem.mkdir(parents=True, exist_ok=True)
        _dump_json(
            sem / "meta.json",
            {
                "provider_name": state.embeddings.provider_name,
                "dimension": state.embeddings.dimension,
            },
        )
        np.save(sem / "sku_ids.npy", state.embeddings.sku_ids)
        np.save(sem / "embeddings.npy", state.embeddings.matrix)
    manifest = {
        "format_version": STATE_FORMAT_VERSION,
        "config": state.config.to_dict(),
        "config_fingerprint": state.fingerprint,
        "catalog_checksum": state.catalog.checksum(),
        "counts": {
            "records": len(state.catalog),
            "serials": len(state.serial_index),
            "trie_keys": state.trie.key_count,
            "spell_words": len(state.spell),
        },
    }
    _dump_json(out / "manifest.json", manifest)


def _dump_json(path: Path, obj) -> None:
    path.write_text(
        json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":")),
        encoding="utf-8",
    )


def load_state(index_dir: str | Path, transport=None) -> EngineState:
    src = Path(index_dir)
    manifest_path = src / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"no manifest.json under {src}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    version = manifest.get("format_version")
    if version != STATE_FORMAT_VERSION:
        raise ValueError(f"unsupported index version {version!r}, expected {STATE_FORMAT_VERSION}")
    config = EngineConfig.from_dict(manifest["config"])
    catalog = load_catalog(src / "catalog.jsonl", format="jsonl")
    if catalog.checksum() != manifest["catalog_checksum"]:
        raise CatalogError("catalog.jsonl does not match the manifest checksum")
    abbrev = AbbrevDictionary(entries=json.loads((src / "abbrev.json").read_text(encoding="utf-8")))
    serial_raw = json.loads((src / "serial_index.json").read_text(encoding="utf-8"))
    serial_index = SerialIndex(
        serials={
            serial: [(product, int(sku_id)) for product, sku_id in entries]
            for serial, entries in serial_raw["serials"].items()
        },
        skipped=serial_raw["skipped"],
    )
    spell_raw = json.loads((src / "spell.json").read_text(encoding="utf-8"))
    freq = {str(w): int(c) for w, c in spell_raw["word_frequency"].items()}
    spell = SpellDictionary(
        word_frequency=freq, alphabet=tuple(sorted({ch for w in freq for ch in w}))
    )
    trie_raw = json.loads((src / "trie.json").read_text(encoding="utf-8"))
    trie = Trie()
    for key, sku_id, kind in trie_raw["entries"]:
        trie.insert(key, (int(sku_id), kind))
    tfidf = load_tfidf_index(src / "lexical")
    embeddings = None
    sem = src / "semantic"
    if sem.exists():
        meta = json.loads((sem / "meta.json").read_text(encoding="utf-8"))
        embeddings = EmbeddingIndex(
            provider_name=meta["provider_name"],
            dimension=meta["dimension"],
            sku_ids=np.load(sem / "sku_ids.npy"),
            matrix=np.load(sem / "embeddings.npy"),
        )
    return EngineState(
        catalog=catalog,
        config=config,
        abbrev=abbrev,
        serial_index=serial_index,
        trie=trie,
        spell=spell,
        tfidf=tfidf,
        embeddings=embeddings,
        provider=make_provider(config, transport=transport),
        fingerprint=manifest["config_fingerprint"],
    )


def _hybrid_hits(state: EngineState, query: str, corrected: str) -> tuple[list[SearchHit], bool]:
    degraded = False
    lex_future = state.executor.submit(top_k_lexical, state.tfidf, corrected, state.config.k1)
    sem_hits: list[tuple[int, float]] = []
    if state.config.semantic_enabled and state.embeddings is not None:
        sem_future = state.executor.submit(
            top_k_semantic, state.embeddings, corrected, state.provider, state.config.k2
        )
        try:
            # Nonpositive cosine is no shared evidence; without this cut a
            # fully out-of-vocabulary query would still fabricate k2
            # "nearest" records instead of returning nothing.
            sem_hits = [(i, s) for i, s in sem_future.result() if s > 0.0]
        except EmbeddingError:
            degraded = True
    lex_hits = lex_future.result()
    candidates = union_candidates(lex_hits, sem_hits)
    hits: list[SearchHit] = []
    if state.config.rerank_enabled:
        for ranked in rerank(query, candidates, state.catalog, top_n=state.config.top_n):
            record = state.catalog[ranked.sku_id]
            scores = {"nlcs": ranked.nlcs}
            if ranked.lexical_score is not None:
                scores["lexical"] = ranked.lexical_score
            if ranked.semantic_score is not None:
                scores["semantic"] = ranked.semantic_score
            hits.append(
                SearchHit(
                    sku_id=record.sku_id,
                    part_number=record.part_number,
                    item_name=record.item_name,
                    friendly_name=record.friendly_name,
                    description=record.description,
                    scores=scores,
                    matched_field=ranked.matched_field,
                )
            )
    else:
        def cosine_key(c: Candidate):
            return (-max(c.lexical_score or 0.0, c.semantic_score or 0.0), c.sku_id)

        for cand in sorted(candidates, key=cosine_key)[: state.config.top_n]:
            record = state.catalog[cand.sku_id]
            scores = {}
            if cand.lexical_score is not None:
                scores["lexical"] = cand.lexical_score
            if cand.semantic_score is not None:
                scores["semantic"] = cand.semantic_score
            hits.append(
                SearchHit(
                    sku_id=record.sku_id,
                    part_number=record.part_number,
                    item_name=record.item_name,
                    friendly_name=record.friendly_name,
                    description=record.description,
                    scores=scores,
                )
            )
    return hits, degraded


def search(state: EngineState, query: str) -> SearchResponse:
    started = time.perf_counter()
    normalized = normalize_text(query)
    if not normalized:
        raise ValueError("query is empty after normalization")
    pattern = state.config.part_pattern
    if matches_pattern(normalized, pattern) is not None:
        related = lookup_related(
            normalized, state.serial_index, state.catalog, n=state.config.top_n, pattern=pattern
        )
        if related is not None:
            hits = []
            for sku_id in related:
                record = state.catalog[sku_id]
                score = float(lcs_length(normalized, normalize_text(record.part_number)))
                hits.append(
                    SearchHit(
                        sku_id=record.sku_id,
                        part_number=record.part_number,
                        item_name=record.item_name,
                        friendly_name=record.friendly_name,
                        description=record.description,
                        scores={"lcs": score},
                        matched_field="part_number",
                    )
                )
            return SearchResponse(
                query=query,
                branch="part_number",
                results=tuple(hits),
                corrected_query=None,
                degraded=False,
                elapsed_ms=(time.perf_counter() - started) * 1000.0,
            )
    corrected = correct_query(query, state.spell) if state.config.spell_enabled else normalized
    hits, degraded = _hybrid_hits(state, query, corrected)
    return SearchResponse(
        query=query,
        branch="hybrid",
        results=tuple(hits),
        corrected_query=corrected if corrected != normalized else None,
        degraded=degraded,
        elapsed_ms=(time.perf_counter() - started) * 1000.0,
    )


def suggest(state: EngineState, query: str, limit: int | None = None) -> SuggestResponse:
    started = time.perf_counter()
    cap = state.config.suggest_limit if limit is None else limit
    raw = state.trie.suggest(normalize_text(query), limit=cap)
    return SuggestResponse(
        suggestions=tuple(Suggestion(key=k, sku_id=s, field_kind=f) for k, s, f in raw),
        elapsed_ms=(time.perf_counter() - started) * 1000.0,
    )


def with_config(state: EngineState, config: EngineConfig) -> EngineState:
    """Cheap state variant for ablations that only flip toggles (k, spell, rerank)."""
    if (
        config.tfidf_granularity != state.config.tfidf_granularity
        or config.tfidf_ngram_range != state.config.tfidf_ngram_range
        or config.tfidf_max_features != state.config.tfidf_max_features
    ):
        raise ValueError("tfidf settings differ; rebuild instead of reusing the state")
    return replace(state, config=config, fingerprint=config.fingerprint(), executor=state.executor)
