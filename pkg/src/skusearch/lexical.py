"""Character/word n-gram TF-IDF retrieval over catalog documents.

Vectors live in a fixed vocabulary fitted on the catalog: the max_features
most document-frequent n-grams (ties favor the lexicographically smaller
term), columns assigned in sorted-term order. Scoring walks per-term posting
lists with numpy, so a query touches only the documents sharing at least one
n-gram with it.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import Catalog, normalize_text, sku_document

FORMAT_VERSION = 1


def extract_terms(text: str, granularity: str, ngram_range: tuple[int, int]) -> list[str]:
    """N-grams of a normalized text; char grams include interior spaces."""
    lo, hi = ngram_range
    if lo < 1 or hi < lo:
        raise ValueError(f"bad ngram_range {ngram_range!r}")
    norm = normalize_text(text)
    if granularity == "char":
        units: list[str] = list(norm)
        join = ""
    elif granularity == "word":
        units = [t for t in norm.split(" ") if t]
        join = " "
    else:
        raise ValueError(f"unknown granularity {granularity!r}")
    terms = []
    for n in range(lo, hi + 1):
        for i in range(len(units) - n + 1):
            terms.append(join.join(units[i : i + n]))
    return terms


@dataclass(frozen=True)
class TfidfVocabulary:
    granularity: str
    ngram_range: tuple[int, int]
    max_features: int
    term_index: dict[str, int]
    idf: np.ndarray

    def __len__(self) -> int:
        return len(self.term_index)


def fit_vocabulary(
    corpus: list[str],
    granularity: str = "char",
    ngram_range: tuple[int, int] = (1, 3),
    max_features: int = 5000,
) -> TfidfVocabulary:
    if not corpus:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    df: Counter[str] = Counter()
    for text in corpus:
        df.update(set(extract_terms(text, granularity, ngram_range)))
    if not df:
        raise ValueError("corpus produced no n-gram terms")
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))[:max_features]
    terms = sorted(term for term, _ in ranked)
    term_index = {term: i for i, term in enumerate(terms)}
    n_docs = len(corpus)
    idf = np.array(
        [np.log((1.0 + n_docs) / (1.0 + df[t])) + 1.0 for t in terms], dtype=np.float64
    )
    return TfidfVocabulary(
        granularity=granularity,
        ngram_range=ngram_range,
        max_features=max_features,
        term_index=term_index,
        idf=idf,
    )


@dataclass(frozen=True)
class SparseVector:
    """Column-sorted, L2-normalized; empty arrays for texts with no known terms."""

    columns: np.ndarray
    weights: np.ndarray

    @property
    def is_zero(self) -> bool:
        return self.columns.size == 0


def vectorize(vocab: TfidfVocabulary, text: str) -> SparseVector:
    counts = Counter(extract_terms(text, vocab.granularity, vocab.ngram_range))
    cols = []
    raw = []
    for term, count in counts.items():
        idx = vocab.term_index.get(term)
        if idx is not None:
            cols.append(idx)
            raw.append(count)
    if not cols:
        return SparseVector(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))
    order = np.argsort(np.array(cols, dtype=np.int64))
    columns = np.array(cols, dtype=np.int64)[order]
    weights = np.array(raw, dtype=np.float64)[order] * vocab.idf[columns]
    norm = float(np.sqrt(np.dot(weights, weights)))
    if norm == 0.0:
        return SparseVector(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))
    return SparseVector(columns, weights / norm)


@dataclass(frozen=True)
class TfidfIndex:
    vocab: TfidfVocabulary
    sku_ids: np.ndarray
    # document-major rows
    data: np.ndarray
    indices: np.ndarray
    indptr: np.ndarray
    # term-major postings, rebuilt from the rows
    post_data: np.ndarray
    post_docs: np.ndarray
    post_indptr: np.ndarray

    def __len__(self) -> int:
        return int(self.sku_ids.size)


def _build_postings(
    n_terms: int, data: np.ndarray, indices: np.ndarray, indptr: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    counts = np.bincount(indices, minlength=n_terms) if indices.size else np.zeros(n_terms)
    post_indptr = np.zeros(n_terms + 1, dtype=np.int64)
    np.cumsum(counts, out=post_indptr[1:])
    doc_of = np.repeat(np.arange(indptr.size - 1, dtype=np.int64), np.diff(indptr))
    order = np.argsort(indices, kind="stable")
    return data[order], doc_of[order], post_indptr


def build_tfidf_index(
    catalog: Catalog,
    granularity: str = "char",
    ngram_range: tuple[int, int] = (1, 3),
    max_features: int = 5000,
) -> TfidfIndex:
    docs = [sku_document(r) for r in catalog]
    vocab = fit_vocabulary(docs, granularity, ngram_range, max_features)
    return _index_from_vocab(catalog, docs, vocab)


def _index_from_vocab(catalog: Catalog, docs: list[str], vocab: TfidfVocabulary) -> TfidfIndex:
    sku_ids = np.array([r.sku_id for r in catalog], dtype=np.int64)
    indptr = np.zeros(len(docs) + 1, dtype=np.int64)
    all_cols: list[np.ndarray] = []
    all_weights: list[np.ndarray] = []
    for i, doc in enumerate(docs):
        vec = vectorize(vocab, doc)
        all_cols.append(vec.columns)
        all_weights.append(vec.weights)
        indptr[i + 1] = indptr[i] + vec.columns.size
    indices = np.concatenate(all_cols) if all_cols else np.empty(0, dtype=np.int64)
    data = np.concatenate(all_weights) if all_weights else np.empty(0, dtype=np.float64)
    post_data, post_docs, post_indptr = _build_postings(len(vocab), data, indices, indptr)
    return TfidfIndex(
        vocab=vocab,
        sku_ids=sku_ids,
        data=data,
        indices=indices,
        indptr=indptr,
        post_data=post_data,
        post_docs=post_docs,
        post_indptr=post_indptr,
    )


def top_k_lexical(index: TfidfIndex, query: str, k: int = 50) -> list[tuple[int, float]]:
    """Best k documents by cosine; zero-score documents never appear.

    Ties break toward the smaller sku_id, matching an exhaustive scan that
    sorts by (-score, sku_id).
    """
    if k < 1:
        raise ValueError("k must be positive")
    qvec = vectorize(index.vocab, query)
    if qvec.is_zero:
        return []
    scores = np.zeros(index.sku_ids.size, dtype=np.float64)
    for col, qw in zip(qvec.columns, qvec.weights):
        start, end = index.post_indptr[col], index.post_indptr[col + 1]
        scores[index.post_docs[start:end]] += qw * index.post_data[start:end]
    hit = np.flatnonzero(scores > 0.0)
    if hit.size == 0:
        return []
    order = np.lexsort((index.sku_ids[hit], -scores[hit]))[: min(k, hit.size)]
    chosen = hit[order]
    return [(int(index.sku_ids[i]), float(scores[i])) for i in chosen]


def save_tfidf_index(index: TfidfIndex, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    terms = [None] * len(index.vocab.term_index)
    for term, i in index.vocab.term_index.items():
        terms[i] = term
    meta = {
        "format_version": FORMAT_VERSION,
        "granularity": index.vocab.granularity,
        "ngram_range": list(index.vocab.ngram_range),
        "max_features": index.vocab.max_features,
        "terms": terms,
    }
    (out / "vocab.json").write_text(
        json.dumps(meta, sort_keys=True, ensure_ascii=False), encoding="utf-8"
    )
    np.save(out / "idf.npy", index.vocab.idf)
    np.save(out / "sku_ids.npy", index.sku_ids)
    np.save(out / "data.npy", index.data)
    np.save(out / "indices.npy", index.indices)
    np.save(out / "indptr.npy", index.indptr)


def load_tfidf_index(in_dir: str | Path) -> TfidfIndex:
    src = Path(in_dir)
    meta = json.loads((src / "vocab.json").read_text(encoding="utf-8"))
    version = meta.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported tfidf index version {version!r}, expected {FORMAT_VERSION}")
    idf = np.load(src / "idf.npy")
    vocab = TfidfVocabulary(
        granularity=meta["granularity"],
        ngram_range=tuple(meta["ngram_range"]),
        max_features=meta["max_features"],
        term_index={term: i for i, term in enumerate(meta["terms"])},
        idf=idf,
    )
    data = np.load(src / "data.npy")
    indices = np.load(src / "indices.npy")
    indptr = np.load(src / "indptr.npy")
    sku_ids = np.load(src / "sku_ids.npy")
    post_data, post_docs, post_indptr = _build_postings(len(vocab), data, indices, indptr)
    return TfidfIndex(
        vocab=vocab,
        sku_ids=sku_ids,
        data=data,
        indices=indices,
        indptr=indptr,
        post_data=post_data,
        post_docs=post_docs,
        post_indptr=post_indptr,
    )
