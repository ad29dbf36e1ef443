"""Offline evaluation: labeled queries, success@10 / MRR, ablation grids.

Also hosts the synthetic benchmark generator. Real seller queries are not
shippable, so the generator derives a catalog from the same splitting grammar
the expander understands, then corrupts it the ways sellers do: abbreviation
prefixes, typos in friendly words, dropped words, raw part numbers.
"""

from __future__ import annotations

import csv
import json
import random
import re
from dataclasses import dataclass, replace
from pathlib import Path

from . import engine as eng
from .abbrev import AbbrevDictionary, derive_friendly_name, load_bundled_dict, split_item_name
from .catalog import Catalog, SkuRecord, compute_stats, save_catalog
from .engine import EngineConfig, EngineState
from .spell import SpellDictionary, build_spell_dict, correct_token

_CAMEL_KEY = re.compile(r"[A-Z][a-z]+")


@dataclass(frozen=True)
class LabeledQuery:
    query: str
    gold_sku_id: int
    operator: str | None = None


def load_labeled_queries(path: str | Path) -> list[LabeledQuery]:
    """CSV with header query,gold_sku_id[,operator]."""
    out: list[LabeledQuery] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "query" not in reader.fieldnames:
            raise ValueError(f"{path}: expected a header with query,gold_sku_id")
        for row_num, row in enumerate(reader, start=2):
            try:
                gold = int(row["gold_sku_id"])
            except (KeyError, TypeError, ValueError):
                raise ValueError(f"{path}: row {row_num}: bad gold_sku_id") from None
            out.append(
                LabeledQuery(
                    query=row["query"], gold_sku_id=gold, operator=row.get("operator") or None
                )
            )
    return out


def save_labeled_queries(queries: list[LabeledQuery], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query", "gold_sku_id", "operator"])
        for q in queries:
            writer.writerow([q.query, q.gold_sku_id, q.operator or ""])


def _percentile(values: list[float], p: float) -> float:
    """Nearest-rank percentile; 0.0 for an empty list."""
    if not values:
        return 0.0
    ordered = sorted(values)
    rank = max(1, -(-len(ordered) * p // 100))  # ceil without math import
    return ordered[int(rank) - 1]


@dataclass(frozen=True)
class EvalReport:
    label: str
    query_count: int
    success_at_10: float
    mrr: float
    latency_ms_mean: float
    latency_ms_p50: float
    latency_ms_p95: float
    per_query: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "query_count": self.query_count,
            "success_at_10": self.success_at_10,
            "mrr": self.mrr,
            "latency_ms_mean": self.latency_ms_mean,
            "latency_ms_p50": self.latency_ms_p50,
            "latency_ms_p95": self.latency_ms_p95,
            "per_query": list(self.per_query),
        }

    def deterministic_dict(self) -> dict:
        """Everything except wall-clock readings; identical runs serialize identically."""
        return {
            "label": self.label,
            "query_count": self.query_count,
            "success_at_10": self.success_at_10,
            "mrr": self.mrr,
            "per_query": list(self.per_query),
        }

    def deterministic_json(self) -> str:
        return json.dumps(self.deterministic_dict(), sort_keys=True, separators=(",", ":"))


def run_eval(
    state: EngineState, queries: list[LabeledQuery], label: str = "eval", use_suggest: bool = False
) -> EvalReport:
    """Rank the gold SKU per query; success@10 and mean reciprocal rank.

    With use_suggest=True the trie suggestions stand in for search results:
    sku_ids deduplicated in suggestion order, first ten kept.
    """
    ranks: list[int] = []
    latencies: list[float] = []
    per_query: list[dict] = []
    for lq in queries:
        if state.catalog.get(lq.gold_sku_id) is None:
            raise ValueError(f"gold sku_id {lq.gold_sku_id} not in catalog (query {lq.query!r})")
        if use_suggest:
            response = eng.suggest(state, lq.query, limit=50)
            seen: list[int] = []
            for s in response.suggestions:
                if s.sku_id not in seen:
                    seen.append(s.sku_id)
            ids = seen[:10]
        else:
            response = eng.search(state, lq.query)
            ids = [hit.sku_id for hit in response.results]
        rank = ids.index(lq.gold_sku_id) + 1 if lq.gold_sku_id in ids else 0
        ranks.append(rank)
        latencies.append(response.elapsed_ms)
        per_query.append(
            {
                "query": lq.query,
                "gold_sku_id": lq.gold_sku_id,
                "operator": lq.operator,
                "rank": rank,
                "result_ids": ids,
            }
        )
    n = len(queries)
    hits = sum(1 for r in ranks if 1 <= r <= 10)
    mrr = sum(1.0 / r for r in ranks if r > 0) / n if n else 0.0
    return EvalReport(
        label=label,
        query_count=n,
        success_at_10=hits / n if n else 0.0,
        mrr=mrr,
        latency_ms_mean=sum(latencies) / n if n else 0.0,
        latency_ms_p50=_percentile(latencies, 50),
        latency_ms_p95=_percentile(latencies, 95),
        per_query=tuple(per_query),
    )


@dataclass(frozen=True)
class GridEntry:
    label: str
    config: EngineConfig
    use_suggest: bool = False


def default_ablation_grid(base: EngineConfig) -> list[GridEntry]:
    """The pipeline build-up: suggestions only, then each hybrid stage."""
    lexical_only = replace(base, semantic_enabled=False, spell_enabled=False, rerank_enabled=False)
    return [
        GridEntry("trie-suggest", lexical_only, use_suggest=True),
        GridEntry("tfidf", lexical_only),
        GridEntry("tfidf+spell", replace(lexical_only, spell_enabled=True)),
        GridEntry("tfidf+spell+lcs", replace(lexical_only, spell_enabled=True, rerank_enabled=True)),
        GridEntry("hybrid-full", replace(base, semantic_enabled=True, spell_enabled=True, rerank_enabled=True)),
    ]


def granularity_grid(base: EngineConfig) -> list[GridEntry]:
    """Char vs word n-grams across vocabulary sizes, lexical pipeline only."""
    entries = []
    for granularity in ("word", "char"):
        for max_features in (2000, 5000, 10000):
            cfg = replace(
                base,
                tfidf_granularity=granularity,
                tfidf_max_features=max_features,
                semantic_enabled=False,
                spell_enabled=True,
                rerank_enabled=True,
            )
            entries.append(GridEntry(f"{granularity}-{max_features}", cfg))
    return entries


def run_ablation(
    catalog: Catalog,
    queries: list[LabeledQuery],
    grid: list[GridEntry],
    abbrev: AbbrevDictionary | None = None,
) -> list[EvalReport]:
    """One report per grid row, sharing index builds across rows where possible."""
    if abbrev is None:
        abbrev = load_bundled_dict()
    needs_semantic: dict[tuple, bool] = {}
    for entry in grid:
        key = _tfidf_key(entry.config)
        needs_semantic[key] = needs_semantic.get(key, False) or entry.config.semantic_enabled
    states: dict[tuple, EngineState] = {}
    reports = []
    for entry in grid:
        try:
            key = _tfidf_key(entry.config)
            if key not in states:
                build_cfg = replace(entry.config, semantic_enabled=needs_semantic[key])
                states[key] = eng.build_indexes(catalog, build_cfg, abbrev=abbrev)
            state = eng.with_config(states[key], entry.config)
            report = run_eval(state, queries, label=entry.label, use_suggest=entry.use_suggest)
        except Exception as exc:
            raise RuntimeError(f"ablation row {entry.label!r} failed: {exc}") from exc
        reports.append(report)
    return reports


def _tfidf_key(config: EngineConfig) -> tuple:
    return (config.tfidf_granularity, config.tfidf_ngram_range, config.tfidf_max_features)


def write_report_csv(reports: list[EvalReport], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["label", "queries", "success_at_10", "mrr", "latency_ms_mean", "latency_ms_p50", "latency_ms_p95"]
        )
        for r in reports:
            writer.writerow(
                [
                    r.label,
                    r.query_count,
                    f"{r.success_at_10:.4f}",
                    f"{r.mrr:.4f}",
                    f"{r.latency_ms_mean:.2f}",
                    f"{r.latency_ms_p50:.2f}",
                    f"{r.latency_ms_p95:.2f}",
                ]
            )


def format_report_table(reports: list[EvalReport]) -> str:
    header = f"{'label':<18}{'queries':>8}{'success@10':>12}{'mrr':>8}{'p95 ms':>9}"
    lines = [header, "-" * len(header)]
    for r in reports:
        lines.append(
            f"{r.label:<18}{r.query_count:>8}{r.success_at_10:>12.4f}{r.mrr:>8.4f}{r.latency_ms_p95:>9.2f}"
        )
    return "\n".join(lines)


# --- synthetic benchmark -----------------------------------------------------

_SIZES_SMALL = ["13in", "15in", "12in", "14in", "27in", "24in", "7in", "9in"]
_SIZES_STORAGE = ["128gb", "256gb", "512gb", "64gb", "1tb", "2tb"]
_COMPONENTS = ["i3", "i5", "i7", "i9", "r5", "r7", "m2", "x1", "a14"]
_SLASH_POOL = ["8", "16", "32", "64", "128", "256", "512", "1024"]
_FIXTURE_SERIAL = "LF1"
_FIXTURE_ITEM = "SrfLpt413ini7/16/512"
_FIXTURE_PRODUCT_COUNT = 69
_FIXTURE_TARGET_PRODUCT = 18  # LF1-00018


def _camel_keys(abbrev: AbbrevDictionary) -> list[str]:
    return sorted(k for k in abbrev.entries if _CAMEL_KEY.fullmatch(k))


def _gen_item_name(rng: random.Random, keys: list[str]) -> str:
    # Shape strings after the leading camel token: s=size, c=component,
    # /=slash-separated numbers. "_sc/" is the fixture item's shape.
    shape = rng.choices(
        ["_sc/", "_sc", "_c/", "_c", "_ss", "_s"],
        weights=[25, 15, 10, 15, 15, 20],
    )[0]
    camel = "".join(rng.choice(keys) for _ in range(rng.randint(2, 3)))
    if rng.random() < 0.5:
        camel += str(rng.randint(1, 9))
    parts = [camel]
    for symbol in shape[1:]:
        if symbol == "s":
            pool = _SIZES_SMALL if len(parts) == 1 else _SIZES_STORAGE
            parts.append(rng.choice(pool))
        elif symbol == "c":
            parts.append(rng.choice(_COMPONENTS))
        elif symbol == "/":
            count = rng.randint(2, 3)
            parts.append("/" + "/".join(rng.choice(_SLASH_POOL) for _ in range(count)))
    return "".join(parts)


def _gen_serial(rng: random.Random, taken: set[str]) -> str:
    alphabet = "ABCDEFGHJKLMNPQRSTUVWXYZ0123456789"
    while True:
        serial = "".join(rng.choice(alphabet) for _ in range(3))
        if serial not in taken and serial != _FIXTURE_SERIAL:
            taken.add(serial)
            return serial


def generate_synthetic_catalog(
    seed: int = 7, size: int = 10000, abbrev: AbbrevDictionary | None = None
) -> Catalog:
    """Deterministic catalog whose first rows form one fixed serial line.

    The fixed line carries 69 products when size allows, fewer otherwise;
    catalogs of at least 69 rows always embed the full reference line.
    """
    if size < 10:
        raise ValueError("size must be at least 10")
    if abbrev is None:
        abbrev = load_bundled_dict()
    keys = _camel_keys(abbrev)
    rng = random.Random(seed)
    records: list[SkuRecord] = []
    item_names: set[str] = set()

    def next_item() -> str:
        for _ in range(100):
            name = _gen_item_name(rng, keys)
            if name not in item_names:
                item_names.add(name)
                return name
        raise RuntimeError("item name space exhausted")

    for product in range(1, min(_FIXTURE_PRODUCT_COUNT, size) + 1):
        if product == _FIXTURE_TARGET_PRODUCT:
            item = _FIXTURE_ITEM
            item_names.add(item)
        else:
            item = next_item()
        friendly = derive_friendly_name(item, abbrev)
        records.append(
            SkuRecord(
                sku_id=len(records),
                part_number=f"{_FIXTURE_SERIAL}-{product:05d}",
                item_name=item,
                friendly_name=friendly if (product == _FIXTURE_TARGET_PRODUCT or rng.random() < 0.3) else None,
            )
        )

    serials_taken: set[str] = set()
    serial_pool = [_gen_serial(rng, serials_taken) for _ in range(max(1, size // 14))]
    products_per_serial: dict[str, set[str]] = {}
    while len(records) < size:
        serial = rng.choice(serial_pool)
        used = products_per_serial.setdefault(serial, set())
        product = f"{rng.randrange(100000):05d}"
        if product in used:
            continue
        used.add(product)
        item = next_item()
        friendly = derive_friendly_name(item, abbrev) if rng.random() < 0.3 else None
        records.append(
            SkuRecord(
                sku_id=len(records),
                part_number=f"{serial}-{product}",
                item_name=item,
                friendly_name=friendly,
            )
        )
    return Catalog(records)


def _corrupt_word(rng: random.Random, word: str) -> str:
    letters = "abcdefghijklmnopqrstuvwxyz"
    kind = rng.choice(["delete", "transpose", "replace", "insert"])
    i = rng.randrange(len(word))
    if kind == "delete" and len(word) > 1:
        return word[:i] + word[i + 1 :]
    if kind == "transpose" and len(word) > 1:
        i = min(i, len(word) - 2)
        return word[:i] + word[i + 1] + word[i] + word[i + 2 :]
    if kind == "insert":
        return word[:i] + rng.choice(letters) + word[i:]
    return word[:i] + rng.choice(letters) + word[i + 1 :]


def _recoverable_typo(rng: random.Random, word: str, spell: SpellDictionary) -> str | None:
    """A 1-2 edit corruption that the dictionary corrects back to `word`.

    Models the typos worth benchmarking: a misspelling whose nearest
    dictionary word is something else entirely tests the dictionary, not
    the pipeline.
    """
    for attempt in range(8):
        corrupted = _corrupt_word(rng, word)
        if attempt < 4:
            corrupted = _corrupt_word(rng, corrupted)
        if corrupted != word and correct_token(corrupted, spell) == word:
            return corrupted
    return None


def generate_labeled_queries(
    catalog: Catalog,
    seed: int = 11,
    count: int = 600,
    abbrev: AbbrevDictionary | None = None,
) -> list[LabeledQuery]:
    """Seeded query corpus over a synthetic catalog, tagged by corruption operator."""
    rng = random.Random(seed)
    if abbrev is None:
        abbrev = load_bundled_dict()
    spell = build_spell_dict(compute_stats(catalog), abbrev)
    records = list(catalog)
    with_friendly = [r for r in records if r.friendly_name]
    queries: list[LabeledQuery] = []
    operators = ["abbrev", "typo", "drop", "exact", "partnum"]
    weights = [35, 25, 20, 10, 10]
    while len(queries) < count:
        op = rng.choices(operators, weights=weights)[0]
        if op in ("typo", "drop"):
            if not with_friendly:
                continue
            record = rng.choice(with_friendly)
        else:
            record = rng.choice(records)
        if op == "abbrev":
            split = split_item_name(record.item_name)
            if split is None:
                continue
            fields = list(split.fields)
            if not any(ch.isdigit() for ch in fields[0]):
                # keep every abbrev token digit-bearing so the spell skip
                # rule applies; versionless camels invite false corrections
                continue
            extra = rng.sample(fields[1:], k=min(len(fields) - 1, rng.randint(1, 2)))
            query = " ".join([fields[0]] + [f for f in fields[1:] if f in extra]).lower()
        elif op == "typo":
            words = record.friendly_name.lower().split()
            alpha = [i for i, w in enumerate(words) if w.isalpha() and len(w) >= 4]
            anchors = [
                i for i, w in enumerate(words) if len(w) >= 2 and any(ch.isdigit() for ch in w)
            ]
            if not alpha or not anchors:
                continue
            # Typed in a hurry: a couple of content words mangled by up to
            # two edits each, plus one size or component code sellers copy
            # verbatim. The damage defeats raw character grams; the
            # dictionary search recovers the words and the copied code
            # keeps the right record pinned during re-ranking.
            picked = set(rng.sample(alpha, k=min(rng.randint(2, 3), len(alpha))))
            picked.add(rng.choice(anchors))
            parts = []
            failed = False
            for i in sorted(picked):
                if i in alpha:
                    corrupted = _recoverable_typo(rng, words[i], spell)
                    if corrupted is None:
                        failed = True
                        break
                    parts.append(corrupted)
                else:
                    parts.append(words[i])
            if failed:
                continue
            query = " ".join(parts)
        elif op == "drop":
            words = record.friendly_name.lower().split()
            if len(words) < 3:
                continue
            kept = [words[0]] + [w for w in words[1:] if rng.random() < 0.6]
            if len(kept) < 2:
                kept = words[:2]
            query = " ".join(kept)
        elif op == "exact":
            query = record.item_name.lower()
        else:
            query = record.part_number
        if not query.strip():
            continue
        queries.append(LabeledQuery(query=query, gold_sku_id=record.sku_id, operator=op))
    return queries


def generate_synthetic_benchmark(
    seed: int = 7,
    size: int = 10000,
    query_count: int = 600,
    out_dir: str | Path | None = None,
) -> tuple[Catalog, list[LabeledQuery]]:
    catalog = generate_synthetic_catalog(seed=seed, size=size)
    queries = generate_labeled_queries(catalog, seed=seed + 4, count=query_count)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_catalog(catalog, out / "catalog.csv", format="csv")
        save_labeled_queries(queries, out / "queries.csv")
    return catalog, queries
