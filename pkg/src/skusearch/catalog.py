"""SKU catalog: loading, validation, normalization, corpus statistics.

The catalog is the single source every index is built from. Records are
immutable after load; reindexing builds a fresh Catalog and swaps it at the
engine level.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path

_WS_RUN = re.compile(r"\s+")
_TOKEN = re.compile(r"[a-z0-9]+")

CSV_FIELDS = ("sku_id", "part_number", "item_name", "friendly_name", "description")


class CatalogError(ValueError):
    """Raised for unloadable catalog files (bad rows, duplicate ids)."""


@dataclass(frozen=True)
class SkuRecord:
    """One catalog row: part number, abbreviated item name, optional expansions."""

    sku_id: int
    part_number: str
    item_name: str
    friendly_name: str | None = None
    description: str | None = None


@dataclass(frozen=True)
class CorpusStats:
    token_frequency: dict[str, int]
    document_count: int


def normalize_text(s: str) -> str:
    """Case-fold, trim, and collapse internal whitespace runs. Idempotent."""
    return _WS_RUN.sub(" ", s.strip()).casefold()


def sku_document(record: SkuRecord) -> str:
    """The retrieval document for a record: all text fields, space-joined."""
    parts = [record.part_number, record.item_name]
    if record.friendly_name:
        parts.append(record.friendly_name)
    return normalize_text(" ".join(parts))


class Catalog:
    """Ordered, immutable collection of SkuRecords with unique sku_ids."""

    def __init__(self, records: list[SkuRecord]):
        by_id: dict[int, int] = {}
        for pos, rec in enumerate(records):
            if not rec.part_number.strip():
                raise CatalogError(f"record {pos}: empty part_number")
            if not rec.item_name.strip():
                raise CatalogError(f"record {pos}: empty item_name")
            if rec.sku_id in by_id:
                raise CatalogError(
                    f"duplicate sku_id {rec.sku_id} at rows {by_id[rec.sku_id]} and {pos}"
                )
            by_id[rec.sku_id] = pos
        self.records: tuple[SkuRecord, ...] = tuple(records)
        self.by_id: dict[int, int] = by_id

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def get(self, sku_id: int) -> SkuRecord | None:
        pos = self.by_id.get(sku_id)
        return self.records[pos] if pos is not None else None

    def __getitem__(self, sku_id: int) -> SkuRecord:
        rec = self.get(sku_id)
        if rec is None:
            raise KeyError(f"unknown sku_id {sku_id}")
        return rec

    def with_descriptions(self, descriptions: dict[int, str]) -> "Catalog":
        """Copy of the catalog with description fields filled in."""
        out = []
        for rec in self.records:
            desc = descriptions.get(rec.sku_id)
            out.append(replace(rec, description=desc) if desc is not None else rec)
        return Catalog(out)

    def checksum(self) -> str:
        """sha256 over the canonical JSONL serialization (load-order stable)."""
        buf = io.StringIO()
        _write_jsonl(self, buf)
        return hashlib.sha256(buf.getvalue().encode("utf-8")).hexdigest()


def _parse_sku_id(raw: str | int | None, row_num: int, ordinal: int) -> int:
    if raw is None or (isinstance(raw, str) and not raw.strip()):
        return ordinal
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise CatalogError(f"row {row_num}: sku_id {raw!r} is not an integer") from None


def _record_from_fields(fields: dict, row_num: int, ordinal: int) -> SkuRecord:
    part = str(fields.get("part_number") or "").strip()
    item = str(fields.get("item_name") or "").strip()
    if not part:
        raise CatalogError(f"row {row_num}: missing part_number")
    if not item:
        raise CatalogError(f"row {row_num}: missing item_name")
    friendly = fields.get("friendly_name")
    friendly = str(friendly).strip() if friendly else None
    desc = fields.get("description")
    desc = str(desc).strip() if desc else None
    return SkuRecord(
        sku_id=_parse_sku_id(fields.get("sku_id"), row_num, ordinal),
        part_number=part,
        item_name=item,
        friendly_name=friendly or None,
        description=desc or None,
    )


def load_catalog(path: str | Path, format: str = "csv") -> Catalog:
    """Load a catalog from CSV (RFC-4180, header row) or JSONL.

    sku_id defaults to the 0-based row ordinal when the file omits it.
    Duplicate sku_ids reject the whole load; duplicate part numbers are fine.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"catalog file not found: {path}")
    if format not in ("csv", "jsonl"):
        raise ValueError(f"unknown catalog format {format!r}")

    records: list[SkuRecord] = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        if format == "csv":
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return Catalog([])
            missing = {"part_number", "item_name"} - set(reader.fieldnames)
            if missing:
                raise CatalogError(f"missing required columns: {sorted(missing)}")
            for ordinal, row in enumerate(reader):
                records.append(_record_from_fields(row, ordinal + 2, ordinal))
        else:
            for ordinal, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CatalogError(f"row {ordinal + 1}: invalid JSON ({exc})") from None
                if not isinstance(obj, dict):
                    raise CatalogError(f"row {ordinal + 1}: expected a JSON object")
                records.append(_record_from_fields(obj, ordinal + 1, ordinal))
    return Catalog(records)


def _record_dict(rec: SkuRecord) -> dict:
    out = {"sku_id": rec.sku_id, "part_number": rec.part_number, "item_name": rec.item_name}
    if rec.friendly_name is not None:
        out["friendly_name"] = rec.friendly_name
    if rec.description is not None:
        out["description"] = rec.description
    return out


def _write_jsonl(catalog: Catalog, fh) -> None:
    for rec in catalog:
        fh.write(json.dumps(_record_dict(rec), sort_keys=True, ensure_ascii=False))
        fh.write("\n")


def save_catalog(catalog: Catalog, path: str | Path, format: str = "csv") -> None:
    """Write a catalog back out in either supported format."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if format == "csv":
            writer = csv.DictWriter(fh, fieldnames=list(CSV_FIELDS))
            writer.writeheader()
            for rec in catalog:
                writer.writerow(
                    {
                        "sku_id": rec.sku_id,
                        "part_number": rec.part_number,
                        "item_name": rec.item_name,
                        "friendly_name": rec.friendly_name or "",
                        "description": rec.description or "",
                    }
                )
        elif format == "jsonl":
            _write_jsonl(catalog, fh)
        else:
            raise ValueError(f"unknown catalog format {format!r}")


def tokenize(text: str) -> list[str]:
    """Whitespace/punctuation-delimited alphanumeric tokens of normalized text."""
    return _TOKEN.findall(normalize_text(text))


def compute_stats(catalog: Catalog) -> CorpusStats:
    """Token counts over item names and friendly names; feeds the spell dictionary."""
    counts: Counter[str] = Counter()
    for rec in catalog:
        counts.update(tokenize(rec.item_name))
        if rec.friendly_name:
            counts.update(tokenize(rec.friendly_name))
    return CorpusStats(token_frequency=dict(counts), document_count=len(catalog))
