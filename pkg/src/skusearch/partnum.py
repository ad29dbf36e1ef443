"""Part-number pattern detection and the serial-prefix index.

Part numbers look like XXX-XXXXX: a 3-char serial line, a dash, a 5-char
product id. Queries shaped this way skip the hybrid pipeline entirely and
rank sibling products from the same serial line by LCS against the query.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .catalog import Catalog, normalize_text
from .ranker import QueryLcs


@dataclass(frozen=True)
class PartNumberPattern:
    serial_len: int = 3
    product_len: int = 5
    separator: str = "-"

    def __post_init__(self):
        if self.serial_len < 1 or self.product_len < 1:
            raise ValueError("segment lengths must be positive")

    @property
    def regex(self) -> re.Pattern:
        return re.compile(
            "([a-z0-9]{%d})%s([a-z0-9]{%d})"
            % (self.serial_len, re.escape(self.separator), self.product_len)
        )


DEFAULT_PATTERN = PartNumberPattern()


def matches_pattern(
    query: str, pattern: PartNumberPattern = DEFAULT_PATTERN
) -> tuple[str, str] | None:
    """(serial, product) when the trimmed, casefolded query is a part number."""
    m = pattern.regex.fullmatch(normalize_text(query))
    if m is None:
        return None
    return m.group(1), m.group(2)


@dataclass(frozen=True)
class SerialIndex:
    """serial -> [(product_id, sku_id), ...] in first-seen catalog order."""

    serials: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    skipped: int = 0

    def __len__(self) -> int:
        return len(self.serials)


def build_serial_index(
    catalog: Catalog, pattern: PartNumberPattern = DEFAULT_PATTERN
) -> SerialIndex:
    """Group catalog part numbers by serial line.

    Records whose part number does not fit the pattern are counted in
    `skipped`, as are later duplicates of an already-seen (serial, product).
    """
    serials: dict[str, list[tuple[str, int]]] = {}
    seen: set[tuple[str, str]] = set()
    skipped = 0
    for record in catalog:
        parsed = matches_pattern(record.part_number, pattern)
        if parsed is None:
            skipped += 1
            continue
        serial, product = parsed
        if (serial, product) in seen:
            skipped += 1
            continue
        seen.add((serial, product))
        serials.setdefault(serial, []).append((product, record.sku_id))
    return SerialIndex(serials=serials, skipped=skipped)


def lookup_related(
    query: str,
    index: SerialIndex,
    catalog: Catalog,
    n: int = 10,
    pattern: PartNumberPattern = DEFAULT_PATTERN,
) -> list[int] | None:
    """Up to n sku_ids from the query's serial line, best LCS first.

    Returns None when the serial is unknown (callers fall through to the
    hybrid path). Raises ValueError when the query is not part-number shaped.
    An exact part-number match always ranks first because its LCS equals the
    full query length.
    """
    parsed = matches_pattern(query, pattern)
    if parsed is None:
        raise ValueError(f"query {query!r} is not a part number")
    serial, _ = parsed
    entries = index.serials.get(serial)
    if entries is None:
        return None
    scorer = QueryLcs(normalize_text(query))
    scored = []
    for product, sku_id in entries:
        record = catalog[sku_id]
        score = scorer.against(normalize_text(record.part_number))
        scored.append((-score, product, sku_id))
    scored.sort()
    return [sku_id for _, _, sku_id in scored[:n]]
