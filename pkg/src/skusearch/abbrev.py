"""Abbreviation expansion: field splitting, camel-case splitting, dictionary lookup.

Turns cryptic item names like "SrfLpt413ini7/16/512" into friendly names
("Surface Laptop 4 13in i7 16 512") via an ordered rule set of string
patterns plus an exact-match abbreviation dictionary.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

# Pieces the split rules are composed from. "camel" is the leading product
# token, at most one trailing version digit ("SrfLpt4" - two digits would make
# "...413in" ambiguous); "size" is digits+unit ("13in", "512gb"); "component"
# a letter plus digits ("i7"); "slashnums" the trailing "/16/512" tail whose
# slashes are consumed as separators.
_PIECES = {
    "camel": r"(?:[A-Z][a-z]+)+[0-9]?",
    "size": r"[0-9]{1,2}(?:in|cm)|[0-9]{1,3}(?:gb|tb)",
    "component": r"[A-Za-z][0-9]{1,3}",
    "slashnums": r"(?:/[0-9]+)+",
}

DEFAULT_RULE_SEQUENCES: tuple[tuple[str, ...], ...] = (
    ("camel", "size", "component", "slashnums"),
    ("camel", "size", "component"),
    ("camel", "component", "slashnums"),
    ("camel", "component"),
    ("camel", "size", "size"),
    ("camel", "size"),
)


class AbbrevDictError(ValueError):
    """Raised for unloadable abbreviation dictionary files."""


@dataclass(frozen=True)
class AbbrevDictionary:
    """Exact-match map from abbreviation (case-sensitive as authored) to expansion."""

    entries: dict[str, str]

    def __len__(self) -> int:
        return len(self.entries)

    def expand(self, token: str) -> str | None:
        return self.entries.get(token)


@dataclass(frozen=True)
class FieldSplit:
    """Ordered segments covering an item name (slash separators consumed)."""

    fields: tuple[str, ...]
    rule: str = ""


@dataclass(frozen=True)
class SplitRule:
    name: str
    pattern: re.Pattern


@dataclass(frozen=True)
class SplitRuleSet:
    """Ordered patterns tried against a whole item name; first full match wins."""

    rules: tuple[SplitRule, ...]

    @classmethod
    def from_sequences(cls, sequences=DEFAULT_RULE_SEQUENCES) -> "SplitRuleSet":
        rules = []
        for seq in sequences:
            if seq[0] == "slashnums":
                raise ValueError("slashnums cannot lead a rule sequence")
            body = "".join("(%s)" % _PIECES[piece] for piece in seq)
            rules.append(SplitRule(name="+".join(seq), pattern=re.compile(body)))
        return cls(rules=tuple(rules))


DEFAULT_RULES = SplitRuleSet.from_sequences()


def load_abbrev_dict(path: str | Path) -> AbbrevDictionary:
    """Load a TSV (abbrev<TAB>expansion) or JSON-object dictionary file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"abbreviation dictionary not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        obj = json.loads(text)
        if not isinstance(obj, dict):
            raise AbbrevDictError("JSON dictionary must be a single object")
        entries = {str(k): str(v) for k, v in obj.items()}
        for k, v in entries.items():
            if not k or not v:
                raise AbbrevDictError(f"empty abbreviation or expansion near {k!r}")
        return AbbrevDictionary(entries=entries)
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise AbbrevDictError(f"line {lineno}: expected 2 tab-separated columns")
        key, value = parts[0].strip(), parts[1].strip()
        if not key or not value:
            raise AbbrevDictError(f"line {lineno}: empty abbreviation or expansion")
        if key in entries:
            raise AbbrevDictError(f"line {lineno}: duplicate abbreviation {key!r}")
        entries[key] = value
    return AbbrevDictionary(entries=entries)


def load_bundled_dict() -> AbbrevDictionary:
    """The dictionary shipped with the package (~100 known abbreviations)."""
    ref = resources.files("skusearch.data").joinpath("abbreviations.tsv")
    with resources.as_file(ref) as path:
        return load_abbrev_dict(path)


def split_item_name(item_name: str, rules: SplitRuleSet = DEFAULT_RULES) -> FieldSplit | None:
    """Split a separator-free item name into fields; None when no rule matches."""
    for rule in rules.rules:
        m = rule.pattern.fullmatch(item_name)
        if m is None:
            continue
        fields: list[str] = []
        for group in m.groups():
            if group.startswith("/"):
                fields.extend(p for p in group.split("/") if p)
            else:
                fields.append(group)
        if all(fields):
            return FieldSplit(fields=tuple(fields), rule=rule.name)
    return None


def camel_split(token: str) -> list[str]:
    """Split at lowercase-to-uppercase and letter-to-digit boundaries only."""
    if len(token) < 2:
        return [token]
    parts: list[str] = []
    start = 0
    for i in range(1, len(token)):
        prev, cur = token[i - 1], token[i]
        if (prev.islower() and cur.isupper()) or (prev.isalpha() and cur.isdigit()):
            parts.append(token[start:i])
            start = i
    parts.append(token[start:])
    return parts


def derive_friendly_name(
    item_name: str,
    dictionary: AbbrevDictionary,
    rules: SplitRuleSet = DEFAULT_RULES,
) -> str | None:
    """Expand an item name; None when no sub-token matched the dictionary.

    Fields come from split_item_name when a rule fires, otherwise from
    whitespace splitting. A field whose camel sub-tokens saw at least one
    expansion is rewritten with spaces between sub-tokens; untouched fields
    pass through verbatim.
    """
    split = split_item_name(item_name, rules)
    fields = list(split.fields) if split is not None else item_name.split()
    out: list[str] = []
    expanded_any = False
    for f in fields:
        subs = camel_split(f)
        expansions = [dictionary.expand(s) for s in subs]
        if any(e is not None for e in expansions):
            expanded_any = True
            out.append(" ".join(e if e is not None else s for s, e in zip(subs, expansions)))
        else:
            out.append(f)
    if not expanded_any:
        return None
    return " ".join(out)
