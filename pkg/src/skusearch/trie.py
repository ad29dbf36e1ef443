"""Character trie over normalized catalog keys for per-keystroke suggestions."""

from __future__ import annotations

from .catalog import Catalog, normalize_text

INDEXED_FIELDS = ("part_number", "item_name", "friendly_name")


class _Node:
    __slots__ = ("children", "payloads")

    def __init__(self):
        self.children: dict[str, _Node] = {}
        self.payloads: list[tuple[int, str]] = []


class Trie:
    """Maps string keys to (sku_id, field_kind) payloads; supports prefix walks.

    Suggestions come back in lexicographic key order (depth-first over
    sorted children), payload insertion order within a key.
    """

    def __init__(self):
        self._root = _Node()
        self.key_count = 0
        self.node_count = 1

    def insert(self, key: str, payload: tuple[int, str]) -> None:
        if not key:
            raise ValueError("cannot insert an empty key")
        node = self._root
        for ch in key:
            child = node.children.get(ch)
            if child is None:
                child = _Node()
                node.children[ch] = child
                self.node_count += 1
            node = child
        if payload not in node.payloads:
            node.payloads.append(payload)
            self.key_count += 1

    def suggest(self, prefix: str, limit: int = 10) -> list[tuple[str, int, str]]:
        """Up to limit (key, sku_id, field_kind) entries under a prefix."""
        if limit < 1 or not prefix:
            return []
        node = self._root
        for ch in prefix:
            node = node.children.get(ch)
            if node is None:
                return []
        out: list[tuple[str, int, str]] = []
        stack: list[tuple[_Node, str]] = [(node, prefix)]
        while stack and len(out) < limit:
            current, key = stack.pop()
            for sku_id, kind in current.payloads:
                out.append((key, sku_id, kind))
                if len(out) >= limit:
                    return out
            for ch in sorted(current.children, reverse=True):
                stack.append((current.children[ch], key + ch))
        return out

    def all_keys(self) -> list[str]:
        """Every distinct key with at least one payload, lexicographic."""
        out: list[str] = []
        stack: list[tuple[_Node, str]] = [(self._root, "")]
        while stack:
            node, key = stack.pop()
            if node.payloads:
                out.append(key)
            for ch in sorted(node.children, reverse=True):
                stack.append((node.children[ch], key + ch))
        return out


def build_trie(catalog: Catalog) -> Trie:
    """Index every part number, item name, and friendly name."""
    trie = Trie()
    for record in catalog:
        for kind in INDEXED_FIELDS:
            value = getattr(record, kind)
            if value is None:
                continue
            key = normalize_text(value)
            if key:
                trie.insert(key, (record.sku_id, kind))
    return trie
