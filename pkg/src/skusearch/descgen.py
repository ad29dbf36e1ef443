"""Batch description generation through a chat-completion provider.

Descriptions are produced offline: a first completion drafts the text, an
optional second call summarizes anything over the 250-character cap, and a
word-boundary truncation backstops the invariant no matter what the provider
returns. The batch runner keeps at most `concurrency` requests in flight,
retries transient failures with exponential backoff, and is resumable from
its own output file.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
import zlib
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

try:
    import httpx
except ImportError:  # pragma: no cover - only the remote provider needs it
    httpx = None

from .catalog import Catalog, SkuRecord

MAX_DESCRIPTION_CHARS = 250
PROMPT_VERSION = 1

_PROMPT_TEMPLATE = """\
You are writing catalog copy for a commercial reseller portal (prompt v{version}).
Write one short, factual description of this product for sellers. Mention only
attributes present below; do not invent specifications. Plain sentences, no
markdown, at most 250 characters.

part_number: {part_number}
item_name: {item_name}
{friendly_clause}"""

_SUMMARIZE_TEMPLATE = """\
Summarize the following product description in a maximum of 250 characters,
keeping every concrete attribute (prompt v{version}):

{text}"""


class DescGenError(RuntimeError):
    """Permanent description-generation failure for one record."""


class TransientChatError(RuntimeError):
    """Retryable provider hiccup (timeouts, 429s, injected faults)."""


@dataclass(frozen=True)
class DescriptionRecord:
    sku_id: int
    description: str
    provider: str
    generated_at: str

    def to_dict(self) -> dict:
        return {
            "sku_id": self.sku_id,
            "description": self.description,
            "provider": self.provider,
            "generated_at": self.generated_at,
        }


def build_prompt(sku: SkuRecord) -> str:
    friendly_clause = (
        f"friendly_name: {sku.friendly_name}\n" if sku.friendly_name else ""
    )
    return _PROMPT_TEMPLATE.format(
        version=PROMPT_VERSION,
        part_number=sku.part_number,
        item_name=sku.item_name,
        friendly_clause=friendly_clause,
    )


_FRIENDLY_SPEC = re.compile(
    r"^(?P<name>[A-Za-z][A-Za-z ]*?[A-Za-z0-9])\s+(?P<inches>\d{1,2})in\s+"
    r"(?P<cpu>[a-z]\d{1,3})\s+(?P<ram>\d+)\s+(?P<storage>\d+)$"
)


class MockChatProvider:
    """Deterministic stand-in for a hosted chat model.

    Parses its own prompt template back out of the prompt text and composes a
    description in the house style. Instrumented for the batch runner's
    concurrency tests: tracks peak in-flight calls, can sleep to force
    overlap, and can fail a deterministic slice of first attempts.
    """

    name = "builtin-mock"

    def __init__(self, sleep_s: float = 0.0, transient_failure_rate: float = 0.0):
        if not 0.0 <= transient_failure_rate <= 1.0:
            raise ValueError("transient_failure_rate must be within [0, 1]")
        self.sleep_s = sleep_s
        self.transient_failure_rate = transient_failure_rate
        self._lock = threading.Lock()
        self._in_flight = 0
        self.max_in_flight = 0
        self.call_count = 0
        self._failed_once: set[int] = set()

    def _should_fail(self, prompt: str) -> bool:
        if self.transient_failure_rate == 0.0:
            return False
        key = zlib.crc32(prompt.encode("utf-8"))
        if key in self._failed_once:
            return False
        if (key % 1000) < int(self.transient_failure_rate * 1000):
            self._failed_once.add(key)
            return True
        return False

    def complete(self, prompt: str, max_tokens: int = 120, temperature: float = 0.2) -> str:
        with self._lock:
            self._in_flight += 1
            self.call_count += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)
            fail = self._should_fail(prompt)
        try:
            if self.sleep_s:
                time.sleep(self.sleep_s)
            if fail:
                raise TransientChatError("injected transient failure")
            return self._respond(prompt, max_tokens)
        finally:
            with self._lock:
                self._in_flight -= 1

    def _respond(self, prompt: str, max_tokens: int) -> str:
        char_budget = max_tokens * 4  # rough chars-per-token, mirrors real caps
        if prompt.startswith("Summarize the following"):
            body = prompt.split("\n\n", 1)[1]
            return _truncate_words(body, min(MAX_DESCRIPTION_CHARS, char_budget))
        fields = {}
        for line in prompt.splitlines():
            if ": " in line:
                key, _, value = line.partition(": ")
                fields[key] = value
        part = fields.get("part_number", "unknown")
        item = fields.get("item_name", "unknown")
        friendly = fields.get("friendly_name")
        if friendly:
            m = _FRIENDLY_SPEC.match(friendly)
            if m:
                text = (
                    f"The {m.group('name')} is a {int(m.group('inches'))}-inch device "
                    f"with an {m.group('cpu')} processor, {m.group('ram')}GB RAM, and "
                    f"{m.group('storage')}GB storage. It is designed for commercial "
                    f"use and the SKU is {part}."
                )
            else:
                text = (
                    f"The {friendly} is a commercial-catalog product. It is listed as "
                    f"{item} and the SKU is {part}."
                )
        else:
            text = f"Catalog item {item}. No expanded name is on file; the SKU is {part}."
        return text[:char_budget]


class RemoteChatClient:
    """Chat-completions HTTP client matching the common wire shape."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        timeout_ms: int = 10000,
        auth_env: str | None = None,
        transport=None,
    ):
        if httpx is None:  # pragma: no cover
            raise DescGenError("httpx is required for the remote chat provider")
        self.endpoint = endpoint
        self.model = model
        self.name = f"remote:{model}"
        headers = {}
        if auth_env:
            token = os.environ.get(auth_env)
            if not token:
                raise DescGenError(f"auth environment variable {auth_env} is not set")
            headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(
            timeout=timeout_ms / 1000.0, headers=headers, transport=transport
        )

    def complete(self, prompt: str, max_tokens: int = 120, temperature: float = 0.2) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "max_tokens": max_tokens,
            "temperature": temperature,
        }
        try:
            resp = self._client.post(self.endpoint, json=payload)
        except httpx.HTTPError as exc:
            raise TransientChatError(f"chat request failed: {exc}") from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientChatError(f"chat endpoint returned {resp.status_code}")
        if resp.status_code != 200:
            raise DescGenError(f"chat endpoint returned {resp.status_code}: {resp.text[:200]}")
        return resp.json()["choices"][0]["message"]["content"]

    def close(self):
        self._client.close()


def _truncate_words(text: str, limit: int) -> str:
    text = text.strip()
    if len(text) <= limit:
        return text
    cut = text[: limit + 1]
    space = cut.rfind(" ")
    if space > 0:
        cut = cut[:space]
    return cut[:limit].rstrip()


def generate_description(
    provider,
    sku: SkuRecord,
    max_tokens: int = 120,
    temperature: float = 0.2,
) -> DescriptionRecord:
    """One record's description: draft, summarize if over the cap, truncate."""
    if temperature > 0.2:
        raise ValueError("temperature above 0.2 defeats the determinism these runs rely on")
    text = provider.complete(build_prompt(sku), max_tokens=max_tokens, temperature=temperature)
    if len(text.strip()) > MAX_DESCRIPTION_CHARS:
        text = provider.complete(
            _SUMMARIZE_TEMPLATE.format(version=PROMPT_VERSION, text=text.strip()),
            max_tokens=max_tokens,
            temperature=temperature,
        )
    final = _truncate_words(text, MAX_DESCRIPTION_CHARS)
    if not final:
        raise DescGenError(f"provider returned an empty description for sku {sku.sku_id}")
    return DescriptionRecord(
        sku_id=sku.sku_id,
        description=final,
        provider=getattr(provider, "name", "unknown"),
        generated_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


@dataclass
class BatchReport:
    generated: int = 0
    skipped: int = 0
    failed_sku_ids: list[int] = field(default_factory=list)

    @property
    def failure_fraction(self) -> float:
        attempted = self.generated + len(self.failed_sku_ids)
        return len(self.failed_sku_ids) / attempted if attempted else 0.0


def _load_existing(out_path: Path) -> dict[int, dict]:
    existing: dict[int, dict] = {}
    if out_path.exists():
        with open(out_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    row = json.loads(line)
                    existing[int(row["sku_id"])] = row
    return existing


def batch_generate(
    catalog: Catalog,
    provider,
    out_path: str | Path,
    concurrency: int = 20,
    max_attempts: int = 3,
    backoff_base_s: float = 0.05,
) -> BatchReport:
    """Generate descriptions for every record missing from the output file.

    At most `concurrency` provider calls run at once. Each record retries
    transient errors up to max_attempts with exponential backoff. Output is
    JSONL, appended as results land and rewritten sorted by sku_id at the
    end, so interrupted runs resume where they stopped.
    """
    if concurrency < 1:
        raise ValueError("concurrency must be >= 1")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    existing = _load_existing(out_path)
    todo = [r for r in catalog if r.sku_id not in existing]
    report = BatchReport(skipped=len(existing))
    write_lock = threading.Lock()

    def work(record: SkuRecord) -> DescriptionRecord:
        delay = backoff_base_s
        for attempt in range(1, max_attempts + 1):
            try:
                return generate_description(provider, record)
            except TransientChatError:
                if attempt == max_attempts:
                    raise
                time.sleep(delay)
                delay *= 2
        raise DescGenError("unreachable")

    with ThreadPoolExecutor(max_workers=concurrency, thread_name_prefix="descgen") as pool:
        futures = {pool.submit(work, record): record for record in todo}
        with open(out_path, "a", encoding="utf-8") as fh:
            for future in as_completed(futures):
                record = futures[future]
                try:
                    desc = future.result()
                except (TransientChatError, DescGenError):
                    report.failed_sku_ids.append(record.sku_id)
                    continue
                row = desc.to_dict()
                with write_lock:
                    existing[desc.sku_id] = row
                    fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
                    fh.flush()
                report.generated += 1

    tmp_path = out_path.with_suffix(out_path.suffix + ".tmp")
    with open(tmp_path, "w", encoding="utf-8") as fh:
        for sku_id in sorted(existing):
            fh.write(json.dumps(existing[sku_id], sort_keys=True, ensure_ascii=False) + "\n")
    os.replace(tmp_path, out_path)
    report.failed_sku_ids.sort()
    return report


def load_descriptions(path: str | Path) -> dict[int, str]:
    """sku_id -> description map from a batch output file."""
    return {sku_id: row["description"] for sku_id, row in _load_existing(Path(path)).items()}
