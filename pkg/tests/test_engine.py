from __future__ import annotations

import json

import httpx
import pytest

from skusearch.catalog import CatalogError
from skusearch.engine import (
    EngineBuildError,
    EngineConfig,
    build_indexes,
    load_state,
    save_state,
    search,
    suggest,
    with_config,
)


def test_config_round_trip_and_fingerprint():
    config = EngineConfig(k1=20, tfidf_ngram_range=(2, 4))
    again = EngineConfig.from_dict(config.to_dict())
    assert again == config
    assert again.fingerprint() == config.fingerprint()
    assert config.fingerprint() != EngineConfig().fingerprint()


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown config keys"):
        EngineConfig.from_dict({"k1": 10, "mystery": True})


@pytest.mark.parametrize(
    "kwargs",
    [
        {"k1": 0},
        {"top_n": 0},
        {"tfidf_max_features": 10},
        {"tfidf_granularity": "subword"},
        {"embedding_provider": "remote"},  # no endpoint
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        EngineConfig(**kwargs)


def test_build_failure_names_component(small_catalog):
    config = EngineConfig(
        embedding_provider="remote",
        embedding_endpoint="http://embeddings.test",
        embedding_model="m",
        embedding_max_retries=0,
    )
    transport = httpx.MockTransport(lambda request: httpx.Response(500, text="boom"))
    with pytest.raises(EngineBuildError, match="embedding index"):
        build_indexes(small_catalog, config, transport=transport)


def test_part_number_branch_exact_first(small_state):
    got = search(small_state, "LF1-00021")
    assert got.branch == "part_number"
    assert got.results[0].sku_id == 1
    assert got.results[0].matched_field == "part_number"
    assert got.results[0].scores["lcs"] == 9.0
    assert got.corrected_query is None
    assert not got.degraded
    # Every result shares the serial line.
    assert {h.part_number[:3] for h in got.results} == {"LF1"}


def test_unknown_serial_falls_through_to_hybrid(small_state):
    got = search(small_state, "ZZZ-99999")
    assert got.branch == "hybrid"


def test_hybrid_search_ranks_exact_name_first(small_state):
    got = search(small_state, "surface laptop 4")
    assert got.branch == "hybrid"
    assert got.results[0].sku_id == 0
    assert got.results[0].scores["nlcs"] == 1.0
    assert got.results[0].matched_field == "friendly_name"


def test_spell_correction_reported(small_state):
    got = search(small_state, "surfase laptop")
    assert got.corrected_query == "surface laptop"
    assert got.results[0].sku_id in (0, 1)


def test_no_correction_no_corrected_query(small_state):
    assert search(small_state, "surface laptop").corrected_query is None


def test_digits_protected_from_spelling(small_state):
    got = search(small_state, "i7 16gb")
    assert got.corrected_query is None


def test_empty_query_rejected(small_state):
    with pytest.raises(ValueError):
        search(small_state, "   ")


def test_elapsed_ms_populated(small_state):
    assert search(small_state, "surface").elapsed_ms > 0.0


def test_suggest_prefix_and_order(small_state):
    got = suggest(small_state, "surface")
    keys = [s.key for s in got.suggestions]
    assert keys == sorted(keys)
    assert all(k.startswith("surface") for k in keys)
    assert {s.field_kind for s in got.suggestions} <= {
        "part_number",
        "item_name",
        "friendly_name",
    }


def test_suggest_respects_limit(small_state):
    assert len(suggest(small_state, "s", limit=2).suggestions) == 2


def test_spell_disabled_passes_query_through(small_catalog, abbrev):
    config = EngineConfig(spell_enabled=False, semantic_enabled=False)
    state = build_indexes(small_catalog, config, abbrev=abbrev)
    got = search(state, "surfase laptop")
    assert got.corrected_query is None


def test_rerank_disabled_sorts_by_cosine(small_catalog, abbrev):
    config = EngineConfig(rerank_enabled=False, semantic_enabled=False)
    state = build_indexes(small_catalog, config, abbrev=abbrev)
    got = search(state, "surface laptop 4")
    assert got.results
    assert "nlcs" not in got.results[0].scores
    lex = [h.scores.get("lexical", 0.0) for h in got.results]
    assert lex == sorted(lex, reverse=True)


def test_degraded_when_remote_embeddings_fail(small_catalog, abbrev):
    # Index build succeeds, then the endpoint starts failing at query time.
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        texts = json.loads(request.content)["input"]
        if calls["n"] > 1:
            return httpx.Response(500, text="down")
        data = [
            {"embedding": [float((len(t) + j) % 7) for j in range(8)]} for t in texts
        ]
        return httpx.Response(200, json={"data": data})

    config = EngineConfig(
        embedding_provider="remote",
        embedding_endpoint="http://embeddings.test",
        embedding_model="m",
        embedding_dimension=8,
        embedding_max_retries=0,
    )
    state = build_indexes(small_catalog, config, abbrev=abbrev, transport=transport_of(handler))
    got = search(state, "surface laptop")
    assert got.degraded
    assert got.results  # lexical branch still answers


def transport_of(handler):
    return httpx.MockTransport(handler)


def test_save_load_round_trip(tmp_path, small_catalog, abbrev):
    state = build_indexes(small_catalog, EngineConfig(), index_dir=tmp_path, abbrev=abbrev)
    loaded = load_state(tmp_path)
    assert loaded.fingerprint == state.fingerprint
    for q in ("surface laptop 4", "LF1-00018", "surfase pro"):
        a = search(state, q).to_dict()
        b = search(loaded, q).to_dict()
        a.pop("elapsed_ms")
        b.pop("elapsed_ms")
        assert a == b
    assert [s.key for s in suggest(loaded, "lf1").suggestions] == [
        s.key for s in suggest(state, "lf1").suggestions
    ]


def test_load_rejects_checksum_mismatch(tmp_path, small_catalog, abbrev):
    build_indexes(small_catalog, EngineConfig(), index_dir=tmp_path, abbrev=abbrev)
    catalog_file = tmp_path / "catalog.jsonl"
    lines = catalog_file.read_text(encoding="utf-8").splitlines()
    catalog_file.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")
    with pytest.raises(CatalogError, match="checksum"):
        load_state(tmp_path)


def test_load_rejects_unknown_version(tmp_path, small_catalog, abbrev):
    build_indexes(small_catalog, EngineConfig(), index_dir=tmp_path, abbrev=abbrev)
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    manifest["format_version"] = 99
    (tmp_path / "manifest.json").write_text(json.dumps(manifest), encoding="utf-8")
    with pytest.raises(ValueError, match="version"):
        load_state(tmp_path)


def test_load_requires_manifest(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_state(tmp_path)


def test_manifest_counts(tmp_path, small_catalog, abbrev):
    state = build_indexes(small_catalog, EngineConfig(), index_dir=tmp_path, abbrev=abbrev)
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["counts"]["records"] == len(small_catalog)
    assert manifest["counts"]["trie_keys"] == state.trie.key_count
    assert manifest["catalog_checksum"] == small_catalog.checksum()
    # One artifact per structure.
    names = {p.name for p in tmp_path.iterdir()}
    assert {
        "manifest.json",
        "catalog.jsonl",
        "abbrev.json",
        "serial_index.json",
        "spell.json",
        "trie.json",
        "lexical",
        "semantic",
    } <= names


def test_with_config_flips_toggles(small_state):
    variant = with_config(small_state, EngineConfig(spell_enabled=False))
    assert variant.config.spell_enabled is False
    assert variant.tfidf is small_state.tfidf
    assert search(variant, "surfase laptop").corrected_query is None


def test_with_config_rejects_tfidf_changes(small_state):
    with pytest.raises(ValueError, match="rebuild"):
        with_config(small_state, EngineConfig(tfidf_max_features=2000))
