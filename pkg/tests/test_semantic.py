from __future__ import annotations

import json

import httpx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_force_top_k
from skusearch.catalog import Catalog, SkuRecord
from skusearch.semantic import (
    BuiltinEmbedder,
    EmbeddingError,
    RemoteEmbeddingClient,
    _fnv1a,
    build_embedding_index,
    top_k_semantic,
)


def test_fnv1a_reference_vectors():
    # Published FNV-1a 64-bit test vectors.
    assert _fnv1a(b"") == 0xCBF29CE484222325
    assert _fnv1a(b"a") == 0xAF63DC4C8601EC8C
    assert _fnv1a(b"foobar") == 0x85944171F73967E8


def test_builtin_embedder_deterministic():
    a = BuiltinEmbedder().embed("Surface Laptop 4")
    b = BuiltinEmbedder().embed("surface  laptop 4")
    np.testing.assert_array_equal(a, b)


def test_builtin_embedder_unit_norm():
    vec = BuiltinEmbedder().embed("surface laptop")
    assert np.isclose(np.linalg.norm(vec), 1.0)


def test_builtin_embedder_short_text_is_zero():
    assert not BuiltinEmbedder().embed("ab").any()
    assert not BuiltinEmbedder().embed("").any()


def test_builtin_embedder_dimension():
    e = BuiltinEmbedder(dimension=16)
    assert e.embed("surface laptop").shape == (16,)
    with pytest.raises(ValueError):
        BuiltinEmbedder(dimension=0)


@given(st.text(min_size=3, max_size=40))
def test_builtin_embedder_norm_bounded(text):
    vec = BuiltinEmbedder(dimension=64).embed(text)
    norm = np.linalg.norm(vec)
    assert norm == 0.0 or np.isclose(norm, 1.0)


def test_embed_batch_matches_single():
    e = BuiltinEmbedder(dimension=32)
    texts = ["surface laptop", "office license", "x"]
    batch = e.embed_batch(texts)
    for i, t in enumerate(texts):
        np.testing.assert_array_equal(batch[i], e.embed(t))


def small_embedding_catalog() -> Catalog:
    names = ["surface laptop", "surface pro", "office suite", "azure vm", "dock hub"]
    return Catalog(
        [SkuRecord(i, f"AA{i}-1000{i}", n.title().replace(" ", "")) for i, n in enumerate(names)]
    )


@pytest.mark.parametrize("k", [1, 3, 50])
def test_top_k_semantic_matches_exhaustive(k):
    catalog = small_embedding_catalog()
    provider = BuiltinEmbedder(dimension=48)
    index = build_embedding_index(catalog, provider)
    for query in ["surface", "office", "vm", "laptop dock"]:
        got = top_k_semantic(index, query, provider, k)
        qvec = provider.embed(query)
        want = brute_force_top_k(
            [int(s) for s in index.sku_ids],
            index.matrix.tolist(),
            qvec.tolist(),
            k,
            drop_zero=False,
        )
        assert [s for s, _ in got] == [s for s, _ in want]
        np.testing.assert_allclose([v for _, v in got], [v for _, v in want], atol=1e-12)


def test_top_k_semantic_rejects_provider_mismatch():
    catalog = small_embedding_catalog()
    index = build_embedding_index(catalog, BuiltinEmbedder(dimension=48))
    with pytest.raises(EmbeddingError, match="built with"):
        top_k_semantic(index, "x", BuiltinEmbedder(dimension=32), 5)


def make_remote(handler, **kwargs) -> RemoteEmbeddingClient:
    return RemoteEmbeddingClient(
        "http://embeddings.test/v1",
        "test-model",
        dimension=4,
        transport=httpx.MockTransport(handler),
        **kwargs,
    )


def embedding_response(texts, dim=4):
    data = [{"embedding": [float(len(t) + j) for j in range(dim)]} for t in texts]
    return httpx.Response(200, json={"data": data})


def test_remote_client_posts_expected_payload():
    seen = {}

    def handler(request):
        seen.update(json.loads(request.content))
        return embedding_response(seen["input"])

    client = make_remote(handler)
    out = client.embed_batch(["surface laptop", "dock"])
    assert seen == {"model": "test-model", "input": ["surface laptop", "dock"]}
    assert out.shape == (2, 4)
    # Rows come back L2-normalized even though the fake endpoint's are not.
    np.testing.assert_allclose(np.linalg.norm(out, axis=1), [1.0, 1.0])


def test_remote_client_retries_on_429_then_succeeds(monkeypatch):
    monkeypatch.setattr("skusearch.semantic.time.sleep", lambda s: None)
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        if calls["n"] == 1:
            return httpx.Response(429, text="slow down")
        return embedding_response(json.loads(request.content)["input"])

    out = make_remote(handler, max_retries=2).embed_batch(["a text"])
    assert calls["n"] == 2
    assert out.shape == (1, 4)


def test_remote_client_retries_server_errors_then_gives_up(monkeypatch):
    monkeypatch.setattr("skusearch.semantic.time.sleep", lambda s: None)
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        return httpx.Response(503, text="overloaded")

    with pytest.raises(EmbeddingError, match="after retries"):
        make_remote(handler, max_retries=2).embed_batch(["a text"])
    assert calls["n"] == 3


def test_remote_client_does_not_retry_client_errors():
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        return httpx.Response(400, text="bad model")

    with pytest.raises(EmbeddingError, match="400"):
        make_remote(handler).embed_batch(["a text"])
    assert calls["n"] == 1


def test_remote_client_rejects_wrong_dimension():
    def handler(request):
        texts = json.loads(request.content)["input"]
        return embedding_response(texts, dim=3)

    with pytest.raises(EmbeddingError, match="expected 4-dim"):
        make_remote(handler).embed_batch(["a text"])


def test_remote_client_batches_requests():
    batches = []

    def handler(request):
        texts = json.loads(request.content)["input"]
        batches.append(len(texts))
        return embedding_response(texts)

    client = make_remote(handler, batch_size=2)
    client.embed_batch(["one", "two", "three", "four", "five"])
    assert batches == [2, 2, 1]


def test_remote_client_requires_auth_token(monkeypatch):
    monkeypatch.delenv("EMBED_TOKEN", raising=False)
    with pytest.raises(EmbeddingError, match="EMBED_TOKEN"):
        RemoteEmbeddingClient(
            "http://embeddings.test", "m", dimension=4, auth_env="EMBED_TOKEN"
        )


def test_remote_client_sends_auth_header(monkeypatch):
    monkeypatch.setenv("EMBED_TOKEN", "sekret")
    seen = {}

    def handler(request):
        seen["auth"] = request.headers.get("authorization")
        return embedding_response(json.loads(request.content)["input"])

    client = RemoteEmbeddingClient(
        "http://embeddings.test",
        "m",
        dimension=4,
        auth_env="EMBED_TOKEN",
        transport=httpx.MockTransport(handler),
    )
    client.embed_batch(["a text"])
    assert seen["auth"] == "Bearer sekret"
