from __future__ import annotations

import json

import pytest

from skusearch import cli
from skusearch.catalog import load_catalog, save_catalog
from skusearch.descgen import BatchReport


@pytest.fixture()
def catalog_csv(tmp_path, small_catalog):
    path = tmp_path / "catalog.csv"
    save_catalog(small_catalog, path, format="csv")
    return path


@pytest.fixture()
def index_dir(tmp_path, catalog_csv):
    out = tmp_path / "idx"
    rc = cli.main(["index", "--catalog", str(catalog_csv), "--out", str(out)])
    assert rc == 0
    return out


def test_benchmark_writes_catalog_and_queries(tmp_path, capsys):
    out = tmp_path / "bench"
    rc = cli.main(
        ["benchmark", "--seed", "3", "--size", "12", "--queries", "15", "--out", str(out)]
    )
    assert rc == 0
    assert (out / "catalog.csv").exists()
    assert (out / "queries.csv").exists()
    assert "12 records and 15 queries" in capsys.readouterr().out


def test_index_reports_fingerprint(tmp_path, catalog_csv, capsys):
    out = tmp_path / "idx"
    rc = cli.main(["index", "--catalog", str(catalog_csv), "--out", str(out)])
    assert rc == 0
    printed = capsys.readouterr().out
    assert "indexed 7 records" in printed
    assert "fingerprint" in printed
    assert (out / "manifest.json").exists()


def test_stats_summarizes_index(index_dir, capsys):
    rc = cli.main(["stats", "--index", str(index_dir)])
    assert rc == 0
    printed = capsys.readouterr().out
    assert "records          7" in printed
    assert "fingerprint" in printed
    assert "384" in printed  # embedding dimension


def test_index_honors_config_file(tmp_path, catalog_csv, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"semantic_enabled": False}), encoding="utf-8")
    out = tmp_path / "idx2"
    rc = cli.main(
        ["index", "--catalog", str(catalog_csv), "--config", str(cfg), "--out", str(out)]
    )
    assert rc == 0
    capsys.readouterr()
    cli.main(["stats", "--index", str(out)])
    assert "embeddings       none" in capsys.readouterr().out


def test_expand_fills_derivable_friendly_names(tmp_path, catalog_csv, small_catalog, capsys):
    out = tmp_path / "expanded.csv"
    rc = cli.main(["expand", "--catalog", str(catalog_csv), "--out", str(out)])
    assert rc == 0
    assert "derived 1 friendly names over 7 records" in capsys.readouterr().out
    expanded = load_catalog(out, format="csv")
    assert expanded[4].friendly_name == "Office Premium License"
    # Records that already had one keep it verbatim.
    assert expanded[0].friendly_name == small_catalog[0].friendly_name


def test_eval_writes_reports(tmp_path, index_dir, capsys):
    queries = tmp_path / "queries.csv"
    queries.write_text(
        "query,gold_sku_id,kind\nsurface laptop 4,0,exact\nsrflpt5,1,abbrev\n",
        encoding="utf-8",
    )
    out = tmp_path / "eval"
    rc = cli.main(
        ["eval", "--index", str(index_dir), "--queries", str(queries), "--out", str(out)]
    )
    assert rc == 0
    assert (out / "report.csv").exists()
    assert (out / "report.json").exists()
    assert "success@10" in capsys.readouterr().out


def test_eval_with_json_grid_file(tmp_path, index_dir, capsys):
    queries = tmp_path / "queries.csv"
    queries.write_text("query,gold_sku_id,kind\nsurface laptop 4,0,exact\n", encoding="utf-8")
    grid = tmp_path / "grid.json"
    grid.write_text(
        json.dumps(
            [
                {"label": "lexical-only", "config": {"semantic_enabled": False}},
                {"label": "everything"},
            ]
        ),
        encoding="utf-8",
    )
    out = tmp_path / "eval"
    rc = cli.main(
        [
            "eval", "--index", str(index_dir), "--queries", str(queries),
            "--grid", str(grid), "--out", str(out),
        ]
    )
    assert rc == 0
    rows = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert [r["label"] for r in rows] == ["lexical-only", "everything"]
    assert "lexical-only" in capsys.readouterr().out


def test_describe_mock_provider(tmp_path, catalog_csv, capsys):
    out = tmp_path / "desc.jsonl"
    rc = cli.main(
        [
            "describe", "--catalog", str(catalog_csv), "--out", str(out),
            "--failure-rate", "0.3",
        ]
    )
    assert rc == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 7
    assert "generated 7, skipped 0, failed 0" in capsys.readouterr().out


def test_describe_exit_one_over_failure_threshold(tmp_path, catalog_csv, monkeypatch, capsys):
    def fake_batch(catalog, provider, out, concurrency, max_attempts):
        return BatchReport(generated=5, skipped=0, failed_sku_ids=[2, 6])

    monkeypatch.setattr(cli, "batch_generate", fake_batch)
    rc = cli.main(
        ["describe", "--catalog", str(catalog_csv), "--out", str(tmp_path / "d.jsonl")]
    )
    assert rc == 1
    assert "failed sku_ids: 2,6" in capsys.readouterr().out


def test_describe_remote_requires_endpoint_and_model(tmp_path, catalog_csv, capsys):
    rc = cli.main(
        [
            "describe", "--catalog", str(catalog_csv), "--provider", "remote",
            "--out", str(tmp_path / "d.jsonl"),
        ]
    )
    assert rc == 2
    assert "requires --endpoint and --model" in capsys.readouterr().err


def test_unknown_subcommand_exits_nonzero():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code != 0
