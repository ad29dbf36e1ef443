"""Command-line entry points: index building, serving, eval, batch utilities."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import engine as eng
from .abbrev import derive_friendly_name, load_abbrev_dict, load_bundled_dict
from .catalog import load_catalog, save_catalog
from .descgen import MockChatProvider, RemoteChatClient, batch_generate
from .evaluation import (
    GridEntry,
    default_ablation_grid,
    format_report_table,
    generate_synthetic_benchmark,
    granularity_grid,
    load_labeled_queries,
    run_ablation,
    run_eval,
    write_report_csv,
)


def _load_abbrev(path: str | None):
    return load_abbrev_dict(path) if path else load_bundled_dict()


def cmd_index(args) -> int:
    catalog = load_catalog(args.catalog, format=args.format)
    config = eng.load_config(args.config) if args.config else eng.EngineConfig()
    state = eng.build_indexes(
        catalog, config, index_dir=args.out, abbrev=_load_abbrev(args.abbrev)
    )
    print(f"indexed {len(catalog)} records -> {args.out}")
    print(f"fingerprint {state.fingerprint}")
    return 0


def cmd_expand(args) -> int:
    catalog = load_catalog(args.catalog, format=args.format)
    abbrev = _load_abbrev(args.abbrev)
    derived = 0
    records = []
    for record in catalog:
        if record.friendly_name is None:
            friendly = derive_friendly_name(record.item_name, abbrev)
            if friendly is not None:
                record = replace(record, friendly_name=friendly)
                derived += 1
        records.append(record)
    from .catalog import Catalog

    save_catalog(Catalog(records), args.out, format=args.format)
    print(f"derived {derived} friendly names over {len(records)} records -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import EngineHolder, create_app

    state = eng.load_state(args.index)
    if args.config:
        config = eng.load_config(args.config)
        state = eng.build_indexes(state.catalog, config, abbrev=state.abbrev)
    holder = EngineHolder(
        state, catalog_path=Path(args.index) / "catalog.jsonl", catalog_format="jsonl",
        index_dir=args.index,
    )
    app = create_app(holder, cors_origins=args.cors_origin or None)
    addr = os.environ.get("SKUSEARCH_ADDR", args.addr)
    host, _, port = addr.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return 0


def cmd_eval(args) -> int:
    state = eng.load_state(args.index)
    queries = load_labeled_queries(args.queries)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.grid:
        if args.grid == "default":
            grid = default_ablation_grid(state.config)
        elif args.grid == "granularity":
            grid = granularity_grid(state.config)
        else:
            rows = json.loads(Path(args.grid).read_text(encoding="utf-8"))
            base = state.config.to_dict()
            grid = [
                GridEntry(
                    label=row["label"],
                    config=eng.EngineConfig.from_dict({**base, **row.get("config", {})}),
                    use_suggest=row.get("use_suggest", False),
                )
                for row in rows
            ]
        reports = run_ablation(state.catalog, queries, grid, abbrev=state.abbrev)
    else:
        reports = [run_eval(state, queries)]
    write_report_csv(reports, out / "report.csv")
    (out / "report.json").write_text(
        json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True), encoding="utf-8"
    )
    table = format_report_table(reports)
    (out / "report.txt").write_text(table + "\n", encoding="utf-8")
    print(table)
    return 0


def cmd_describe(args) -> int:
    catalog = load_catalog(args.catalog, format=args.format)
    if args.provider == "builtin-mock":
        provider = MockChatProvider(transient_failure_rate=args.failure_rate)
    else:
        if not args.endpoint or not args.model:
            print("remote provider requires --endpoint and --model", file=sys.stderr)
            return 2
        provider = RemoteChatClient(args.endpoint, args.model, auth_env=args.auth_env)
    report = batch_generate(
        catalog,
        provider,
        args.out,
        concurrency=args.concurrency,
        max_attempts=args.max_attempts,
    )
    print(
        f"generated {report.generated}, skipped {report.skipped}, "
        f"failed {len(report.failed_sku_ids)}"
    )
    if report.failed_sku_ids:
        print("failed sku_ids:", ",".join(str(i) for i in report.failed_sku_ids))
    return 1 if report.failure_fraction > args.failure_threshold else 0


def cmd_stats(args) -> int:
    state = eng.load_state(args.index)
    sizes = {
        p.relative_to(args.index).as_posix(): p.stat().st_size
        for p in sorted(Path(args.index).rglob("*"))
        if p.is_file()
    }
    print(f"records          {len(state.catalog)}")
    print(f"serial lines     {len(state.serial_index)} (skipped {state.serial_index.skipped})")
    print(f"trie keys        {state.trie.key_count}")
    print(f"trie nodes       {state.trie.node_count}")
    print(f"spell words      {len(state.spell)}")
    print(f"tfidf terms      {len(state.tfidf.vocab)}")
    emb = state.embeddings
    print(f"embeddings       {'none' if emb is None else f'{emb.matrix.shape[0]}x{emb.dimension} ({emb.provider_name})'}")
    print(f"fingerprint      {state.fingerprint}")
    print(f"on-disk bytes    {sum(sizes.values())}")
    return 0


def cmd_benchmark(args) -> int:
    catalog, queries = generate_synthetic_benchmark(
        seed=args.seed, size=args.size, query_count=args.queries, out_dir=args.out
    )
    print(f"wrote {len(catalog)} records and {len(queries)} queries to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skusearch")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build and persist all query structures")
    p.add_argument("--catalog", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="EngineConfig JSON file")
    p.add_argument("--abbrev", help="abbreviation dictionary (TSV or JSON)")
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("expand", help="fill in derivable friendly names")
    p.add_argument("--catalog", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--abbrev")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_expand)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--index", required=True)
    p.add_argument("--addr", default="127.0.0.1:8080")
    p.add_argument("--config", help="rebuild in memory with this config")
    p.add_argument("--cors-origin", action="append", help="repeatable; default allows any")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("eval", help="run labeled-query evaluation")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--grid", help="'default', 'granularity', or a JSON grid file")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("describe", help="batch-generate SKU descriptions")
    p.add_argument("--catalog", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--provider", choices=("builtin-mock", "remote"), default="builtin-mock")
    p.add_argument("--concurrency", type=int, default=20)
    p.add_argument("--max-attempts", type=int, default=3)
    p.add_argument("--failure-threshold", type=float, default=0.0)
    p.add_argument("--failure-rate", type=float, default=0.0, help="mock provider fault injection")
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--auth-env")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_describe)

    p = sub.add_parser("stats", help="print index statistics")
    p.add_argument("--index", required=True)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("benchmark", help="write a synthetic catalog and query set")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--size", type=int, default=10000)
    p.add_argument("--queries", type=int, default=600)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_benchmark)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
