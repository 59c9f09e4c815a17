"""Command-line pipeline: ingest -> extract -> resolve -> build -> report.

Logs go to stderr, data to stdout or files. Exit codes: 0 success, 1
validation/configuration error, 2 I/O or transport error. The only
network-capable path is ``extract --backend live``; everything else is
offline by construction.
"""

from __future__ import annotations

import argparse
import dataclasses
import importlib.resources
import json
import logging
import os
import sys
from pathlib import Path

from .bol import normalize_product_desc, parse_bol_file
from .config import Config, load_config
from .core import EmissionFactor
from .errors import (
    BackendError,
    ConfigError,
    CycleError,
    DuplicateIdError,
    ExtractionFormatError,
    InputError,
    SchemaError,
    StoreFormatError,
    StoreVersionError,
    UsageError,
)
from .evalkit import load_triples_flat, metrics_to_dict, render_metrics_table, score
from .exporter import (
    ExportOptions,
    export,
    import_graph_json,
    load_report_json,
    save_report_json,
)
from .extraction import (
    HttpCompletionBackend,
    PromptConfig,
    RecordedBackend,
    RuleBasedBackend,
    extract_batch,
    load_examples,
)
from .graph import FactorSampler, build_graph, load_factor_table, propagate, query
from .resolution import apply_overrides, load_overrides, resolve
from .store import load_store, new_store, save_store
from .transcripts import (
    detect_mentions,
    gazetteer_from_store,
    load_gazetteer,
    load_transcript,
    prefilter,
    segment,
)

log = logging.getLogger("elia")

GRAPH_FILE = "graph.json"
REPORT_FILE = "report.json"


def fixtures_dir() -> Path:
    return Path(importlib.resources.files("elia")) / "fixtures"


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as validation errors (exit 1)."""

    def error(self, message):
        raise UsageError(message)


def _load_or_new_store(store_dir: str):
    if os.path.isdir(store_dir):
        return load_store(store_dir)
    return new_store()


def _load_existing_store(store_dir: str):
    if not os.path.isdir(store_dir):
        raise StoreFormatError(f"{store_dir}: store directory does not exist (run ingest first)")
    return load_store(store_dir)


def _config_from(args) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    return cfg


def cmd_ingest_bol(args, cfg: Config) -> int:
    delimiter = "\t" if args.tab else args.delimiter
    records, report = parse_bol_file(args.path, delimiter=delimiter)
    if args.normalize_products:
        records = [
            dataclasses.replace(rec, product_desc=normalize_product_desc(rec.product_desc),
                                record_id="")
            for rec in records
        ]
    store = _load_or_new_store(args.store)
    added = skipped = 0
    for rec in records:
        if rec.record_id in store.records:
            skipped += 1
        else:
            store.add_record(rec)
            added += 1
    save_store(store, args.store)
    for line_no, reason in report.rejects:
        log.warning("line %d rejected: %s", line_no, reason)
    print(
        f"ingest-bol: accepted={report.accepted} rejected={report.rejected} "
        f"added={added} skipped_existing={skipped}"
    )
    return 0


def cmd_ingest_transcripts(args, cfg: Config) -> int:
    store = _load_or_new_store(args.store)
    extra = tuple(load_gazetteer(args.gazetteer).entries) if args.gazetteer else ()
    gaz = gazetteer_from_store(store, extra=extra)
    added = skipped = total = 0
    for path in args.paths:
        transcript_id, text = load_transcript(path)
        for sentence in segment(text, transcript_id):
            total += 1
            tagged = detect_mentions(sentence, gaz)
            if tagged.id in store.sentences:
                skipped += 1
            else:
                store.add_sentence(tagged)
                added += 1
    save_store(store, args.store)
    print(f"ingest-transcripts: sentences={total} added={added} skipped_existing={skipped}")
    return 0


def _make_backend(args, cfg: Config, sentences):
    if args.backend == "recorded":
        if not args.fixture:
            raise UsageError("--fixture FILE is required with --backend recorded")
        return RecordedBackend.from_fixture(args.fixture, sentences)
    if args.backend == "rule":
        return RuleBasedBackend()
    if args.backend == "live":
        if not cfg.api_endpoint:
            raise ConfigError("api_endpoint must be configured for the live backend")
        if not os.environ.get(cfg.api_key_env):
            raise ConfigError(
                f"environment variable {cfg.api_key_env} is not set; "
                "refusing to select the live backend"
            )
        return HttpCompletionBackend(cfg.api_endpoint, api_key_env=cfg.api_key_env)
    raise UsageError(f"unknown backend: {args.backend!r}")


def cmd_extract(args, cfg: Config) -> int:
    store = _load_existing_store(args.store)
    sentences = list(store.sentences.values())
    kept = prefilter(sentences)
    already = {t.source_id for t in store.triples.values()}
    pending = [s for s in kept if s.id not in already]
    examples_path = args.examples or str(fixtures_dir() / "few_shot.ndjson")
    prompt_cfg = PromptConfig(
        examples=load_examples(examples_path),
        temperature=cfg.temperature,
        model_name=cfg.model_name,
    )
    backend = _make_backend(args, cfg, sentences)
    triples, errors = extract_batch(
        pending, prompt_cfg, backend, concurrency=cfg.concurrency_limit
    )
    for triple in triples:
        store.add_triple(triple)
    save_store(store, args.store)
    for sentence_id, error in errors:
        log.warning("extraction failed for %s: %s", sentence_id, error)
    print(
        f"extract: prefiltered={len(kept)} pending={len(pending)} "
        f"triples={len(triples)} errors={len(errors)}"
    )
    return 0


def cmd_resolve(args, cfg: Config) -> int:
    store = _load_existing_store(args.store)
    threshold = cfg.resolution_threshold if args.threshold is None else args.threshold
    result = resolve(store.referenced_names(), threshold=threshold)
    if args.overrides:
        result = apply_overrides(result, load_overrides(args.overrides))
    store.alias_map = dict(result.alias_map)
    save_store(store, args.store)
    print(f"resolve: names={len(result.alias_map)} entities={len(result.entities)}")
    return 0


def _factor_source(args, cfg: Config):
    sampler = FactorSampler(mean=args.mean, std=args.std, seed=cfg.sampler_seed)
    if args.factors:
        return load_factor_table(args.factors, fallback=sampler)
    if args.constant_factor is not None:
        return EmissionFactor(args.constant_factor, "manual")
    return sampler


def cmd_build(args, cfg: Config) -> int:
    store = _load_existing_store(args.store)
    graph, report = build_graph(store, store.alias_map, _factor_source(args, cfg))
    out = args.out or os.path.join(args.store, GRAPH_FILE)
    export(graph, None, ExportOptions(format="graph_json"), out)
    for ref, reason in report.skipped:
        log.warning("skipped %s: %s", ref, reason)
    print(
        f"build: nodes={len(graph.nodes)} edges={len(graph.edges)} "
        f"(records={report.edges_from_records} triples={report.edges_from_triples} "
        f"skipped={len(report.skipped)}) -> {out}"
    )
    return 0


def cmd_propagate(args, cfg: Config) -> int:
    graph_path = args.graph or os.path.join(args.store, GRAPH_FILE)
    graph = import_graph_json(graph_path)
    mode = args.mode or cfg.propagation_mode
    report = propagate(graph, mode=mode, on_cycle=args.on_cycle)
    out = args.out or os.path.join(args.store, REPORT_FILE)
    save_report_json(report, out)
    total_retained = sum(r.retained_kg for r in report.nodes.values())
    print(
        f"propagate: mode={mode} nodes={len(report.nodes)} "
        f"total_retained_kg={total_retained:.6f} residual={report.residual:.3e} -> {out}"
    )
    return 0


def _resolve_node_arg(graph, value: str) -> str:
    if value in graph.nodes:
        return value
    matches = [nid for nid, node in graph.nodes.items() if node.display_name == value]
    if len(matches) == 1:
        return matches[0]
    if not matches:
        raise UsageError(f"no node with id or display name {value!r}")
    raise UsageError(f"display name {value!r} is ambiguous: {sorted(matches)}")


def cmd_query(args, cfg: Config) -> int:
    graph = import_graph_json(args.graph or os.path.join(args.store, GRAPH_FILE))
    report = None
    report_path = args.report or os.path.join(args.store, REPORT_FILE)
    if os.path.exists(report_path):
        report = load_report_json(report_path)
    params: dict[str, object] = {}
    if args.selector == "top":
        params = {"by": args.by, "k": args.k}
    elif args.selector in ("breakdown", "supplier-count"):
        if not args.node:
            raise UsageError(f"{args.selector} requires --node")
        params = {"node": _resolve_node_arg(graph, args.node)}
    elif args.selector == "item-total":
        if args.prefix is None:
            raise UsageError("item-total requires --prefix")
        params = {"prefix": args.prefix}
    result = query(graph, report, args.selector, **params)
    print(result.render())
    return 0


def cmd_eval(args, cfg: Config) -> int:
    gold = load_triples_flat(args.gold)
    predictions = load_triples_flat(args.pred)
    metrics = score(predictions, gold)
    print(render_metrics_table(metrics))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(metrics_to_dict(metrics), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_export(args, cfg: Config) -> int:
    graph = import_graph_json(args.graph or os.path.join(args.store, GRAPH_FILE))
    report = None
    if args.with_report:
        report = load_report_json(args.report or os.path.join(args.store, REPORT_FILE))
    opts = ExportOptions(
        format=args.format.replace("-", "_"),
        weight_attr=args.weight,
        include_isolates=not args.no_isolates,
    )
    export(graph, report, opts, args.out)
    print(f"export: {args.format} -> {args.out}")
    return 0


def cmd_demo(args, cfg: Config) -> int:
    """Full offline pipeline over the bundled fixtures."""
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    store_dir = str(out_dir / "store")
    fx = fixtures_dir()

    records, _ = parse_bol_file(str(fx / "bol_demo.csv"))
    records = [
        dataclasses.replace(r, product_desc=normalize_product_desc(r.product_desc), record_id="")
        for r in records
    ]
    store = new_store()
    for rec in records:
        store.add_record(rec)

    gaz_entries = load_gazetteer(str(fx / "gazetteer.txt")).entries
    gaz = gazetteer_from_store(store, extra=tuple(gaz_entries))
    for path in sorted((fx / "transcripts").glob("*.txt")):
        transcript_id, text = load_transcript(str(path))
        for sentence in segment(text, transcript_id):
            store.add_sentence(detect_mentions(sentence, gaz))

    kept = prefilter(list(store.sentences.values()))
    prompt_cfg = PromptConfig(
        examples=load_examples(str(fx / "few_shot.ndjson")),
        temperature=cfg.temperature,
        model_name=cfg.model_name,
    )
    backend = RecordedBackend.from_fixture(
        str(fx / "mock_responses.ndjson"), list(store.sentences.values())
    )
    triples, errors = extract_batch(kept, prompt_cfg, backend, concurrency=cfg.concurrency_limit)
    for triple in triples:
        store.add_triple(triple)
    for sentence_id, error in errors:
        log.warning("extraction failed for %s: %s", sentence_id, error)

    result = resolve(store.referenced_names(), threshold=cfg.resolution_threshold)
    store.alias_map = dict(result.alias_map)
    save_store(store, store_dir)

    sampler = FactorSampler(seed=cfg.sampler_seed)
    factors = load_factor_table(str(fx / "factors_demo.ndjson"), fallback=sampler)
    graph, build_report = build_graph(store, store.alias_map, factors)
    for ref, reason in build_report.skipped:
        log.info("graph build skipped %s: %s", ref, reason)
    report = propagate(graph, mode=cfg.propagation_mode)

    graph_path = str(out_dir / "graph.json")
    export(graph, report, ExportOptions(format="graph_json"), graph_path)
    gexf_path = str(out_dir / "graph.gexf")
    export(graph, report, ExportOptions(format="gexf"), gexf_path)
    save_report_json(report, str(out_dir / "report.json"))

    print(f"demo: {len(store.records)} shipments, {len(store.sentences)} sentences, "
          f"{len(triples)} extracted relations, {len(graph.nodes)} companies, "
          f"{len(graph.edges)} edges")
    print()
    print("Top companies by retained liability (kg CO2e):")
    print(query(graph, report, "top", by="retained", k=5).render())
    print()
    print("Extraction scoring on the bundled gold fixture:")
    gold = load_triples_flat(str(fx / "eval" / "gold.ndjson"))
    predictions = load_triples_flat(str(fx / "eval" / "pred.ndjson"))
    print(render_metrics_table(score(predictions, gold)))
    print()
    print(f"demo: store -> {store_dir}")
    print(f"demo: exports -> {graph_path}, {gexf_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="elia", description=__doc__)
    parser.add_argument("--store", default="elia-store", help="dataset store directory")
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-bol", help="parse a bill-of-lading file into the store")
    p.add_argument("path")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--tab", action="store_true", help="tab-delimited input")
    p.add_argument("--normalize-products", action="store_true",
                   help="strip boilerplate from product descriptions")
    p.set_defaults(func=cmd_ingest_bol)

    p = sub.add_parser("ingest-transcripts", help="segment transcripts and detect mentions")
    p.add_argument("paths", nargs="+")
    p.add_argument("--gazetteer", help="file with one company name per line")
    p.set_defaults(func=cmd_ingest_transcripts)

    p = sub.add_parser("extract", help="run the completion backend over prefiltered sentences")
    p.add_argument("--backend", choices=("recorded", "rule", "live"), default="rule")
    p.add_argument("--fixture", help="recorded-response ndjson (recorded backend)")
    p.add_argument("--examples", help="few-shot example ndjson (default: bundled)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("resolve", help="canonicalize company names")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--overrides", help="manual override ndjson {raw, canonical}")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("build", help="build the supply graph and write graph.json")
    p.add_argument("--factors", help="emission-factor table ndjson")
    p.add_argument("--constant-factor", type=float, default=None,
                   help="use one factor (kg CO2e per kg) for every item")
    p.add_argument("--mean", type=float, default=1.0, help="sampler mean")
    p.add_argument("--std", type=float, default=0.25, help="sampler std deviation")
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("propagate", help="compute liability report from graph.json")
    p.add_argument("--mode", choices=("one_hop", "full_propagation"), default=None)
    p.add_argument("--on-cycle", choices=("error", "iterate"), default="error")
    p.add_argument("--graph")
    p.add_argument("--out")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("query", help="aggregate queries over the built graph")
    p.add_argument("selector", choices=("top", "breakdown", "item-total", "supplier-count"))
    p.add_argument("--by", choices=("retained", "inherited"), default="retained")
    p.add_argument("-k", type=int, default=10)
    p.add_argument("--node", help="canonical id or exact display name")
    p.add_argument("--prefix", help="item text prefix for item-total")
    p.add_argument("--graph")
    p.add_argument("--report")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", help="score predictions against gold triples")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out", help="also write metrics as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export", help="write gexf / dot / graph-json")
    p.add_argument("--format", choices=("gexf", "dot", "graph-json"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--weight", choices=("edge_liability", "mass"), default="edge_liability")
    p.add_argument("--no-isolates", action="store_true")
    p.add_argument("--with-report", action="store_true")
    p.add_argument("--graph")
    p.add_argument("--report")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("demo", help="run the full bundled-fixture pipeline offline")
    p.add_argument("--out", default="elia-demo")
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s")
    log.setLevel(logging.INFO)
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.verbose:
            log.setLevel(logging.DEBUG)
        cfg = _config_from(args)
        return args.func(args, cfg)
    except (UsageError, ConfigError, SchemaError, InputError, CycleError,
            DuplicateIdError, ValueError) as exc:
        log.error("%s", exc)
        return 1
    except (StoreFormatError, StoreVersionError, BackendError, ExtractionFormatError) as exc:
        log.error("%s", exc)
        return 2
    except OSError as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
