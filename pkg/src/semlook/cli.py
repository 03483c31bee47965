"""Command-line entry point: ``semlook <subcommand> ...``.

Exit status is 0 on success, 1 on domain errors and 2 on usage errors.
Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from pathlib import Path

from .bench import BenchTable, CorpusParams, GraphShape, bench_query, generate_corpus, run_bench
from .crawler import CorpusSource, crawl, read_manifest
from .errors import SemlookError
from .ontobase import Ontobase
from .query_engine import QuerySpec, SearchConfig, parse_term, resolve_terms, search
from .relation_graph import EnumerationMode, count_subgraphs

MODES = {m.value: m for m in EnumerationMode}


class _UsageError(Exception):
    pass


def _db_path(args) -> Path:
    path = args.db or os.environ.get("SEMLOOK_DB")
    if not path:
        raise _UsageError("--db is required (or set SEMLOOK_DB)")
    return Path(path)


def _open_store(args, must_exist=True) -> Ontobase:
    path = _db_path(args)
    lam = getattr(args, "lambda_", 1)
    if path.exists():
        return Ontobase.load(path, lambda_=lam)
    if must_exist:
        raise SemlookError(f"store not found: {path}")
    return Ontobase(lambda_=lam)


def cmd_crawl(args, out) -> int:
    pages = read_manifest(args.manifest) if args.manifest else None
    source = CorpusSource.from_location(args.source, pages)
    store = _open_store(args, must_exist=False)
    report = crawl(source, store, workers=args.workers)
    store.persist(_db_path(args))
    for url, msg in report.warnings:
        print(f"warning: {url}: {msg}", file=sys.stderr)
    print(f"pages_visited {report.pages_visited}", file=out)
    print(f"annotation_docs_parsed {report.annotation_docs_parsed}", file=out)
    print(f"ontology_triplets {report.ontology_triplets}", file=out)
    print(f"rdf_triplets {report.rdf_triplets}", file=out)
    print(f"warnings {len(report.warnings)}", file=out)
    return 0


def cmd_query(args, out) -> int:
    store = _open_store(args)
    terms = resolve_terms(store, [parse_term(t) for t in args.term])
    spec = QuerySpec(terms, MODES[args.mode])
    results, report = search(spec, store, SearchConfig(workers=args.workers))
    if args.report == "json":
        doc = {
            "mode": report.mode.value,
            "subgraphs_processed": report.subgraphs_processed,
            "triplet_queries_generated": report.triplet_queries_generated,
            "triplet_queries_executed": report.triplet_queries_executed,
            "elapsed_ms": round(report.elapsed, 3),
            "results": [{"url": r.url, "score": r.score} for r in results],
        }
        print(json.dumps(doc), file=out)
    else:
        for rank, r in enumerate(results, 1):
            print(f"{rank:4d}  {r.score:4d}  {r.url}", file=out)
        print(f"# mode={report.mode.value} subgraphs={report.subgraphs_processed} "
              f"generated={report.triplet_queries_generated} "
              f"executed={report.triplet_queries_executed} "
              f"elapsed_ms={report.elapsed:.3f}", file=out)
    return 0


def cmd_count(args, out) -> int:
    mode = MODES[args.mode]
    least = args.least
    if least is None:
        if mode is EnumerationMode.SEMANTIC_LOOK:
            raise _UsageError("count --mode semlook needs --least")
        least = args.arcs
    print(count_subgraphs(mode, args.arcs, least), file=out)
    return 0


def cmd_gen_corpus(args, out) -> int:
    params = CorpusParams(num_pages=args.pages, num_concepts=args.concepts,
                          instances_per_concept=args.instances, seed=args.seed,
                          total_rdf_triplets=args.rdf_triplets,
                          total_ontology_triplets=args.ontology_triplets)
    shape = None
    if args.shape:
        try:
            shape = GraphShape(*(int(x) for x in args.shape.split(",")))
        except (TypeError, ValueError) as exc:
            raise _UsageError(f"--shape expects KEYWORDS,ARCS,LEAST: {exc}") from None
    try:
        manifest = generate_corpus(params, args.out, shape)
    except ValueError as exc:
        raise SemlookError(str(exc)) from None
    except OSError as exc:
        raise SemlookError(f"cannot write corpus: {exc}") from None
    print(json.dumps({"pages": len(manifest.pages),
                      "ontology_triplets": manifest.ontology_triplets,
                      "rdf_triplets": manifest.rdf_triplets,
                      "query": manifest.query}), file=out)
    return 0


def _load_rows(path):
    try:
        rows = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SemlookError(f"cannot read rows file {path}: {exc}") from None
    if not isinstance(rows, list):
        raise SemlookError("rows file must hold a JSON list")
    return rows


def cmd_bench(args, out) -> int:
    rows = _load_rows(args.rows)
    table = []
    store = None
    for entry in rows:
        if "terms" in entry:
            store = store or _open_store(args)
            table.append(bench_query(entry["terms"], store, args.repeats, args.max_timed_plans))
        else:
            shape = GraphShape(entry["keywords"], entry["arcs"], entry["least"])
            corpus = entry.get("corpus", {})
            for key in ("predicates_per_pair", "triplets_per_page"):
                if key in corpus:
                    corpus[key] = tuple(corpus[key])
            params = CorpusParams(**corpus)
            table.extend(run_bench([(shape, params)], args.repeats, args.max_timed_plans).rows)
    result = BenchTable(table)
    out.write(result.to_csv() if args.emit == "csv" else result.to_markdown())
    return 0


def cmd_inspect(args, out) -> int:
    store = _open_store(args)
    text = store.symbols.text
    support = Counter()
    for t in store.rdf_triplets():
        support[text(t.predicate)] += 1
    doc = {**store.counts(), "predicate_support": dict(sorted(support.items()))}
    if args.format == "json":
        print(json.dumps(doc), file=out)
    else:
        for key in ("pages", "ontology_triplets", "rdf_triplets", "instances"):
            print(f"{key} {doc[key]}", file=out)
        for pred, n in doc["predicate_support"].items():
            print(f"  {pred} {n}", file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semlook", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def with_db(p):
        p.add_argument("--db", help="store file (default: $SEMLOOK_DB)")
        return p

    p = with_db(sub.add_parser("crawl", help="ingest a corpus into the store"))
    p.add_argument("--source", required=True, help="corpus directory or base URL")
    p.add_argument("--manifest", help="file listing one page reference per line")
    p.add_argument("--lambda", dest="lambda_", type=int, default=1,
                   help="minimum per-page predicate support (default 1)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_crawl)

    p = with_db(sub.add_parser("query", help="run a query against the store"))
    p.add_argument("--mode", choices=sorted(MODES), default="semlook")
    p.add_argument("-t", "--term", action="append", required=True, metavar="KEYWORD[:CONCEPT]")
    p.add_argument("--report", choices=["json", "text"], default="text")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("count", help="number of subgraphs processed for N arcs / nl least arcs")
    p.add_argument("--mode", choices=sorted(MODES), required=True)
    p.add_argument("--arcs", type=int, required=True)
    p.add_argument("--least", type=int)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("gen-corpus", help="write a seeded synthetic corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pages", type=int, default=40)
    p.add_argument("--concepts", type=int, default=12)
    p.add_argument("--instances", type=int, default=3)
    p.add_argument("--rdf-triplets", type=int)
    p.add_argument("--ontology-triplets", type=int)
    p.add_argument("--shape", help="plant a query: KEYWORDS,ARCS,LEAST")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_corpus)

    p = with_db(sub.add_parser("bench", help="compare both enumeration modes"))
    p.add_argument("--rows", required=True, help="JSON list of row configs")
    p.add_argument("--emit", choices=["csv", "md"], default="csv")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--max-timed-plans", type=int, default=1_000_000)
    p.set_defaults(func=cmd_bench)

    p = with_db(sub.add_parser("inspect", help="print store statistics"))
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args, out)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"semlook: error: {exc}", file=sys.stderr)
        return 2
    except SemlookError as exc:
        print(f"semlook: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"semlook: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
