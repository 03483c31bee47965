"""Synthetic corpora, a brute-force search oracle, and the benchmark harness.

Corpora are a pure function of :class:`CorpusParams` (and an optional
:class:`GraphShape` that plants a query with a known arc count and number
of least-weight arcs). Files are written in the annotation formats the
crawler ingests, together with ``manifest.txt`` (one page per line) and
``manifest.json`` (expected counts and the planted query).
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
import statistics
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .annotations import OntologyStatement, ParsedOntology, ParsedRdf, emit_ontology, emit_rdf
from .crawler import CorpusSource, crawl
from .errors import TooLarge
from .ontobase import Ontobase, PropertyKind
from .query_engine import QuerySpec, RankedResult, SearchConfig, parse_term, resolve_terms, search
from .relation_graph import (
    EnumerationMode,
    build_ontology_graph,
    count_subgraphs,
    plan_count,
    prune_analysis,
)

ORACLE_MAX_ARCS = 16


@dataclass(frozen=True)
class CorpusParams:
    num_pages: int = 40
    num_concepts: int = 12
    predicates_per_pair: tuple[int, int] = (0, 2)
    instances_per_concept: int = 3
    triplets_per_page: tuple[int, int] = (5, 12)
    seed: int = 0
    total_rdf_triplets: int | None = None
    total_ontology_triplets: int | None = None


@dataclass(frozen=True)
class GraphShape:
    """A planted query: ``keywords`` concepts joined by ``n_arcs`` arcs, ``n_least`` of minimum weight.

    The planted graph is connected, so every keyword has at least one arc.
    """
    keywords: int
    n_arcs: int
    n_least: int

    def __post_init__(self):
        pairs = self.keywords * (self.keywords - 1) // 2
        if not (self.keywords >= 2 and 1 <= self.n_least <= self.n_arcs <= pairs
                and self.n_arcs >= self.keywords - 1):
            raise ValueError(f"impossible graph shape {self}")


@dataclass
class CorpusManifest:
    pages: list[str]
    ontology_triplets: int
    rdf_triplets: int
    query: list[str] = field(default_factory=list)
    seed: int = 0


def _distribute(total: int, slots: int, rng: random.Random) -> list[int]:
    counts = [0] * slots
    for slot in rng.choices(range(slots), k=total):
        counts[slot] += 1
    return counts


def _design_ontology(params: CorpusParams, shape: GraphShape | None, rng: random.Random):
    """Per-concept-pair predicate counts as {(i, j): n}."""
    lo, hi = params.predicates_per_pair
    pairs = [(i, j) for i in range(params.num_concepts) for j in range(i + 1, params.num_concepts)]
    counts: dict[tuple[int, int], int] = {}
    if shape is not None:
        query_pairs = [p for p in pairs if p[1] < shape.keywords]
        # random spanning tree first, then fill up with arbitrary pairs
        order = list(range(shape.keywords))
        rng.shuffle(order)
        tree = {tuple(sorted((order[k], rng.choice(order[:k])))) for k in range(1, len(order))}
        rest = [p for p in query_pairs if p not in tree]
        present = sorted(tree | set(rng.sample(rest, shape.n_arcs - len(tree))))
        light = set(rng.sample(present, shape.n_least))
        base = max(lo, 1)
        for p in query_pairs:
            if p not in present:
                counts[p] = 0
            elif p in light:
                counts[p] = base
            else:
                counts[p] = rng.randint(base + 1, max(hi, base + 1))
    free = [p for p in pairs if p not in counts]
    rng.shuffle(free)
    if params.total_ontology_triplets is None:
        for p in free:
            counts[p] = rng.randint(lo, hi)
        return counts
    remaining = params.total_ontology_triplets - sum(counts.values())
    if remaining < 0:
        raise ValueError("planted query needs more ontology triplets than requested")
    for p in free:
        n = min(rng.randint(max(lo, 1), max(hi, 1)), remaining)
        counts[p] = n
        remaining -= n
    if remaining:
        raise ValueError("not enough concept pairs to place the requested ontology triplets")
    return counts


def synthesize(params: CorpusParams, shape: GraphShape | None = None):
    """Build the corpus in memory: (pages, manifest) where pages maps name -> documents."""
    if min(params.num_pages, params.num_concepts, params.instances_per_concept) < 1:
        raise ValueError("corpus counts must be >= 1")
    if shape is not None and shape.keywords > params.num_concepts:
        raise ValueError("graph shape needs more concepts than the corpus has")
    rng = random.Random(params.seed)
    concepts = [f"Concept{i:02d}" for i in range(params.num_concepts)]
    instances = {c: [f"{c.lower()}_{k}" for k in range(params.instances_per_concept)]
                 for c in concepts}

    kinds = list(PropertyKind)
    ontology: list[OntologyStatement] = []
    by_pair: dict[tuple[int, int], list[OntologyStatement]] = {}
    for (i, j), n in sorted(_design_ontology(params, shape, rng).items()):
        for _ in range(n):
            d, r = (i, j) if rng.random() < 0.5 else (j, i)
            kind = kinds[0] if rng.random() < 0.8 else rng.choice(kinds[1:])
            st = OntologyStatement(concepts[d], f"rel{len(ontology):03d}", concepts[r], kind)
            ontology.append(st)
            by_pair.setdefault((i, j), []).append(st)

    page_names = [f"page_{k:03d}.html" for k in range(params.num_pages)]
    order = list(ontology)
    rng.shuffle(order)
    onto_slices = [order[k::params.num_pages] for k in range(params.num_pages)]

    if params.total_rdf_triplets is not None:
        rdf_counts = _distribute(params.total_rdf_triplets, params.num_pages, rng)
    else:
        rdf_counts = [rng.randint(*params.triplets_per_page) for _ in page_names]
    # distinct (subject, predicate, object) triplets one page can hold
    capacity = len(ontology) * params.instances_per_concept ** 2
    if params.total_rdf_triplets is not None:
        if max(rdf_counts, default=0) > capacity:
            raise ValueError("cannot place the requested RDF triplets; "
                             "raise instances_per_concept or the ontology size")
    else:
        rdf_counts = [min(n, capacity) for n in rdf_counts]

    query_kw = []
    if shape is not None:
        query_kw = [instances[concepts[i]][0] for i in range(shape.keywords)]
    query_arcs = sorted(p for p in by_pair if shape is not None and p[1] < shape.keywords)

    pages = {}
    for k, name in enumerate(page_names):
        wanted = rdf_counts[k]
        triplets: list[tuple[str, str, str]] = []
        seen = set()
        imap: dict[str, str] = {}

        def add(s, st, o):
            if (s, st.predicate, o) in seen or len(triplets) >= wanted:
                return
            seen.add((s, st.predicate, o))
            triplets.append((s, st.predicate, o))
            imap[s] = st.domain
            imap[o] = st.range

        if query_arcs and rng.random() < 0.6:
            for i, j in query_arcs:
                if rng.random() < 0.7:
                    st = rng.choice(by_pair[(i, j)])
                    s_kw = query_kw[concepts.index(st.domain)]
                    o_kw = query_kw[concepts.index(st.range)]
                    add(s_kw, st, o_kw)
        if 2 * wanted > capacity:
            candidates = [(s, st, o) for st in ontology
                          for s in instances[st.domain] for o in instances[st.range]]
            rng.shuffle(candidates)
            for s, st, o in candidates:
                add(s, st, o)
        while len(triplets) < wanted:
            st = rng.choice(ontology)
            add(rng.choice(instances[st.domain]), st, rng.choice(instances[st.range]))

        docs = {}
        base = name[:-len(".html")]
        if onto_slices[k]:
            docs[f"annotations/{base}.owl"] = emit_ontology(ParsedOntology(onto_slices[k]))
        if triplets:
            docs[f"annotations/{base}.rdf"] = emit_rdf(ParsedRdf(triplets, dict(sorted(imap.items()))))
        pages[name] = (_page_html(name, list(docs), rng), docs)

    manifest = CorpusManifest(page_names, len(ontology), sum(rdf_counts),
                              [f"{kw}:{concepts[i]}" for i, kw in enumerate(query_kw)], params.seed)
    return pages, manifest


def _page_html(name: str, doc_refs: list[str], rng: random.Random) -> bytes:
    topic = rng.choice(["hotels", "monuments", "travel", "restaurants", "museums"])
    links = "\n".join(f'  <link rel="meta" type="application/rdf+xml" href="{ref}">'
                      for ref in doc_refs)
    return (f"<!DOCTYPE html>\n<html>\n<head>\n  <title>{name}</title>\n"
            f'  <link rel="stylesheet" type="text/css" href="style.css">\n{links}\n'
            f"</head>\n<body>\n<p>A page about {topic}.</p>\n</body>\n</html>\n").encode("utf-8")


def generate_corpus(params: CorpusParams, out, shape: GraphShape | None = None) -> CorpusManifest:
    """Write a corpus under ``out``; same params give byte-identical files."""
    out = Path(out)
    pages, manifest = synthesize(params, shape)
    out.mkdir(parents=True, exist_ok=True)
    for name, (html, docs) in pages.items():
        (out / name).write_bytes(html)
        for ref, data in docs.items():
            path = out / ref
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
    (out / "manifest.txt").write_text("\n".join(manifest.pages) + "\n", encoding="utf-8")
    (out / "manifest.json").write_text(json.dumps(asdict(manifest), indent=2) + "\n", encoding="utf-8")
    return manifest


def load_generated(params: CorpusParams, shape: GraphShape | None = None, workdir=None):
    """Generate a corpus into ``workdir`` (a temp dir by default) and crawl it."""
    workdir = Path(workdir) if workdir else Path(tempfile.mkdtemp(prefix="semlook-"))
    manifest = generate_corpus(params, workdir, shape)
    store = Ontobase()
    report = crawl(CorpusSource.directory(workdir), store)
    return store, manifest, report


# -- oracle -----------------------------------------------------------------

def _k_subsets(items, k):
    """All k-element subsets of ``items`` in lexicographic order (recursive)."""
    if k == 0:
        yield ()
        return
    for pos in range(len(items) - k + 1):
        for rest in _k_subsets(items[pos + 1:], k - 1):
            yield (items[pos],) + rest


def oracle_search(spec: QuerySpec, store) -> list[RankedResult]:
    """Recompute a search by brute force over the raw triplet lists.

    Uses none of the store's indexes and none of the query engine's code:
    arcs come from scanning ontology triplets, page matches from scanning
    RDF triplets, and plans from explicit subset enumeration.
    """
    terms = spec.terms
    n = len(terms)
    onto = store.ontology_triplets()
    arcs, preds = [], []
    for i in range(n):
        for j in range(i + 1, n):
            ci, cj = terms[i].concept, terms[j].concept
            found = {t.predicate for t in onto
                     if (t.domain, t.range) in ((ci, cj), (cj, ci))}
            if found:
                arcs.append((i, j))
                preds.append(found)
    if not arcs:
        return []
    if len(arcs) > ORACLE_MAX_ARCS:
        raise TooLarge(f"oracle limited to {ORACLE_MAX_ARCS} arcs, query has {len(arcs)}")

    weights = [len(p) for p in preds]
    if spec.mode is EnumerationMode.SEMANTIC_LOOK:
        light = min(weights)
        pool = [a for a, w in enumerate(weights) if w == light]
    else:
        pool = list(range(len(arcs)))
    k = (len(pool) + 1) // 2
    cuts = [()] if k == len(arcs) else list(_k_subsets(pool, k))

    # per page: which arcs it satisfies, and which query triplets it holds
    satisfied: dict[str, set[int]] = {}
    held: dict[str, set[tuple[int, int, int]]] = {}
    for t in store.rdf_triplets():
        for a, (i, j) in enumerate(arcs):
            ki, kj = terms[i].keyword, terms[j].keyword
            if t.predicate in preds[a] and (t.subject, t.object) in ((ki, kj), (kj, ki)):
                satisfied.setdefault(t.page_url, set()).add(a)
                held.setdefault(t.page_url, set()).add((t.subject, t.predicate, t.object))

    answer = set()
    for cut in cuts:
        remaining = [a for a in range(len(arcs)) if a not in cut]
        for url, arcs_ok in satisfied.items():
            if all(a in arcs_ok for a in remaining):
                answer.add(url)
    scored = [(len(held[url]), url) for url in answer]
    scored.sort(key=lambda su: su[1])
    scored.sort(key=lambda su: su[0], reverse=True)
    return [RankedResult(url, score) for score, url in scored]


def recount_generated(spec: QuerySpec, store) -> int:
    """Independent recount of triplet queries generated (with duplicates)."""
    terms = spec.terms
    onto = store.ontology_triplets()
    sizes = []
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            ci, cj = terms[i].concept, terms[j].concept
            found = {t.predicate for t in onto if (t.domain, t.range) in ((ci, cj), (cj, ci))}
            if found:
                sizes.append(len(found))
    if spec.mode is EnumerationMode.SEMANTIC_LOOK:
        pool = [a for a, w in enumerate(sizes) if w == min(sizes)]
    else:
        pool = list(range(len(sizes)))
    k = (len(pool) + 1) // 2
    if k == len(sizes):
        return sum(sizes)
    # each arc in the pool survives in C(|pool|-1, k) plans; arcs outside it in all of them
    plans = math.comb(len(pool), k)
    survive = math.comb(len(pool) - 1, k)
    in_pool = set(pool)
    return sum(w * (survive if a in in_pool else plans) for a, w in enumerate(sizes))


# -- benchmark --------------------------------------------------------------

@dataclass
class BenchRow:
    keywords: int
    relations_olook: int
    relations_slook: int
    subgraphs_olook: int
    subgraphs_slook: int
    triplets_olook: int
    triplets_slook: int
    time_olook_ms: float | None
    time_slook_ms: float | None


CSV_COLUMNS = ["keywords", "N", "nl", "subgraphs_olook", "subgraphs_slook",
               "triplets_olook", "triplets_slook", "ms_olook", "ms_slook"]


@dataclass
class BenchTable:
    rows: list[BenchRow]

    def _cells(self, row: BenchRow):
        def ms(v):
            return "" if v is None else f"{v:.4f}"
        return [row.keywords, row.relations_olook, row.relations_slook, row.subgraphs_olook,
                row.subgraphs_slook, row.triplets_olook, row.triplets_slook,
                ms(row.time_olook_ms), ms(row.time_slook_ms)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow(self._cells(row))
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = ["| " + " | ".join(CSV_COLUMNS) + " |",
                 "|" + "---|" * len(CSV_COLUMNS)]
        for row in self.rows:
            lines.append("| " + " | ".join(str(c) for c in self._cells(row)) + " |")
        return "\n".join(lines) + "\n"


def time_search(spec: QuerySpec, store, repeats: int = 5, warmup: int = 1,
                config: SearchConfig | None = None):
    """Median wall time in ms over ``repeats`` runs after ``warmup`` runs; also the last report."""
    for _ in range(warmup):
        search(spec, store, config)
    times = []
    report = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        _, report = search(spec, store, config)
        times.append((time.perf_counter() - t0) * 1000.0)
    return statistics.median(times), report


def bench_query(terms: Sequence[str], store, repeats: int = 5,
                max_timed_plans: int = 1_000_000) -> BenchRow:
    """Run one query in both modes. Modes whose plan count exceeds ``max_timed_plans`` are not timed."""
    resolved = resolve_terms(store, [parse_term(t) for t in terms])
    out = {}
    for mode in (EnumerationMode.ONTOLOOK_BASELINE, EnumerationMode.SEMANTIC_LOOK):
        spec = QuerySpec(resolved, mode)
        g = build_ontology_graph(resolved, store)
        plans = plan_count(g, mode)
        pa = prune_analysis(g)
        if plans <= max_timed_plans:
            ms, report = time_search(spec, store, repeats=repeats)
            triplets = report.triplet_queries_generated
        else:
            ms, triplets = None, recount_generated(spec, store)
        out[mode] = (g.n_arcs, pa.nl, plans, triplets, ms)
    n, nl, sub_o, trip_o, ms_o = out[EnumerationMode.ONTOLOOK_BASELINE]
    _, _, sub_s, trip_s, ms_s = out[EnumerationMode.SEMANTIC_LOOK]
    return BenchRow(len(resolved), n, nl, sub_o, sub_s, trip_o, trip_s, ms_o, ms_s)


def run_bench(rows: Sequence[tuple[GraphShape, CorpusParams]], repeats: int = 5,
              max_timed_plans: int = 1_000_000, workdir=None) -> BenchTable:
    """Generate one corpus per row, crawl it, and compare both modes on its planted query."""
    table = []
    for k, (shape, params) in enumerate(rows):
        sub = Path(workdir) / f"row{k}" if workdir else None
        store, manifest, _ = load_generated(params, shape, sub)
        row = bench_query(manifest.query, store, repeats, max_timed_plans)
        expected = (count_subgraphs(EnumerationMode.ONTOLOOK_BASELINE, shape.n_arcs, shape.n_least),
                    count_subgraphs(EnumerationMode.SEMANTIC_LOOK, shape.n_arcs, shape.n_least))
        assert (row.subgraphs_olook, row.subgraphs_slook) == expected, (row, expected)
        table.append(row)
    return BenchTable(table)


# reference benchmark shapes: (keywords, N, nl)
BENCH_SHAPES = [GraphShape(8, 25, 10), GraphShape(7, 18, 6), GraphShape(5, 9, 3),
                 GraphShape(4, 5, 2), GraphShape(3, 3, 2)]


def default_rows(seed: int = 7) -> list[tuple[GraphShape, CorpusParams]]:
    return [(shape, CorpusParams(num_pages=40, num_concepts=max(12, shape.keywords),
                                 predicates_per_pair=(0, 3), seed=seed + k))
            for k, shape in enumerate(BENCH_SHAPES)]
