"""End-to-end query execution over an Ontobase.

For each subgraph plan, every surviving arc (i, j) is expanded into one
triplet query per predicate relating the two concepts. A page satisfies an
arc if it holds any of those triplets in either orientation; a page
satisfies a plan if it satisfies every surviving arc. The answer is the
union over plans, ranked by how many distinct query triplets each page
holds.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import TooFewTerms, TooManyTerms, UnknownConcept, UnresolvedConcept
from .relation_graph import (
    EnumerationMode,
    OntologyGraph,
    QueryTerm,
    SubgraphPlan,
    build_ontology_graph,
    enumerate_subgraphs,
)

MAX_TERMS = 16


@dataclass(frozen=True)
class QuerySpec:
    terms: tuple[QueryTerm, ...]
    mode: EnumerationMode = EnumerationMode.SEMANTIC_LOOK

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(self.terms) < 2:
            raise TooFewTerms(f"need at least 2 query terms, got {len(self.terms)}")
        if len(self.terms) > MAX_TERMS:
            raise TooManyTerms(f"at most {MAX_TERMS} query terms, got {len(self.terms)}")


@dataclass(frozen=True)
class RankedResult:
    url: str
    score: int


@dataclass
class SearchReport:
    mode: EnumerationMode
    subgraphs_processed: int = 0
    triplet_queries_generated: int = 0
    triplet_queries_executed: int = 0
    elapsed: float = 0.0  # milliseconds


@dataclass(frozen=True)
class SearchConfig:
    workers: int = 1
    chunk_size: int = 256


def parse_term(text: str) -> tuple[str, str | None]:
    """Split ``keyword[:Concept]``."""
    keyword, sep, concept = text.partition(":")
    return keyword.strip(), (concept.strip() or None) if sep else None


def resolve_terms(store, pairs: Iterable[tuple[str, str | None]]) -> list[QueryTerm]:
    """Turn (keyword, concept-or-None) pairs into QueryTerms against ``store``."""
    terms = []
    for keyword, concept in pairs:
        kw = store.symbols.lookup(keyword)
        if concept is None:
            resolved = store.concept_of_instance(kw) if kw is not None else None
            if resolved is None:
                raise UnresolvedConcept(keyword)
        else:
            resolved = store.symbols.lookup(concept)
            if resolved is None or not store.knows_concept(resolved):
                raise UnknownConcept(f"concept {concept!r} is not in the store")
        if kw is None:
            kw = store.intern(keyword)
        terms.append(QueryTerm(kw, resolved))
    return terms


class TripletCache:
    """Memo of (keyword, predicate, keyword) -> pages, safe for concurrent use."""

    def __init__(self, store):
        self._store = store
        self._memo: dict[tuple[int, int, int], frozenset[str]] = {}
        self._lock = threading.Lock()

    def get(self, key: tuple[int, int, int]) -> frozenset[str]:
        found = self._memo.get(key)
        if found is None:
            with self._lock:
                found = self._memo.get(key)
                if found is None:
                    found = self._store.pages_matching(*key)
                    self._memo[key] = found
        return found

    def __len__(self):
        return len(self._memo)


def edge_urls(g: OntologyGraph, arc: int, cache: TripletCache) -> frozenset[str]:
    i, j = g.arcs[arc]
    ki, kj = g.terms[i].keyword, g.terms[j].keyword
    urls: set[str] = set()
    for r in g.relations[(i, j)]:
        urls |= cache.get((ki, r, kj))
    return frozenset(urls)


def urls_for_subgraph(plan: SubgraphPlan, g: OntologyGraph, store,
                      cache: TripletCache | None = None) -> set[str]:
    cache = cache if cache is not None else TripletCache(store)
    result: set[str] | None = None
    # every arc is looked up, even once the intersection is empty, so that
    # the executed-query counter only drops below the generated one on repeats
    for arc in plan.remaining(g):
        urls = edge_urls(g, arc, cache)
        result = set(urls) if result is None else result & urls
    return result or set()


def rank_results(matches: Mapping[str, int]) -> list[RankedResult]:
    return [RankedResult(url, score)
            for url, score in sorted(matches.items(), key=lambda kv: (-kv[1], kv[0]))]


def score_pages(urls: Iterable[str], g: OntologyGraph, store) -> dict[str, int]:
    """Distinct query triplets (either orientation, all arcs) held by each page."""
    patterns = set()
    for (i, j), preds in g.relations.items():
        ki, kj = g.terms[i].keyword, g.terms[j].keyword
        for r in preds:
            patterns.add((ki, r, kj))
            patterns.add((kj, r, ki))
    wanted = set(urls)
    scores = dict.fromkeys(wanted, 0)
    for pattern in patterns:
        for url in store.pages_with(*pattern) & wanted:
            scores[url] += 1
    return scores


def _chunks(iterable, size):
    chunk = []
    for item in iterable:
        chunk.append(item)
        if len(chunk) == size:
            yield chunk
            chunk = []
    if chunk:
        yield chunk


def search(spec: QuerySpec, store, config: SearchConfig | None = None):
    """Run a query; returns (ranked results, SearchReport)."""
    config = config or SearchConfig()
    started = time.perf_counter()
    g = build_ontology_graph(spec.terms, store)
    cache = TripletCache(store)
    arc_sizes = [len(g.relations[arc]) for arc in g.arcs]
    total_size = sum(arc_sizes)
    arc_urls = {}

    def run_chunk(plans: Sequence[SubgraphPlan]):
        found: set[str] = set()
        generated = 0
        for plan in plans:
            generated += total_size - sum(arc_sizes[a] for a in plan.cut)
            result = None
            for arc in plan.remaining(g):
                urls = arc_urls.get(arc)
                if urls is None:
                    urls = arc_urls.setdefault(arc, edge_urls(g, arc, cache))
                result = set(urls) if result is None else result & urls
            if result:
                found |= result
        return found, generated, len(plans)

    chunks = _chunks(enumerate_subgraphs(g, spec.mode), config.chunk_size)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(run_chunk, chunks))
    else:
        outcomes = [run_chunk(c) for c in chunks]

    report = SearchReport(spec.mode)
    found: set[str] = set()
    for urls, generated, n_plans in outcomes:
        found |= urls
        report.triplet_queries_generated += generated
        report.subgraphs_processed += n_plans
    report.triplet_queries_executed = len(cache)
    ranked = rank_results(score_pages(found, g, store))
    report.elapsed = (time.perf_counter() - started) * 1000.0
    return ranked, report
