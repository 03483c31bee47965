"""Concept-relation graph for a query, least-ranked arc pruning, and plans.

The graph has one vertex per query term. The weight of the arc between two
terms is the number of distinct predicates relating their concepts; pairs
with no predicate have no arc. Arcs are numbered in row-major order over the
upper triangle, and every "arc index" below refers to that numbering.

A subgraph plan removes a set of arcs. Semantic Look only ever removes
``ceil(nl / 2)`` of the ``nl`` minimum-weight arcs, so heavier arcs survive
in every plan. The OntoLook baseline removes ``ceil(N / 2)`` arcs chosen
from all ``N`` arcs.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .errors import InvalidArgs, NoRelationalContext, TooFewTerms, UnknownConcept


class EnumerationMode(enum.Enum):
    SEMANTIC_LOOK = "semlook"
    ONTOLOOK_BASELINE = "ontolook"


@dataclass(frozen=True)
class QueryTerm:
    keyword: int
    concept: int


@dataclass(frozen=True)
class OntologyGraph:
    terms: tuple[QueryTerm, ...]
    weights: tuple[tuple[int | None, ...], ...]  # None marks "no arc"
    relations: Mapping[tuple[int, int], tuple[int, ...]]
    arcs: tuple[tuple[int, int], ...]

    @classmethod
    def from_relations(cls, terms: Sequence[QueryTerm],
                       relations: Mapping[tuple[int, int], Sequence[int]]) -> "OntologyGraph":
        """Assemble a graph from per-pair predicate lists keyed by (i, j), i < j."""
        n = len(terms)
        weights = [[None] * n for _ in range(n)]
        rel: dict[tuple[int, int], tuple[int, ...]] = {}
        arcs = []
        for i in range(n):
            weights[i][i] = 0
            for j in range(i + 1, n):
                preds = tuple(relations.get((i, j), ()))
                if preds:
                    rel[(i, j)] = preds
                    weights[i][j] = weights[j][i] = len(preds)
                    arcs.append((i, j))
        return cls(tuple(terms), tuple(map(tuple, weights)), rel, tuple(arcs))

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    def arc_weight(self, arc: int) -> int:
        i, j = self.arcs[arc]
        return self.weights[i][j]


@dataclass(frozen=True)
class PruneAnalysis:
    lra: int
    least_arcs: tuple[int, ...]

    @property
    def nl(self) -> int:
        return len(self.least_arcs)

    @property
    def nc(self) -> int:
        return math.ceil(self.nl / 2)


@dataclass(frozen=True)
class SubgraphPlan:
    cut: tuple[int, ...]  # sorted arc indices

    def remaining(self, g: OntologyGraph) -> list[int]:
        cut = set(self.cut)
        return [a for a in range(g.n_arcs) if a not in cut]

    def apply(self, g: OntologyGraph) -> list[list[int | None]]:
        """Weight matrix of the subgraph; each cut arc is removed in both directions."""
        osg = [list(row) for row in g.weights]
        for a in self.cut:
            i, j = g.arcs[a]
            osg[i][j] = osg[j][i] = None
        return osg


def build_ontology_graph(terms: Sequence[QueryTerm], store) -> OntologyGraph:
    terms = tuple(terms)
    if len(terms) < 2:
        raise TooFewTerms(f"need at least 2 query terms, got {len(terms)}")
    for t in terms:
        if not store.knows_concept(t.concept):
            raise UnknownConcept(f"concept {store.symbols.text(t.concept)!r} is not in the store")
    relations = {}
    for i, j in itertools.combinations(range(len(terms)), 2):
        relations[(i, j)] = store.relations_between(terms[i].concept, terms[j].concept)
    g = OntologyGraph.from_relations(terms, relations)
    if not g.arcs:
        raise NoRelationalContext("no ontology relation links any pair of query concepts")
    return g


def prune_analysis(g: OntologyGraph) -> PruneAnalysis:
    if not g.arcs:
        raise NoRelationalContext("graph has no arcs")
    weights = [g.arc_weight(a) for a in range(g.n_arcs)]
    lra = min(weights)
    return PruneAnalysis(lra, tuple(a for a, w in enumerate(weights) if w == lra))


def plans_to_cut(mode: EnumerationMode, n_arcs: int, nl: int) -> tuple[int, int]:
    """(pool size, arcs cut per plan) for a mode."""
    if mode is EnumerationMode.SEMANTIC_LOOK:
        return nl, math.ceil(nl / 2)
    return n_arcs, math.ceil(n_arcs / 2)


def enumerate_subgraphs(g: OntologyGraph, mode: EnumerationMode) -> Iterator[SubgraphPlan]:
    """Yield plans in lexicographic order of their cut arc indices.

    If every plan would cut all arcs (a single-arc graph) the unpruned graph
    is yielded as the only plan.
    """
    pa = prune_analysis(g)
    if mode is EnumerationMode.SEMANTIC_LOOK:
        pool, k = pa.least_arcs, pa.nc
    else:
        pool, k = tuple(range(g.n_arcs)), math.ceil(g.n_arcs / 2)
    if k >= g.n_arcs:
        yield SubgraphPlan(())
        return
    for cut in itertools.combinations(pool, k):
        yield SubgraphPlan(cut)


def count_subgraphs(mode: EnumerationMode, n_arcs: int, nl: int) -> int:
    if n_arcs < 0 or nl < 0 or nl > n_arcs:
        raise InvalidArgs(f"need 0 <= nl <= n_arcs, got nl={nl}, n_arcs={n_arcs}")
    pool, k = plans_to_cut(mode, n_arcs, nl)
    return math.comb(pool, k)


def plan_count(g: OntologyGraph, mode: EnumerationMode) -> int:
    """Number of plans enumerate_subgraphs yields for ``g`` (degenerate guard included)."""
    pa = prune_analysis(g)
    return count_subgraphs(mode, g.n_arcs, pa.nl)
