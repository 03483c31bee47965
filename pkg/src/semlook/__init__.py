"""Relation-based semantic search over RDF/ontology annotated pages."""

from .errors import SemlookError
from .ontobase import Ontobase, OntologyTriplet, PropertyKind, RdfTriplet
from .relation_graph import (
    EnumerationMode,
    OntologyGraph,
    QueryTerm,
    SubgraphPlan,
    build_ontology_graph,
    count_subgraphs,
    enumerate_subgraphs,
    prune_analysis,
)
from .query_engine import QuerySpec, RankedResult, SearchReport, parse_term, resolve_terms, search
from .crawler import CorpusSource, crawl

__all__ = [
    "CorpusSource", "EnumerationMode", "Ontobase", "OntologyGraph", "OntologyTriplet",
    "PropertyKind", "QuerySpec", "QueryTerm", "RankedResult", "RdfTriplet", "SearchReport",
    "SemlookError", "SubgraphPlan", "build_ontology_graph", "count_subgraphs", "crawl",
    "enumerate_subgraphs", "parse_term", "prune_analysis", "resolve_terms", "search",
]

__version__ = "0.1.0"
