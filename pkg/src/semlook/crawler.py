"""Corpus traversal: pages -> annotation documents -> Ontobase.

Two corpus kinds are supported. A directory corpus is every ``*.html``
file under a root, visited in sorted path order. An HTTP corpus is a base
URL plus an explicit page manifest; there is no hyperlink spidering.

Fetching and parsing may run on a thread pool. Store insertion happens
afterwards in three sequential phases (ontology triplets, instance
declarations, RDF triplets) so the final store does not depend on page
order or scheduling.
"""

from __future__ import annotations

import enum
import logging
import posixpath
import time
import urllib.error
import urllib.parse
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .annotations import (
    DocumentKind,
    ParsedOntology,
    ParsedRdf,
    classify_document,
    extract_annotation_links,
    parse_ontology_document,
    parse_rdf_document,
)
from .errors import DanglingOntologyRef, FetchError, InvalidName, MalformedDocument, SourceUnavailable
from .ontobase import Ontobase, OntologyTriplet, RdfTriplet, apply_support_threshold

log = logging.getLogger(__name__)


class SourceKind(enum.Enum):
    DIRECTORY = "Directory"
    HTTP_BASE = "HttpBase"


@dataclass(frozen=True)
class CorpusSource:
    kind: SourceKind
    root: str
    page_list: tuple[str, ...] | None = None

    @classmethod
    def directory(cls, root, page_list=None) -> "CorpusSource":
        return cls(SourceKind.DIRECTORY, str(root), tuple(page_list) if page_list else None)

    @classmethod
    def http(cls, base_url: str, page_list) -> "CorpusSource":
        if not base_url.endswith("/"):
            base_url += "/"
        return cls(SourceKind.HTTP_BASE, base_url, tuple(page_list))

    @classmethod
    def from_location(cls, location: str, page_list=None) -> "CorpusSource":
        if urllib.parse.urlsplit(location).scheme in ("http", "https"):
            if not page_list:
                raise SourceUnavailable("an HTTP source needs a page manifest")
            return cls.http(location, page_list)
        return cls.directory(location, page_list)


@dataclass
class CrawlReport:
    pages_visited: int = 0
    annotation_docs_parsed: int = 0
    ontology_triplets: int = 0
    rdf_triplets: int = 0
    rdf_emitted: int = 0
    rdf_duplicates: int = 0
    rdf_rejected: int = 0
    warnings: list[tuple[str, str]] = field(default_factory=list)
    elapsed: float = 0.0  # milliseconds


def read_manifest(path) -> list[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]


def resolve(ref: str, source: CorpusSource, base: str | None = None) -> str:
    """Resolve ``ref`` (relative to page ``base``) to a corpus-level reference."""
    if source.kind is SourceKind.HTTP_BASE:
        anchor = urllib.parse.urljoin(source.root, base) if base else source.root
        url = urllib.parse.urldefrag(urllib.parse.urljoin(anchor, ref))[0]
        if not url.startswith(source.root):
            raise FetchError(ref, "outside the corpus base URL")
        return url
    if urllib.parse.urlsplit(ref).scheme or ref.startswith("//"):
        raise FetchError(ref, "absolute URL outside the corpus directory")
    ref = ref.split("#", 1)[0]
    if ref.startswith("/"):
        joined = ref.lstrip("/")
    else:
        joined = posixpath.join(posixpath.dirname(base) if base else "", ref)
    normal = posixpath.normpath(joined)
    if normal == ".." or normal.startswith("../") or normal.startswith("/"):
        raise FetchError(ref, "outside the corpus directory")
    return normal


def fetch(ref: str, source: CorpusSource, base: str | None = None, timeout: float = 10.0) -> bytes:
    target = resolve(ref, source, base)
    if source.kind is SourceKind.HTTP_BASE:
        try:
            with urllib.request.urlopen(target, timeout=timeout) as resp:
                if resp.status != 200:
                    raise FetchError(target, f"HTTP {resp.status}")
                return resp.read()
        except urllib.error.HTTPError as exc:
            raise FetchError(target, f"HTTP {exc.code}") from None
        except (urllib.error.URLError, OSError) as exc:
            raise FetchError(target, str(exc)) from None
    root = Path(source.root).resolve()
    path = (root / target).resolve()
    if root != path and root not in path.parents:
        raise FetchError(ref, "outside the corpus directory")
    try:
        return path.read_bytes()
    except OSError as exc:
        raise FetchError(target, exc.strerror or str(exc)) from None


def discover_pages(source: CorpusSource) -> list[str]:
    if source.page_list is not None:
        return list(source.page_list)
    if source.kind is SourceKind.HTTP_BASE:
        raise SourceUnavailable("an HTTP source needs a page manifest")
    root = Path(source.root)
    if not root.is_dir():
        raise SourceUnavailable(f"corpus directory not found: {source.root}")
    return sorted(p.relative_to(root).as_posix() for p in root.rglob("*.html") if p.is_file())


@dataclass
class _PageHarvest:
    url: str
    content: bytes | None = None
    ontologies: list[ParsedOntology] = field(default_factory=list)
    rdfs: list[ParsedRdf] = field(default_factory=list)
    warnings: list[tuple[str, str]] = field(default_factory=list)


def _harvest(page: str, source: CorpusSource) -> _PageHarvest:
    h = _PageHarvest(page)
    try:
        h.content = fetch(page, source)
    except FetchError as exc:
        h.warnings.append((page, str(exc)))
        return h
    for link in extract_annotation_links(h.content):
        try:
            doc_ref = resolve(link.href, source, page)
            doc = fetch(link.href, source, page)
            kind = classify_document(doc)
            if kind is DocumentKind.ONTOLOGY:
                parsed = parse_ontology_document(doc, doc_ref, page)
                h.ontologies.append(parsed)
            else:
                parsed = parse_rdf_document(doc, doc_ref, page)
                h.rdfs.append(parsed)
        except (FetchError, MalformedDocument) as exc:
            h.warnings.append((link.href, f"{type(exc).__name__}: {exc}"))
            continue
        h.warnings.extend((doc_ref, f"{w.code}: {w.message}") for w in parsed.warnings)
    return h


def crawl(source: CorpusSource, store: Ontobase, workers: int = 1) -> CrawlReport:
    """Visit every page of ``source`` and load its annotations into ``store``."""
    started = time.perf_counter()
    if source.kind is SourceKind.DIRECTORY and not Path(source.root).is_dir():
        raise SourceUnavailable(f"corpus directory not found: {source.root}")
    pages = discover_pages(source)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            harvests = list(pool.map(lambda p: _harvest(p, source), pages))
    else:
        harvests = [_harvest(p, source) for p in pages]

    report = CrawlReport()
    sym = store.symbols.intern
    for h in harvests:
        report.warnings.extend(h.warnings)
        if h.content is None:
            continue
        report.pages_visited += 1
        report.annotation_docs_parsed += len(h.ontologies) + len(h.rdfs)
        store.put_page(h.url, h.content)

    for h in harvests:
        for parsed in h.ontologies:
            for st in parsed.triplets:
                t = OntologyTriplet(sym(st.domain), sym(st.predicate), sym(st.range),
                                    st.kind, parsed.source_url)
                report.ontology_triplets += store.put_ontology_triplet(t)

    for h in harvests:
        for parsed in h.rdfs:
            for name, concept in parsed.instance_map.items():
                store.declare_instance(sym(name), sym(concept))

    for h in harvests:
        page_triplets = []
        for parsed in h.rdfs:
            imap = parsed.instance_map
            for s, p, o in parsed.triplets:
                try:
                    page_triplets.append(RdfTriplet(sym(s), sym(p), sym(o), h.url,
                                                    sym(imap[s]), sym(imap[o])))
                except InvalidName as exc:
                    report.warnings.append((parsed.source_url, str(exc)))
        report.rdf_emitted += len(page_triplets)
        kept, dropped = apply_support_threshold(page_triplets, store.lambda_)
        report.rdf_rejected += len(dropped)
        if dropped:
            report.warnings.append((h.url, f"{len(dropped)} RDF triplets below support {store.lambda_}"))
        for t in kept:
            try:
                if store.put_rdf_triplet(t):
                    report.rdf_triplets += 1
                else:
                    report.rdf_duplicates += 1
            except DanglingOntologyRef as exc:
                report.rdf_rejected += 1
                report.warnings.append((h.url, f"DanglingOntologyRef: {exc}"))

    report.elapsed = (time.perf_counter() - started) * 1000.0
    log.info("crawled %d pages: %d ontology / %d RDF triplets, %d warnings",
             report.pages_visited, report.ontology_triplets, report.rdf_triplets,
             len(report.warnings))
    return report
