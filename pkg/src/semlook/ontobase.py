"""Ontobase: the triplet knowledge base behind the search engine.

Pages, ontology triplets and RDF triplets are kept as append-only sets of
interned symbols. Three derived indexes answer the lookups the query engine
needs:

* concept pair -> predicates relating them (either orientation)
* directed (subject, predicate, object) -> page URLs
* page URL -> predicate occurrence counts

The on-disk form is newline-delimited JSON, written in a canonical order so
that two stores holding the same triplets serialize to identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

from .errors import (
    AmbiguousInstance,
    CorruptStore,
    DanglingOntologyRef,
    InvalidName,
    UnknownPage,
)

STORE_HEADER = {"semlook_store": 1}


class PropertyKind(str, Enum):
    OBJECT = "ObjectProperty"
    DATATYPE = "DatatypeProperty"
    FUNCTIONAL = "FunctionalProperty"

    @classmethod
    def from_tag(cls, tag: str) -> "PropertyKind":
        """Map an element local-name to a kind, case-insensitively."""
        lowered = tag.lower()
        for kind in cls:
            if kind.value.lower() == lowered:
                return kind
        raise ValueError(f"not a property element: {tag!r}")


def normalize_name(name: str) -> str:
    text = name.strip().lower() if isinstance(name, str) else ""
    if not text:
        raise InvalidName(f"empty name: {name!r}")
    return text


def content_digest(data: bytes) -> int:
    """64-bit digest of raw page bytes."""
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


class SymbolTable:
    """Case-insensitive interning of names to dense integer ids."""

    def __init__(self):
        self._ids: dict[str, int] = {}
        self._texts: list[str] = []
        self._lock = threading.Lock()

    def intern(self, name: str) -> int:
        text = normalize_name(name)
        found = self._ids.get(text)
        if found is not None:
            return found
        with self._lock:
            found = self._ids.get(text)
            if found is None:
                found = len(self._texts)
                self._texts.append(text)
                self._ids[text] = found
            return found

    def lookup(self, name: str) -> int | None:
        try:
            return self._ids.get(normalize_name(name))
        except InvalidName:
            return None

    def text(self, symbol: int) -> str:
        return self._texts[symbol]

    def __len__(self):
        return len(self._texts)

    def __contains__(self, name):
        return self.lookup(name) is not None


@dataclass(frozen=True)
class OntologyTriplet:
    domain: int
    predicate: int
    range: int
    kind: PropertyKind = PropertyKind.OBJECT
    source_url: str = ""


@dataclass(frozen=True)
class RdfTriplet:
    subject: int
    predicate: int
    object: int
    page_url: str
    subject_concept: int
    object_concept: int


@dataclass
class PageRecord:
    url: str
    keywords: set[int] = field(default_factory=set)
    concepts: set[int] = field(default_factory=set)
    content_digest: int = 0


@dataclass(frozen=True)
class PredicateStats:
    predicate: int
    page_url: str
    support: int
    frequency: float
    lambda_: int


def apply_support_threshold(triplets: Iterable, lambda_: int, predicate=lambda t: t.predicate):
    """Split one page's triplets into (kept, dropped) by predicate support >= lambda_."""
    triplets = list(triplets)
    if lambda_ <= 1:
        return triplets, []
    support = Counter(predicate(t) for t in triplets)
    kept = [t for t in triplets if support[predicate(t)] >= lambda_]
    dropped = [t for t in triplets if support[predicate(t)] < lambda_]
    return kept, dropped


class Ontobase:
    """In-memory triplet store with NDJSON persistence.

    Writes are serialized through a lock; readers may query concurrently.
    There is no deletion: the store only grows.
    """

    def __init__(self, lambda_: int = 1):
        if lambda_ < 1:
            raise ValueError("lambda_ must be >= 1")
        self.lambda_ = lambda_
        self.symbols = SymbolTable()
        self._lock = threading.RLock()
        self._pages: dict[str, PageRecord] = {}
        # dicts used as insertion-ordered sets
        self._onto: dict[OntologyTriplet, None] = {}
        self._rdf: dict[RdfTriplet, None] = {}
        self._instances: dict[int, set[int]] = defaultdict(set)
        self._reset_indexes()

    # -- indexes -----------------------------------------------------------

    def _reset_indexes(self):
        self._pair_preds: dict[tuple[int, int], set[int]] = defaultdict(set)
        self._onto_keys: set[tuple[int, int, int]] = set()
        self._pattern_pages: dict[tuple[int, int, int], set[str]] = defaultdict(set)
        self._page_preds: dict[str, Counter] = defaultdict(Counter)
        self._onto_concepts: set[int] = set()

    def _index_onto(self, t: OntologyTriplet):
        pair = (t.domain, t.range) if t.domain <= t.range else (t.range, t.domain)
        self._pair_preds[pair].add(t.predicate)
        self._onto_keys.add((t.domain, t.predicate, t.range))
        self._onto_concepts.update((t.domain, t.range))

    def _index_rdf(self, t: RdfTriplet):
        key = (t.subject, t.predicate, t.object)
        urls = self._pattern_pages[key]
        self._page_preds[t.page_url][t.predicate] += 1
        urls.add(t.page_url)
        page = self._pages.setdefault(t.page_url, PageRecord(t.page_url))
        page.keywords.update((t.subject, t.object))
        page.concepts.update((t.subject_concept, t.object_concept))

    def rebuild_indexes(self):
        """Recompute every derived index from the raw triplet sets."""
        with self._lock:
            self._reset_indexes()
            for page in self._pages.values():
                page.keywords.clear()
                page.concepts.clear()
            for t in self._onto:
                self._index_onto(t)
            for t in self._rdf:
                self._index_rdf(t)

    # -- writes ------------------------------------------------------------

    def intern(self, name: str) -> int:
        return self.symbols.intern(name)

    def put_page(self, url: str, content: bytes | None = None) -> PageRecord:
        with self._lock:
            page = self._pages.setdefault(url, PageRecord(url))
            if content is not None:
                page.content_digest = content_digest(content)
            return page

    def put_ontology_triplet(self, t: OntologyTriplet) -> bool:
        with self._lock:
            if t in self._onto:
                return False
            self._onto[t] = None
            self._index_onto(t)
            return True

    def add_ontology(self, domain: str, predicate: str, range_: str,
                     kind: PropertyKind = PropertyKind.OBJECT, source_url: str = "") -> bool:
        """Text-level convenience over put_ontology_triplet."""
        sym = self.symbols.intern
        return self.put_ontology_triplet(
            OntologyTriplet(sym(domain), sym(predicate), sym(range_), PropertyKind(kind), source_url))

    def declare_instance(self, instance: int, concept: int) -> bool:
        with self._lock:
            concepts = self._instances[instance]
            if concept in concepts:
                return False
            concepts.add(concept)
            return True

    def put_rdf_triplet(self, t: RdfTriplet) -> bool:
        with self._lock:
            if t in self._rdf:
                return False
            if ((t.subject_concept, t.predicate, t.object_concept) not in self._onto_keys
                    and (t.object_concept, t.predicate, t.subject_concept) not in self._onto_keys):
                text = self.symbols.text
                raise DanglingOntologyRef(
                    f"no ontology triplet relates {text(t.subject_concept)!r} and "
                    f"{text(t.object_concept)!r} through {text(t.predicate)!r}")
            self._rdf[t] = None
            self._index_rdf(t)
            return True

    def add_rdf(self, subject: str, predicate: str, object_: str, page_url: str,
                subject_concept: str, object_concept: str) -> bool:
        """Text-level convenience over put_rdf_triplet."""
        sym = self.symbols.intern
        return self.put_rdf_triplet(RdfTriplet(
            sym(subject), sym(predicate), sym(object_), page_url,
            sym(subject_concept), sym(object_concept)))

    # -- reads -------------------------------------------------------------

    def relations_between(self, c_i: int, c_j: int) -> list[int]:
        pair = (c_i, c_j) if c_i <= c_j else (c_j, c_i)
        preds = self._pair_preds.get(pair, ())
        return sorted(preds, key=self.symbols.text)

    def pages_with(self, subject: int, predicate: int, object_: int) -> frozenset[str]:
        """Pages holding the triplet in exactly this orientation."""
        return frozenset(self._pattern_pages.get((subject, predicate, object_), ()))

    def pages_matching(self, subject: int, predicate: int, object_: int) -> frozenset[str]:
        forward = self._pattern_pages.get((subject, predicate, object_), set())
        backward = self._pattern_pages.get((object_, predicate, subject), set())
        return frozenset(forward | backward)

    def concept_of_instance(self, instance: int) -> int | None:
        concepts = self._instances.get(instance)
        if not concepts:
            return None
        if len(concepts) > 1:
            raise AmbiguousInstance(self.symbols.text(instance),
                                    [self.symbols.text(c) for c in concepts])
        return next(iter(concepts))

    def knows_concept(self, concept: int) -> bool:
        if concept in self._onto_concepts:
            return True
        return any(concept in cs for cs in self._instances.values())

    def page(self, url: str) -> PageRecord:
        try:
            return self._pages[url]
        except KeyError:
            raise UnknownPage(url) from None

    @property
    def pages(self) -> dict[str, PageRecord]:
        return self._pages

    def ontology_triplets(self) -> list[OntologyTriplet]:
        return list(self._onto)

    def rdf_triplets(self) -> list[RdfTriplet]:
        return list(self._rdf)

    def instance_declarations(self) -> list[tuple[int, int]]:
        return [(i, c) for i, cs in self._instances.items() for c in cs]

    def predicate_frequency(self, predicate: int, page_url: str) -> float:
        self.page(page_url)
        counts = self._page_preds.get(page_url)
        if not counts:
            return 0.0
        return counts[predicate] / sum(counts.values())

    def predicate_stats(self, page_url: str) -> list[PredicateStats]:
        self.page(page_url)
        counts = self._page_preds.get(page_url, Counter())
        total = sum(counts.values())
        return [PredicateStats(p, page_url, n, n / total, self.lambda_)
                for p, n in sorted(counts.items(), key=lambda kv: self.symbols.text(kv[0]))]

    def counts(self) -> dict[str, int]:
        return {"pages": len(self._pages), "ontology_triplets": len(self._onto),
                "rdf_triplets": len(self._rdf), "instances": len(self._instances)}

    # -- persistence -------------------------------------------------------

    def records(self) -> list[dict]:
        """Canonical record list, independent of insertion order."""
        text = self.symbols.text
        out = []
        for url in sorted(self._pages):
            page = self._pages[url]
            out.append({"kind": "page", "url": url,
                        "keywords": sorted(text(k) for k in page.keywords),
                        "concepts": sorted(text(c) for c in page.concepts),
                        "content_digest": page.content_digest})
        onto = sorted((text(t.domain), text(t.predicate), text(t.range), t.kind.value, t.source_url)
                      for t in self._onto)
        for d, p, r, k, src in onto:
            out.append({"kind": "onto", "domain": d, "predicate": p, "range": r,
                        "property_kind": k, "source_url": src})
        for inst, concept in sorted((text(i), text(c)) for i, c in self.instance_declarations()):
            out.append({"kind": "instance", "instance": inst, "concept": concept})
        rdf = sorted((t.page_url, text(t.subject), text(t.predicate), text(t.object),
                      text(t.subject_concept), text(t.object_concept)) for t in self._rdf)
        for url, s, p, o, sc, oc in rdf:
            out.append({"kind": "rdf", "subject": s, "predicate": p, "object": o,
                        "page_url": url, "subject_concept": sc, "object_concept": oc})
        return out

    def dumps(self) -> str:
        lines = [json.dumps(STORE_HEADER)]
        lines.extend(json.dumps(r, ensure_ascii=False) for r in self.records())
        return "\n".join(lines) + "\n"

    def persist(self, path) -> int:
        """Write the store atomically; returns the number of records written."""
        path = Path(path)
        text = self.dumps()
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(path)
        return text.count("\n") - 1

    @classmethod
    def load(cls, path, lambda_: int = 1) -> "Ontobase":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptStore(0, f"not UTF-8: {exc}") from None
        return cls.loads(text, lambda_=lambda_)

    @classmethod
    def loads(cls, text: str, lambda_: int = 1) -> "Ontobase":
        lines = text.split("\n")
        while lines and not lines[-1].strip():
            lines.pop()
        if not lines:
            raise CorruptStore(1, "missing header")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise CorruptStore(1, f"bad header: {exc.msg}") from None
        if header != STORE_HEADER:
            raise CorruptStore(1, f"unexpected header {lines[0]!r}")

        by_kind: dict[str, list[tuple[int, dict]]] = defaultdict(list)
        for lineno, line in enumerate(lines[1:], start=2):
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptStore(lineno, exc.msg) from None
            if not isinstance(rec, dict) or list(rec) != _FIELDS.get(rec.get("kind"), None):
                raise CorruptStore(lineno, "unexpected record shape")
            by_kind[rec["kind"]].append((lineno, rec))

        store = cls(lambda_=lambda_)
        sym = store.symbols.intern
        for kind in ("page", "onto", "instance", "rdf"):
            for lineno, rec in by_kind[kind]:
                try:
                    if kind == "page":
                        store.put_page(rec["url"]).content_digest = int(rec["content_digest"])
                    elif kind == "onto":
                        store.put_ontology_triplet(OntologyTriplet(
                            sym(rec["domain"]), sym(rec["predicate"]), sym(rec["range"]),
                            PropertyKind(rec["property_kind"]), rec["source_url"]))
                    elif kind == "instance":
                        store.declare_instance(sym(rec["instance"]), sym(rec["concept"]))
                    else:
                        store.put_rdf_triplet(RdfTriplet(
                            sym(rec["subject"]), sym(rec["predicate"]), sym(rec["object"]),
                            rec["page_url"], sym(rec["subject_concept"]), sym(rec["object_concept"])))
                except (DanglingOntologyRef, InvalidName, ValueError, TypeError) as exc:
                    raise CorruptStore(lineno, str(exc)) from None

        text_of = store.symbols.text
        for lineno, rec in by_kind["page"]:
            page = store._pages[rec["url"]]
            if (sorted(text_of(k) for k in page.keywords) != rec["keywords"]
                    or sorted(text_of(c) for c in page.concepts) != rec["concepts"]):
                raise CorruptStore(lineno, "page keywords disagree with its RDF triplets")
        return store


_FIELDS = {
    "page": ["kind", "url", "keywords", "concepts", "content_digest"],
    "onto": ["kind", "domain", "predicate", "range", "property_kind", "source_url"],
    "instance": ["kind", "instance", "concept"],
    "rdf": ["kind", "subject", "predicate", "object", "page_url", "subject_concept", "object_concept"],
}
