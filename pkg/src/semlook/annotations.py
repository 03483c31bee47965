"""Annotation discovery and parsing.

A page advertises its semantic annotations through ``<link>`` elements of
type ``application/rdf+xml``. Each linked document is either an ontology
document (property elements with domain/range children) or an RDF document
(``rdf:Description`` elements plus an ``<instances>`` block binding each
instance name to its concept).

Namespace prefixes are never resolved: elements and attributes are matched
by local-name, so ``rdf:ID``, ``ID`` and ``{uri}ID`` are the same attribute.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import NamedTuple
from xml.etree.ElementTree import Element, TreeBuilder
from xml.parsers import expat
from xml.sax.saxutils import quoteattr

from .errors import MalformedDocument
from .ontobase import PropertyKind, normalize_name

RDF_MEDIA_TYPE = "application/rdf+xml"
PROPERTY_TAGS = {kind.value.lower(): kind for kind in PropertyKind}


class DocumentKind(enum.Enum):
    ONTOLOGY = "Ontology"
    RDF = "Rdf"


class AnnotationLink(NamedTuple):
    href: str
    media_type: str = RDF_MEDIA_TYPE


class ParseWarning(NamedTuple):
    code: str
    message: str


class OntologyStatement(NamedTuple):
    domain: str
    predicate: str
    range: str
    kind: PropertyKind = PropertyKind.OBJECT


@dataclass
class ParsedOntology:
    triplets: list[OntologyStatement]
    source_url: str = ""
    page_url: str = ""
    warnings: list[ParseWarning] = field(default_factory=list)


@dataclass
class ParsedRdf:
    triplets: list[tuple[str, str, str]]
    instance_map: dict[str, str]
    source_url: str = ""
    page_url: str = ""
    warnings: list[ParseWarning] = field(default_factory=list)


# -- HTML -----------------------------------------------------------------

class _LinkScanner(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.links: list[AnnotationLink] = []

    def handle_starttag(self, tag, attrs):
        if tag != "link":
            return
        attrs = {name.lower(): (value or "") for name, value in attrs}
        media = attrs.get("type", "").strip().rstrip(";").strip().lower()
        if media == RDF_MEDIA_TYPE and "href" in attrs:
            self.links.append(AnnotationLink(attrs["href"], RDF_MEDIA_TYPE))


def extract_annotation_links(page_bytes: bytes) -> list[AnnotationLink]:
    """Return every rdf+xml ``<link>`` of an HTML page, in document order."""
    scanner = _LinkScanner()
    scanner.feed(page_bytes.decode("utf-8", errors="replace"))
    scanner.close()
    return scanner.links


# -- XML ------------------------------------------------------------------

def local_name(name: str) -> str:
    if "}" in name:
        name = name.rsplit("}", 1)[1]
    return name.rsplit(":", 1)[-1]


def _attr(el: Element, name: str) -> str | None:
    for key, value in el.attrib.items():
        if local_name(key) == name:
            return value
    return None


def _resource(value: str | None) -> str:
    """Strip whitespace and a leading fragment marker."""
    if value is None:
        return ""
    value = value.strip()
    return value[1:].strip() if value.startswith("#") else value


def parse_xml(doc_bytes: bytes) -> Element:
    """Parse XML without namespace processing (undeclared prefixes are fine)."""
    builder = TreeBuilder()
    parser = expat.ParserCreate()
    parser.StartElementHandler = builder.start
    parser.EndElementHandler = builder.end
    parser.CharacterDataHandler = builder.data
    try:
        parser.Parse(doc_bytes, True)
        return builder.close()
    except (expat.ExpatError, AssertionError) as exc:
        raise MalformedDocument(str(exc)) from None


def classify_document(doc_bytes: bytes) -> DocumentKind:
    root = parse_xml(doc_bytes)
    return _classify(root)


def _classify(root: Element) -> DocumentKind:
    if local_name(root.tag).lower() == "ontology":
        return DocumentKind.ONTOLOGY
    if any(local_name(el.tag).lower() in PROPERTY_TAGS for el in root.iter()):
        return DocumentKind.ONTOLOGY
    return DocumentKind.RDF


def parse_ontology_document(doc_bytes: bytes, ourl: str = "", wurl: str = "") -> ParsedOntology:
    root = parse_xml(doc_bytes)
    result = ParsedOntology([], ourl, wurl)
    for el in root.iter():
        kind = PROPERTY_TAGS.get(local_name(el.tag).lower())
        if kind is None:
            continue
        relation = _resource(_attr(el, "ID"))
        if not relation:
            result.warnings.append(ParseWarning(
                "SkippedProperty", f"{kind.value} without rdf:ID in {ourl or 'document'}"))
            continue
        domain = range_ = ""
        for child in el:
            name = local_name(child.tag).lower()
            if name == "domain":
                domain = _resource(_attr(child, "resource"))
            elif name == "range":
                range_ = _resource(_attr(child, "resource"))
            else:
                result.warnings.append(ParseWarning(
                    "IgnoredChild", f"{relation}: child <{local_name(child.tag)}> ignored"))
        if not domain or not range_:
            missing = "domain" if not domain else "range"
            result.warnings.append(ParseWarning(
                "SkippedProperty", f"{relation}: missing {missing}"))
            continue
        result.triplets.append(OntologyStatement(domain, relation, range_, kind))
    return result


def parse_rdf_document(doc_bytes: bytes, ourl: str = "", wurl: str = "") -> ParsedRdf:
    root = parse_xml(doc_bytes)
    result = ParsedRdf([], {}, ourl, wurl)

    for el in root.iter():
        if local_name(el.tag).lower() != "instance":
            continue
        name, concept = _attr(el, "name"), _resource(_attr(el, "concept"))
        if not name or not name.strip() or not concept:
            result.warnings.append(ParseWarning("UnmappedInstance", "incomplete <instance> entry"))
            continue
        name = normalize_name(name)
        known = result.instance_map.setdefault(name, concept)
        if known.lower() != concept.lower():
            result.warnings.append(ParseWarning(
                "ConflictingInstance", f"{name}: {known} vs {concept}, keeping {known}"))

    for el in root.iter():
        if local_name(el.tag) != "Description":
            continue
        about = _resource(_attr(el, "about"))
        if not about:
            result.warnings.append(ParseWarning("MissingSubject", "rdf:Description without rdf:about"))
            continue
        subject = about.lower()
        for child in el:
            predicate = local_name(child.tag)
            obj = _resource(_attr(child, "resource")).lower()
            if not obj:
                result.warnings.append(ParseWarning(
                    "MissingResource", f"{subject} {predicate}: no rdf:resource"))
                continue
            unmapped = [n for n in (subject, obj) if n not in result.instance_map]
            if unmapped:
                result.warnings.append(ParseWarning(
                    "UnmappedInstance", f"({subject}, {predicate}, {obj}): "
                    f"no concept for {', '.join(unmapped)}"))
                continue
            result.triplets.append((subject, predicate, obj))
    return result


def parse_document(doc_bytes: bytes, ourl: str = "", wurl: str = "") -> ParsedOntology | ParsedRdf:
    """Classify and parse in one step."""
    if classify_document(doc_bytes) is DocumentKind.ONTOLOGY:
        return parse_ontology_document(doc_bytes, ourl, wurl)
    return parse_rdf_document(doc_bytes, ourl, wurl)


# -- emitters -------------------------------------------------------------

_NS = ('xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#" '
       'xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"')


def emit_ontology(parsed: ParsedOntology) -> bytes:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', f"<ONTOLOGY {_NS}>"]
    for t in parsed.triplets:
        tag = PropertyKind(t.kind).value
        lines.append(f"  <{tag} rdf:ID={quoteattr(t.predicate)}>")
        lines.append(f"    <domain rdfs:resource={quoteattr('#' + t.domain)}/>")
        lines.append(f"    <range rdfs:resource={quoteattr('#' + t.range)}/>")
        lines.append(f"  </{tag}>")
    lines.append("</ONTOLOGY>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def emit_rdf(parsed: ParsedRdf) -> bytes:
    by_subject: dict[str, list[tuple[str, str]]] = {}
    for s, p, o in parsed.triplets:
        by_subject.setdefault(s, []).append((p, o))
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', f"<rdf:RDF {_NS}>"]
    for subject, edges in by_subject.items():
        lines.append(f"  <rdf:Description rdf:about={quoteattr(subject)}>")
        for p, o in edges:
            lines.append(f"    <{p} rdf:resource={quoteattr(o)}/>")
        lines.append("  </rdf:Description>")
    lines.append("  <instances>")
    for name, concept in parsed.instance_map.items():
        lines.append(f"    <instance name={quoteattr(name)} concept={quoteattr(concept)}/>")
    lines.append("  </instances>")
    lines.append("</rdf:RDF>")
    return ("\n".join(lines) + "\n").encode("utf-8")
