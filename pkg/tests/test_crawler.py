import functools
import http.server
import threading

import pytest

from semlook.bench import CorpusParams, generate_corpus
from semlook.crawler import CorpusSource, crawl, fetch, read_manifest, resolve
from semlook.errors import FetchError, SourceUnavailable
from semlook.ontobase import Ontobase

from test_annotations import HOTEL_ONTOLOGY, HOTEL_RDF


def write_hotel_corpus(root):
    (root / "pages").mkdir()
    (root / "ann").mkdir()
    (root / "ann" / "travel.owl").write_bytes(HOTEL_ONTOLOGY)
    (root / "ann" / "ashoka.rdf").write_bytes(HOTEL_RDF)
    (root / "ann" / "broken.rdf").write_bytes(HOTEL_RDF[:-12])
    (root / "pages" / "p1.html").write_bytes(
        b'<html><head><link type="application/rdf+xml" href="../ann/ashoka.rdf">'
        b'<link type="application/rdf+xml" href="../ann/travel.owl"></head></html>')
    (root / "pages" / "p2.html").write_bytes(
        b'<html><head><link type="application/rdf+xml" href="/ann/broken.rdf"></head></html>')
    (root / "index.html").write_bytes(b"<html><p>no annotations</p></html>")


@pytest.fixture
def hotel_corpus(tmp_path):
    write_hotel_corpus(tmp_path)
    return tmp_path


def test_fetch_directory(hotel_corpus):
    source = CorpusSource.directory(hotel_corpus)
    assert fetch("pages/p1.html", source).startswith(b"<html>")
    assert fetch("../ann/travel.owl", source, base="pages/p1.html") == HOTEL_ONTOLOGY


@pytest.mark.parametrize("ref", ["../../etc/passwd", "/../outside.html", "http://example.com/a.rdf",
                                 "file:///etc/passwd", "missing.html"])
def test_fetch_errors(hotel_corpus, ref):
    with pytest.raises(FetchError):
        fetch(ref, CorpusSource.directory(hotel_corpus), base="pages/p1.html")


def test_resolve_relative():
    source = CorpusSource.directory("/corpus")
    assert resolve("a.rdf", source, "pages/p1.html") == "pages/a.rdf"
    assert resolve("/a.rdf", source, "pages/p1.html") == "a.rdf"
    http = CorpusSource.http("http://h/site", ["p.html"])
    assert resolve("x/a.rdf", http, "pages/p.html") == "http://h/site/pages/x/a.rdf"
    with pytest.raises(FetchError):
        resolve("/other/a.rdf", http, "pages/p.html")


def test_crawl_hotel(hotel_corpus):
    store = Ontobase()
    report = crawl(CorpusSource.directory(hotel_corpus), store)
    assert report.pages_visited == 3
    assert report.annotation_docs_parsed == 2
    assert report.ontology_triplets == 2
    assert report.rdf_triplets == 1
    assert len(report.warnings) == 1 and "broken.rdf" in report.warnings[0][0]
    assert set(store.pages) == {"index.html", "pages/p1.html", "pages/p2.html"}
    assert store.page("index.html").keywords == set()
    sym = store.symbols.lookup
    assert store.pages_matching(sym("ashoka"), sym("locatedin"), sym("bangalore")) == {"pages/p1.html"}
    assert store.ontology_triplets()[0].source_url == "ann/travel.owl"


def test_crawl_empty_directory(tmp_path):
    report = crawl(CorpusSource.directory(tmp_path), Ontobase())
    assert (report.pages_visited, report.annotation_docs_parsed,
            report.ontology_triplets, report.rdf_triplets) == (0, 0, 0, 0)


def test_missing_root(tmp_path):
    with pytest.raises(SourceUnavailable):
        crawl(CorpusSource.directory(tmp_path / "nope"), Ontobase())


def test_rdf_before_its_ontology_in_page_order(tmp_path):
    # a.html carries only RDF, z.html the ontology it maps to
    (tmp_path / "t.owl").write_bytes(HOTEL_ONTOLOGY)
    (tmp_path / "t.rdf").write_bytes(HOTEL_RDF)
    (tmp_path / "a.html").write_bytes(b'<link type="application/rdf+xml" href="t.rdf">')
    (tmp_path / "z.html").write_bytes(b'<link type="application/rdf+xml" href="t.owl">')
    report = crawl(CorpusSource.directory(tmp_path), Ontobase())
    assert report.rdf_triplets == 1 and report.warnings == []


def test_dangling_rdf_is_a_warning(tmp_path):
    (tmp_path / "t.rdf").write_bytes(HOTEL_RDF)
    (tmp_path / "a.html").write_bytes(b'<link type="application/rdf+xml" href="t.rdf">')
    report = crawl(CorpusSource.directory(tmp_path), Ontobase())
    assert report.rdf_triplets == 0 and report.rdf_rejected == 1
    assert "DanglingOntologyRef" in report.warnings[0][1]


def test_lambda_filter(tmp_path):
    (tmp_path / "t.owl").write_bytes(HOTEL_ONTOLOGY)
    rdf = HOTEL_RDF.replace(b"</instances>", b'<instance name="Mysore" concept="City"/></instances>')
    rdf = rdf.replace(b"</rdf:Description>",
                      b'<locatedIn rdf:resource="Mysore"/></rdf:Description>'
                      b'<rdf:Description rdf:about="Ashoka"><starRating rdf:resource="Mysore"/></rdf:Description>')
    (tmp_path / "t.rdf").write_bytes(rdf)
    (tmp_path / "a.html").write_bytes(b'<link type="application/rdf+xml" href="t.owl">'
                                      b'<link type="application/rdf+xml" href="t.rdf">')
    store = Ontobase(lambda_=2)
    report = crawl(CorpusSource.directory(tmp_path), store)
    assert report.rdf_emitted == 3 and report.rdf_rejected == 1 and report.rdf_triplets == 2
    assert {store.symbols.text(t.predicate) for t in store.rdf_triplets()} == {"locatedin"}


def test_recrawl_idempotent(tmp_path):
    generate_corpus(CorpusParams(num_pages=6, num_concepts=4, seed=3), tmp_path)
    store = Ontobase()
    first = crawl(CorpusSource.directory(tmp_path), store)
    snapshot = store.dumps()
    second = crawl(CorpusSource.directory(tmp_path), store)
    assert store.dumps() == snapshot
    assert second.rdf_triplets == 0 and second.rdf_duplicates == first.rdf_triplets
    for report in (first, second):
        assert report.rdf_triplets + report.rdf_duplicates + report.rdf_rejected == report.rdf_emitted


def test_schedule_independence(tmp_path):
    generate_corpus(CorpusParams(num_pages=12, num_concepts=5, seed=9), tmp_path)
    pages = read_manifest(tmp_path / "manifest.txt")
    serial, parallel, reversed_ = Ontobase(), Ontobase(), Ontobase()
    crawl(CorpusSource.directory(tmp_path), serial)
    crawl(CorpusSource.directory(tmp_path), parallel, workers=4)
    crawl(CorpusSource.directory(tmp_path, list(reversed(pages))), reversed_)
    assert serial.dumps() == parallel.dumps() == reversed_.dumps()


@pytest.fixture
def http_corpus(hotel_corpus):
    handler = functools.partial(http.server.SimpleHTTPRequestHandler, directory=str(hotel_corpus))
    handler.log_message = lambda *a, **k: None
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/"
    server.shutdown()
    server.server_close()


def test_crawl_http(http_corpus, hotel_corpus):
    pages = ["pages/p1.html", "pages/p2.html", "index.html"]
    source = CorpusSource.from_location(http_corpus, pages)
    store = Ontobase()
    report = crawl(source, store)
    assert (report.pages_visited, report.ontology_triplets, report.rdf_triplets) == (3, 2, 1)
    local = Ontobase()
    crawl(CorpusSource.directory(hotel_corpus), local)
    assert [t for t in store.dumps().splitlines() if '"rdf"' in t] == \
        [t for t in local.dumps().splitlines() if '"rdf"' in t]


def test_http_404(http_corpus):
    with pytest.raises(FetchError, match="404"):
        fetch("missing.html", CorpusSource.http(http_corpus, ["missing.html"]))
    report = crawl(CorpusSource.http(http_corpus, ["missing.html", "index.html"]), Ontobase())
    assert report.pages_visited == 1 and len(report.warnings) == 1


def test_http_needs_manifest():
    with pytest.raises(SourceUnavailable):
        CorpusSource.from_location("http://127.0.0.1:9/")
