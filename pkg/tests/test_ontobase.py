import random

import pytest
from hypothesis import given, settings, strategies as st

from semlook.errors import AmbiguousInstance, CorruptStore, DanglingOntologyRef, InvalidName, UnknownPage
from semlook.ontobase import (
    Ontobase,
    OntologyTriplet,
    PropertyKind,
    RdfTriplet,
    SymbolTable,
    apply_support_threshold,
)


class TestIntern:
    def test_first_symbol_is_zero(self):
        assert SymbolTable().intern("Hotel") == 0

    def test_case_insensitive(self):
        table = SymbolTable()
        assert table.intern("Hotel") == 0
        assert table.intern("hotel") == 0
        assert table.intern("  HOTEL ") == 0
        assert table.text(0) == "hotel"

    @pytest.mark.parametrize("name", ["", "   "])
    def test_empty_name(self, name):
        with pytest.raises(InvalidName):
            SymbolTable().intern(name)

    @given(st.lists(st.text(min_size=1).filter(str.strip), max_size=30))
    def test_dense_and_injective(self, names):
        table = SymbolTable()
        ids = [table.intern(n) for n in names]
        assert sorted(set(ids)) == list(range(len(table)))
        for n, i in zip(names, ids):
            assert table.text(i) == n.strip().lower()


def test_put_rdf_triplet_mapped(hotel_store):
    sym = hotel_store.intern
    t = RdfTriplet(sym("ashoka"), sym("locatedIn"), sym("bangalore"), "p3.html",
                   sym("Hotel"), sym("City"))
    assert hotel_store.put_rdf_triplet(t) is True
    assert hotel_store.put_rdf_triplet(t) is False


def test_put_rdf_triplet_reverse_orientation_maps():
    store = Ontobase()
    store.add_ontology("Hotel", "locatedIn", "City")
    assert store.add_rdf("bangalore", "locatedIn", "ashoka", "p.html", "City", "Hotel")


def test_dangling_rdf_triplet(hotel_store):
    with pytest.raises(DanglingOntologyRef):
        hotel_store.add_rdf("ashoka", "ownedBy", "bangalore", "p1.html", "Hotel", "City")
    before = hotel_store.dumps()
    with pytest.raises(DanglingOntologyRef):
        hotel_store.add_rdf("ashoka", "locatedIn", "bangalore", "p1.html", "Hotel", "Monument")
    assert hotel_store.dumps() == before


def test_relations_between(hotel_store):
    sym = hotel_store.symbols.lookup
    hotel, city, monument = sym("Hotel"), sym("City"), sym("Monument")
    names = lambda ids: [hotel_store.symbols.text(i) for i in ids]
    assert names(hotel_store.relations_between(hotel, city)) == ["hasHotel".lower(), "locatedin"]
    assert hotel_store.relations_between(city, hotel) == hotel_store.relations_between(hotel, city)
    assert hotel_store.relations_between(hotel, hotel) == []
    assert names(hotel_store.relations_between(monument, hotel)) == ["nearto"]


def test_relations_single_triplet():
    store = Ontobase()
    store.add_ontology("Hotel", "locatedIn", "City")
    h, c = store.symbols.lookup("hotel"), store.symbols.lookup("city")
    assert [store.symbols.text(p) for p in store.relations_between(h, c)] == ["locatedin"]
    assert store.relations_between(c, h) == store.relations_between(h, c)


def test_pages_matching(hotel_store):
    sym = hotel_store.symbols.lookup
    a, loc, b = sym("ashoka"), sym("locatedIn"), sym("bangalore")
    assert hotel_store.pages_matching(a, loc, b) == {"p1.html"}
    assert hotel_store.pages_matching(b, loc, a) == {"p1.html"}
    assert hotel_store.pages_matching(hotel_store.intern("nowhere"), loc, b) == frozenset()
    assert hotel_store.pages_with(b, loc, a) == frozenset()


def test_concept_of_instance(hotel_store):
    sym = hotel_store.symbols.lookup
    assert hotel_store.concept_of_instance(sym("ashoka")) == sym("hotel")
    assert hotel_store.concept_of_instance(hotel_store.intern("undeclared")) is None
    hotel_store.declare_instance(sym("ashoka"), hotel_store.intern("Monument"))
    with pytest.raises(AmbiguousInstance) as info:
        hotel_store.concept_of_instance(sym("ashoka"))
    assert info.value.concepts == ("hotel", "monument")


def test_predicate_frequency():
    store = Ontobase()
    store.add_ontology("Hotel", "locatedIn", "City")
    store.add_ontology("Hotel", "nearTo", "City")
    for s, p, o in [("a", "locatedIn", "x"), ("b", "locatedIn", "x"),
                    ("a", "nearTo", "x"), ("b", "nearTo", "y")]:
        store.add_rdf(s, p, o, "w.html", "Hotel", "City")
    store.add_rdf("a", "nearTo", "y", "single.html", "Hotel", "City")
    loc, near = store.symbols.lookup("locatedin"), store.symbols.lookup("nearto")
    assert store.predicate_frequency(loc, "w.html") == 0.5
    assert store.predicate_frequency(loc, "single.html") == 0.0
    assert store.predicate_frequency(near, "single.html") == 1.0
    with pytest.raises(UnknownPage):
        store.predicate_frequency(loc, "missing.html")
    stats = store.predicate_stats("w.html")
    assert [s.support for s in stats] == [2, 2]
    assert sum(s.frequency for s in stats) == pytest.approx(1.0, abs=1e-9)


def test_page_keywords_follow_triplets(hotel_store):
    page = hotel_store.page("p1.html")
    text = hotel_store.symbols.text
    assert {text(k) for k in page.keywords} == {"ashoka", "bangalore", "vidhanasoudha"}
    assert {text(c) for c in page.concepts} == {"hotel", "city", "monument"}


def test_support_threshold():
    triplets = [("a", "p", "b"), ("c", "p", "d"), ("e", "q", "f")]
    kept, dropped = apply_support_threshold(triplets, 2, predicate=lambda t: t[1])
    assert kept == triplets[:2] and dropped == triplets[2:]
    assert apply_support_threshold(triplets, 1, predicate=lambda t: t[1]) == (triplets, [])


class TestPersistence:
    def test_empty_store(self, tmp_path):
        path = tmp_path / "db.ndjson"
        assert Ontobase().persist(path) == 0
        assert path.read_text() == '{"semlook_store": 1}\n'
        assert Ontobase.load(path).counts()["rdf_triplets"] == 0

    def test_round_trip(self, hotel_store, tmp_path):
        path = tmp_path / "db.ndjson"
        n = hotel_store.persist(path)
        assert n == len(hotel_store.records())
        loaded = Ontobase.load(path)
        assert loaded.dumps() == hotel_store.dumps()
        assert_same_answers(hotel_store, loaded)

    def test_record_layout(self, hotel_store):
        lines = hotel_store.dumps().splitlines()
        assert lines[0] == '{"semlook_store": 1}'
        assert lines[1].startswith('{"kind": "page", "url": "p1.html", "keywords":')
        assert any(l.startswith('{"kind": "onto", "domain": ') for l in lines)
        assert any(l.startswith('{"kind": "rdf", "subject": ') for l in lines)
        assert any(l.startswith('{"kind": "instance", "instance": ') for l in lines)

    def test_trailing_blank_lines_ignored(self, hotel_store):
        assert Ontobase.loads(hotel_store.dumps() + "\n\n").dumps() == hotel_store.dumps()

    def test_truncated_file(self, hotel_store):
        text = hotel_store.dumps()
        with pytest.raises(CorruptStore) as info:
            Ontobase.loads(text[: len(text) - 20])
        assert info.value.line == text.count("\n")

    @pytest.mark.parametrize("text, line", [
        ("", 1),
        ('{"other": 1}\n', 1),
        ('{"semlook_store": 1}\n{"kind": "nope"}\n', 2),
        ('{"semlook_store": 1}\n\n{"kind": "instance", "instance": "a", "concept": "b"}\n', 2),
        ('{"semlook_store": 1}\n{"kind": "rdf", "subject": "a", "predicate": "p", "object": "b", '
         '"page_url": "u", "subject_concept": "x", "object_concept": "y"}\n', 2),
    ])
    def test_corrupt(self, text, line):
        with pytest.raises(CorruptStore) as info:
            Ontobase.loads(text)
        assert info.value.line == line

    def test_page_keyword_mismatch(self, hotel_store):
        text = hotel_store.dumps().replace('"keywords": ["ashoka", ', '"keywords": [', 1)
        with pytest.raises(CorruptStore):
            Ontobase.loads(text)


def assert_same_answers(a: Ontobase, b: Ontobase):
    def names(store):
        return [store.symbols.text(i) for i in range(len(store.symbols))]
    for concept_i in names(a):
        ci, cj_all = a.symbols.lookup(concept_i), names(a)
        bi = b.symbols.lookup(concept_i)
        for concept_j in cj_all:
            rel_a = [a.symbols.text(p) for p in a.relations_between(ci, a.symbols.lookup(concept_j))]
            bj = b.symbols.lookup(concept_j)
            rel_b = [] if bi is None or bj is None else [
                b.symbols.text(p) for p in b.relations_between(bi, bj)]
            assert rel_a == rel_b
    for t in a.rdf_triplets():
        s, p, o = (a.symbols.text(x) for x in (t.subject, t.predicate, t.object))
        lb = b.symbols.lookup
        assert a.pages_matching(t.subject, t.predicate, t.object) == \
            b.pages_matching(lb(s), lb(p), lb(o))
    for inst, _ in a.instance_declarations():
        name = a.symbols.text(inst)
        try:
            ca = a.symbols.text(a.concept_of_instance(inst))
        except AmbiguousInstance as exc:
            ca = exc.concepts
        try:
            cb = b.symbols.text(b.concept_of_instance(b.symbols.lookup(name)))
        except AmbiguousInstance as exc:
            cb = exc.concepts
        assert ca == cb


def random_store_ops(seed, n_concepts=4, n_preds=5, n_inst=6, n_rdf=25):
    """A random list of text-level insert operations that all succeed in order."""
    rng = random.Random(seed)
    concepts = [f"C{i}" for i in range(n_concepts)]
    onto = {(rng.choice(concepts), f"p{rng.randrange(n_preds)}", rng.choice(concepts),
             rng.choice(list(PropertyKind)).value, f"o{rng.randrange(3)}.owl")
            for _ in range(n_preds * 2)}
    inst = {f"i{k}": rng.choice(concepts) for k in range(n_inst)}
    by_concept = {}
    for name, c in inst.items():
        by_concept.setdefault(c, []).append(name)
    rdf = []
    usable = [t for t in onto if t[0] in by_concept and t[2] in by_concept]
    for _ in range(n_rdf if usable else 0):
        d, p, r, _, _ = rng.choice(usable)
        s, o = rng.choice(by_concept[d]), rng.choice(by_concept[r])
        if rng.random() < 0.3:
            s, o, d, r = o, s, r, d
        rdf.append((s, p, o, f"page{rng.randrange(4)}.html", d, r))
    return [("onto", t) for t in sorted(onto)], [("inst", kv) for kv in inst.items()], \
        [("rdf", t) for t in rdf]


def apply_ops(ops):
    store = Ontobase()
    for kind, args in ops:
        if kind == "onto":
            store.add_ontology(*args)
        elif kind == "inst":
            store.declare_instance(store.intern(args[0]), store.intern(args[1]))
        else:
            store.add_rdf(*args)
    return store


@pytest.mark.parametrize("seed", range(25))
def test_insert_order_independence(seed):
    onto, inst, rdf = random_store_ops(seed)
    reference = apply_ops(onto + inst + rdf)
    rng = random.Random(seed)
    for _ in range(3):
        for part in (onto, inst, rdf):
            rng.shuffle(part)
        assert apply_ops(onto + inst + rdf).dumps() == reference.dumps()


@pytest.mark.parametrize("seed", range(25))
def test_index_rebuild_matches_incremental(seed):
    onto, inst, rdf = random_store_ops(seed)
    store = apply_ops(onto + inst + rdf)
    before = store.dumps()
    snapshot = Ontobase.loads(before)
    store.rebuild_indexes()
    assert store.dumps() == before
    assert_same_answers(snapshot, store)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_frequency_normalization(seed):
    store = apply_ops(sum(random_store_ops(seed), []))
    for url in store.pages:
        stats = store.predicate_stats(url)
        if stats:
            assert abs(sum(s.frequency for s in stats) - 1.0) <= 1e-9
