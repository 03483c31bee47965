import pytest

from semlook.ontobase import Ontobase


@pytest.fixture
def hotel_store():
    """Two pages of tourism annotations; only p1 says ashoka is located in bangalore."""
    store = Ontobase()
    store.add_ontology("Hotel", "locatedIn", "City")
    store.add_ontology("Hotel", "nearTo", "Monument")
    store.add_ontology("Monument", "locatedIn", "City")
    store.add_ontology("City", "hasHotel", "Hotel")
    sym = store.intern
    for inst, concept in [("ashoka", "Hotel"), ("bangalore", "City"), ("mysore", "City"),
                          ("vidhanasoudha", "Monument")]:
        store.declare_instance(sym(inst), sym(concept))
    store.put_page("p1.html", b"<html>p1</html>")
    store.put_page("p2.html", b"<html>p2</html>")
    store.add_rdf("ashoka", "locatedIn", "bangalore", "p1.html", "Hotel", "City")
    store.add_rdf("ashoka", "nearTo", "vidhanasoudha", "p1.html", "Hotel", "Monument")
    store.add_rdf("vidhanasoudha", "locatedIn", "bangalore", "p1.html", "Monument", "City")
    store.add_rdf("ashoka", "locatedIn", "mysore", "p2.html", "Hotel", "City")
    return store


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
