# Generate a small annotated corpus, crawl it into a store, and query it.
import tempfile
from pathlib import Path

from semlook import (CorpusSource, Ontobase, QuerySpec, crawl, parse_term, resolve_terms,
                     search)
from semlook.bench import CorpusParams, GraphShape, generate_corpus

#%%
workdir = Path(tempfile.mkdtemp())
manifest = generate_corpus(CorpusParams(num_pages=12, num_concepts=6, seed=3), workdir,
                           GraphShape(4, 5, 2))
print(sorted(p.name for p in workdir.iterdir())[:5], "...")
print("planted query:", manifest.query)


#%%
store = Ontobase()
report = crawl(CorpusSource.directory(workdir), store)
print(report)
print(store.counts())


#%%
terms = resolve_terms(store, [parse_term(t) for t in manifest.query])
results, rep = search(QuerySpec(terms), store)
for r in results[:10]:
    print(r.score, r.url)
print(rep)


#%%
# persisting and reloading gives the same answers
db = workdir / "store.ndjson"
store.persist(db)
loaded = Ontobase.load(db)
again, _ = search(QuerySpec(resolve_terms(loaded, [parse_term(t) for t in manifest.query])), loaded)
print(again == results)
