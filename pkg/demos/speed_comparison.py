# Benchmark both modes on planted queries. Absolute times depend on the machine.
from semlook.bench import CorpusParams, GraphShape, run_bench

#%%
rows = [(GraphShape(7, 18, 6), CorpusParams(num_pages=40, predicates_per_pair=(0, 3), seed=1)),
        (GraphShape(5, 9, 3), CorpusParams(num_pages=40, predicates_per_pair=(0, 3), seed=2)),
        (GraphShape(4, 5, 2), CorpusParams(num_pages=40, predicates_per_pair=(0, 3), seed=3))]
table = run_bench(rows, repeats=3)
print(table.to_markdown())


#%%
for row in table.rows:
    print(row.keywords, "keywords:", f"{row.time_olook_ms / row.time_slook_ms:.0f}x faster")
