# How many subgraphs each enumeration mode walks through.
# The baseline cuts half of all arcs; the pruned mode only cuts among the least-weight arcs.
from semlook import EnumerationMode, count_subgraphs

#%%
rows = [(25, 10), (18, 6), (9, 3), (5, 2), (3, 2)]
print(f"{'N':>4} {'nl':>4} {'baseline':>10} {'pruned':>8}")
for n, nl in rows:
    base = count_subgraphs(EnumerationMode.ONTOLOOK_BASELINE, n, nl)
    pruned = count_subgraphs(EnumerationMode.SEMANTIC_LOOK, n, nl)
    print(f"{n:>4} {nl:>4} {base:>10} {pruned:>8}")


#%%
# the pruned count only depends on nl, so it stays flat as the graph grows
for n in range(6, 30, 4):
    print(n, count_subgraphs(EnumerationMode.ONTOLOOK_BASELINE, n, 4),
          count_subgraphs(EnumerationMode.SEMANTIC_LOOK, n, 4))
