"""
Bipartite entanglement of SYK ground states
===========================================

The half-chain entropy grows with L but stays below the page value.
"""

import numpy as np

from syknqs import bipartite_entropy, build_problem, page_value

for L in (8, 10, 12):
    S = [bipartite_entropy(p.gs.vector, p.basis) for p in (build_problem("syk", L, s) for s in range(4))]
    print(f"L={L:2d}  S = {np.mean(S):.3f} +- {np.std(S):.3f}   page = {page_value(L):.3f}")

# %%
# The Heisenberg ground state is much less entangled.
heis = build_problem("heisenberg", 12)
print("Heisenberg L=12:", round(bipartite_entropy(heis.gs.vector, heis.basis), 3))
