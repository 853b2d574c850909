"""
FLOPs census of the whole search space
======================================

No training here: every genome is priced with the analytic cost model.
The classical share depends only on the qubit count, so it is the quantum
share that separates candidates of the same width.
"""
from collections import defaultdict

import numpy as np

from hqnas.datasets import SHAPES
from hqnas.flops import measure
from hqnas.search_space import SPACE_SIZE, enumerate_space

d, n_classes = SHAPES["digits"]
reports = [(g, measure(g, d, n_classes)) for g in enumerate_space()]
print(f"{len(reports)} genomes (expected {SPACE_SIZE})")

# %% quantum FLOPs range per width
by_width = defaultdict(list)
for g, r in reports:
    by_width[g.n_qubits].append(r)
print(" n   classical   quantum min   quantum max")
for n, rs in sorted(by_width.items()):
    fq = np.array([r.f_quantum for r in rs])
    print(f"{n:2d} {rs[0].f_classical:11d} {fq.min():13d} {fq.max():13d}")

# %% the cheapest circuits overall
for g, r in sorted(reports, key=lambda t: t[1].f_quantum)[:5]:
    print(r.f_quantum, g)
