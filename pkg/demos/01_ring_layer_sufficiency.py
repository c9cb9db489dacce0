"""How many HVA layers does a periodic chain need?

On a ring of N sites at the critical coupling J = h, the translation-tied
HVA has two angles per layer.  The energy error against exact
diagonalization stays sizable until the circuit has floor(N/2) layers and
then drops to optimizer precision, because only then can the light cone of
the circuit span the whole ring.
"""

import numpy as np

from nlcevqe.lattice import Cluster
from nlcevqe.reference import ed_energy
from nlcevqe.vqe import OptimizerConfig, solve_ring

cfg = OptimizerConfig(ring_starts=4)
print(f"{'N':>3} " + " ".join(f"{'l=' + str(l):>10}" for l in range(1, 7)))
for n in range(4, 13):
    e0 = ed_energy(Cluster(1, n), 1.0, 1.0, periodic=True)
    errs = []
    for layers in range(1, 7):
        rec = solve_ring(n, layers, 1.0, cfg)
        errs.append(max((rec.energy - e0) / abs(e0), 1e-16))
    marks = ["*" if l == n // 2 else " " for l in range(1, 7)]
    print(f"{n:>3} " + " ".join(f"{e:9.1e}{m}" for e, m in zip(errs, marks)))
print("* marks l = floor(N/2); entries are relative errors (E_vqe - E_ed) / |E_ed|")
