"""Open chains: periodic HVA against plain HVA.

A plain HVA on an open chain cannot build the boundary correlations of the
ground state with floor(N/2) layers.  The pHVA adds one parametrized
XX link per layer between the two ends.  Seeded with the optimal ring
angles, it starts from a state that already solves the closed ring and only
has to switch the link off.
"""

import numpy as np

from nlcevqe.ansatz import build_ansatz
from nlcevqe.lattice import Cluster
from nlcevqe.model import build_hamiltonian
from nlcevqe.reference import ed_energy
from nlcevqe.vqe import minimize, seed_parameters

N, LAYERS = 12, 6
chain = Cluster(1, N)
terms = build_hamiltonian(chain, 1.0, 1.0)
e0 = ed_energy(chain, 1.0, 1.0)

phva = build_ansatz(chain, LAYERS, "phva")
rec = minimize(phva, terms, seed_parameters(phva, 1.0))
print(f"pHVA, ring-seeded: relative error {(rec.energy - e0) / abs(e0):.2e} after {rec.iterations} iterations")

hva = build_ansatz(chain, LAYERS, "hva")
errs = []
for seed in range(10):
    r = minimize(hva, terms, np.random.default_rng(seed).uniform(0, np.pi, hva.n_free))
    errs.append((r.energy - e0) / abs(e0))
print("HVA, random starts:", " ".join(f"{e:.1e}" for e in errs))
print(f"HVA median {np.median(errs):.2e}")
