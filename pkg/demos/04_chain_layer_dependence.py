"""Fewer layers than ceil(N/2) on the chain.

Every cluster of the chain expansion up to 12 sites is solved with
ceil(N/2), ceil(N/2)-1 and ceil(N/2)-2 pHVA layers.  The error of the
expansion at J = h does not grow monotonically as layers are removed:
the ceil(N/2)-1 circuits land in poorer minima than the shallower ones.
"""

from nlcevqe.nlce import LayerRule, run_nlce
from nlcevqe.reference import exact_chain_energy_per_site

exact = exact_chain_energy_per_site(1.0, 1.0)
for rule in ("ceil", "ceil-1", "ceil-2"):
    res = run_nlce("chain", 12, [1.0], "vqe", layer_rule=LayerRule.parse(rule))
    e = res.energy()[0]
    print(f"{rule:>7}: e = {e:.10f}  |e - exact| = {abs(e - exact):.2e}")
