"""Square lattice at the critical coupling J/h = 0.328.

The reference is the series-plus-Pade table shipped with the package
(see 07_square_series_reference.py).  NLCE+ED and NLCE+VQE are run with
rectangles up to 12 sites; the 14-site order adds the 2x7 rectangle.  The
last block removes one and two layers from every cluster.  Expect about an
hour of compute on one core, mostly for the 12- and 14-site rectangles.
"""

from nlcevqe.nlce import LayerRule, run_nlce
from nlcevqe.reference import shipped_square_reference

RATIO = 0.328
ref = shipped_square_reference()(RATIO)
print(f"reference e = {ref:.9f}")

ed = run_nlce("square", 14, [RATIO], "ed")
vqe = run_nlce("square", 14, [RATIO], "vqe", checkpoint="square_vqe.jsonl")
print(f"{'order':>5} {'ED rel':>10} {'VQE rel':>10} {'VQE - ED':>10}")
for n in sorted(ed.orders):
    e, v = ed.orders[n][0], vqe.orders[n][0]
    print(f"{n:>5} {e / ref - 1:10.2e} {v / ref - 1:10.2e} {v - e:10.1e}")
for cid, diag in vqe.diagnostics.items():
    if diag.get("flagged"):
        print(f"  {cid}: VQE above ED by {diag['max_excess_over_ed']:.1e}")

for rule in ("ceil-1", "ceil-2"):
    res = run_nlce("square", 12, [RATIO], "vqe", layer_rule=LayerRule.parse(rule))
    print(f"{rule:>7}: relative deviation {res.energy()[0] / ref - 1:.2e}")
