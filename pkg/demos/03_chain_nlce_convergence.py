"""Rectangular NLCE on the chain at the critical point.

On the chain the expansion telescopes: the order-L estimate is
E(1xL) - E(1x(L-1)).  At J = h the exact energy per site is -4/pi, and the
error of the expansion decays algebraically with the largest cluster,
which shows up as a straight line on a log-log plot.  The VQE column uses
ceil(L/2) pHVA layers per cluster and reproduces the ED column.
"""

import numpy as np

from nlcevqe.nlce import run_nlce
from nlcevqe.reference import exact_chain_energy_per_site

exact = exact_chain_energy_per_site(1.0, 1.0)
ed = run_nlce("chain", 18, [1.0], "ed")
vqe = run_nlce("chain", 12, [1.0], "vqe")
print(f"exact e = {exact:.12f}")
print(f"{'order':>5} {'e_ed':>16} {'abs err':>9} {'rel err':>9} {'|e_vqe - e_ed|':>15}")
orders, errs = [], []
for n in range(2, 19):
    e = ed.orders[n][0]
    diff = f"{abs(vqe.orders[n][0] - e):15.1e}" if n in vqe.orders else ""
    print(f"{n:>5} {e:16.12f} {abs(e - exact):9.2e} {abs(e / exact - 1):9.2e} {diff}")
    orders.append(n)
    errs.append(abs(e - exact))
slope = np.polyfit(np.log(orders[6:]), np.log(errs[6:]), 1)[0]
print(f"log-log slope of the absolute error for orders 8..18: {slope:.2f}")
