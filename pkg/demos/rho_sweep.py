"""How many random features does LiftEMD need?

Run with ``python demos/rho_sweep.py``.
"""

from liftclust import LiftConfig, rho_for
from liftclust.datasets import sensitivity_partitions, two_gauss
from liftclust.experiments import rho_sweep

"""## Error against the exact value

For each rho the feature map is redrawn ten times; the exact LiftEMD uses
kernel sums with no approximation.
"""

ds, truth = two_gauss(seed=0)
rp, fp, _ = sensitivity_partitions(ds, truth)
rows = rho_sweep(ds, rp, fp, [10, 25, 50, 100, 200, 400, 800, 1600], n_seeds=10)
print(f"exact LiftEMD(RP, FP) = {rows[0]['exact']:.4f}  (bandwidth {rows[0]['bandwidth']:.3f})")
print(f"{'rho':>6s} {'mean err':>9s} {'max err':>9s}")
for r in rows:
    print(f"{r['rho']:6d} {r['mean_error']:9.4f} {r['max_error']:9.4f}")

"""## What the accuracy request would have asked for

The worst-case rho for every pair within eps is far larger than what this
distance needs in practice.
"""

for eps in (0.3, 0.2, 0.1):
    print(f"eps={eps}: rho = {rho_for(LiftConfig(epsilon=eps, delta=0.05), ds.n)}")
