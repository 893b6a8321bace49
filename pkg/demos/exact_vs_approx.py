"""Random features against exact kernel sums, and the discrete kernel.

Run with ``python demos/exact_vs_approx.py``.
"""

import math

import numpy as np

from liftclust import DataSet, LiftConfig, LiftContext, Partition, discrete, gaussian, lift_emd, rand_distance
from liftclust.datasets import blobs, noisy_copies
from liftclust.experiments import lifting_times

"""## Agreement on a noisy partition

The approximate path should land within a few hundredths of the exact value
once rho is in the thousands.
"""

ds, truth = blobs(g=3, sep=6, n=300, seed=0)
(noisy,) = noisy_copies(truth, 1, 0.1, seed=0)
exact = lift_emd(truth, noisy, LiftContext.exact(ds, gaussian(3.0)))
print(f"exact LiftEMD: {exact:.4f}")
for rho in (100, 1000, 5000):
    approx = lift_emd(truth, noisy, LiftContext.approximate(ds, bandwidth=3.0, cfg=LiftConfig(rho=rho), seed=1))
    print(f"rho={rho:5d}: {approx:.4f}  (error {abs(approx - exact):.4f})")

"""## The discrete kernel

With k(x, y) = 1 only when x = y, the kernel distance between two clusters
is sqrt(|C xor C'|). Normalizing every cluster first does not keep LiftEMD
below the Rand distance, as the all-singletons example shows.
"""

n = 10
pts = DataSet(np.arange(n, dtype=float).reshape(-1, 1))
ctx = LiftContext.exact(pts, discrete())
singletons, whole = Partition(np.eye(n)), Partition(np.ones((n, 1)))
print(f"rand = {rand_distance(singletons, whole):.3f}, LiftEMD = {lift_emd(singletons, whole, ctx):.3f}"
      f" = sqrt(2 - 2/sqrt(n)) = {math.sqrt(2 - 2 / math.sqrt(n)):.3f}")

"""## Lifting cost

Lifting is one matrix product, so it grows linearly in n.
"""

ns = [1000, 2000, 4000, 8000]
for n_pts, t in zip(ns, lifting_times(ns, rho=500)):
    print(f"n={n_pts:5d}: {1e3 * t:.1f} ms")
