"""Consensus of five standard clusterings of Iris.

Run with ``python demos/consensus_iris.py``.
"""

from liftclust import ConsensusConfig, LiftConfig, accuracy, build_feature_map, gaussian, median_bandwidth, rand_distance, run_consensus
from liftclust.datasets import base_partitions, load_iris

ds, labels = load_iris()

"""## Base partitions

k-means and four linkage criteria, all cut at k=3.
"""

inputs = base_partitions(ds, 3, seed=0)
for name, p in inputs.items():
    print(f"{name:9s} rand {rand_distance(p, labels):.3f}  accuracy {accuracy(p, labels):.3f}")

"""## Consensus

Every cluster of every input becomes a unit vector in feature space,
weighted by its share of the points. Those 15 vectors are grouped into 3 and
each flower joins the group it has the largest inner product with.
"""

bw = median_bandwidth(ds.points)
fm = build_feature_map(gaussian(bw), ds.d, LiftConfig(), ds.n, seed=0)
print(f"\nbandwidth {bw:.3f}, rho {fm.rho}")
for method in ("kmeans", "hac"):
    res = run_consensus(fm, ds, list(inputs.values()), cfg=ConsensusConfig(k=3, method=method))
    c = res.consensus
    print(f"consensus ({method:6s}) rand {rand_distance(c, labels):.3f}  accuracy {accuracy(c, labels):.3f}  liftSSD {res.objective:.4f}")
    names = list(inputs)
    for g in range(3):
        members = [f"{names[i]}:{j}" for (i, j), grp in res.provenance.items() if grp == g]
        print(f"   group {g}: {', '.join(members)}")
