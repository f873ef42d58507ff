"""Cluster noisy copies of four points on the unit sphere in C^3.

Trains ten 3-2-4 networks from different seeds, prints each run's Rand
index, then the consensus partition built from all of them.  Takes a
few minutes on one core.

Run:  python demos/synthetic_clusters.py [omega]
"""

import sys
import time

import numpy as np

from qlustering import LindbladSpec, SyntheticSpec, TrainingConfig, synthetic_sphere, train
from qlustering.encoders import FOUR_GROUP_BASE_POINTS
from qlustering.engine import substream
from qlustering.validation import adjusted_rand_index, consensus, consensus_clusters, rand_index, stability

omega = float(sys.argv[1]) if len(sys.argv) > 1 else 0.15

data = synthetic_sphere(SyntheticSpec(FOUR_GROUP_BASE_POINTS, omega, 60, 0), rng=substream(0, "data"))
spec = LindbladSpec(np.eye(3)[0], (5, 6, 7, 8))

runs = []
t0 = time.time()
for seed in range(10):
    H, labels, trace = train(data, spec, TrainingConfig((3, 2, 4), seed=seed))
    runs.append(labels)
    print(f"seed {seed}: {len(trace.costs):5d} iterations, cost {trace.accepted_costs[-1]:.3f}, "
          f"RI {rand_index(labels, data.labels):.3f}, clusters used {len(set(labels))}")

C = consensus(runs)
part = consensus_clusters(C, 4)
print(f"\nomega = {omega}: {time.time() - t0:.0f} s")
print(f"stability {stability(runs):.3f}")
print(f"consensus RI {rand_index(part, data.labels):.3f}  ARI {adjusted_rand_index(part, data.labels):.3f}")
