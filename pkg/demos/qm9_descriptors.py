"""Which molecular property does an unsupervised split of the fixture follow?

Each molecule becomes the sorted list of its heavy-atom distances (a
10-dimensional unit vector here).  A 10-3-2 network splits the batch in
two; every stored descriptor is then thresholded at its mean and ranked
by how well that binary split agrees with the network's.

Run:  python demos/qm9_descriptors.py
"""

import numpy as np

from qlustering import LindbladSpec, TrainingConfig, load_xyz_batch, train
from qlustering.cli import descriptor_scan
from qlustering.encoders import bundled_path, sid_dataset
from qlustering.validation import consensus, consensus_clusters, silhouette, stability

mols = load_xyz_batch(bundled_path("qm9_subset"))
data = sid_dataset(mols)
print(f"{len(mols)} molecules, fingerprint length {data.L}")

spec = LindbladSpec(np.eye(data.L)[0], tuple(range(data.L + 3, data.L + 5)))
runs = [train(data, spec, TrainingConfig((data.L, 3, 2), seed=s))[1] for s in range(10)]
part = consensus_clusters(consensus(runs), 2)
print(f"stability {stability(runs):.3f}, silhouette {silhouette(data, part):.3f}")

print(f"\n{'rank':>4}  {'descriptor':<10} {'RI':>6} {'ARI':>7}")
for rank, name, ri, ari, degenerate in descriptor_scan(mols, part):
    flag = "  (all equal)" if degenerate else ""
    print(f"{rank:4d}  {name:<10} {ri:6.3f} {ari:7.3f}{flag}")
