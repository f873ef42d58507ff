"""k-means on the same inputs the networks see.

Vectors are mapped to R^(2L) by stacking real and imaginary parts; 50
k-means++ restarts, lowest inertia wins.

Run:  python demos/kmeans_reference.py
"""

from qlustering import KMeansConfig, SyntheticSpec, ipr_dataset, kmeans, load_iris, synthetic_sphere
from qlustering.encoders import FOUR_GROUP_BASE_POINTS, bundled_path
from qlustering.engine import substream
from qlustering.validation import adjusted_rand_index, rand_index

cases = {
    "sphere, omega 0.1": (synthetic_sphere(SyntheticSpec(FOUR_GROUP_BASE_POINTS, 0.1, 60, 0), rng=substream(0, "data")), 4),
    "iris, 4 features": (load_iris(bundled_path("iris.csv")), 3),
    "iris, 3 features": (load_iris(bundled_path("iris.csv"), drop_sepal_width=True), 3),
    "ipr gap 7": (ipr_dataset(10, 50, 7.0, rng=substream(0, "data")), 2),
    "ipr gap 1": (ipr_dataset(10, 50, 1.0, rng=substream(0, "data")), 2),
}
for name, (data, k) in cases.items():
    labels, _, inertia = kmeans(data, KMeansConfig(k, restarts=50))
    print(f"{name:<18} RI {rand_index(labels, data.labels):.3f}  ARI {adjusted_rand_index(labels, data.labels):.3f}"
          f"  inertia {inertia:.3f}")
