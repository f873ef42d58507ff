"""Unsupervised clustering with steady-state currents of an open quantum network."""

from .baseline import KMeansConfig, kmeans
from .encoders import (
    SyntheticSpec,
    binarize_by_mean,
    ipr,
    ipr_dataset,
    load_iris,
    load_xyz_batch,
    sid_fingerprint,
    synthetic_sphere,
)
from .engine import Dataset, TrainingConfig, TrainingTrace, assign, train
from .network import (
    CurrentSolver,
    DegenerateSteadyState,
    Hamiltonian,
    LindbladSpec,
    NetworkTopology,
    NoSteadyState,
    build_liouvillian,
    output_currents,
    steady_state,
)
from .validation import adjusted_rand_index, consensus, consensus_clusters, rand_index, stability

__version__ = "0.1.0"
