"""Training loop: dynamical clustering cost, single-entry mutation, accept-if-lower."""

import json
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .network import (
    CurrentSolver,
    Hamiltonian,
    LindbladSpec,
    NetworkTopology,
    SteadyStateError,
)

COST_MODES = ("clustering", "localization")
LOCALIZATION_WINDOW = (0.4, 0.6)
MAX_INIT_RETRIES = 50
STREAMS = ("data", "init", "mutation")


def substream(seed, name):
    """Independent generator for one named use of a seed (``data``, ``init`` or ``mutation``)."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(STREAMS.index(name),)))


@dataclass
class Dataset:
    vectors: np.ndarray
    labels: np.ndarray = None
    name: str = ""

    def __post_init__(self):
        v = np.asarray(self.vectors)
        if v.ndim != 2:
            raise ValueError("dataset vectors must form an (N, L) array")
        if v.shape[0] < 2:
            raise ValueError("dataset needs at least two vectors")
        norms = np.linalg.norm(v, axis=1)
        if not np.allclose(norms, 1.0, rtol=0, atol=1e-10):
            worst = int(np.argmax(np.abs(norms - 1)))
            raise ValueError(f"vector {worst} has norm {norms[worst]!r}, expected 1")
        self.vectors = v
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if self.labels.shape != (v.shape[0],):
                raise ValueError("labels must have one entry per vector")

    @property
    def N(self):
        return self.vectors.shape[0]

    @property
    def L(self):
        return self.vectors.shape[1]

    def __len__(self):
        return self.N


@dataclass(frozen=True)
class TrainingConfig:
    architecture: tuple = (3, 2, 4)
    T: int = 5000
    P: int = 8
    h_max: float = 2.0
    mutation_law: tuple = ("uniform",)
    seed: int = 0
    cost_mode: str = "clustering"
    window: int = 200
    min_delta: float = 1e-4
    mask_policy: str = "open"
    allow_onsite: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.T < 1 or self.P < 1 or not self.h_max > 0:
            raise ValueError("need T >= 1, P >= 1 and h_max > 0")
        if self.cost_mode not in COST_MODES:
            raise ValueError(f"cost_mode must be one of {COST_MODES}")
        if self.cost_mode == "localization" and self.architecture[2] != 2:
            raise ValueError("localization cost needs q = 2")
        object.__setattr__(self, "architecture", tuple(int(a) for a in self.architecture))
        law = self.mutation_law
        if isinstance(law, str):
            law = (law,)
        object.__setattr__(self, "mutation_law", tuple(law))

    def topology(self):
        L, M, q = self.architecture
        return NetworkTopology(L, M, q, policy=self.mask_policy, allow_onsite=self.allow_onsite)


@dataclass
class TrainingTrace:
    iterations: list = field(default_factory=list)
    entries: list = field(default_factory=list)
    candidate_costs: list = field(default_factory=list)
    accepted: list = field(default_factory=list)
    costs: list = field(default_factory=list)
    initial_cost: float = math.inf
    hamiltonian: Hamiltonian = None
    solves: int = 0

    @property
    def accepted_costs(self):
        out = [self.initial_cost]
        out += [c for c, a in zip(self.costs, self.accepted) if a]
        return out

    def records(self):
        for it, ent, cand, acc, cost in zip(
            self.iterations, self.entries, self.candidate_costs, self.accepted, self.costs
        ):
            yield {
                "iteration": it,
                "entry": list(ent),
                "candidate_costs": [_json_float(c) for c in cand],
                "accepted": acc,
                "cost": _json_float(cost),
            }

    def to_log(self):
        head = {"iteration": 0, "entry": None, "candidate_costs": [], "accepted": True,
                "cost": _json_float(self.initial_cost)}
        lines = [json.dumps(head)] + [json.dumps(r) for r in self.records()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_log(cls, text):
        trace = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            r = json.loads(line)
            if r["iteration"] == 0:
                trace.initial_cost = _from_json_float(r["cost"])
                continue
            trace.iterations.append(r["iteration"])
            trace.entries.append(tuple(r["entry"]))
            trace.candidate_costs.append([_from_json_float(c) for c in r["candidate_costs"]])
            trace.accepted.append(r["accepted"])
            trace.costs.append(_from_json_float(r["cost"]))
        return trace


def _json_float(x):
    return x if math.isfinite(x) else None


def _from_json_float(x):
    return math.inf if x is None else float(x)


def one_hot_targets(J):
    J = np.asarray(J, dtype=float)
    out = np.zeros_like(J)
    out[np.arange(J.shape[0]), np.argmax(J, axis=1)] = 1.0
    return out


def clustering_cost(J):
    """Sum of squared distances from each current row to its own argmax one-hot vector."""
    J = np.asarray(J, dtype=float)
    return float(np.sum((one_hot_targets(J) - J) ** 2))


def localization_tags(J):
    J = np.asarray(J, dtype=float)
    if J.shape[-1] != 2:
        raise ValueError("localization tags need exactly two output currents")
    lo, hi = LOCALIZATION_WINDOW
    inside = (J >= lo) & (J <= hi)
    tags = np.full(J.shape, 0.5)
    first = inside[..., 0] & ~inside[..., 1]
    second = inside[..., 1] & ~inside[..., 0]
    tags[first] = (1.0, 0.0)
    tags[second] = (0.0, 1.0)
    return tags


def localization_cost(J):
    J = np.atleast_2d(np.asarray(J, dtype=float))
    return float(np.sum((localization_tags(J) - J) ** 2))


COST_FUNCTIONS = {"clustering": clustering_cost, "localization": localization_cost}


def draw_value(law, rng, h_max):
    kind = law[0]
    if kind == "uniform":
        v = rng.uniform(-h_max, h_max)
    elif kind == "constant":
        v = float(law[1])
    elif kind == "normal":
        v = rng.normal(0.0, float(law[1]))
    else:
        raise ValueError(f"unknown mutation law {law!r}")
    return float(np.clip(v, -h_max, h_max))


def mutate_candidates(H, rng, P, mutation_law=("uniform",), h_max=None):
    """Pick one allowed entry uniformly and return P candidates that redraw only that entry.

    Returns ``((i, j), candidates)``.
    """
    h_max = H.h_max if h_max is None else h_max
    if h_max is None:
        raise ValueError("h_max is required")
    entries = H.topology.allowed_entries()
    if not entries:
        raise ValueError("topology has no mutable entries")
    i, j = entries[rng.integers(len(entries))]
    values = [draw_value(mutation_law, rng, h_max) for _ in range(P)]
    return (i, j), [H.with_entry(i, j, v) for v in values]


class CostEvaluator:
    """Cost of a Hamiltonian on a fixed dataset; counts steady-state solves."""

    def __init__(self, dataset, spec, cost_mode="clustering"):
        self.psis = dataset.vectors
        self.spec = spec
        self.cost_fn = COST_FUNCTIONS[cost_mode]
        self.solves = 0
        self._lock = threading.Lock()

    def currents(self, H):
        with self._lock:
            self.solves += self.psis.shape[0]
        return CurrentSolver(H, self.spec).currents(self.psis)

    def __call__(self, H):
        try:
            J = self.currents(H)
        except SteadyStateError:
            return math.inf
        if not np.all(np.isfinite(J)):
            return math.inf
        return self.cost_fn(J)


def _template_spec(spec, topology):
    if spec is None:
        return LindbladSpec.for_topology(topology)
    return LindbladSpec(
        psi=np.eye(topology.L)[0],
        output_sites=spec.output_sites or tuple(topology.output_sites),
        gamma_in=spec.gamma_in,
        gamma_out=spec.gamma_out,
        gamma_dephase=spec.gamma_dephase,
    )


def _converged(costs, window, min_delta):
    if window <= 0 or len(costs) <= window:
        return False
    old, new = costs[-window - 1], costs[-1]
    if not math.isfinite(old):
        return False
    return old - new <= min_delta * max(abs(old), 1e-300)


def train(dataset, spec, cfg, callback=None):
    """Optimize the hopping matrix for a dataset; returns ``(H, labels, trace)``.

    ``spec`` is a template: its injection vector is replaced per data point.
    Labels are 1-based output-port indices.
    """
    topo = cfg.topology()
    if dataset.L != topo.L:
        raise ValueError(f"dataset vectors have dimension {dataset.L}, architecture needs L = {topo.L}")
    spec = _template_spec(spec, topo)
    evaluate = CostEvaluator(dataset, spec, cfg.cost_mode)
    init_rng, mut_rng = substream(cfg.seed, "init"), substream(cfg.seed, "mutation")

    for _ in range(MAX_INIT_RETRIES):
        H = Hamiltonian.random(topo, init_rng, cfg.h_max)
        cost = evaluate(H)
        if math.isfinite(cost):
            break
    else:
        raise SteadyStateError("could not draw an initial Hamiltonian with a unique steady state")

    trace = TrainingTrace(initial_cost=cost)
    history = [cost]
    pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None
    try:
        for it in range(1, cfg.T + 1):
            entry, cands = mutate_candidates(H, mut_rng, cfg.P, cfg.mutation_law, cfg.h_max)
            if pool is None:
                cand_costs = [evaluate(c) for c in cands]
            else:
                cand_costs = list(pool.map(evaluate, cands))
            best = int(np.argmin(cand_costs))
            accepted = cand_costs[best] < cost
            if accepted:
                H, cost = cands[best], cand_costs[best]
            trace.iterations.append(it)
            trace.entries.append(entry)
            trace.candidate_costs.append(cand_costs)
            trace.accepted.append(bool(accepted))
            trace.costs.append(cost)
            history.append(cost)
            if callback is not None:
                callback(it, H, cost, accepted)
            if _converged(history, cfg.window, cfg.min_delta):
                break
    finally:
        if pool is not None:
            pool.shutdown()

    trace.hamiltonian = H
    trace.solves = evaluate.solves
    return H, assign(H, dataset, spec), trace


def assign(H, dataset, spec=None):
    """Label each input by its highest-current output port (1-based, lowest index wins ties)."""
    spec = _template_spec(spec, H.topology)
    psis = dataset.vectors if isinstance(dataset, Dataset) else np.atleast_2d(dataset)
    J = CurrentSolver(H, spec).currents(psis)
    return np.argmax(J, axis=1) + 1
