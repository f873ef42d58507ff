"""Experiment runner: ``qlustering {run,sweep,baseline,qm9-scan,metrics}``.

Every subcommand reads one YAML config. The run bundle written under
``--out`` is::

    manifest                 JSON: resolved config, seeds, per-run status, timings
    runs/<i>/partition.csv   point,label
    runs/<i>/trace.log       one JSON object per iteration
    metrics.csv              metric,value,run
    consensus.csv            dense co-clustering matrix
    consensus_partition.csv  point,label

Everything except ``manifest`` is a pure function of the config and seeds.
"""

import argparse
import copy
import csv
import dataclasses
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import encoders
from .baseline import KMeansConfig, kmeans
from .engine import TrainingConfig, substream, train
from .network import LindbladSpec, SteadyStateError
from .validation import (
    adjusted_rand_index,
    compactness,
    consensus,
    consensus_clusters,
    dunn_index,
    rand_index,
    read_metrics_csv,
    silhouette,
    stability,
    write_matrix_csv,
    write_metrics_csv,
)

log = logging.getLogger("qlustering")

TASKS = ("synthetic", "localization", "qm9", "iris", "custom")
SWEEP_AXES = {"omega": ("dataset", "omega"), "delta_ipr": ("dataset", "delta_ipr"),
              "dephasing": ("network", "gamma_dephase")}
BASE_POINTS = {"four": encoders.FOUR_GROUP_BASE_POINTS, "five": encoders.FIVE_GROUP_BASE_POINTS}

_TRAIN_DEFAULTS = {f.name: f.default for f in dataclasses.fields(TrainingConfig)}
_NUM = (int, float)

# key -> (accepted types, default); nested dicts are sections
SCHEMA = {
    "task": (str, "synthetic"),
    "architecture": (list, None),
    "seeds": (list, [0]),
    "repeats": (int, None),
    "threads": (int, 1),
    "out": (str, None),
    "dataset": {
        "base_points": ((str, list), "four"),
        "omega": (_NUM, 0.15),
        "N": (int, None),
        "L": (int, 10),
        "delta_ipr": (_NUM, 7.0),
        "drop_sepal_width": (bool, False),
        "path": (str, None),
        "pad_len": (int, None),
        "tag": (str, "A"),
        "seed": (int, None),
    },
    "training": {
        "T": (int, _TRAIN_DEFAULTS["T"]),
        "P": (int, _TRAIN_DEFAULTS["P"]),
        "h_max": (_NUM, _TRAIN_DEFAULTS["h_max"]),
        "mutation_law": ((str, list), "uniform"),
        "cost_mode": (str, None),
        "window": (int, _TRAIN_DEFAULTS["window"]),
        "min_delta": (_NUM, _TRAIN_DEFAULTS["min_delta"]),
        "mask_policy": (str, _TRAIN_DEFAULTS["mask_policy"]),
        "allow_onsite": (bool, _TRAIN_DEFAULTS["allow_onsite"]),
    },
    "network": {
        "gamma_in": (_NUM, 1.0),
        "gamma_out": (_NUM, 1.0),
        "gamma_dephase": (_NUM, 0.0),
    },
    "sweep": {
        "axis": (str, None),
        "values": (list, None),
    },
    "baseline": {
        "k": (int, None),
        "restarts": (int, 50),
        "max_iters": (int, 300),
        "init": (str, "plus-plus"),
        "seed": (int, 0),
    },
}


class ConfigError(ValueError):
    def __init__(self, key, msg):
        super().__init__(f"{key}: {msg}")
        self.key = key


def _typecheck(key, value, types):
    types = types if isinstance(types, tuple) else (types,)
    if isinstance(value, bool) and bool not in types:
        raise ConfigError(key, f"expected {'/'.join(t.__name__ for t in types)}, got a boolean")
    if not isinstance(value, types):
        raise ConfigError(key, f"expected {'/'.join(t.__name__ for t in types)}, got {type(value).__name__}")


def _fill(raw, schema, prefix=""):
    if not isinstance(raw, dict):
        raise ConfigError(prefix.rstrip(".") or "<root>", "expected a mapping")
    for key in raw:
        if key not in schema:
            raise ConfigError(prefix + str(key), "unknown key")
    out = {}
    for key, rule in schema.items():
        path = prefix + key
        if isinstance(rule, dict):
            out[key] = _fill(raw.get(key) or {}, rule, path + ".")
            continue
        types, default = rule
        value = raw.get(key)
        if value is None:
            out[key] = copy.deepcopy(default)
            continue
        _typecheck(path, value, types)
        out[key] = value
    return out


@dataclasses.dataclass
class ExperimentConfig:
    task: str
    architecture: tuple
    seeds: list
    threads: int
    out: str
    dataset: dict
    training: dict
    network: dict
    sweep: dict
    baseline: dict
    source: str = ""

    def to_dict(self):
        d = dataclasses.asdict(self)
        d.pop("source")
        d["architecture"] = list(self.architecture)
        return d

    def with_value(self, section, key, value):
        new = copy.deepcopy(self)
        getattr(new, section)[key] = value
        return new

    @property
    def q(self):
        return self.architecture[2]

    def training_config(self, seed, threads=1):
        t = self.training
        law = t["mutation_law"]
        return TrainingConfig(
            architecture=self.architecture, T=t["T"], P=t["P"], h_max=float(t["h_max"]),
            mutation_law=(law,) if isinstance(law, str) else tuple(law), seed=int(seed),
            cost_mode=t["cost_mode"], window=t["window"], min_delta=float(t["min_delta"]),
            mask_policy=t["mask_policy"], allow_onsite=t["allow_onsite"], threads=threads,
        )

    def lindblad_spec(self):
        L, M, q = self.architecture
        n = self.network
        return LindbladSpec(
            psi=np.eye(L)[0], output_sites=tuple(range(L + M, L + M + q)),
            gamma_in=float(n["gamma_in"]), gamma_out=float(n["gamma_out"]),
            gamma_dephase=float(n["gamma_dephase"]),
        )


def _check_range(key, ok, msg):
    if not ok:
        raise ConfigError(key, msg)


def _resolve_path(value, base):
    p = Path(value).expanduser()
    if not p.is_absolute() and base is not None:
        p = Path(base) / p
    return p


def _default_path(task, drop):
    if task == "iris":
        return encoders.bundled_path("iris.csv")
    if task == "qm9":
        return encoders.bundled_path("qm9_subset")
    return None


def config_from_dict(raw, base_dir=None, source=""):
    """Validate a raw mapping against the schema and resolve task defaults."""
    c = _fill(raw or {}, SCHEMA)
    task = c["task"]
    _check_range("task", task in TASKS, f"must be one of {', '.join(TASKS)}")
    ds, tr, net = c["dataset"], c["training"], c["network"]

    seeds = c["seeds"]
    _check_range("seeds", len(seeds) > 0, "seed list must be non-empty")
    for i, s in enumerate(seeds):
        _typecheck(f"seeds[{i}]", s, int)
    if c["repeats"] is not None:
        R = c["repeats"]
        _check_range("repeats", R >= 1, "must be >= 1")
        if len(seeds) == 1:
            seeds = [seeds[0] + i for i in range(R)]
        else:
            _check_range("repeats", R == len(seeds), f"{R} repeats but {len(seeds)} seeds listed")
    _check_range("threads", c["threads"] >= 1, "must be >= 1")

    if isinstance(ds["base_points"], str):
        _check_range("dataset.base_points", ds["base_points"] in BASE_POINTS,
                     f"must be one of {', '.join(BASE_POINTS)} or a list of vectors")
    _check_range("dataset.omega", 0 < ds["omega"] <= 1, "must lie in (0, 1]")
    _check_range("dataset.L", ds["L"] >= 2, "must be >= 2")
    _check_range("dataset.delta_ipr", 0 < ds["delta_ipr"] < ds["L"] - 1, f"must lie in (0, {ds['L'] - 1})")
    if ds["N"] is not None:
        _check_range("dataset.N", ds["N"] >= 2, "must be >= 2")
    if ds["path"] is not None:
        p = _resolve_path(ds["path"], base_dir)
        _check_range("dataset.path", p.exists(), f"no such file or directory: {p}")
        ds["path"] = str(p)
    elif task == "custom":
        raise ConfigError("dataset.path", "required for task 'custom'")
    else:
        default = _default_path(task, ds["drop_sepal_width"])
        ds["path"] = None if default is None else str(default)

    arch = c["architecture"]
    if arch is None:
        arch = _default_architecture(task, ds)
        if arch is None:
            raise ConfigError("architecture", f"required for task {task!r}")
    _check_range("architecture", len(arch) == 3 and all(isinstance(a, int) and not isinstance(a, bool) for a in arch),
                 "must be three integers [L, M, q]")
    L, M, q = arch
    _check_range("architecture", L >= 1 and M >= 0 and q >= 1, "need L >= 1, M >= 0, q >= 1")

    if tr["cost_mode"] is None:
        tr["cost_mode"] = "localization" if task == "localization" else "clustering"
    _check_range("training.cost_mode", tr["cost_mode"] in ("clustering", "localization"),
                 "must be 'clustering' or 'localization'")
    _check_range("training.T", tr["T"] >= 1, "must be >= 1")
    _check_range("training.P", tr["P"] >= 1, "must be >= 1")
    _check_range("training.h_max", tr["h_max"] > 0, "must be > 0")
    _check_range("training.window", tr["window"] >= 0, "must be >= 0")
    _check_range("training.mask_policy", tr["mask_policy"] in ("open", "layered", "full"),
                 "must be 'open', 'layered' or 'full'")
    for k in ("gamma_in", "gamma_out", "gamma_dephase"):
        _check_range(f"network.{k}", net[k] >= 0, "must be >= 0")

    sw = c["sweep"]
    if sw["axis"] is not None:
        _check_range("sweep.axis", sw["axis"] in SWEEP_AXES, f"must be one of {', '.join(SWEEP_AXES)}")
    if sw["values"] is not None:
        _check_range("sweep.values", len(sw["values"]) > 0, "value list must be non-empty")
        for i, v in enumerate(sw["values"]):
            _typecheck(f"sweep.values[{i}]", v, _NUM)

    bl = c["baseline"]
    _check_range("baseline.restarts", bl["restarts"] >= 1, "must be >= 1")
    _check_range("baseline.init", bl["init"] in ("plus-plus", "random"), "must be 'plus-plus' or 'random'")

    cfg = ExperimentConfig(
        task=task, architecture=tuple(arch), seeds=list(seeds), threads=c["threads"], out=c["out"],
        dataset=ds, training=tr, network=net, sweep=sw, baseline=bl, source=source,
    )
    try:
        cfg.training_config(seeds[0])
        cfg.lindblad_spec()
    except ValueError as e:
        raise ConfigError("training", str(e))
    return cfg


def _default_architecture(task, ds):
    if task == "synthetic":
        bp = ds["base_points"]
        pts = BASE_POINTS[bp] if isinstance(bp, str) else np.asarray(bp)
        return [pts.shape[1], 2, pts.shape[0]]
    if task == "localization":
        return [ds["L"], 3, 2]
    if task == "iris":
        return [3 if ds["drop_sepal_width"] else 4, 2, 3]
    if task == "qm9":
        return [ds["pad_len"] or 10, 3, 2]
    return None


def load_config(path):
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise ConfigError("<file>", f"{path}: {e}")
    return config_from_dict(raw, base_dir=path.parent, source=str(path))


def build_dataset(cfg):
    """Dataset for a config; random data comes from the ``data`` stream of the first seed."""
    ds = cfg.dataset
    seed = ds["seed"] if ds["seed"] is not None else cfg.seeds[0]
    rng = substream(seed, "data")
    if cfg.task == "synthetic":
        bp = ds["base_points"]
        pts = BASE_POINTS[bp] if isinstance(bp, str) else np.asarray(bp, dtype=float)
        spec = encoders.SyntheticSpec(pts, float(ds["omega"]), ds["N"] or 60, seed)
        data = encoders.synthetic_sphere(spec, rng=rng)
    elif cfg.task == "localization":
        data = encoders.ipr_dataset(ds["L"], ds["N"] or 50, float(ds["delta_ipr"]), rng=rng)
    elif cfg.task == "iris":
        data = encoders.load_iris(ds["path"], ds["drop_sepal_width"])
    elif cfg.task == "qm9":
        mols = load_molecules(cfg)
        data = encoders.sid_dataset(mols, ds["pad_len"])
        if ds["tag"] is not None:
            data.labels = encoders.binarize_by_mean([m.descriptors[ds["tag"]] for m in mols]) + 1
    else:
        with open(ds["path"], newline="") as fh:
            data = encoders.read_dataset_csv(fh)
    if data.L != cfg.architecture[0]:
        raise ConfigError("architecture", f"L = {cfg.architecture[0]} but the dataset has dimension {data.L}")
    return data


def load_molecules(cfg):
    errors = []
    mols = encoders.load_xyz_batch(cfg.dataset["path"], errors)
    for e in errors:
        print(f"warning: {e}", file=sys.stderr)
    if not mols:
        raise ConfigError("dataset.path", "no readable molecules")
    tag = cfg.dataset["tag"]
    if tag is not None and any(tag not in m.descriptors for m in mols):
        raise ConfigError("dataset.tag", f"descriptor {tag!r} missing from some molecules")
    return mols


# -- metrics -----------------------------------------------------------------

def _safe(fn, *args):
    try:
        return fn(*args)
    except ValueError:
        return math.nan


def partition_metrics(data, labels):
    """RI/ARI against ground truth (when known) plus internal scores."""
    out = {}
    if data.labels is not None:
        out["RI"] = rand_index(labels, data.labels)
        out["ARI"] = adjusted_rand_index(labels, data.labels)
    out["CP"] = compactness(data, labels)
    out["DVI"] = _safe(dunn_index, data, labels)
    out["silhouette"] = _safe(silhouette, data, labels)
    out["n_clusters"] = float(len(np.unique(labels)))
    return out


def ensemble_rows(data, partitions, q, extra=None):
    """metrics.csv rows for a set of run partitions (``None`` marks a failed run)."""
    rows = []
    good = {i: p for i, p in partitions.items() if p is not None}
    per_run = {}
    for i in sorted(good):
        m = partition_metrics(data, good[i])
        m.update((extra or {}).get(i, {}))
        per_run[i] = m
        rows += [(k, v, str(i)) for k, v in m.items()]
    if per_run:
        names = list(next(iter(per_run.values())))
        for k in names:
            vals = np.array([m[k] for m in per_run.values()], dtype=float)
            rows.append((k, float(np.nanmean(vals)) if np.any(np.isfinite(vals)) else math.nan, "mean"))
    C = part = None
    if good:
        runs = [good[i] for i in sorted(good)]
        C = consensus(runs)
        part = consensus_clusters(C, min(q, data.N))
        if len(runs) > 1:
            rows.append(("stability", stability(runs), "ensemble"))
        rows += [(k, v, "consensus") for k, v in partition_metrics(data, part).items()]
    return rows, C, part


def write_partition(path, labels):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["point", "label"])
        for i, lab in enumerate(labels):
            w.writerow([i, int(lab)])


def read_partition(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([int(r["label"]) for r in rows])


# -- run -----------------------------------------------------------------------

def _train_one(cfg, data, spec, index, seed):
    t0 = time.perf_counter()
    try:
        H, labels, trace = train(data, spec, cfg.training_config(seed))
    except (SteadyStateError, np.linalg.LinAlgError, ValueError) as e:
        return index, None, None, {"seed": seed, "status": "failed", "error": str(e),
                                   "seconds": time.perf_counter() - t0}
    info = {"seed": seed, "status": "ok", "iterations": len(trace.costs),
            "final_cost": trace.accepted_costs[-1], "solves": trace.solves,
            "seconds": time.perf_counter() - t0}
    return index, labels, trace, info


def run(cfg, out, threads=None, data=None):
    """Train ``len(cfg.seeds)`` networks and write the run bundle; returns a summary dict."""
    out = Path(out)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    data = build_dataset(cfg) if data is None else data
    spec = cfg.lindblad_spec()
    threads = threads or cfg.threads
    t0 = time.perf_counter()
    jobs = list(enumerate(cfg.seeds))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda j: _train_one(cfg, data, spec, *j), jobs))
    else:
        results = [_train_one(cfg, data, spec, *j) for j in jobs]

    partitions, extra, status = {}, {}, {}
    for i, labels, trace, info in results:
        d = out / "runs" / str(i)
        d.mkdir(exist_ok=True)
        status[str(i)] = info
        partitions[i] = labels
        if labels is None:
            print(f"run {i} (seed {info['seed']}) failed: {info['error']}", file=sys.stderr)
            continue
        write_partition(d / "partition.csv", labels)
        (d / "trace.log").write_text(trace.to_log())
        extra[i] = {"final_cost": info["final_cost"], "iterations": float(info["iterations"])}

    rows, C, part = ensemble_rows(data, partitions, cfg.q, extra)
    _write_ensemble(out, rows, C, part)
    manifest = {
        "command": "run", "config": cfg.to_dict(), "config_file": cfg.source,
        "dataset": {"name": data.name, "N": data.N, "L": data.L},
        "runs": status, "seconds": time.perf_counter() - t0,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    (out / "manifest").write_text(json.dumps(manifest, indent=2, default=float) + "\n")
    return {"rows": rows, "consensus": C, "partition": part, "failed": sum(p is None for p in partitions.values())}


def _write_ensemble(out, rows, C, part):
    with open(out / "metrics.csv", "w", newline="") as fh:
        write_metrics_csv(rows, fh)
    if C is not None:
        with open(out / "consensus.csv", "w", newline="") as fh:
            write_matrix_csv(C, fh)
        write_partition(out / "consensus_partition.csv", part)


def recompute_metrics(out, cfg=None):
    """Rebuild metrics.csv and the consensus files from stored run partitions."""
    out = Path(out)
    manifest = json.loads((out / "manifest").read_text())
    if cfg is None:
        cfg = config_from_dict(manifest["config"])
    data = build_dataset(cfg)
    partitions, extra = {}, {}
    old = {}
    if (out / "metrics.csv").exists():
        with open(out / "metrics.csv", newline="") as fh:
            for name, value, r in read_metrics_csv(fh):
                if name in ("final_cost", "iterations") and r.isdigit():
                    old.setdefault(int(r), {})[name] = value
    for d in sorted((out / "runs").iterdir(), key=lambda p: int(p.name)):
        i = int(d.name)
        f = d / "partition.csv"
        partitions[i] = read_partition(f) if f.exists() else None
        if i in old:
            extra[i] = old[i]
    rows, C, part = ensemble_rows(data, partitions, cfg.q, extra)
    _write_ensemble(out, rows, C, part)
    return rows


def summary_value(rows, metric, run):
    for name, value, r in rows:
        if name == metric and r == run:
            return value
    return math.nan


# -- sweep ---------------------------------------------------------------------

SWEEP_METRICS = ("RI", "ARI", "CP", "DVI", "silhouette")


def sweep(cfg, out, axis=None, values=None, threads=None):
    """One run bundle per axis value plus a tidy ``sweep.csv`` (axis, value, metric, mean, consensus)."""
    axis = axis or cfg.sweep["axis"]
    values = values if values is not None else cfg.sweep["values"]
    if axis is None:
        raise ConfigError("sweep.axis", "no sweep axis given")
    if axis not in SWEEP_AXES:
        raise ConfigError("sweep.axis", f"must be one of {', '.join(SWEEP_AXES)}")
    if not values:
        raise ConfigError("sweep.values", "value list must be non-empty")
    section, key = SWEEP_AXES[axis]
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    table = []
    for v in values:
        sub = config_from_dict(cfg.with_value(section, key, v).to_dict())
        res = run(sub, out / f"{axis}={v:g}", threads=threads)
        rows = res["rows"]
        for m in SWEEP_METRICS + ("stability",):
            mean = summary_value(rows, m, "mean") if m != "stability" else summary_value(rows, m, "ensemble")
            cons = summary_value(rows, m, "consensus")
            if math.isnan(mean) and math.isnan(cons):
                continue
            table.append((axis, float(v), m, mean, cons))
    with open(out / "sweep.csv", "w", newline="") as fh:
        write_sweep_csv(table, fh)
    return table


def write_sweep_csv(table, fh=None):
    buf = fh or io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["axis", "value", "metric", "mean", "consensus"])
    for axis, v, m, mean, cons in table:
        w.writerow([axis, repr(float(v)), m, repr(float(mean)), repr(float(cons))])
    return buf.getvalue() if fh is None else None


def read_sweep_csv(fh):
    return [(r["axis"], float(r["value"]), r["metric"], float(r["mean"]), float(r["consensus"]))
            for r in csv.DictReader(fh)]


# -- baseline ------------------------------------------------------------------

def run_baseline(cfg, out=None, data=None):
    """k-means on the same dataset instance a ``run`` with this config would see."""
    data = build_dataset(cfg) if data is None else data
    b = cfg.baseline
    kc = KMeansConfig(k=b["k"] or cfg.q, restarts=b["restarts"], max_iters=b["max_iters"],
                      seed=b["seed"], init=b["init"])
    labels, centers, inertia = kmeans(data, kc)
    m = partition_metrics(data, labels)
    m["inertia"] = inertia
    rows = [(k, v, "kmeans") for k, v in m.items()]
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "metrics.csv", "w", newline="") as fh:
            write_metrics_csv(rows, fh)
        write_partition(out / "partition.csv", labels)
        manifest = {"command": "baseline", "config": cfg.to_dict(), "config_file": cfg.source,
                    "created": time.strftime("%Y-%m-%dT%H:%M:%S")}
        (out / "manifest").write_text(json.dumps(manifest, indent=2) + "\n")
    return rows, labels


# -- qm9 descriptor scan ---------------------------------------------------------

def descriptor_scan(molecules, labels):
    """Rank descriptors by RI between mean-binarized tags and a partition.

    Returns rows ``(rank, name, RI, ARI, degenerate)`` best first; a
    descriptor whose tags are all equal is flagged degenerate.
    """
    names, table = encoders.descriptor_table(molecules)
    if table.shape[0] != len(labels):
        raise ValueError(f"{table.shape[0]} molecules but {len(labels)} labels")
    scored = []
    for k, name in enumerate(names):
        tags = encoders.binarize_by_mean(table[:, k])
        degenerate = bool(np.all(tags == tags[0]))
        scored.append((name, rand_index(labels, tags), adjusted_rand_index(labels, tags), degenerate))
    # stable sort keeps file order among equal scores
    scored.sort(key=lambda r: -r[1])
    return [(rank, *r) for rank, r in enumerate(scored, start=1)]


def write_scan_csv(rows, fh=None):
    buf = fh or io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "descriptor", "RI", "ARI", "degenerate"])
    for rank, name, ri, ari, deg in rows:
        w.writerow([rank, name, repr(float(ri)), repr(float(ari)), int(deg)])
    return buf.getvalue() if fh is None else None


def read_scan_csv(fh):
    return [(int(r["rank"]), r["descriptor"], float(r["RI"]), float(r["ARI"]), bool(int(r["degenerate"])))
            for r in csv.DictReader(fh)]


def qm9_scan(cfg, out, partition=None, threads=None):
    if cfg.task != "qm9":
        raise ConfigError("task", "qm9-scan needs task 'qm9'")
    out = Path(out)
    mols = load_molecules(cfg)
    if partition is None:
        res = run(cfg, out, threads=threads)
        if res["partition"] is None:
            raise RuntimeError("every run failed; nothing to scan")
        partition = res["partition"]
    else:
        out.mkdir(parents=True, exist_ok=True)
    rows = descriptor_scan(mols, partition)
    with open(out / "descriptor_scan.csv", "w", newline="") as fh:
        write_scan_csv(rows, fh)
    return rows


# -- entry point -----------------------------------------------------------------

def _parse_seeds(text):
    seeds = []
    try:
        for part in filter(None, (t.strip() for t in text.split(","))):
            a, _, b = part.partition("-")
            seeds += list(range(int(a), int(b) + 1)) if b else [int(a)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}; use e.g. 0,1,2 or 0-9")
    return seeds


def _parser():
    p = argparse.ArgumentParser(prog="qlustering", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        sp.add_argument("--config", required=needs_config, help="YAML experiment config")
        sp.add_argument("--out", help="output directory (overrides the config's out key)")
        sp.add_argument("--seeds", type=_parse_seeds, help="run seeds, e.g. 0-9 or 1,4,7")
        sp.add_argument("--repeats", type=int, help="number of runs R")
        sp.add_argument("--threads", type=int, help="concurrent runs")
        sp.add_argument("-v", "--verbose", action="store_true")

    common(sub.add_parser("run", help="train R networks and write a run bundle"))
    s = sub.add_parser("sweep", help="run once per value of omega, delta_ipr or dephasing")
    common(s)
    s.add_argument("--axis", choices=sorted(SWEEP_AXES))
    s.add_argument("--values", type=lambda t: [float(x) for x in t.split(",") if x.strip()])
    common(sub.add_parser("baseline", help="k-means on the config's dataset"))
    s = sub.add_parser("qm9-scan", help="rank molecular descriptors against a partition")
    common(s)
    s.add_argument("--partition", help="existing partition CSV; skips training")
    s = sub.add_parser("metrics", help="recompute metrics from the partitions in a bundle")
    common(s, needs_config=False)
    return p


def _apply_overrides(args):
    raw = yaml.safe_load(Path(args.config).read_text()) or {}
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a mapping")
    if args.seeds is not None:
        raw["seeds"] = args.seeds
    if args.repeats is not None:
        raw["repeats"] = args.repeats
        if args.seeds is None and len(raw.get("seeds") or [0]) != args.repeats:
            raw["seeds"] = (raw.get("seeds") or [0])[:1]
    if args.threads is not None:
        raw["threads"] = args.threads
    return config_from_dict(raw, base_dir=Path(args.config).parent, source=args.config)


def _report(rows, keys=("RI", "ARI", "stability", "silhouette", "DVI", "CP")):
    for run_id in ("mean", "ensemble", "consensus", "kmeans"):
        parts = [f"{k}={v:.4f}" for k, v, r in rows if r == run_id and k in keys]
        if parts:
            print(f"{run_id:>9s}: " + "  ".join(parts))


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "metrics":
            if not args.out:
                raise ConfigError("--out", "metrics needs the bundle directory")
            cfg = _apply_overrides(args) if args.config else None
            _report(recompute_metrics(args.out, cfg))
            return 0
        cfg = _apply_overrides(args)
        out = args.out or cfg.out
        if out is None and args.command != "baseline":
            raise ConfigError("out", "no output directory (set 'out' or pass --out)")
        if args.command == "run":
            res = run(cfg, out)
            _report(res["rows"])
            return 1 if res["failed"] else 0
        if args.command == "sweep":
            table = sweep(cfg, out, args.axis, args.values)
            for axis, v, m, mean, cons in table:
                if m in ("RI", "ARI"):
                    print(f"{axis}={v:g} {m}: mean={mean:.4f} consensus={cons:.4f}")
            return 0
        if args.command == "baseline":
            rows, _ = run_baseline(cfg, out)
            _report(rows, keys=("RI", "ARI", "CP", "DVI", "silhouette", "inertia"))
            return 0
        if args.command == "qm9-scan":
            part = read_partition(args.partition) if args.partition else None
            for rank, name, ri, ari, deg in qm9_scan(cfg, out, part):
                print(f"{rank:2d} {name:<20s} RI={ri:.4f} ARI={ari:.4f}" + ("  (degenerate)" if deg else ""))
            return 0
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
