"""Benchmark datasets as unit-norm state vectors with ground-truth tags."""

import csv
import io
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import Dataset

log = logging.getLogger(__name__)

FOUR_GROUP_BASE_POINTS = np.array(
    [
        [0.99, 0.11, 0.11],
        [0.11, 0.99, 0.11],
        [0.11, 0.11, 0.99],
        [1.0, 1.0, 1.0],
    ]
)
FOUR_GROUP_BASE_POINTS[3] /= np.sqrt(3.0)

FIVE_GROUP_BASE_POINTS = np.array(
    [
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0],
        2 * np.sqrt(3.0) / 9 * np.array([-1.5, 1.5, 1.5]),
        2 / np.sqrt(13.0) * np.array([0.0, 1.0, 1.5]),
    ]
)

QM9_PROPERTY_NAMES = (
    "A", "B", "C", "mu", "alpha", "homo", "lumo", "gap",
    "r2", "zpve", "U0", "U", "H", "G", "Cv",
)

IRIS_CLASSES = ("Iris-setosa", "Iris-versicolor", "Iris-virginica")


def normalize_rows(x):
    x = np.asarray(x, dtype=float)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("cannot normalize a zero vector")
    return x / norms


@dataclass
class SyntheticSpec:
    base_points: np.ndarray
    omega: float
    N: int = 60
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.omega <= 1.0:
            raise ValueError(f"omega must lie in (0, 1], got {self.omega}")
        self.base_points = normalize_rows(self.base_points)
        if self.N < self.base_points.shape[0]:
            raise ValueError("need at least one point per group")

    @property
    def q(self):
        return self.base_points.shape[0]


def group_sizes(N, q):
    sizes = np.full(q, N // q)
    sizes[: N % q] += 1
    return sizes


def synthetic_sphere(spec, rng=None):
    """Points ``(1 - omega) b_i + omega u_n`` projected back onto the unit sphere.

    ``u_n`` is an isotropic random unit vector. Groups are contiguous and
    labelled 1..q in base-point order.
    """
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    b = spec.base_points
    labels = np.repeat(np.arange(1, spec.q + 1), group_sizes(spec.N, spec.q))
    u = normalize_rows(rng.standard_normal((spec.N, b.shape[1])))
    pts = (1.0 - spec.omega) * b[labels - 1] + spec.omega * u
    return Dataset(normalize_rows(pts), labels, name=f"sphere-omega{spec.omega:g}")


def ipr(v):
    """Inverse participation ratio, 1 for a site-localized vector and L for a uniform one."""
    v = np.asarray(v)
    p = np.abs(v) ** 2
    if not np.allclose(p.sum(axis=-1), 1.0, rtol=0, atol=1e-9):
        raise ValueError("ipr needs unit-norm vectors")
    return 1.0 / np.sum(p**2, axis=-1)


def _dirichlet_vectors(rng, L, n, log_alpha_range):
    alpha = np.exp(rng.uniform(*log_alpha_range, size=n))
    g = rng.gamma(alpha[:, None], size=(n, L))
    g /= g.sum(axis=1, keepdims=True)
    return np.sqrt(g)


def ipr_dataset(L=10, N=50, delta_ipr=7.0, seed=0, rng=None, edge_tol=0.05, budget=2_000_000):
    """Two IPR bands, localized (label 1) and extended (label 2), separated by ``delta_ipr``.

    Localized vectors satisfy ``IPR <= xi`` and extended ones ``IPR >= L - xi``
    with ``xi = (L - delta_ipr) / 2``. One vector of each band is drawn within
    ``edge_tol`` of its band edge so the realized gap matches ``delta_ipr``.
    Candidates are non-negative vectors whose squared entries follow a
    Dirichlet law with log-uniform concentration.
    """
    if not 0 < delta_ipr < L - 1:
        raise ValueError(f"delta_ipr must lie in (0, {L - 1})")
    rng = np.random.default_rng(seed) if rng is None else rng
    xi = 0.5 * (L - delta_ipr)
    lo_edge, hi_edge = xi, L - xi
    n_loc = N // 2
    n_ext = N - n_loc
    wanted = {
        "loc_edge": (lambda r: (r <= lo_edge) & (r >= lo_edge - edge_tol), 1),
        "ext_edge": (lambda r: (r >= hi_edge) & (r <= hi_edge + edge_tol), 1),
        "loc": (lambda r: r <= lo_edge, n_loc - 1),
        "ext": (lambda r: r >= hi_edge, n_ext - 1),
    }
    found = {k: [] for k in wanted}
    drawn = 0
    batch = 4096
    while any(len(found[k]) < n for k, (_, n) in wanted.items()):
        if drawn >= budget:
            raise RuntimeError(f"IPR band request infeasible within {budget} draws (delta_ipr={delta_ipr})")
        cand = _dirichlet_vectors(rng, L, batch, (np.log(0.02), np.log(50.0)))
        drawn += batch
        r = ipr(cand)
        for k, (pred, n) in wanted.items():
            need = n - len(found[k])
            if need > 0:
                hit = np.flatnonzero(pred(r))[:need]
                found[k].extend(cand[hit])
                # a vector used for one band slot is not reused for another
                r = r.copy()
                r[hit] = np.nan
    loc = np.array(found["loc_edge"] + found["loc"])
    ext = np.array(found["ext_edge"] + found["ext"])
    vectors = normalize_rows(np.vstack([loc, ext]))
    labels = np.repeat([1, 2], [n_loc, n_ext])
    return Dataset(vectors, labels, name=f"ipr-delta{delta_ipr:g}")


def ipr_gap(dataset):
    r = ipr(dataset.vectors)
    lab = dataset.labels
    return float(r[lab == 2].min() - r[lab == 1].max())


@dataclass
class MoleculeRecord:
    symbols: list
    positions: np.ndarray
    descriptors: dict = field(default_factory=dict)
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        if len(self.symbols) != self.positions.shape[0]:
            raise ValueError("one position per atom required")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("non-finite coordinates")

    @property
    def heavy_mask(self):
        return np.array([s.upper() not in ("H", "1") for s in self.symbols])

    @property
    def n_heavy(self):
        return int(self.heavy_mask.sum())

    @property
    def n_heavy_pairs(self):
        n = self.n_heavy
        return n * (n - 1) // 2


def sid_fingerprint(mol, pad_len):
    """Sorted heavy-atom pair distances, zero-padded to ``pad_len`` and normalized."""
    pos = mol.positions[mol.heavy_mask]
    n = pos.shape[0]
    if n < 2:
        raise ValueError(f"{mol.name or 'molecule'} has {n} heavy atoms; SID needs at least 2")
    i, j = np.triu_indices(n, 1)
    dist = np.sort(np.linalg.norm(pos[i] - pos[j], axis=1))
    if dist.size > pad_len:
        raise ValueError(f"pad_len {pad_len} is shorter than the {dist.size} heavy-atom pairs")
    out = np.zeros(pad_len)
    out[: dist.size] = dist
    return out / np.linalg.norm(out)


def sid_dataset(molecules, pad_len=None, labels=None):
    if pad_len is None:
        pad_len = max(m.n_heavy_pairs for m in molecules)
    vecs = np.array([sid_fingerprint(m, pad_len) for m in molecules])
    return Dataset(vecs, labels, name="sid")


def binarize_by_mean(values):
    """1 where a value exceeds the mean, 0 otherwise (ties with the mean go to 0)."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise ValueError("need at least two values")
    return (v > v.mean()).astype(int)


def load_iris(path, drop_sepal_width=False):
    """Iris CSV (4 numeric columns + species) as unit-norm feature vectors."""
    rows, species = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 columns, got {len(row)}")
            try:
                feats = [float(x) for x in row[:4]]
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise ValueError(f"{path}:{lineno}: non-numeric feature in {row[:4]}")
            rows.append(feats)
            species.append(row[4].strip())
    x = np.array(rows)
    if drop_sepal_width:
        x = np.delete(x, 1, axis=1)
    names = sorted(set(species), key=lambda s: (IRIS_CLASSES.index(s) if s in IRIS_CLASSES else 99, s))
    labels = np.array([names.index(s) + 1 for s in species])
    return Dataset(normalize_rows(x), labels, name="iris-3f" if drop_sepal_width else "iris-4f")


class XYZParseError(ValueError):
    def __init__(self, path, lineno, msg):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.path = str(path)
        self.lineno = lineno


def _float(tok):
    # QM9 files write exponents as "*^"
    return float(tok.replace("*^", "e"))


_KV = re.compile(r'(\w+)=("[^"]*"|\S+)')


def _parse_comment(line):
    toks = line.split()
    if toks and toks[0] == "gdb":
        values = [_float(t) for t in toks[2 : 2 + len(QM9_PROPERTY_NAMES)]]
        return dict(zip(QM9_PROPERTY_NAMES, values)), {"name": f"gdb_{toks[1]}"}
    desc, meta = {}, {}
    for key, val in _KV.findall(line):
        val = val.strip('"')
        try:
            desc[key] = _float(val)
        except ValueError:
            meta[key] = val
    return desc, meta


def parse_xyz(text, path="<string>"):
    lines = text.splitlines()
    if not lines:
        raise XYZParseError(path, 1, "empty file")
    try:
        n = int(lines[0].split()[0])
    except (ValueError, IndexError):
        raise XYZParseError(path, 1, f"bad atom count {lines[0]!r}")
    if len(lines) < n + 2:
        raise XYZParseError(path, len(lines), f"expected {n} atom lines")
    try:
        desc, meta = _parse_comment(lines[1])
    except ValueError as e:
        raise XYZParseError(path, 2, f"bad descriptor line: {e}")
    symbols, pos = [], []
    for k in range(n):
        lineno = k + 3
        toks = lines[k + 2].split()
        if len(toks) < 4:
            raise XYZParseError(path, lineno, "atom line needs an element and 3 coordinates")
        try:
            xyz = [_float(t) for t in toks[1:4]]
        except ValueError:
            raise XYZParseError(path, lineno, f"non-numeric coordinate in {toks[1:4]}")
        symbols.append(toks[0])
        pos.append(xyz)
    name = meta.pop("name", Path(str(path)).stem)
    try:
        return MoleculeRecord(symbols, np.array(pos), desc, name=name, meta=meta)
    except ValueError as e:
        raise XYZParseError(path, 3, str(e))


def load_xyz_batch(path, errors=None):
    """Parse every ``*.xyz`` file under a directory, sorted by file name.

    Files that fail to parse are logged and skipped; pass a list as
    ``errors`` to collect the exceptions.
    """
    path = Path(path)
    files = sorted(path.glob("*.xyz")) if path.is_dir() else [path]
    records = []
    for f in files:
        try:
            records.append(parse_xyz(f.read_text(), f))
        except XYZParseError as e:
            log.warning("skipping %s", e)
            if errors is not None:
                errors.append(e)
    return records


def descriptor_table(molecules):
    names = list(molecules[0].descriptors)
    return names, np.array([[m.descriptors[k] for k in names] for m in molecules])


def write_dataset_csv(dataset, fh=None):
    out = fh or io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    L = dataset.L
    w.writerow([f"x{i}" for i in range(L)] + ["label"])
    labels = dataset.labels if dataset.labels is not None else [""] * dataset.N
    for v, lab in zip(np.real_if_close(dataset.vectors), labels):
        w.writerow([repr(complex(x)) if np.iscomplexobj(v) else repr(float(x)) for x in v] + [lab])
    return out.getvalue() if fh is None else None


def read_dataset_csv(fh):
    r = csv.reader(fh)
    header = next(r)
    L = len(header) - 1
    vecs, labels = [], []
    for row in r:
        if not row:
            continue
        vecs.append([complex(x) if "j" in x else float(x) for x in row[:L]])
        labels.append(row[L])
    lab = None if all(x == "" for x in labels) else np.array([int(x) for x in labels])
    return Dataset(np.array(vecs), lab)


def bundled_path(*parts):
    return Path(__file__).resolve().parent / "data" / Path(*parts)
