import io
import json

import numpy as np
import pytest
import yaml

from qlustering import cli
from qlustering.encoders import MoleculeRecord
from qlustering.validation import read_matrix_csv, read_metrics_csv

TINY = {
    "task": "synthetic",
    "dataset": {"omega": 0.15, "N": 12},
    "training": {"T": 15, "P": 3, "window": 0},
    "seeds": [0, 1, 2],
}


def write_config(tmp_path, cfg, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg))
    return p


def bundle_bytes(root):
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file() and p.name != "manifest"}


@pytest.mark.parametrize("raw, key", [
    ({"seeds": []}, "seeds"),
    ({"trianing": {}}, "trianing"),
    ({"training": {"Tmax": 3}}, "training.Tmax"),
    ({"training": {"T": "many"}}, "training.T"),
    ({"training": {"P": 0}}, "training.P"),
    ({"dataset": {"omega": 1.5}}, "dataset.omega"),
    ({"task": "mnist"}, "task"),
    ({"task": "custom"}, "dataset.path"),
    ({"task": "iris", "dataset": {"path": "missing.csv"}}, "dataset.path"),
    ({"architecture": [3, 2]}, "architecture"),
    ({"seeds": [0, True]}, "seeds[1]"),
    ({"repeats": 3, "seeds": [1, 2]}, "repeats"),
    ({"sweep": {"axis": "temperature"}}, "sweep.axis"),
    ({"network": {"gamma_in": -1}}, "network.gamma_in"),
])
def test_config_errors_name_the_key(tmp_path, raw, key):
    with pytest.raises(cli.ConfigError) as e:
        cli.config_from_dict(raw, base_dir=tmp_path)
    assert e.value.key == key
    assert str(e.value).startswith(key)


def test_config_defaults_per_task():
    assert cli.config_from_dict({}).architecture == (3, 2, 4)
    assert cli.config_from_dict({"dataset": {"base_points": "five"}}).architecture == (3, 2, 5)
    loc = cli.config_from_dict({"task": "localization"})
    assert loc.architecture == (10, 3, 2) and loc.training["cost_mode"] == "localization"
    assert cli.config_from_dict({"task": "iris"}).architecture == (4, 2, 3)
    assert cli.config_from_dict({"task": "iris", "dataset": {"drop_sepal_width": True}}).architecture == (3, 2, 3)
    assert cli.config_from_dict({"task": "qm9"}).architecture == (10, 3, 2)
    assert cli.config_from_dict({"seeds": [4], "repeats": 3}).seeds == [4, 5, 6]


def test_run_bundle_layout_and_determinism(tmp_path):
    cfg = cli.config_from_dict(TINY)
    res = cli.run(cfg, tmp_path / "a")
    out = tmp_path / "a"
    for name in ("manifest", "metrics.csv", "consensus.csv", "consensus_partition.csv"):
        assert (out / name).is_file()
    for i in range(3):
        assert (out / "runs" / str(i) / "partition.csv").is_file()
        assert (out / "runs" / str(i) / "trace.log").is_file()
    manifest = json.loads((out / "manifest").read_text())
    assert manifest["runs"]["0"]["status"] == "ok"
    with open(out / "metrics.csv") as fh:
        rows = read_metrics_csv(fh)
    assert {r for _, _, r in rows} >= {"0", "1", "2", "mean", "ensemble", "consensus"}
    C = read_matrix_csv(open(out / "consensus.csv"))
    assert C.shape == (12, 12) and np.allclose(C, C.T)
    assert res["failed"] == 0

    cli.run(cfg, tmp_path / "b", threads=3)
    assert bundle_bytes(tmp_path / "a") == bundle_bytes(tmp_path / "b")


def test_single_run_consensus_is_that_run(tmp_path):
    cfg = cli.config_from_dict({**TINY, "seeds": [3]})
    cli.run(cfg, tmp_path)
    single = cli.read_partition(tmp_path / "runs" / "0" / "partition.csv")
    cons = cli.read_partition(tmp_path / "consensus_partition.csv")
    from qlustering.validation import adjusted_rand_index
    assert adjusted_rand_index(single, cons) == 1.0


def test_metrics_subcommand_recomputes(tmp_path):
    cfg = cli.config_from_dict(TINY)
    cli.run(cfg, tmp_path)
    before = (tmp_path / "metrics.csv").read_bytes()
    (tmp_path / "metrics.csv").unlink()
    assert cli.main(["metrics", "--out", str(tmp_path)]) == 0
    after = read_metrics_csv(open(tmp_path / "metrics.csv"))
    ref = read_metrics_csv(io.StringIO(before.decode()))
    ref = [repr(r) for r in ref if r[0] not in ("final_cost", "iterations")]
    assert [repr(r) for r in after if r[0] not in ("final_cost", "iterations")] == ref


def test_sweep_single_value_matches_run(tmp_path):
    cfg = cli.config_from_dict(TINY)
    table = cli.sweep(cfg, tmp_path / "sw", "omega", [0.15])
    res = cli.run(cfg, tmp_path / "run")
    ri = [t for t in table if t[2] == "RI"][0]
    assert ri[3] == cli.summary_value(res["rows"], "RI", "mean")
    assert ri[4] == cli.summary_value(res["rows"], "RI", "consensus")
    back = cli.read_sweep_csv(open(tmp_path / "sw" / "sweep.csv"))
    assert repr(back) == repr(table)


def test_dephasing_sweep_axis(tmp_path):
    cfg = cli.config_from_dict({**TINY, "seeds": [0]})
    table = cli.sweep(cfg, tmp_path, "dephasing", [0.01, 100.0])
    assert sorted({t[1] for t in table}) == [0.01, 100.0]


def test_main_run_and_baseline(tmp_path, capsys):
    p = write_config(tmp_path, TINY)
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path / "o"), "--seeds", "0-1"]) == 0
    manifest = json.loads((tmp_path / "o" / "manifest").read_text())
    assert manifest["config"]["seeds"] == [0, 1]
    assert cli.main(["baseline", "--config", str(p), "--out", str(tmp_path / "k")]) == 0
    rows = read_metrics_csv(open(tmp_path / "k" / "metrics.csv"))
    assert {name for name, _, _ in rows} >= {"RI", "ARI", "CP", "DVI", "silhouette", "inertia"}
    assert "kmeans" in capsys.readouterr().out


def test_main_reports_config_errors(tmp_path, capsys):
    p = write_config(tmp_path, {**TINY, "seeds": []})
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "seeds" in capsys.readouterr().err
    p = write_config(tmp_path, TINY)
    assert cli.main(["run", "--config", str(p)]) == 2  # no output directory


def test_baseline_position_task_is_perfect():
    cfg = cli.config_from_dict({"dataset": {"omega": 0.1, "N": 60}})
    rows, _ = cli.run_baseline(cfg)
    vals = {k: v for k, v, _ in rows}
    assert vals["RI"] == 1.0 and vals["ARI"] == 1.0


def fake_molecules(values):
    rng = np.random.default_rng(0)
    mols = []
    for k, v in enumerate(values):
        mols.append(MoleculeRecord(["C", "C"], rng.random((2, 3)), dict(v), name=f"m{k}"))
    return mols


def test_descriptor_scan_flags_and_duplicates():
    mols = fake_molecules([{"a": x, "b": x, "flat": 1.0, "c": -x} for x in (1, 2, 3, 4)])
    rows = cli.descriptor_scan(mols, np.array([1, 1, 2, 2]))
    by = {r[1]: r for r in rows}
    assert by["a"][2:4] == by["b"][2:4]
    assert by["flat"][4] and not by["a"][4]
    assert by["flat"][2] == pytest.approx(2 / 6)
    assert [r[0] for r in rows] == [1, 2, 3, 4]
    back = cli.read_scan_csv(io.StringIO(cli.write_scan_csv(rows)))
    assert back == [tuple(r) for r in rows]


def test_qm9_scan_with_given_partition(tmp_path):
    cfg = cli.config_from_dict({"task": "qm9"})
    labels = np.tile([1, 2], 49)[:97]
    part = tmp_path / "p.csv"
    cli.write_partition(part, labels)
    p = write_config(tmp_path, {"task": "qm9"})
    assert cli.main(["qm9-scan", "--config", str(p), "--out", str(tmp_path / "s"), "--partition", str(part)]) == 0
    rows = cli.read_scan_csv(open(tmp_path / "s" / "descriptor_scan.csv"))
    assert len(rows) == 14
    data = cli.build_dataset(cfg)
    assert data.vectors.shape == (97, 10) and set(data.labels) == {1, 2}
