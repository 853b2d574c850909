import csv
import json

import pytest

from hqnas import cli
from hqnas.evolution import dominates
from hqnas.search_space import GENE_NAMES, SPACE_SIZE, Genome

SMALL = ["--dataset", "iris", "--pop-size", "4", "--generations", "2", "--epochs", "1", "-q"]


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def genome_of(row):
    return Genome.from_record({k: row[k] for k in GENE_NAMES})


@pytest.fixture(scope="module")
def small_runs(tmp_path_factory):
    outs = [tmp_path_factory.mktemp(f"run{i}") for i in range(2)]
    for out in outs:
        assert cli.main(["run", *SMALL, "--seed", "7", "--out", str(out)]) == 0
    return outs


def test_run_is_byte_identical(small_runs):
    a, b = small_runs
    for name in ("generations.csv", "scatter.csv", "pareto.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_run_outputs(small_runs):
    out = small_runs[0]
    meta = json.loads((out / "run_meta.json").read_text())
    assert meta["config"]["seed"] == 7 and meta["config"]["pop_size"] == 4
    assert meta["failures"] == 0 and meta["wall_time_s"] >= 0

    rows = read_rows(out / "generations.csv")
    assert list(rows[0]) == cli.GENERATION_FIELDS
    scatter = read_rows(out / "scatter.csv")
    assert len(scatter) == len(rows) == 4 * (meta["generations_run"] + 1)
    for r in scatter:
        g = genome_of(r)
        assert Genome.from_csv_row(str(g)) == g
        assert int(r["f_quantum"]) == int(r["f_total"]) - int(r["f_classical"])
        assert 0 <= float(r["best_val_acc"]) <= 1

    pareto = json.loads((out / "pareto.json").read_text())
    objs = [(m["f_quantum"], m["err"], m["params"]) for m in pareto["front"]]
    assert all(not dominates(a, b) for a in objs for b in objs)
    front = {genome_of(m) for m in pareto["front"]}
    assert {genome_of(r) for r in scatter if r["pareto"] == "1"} == front
    assert genome_of(pareto["compromise"]) in front
    assert len(pareto["top_k"]) == 4


def test_enumerate(tmp_path):
    assert cli.main(["enumerate", "--dataset", "digits", "--out", str(tmp_path), "-q"]) == 0
    rows = read_rows(tmp_path / "space.csv")
    assert len(rows) == SPACE_SIZE == 23_328
    keys = [(int(r["f_quantum"]), int(r["params"])) for r in rows]
    assert keys == sorted(keys)
    assert (rows[0]["n_qubits"], rows[0]["n_layers"]) == ("2", "1")
    assert len({genome_of(r) for r in rows}) == SPACE_SIZE


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dataset": "wine", "pop-size": 6, "lr": 0.01, "seed": 3}))
    args = cli.build_parser().parse_args(["run", "--config", str(cfg), "--seed", "9"])
    resolved = cli.resolve_config(args)
    assert (resolved.dataset, resolved.pop_size, resolved.lr, resolved.seed) == ("wine", 6, 0.01, 9)
    assert resolved.generations == 8 and resolved.pc == 0.8


@pytest.mark.parametrize("text, needle", [
    ('{"seed": 1,\n  "pop_size": }', ":2:"),
    ('{"seed": 1, "colour": "red"}', "colour"),
    ('{"pop_size": "many"}', "pop_size"),
    ('{"pc": 2.0}', "p_c"),
    ('[1, 2]', "object"),
])
def test_config_errors(tmp_path, capsys, text, needle):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(text)
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert needle in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_dataset_error_exit(tmp_path):
    assert cli.main(["run", "--dataset", "mnist", "--data-dir", str(tmp_path),
                     "--out", str(tmp_path / "o"), "-q"]) == 3


def test_logs_stay_on_stderr(tmp_path, capsys):
    cli.main(["run", *SMALL[:-1], "--generations", "1", "--out", str(tmp_path)])
    captured = capsys.readouterr()
    assert captured.out == ""
