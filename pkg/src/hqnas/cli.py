"""Command line entry points: ``run`` (full search) and ``enumerate`` (FLOPs census).

Every run option can come from a JSON config file (``--config``) and be
overridden by the flag of the same name. Progress goes to stderr; data files are
written only under ``--out``.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .datasets import DATASET_NAMES, SHAPES, DatasetError, load
from .evolution import (STREAM_TRAINING, Evaluation, ObjectiveVector, SearchConfig,
                        SearchResult, derive_seed, run_search)
from .flops import measure
from .hybrid import TrainConfig, param_count, train_and_evaluate
from .search_space import GENE_NAMES, SPACE_SIZE, Genome, enumerate_space

log = logging.getLogger("hqnas")

FLOPS_FIELDS = ["f_classical", "f_quantum", "f_total"]
GENERATION_FIELDS = (["generation", *GENE_NAMES, *FLOPS_FIELDS,
                      "params", "best_val_acc", "rank", "crowding"])
SCATTER_FIELDS = ["generation", *GENE_NAMES, "best_val_acc", *FLOPS_FIELDS, "params", "pareto"]
SPACE_FIELDS = ["index", *GENE_NAMES, *FLOPS_FIELDS, "params"]


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    dataset: str = "iris"
    data_dir: str | None = None
    out: str = "runs/out"
    seed: int = 0
    pop_size: int = 20
    generations: int = 8
    pc: float = 0.8
    pm: float = 0.2
    stagnation: int = 2
    epochs: int = 5
    batch_size: int = 64
    lr: float = 0.003
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    top_k: int = 5
    parallelism: int = 1
    val_fraction: float = 0.2

    def search_config(self) -> SearchConfig:
        return SearchConfig(self.pop_size, self.generations, self.pc, self.pm,
                            self.stagnation, self.seed, self.top_k)

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.epochs, self.batch_size, self.lr, self.adam_beta1,
                           self.adam_beta2, self.adam_eps, self.seed)

    def validate(self):
        if self.dataset not in DATASET_NAMES:
            raise ConfigError(f"field 'dataset': unknown dataset {self.dataset!r}")
        if self.parallelism < 1:
            raise ConfigError("field 'parallelism': must be >= 1")
        if not 0 < self.val_fraction < 1:
            raise ConfigError("field 'val_fraction': must lie in (0, 1)")
        try:
            self.search_config()
            self.train_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, value):
    kind = _FIELD_TYPES[name]
    try:
        if kind == "int":
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        if kind == "float":
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if value is None:
            return None
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"field {name!r}: expected {kind}, got {value!r}") from None


def read_config_file(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    raw = {k.replace("-", "_"): v for k, v in raw.items()}
    unknown = sorted(set(raw) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"{path}: unknown field(s): {', '.join(unknown)}")
    return {k: _coerce(k, v) for k, v in raw.items()}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for name in _FIELD_TYPES:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            values[name] = _coerce(name, flag_value)
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# evaluation

class CandidateEvaluator:
    """Trains one genome and scores it; picklable so it can run in worker processes."""

    def __init__(self, data, train_cfg: TrainConfig, base_seed: int):
        self.data = data
        self.train_cfg = train_cfg
        self.base_seed = base_seed

    def training_seed(self, genome: Genome) -> int:
        return derive_seed(self.base_seed, STREAM_TRAINING, genome.index)

    def __call__(self, genome: Genome) -> Evaluation:
        cfg = dataclasses.replace(self.train_cfg, seed=self.training_seed(genome))
        result = train_and_evaluate(genome, self.data, cfg)
        report = measure(genome, self.data.d, self.data.n_classes)
        objectives = ObjectiveVector(report.f_quantum, 1.0 - result.best_val_acc, result.param_count)
        return Evaluation(objectives, {"best_val_acc": result.best_val_acc,
                                       "skipped_samples": result.skipped_samples})


class WorstCase:
    """Objectives recorded for a genome whose evaluation raised."""

    def __init__(self, d: int, n_classes: int):
        self.d, self.n_classes = d, n_classes

    def __call__(self, genome: Genome) -> Evaluation:
        report = measure(genome, self.d, self.n_classes)
        objectives = ObjectiveVector(report.f_quantum, 1.0, param_count(genome.n_qubits, self.d, self.n_classes))
        return Evaluation(objectives, {"best_val_acc": 0.0, "skipped_samples": 0})


# ---------------------------------------------------------------------------
# output

def _num(x) -> str:
    if isinstance(x, float):
        return "inf" if math.isinf(x) else repr(x)
    return str(x)


def _json_num(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def write_csv(path: Path, fields: list[str], rows: list[dict]):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _num(row[k]) for k in fields})


def write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def individual_record(ind, d: int, n_classes: int) -> dict:
    f_q, err, params = ind.objectives
    return {
        **ind.genome.to_record(),
        **measure(ind.genome, d, n_classes).to_record(),
        "params": int(params),
        "best_val_acc": ind.info.get("best_val_acc", 1.0 - err),
        "err": err,
        "rank": ind.rank,
        "crowding": _json_num(ind.crowding),
        "failed": ind.failed,
    }


def write_outputs(out: Path, result: SearchResult, d: int, n_classes: int):
    out.mkdir(parents=True, exist_ok=True)
    front_genomes = {ind.genome for ind in result.front}
    gen_rows, scatter_rows = [], []
    for entry in result.generations:
        for ind in entry.evaluated:
            rec = individual_record(ind, d, n_classes)
            rec["generation"] = entry.generation
            rec["crowding"] = ind.crowding
            gen_rows.append(rec)
            scatter_rows.append({**rec, "pareto": int(ind.genome in front_genomes)})
    write_csv(out / "generations.csv", GENERATION_FIELDS, gen_rows)
    write_csv(out / "scatter.csv", SCATTER_FIELDS, scatter_rows)
    write_json(out / "pareto.json", {
        "front": [individual_record(i, d, n_classes) for i in result.front],
        "top_k": [individual_record(i, d, n_classes) for i in result.top_k],
        "compromise": individual_record(result.compromise, d, n_classes),
    })


def census_rows(d: int, n_classes: int) -> list[dict]:
    """Every genome with its analytic cost, sorted by (f_quantum, params) then index."""
    rows = []
    for g in enumerate_space():
        rows.append({"index": g.index, **g.to_record(), **measure(g, d, n_classes).to_record(),
                     "params": param_count(g.n_qubits, d, n_classes)})
    rows.sort(key=lambda r: (r["f_quantum"], r["params"], r["index"]))
    return rows


# ---------------------------------------------------------------------------
# commands

def run(cfg: RunConfig) -> int:
    started = time.time()
    try:
        data = load(cfg.dataset, cfg.data_dir, seed=cfg.seed, val_fraction=cfg.val_fraction)
    except DatasetError as exc:
        log.error("dataset error: %s", exc)
        return 3
    log.info("loaded %s: %d train / %d val, d=%d, classes=%d", cfg.dataset,
             len(data.train_y), len(data.val_y), data.d, data.n_classes)

    evaluator = CandidateEvaluator(data, cfg.train_config(), cfg.seed)
    fallback = WorstCase(data.d, data.n_classes)
    if cfg.parallelism > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            result = run_search(cfg.search_config(), evaluator, fallback, pool.map, log.info)
    else:
        result = run_search(cfg.search_config(), evaluator, fallback, map, log.info)

    out = Path(cfg.out)
    write_outputs(out, result, data.d, data.n_classes)
    skipped = sum(ind.info.get("skipped_samples", 0)
                  for entry in result.generations for ind in entry.evaluated)
    write_json(out / "run_meta.json", {
        "version": __version__,
        "config": dataclasses.asdict(cfg),
        "seeds": {
            "base": cfg.seed,
            "variation": "SeedSequence([seed, 0, generation, offspring_index])",
            "training": "derive_seed(seed, 1, genome_index)",
            "split": cfg.seed,
        },
        "dataset": {"name": cfg.dataset, "d": data.d, "classes": data.n_classes,
                    "train": int(len(data.train_y)), "val": int(len(data.val_y))},
        "generations_run": result.generations_run,
        "stopped_early": result.stopped_early,
        "evaluations": result.evaluations,
        "cache_hits": result.cache_hits,
        "failures": result.failures,
        "failed_genomes": [str(g) for g in result.failed_genomes],
        "degenerate_samples_skipped": skipped,
        "wall_time_s": round(time.time() - started, 3),
    })
    log.info("done in %.1fs: %d generations, front of %d", time.time() - started,
             result.generations_run, len(result.front))
    return 0


def enumerate_command(cfg: RunConfig) -> int:
    d, n_classes = SHAPES[cfg.dataset]
    rows = census_rows(d, n_classes)
    assert len(rows) == SPACE_SIZE
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "space.csv", SPACE_FIELDS, rows)
    log.info("wrote %d genomes to %s", len(rows), out / "space.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with any of the options below")
    common.add_argument("--dataset", choices=DATASET_NAMES)
    common.add_argument("--data-dir", dest="data_dir")
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("--pop-size", dest="pop_size", type=int)
    common.add_argument("--generations", type=int)
    common.add_argument("--pc", type=float)
    common.add_argument("--pm", type=float)
    common.add_argument("--stagnation", type=int)
    common.add_argument("--epochs", type=int)
    common.add_argument("--batch-size", dest="batch_size", type=int)
    common.add_argument("--lr", type=float)
    common.add_argument("--adam-beta1", dest="adam_beta1", type=float)
    common.add_argument("--adam-beta2", dest="adam_beta2", type=float)
    common.add_argument("--adam-eps", dest="adam_eps", type=float)
    common.add_argument("--top-k", dest="top_k", type=int)
    common.add_argument("--parallelism", type=int)
    common.add_argument("--val-fraction", dest="val_fraction", type=float)
    common.add_argument("-q", "--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="hqnas", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="evolve architectures on a dataset")
    sub.add_parser("enumerate", parents=[common], help="write the FLOPs census of the whole space")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="%(asctime)s %(levelname)s %(message)s", stream=sys.stderr)
    log.setLevel(logging.WARNING if args.quiet else logging.INFO)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.command == "run":
        return run(cfg)
    return enumerate_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
