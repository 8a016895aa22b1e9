"""Experiment drivers behind the command-line interface.

Every table is written to a temporary file in the output directory and
renamed into place only after all of its rows exist. Tables contain no
timestamps or timings, so identical configs give byte-identical tables;
timings go to the ``*_record.txt`` sidecars instead.
"""
from __future__ import annotations

import csv
import io
import logging
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from .classifier import VQCClassifier, parse_model_name
from .data import load_raw, clean, load_titanic3, split, write_dataset
from .metrics import CSV_COLUMNS, METRIC_NAMES, MetricReport, evaluate
from .svc import LinearSVC

log = logging.getLogger(__name__)

WORKERS_ENV = "VQC_TITANIC_MAX_WORKERS"
GRID_MODELS = tuple(f"{fam}{k}" for fam in ("Z", "ZZ") for k in range(10, 55, 5))
DEFAULT_FRACTIONS = tuple(round(0.1 * k, 1) for k in range(1, 10))
COLLAPSE_J = 0.05


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: str = ""
    model_name: str = "Z20"
    train_fraction: float = 0.7
    max_iterations: int = 150
    seed: int = 0
    split_seed: int = 0
    repeats: int = 1
    feature_map_reps: int = 2
    entanglement: str = "full"
    readout_rule: str = "parity"
    readout_qubit: int = 0
    rho_begin: float = 1.0
    rho_end: float = 1e-4
    stratify: bool = False
    scaler_fit: str = "full"
    svc_c: float = 1.0
    svc_tol: float = 1e-4
    svc_max_passes: int = 1000
    output_dir: str = "results"

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.scaler_fit not in ("full", "train"):
            raise ValueError("scaler_fit must be 'full' or 'train'")
        if self.model_name.upper() != "SVC":
            parse_model_name(self.model_name)

    def echo(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in asdict(self).items())


def _coerce(field_type, text: str):
    kind = field_type if isinstance(field_type, str) else field_type.__name__
    if kind == "bool":
        if text.strip().lower() in ("1", "true", "yes", "on"):
            return True
        if text.strip().lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text.strip()


def parse_key_values(text: str) -> dict:
    """``key=value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def build_config(file_values: Optional[dict] = None, **overrides) -> ExperimentConfig:
    """Defaults, then file values, then explicit overrides (``None`` means unset)."""
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    values = {}
    for key, raw in (file_values or {}).items():
        if key not in types:
            continue  # keys for other commands (models, fractions, ...) are read separately
        values[key] = _coerce(types[key], raw)
    values.update({k: v for k, v in overrides.items() if v is not None and k in types})
    return ExperimentConfig(**values)


def load_dataset(config: ExperimentConfig):
    return load_titanic3(config.dataset_path or None)


def make_model(config: ExperimentConfig, name: Optional[str] = None):
    name = (name or config.model_name).upper()
    if name == "SVC":
        return LinearSVC(C=config.svc_c, tol=config.svc_tol, max_passes=config.svc_max_passes)
    return VQCClassifier.from_name(
        name,
        feature_map_reps=config.feature_map_reps,
        entanglement=config.entanglement,
        readout=config.readout_rule,
        readout_qubit=config.readout_qubit,
        max_iter=config.max_iterations,
        rho_begin=config.rho_begin,
        rho_end=config.rho_end,
        random_state=config.seed,
    )


@dataclass
class RunRecord:
    config: ExperimentConfig
    model_name: str
    n_train: int
    n_test: int
    train: MetricReport
    test: MetricReport
    loss_curve: List[float]
    status: str
    started: float
    finished: float
    model_text: str = ""


def run_once(config: ExperimentConfig, data=None, name: Optional[str] = None) -> RunRecord:
    """Split, fit, and score one model."""
    data = load_dataset(config) if data is None else data
    train, test = split(
        data, config.train_fraction, config.split_seed,
        stratify=config.stratify, refit_scaler=config.scaler_fit == "train",
    )
    model = make_model(config, name)
    started = time.time()
    model.fit(train.features, train.labels)
    finished = time.time()
    report = getattr(model, "train_report_", None)
    status = "ok"
    if report is not None:
        status = "failed" if report.failed else report.status
    return RunRecord(
        config=config,
        model_name=(name or config.model_name).upper(),
        n_train=len(train),
        n_test=len(test),
        train=evaluate(model.predict(train.features), train.labels),
        test=evaluate(model.predict(test.features), test.labels),
        loss_curve=list(report.loss_curve) if report is not None else [],
        status=status,
        started=started,
        finished=finished,
        model_text=model.dumps(),
    )


# -- atomic table output ----------------------------------------------------


def _render(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _metric_header(prefix):
    return [f"{prefix}{c}" for c in CSV_COLUMNS]


def max_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _map(fn, items):
    """Ordered map over worker threads; results keep input order."""
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _safe_run(args):
    config, name = args
    try:
        return run_once(config, name=name)
    except Exception as exc:  # recorded in the table, the batch carries on
        log.warning("run %s failed: %s", name or config.model_name, exc)
        return f"{type(exc).__name__}: {exc}"


# -- commands -----------------------------------------------------------------


def cmd_preprocess(input_path, output_path) -> dict:
    data = clean(load_raw(input_path))
    buf = Path(output_path)
    tmp = buf.with_name(f".{buf.name}.tmp")
    try:
        write_dataset(data, tmp)
        os.replace(tmp, buf)
    finally:
        if tmp.exists():
            tmp.unlink()
    return {
        "survived": data.label_counts[1],
        "perished": data.label_counts[0],
        "rows": len(data),
        "imputed_ages": data.n_imputed,
        "imputed_age_value": data.imputed_age,
    }


def cmd_train(config: ExperimentConfig) -> List[RunRecord]:
    """Train ``repeats`` times (seeds ``seed, seed + 1, ...``) on one split.

    Outputs: ``run.csv`` (one row per repeat), ``loss_curve.csv``, ``model.txt``
    (last repeat), ``config.txt`` and ``run_record.txt`` (with timestamps).
    """
    if config.repeats < 1:
        raise ValueError("repeats must be >= 1")
    out = Path(config.output_dir)
    data = load_dataset(config)
    records = [run_once(replace(config, seed=config.seed + r), data) for r in range(config.repeats)]
    header = ["run", "model", "train_fraction", "split_seed", "seed", "n_train", "n_test", "status"]
    header += _metric_header("train_") + _metric_header("test_")
    rows, curve = [], []
    for r, rec in enumerate(records):
        rows.append([r, rec.model_name, repr(config.train_fraction), config.split_seed,
                     rec.config.seed, rec.n_train, rec.n_test, rec.status]
                    + rec.train.csv_cells() + rec.test.csv_cells())
        curve += [[r, i + 1, repr(v)] for i, v in enumerate(rec.loss_curve)]
    stamps = "".join(
        f"run{r}.started={rec.started!r}\nrun{r}.finished={rec.finished!r}\n"
        for r, rec in enumerate(records)
    )
    texts = {
        "run.csv": _render(header, rows),
        "loss_curve.csv": _render(["run", "iteration", "loss"], curve),
        "model.txt": records[-1].model_text,
        "config.txt": config.echo(),
        "run_record.txt": config.echo() + stamps,
    }
    written = []
    try:
        for name, text in texts.items():
            written.append(write_atomic(out / name, text))
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    return records


def cmd_grid(config: ExperimentConfig, models=GRID_MODELS) -> Path:
    """All Table-1 models at one split; one row per model."""
    jobs = [(config, name) for name in models]
    results = _map(_safe_run, jobs)
    header = ["model", "feature_map", "n_params", "status"]
    header += _metric_header("train_") + _metric_header("test_")
    rows = []
    for name, res in zip(models, results):
        kind, k = parse_model_name(name)
        if isinstance(res, str):
            rows.append([name, kind, k, f"error: {res}"] + [""] * (2 * len(CSV_COLUMNS)))
        else:
            rows.append([name, kind, k, res.status] + res.train.csv_cells() + res.test.csv_cells())
    out = Path(config.output_dir)
    write_atomic(out / "config.txt", config.echo() + "models=" + ",".join(models) + "\n")
    return write_atomic(out / "grid.csv", _render(header, rows))


def cmd_repeat(config: ExperimentConfig, n_runs: int, seed0: int) -> Path:
    """Same split (``split_seed``), training seeds ``seed0 .. seed0 + n_runs - 1``."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    jobs = [(replace(config, seed=seed0 + r), None) for r in range(n_runs)]
    results = _map(_safe_run, jobs)
    header = ["run", "seed", "status", "acc", "bacc", "youden_j", "train_acc", "train_bacc", "train_youden_j"]
    rows = []
    for r, res in enumerate(results):
        if isinstance(res, str):
            rows.append([r, seed0 + r, f"error: {res}"] + [""] * 6)
            continue
        cells = [res.test.acc, res.test.bacc, res.test.youden_j,
                 res.train.acc, res.train.bacc, res.train.youden_j]
        rows.append([r, seed0 + r, res.status] + ["" if c is None else repr(float(c)) for c in cells])
    out = Path(config.output_dir)
    write_atomic(out / "config.txt", config.echo() + f"n_runs={n_runs}\nseed0={seed0}\n")
    return write_atomic(out / "repeat.csv", _render(header, rows))


def is_collapse(report: MetricReport, threshold: float = COLLAPSE_J) -> bool:
    """No better than chance: Youden's J at most ``threshold`` or undefined."""
    return report.youden_j is None or report.youden_j <= threshold


def cmd_sweep(config: ExperimentConfig, models=("Z15", "Z20", "SVC"),
              fractions=DEFAULT_FRACTIONS, split_seeds=None) -> Path:
    """Long table: one row per (split seed, model, training fraction).

    Each fraction is re-split from the full dataset with the given split seed.
    """
    split_seeds = [config.split_seed] if split_seeds is None else list(split_seeds)
    cells = [(s, m, f) for s in split_seeds for m in models for f in fractions]
    jobs = [(replace(config, split_seed=s, train_fraction=f), m) for s, m, f in cells]
    results = _map(_safe_run, jobs)
    header = ["model", "train_fraction", "split_seed", "seed", "n_train", "n_test", "status"]
    header += list(CSV_COLUMNS) + ["collapse"]
    rows = []
    for (s, m, f), res in zip(cells, results):
        base = [m.upper(), repr(f), s, config.seed]
        if isinstance(res, str):
            rows.append(base + ["", "", f"error: {res}"] + [""] * len(CSV_COLUMNS) + [""])
        else:
            rows.append(base + [res.n_train, res.n_test, res.status] + res.test.csv_cells()
                        + [int(is_collapse(res.test))])
    out = Path(config.output_dir)
    write_atomic(
        out / "config.txt",
        config.echo()
        + "models=" + ",".join(models) + "\n"
        + "fractions=" + ",".join(repr(f) for f in fractions) + "\n"
        + "split_seeds=" + ",".join(str(s) for s in split_seeds) + "\n"
        + "resplit_per_fraction=True\n",
    )
    return write_atomic(out / "sweep.csv", _render(header, rows))


def summarize(values) -> dict:
    v = np.asarray([x for x in values if x is not None], dtype=float)
    return {"n": v.size, "mean": float(v.mean()) if v.size else float("nan"),
            "std": float(v.std(ddof=1)) if v.size > 1 else 0.0}


__all__ = [
    "ExperimentConfig", "RunRecord", "build_config", "parse_key_values", "run_once",
    "cmd_preprocess", "cmd_train", "cmd_grid", "cmd_repeat", "cmd_sweep",
    "is_collapse", "make_model", "METRIC_NAMES", "GRID_MODELS", "DEFAULT_FRACTIONS",
]
