"""``vqc-titanic`` command line.

Subcommands: preprocess, train, grid, repeat, sweep. Run flags mirror
:class:`~vqc_titanic.experiments.ExperimentConfig`; ``--config FILE`` loads
``key=value`` lines first and explicit flags override them.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import experiments as ex

log = logging.getLogger("vqc_titanic")


def _csv_list(cast):
    def parse(text):
        return [cast(v) for v in text.split(",") if v.strip()]
    return parse


def _bool(text):
    return ex._coerce("bool", text)


def _add_run_flags(p: argparse.ArgumentParser, include_model=True):
    p.add_argument("--config", metavar="FILE", help="key=value config file")
    for f in fields(ex.ExperimentConfig):
        if f.name == "model_name" and not include_model:
            continue
        kind = f.type if isinstance(f.type, str) else f.type.__name__
        cast = {"int": int, "float": float, "bool": _bool}.get(kind, str)
        p.add_argument(
            "--" + f.name.replace("_", "-"),
            dest=f.name,
            type=cast,
            default=None,
            help=f"default: {f.default!r}",
        )


def _config(args, file_values):
    overrides = {f.name: getattr(args, f.name, None) for f in fields(ex.ExperimentConfig)}
    return ex.build_config(file_values, **overrides)


def _pick(args, file_values, name, cast, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in file_values:
        return cast(file_values[name])
    return default


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqc-titanic", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="clean a titanic3 CSV and write the audit dump")
    p.add_argument("input_path")
    p.add_argument("output_path")

    p = sub.add_parser("train", help="train and score one model")
    _add_run_flags(p)

    p = sub.add_parser("grid", help="all 18 Z/ZZ models on one split")
    _add_run_flags(p, include_model=False)
    p.add_argument("--models", type=_csv_list(str), default=None)

    p = sub.add_parser("repeat", help="one split, several training seeds")
    _add_run_flags(p)
    p.add_argument("--n-runs", dest="n_runs", type=int, default=None)
    p.add_argument("--seed0", type=int, default=None)

    p = sub.add_parser("sweep", help="models x training fractions")
    _add_run_flags(p, include_model=False)
    p.add_argument("--models", type=_csv_list(str), default=None)
    p.add_argument("--fractions", type=_csv_list(float), default=None)
    p.add_argument("--split-seeds", dest="split_seeds", type=_csv_list(int), default=None,
                   help="comma list; default: the single --split-seed")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "preprocess":
        stats = ex.cmd_preprocess(args.input_path, args.output_path)
        print(f"survived: {stats['survived']}, perished: {stats['perished']}")
        print(f"rows: {stats['rows']}, ages imputed: {stats['imputed_ages']} "
              f"(mean {stats['imputed_age_value']:.4f})")
        return 0

    file_values = {}
    if args.config:
        file_values = ex.parse_key_values(Path(args.config).read_text(encoding="utf-8"))
    config = _config(args, file_values)
    out = Path(config.output_dir)

    if args.command == "train":
        for rec in ex.cmd_train(config):
            print(f"{rec.model_name} [{rec.status}] train acc={rec.train.acc:.4f} "
                  f"test acc={rec.test.acc:.4f} bacc={_fmt(rec.test.bacc)} "
                  f"iterations={len(rec.loss_curve)}")
        print(f"wrote {out / 'run.csv'}")
    elif args.command == "grid":
        models = _pick(args, file_values, "models", _csv_list(str), list(ex.GRID_MODELS))
        print(f"wrote {ex.cmd_grid(config, models=models)}")
    elif args.command == "repeat":
        n_runs = _pick(args, file_values, "n_runs", int, 10)
        seed0 = _pick(args, file_values, "seed0", int, config.seed)
        print(f"wrote {ex.cmd_repeat(config, n_runs, seed0)}")
    elif args.command == "sweep":
        models = _pick(args, file_values, "models", _csv_list(str), ["Z15", "Z20", "SVC"])
        fractions = _pick(args, file_values, "fractions", _csv_list(float), list(ex.DEFAULT_FRACTIONS))
        seeds = _pick(args, file_values, "split_seeds", _csv_list(int), None)
        print(f"wrote {ex.cmd_sweep(config, models, fractions, seeds)}")
    return 0


def _fmt(v):
    return "undefined" if v is None else f"{v:.4f}"


def main(argv=None) -> int:
    try:
        return run(argv)
    except KeyboardInterrupt:
        print("vqc-titanic: interrupted", file=sys.stderr)
        return 130
    except (OSError, ValueError, KeyError) as exc:
        print(f"vqc-titanic: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
