"""Command line: simulate the factorial experiment, analyse it, compare two samples.

Exit codes: 0 success, 2 configuration error, 3 stale dataset, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from stochorder.config import SCENARIO_ORDER, ConfigError, load_config
from stochorder.dispersion import DispersionConfig, Metric, MultiSample, dispersion_compare
from stochorder.experiment import (
    default_factorial,
    metadata_path_for,
    read_dataset,
    run_experiment,
)
from stochorder.heatsim import DesignOption
from stochorder.ordering import PValueMethod, Sample, TestConfig, fsd_compare, ks_one_sided_test
from stochorder.report import analyze_dataset, write_analysis

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STALE = 3
EXIT_IO = 4

DATASET_NAME = "dataset.csv"

log = logging.getLogger("stochorder")


class StaleDataError(RuntimeError):
    pass


def _csv_list(text: str) -> list[str]:
    return [t.strip().upper() for t in text.split(",") if t.strip()]


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="TOML file merged over the shipped defaults")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one configuration key, e.g. levels.discount_rate.MED=0.04 "
                        "(repeatable)")


def _add_test_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.05, help="family-wise significance level")
    p.add_argument("--comparisons", type=int, default=3,
                   help="number of tests in the Bonferroni family (default 3)")
    p.add_argument("--p-method", choices=["asymptotic", "permutation"], default="asymptotic")
    p.add_argument("--permutations", type=int, default=10_000,
                   help="permutations for --p-method permutation")


def _add_dispersion_args(p: argparse.ArgumentParser, metric_flag: str) -> None:
    if metric_flag == "--metric":
        p.add_argument("--metric", choices=["l1", "l2", "simplex"], default="simplex",
                       help="dispersion statistic (default simplex)")
    else:
        p.add_argument("--dispersion", choices=["l1", "l2", "simplex"], default=None,
                       help="compare dispersion of multi-column samples instead of the values")
    p.add_argument("--k", type=int, default=2, help="simplex dimension k (default 2)")
    p.add_argument("--bootstrap", type=int, default=1000, help="bootstrap resamples B (default 1000)")
    p.add_argument("--seed", type=int, default=0, help="seed for resampling and permutations")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=None,
                   help="rescale coordinates to [0, 1] first (default: on for l1/l2, off for simplex)")
    p.add_argument("--independent-streams", action="store_true",
                   help="draw each dataset's resamples from its own stream")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stochorder", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the factorial experiment and write the dataset CSV")
    _add_config_args(p)
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default out)")
    p.add_argument("--scenarios", type=_csv_list, default=None,
                   help="comma-separated subset of GREEN,NEUTRAL,MARKET")
    p.add_argument("--designs", type=_csv_list, default=None, help="comma-separated subset of D1,D2,D3")

    p = sub.add_parser("analyze", help="dominance and dispersion tables plus CDF curves")
    _add_config_args(p)
    p.add_argument("--dataset", type=Path, default=None,
                   help=f"dataset CSV (default <out>/{DATASET_NAME})")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default out)")
    _add_test_args(p)
    _add_dispersion_args(p, "--metric")

    p = sub.add_parser("compare", help="dominance verdict between two sample CSV files")
    p.add_argument("sample_a", type=Path)
    p.add_argument("sample_b", type=Path)
    _add_test_args(p)
    _add_dispersion_args(p, "--dispersion")
    return parser


def _test_config(args) -> TestConfig:
    return TestConfig(alpha=args.alpha, num_comparisons=args.comparisons,
                      p_value_method=PValueMethod(args.p_method.upper()),
                      num_permutations=args.permutations, seed=args.seed)


def _dispersion_config(args, metric: str) -> DispersionConfig:
    metric = Metric(metric.upper())
    return DispersionConfig(metric=metric, k=args.k if metric is Metric.SIMPLEX else None,
                            num_resamples=args.bootstrap, seed=args.seed,
                            normalize=args.normalize,
                            common_random_numbers=not args.independent_streams)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.overrides)
    scenarios = args.scenarios or list(SCENARIO_ORDER)
    unknown = [s for s in scenarios if s not in cfg.data["scenarios"]]
    if unknown:
        raise ConfigError(f"unknown scenario(s): {', '.join(unknown)}", "--scenarios")
    try:
        designs = [DesignOption(d) for d in (args.designs or [d.value for d in DesignOption])]
    except ValueError as exc:
        raise ConfigError(str(exc), "--designs") from exc
    ds = run_experiment(designs, scenarios, default_factorial(cfg), cfg)
    path = args.out / DATASET_NAME
    ds.write(path)
    print(f"wrote {len(ds)} rows to {path}")
    return EXIT_OK


def _load_checked_dataset(path: Path, config_hash: str):
    if not path.exists():
        raise FileNotFoundError(f"dataset not found: {path}")
    meta_path = metadata_path_for(path)
    if not meta_path.exists():
        raise StaleDataError(f"no metadata next to {path} ({meta_path.name} missing); "
                             "rerun simulate")
    try:
        ds = read_dataset(path)
    except ValueError as exc:
        raise OSError(str(exc)) from exc
    found = ds.metadata.get("config_hash")
    if found != config_hash:
        raise StaleDataError(f"{path} was produced with config {str(found)[:12]}, "
                             f"current config is {config_hash[:12]}; rerun simulate")
    return ds


def cmd_analyze(args) -> int:
    cfg = load_config(args.config, args.overrides)
    test_cfg = _test_config(args)
    disp_cfg = _dispersion_config(args, args.metric)
    path = args.dataset or args.out / DATASET_NAME
    ds = _load_checked_dataset(path, cfg.config_hash)
    analysis = analyze_dataset(ds, test_cfg, disp_cfg, config_hash=cfg.config_hash)
    report = write_analysis(analysis, args.out)
    print(analysis.text(), end="")
    print(f"adjusted significance level {test_cfg.adjusted_level:.4f}")
    print(f"wrote {report} and {len(analysis.curves)} curve files")
    return EXIT_OK


def read_sample_file(path: Path) -> np.ndarray:
    """Numeric CSV, one observation per row; a non-numeric first row is a header."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from exc
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise OSError(f"{path}: not a numeric CSV ({exc})") from exc
    if data.size == 0:
        raise OSError(f"{path}: no observations")
    return data


def cmd_compare(args) -> int:
    test_cfg = _test_config(args)
    a, b = read_sample_file(args.sample_a), read_sample_file(args.sample_b)
    if args.dispersion:
        disp_cfg = _dispersion_config(args, args.dispersion)
        verdict, ks = dispersion_compare(MultiSample(a), MultiSample(b), disp_cfg, test_cfg)
        print(f"statistic {disp_cfg.describe()}, B={disp_cfg.num_resamples}, seed={disp_cfg.seed}")
    else:
        if a.shape[1] != 1 or b.shape[1] != 1:
            raise ConfigError("multi-column samples need --dispersion")
        x, y = Sample(a[:, 0], args.sample_a.name), Sample(b[:, 0], args.sample_b.name)
        verdict = fsd_compare(x, y)
        ks = ks_one_sided_test(x, y, test_cfg)
    print(f"verdict {verdict.relation.value}")
    print(f"D {ks.d_two_sided:.6g}")
    print(f"D- {ks.d_minus:.6g}")
    print(f"p {ks.p_value:.6g} ({ks.method.value.lower()})")
    print(f"rejected {str(ks.rejected).lower()} at level {ks.adjusted_level:.4g}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "analyze": cmd_analyze, "compare": cmd_compare}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StaleDataError as exc:
        print(f"stale data: {exc}", file=sys.stderr)
        return EXIT_STALE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # out-of-range flag values, e.g. --alpha 2 or --bootstrap 10
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
