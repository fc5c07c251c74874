"""Command-line front end: config ingestion, sweep orchestration, CSV and
plot emission, and the verification suite entry point.

Config files are flat INI text with [model], [sweep] and optional [output]
sections; results land in ``results.csv`` / ``fits.csv`` / ``meta.json``.
Result files are written to a temporary name and renamed into place, so a
failing run never leaves partial outputs behind.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigInvalid, DimensionOverflow, GibbsLabError, SchemaMismatch
from .experiments import (
    FLOOR,
    KNOWN_QUANTITIES,
    SweepConfig,
    dpi_gap_scan,
    fit_exponential,
    partition_for,
    run_sweep,
    uniform_clustering_scan,
)
from .hamiltonians import MODEL_CATALOG

CSV_HEADER = [
    "model",
    "beta",
    "n",
    "a_size",
    "b_size",
    "c_size",
    "quantity",
    "value",
    "floor_flag",
    "seed",
    "runtime_ms",
]

FITS_HEADER = ["quantity", "rate", "intercept", "r_squared", "superexp_flag"]

_SCANS = ("decay", "uniform_clustering", "dpi_gap")


def parse_config(path) -> tuple[SweepConfig, tuple[str, ...]]:
    """Parse a run configuration; raises ConfigInvalid on any defect."""
    parser = configparser.ConfigParser()
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigInvalid(f"malformed config {path}: {exc}") from None
    if "model" not in parser or "name" not in parser["model"]:
        raise ConfigInvalid("config needs a [model] section with a name")
    if "sweep" not in parser:
        raise ConfigInvalid("config needs a [sweep] section")
    model = parser["model"]["name"].strip()
    params = []
    for key, raw in parser["model"].items():
        if key == "name":
            continue
        try:
            params.append((key, float(raw)))
        except ValueError:
            raise ConfigInvalid(f"model parameter {key} = {raw!r} is not a number") from None
    sweep = parser["sweep"]
    known_keys = {
        "beta", "chain_length", "a_size", "c_size", "b_range",
        "quantities", "seed", "mode", "renyi_q", "scans",
    }
    unknown_keys = set(sweep) - known_keys
    if unknown_keys:
        raise ConfigInvalid(f"unknown sweep keys {sorted(unknown_keys)}")
    try:
        config = SweepConfig(
            model=model,
            chain_length=sweep.getint("chain_length"),
            a_size=sweep.getint("a_size", 1),
            c_size=sweep.getint("c_size", 1),
            b_range=_parse_b_range(sweep.get("b_range", "")),
            quantities=_parse_list(sweep.get("quantities", "mi")),
            beta=sweep.getfloat("beta", 1.0),
            seed=sweep.getint("seed", 0),
            mode=sweep.get("mode", "fixed_chain").strip(),
            renyi_q=sweep.getfloat("renyi_q", 2.0),
            model_params=tuple(sorted(params)),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigInvalid(f"bad sweep settings: {exc}") from None
    scans = _parse_list(sweep.get("scans", "decay"))
    unknown = set(scans) - set(_SCANS)
    if unknown:
        raise ConfigInvalid(f"unknown scans {sorted(unknown)}; known: {_SCANS}")
    config.validate()
    return config, scans


def _parse_list(raw: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in raw.split(",") if x.strip())


def _parse_b_range(raw: str) -> tuple[int, ...]:
    raw = raw.strip()
    if not raw:
        raise ConfigInvalid("b_range is required")
    try:
        if ".." in raw:
            lo, hi = raw.split("..")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(x) for x in raw.split(",") if x.strip())
    except ValueError:
        raise ConfigInvalid(f"cannot parse b_range {raw!r}") from None


def _fmt(value: float) -> str:
    # repr of a Python float is the shortest decimal that round-trips exactly
    return repr(float(value))


def _result_rows(config: SweepConfig, series_list, placement_free: set[str]) -> list[list[str]]:
    rows = []
    for series in series_list:
        for ell, value in series.samples:
            part = partition_for(config, ell)
            finite = np.isfinite(value)
            flagged = (not finite) or value < FLOOR
            stored = value if finite else FLOOR
            a_sz, c_sz = part.a_size, part.c_size
            if series.quantity in placement_free:
                a_sz = c_sz = 0  # maximized over placements; outer sizes not fixed
            rows.append(
                [
                    config.model,
                    _fmt(config.beta),
                    str(part.interval.size),
                    str(a_sz),
                    str(ell),
                    str(c_sz),
                    series.quantity,
                    _fmt(stored),
                    str(int(flagged)),
                    str(config.seed),
                    "0",
                ]
            )
    return rows


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def cmd_run(config_path: str, out_dir: str) -> int:
    started = time.perf_counter()
    try:
        config, scans = parse_config(config_path)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DimensionOverflow as exc:
        print(f"dimension overflow: {exc}", file=sys.stderr)
        return 3
    workers = _worker_count()
    try:
        series_list = []
        placement_free: set[str] = set()
        if "decay" in scans:
            series_list.extend(run_sweep(config, max_workers=workers))
        if "uniform_clustering" in scans:
            scan = uniform_clustering_scan(config, max_workers=workers)
            series_list.append(scan)
            placement_free.add(scan.quantity)
        if "dpi_gap" in scans:
            series_list.append(dpi_gap_scan(config))
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DimensionOverflow as exc:
        print(f"dimension overflow: {exc}", file=sys.stderr)
        return 3
    except (GibbsLabError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results_text = _csv_text(CSV_HEADER, _result_rows(config, series_list, placement_free))
    fit_rows = []
    for series in series_list:
        fit_rows.append(
            [
                series.quantity,
                _fmt(series.fit_rate) if series.fit_rate is not None else "",
                _fmt(series.fit_intercept) if series.fit_intercept is not None else "",
                _fmt(series.r_squared) if series.r_squared is not None else "",
                str(int(series.superexp_flag)),
            ]
        )
    fits_text = _csv_text(FITS_HEADER, fit_rows)
    meta = {
        "config": {
            "model": config.model,
            "model_params": dict(config.model_params),
            "beta": config.beta,
            "chain_length": config.chain_length,
            "a_size": config.a_size,
            "c_size": config.c_size,
            "b_range": list(config.b_range),
            "quantities": list(config.quantities),
            "seed": config.seed,
            "mode": config.mode,
            "renyi_q": config.renyi_q,
            "scans": list(scans),
        },
        "versions": {
            "gibbslab": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_s": round(time.perf_counter() - started, 3),
        "floor": FLOOR,
    }
    _write_atomic(out / "results.csv", results_text)
    _write_atomic(out / "fits.csv", fits_text)
    _write_atomic(out / "meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out / 'results.csv'} ({len(series_list)} series)")
    return 0


def _worker_count() -> int:
    raw = os.environ.get("GIBBS_LAB_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def cmd_verify(level: str) -> int:
    from .verify import run_suite

    return run_suite(level)


def cmd_plot(results_csv: str, out_svg: str) -> int:
    try:
        rows = _read_results(results_csv)
    except SchemaMismatch as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_quantity: dict[str, list[tuple[int, float]]] = {}
    for row in rows:
        by_quantity.setdefault(row["quantity"], []).append(
            (int(row["b_size"]), float(row["value"]))
        )
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for quantity, samples in sorted(by_quantity.items()):
        samples.sort()
        xs = [l for l, v in samples if v > 0]
        ys = [v for l, v in samples if v > 0]
        if not xs:
            continue
        (line,) = ax.semilogy(xs, ys, "o-", label=quantity)
        try:
            rate, intercept, _ = fit_exponential(samples)
            grid = np.linspace(min(xs), max(xs), 50)
            ax.semilogy(
                grid,
                np.exp(intercept + rate * grid),
                "--",
                color=line.get_color(),
                alpha=0.6,
            )
        except GibbsLabError:
            pass
    ax.set_xlabel("shielding size |B|")
    ax.set_ylabel("value")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)
    fig.tight_layout()
    tmp = Path(out_svg).with_name(Path(out_svg).name + ".tmp")
    fig.savefig(tmp, format="svg")
    plt.close(fig)
    os.replace(tmp, out_svg)
    print(f"wrote {out_svg}")
    return 0


def _read_results(path: str) -> list[dict[str, str]]:
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaMismatch("results file is empty") from None
            if header != CSV_HEADER:
                raise SchemaMismatch(f"unexpected header {header}")
            rows = [dict(zip(CSV_HEADER, row)) for row in reader]
    except OSError as exc:
        raise SchemaMismatch(f"cannot read {path}: {exc}") from None
    if not rows:
        raise SchemaMismatch("results file has no data rows")
    return rows


def cmd_models() -> int:
    for name, (_, doc) in MODEL_CATALOG.items():
        print(f"{name}: {doc}")
    print(f"quantities: {', '.join(KNOWN_QUANTITIES)}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gibbslab",
        description="decay experiments on thermal states of finite-range spin chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the sweeps described by a config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", required=True, help="output directory")

    p_verify = sub.add_parser("verify", help="run the invariant suite")
    p_verify.add_argument("--level", choices=("fast", "full"), default="fast")

    p_plot = sub.add_parser("plot", help="semilog plot of a results file")
    p_plot.add_argument("results_csv")
    p_plot.add_argument("--out", required=True, help="output SVG path")

    sub.add_parser("models", help="list model presets")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out)
    if args.command == "verify":
        return cmd_verify(args.level)
    if args.command == "plot":
        return cmd_plot(args.results_csv, args.out)
    return cmd_models()


if __name__ == "__main__":
    raise SystemExit(main())
