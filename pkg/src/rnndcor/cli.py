"""Command-line front end.

Configuration is resolved in this order: built-in defaults, ``--config``
JSON file, process flags (``--process``/``--preset`` ...), the explicit
shortcut flags, and finally any ``--<dotted.key> VALUE`` override such as
``--rnn.hidden 128`` or ``--process.standard_form true``.

Exit codes: 0 success, 2 user error, 1 numerical or runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import re
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import analysis, charts, experiment, rnn, tsgen
from .errors import RnnDcorError, UserInputError
from .experiment import ExperimentConfig, ProcessSpec

log = logging.getLogger("rnndcor")

OUT_ENV = "RNNDCOR_OUT"
DEFAULT_OUT = "rnndcor_out"

TABLE_COLUMNS = ("series", "mse", "mse_std", "mape", "mape_std", "max_r", "final_r",
                 "change_pct", "change_pct_raw", "runs", "failed")


# ---------------------------------------------------------------- config

def _value(text: str) -> Any:
    """JSON literal when it parses as one, the raw string otherwise."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in re.split(r"[:,]", text) if v.strip())
    except ValueError as exc:
        raise UserInputError(f"cannot parse coefficient list {text!r}") from exc


def parse_dotted(tokens: Sequence[str]) -> dict[str, Any]:
    """``["--rnn.hidden", "128", "--runs=3"]`` -> ``{"rnn.hidden": 128, "runs": 3}``."""
    out: dict[str, Any] = {}
    it = iter(tokens)
    for tok in it:
        if not tok.startswith("--") or len(tok) < 3:
            raise UserInputError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, raw = key.split("=", 1)
        else:
            raw = next(it, None)
            if raw is None:
                raise UserInputError(f"override {tok} needs a value")
        out[key.replace("-", "_")] = _value(raw)
    return out


def _set_pairs(pairs: Sequence[str]) -> dict[str, Any]:
    out = {}
    for p in pairs or ():
        if "=" not in p:
            raise UserInputError(f"expected KEY=VALUE, got {p!r}")
        k, v = p.split("=", 1)
        out[k.strip()] = _value(v)
    return out


def _preset(name: str) -> ProcessSpec:
    presets = experiment.reference_presets()
    norm = {re.sub(r"[^a-z0-9]", "", k.lower()): v for k, v in presets.items()}
    key = re.sub(r"[^a-z0-9]", "", name.lower())
    if key not in norm:
        raise UserInputError(f"unknown preset {name!r}; choose from {sorted(presets)}")
    return norm[key]


def _process_from_args(args: argparse.Namespace, base: ProcessSpec) -> ProcessSpec:
    if args.preset:
        spec = _preset(args.preset)
    elif args.process:
        kind = args.process
        extra = {"standard_form": bool(args.standard_form)}
        if kind == "csv":
            if not args.csv:
                raise UserInputError("--process csv needs --csv PATH")
            col = args.column
            spec = ProcessSpec("csv", csv_path=args.csv,
                               column=int(col) if col is not None and col.isdigit() else (col or 0),
                               skip_header=args.skip_header, delimiter=args.delimiter)
        elif kind == "garch":
            p, q = _orders(args.order, 1)
            g = tsgen.GarchParams.default(p, q)
            spec = ProcessSpec("garch", alpha0=g.alpha0 if args.alpha0 is None else args.alpha0,
                               alpha=_floats(args.alpha) if args.alpha else g.alpha,
                               beta=_floats(args.beta) if args.beta else g.beta, **extra)
        else:
            p, q = _orders(args.order, None)
            ar = ma = ()
            if kind in ("ar", "arma"):
                ar = _floats(args.coeffs) if args.coeffs else tsgen.lag_coeffs(p or 1, args.coeff)
            if kind == "ma":
                ma = (_floats(args.coeffs) if args.coeffs else
                      tsgen.lag_coeffs(q or p or 1, args.coeff))
            if kind == "arma":
                ma = _floats(args.ma_coeffs) if args.ma_coeffs else tsgen.lag_coeffs(q or 1, args.coeff)
            spec = ProcessSpec(kind, ar=ar, ma=ma, delta=args.delta, **extra)
    else:
        return base
    if args.noise_std is not None:
        spec = replace(spec, noise_std=args.noise_std)
    return spec


def _orders(text: str | None, default: int | None) -> tuple[int | None, int | None]:
    if not text:
        return default, default
    parts = [int(v) for v in re.split(r"[,:]", text)]
    if len(parts) == 1:
        return parts[0], parts[0]
    return parts[0], parts[1]


def resolve_config(args: argparse.Namespace, extra: Sequence[str]) -> ExperimentConfig:
    doc: dict[str, Any] = {}
    if args.config:
        path = Path(args.config)
        doc = json.loads(path.read_text(encoding="utf-8"))
        if "config" in doc and isinstance(doc["config"], dict):   # an emitted artifact
            doc = doc["config"]
    cfg = ExperimentConfig.from_dict(doc) if doc else ExperimentConfig()
    cfg = replace(cfg, process=_process_from_args(args, cfg.process))
    shortcuts = {
        "length": args.len, "base_seed": args.seed, "runs": args.runs, "name": args.name,
        "max_dcor_samples": args.max_dcor_samples, "workers": args.workers,
    }
    overrides = {k: v for k, v in shortcuts.items() if v is not None}
    if args.workers is None and not doc.get("workers"):
        overrides["workers"] = os.cpu_count() or 1
    overrides.update(_set_pairs(args.set))
    overrides.update(parse_dotted(extra))
    return cfg.with_overrides(overrides) if overrides else cfg


# ---------------------------------------------------------------- output

def out_dir(args: argparse.Namespace) -> Path:
    d = Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    d.mkdir(parents=True, exist_ok=True)
    return d


def slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_") or "experiment"


def write_rows(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def _f(x: float | None, p: int) -> str:
    return "" if x is None else f"{x:.{p}f}"


def table_row(name: str, agg: dict[str, Any], p: int, failed: int = 0) -> list[str]:
    m, s = agg["mean"], agg["std"]
    return [name, _f(m["mse"], p), _f(s["mse"], p), _f(m["mape"], p), _f(s["mape"], p),
            _f(m["max_r"], p), _f(m["final_r"], p), str(round(m["info_loss_pct"])),
            _f(m["info_loss_pct"], p), str(agg["runs"]), str(failed)]


def pretty_row(name: str, agg: dict[str, Any]) -> str:
    m, s = agg["mean"], agg["std"]
    return (f"{name}\tMSE {m['mse']:.3f} ± {s['mse']:.3f}\tMAPE {m['mape']:.3f} ± {s['mape']:.3f}"
            f"\tmax {m['max_r']:.3f}\tfinal {m['final_r']:.3f}\tchange {round(m['info_loss_pct'])}%")


def emit_profile(dest: Path, stem: str, profile: Sequence[float], acf: Sequence[float] | None,
                 title: str, p: int) -> list[Path]:
    csv_path = dest / f"{stem}.csv"
    analysis.write_profile_csv(csv_path, profile, acf, precision=p)
    series = {"dcor": profile}
    if acf is not None:
        series["acf"] = acf
    svg = charts.render_bar_chart(series, title=title, ylabel="value", precision=p,
                                  source=csv_path.name)
    return [csv_path, svg.save(dest / f"{stem}.svg")]


def emit_forecast(dest: Path, stem: str, table: dict[str, np.ndarray], title: str, p: int) -> list[Path]:
    csv_path = dest / f"{stem}.csv"
    rows = [[int(i), _f(a, p), _f(f, p)]
            for i, a, f in zip(table["index"], table["actual"], table["forecast"])]
    write_rows(csv_path, ("index", "actual", "forecast"), rows)
    svg = charts.render_forecast_overlay(table["index"], table["actual"], table["forecast"],
                                         title=title, precision=p, source=csv_path.name)
    return [csv_path, svg.save(dest / f"{stem}.svg")]


def read_forecast_csv(path: Path) -> dict[str, np.ndarray]:
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in ("index", "actual", "forecast")}


def render_doc(doc: dict[str, Any], dest: Path, stem: str) -> list[Path]:
    """Write the delimited tables and SVG charts belonging to an emitted JSON artifact."""
    kind = doc.get("kind")
    p = int(doc.get("config", {}).get("precision", 6))
    label = doc.get("label", stem)
    written: list[Path] = []
    if kind == "run":
        s = doc["summary"]
        written += emit_profile(dest, f"{stem}_profile", s["profile"], s["acf"],
                                f"{label} run {doc['run_index']}: dcor and ACF by layer", p)
        fc = dest / f"{stem}_forecast.csv"
        if "forecast" in doc:
            written += emit_forecast(dest, f"{stem}_forecast",
                                     {k: np.asarray(v) for k, v in doc["forecast"].items()},
                                     f"{label} run {doc['run_index']}: test forecasts", p)
        elif fc.exists():
            written += emit_forecast(dest, f"{stem}_forecast", read_forecast_csv(fc),
                                     f"{label} run {doc['run_index']}: test forecasts", p)
    elif kind == "simulate":
        agg = doc["aggregate"]
        written.append(write_rows(dest / f"{stem}_table.csv", TABLE_COLUMNS,
                                  [table_row(label, agg, p, len(doc["failures"]))]))
        written += emit_profile(dest, f"{stem}_mean_profile", agg["mean_profile"], agg["mean_acf"],
                                f"{label}: mean dcor over {agg['runs']} runs", p)
    elif kind == "heatmap":
        grid = analysis.HeatmapGrid(np.asarray(doc["grid"], dtype=float), tuple(doc["labels"]))
        csv_path = dest / f"{stem}_grid.csv"
        grid.to_csv(csv_path, precision=p)
        caption = [f"{k}: MSE {v['mse']:.4f}, MAPE {v['mape']:.4f}" for k, v in doc["metrics"].items()]
        caption.append(f"aligned test windows: {doc['n_samples']}")
        svg = charts.render_heatmap(grid.grid, grid.labels, title=f"{label}: layer dcor",
                                    caption=caption, precision=p, source=csv_path.name)
        written += [csv_path, svg.save(dest / f"{stem}_grid.svg")]
    elif kind == "sweep":
        axes = list(doc["axes"])
        rows = []
        for r in doc["rows"]:
            pre = [json.dumps(r["variant"][a]) for a in axes]
            if r["aggregate"] is None:
                rows.append(pre + [label] + [""] * (len(TABLE_COLUMNS) - 1) + [r["error"]])
            else:
                rows.append(pre + table_row(label, r["aggregate"], p, r["failed"]) + [""])
        written.append(write_rows(dest / f"{stem}_sweep.csv", axes + list(TABLE_COLUMNS) + ["error"], rows))
    elif kind == "series":
        pass
    else:
        raise UserInputError(f"not an rnndcor artifact (kind={kind!r})")
    return written


def _announce(paths: Sequence[Path]) -> None:
    for p in paths:
        print(p)


# ---------------------------------------------------------------- commands

def cmd_generate(args, cfg: ExperimentConfig) -> int:
    dest = out_dir(args)
    with experiment.stage("generate"):
        series = cfg.process.build(cfg.length, cfg.base_seed, cfg.burn_in)
    path = Path(args.output) if args.output else dest / f"{slug(cfg.label)}_seed{cfg.base_seed}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    tsgen.write_series_csv(path, series)
    doc = {"kind": "series", "label": cfg.label, "process": cfg.process.name,
           **series.describe(), "csv": path.name, "config": cfg.to_dict()}
    sidecar = path.with_suffix(".json")
    analysis.write_json(sidecar, doc)
    _announce([path, sidecar])
    return 0


def run_doc(cfg: ExperimentConfig, res: experiment.RunResult, run_index: int) -> dict[str, Any]:
    s = res.summary.to_dict()
    s["info_loss_pct_rounded"] = round(s["info_loss_pct"])
    return {
        "kind": "run", "label": cfg.label, "run_index": run_index, "seed": res.summary.seed,
        "summary": s, "series": res.data.series.describe(),
        "standardization": {"mean": res.data.standardized.mean, "std": res.data.standardized.std},
        "train_range": [res.data.train_range.start, res.data.train_range.stop],
        "test_range": [res.data.test_range.start, res.data.test_range.stop],
        "config": cfg.to_dict(),
    }


def cmd_run(args, cfg: ExperimentConfig) -> int:
    dest = out_dir(args)
    t0 = time.perf_counter()
    res = experiment.run_once(cfg, args.run_index)
    log.info("run finished in %.1f s", time.perf_counter() - t0)
    stem = f"{slug(cfg.label)}_run{args.run_index}"
    doc = run_doc(cfg, res, args.run_index)
    path = dest / f"{stem}_summary.json"
    analysis.write_json(path, doc)
    p = cfg.precision
    written = [path]
    written += emit_profile(dest, f"{stem}_profile", doc["summary"]["profile"], doc["summary"]["acf"],
                            f"{cfg.label} run {args.run_index}: dcor and ACF by layer", p)
    written += emit_forecast(dest, f"{stem}_forecast", res.forecast_table(),
                             f"{cfg.label} run {args.run_index}: test forecasts", p)
    if args.save_model:
        model_path = dest / f"{stem}_model.json"
        res.report.model.save(model_path)
        written.append(model_path)
    s = res.summary
    print(f"{cfg.label} seed {s.seed}: MSE {s.mse:.4f} MAPE {s.mape:.4f} max_r {s.max_r:.3f} "
          f"final_r {s.final_r:.3f} change {round(s.info_loss_pct)}%")
    _announce(written)
    return 0


def simulate_doc(res: experiment.SimulationResult) -> dict[str, Any]:
    cfg = res.config
    return {
        "kind": "simulate", "label": cfg.label, "config": cfg.to_dict(),
        "seeds": [cfg.base_seed + i for i in range(cfg.runs)],
        "aggregate": res.aggregate.to_dict(),
        "runs": [r.to_dict() for r in res.runs],
        "failures": {str(k): v for k, v in res.failures.items()},
    }


def cmd_simulate(args, cfg: ExperimentConfig) -> int:
    dest = out_dir(args)
    res = experiment.simulate(cfg)
    doc = simulate_doc(res)
    stem = slug(cfg.label)
    path = dest / f"{stem}_simulate.json"
    analysis.write_json(path, doc)
    written = [path] + render_doc(doc, dest, stem)
    print(pretty_row(cfg.label, doc["aggregate"]))
    _announce(written)
    return 0


def _rnn_variant(base: rnn.RnnConfig, path: str | None, pairs: Sequence[str], seed: int) -> rnn.RnnConfig:
    d = base.to_dict()
    d["seed"] = seed
    if path:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if "config" in doc:
            doc = doc["config"]
        d.update(doc.get("rnn", doc))
    for k, v in _set_pairs(pairs).items():
        if k not in d:
            raise UserInputError(f"unknown RNN config field {k!r}")
        d[k] = v
    return rnn.RnnConfig.from_dict(d)


def cmd_heatmap(args, cfg: ExperimentConfig) -> int:
    dest = out_dir(args)
    ra = _rnn_variant(cfg.rnn, args.config_a, args.a, cfg.base_seed)
    rb = _rnn_variant(cfg.rnn, args.config_b, args.b, cfg.base_seed)
    labels = tuple(args.labels.split(",")) if args.labels else None
    res = experiment.heatmap(cfg, ra, rb, labels)
    shift = rb.T - ra.T
    g = res.grid.grid
    doc = {
        "kind": "heatmap", "label": cfg.label, "config": cfg.to_dict(),
        "model_a": ra.to_dict(), "model_b": rb.to_dict(), "labels": list(res.grid.labels),
        "metrics": res.metrics, "n_samples": res.n_samples, "grid": g.tolist(),
        "diagonal_shift": shift,
        "diagonal_means": {str(k): v for k, v in analysis.diagonal_means(g, shift).items()},
        "streak_period": analysis.streak_period(g, shift),
    }
    stem = f"{slug(cfg.label)}_{slug(res.grid.labels[0])}_vs_{slug(res.grid.labels[1])}"
    path = dest / f"{stem}_heatmap.json"
    analysis.write_json(path, doc)
    written = [path] + render_doc(doc, dest, stem)
    for k, v in res.metrics.items():
        print(f"{k}: MSE {v['mse']:.4f} MAPE {v['mape']:.4f}")
    print(f"streak period: {doc['streak_period']}")
    _announce(written)
    return 0


def _axes(args) -> dict[str, list[Any]]:
    axes: dict[str, list[Any]] = {}
    if args.axes:
        parsed = json.loads(args.axes)
        if not isinstance(parsed, dict):
            raise UserInputError("--axes must be a JSON object")
        axes.update({k: list(v) for k, v in parsed.items()})
    for spec in args.axis or ():
        if "=" not in spec:
            raise UserInputError(f"expected NAME=v1,v2,..., got {spec!r}")
        k, vals = spec.split("=", 1)
        axes[k.strip()] = [_value(v) for v in vals.split(",") if v.strip()]
    for k, v in axes.items():
        if not v:
            raise UserInputError(f"sweep axis {k!r} has no values")
    return axes


def cmd_sweep(args, cfg: ExperimentConfig) -> int:
    dest = out_dir(args)
    axes = _axes(args)
    rows = experiment.sweep(cfg, axes)
    doc = {
        "kind": "sweep", "label": cfg.label, "config": cfg.to_dict(), "axes": axes,
        "rows": [{
            "variant": r.variant,
            "config": None if r.result is None else r.result.config.to_dict(),
            "aggregate": None if r.result is None else r.result.aggregate.to_dict(),
            "failed": 0 if r.result is None else len(r.result.failures),
            "error": r.error,
        } for r in rows],
    }
    stem = slug(cfg.label)
    path = dest / f"{stem}_sweep.json"
    analysis.write_json(path, doc)
    written = [path] + render_doc(doc, dest, stem)
    for r in doc["rows"]:
        tag = " ".join(f"{k}={v}" for k, v in r["variant"].items()) or "base"
        print(f"[{tag}] " + (pretty_row(cfg.label, r["aggregate"]) if r["aggregate"] else r["error"]))
    _announce(written)
    return 0 if any(r["aggregate"] for r in doc["rows"]) else 1


def cmd_report(args, cfg: ExperimentConfig | None) -> int:
    written: list[Path] = []
    for name in args.artifacts:
        path = Path(name)
        doc = json.loads(path.read_text(encoding="utf-8"))
        dest = out_dir(args) if args.out or os.environ.get(OUT_ENV) else path.parent
        stem = re.sub(r"_(summary|simulate|heatmap|sweep)$", "", path.stem)
        written += render_doc(doc, dest, stem)
        if doc.get("kind") == "simulate":
            print(pretty_row(doc["label"], doc["aggregate"]))
    _announce(written)
    return 0


# ---------------------------------------------------------------- parser

def _add_experiment_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("experiment")
    g.add_argument("--config", help="JSON experiment config (or any emitted JSON artifact)")
    g.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    g.add_argument("--name", help="label used in file names and tables")
    g.add_argument("--seed", type=int, help="base seed; run i uses seed + i")
    g.add_argument("--len", type=int, help="series length after burn-in")
    g.add_argument("--runs", type=int, help="number of independent runs")
    g.add_argument("--workers", type=int, help="worker processes (default: CPU count)")
    g.add_argument("--max-dcor-samples", type=int, help="seeded subsample size for dcor")
    g.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="dotted config override, repeatable (e.g. rnn.hidden=128)")
    s = p.add_argument_group("process")
    s.add_argument("--preset", help="named benchmark process, e.g. 'AR(5)' or ma20")
    s.add_argument("--process", choices=experiment.PROCESS_KINDS)
    s.add_argument("--order", help="process order p, or p,q")
    s.add_argument("--coeffs", help="colon-separated coefficients (AR, or MA for --process ma)")
    s.add_argument("--ma-coeffs", help="colon-separated MA coefficients for --process arma")
    s.add_argument("--coeff", type=float, default=tsgen.DEFAULT_LAG_COEFF,
                   help="largest-lag coefficient when only --order is given")
    s.add_argument("--delta", type=float, default=0.0, help="MA/ARMA intercept")
    s.add_argument("--alpha0", type=float)
    s.add_argument("--alpha", help="colon-separated GARCH alpha_1..alpha_p")
    s.add_argument("--beta", help="colon-separated GARCH beta_1..beta_q")
    s.add_argument("--standard-form", action="store_true",
                   help="MA with the contemporaneous shock; GARCH with unsquared lagged variance")
    s.add_argument("--noise-std", type=float)
    s.add_argument("--csv", help="series CSV for --process csv")
    s.add_argument("--column", help="CSV column index or header name")
    s.add_argument("--skip-header", action="store_true")
    s.add_argument("--delimiter", default=",")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rnndcor",
        description="Train Elman RNNs on time series and measure layer-wise distance correlation.",
        epilog="Any config field can also be set with --<dotted.name> VALUE, e.g. --rnn.epochs 5.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    sub_kw = {"allow_abbrev": False}

    p = sub.add_parser("generate", **sub_kw, help="write a synthetic series CSV and its JSON sidecar")
    _add_experiment_args(p)
    p.add_argument("--output", help="CSV path (default: <out>/<process>_seed<seed>.csv)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", **sub_kw, help="train one network and analyze its layers")
    _add_experiment_args(p)
    p.add_argument("--run-index", type=int, default=0, help="seed offset from the base seed")
    p.add_argument("--save-model", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", **sub_kw, help="repeat runs over seeds and aggregate")
    _add_experiment_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("heatmap", **sub_kw, help="layer-by-layer dcor between two networks")
    _add_experiment_args(p)
    p.add_argument("--config-a", help="RNN config JSON for model A")
    p.add_argument("--config-b", help="RNN config JSON for model B")
    p.add_argument("--a", action="append", metavar="KEY=VALUE", help="RNN override for model A")
    p.add_argument("--b", action="append", metavar="KEY=VALUE", help="RNN override for model B")
    p.add_argument("--labels", help="comma-separated labels for models A and B")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("sweep", **sub_kw, help="simulate every combination of the sweep axes")
    _add_experiment_args(p)
    p.add_argument("--axis", action="append", metavar="NAME=v1,v2",
                   help=f"sweep axis, repeatable; names: {', '.join(sorted(experiment.SWEEP_AXES))}")
    p.add_argument("--axes", help='axes as JSON, e.g. \'{"hidden": [64, 128]}\'')
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", **sub_kw, help="re-render tables and charts from emitted JSON artifacts")
    p.add_argument("artifacts", nargs="+")
    p.add_argument("--out", help="output directory (default: next to each artifact)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            if extra:
                raise UserInputError(f"unexpected arguments: {' '.join(extra)}")
            return args.func(args, None)
        cfg = resolve_config(args, extra)
        return args.func(args, cfg)
    except UserInputError as exc:
        _fail(exc)
        return 2
    except (json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RnnDcorError, ArithmeticError) as exc:
        _fail(exc)
        return 1


def _fail(exc: Exception) -> None:
    tag = getattr(exc, "stage", None)
    where = f" [{tag}]" if tag else ""
    print(f"error{where}: {type(exc).__name__}: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
