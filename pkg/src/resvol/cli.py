"""Command-line pipeline: scenes in, segmented series, model, and report out.

Subcommands mirror the processing stages: segment, hypso, train, predict,
evaluate, persistence, synth, run (the whole chain), report. Every command
writes only under --out, exits 0 on success and nonzero with a one-line
diagnostic on failure (2 config, 3 input, 4 pipeline).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from datetime import date as Date
from pathlib import Path

import numpy as np

from . import hypsometry, metrics, regression, report, segmentation, synth, timeseries
from .config import RunConfig, parse_config
from .errors import (
    ConfigError,
    DegenerateHistogramError,
    InputError,
    PipelineError,
    ResvolError,
)
from .grids import load_aoi, load_scene, parse_manifest
from .timeseries import SeriesRecord

RESULTS_HEADER = "date,sensor,index,threshold,area_m2,surface_fraction"


@dataclass(frozen=True)
class SegmentResult:
    date: Date
    sensor_id: str
    index_used: str
    threshold: float
    area_m2: float
    surface_fraction: float
    mask: np.ndarray | None = None  # kept in memory for persistence maps


# ---------------------------------------------------------------------------
# Stage helpers (shared between individual commands and `run`)
# ---------------------------------------------------------------------------

def _require_path(p: Path | None, key: str) -> Path:
    if p is None:
        raise ConfigError(f"config key {key!r} is required for this command")
    if not Path(p).exists():
        raise InputError(f"{key} path {p} does not exist")
    return Path(p)


def _segment_all(cfg: RunConfig, keep_masks: bool = False) -> list[SegmentResult]:
    manifest = _require_path(cfg.manifest, "manifest")
    aoi = load_aoi(_require_path(cfg.aoi, "aoi"))
    seg_cfg = segmentation.SegmentationConfig(
        bin_count=cfg.bins,
        min_component_size=cfg.min_component_size,
        aoi_dilation_cells=cfg.aoi_dilation,
    )
    results = []
    for entry in parse_manifest(manifest):
        scene = load_scene(entry)
        try:
            wm = segmentation.segment_scene(scene, aoi, seg_cfg)
        except DegenerateHistogramError as e:
            print(
                f"warning: scene {entry.date} ({entry.sensor_id}) unusable: {e}",
                file=sys.stderr,
            )
            continue
        results.append(
            SegmentResult(
                date=entry.date,
                sensor_id=entry.sensor_id,
                index_used=wm.index_used,
                threshold=wm.threshold_used,
                area_m2=wm.area_m2,
                surface_fraction=wm.surface_fraction,
                mask=wm.water if keep_masks else None,
            )
        )
    if not results:
        raise PipelineError("no usable scenes in manifest")
    results.sort(key=lambda r: (r.date, r.sensor_id))
    return results


def _write_results(results: list[SegmentResult], path: Path) -> None:
    lines = [RESULTS_HEADER]
    for r in results:
        lines.append(
            f"{r.date.isoformat()},{r.sensor_id},{r.index_used},"
            f"{r.threshold!r},{r.area_m2!r},{r.surface_fraction!r}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _load_results(path: Path) -> list[SegmentResult]:
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != RESULTS_HEADER:
        raise InputError(f"{path.name}: expected header {RESULTS_HEADER!r}")
    out = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        p = line.split(",")
        if len(p) != 6:
            raise InputError(f"{path.name} line {lineno}: expected 6 fields")
        out.append(
            SegmentResult(
                date=Date.fromisoformat(p[0]),
                sensor_id=p[1],
                index_used=p[2],
                threshold=float(p[3]),
                area_m2=float(p[4]),
                surface_fraction=float(p[5]),
            )
        )
    return out


def _build_curve(cfg: RunConfig) -> hypsometry.HypsometricCurve:
    if cfg.curve is not None:
        return hypsometry.load_curve_csv(_require_path(cfg.curve, "curve"))
    soundings = hypsometry.load_soundings(_require_path(cfg.soundings, "soundings"))
    manifest = _require_path(cfg.manifest, "manifest")
    entries = parse_manifest(manifest)
    if not entries:
        raise InputError(f"{manifest.name}: empty manifest (needed for the DEM grid)")
    spec = load_scene(entries[0]).spec
    dem = hypsometry.nn_interpolate(soundings, spec)
    levels = hypsometry.default_levels(dem, cfg.spillway, cfg.level_count)
    return hypsometry.build_curve(dem, levels)


def _load_levels(path: Path) -> dict[Date, float]:
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "date,level":
        raise InputError(f"{path.name}: expected header 'date,level'")
    out = {}
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        p = line.split(",")
        if len(p) != 2:
            raise InputError(f"{path.name} line {lineno}: expected 'date,level'")
        out[Date.fromisoformat(p[0])] = float(p[1])
    return out


def _load_truth(path: Path) -> dict[Date, float]:
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "date,volume_m3":
        raise InputError(f"{path.name}: expected header 'date,volume_m3'")
    out = {}
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        p = line.split(",")
        if len(p) != 2:
            raise InputError(f"{path.name} line {lineno}: expected 'date,volume_m3'")
        out[Date.fromisoformat(p[0])] = float(p[1])
    return out


def _train(
    cfg: RunConfig,
    results: list[SegmentResult],
    curve: hypsometry.HypsometricCurve,
    out: Path,
) -> regression.SvrModel:
    levels = _load_levels(_require_path(cfg.levels_file, "levels_file"))
    pairs = []  # (fraction, relative volume)
    for r in results:
        if r.date not in levels:
            continue
        if cfg.train_end_date is not None and r.date >= cfg.train_end_date:
            continue
        try:
            vol = hypsometry.curve_volume_at(curve, levels[r.date])
        except ResvolError as e:
            print(f"warning: skipping training date {r.date}: {e}", file=sys.stderr)
            continue
        pairs.append((r.surface_fraction, vol / curve.capacity_volume))
    if len(pairs) < max(4, cfg.folds):
        raise PipelineError(
            f"only {len(pairs)} training samples; need >= {max(4, cfg.folds)}"
        )
    train, test = regression.train_test_split(pairs, cfg.train_fraction, cfg.seed)
    x_tr = np.array([p[0] for p in train])
    y_tr = np.array([p[1] for p in train])
    x_scaler = regression.minmax_fit(x_tr)
    y_scaler = regression.minmax_fit(y_tr)
    xs = regression.minmax_apply(x_scaler, x_tr)
    ys = regression.minmax_apply(y_scaler, y_tr)
    spec = regression.GridSearchSpec(
        c_grid=cfg.c_grid,
        epsilon_grid=cfg.epsilon_grid,
        gamma_grid=cfg.gamma_grid,
        folds=cfg.folds,
        seed=cfg.seed,
    )
    best, table = regression.grid_search_cv(xs, ys, spec)
    regression.save_cv_table(table, out / "cv_table.csv")
    model = regression.svr_fit(
        xs, ys, best, x_scaler=x_scaler, y_scaler=y_scaler
    )
    regression.save_model(model, out / "model.txt")

    x_te = np.array([p[0] for p in test])
    y_te = np.array([p[1] for p in test])
    pred = np.array([regression.svr_predict(model, float(v)) for v in x_te])
    pred_scaled = regression.minmax_apply(y_scaler, pred)
    true_scaled = regression.minmax_apply(y_scaler, y_te)
    summary = [
        f"n_train {len(train)}",
        f"n_test {len(test)}",
        f"best_c {best.c!r}",
        f"best_epsilon {best.epsilon!r}",
        f"best_gamma {best.gamma!r}",
        f"test_mae_scaled {float(np.mean(np.abs(pred_scaled - true_scaled)))!r}",
        f"test_rmse_scaled {float(np.sqrt(np.mean((pred_scaled - true_scaled) ** 2)))!r}",
        f"test_mae_relative {float(np.mean(np.abs(pred - y_te)))!r}",
        f"test_rmse_relative {float(np.sqrt(np.mean((pred - y_te) ** 2)))!r}",
        f"kkt_residual {model.kkt_residual!r}",
        f"n_iter {model.n_iter}",
        f"converged {int(model.converged)}",
    ]
    (out / "train_summary.txt").write_text(
        "\n".join(summary) + "\n", encoding="utf-8", newline="\n"
    )
    return model


def _predict(
    results: list[SegmentResult],
    model: regression.SvrModel,
    capacity_m3: float,
) -> list[SeriesRecord]:
    records = []
    for r in results:
        rel = regression.svr_predict(model, r.surface_fraction)
        rel = max(rel, 0.0)  # a raw expansion can dip below zero off-range
        records.append(
            SeriesRecord(
                date=r.date,
                sensor_id=r.sensor_id,
                index_used=r.index_used,
                threshold=r.threshold,
                area_m2=r.area_m2,
                surface_fraction=r.surface_fraction,
                volume_m3=rel * capacity_m3,
                extrapolated=regression.extrapolates(model, r.surface_fraction),
            )
        )
    return timeseries.build_series(records)


def _evaluate(
    series: list[SeriesRecord], truth: dict[Date, float]
) -> list[tuple[str, metrics.MetricsReport]]:
    obs, sim, years = [], [], []
    for r in series:
        if r.date in truth:
            obs.append(truth[r.date])
            sim.append(r.volume_m3)
            years.append(r.date.year)
    if len(obs) < 2:
        raise PipelineError("fewer than 2 dates shared between series and truth")
    obs_a, sim_a, yr_a = np.array(obs), np.array(sim), np.array(years)
    rows = [("all", metrics.compute_metrics(obs_a, sim_a))]
    for year in sorted(set(years)):
        sel = yr_a == year
        if sel.sum() >= 2:
            rows.append(
                (str(year), metrics.compute_metrics(obs_a[sel], sim_a[sel]))
            )
    return rows


def _write_metrics(rows, path: Path) -> None:
    lines = ["series," + metrics.MetricsReport.csv_header()
             + ",mape_pass,rsr_pass,r2_pass,pbias_pass"]
    for label, rep in rows:
        v = metrics.judge(rep)
        lines.append(
            f"{label},{rep.csv_row()},"
            f"{int(v['mape'])},{int(v['rsr'])},{int(v['r2'])},{int(v['pbias'])}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_segment(cfg: RunConfig, out: Path) -> int:
    results = _segment_all(cfg)
    _write_results(results, out / "results.csv")
    print(f"segment: {len(results)} scenes -> {out / 'results.csv'}")
    return 0


def cmd_hypso(cfg: RunConfig, out: Path) -> int:
    curve = _build_curve(cfg)
    hypsometry.save_curve_csv(curve, out / "curve.csv")
    print(
        f"hypso: {curve.levels.size} levels, capacity "
        f"{curve.capacity_volume:.6g} m^3 -> {out / 'curve.csv'}"
    )
    return 0


def cmd_train(cfg: RunConfig, out: Path) -> int:
    results_path = out / "results.csv"
    if not results_path.exists():
        raise InputError(f"missing {results_path}; run `segment` first")
    results = _load_results(results_path)
    curve = _curve_from_out_or_cfg(cfg, out)
    _train(cfg, results, curve, out)
    print(f"train: model -> {out / 'model.txt'}")
    return 0


def _curve_from_out_or_cfg(cfg: RunConfig, out: Path) -> hypsometry.HypsometricCurve:
    if cfg.curve is not None:
        return hypsometry.load_curve_csv(_require_path(cfg.curve, "curve"))
    curve_path = out / "curve.csv"
    if curve_path.exists():
        return hypsometry.load_curve_csv(curve_path)
    return _build_curve(cfg)


def cmd_predict(cfg: RunConfig, out: Path) -> int:
    model_path = Path(cfg.model) if cfg.model is not None else out / "model.txt"
    if not model_path.exists():
        raise InputError(f"missing model file {model_path}; run `train` first")
    results_path = out / "results.csv"
    if not results_path.exists():
        raise InputError(f"missing {results_path}; run `segment` first")
    model = regression.load_model(model_path)
    curve = _curve_from_out_or_cfg(cfg, out)
    series = _predict(_load_results(results_path), model, curve.capacity_volume)
    timeseries.export_csv(series, out / "series.csv")
    print(f"predict: {len(series)} records -> {out / 'series.csv'}")
    return 0


def cmd_evaluate(cfg: RunConfig, out: Path) -> int:
    series_path = out / "series.csv"
    if not series_path.exists():
        raise InputError(f"missing {series_path}; run `predict` first")
    truth = _load_truth(_require_path(cfg.truth, "truth"))
    rows = _evaluate(timeseries.load_series_csv(series_path), truth)
    _write_metrics(rows, out / "metrics.csv")
    print(f"evaluate: {len(rows)} metric rows -> {out / 'metrics.csv'}")
    return 0


def cmd_persistence(cfg: RunConfig, out: Path) -> int:
    results = _segment_all(cfg, keep_masks=True)
    shapes = {r.mask.shape for r in results}
    if len(shapes) != 1:
        raise PipelineError(f"persistence needs one common grid, got {shapes}")
    years = (
        [cfg.persistence_year]
        if cfg.persistence_year is not None
        else sorted({r.date.year for r in results})
    )
    dated = [(r.date, r.mask) for r in results]
    cell = _first_cell_size(cfg)
    maps = []
    for year in years:
        pm = timeseries.persistence(
            dated,
            year,
            permanent_gt=cfg.persistence_permanent_days,
            ephemeral_lt=cfg.persistence_ephemeral_days,
        )
        maps.append(pm)
        from .grids import write_ascii_grid

        write_ascii_grid(
            timeseries.persistence_to_grid(pm, cell),
            out / f"persistence_{year}.asc",
        )
    lines = ["year,dry,ephemeral,seasonal,permanent"]
    for pm in maps:
        c = pm.class_counts()
        lines.append(
            f"{pm.year},{c['dry']},{c['ephemeral']},{c['seasonal']},{c['permanent']}"
        )
    (out / "persistence_summary.csv").write_text(
        "\n".join(lines) + "\n", encoding="utf-8", newline="\n"
    )
    print(f"persistence: {len(maps)} year map(s) -> {out}")
    return 0


def _first_cell_size(cfg: RunConfig) -> float:
    entries = parse_manifest(_require_path(cfg.manifest, "manifest"))
    return load_scene(entries[0]).cell_size


def cmd_synth(cfg: RunConfig, out: Path) -> int:
    spec = synth.SynthSpec(
        shape=cfg.synth_shape,
        power=cfg.synth_power,
        ncols=cfg.synth_ncols,
        nrows=cfg.synth_nrows,
        cell_size=cfg.synth_cell_size,
        base_level=cfg.synth_base_level,
        spillway_level=cfg.synth_spillway_level,
        noise_sd=cfg.synth_noise_sd,
        seed=cfg.seed,
        sensor_id=cfg.synth_sensor,
    )
    levels = synth.seasonal_levels(
        spec, cfg.synth_n_dates, cfg.synth_years, cfg.synth_low_frac, cfg.synth_high_frac
    )
    campaign = synth.synth_campaign(
        spec, cfg.synth_n_dates, levels, years=cfg.synth_years
    )
    synth.write_campaign(campaign, out)
    run_cfg = [
        "manifest = manifest.txt",
        "aoi = aoi.txt",
        "soundings = soundings.txt",
        "levels_file = levels.csv",
        "truth = truth.csv",
        f"spillway = {spec.spillway_level!r}",
        f"seed = {cfg.seed}",
    ]
    (out / "run.config").write_text(
        "\n".join(run_cfg) + "\n", encoding="utf-8", newline="\n"
    )
    print(f"synth: {cfg.synth_n_dates} scenes -> {out}")
    return 0


def cmd_run(cfg: RunConfig, out: Path) -> int:
    results = _segment_all(cfg)
    _write_results(results, out / "results.csv")
    curve = _build_curve(cfg)
    hypsometry.save_curve_csv(curve, out / "curve.csv")
    model = _train(cfg, results, curve, out)
    series = _predict(results, model, curve.capacity_volume)
    timeseries.export_csv(series, out / "series.csv")
    metric_rows = None
    if cfg.truth is not None:
        truth = _load_truth(_require_path(cfg.truth, "truth"))
        metric_rows = _evaluate(series, truth)
        _write_metrics(metric_rows, out / "metrics.csv")
    html = report.render_report(series, metric_rows, curve)
    report.write_report(out / "report.html", html)
    print(f"run: pipeline complete -> {out / 'report.html'}")
    return 0


def cmd_report(cfg: RunConfig, out: Path) -> int:
    series_path = out / "series.csv"
    if not series_path.exists():
        raise InputError(f"missing {series_path}; run `predict` first")
    series = timeseries.load_series_csv(series_path)
    metric_rows = None
    if cfg.truth is not None and Path(cfg.truth).exists():
        metric_rows = _evaluate(series, _load_truth(Path(cfg.truth)))
    curve = None
    if (out / "curve.csv").exists():
        curve = hypsometry.load_curve_csv(out / "curve.csv")
    html = report.render_report(series, metric_rows, curve)
    report.write_report(out / "report.html", html)
    print(f"report -> {out / 'report.html'}")
    return 0


COMMANDS = {
    "segment": cmd_segment,
    "hypso": cmd_hypso,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "persistence": cmd_persistence,
    "synth": cmd_synth,
    "run": cmd_run,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value config file")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--seed", type=int, help="override the config seed")
    parser = argparse.ArgumentParser(
        prog="resvol",
        description="Reservoir volume estimation from multispectral imagery",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else RunConfig()
        if args.seed is not None:
            cfg.seed = args.seed
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except InputError as e:
        print(f"input error: {e}", file=sys.stderr)
        return 3
    except ResvolError as e:
        print(f"pipeline error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
