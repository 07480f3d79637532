"""Batch execution of scenario configs and deterministic result files.

Every task computes its full result in memory first and only then writes
files (each through a temp file + atomic rename), so a failing run never
leaves partial outputs.  A manifest.json records the config hash, tool
versions and per-file checksums; reruns of the same config are
byte-identical, so the checksums are stable.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import scipy

from . import __version__
from .bistability import bistability_curve
from .closed_form import spectrum_closed_form
from .config import ScenarioConfig, TaskSpec, apply_sweep_value, serialize_config
from .dynamics import bandwidth, hysteresis_sweep, switch_metrics
from .errors import NumericalError, OutputError
from .spectrum import NoiseModel, spectrum_matrix
from .steady_state import (rocking_parameter, solve_transmitted_power,
                           steady_state_from_ptrans)

FLOAT_FMT = "%.12g"


def _fmt(value) -> str:
    if isinstance(value, float):
        return FLOAT_FMT % value
    return str(value)


def _csv(headers, rows) -> str:
    lines = [",".join(headers)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _select_branch(params, eta0, c_rocking, which):
    roots = solve_transmitted_power(params, eta0, c_rocking)
    if not roots:
        raise NumericalError("no steady-state root at the configured bias")
    p_trans = roots[0][0] if which == "lower" else roots[-1][0]
    return steady_state_from_ptrans(params, eta0, c_rocking, p_trans)


def run_bistability(config: ScenarioConfig):
    opt = dict(config.task.options)
    grid = np.linspace(opt["input_min"], opt["input_max"], opt["input_points"])
    c = rocking_parameter(config.drive)
    curve = bistability_curve(config.params, grid, c)
    rows = []
    for input_power, branches in curve.points:
        for index, bp in enumerate(branches):
            rows.append((input_power, index, bp.p_trans,
                         "stable" if bp.stable else "unstable"))
    headers = ("input_power[omega_m^2]", "branch_index",
               "p_trans[dimensionless]", "stability")
    payload = {
        "task": "bistability",
        "rocking_c": c,
        "knees": list(curve.knees),
        "points": [
            {"input_power": ip,
             "branches": [{"p_trans": b.p_trans, "stable": b.stable} for b in brs]}
            for ip, brs in curve.points],
    }
    return {"csv": {"bistability.csv": (headers, rows)},
            "json": {"bistability.json": payload},
            "always": {"knees.json": {"rocking_c": c, "knees": list(curve.knees)}}}


def run_spectrum(config: ScenarioConfig):
    opt = dict(config.task.options)
    grid = np.linspace(opt["omega_min"], opt["omega_max"], opt["omega_points"])
    c = rocking_parameter(config.drive)
    steady = _select_branch(config.params, config.drive.eta0, c, opt["branch"])
    noise = NoiseModel.from_params(config.params)
    if opt["backend"] == "matrix":
        series = spectrum_matrix(config.params, steady, noise, grid)
    else:
        series = spectrum_closed_form(config.params, steady, noise, grid)
    headers = ("omega[omega_m]", "s_q[dimensionless]")
    rows = list(zip(series.omega_grid, series.s_q))
    peaks = [{"position": p.position, "height": p.height, "prominence": p.prominence}
             for p in series.peaks]
    payload = {"task": "spectrum", "backend": opt["backend"], "branch": opt["branch"],
               "p_trans": steady.p_trans, "rocking_c": c, "peaks": peaks,
               "omega": list(series.omega_grid), "s_q": list(series.s_q)}
    return {"csv": {"spectrum.csv": (headers, rows)},
            "json": {"spectrum.json": payload},
            "always": {"peaks.json": {"count": len(peaks), "peaks": peaks}}}


def run_switch_metrics(config: ScenarioConfig):
    opt = dict(config.task.options)
    metrics = switch_metrics(config.params, config.drive,
                             transient_periods=opt["transient_periods"],
                             measure_periods=opt["measure_periods"])
    bw = None
    if opt["bandwidth_points"] >= 2:
        omega_grid = np.linspace(opt["bandwidth_min"], opt["bandwidth_max"],
                                 opt["bandwidth_points"])
        bw = bandwidth(config.params, config.drive.eta0, config.drive.p_amp,
                       omega_grid, transient_periods=opt["transient_periods"],
                       measure_periods=opt["measure_periods"])
    headers = ("switch_ratio[dimensionless]", "gain[dimensionless]",
               "bandwidth[omega_m]")
    rows = [(metrics.switch_ratio, metrics.gain,
             bw if bw is not None else float("nan"))]
    payload = {"task": "switch-metrics", "switch_ratio": metrics.switch_ratio,
               "gain": metrics.gain, "bandwidth": bw}
    return {"csv": {"metrics.csv": (headers, rows)},
            "json": {"metrics.json": payload}, "always": {}}


def run_hysteresis(config: ScenarioConfig):
    opt = dict(config.task.options)
    ramp = np.linspace(opt["input_min"], opt["input_max"], opt["input_points"])
    c = rocking_parameter(config.drive)
    rate = opt["rate"] if opt["rate"] > 0.0 else None
    up, down = hysteresis_sweep(config.params, ramp, c, rate=rate)
    headers = ("direction", "input_power[omega_m^2]", "output_power[dimensionless]")
    rows = [("up", float(i), float(o)) for i, o in up]
    rows += [("down", float(i), float(o)) for i, o in down]
    payload = {"task": "hysteresis", "rocking_c": c,
               "up": [[float(i), float(o)] for i, o in up],
               "down": [[float(i), float(o)] for i, o in down]}
    return {"csv": {"hysteresis.csv": (headers, rows)},
            "json": {"hysteresis.json": payload}, "always": {}}


TASK_RUNNERS = {
    "bistability": run_bistability,
    "spectrum": run_spectrum,
    "switch-metrics": run_switch_metrics,
    "hysteresis": run_hysteresis,
}


def _run_sweep_point(args):
    config, value = args
    inner_name = config.task.option("task")
    inner = TaskSpec(name=inner_name,
                     options=tuple((k, v) for k, v in config.task.options
                                   if k != "task"))
    swept = apply_sweep_value(config, value)
    point = ScenarioConfig(params=swept.params, drive=swept.drive, task=inner,
                           sweep=None, output=config.output)
    return TASK_RUNNERS[inner_name](point)


def run_sweep(config: ScenarioConfig, jobs: int = 1):
    """One result bundle per sweep value; per-point failures are recorded
    without aborting the sweep."""
    values = config.sweep.values
    tasks = [(config, v) for v in values]
    results = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_sweep_point, t) for t in tasks]
            for future in futures:
                try:
                    results.append(("ok", future.result()))
                except Exception as exc:
                    results.append(("error", exc))
    else:
        for t in tasks:
            try:
                results.append(("ok", _run_sweep_point(t)))
            except Exception as exc:
                results.append(("error", exc))

    bundle = {"csv": {}, "json": {}, "always": {}}
    index = []
    for i, (value, (status, payload)) in enumerate(zip(values, results)):
        tag = f"{i:03d}"
        entry = {"index": i, "value": value, "status": status}
        if status == "ok":
            for kind in ("csv", "json", "always"):
                for name, content in payload[kind].items():
                    stem, dot, ext = name.rpartition(".")
                    bundle[kind][f"{stem}_{tag}{dot}{ext}"] = content
        else:
            entry["error"] = {"type": type(payload).__name__,
                              "message": str(payload)}
        index.append(entry)
    if all(status == "error" for status, _ in results):
        first = next(p for s, p in results if s == "error")
        raise NumericalError(f"every sweep point failed; first error: {first}")
    bundle["always"]["sweep_index.json"] = {
        "parameter": config.sweep.parameter, "points": index}
    return bundle


def _atomic_write(path: str, data: bytes):
    tmp = path + ".tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            if os.path.exists(tmp):
                os.unlink(tmp)
        except OSError:
            pass
        raise OutputError(f"cannot write {path}: {exc}") from exc


def run_scenario(config: ScenarioConfig, out_dir: str | None = None,
                 formats=None, jobs: int = 1) -> dict:
    """Execute the config and write result files plus manifest.json.

    Returns the manifest dictionary.  All computation happens before any
    file is touched; files are written atomically.
    """
    out_dir = out_dir or config.output.directory
    if not out_dir:
        raise OutputError("no output directory given (config [output] dir or --out)")
    formats = tuple(formats) if formats else config.output.formats

    if config.task.name == "sweep":
        bundle = run_sweep(config, jobs=jobs)
    else:
        bundle = TASK_RUNNERS[config.task.name](config)

    files = {}
    if "csv" in formats:
        for name, (headers, rows) in bundle["csv"].items():
            files[name] = _csv(headers, rows).encode()
    if "json" in formats:
        for name, payload in bundle["json"].items():
            files[name] = _json(payload).encode()
    for name, payload in bundle["always"].items():
        files[name] = _json(payload).encode()

    config_text = serialize_config(config)
    manifest = {
        "task": config.task.name,
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "versions": {
            "optomech-switch": __version__,
            "python": ".".join(map(str, sys.version_info[:3])),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "files": {name: hashlib.sha256(data).hexdigest()
                  for name, data in sorted(files.items())},
    }

    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out_dir}: {exc}") from exc
    for name, data in sorted(files.items()):
        _atomic_write(os.path.join(out_dir, name), data)
    _atomic_write(os.path.join(out_dir, "manifest.json"),
                  _json(manifest).encode())
    return manifest
