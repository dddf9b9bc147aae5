"""Parameter sweeps: configuration, parallel evaluation, presets and output."""

import csv
import io
import itertools
import json
import logging
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .dme import BathSpec
from .point import (DEFAULT_TOL, TruncationNotConverged, converge_truncation, evaluate_point,
                    spectrum_summary, temperatures)
from .spectrum import ModelParams

log = logging.getLogger(__name__)

AXES = ("theta", "lambda", "dT", "T_mean")
OUTPUTS = ("current", "g2", "g2_approx", "populations", "spectrum")
FORMATS = ("csv", "json")
CSV_COLUMNS = ("theta_rad", "lambda", "epsilon", "T_R", "T_Q", "alpha", "omega_c",
               "n_max_used", "converged", "J_over_alpha_omega0", "g2", "g2_approx",
               "wall_time_ms")
POPULATION_COLUMNS = tuple(f"P{k}" for k in range(4))
SPECTRUM_COLUMNS = tuple(f"E{k}" for k in range(4)) + POPULATION_COLUMNS + ("A1", "B2")
UNDEF = "undef"
PRESETS = ("fig1b", "fig2a", "fig2b", "fig2c", "fig3", "fig4a", "fig4bcde")


class ConfigError(ValueError):
    pass


_PI_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*pi\s*$")


def parse_number(value, key="value"):
    """Float from a number or a string such as ``"0.25pi"``, ``"pi"`` or ``"1e-3"``."""
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI_NUMBER.match(value)
        if m:
            coeff = m.group(1)
            return (float(coeff) if coeff not in (None, "") else 1.0) * math.pi
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"{key}: cannot parse {value!r} as a number")


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple
    grid: bool = False

    @classmethod
    def fixed(cls, name, value):
        return cls(name, (float(value),), False)

    @classmethod
    def linspace(cls, name, lo, hi, count):
        if count < 2:
            raise ConfigError(f"grid axis {name!r} needs count >= 2, got {count}")
        return cls(name, tuple(float(v) for v in np.linspace(lo, hi, int(count))), True)


@dataclass(frozen=True)
class SweepConfig:
    epsilon: float = 1.5
    n_max: int = None           # None: converge the truncation automatically
    tolerance: float = DEFAULT_TOL
    alpha: float = 0.001
    omega_c: float = 10.0
    axes: dict = field(default_factory=dict)
    outputs: tuple = ("current",)
    out_path: str = None
    out_format: str = "csv"
    argmax_theta: bool = False
    name: str = "sweep"

    def __post_init__(self):
        axes = {name: Axis.fixed(name, default) for name, default in
                zip(AXES, (0.0, 0.01, 0.0, 1.0))}
        axes.update(self.axes)
        object.__setattr__(self, "axes", axes)
        validate(self)

    @property
    def grid_axes(self):
        return [name for name in AXES if self.axes[name].grid]

    @property
    def shape(self):
        return tuple(len(self.axes[name].values) for name in self.grid_axes)

    def points(self):
        """Grid points in row-major order over the grid axes (canonical axis order)."""
        values = [self.axes[name].values for name in AXES]
        for combo in itertools.product(*values):
            yield dict(zip(AXES, combo))

    def __len__(self):
        return int(np.prod([len(self.axes[a].values) for a in AXES]))


def validate(cfg):
    grids = [name for name in AXES if cfg.axes[name].grid]
    if len(grids) > 2:
        raise ConfigError(f"at most 2 grid axes are allowed, got {len(grids)}: {grids}")
    unknown = [o for o in cfg.outputs if o not in OUTPUTS]
    if unknown:
        raise ConfigError(f"unknown output {unknown[0]!r}; allowed: {', '.join(OUTPUTS)}")
    if cfg.out_format not in FORMATS:
        raise ConfigError(f"unknown format {cfg.out_format!r}; allowed: csv, json")
    if cfg.n_max is not None and (int(cfg.n_max) != cfg.n_max or cfg.n_max < 5):
        raise ConfigError(f"n_max must be an integer >= 5 or 'auto', got {cfg.n_max!r}")
    if not cfg.tolerance > 0:
        raise ConfigError("tolerance must be positive")
    if not cfg.epsilon > 0 or not cfg.alpha > 0 or not cfg.omega_c > 0:
        raise ConfigError("epsilon, alpha and omega_c must be positive")
    for th in cfg.axes["theta"].values:
        if not -1e-12 <= th <= math.pi / 2 + 1e-12:
            raise ConfigError(f"theta={th} outside [0, pi/2]")
    for lam in cfg.axes["lambda"].values:
        if lam < 0:
            raise ConfigError(f"lambda={lam} is negative")
    for t_mean in (min(cfg.axes["T_mean"].values), max(cfg.axes["T_mean"].values)):
        for d_t in (min(cfg.axes["dT"].values), max(cfg.axes["dT"].values)):
            t_r, t_q = temperatures(t_mean, d_t)
            if t_q < -1e-12 or t_r < -1e-12:
                raise ConfigError(
                    f"negative bath temperature at grid corner T_mean={t_mean}, dT={d_t}: "
                    f"T_R={t_r}, T_Q={t_q}")


_TOP_KEYS = {"name", "model", "bath", "grid", "outputs", "output", "argmax_theta"}
_SECTION_KEYS = {
    "model": {"epsilon", "n_max", "tolerance"},
    "bath": {"alpha", "omega_c"},
    "grid": set(AXES),
    "output": {"path", "format"},
}


def _check_keys(mapping, allowed, where):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(mapping).__name__}")
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")


def _parse_axis(name, spec):
    if isinstance(spec, dict):
        _check_keys(spec, {"min", "max", "count"}, f"grid.{name}")
        missing = {"min", "max", "count"} - set(spec)
        if missing:
            raise ConfigError(f"grid.{name}: missing {sorted(missing)}")
        count = spec["count"]
        if isinstance(count, bool) or not isinstance(count, int):
            raise ConfigError(f"grid.{name}.count must be an integer")
        return Axis.linspace(name, parse_number(spec["min"], f"grid.{name}.min"),
                             parse_number(spec["max"], f"grid.{name}.max"), count)
    return Axis.fixed(name, parse_number(spec, f"grid.{name}"))


def config_from_dict(data):
    if data is None:
        data = {}
    _check_keys(data, _TOP_KEYS, "config")
    for section, allowed in _SECTION_KEYS.items():
        if section in data:
            _check_keys(data[section], allowed, section)
    model = data.get("model", {})
    bath = data.get("bath", {})
    grid = data.get("grid", {})
    output = data.get("output", {})
    kwargs = {}
    if "epsilon" in model:
        kwargs["epsilon"] = parse_number(model["epsilon"], "model.epsilon")
    n_max = model.get("n_max", "auto")
    if n_max != "auto":
        if isinstance(n_max, bool) or not isinstance(n_max, int):
            raise ConfigError(f"model.n_max must be an integer or 'auto', got {n_max!r}")
        kwargs["n_max"] = n_max
    if "tolerance" in model:
        kwargs["tolerance"] = parse_number(model["tolerance"], "model.tolerance")
    for key in ("alpha", "omega_c"):
        if key in bath:
            kwargs[key] = parse_number(bath[key], f"bath.{key}")
    kwargs["axes"] = {name: _parse_axis(name, spec) for name, spec in grid.items()}
    if "outputs" in data:
        outs = data["outputs"]
        if isinstance(outs, str):
            outs = [outs]
        kwargs["outputs"] = tuple(outs)
    if "path" in output:
        kwargs["out_path"] = str(output["path"])
    if "format" in output:
        kwargs["out_format"] = output["format"]
    if "argmax_theta" in data:
        kwargs["argmax_theta"] = bool(data["argmax_theta"])
    if "name" in data:
        kwargs["name"] = str(data["name"])
    return SweepConfig(**kwargs)


def load_config(path):
    with open(path) as fh:
        text = fh.read()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return config_from_dict(data)


# ---------------------------------------------------------------- evaluation

def compute_record(point, cfg):
    """Evaluate one grid point; failures become flagged records."""
    start = time.perf_counter()
    t_r, t_q = temperatures(point["T_mean"], point["dT"])
    t_r, t_q = max(t_r, 0.0), max(t_q, 0.0)
    rec = {
        "theta_rad": point["theta"], "lambda": point["lambda"], "epsilon": cfg.epsilon,
        "T_R": t_r, "T_Q": t_q, "alpha": cfg.alpha, "omega_c": cfg.omega_c,
        "dT": point["dT"], "T_mean": point["T_mean"],
        "n_max_used": None, "converged": False,
        "J_over_alpha_omega0": None, "g2": None, "g2_approx": None,
    }
    want_g2 = any(o in cfg.outputs for o in ("g2", "g2_approx", "spectrum"))
    bath_r = BathSpec("R", cfg.alpha, cfg.omega_c, t_r)
    bath_q = BathSpec("Q", cfg.alpha, cfg.omega_c, t_q)
    try:
        params = ModelParams(epsilon=cfg.epsilon, lam=point["lambda"],
                             theta=min(max(point["theta"], 0.0), math.pi / 2),
                             n_max=cfg.n_max or 10)
        converged = True
        if cfg.n_max is None:
            try:
                n_used, res = converge_truncation(params, cfg.tolerance, bath_r, bath_q,
                                                  g2=want_g2, return_result=True)
            except TruncationNotConverged as exc:
                log.warning("point %s: %s", point, exc)
                n_used = exc.n_max
                res = evaluate_point(params.replace(n_max=n_used), bath_r, bath_q, want_g2)
                converged = False
        else:
            n_used = cfg.n_max
            res = evaluate_point(params, bath_r, bath_q, want_g2)
        rec["n_max_used"] = n_used
        rec["J_over_alpha_omega0"] = res.current_q.scaled
        if want_g2:
            if res.g2.defined:
                rec["g2"] = res.g2.value
            converged = converged and res.g2.converged
            if math.isfinite(res.g2_approx.value):
                rec["g2_approx"] = res.g2_approx.value
        if "populations" in cfg.outputs or "spectrum" in cfg.outputs:
            summ = spectrum_summary(res)
            for k in range(4):
                rec[f"P{k}"] = float(summ["populations"][k])
            if "spectrum" in cfg.outputs:
                for k in range(4):
                    rec[f"E{k}"] = float(summ["energies"][k])
                rec["A1"] = summ["A1"]
                rec["B2"] = summ["B2"]
        rec["converged"] = converged
    except Exception as exc:  # noqa: BLE001 - one bad point must not abort the sweep
        log.warning("point %s failed: %s", point, exc)
        rec["error"] = f"{type(exc).__name__}: {exc}"
    rec["wall_time_ms"] = int(round(1000 * (time.perf_counter() - start)))
    return rec


def _compute_indexed(args):
    index, point, cfg = args
    return index, compute_record(point, cfg)


def default_jobs():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def run_sweep(cfg, jobs=None):
    """Evaluate every grid point; records come back in grid order."""
    jobs = jobs or default_jobs()
    tasks = [(i, p, cfg) for i, p in enumerate(cfg.points())]
    if jobs <= 1 or len(tasks) <= 1:
        results = [_compute_indexed(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (8 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_compute_indexed, tasks, chunksize=chunk))
    results.sort(key=lambda item: item[0])
    return [rec for _, rec in results]


def argmax_theta_trace(records):
    """For each (lambda, dT, T_mean), the theta with the largest current."""
    groups = {}
    for rec in records:
        key = (rec["lambda"], rec["dT"], rec["T_mean"])
        j = rec["J_over_alpha_omega0"]
        if j is None:
            continue
        best = groups.get(key)
        if best is None or j > best["J_over_alpha_omega0"]:
            groups[key] = {"lambda": rec["lambda"], "T_R": rec["T_R"], "T_Q": rec["T_Q"],
                           "theta_rad": rec["theta_rad"], "J_over_alpha_omega0": j}
    return [groups[k] for k in sorted(groups)]


# ---------------------------------------------------------------- output

def columns_for(cfg):
    cols = list(CSV_COLUMNS)
    if "spectrum" in cfg.outputs:
        cols += SPECTRUM_COLUMNS
    elif "populations" in cfg.outputs:
        cols += POPULATION_COLUMNS
    return cols


def format_value(value):
    """Serialized form shared by CSV and JSON: 12 significant digits or ``undef``."""
    if value is None:
        return UNDEF
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if not math.isfinite(value):
        return UNDEF
    return format(value, ".12g")


def _json_value(value):
    text = format_value(value)
    if text == UNDEF:
        return UNDEF
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    return float(text)


def serialize_records(records, columns, fmt="csv", timing=False):
    rows = []
    for rec in records:
        row = {}
        for col in columns:
            val = rec.get(col)
            if col == "wall_time_ms" and not timing:
                val = None
            row[col] = val
        rows.append(row)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[c]) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        data = [{c: _json_value(row[c]) for c in columns} for row in rows]
        return json.dumps(data, indent=1) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def write_records(records, path, columns, fmt="csv", timing=False):
    text = serialize_records(records, columns, fmt, timing)
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------- presets

def preset(figure_id, resolution=60):
    """Sweep configuration reproducing one figure's parameter grid."""
    base = dict(epsilon=1.5, alpha=0.001, omega_c=10.0, name=figure_id)
    half_pi = math.pi / 2
    r = resolution
    lam_axis = Axis.linspace("lambda", 2.0 / r, 2.0, r)
    dt_axis = Axis.linspace("dT", 0.0, 1.9, r)
    if figure_id == "fig1b":
        axes = {"dT": dt_axis, "theta": Axis.linspace("theta", 0.0, half_pi, r),
                "lambda": Axis.fixed("lambda", 0.01), "T_mean": Axis.fixed("T_mean", 1.0)}
        return SweepConfig(axes=axes, outputs=("current",), **base)
    if figure_id in ("fig2a", "fig2b", "fig2c"):
        theta = {"fig2a": 0.0, "fig2b": math.pi / 4, "fig2c": half_pi}[figure_id]
        axes = {"dT": dt_axis, "lambda": lam_axis, "theta": Axis.fixed("theta", theta),
                "T_mean": Axis.fixed("T_mean", 1.0)}
        return SweepConfig(axes=axes, outputs=("current",), **base)
    if figure_id == "fig3":
        # T_R = 2, T_Q = 0
        axes = {"lambda": lam_axis, "theta": Axis.linspace("theta", 0.0, half_pi, r),
                "dT": Axis.fixed("dT", 2.0), "T_mean": Axis.fixed("T_mean", 1.0)}
        return SweepConfig(axes=axes, outputs=("current",), argmax_theta=True, **base)
    if figure_id == "fig4a":
        axes = {"lambda": lam_axis, "theta": Axis.linspace("theta", 0.0, half_pi, r),
                "dT": Axis.fixed("dT", 0.0), "T_mean": Axis.fixed("T_mean", 0.1)}
        return SweepConfig(axes=axes, outputs=("g2", "g2_approx"), **base)
    if figure_id == "fig4bcde":
        axes = {"theta": Axis.linspace("theta", 0.0, half_pi, r),
                "lambda": Axis.fixed("lambda", 1.0), "dT": Axis.fixed("dT", 0.0),
                "T_mean": Axis.fixed("T_mean", 0.1)}
        return SweepConfig(axes=axes, outputs=("g2", "g2_approx", "spectrum"), **base)
    raise ValueError(f"unknown figure id {figure_id!r}; choose from {', '.join(PRESETS)}")


def with_output(cfg, path=None, fmt=None):
    changes = {}
    if path is not None:
        changes["out_path"] = path
    if fmt is not None:
        changes["out_format"] = fmt
    return replace(cfg, **changes) if changes else cfg
