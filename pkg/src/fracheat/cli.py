"""Reproducible experiment runner.

Usage:
    fracheat <command> --config cfg.json [--seed N] [--out path]
             [--format csv|json] [--workers N]

Commands: ml, caputo, kernel, simulate, variance, mildness, example1,
example2.  All inputs come from a single JSON config document (flag
overrides for seed/out/format/workers); all numeric defaults live in
``DEFAULTS``.  Outputs are written atomically (temp file + rename), embed
the fully resolved config and the package version, and are byte-identical
across reruns with the same config and seed — the JSON ``generated_at``
field is the single exclusion from that contract.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .caputo import CaputoOrder, caputo_derivative, caputo_linear_closed_form, ml_ode_residual
from .errors import ConfigError, FracheatError
from .kernel import EquationSpec, default_spectral_grid, i1_field
from .mildness import classify, closed_form_j2_alpha1, divergence_scan, spectral_variance
from .specfun import EvalPolicy, MLOrder, mittag_leffler
from .stochastic import LatticeSpec, estimate_moments, lattice_point_variance, simulate_field

COMMANDS = ("ml", "caputo", "kernel", "simulate", "variance", "mildness", "example1", "example2")

DEFAULT_SEED = 1000003

DEFAULTS = {
    "seed": DEFAULT_SEED,
    "format": "json",
    "workers": 1,
    "t": 1.0,
    "n_samples": 400,
    "spec": {"alpha": 1.0, "lambda": 1.0, "sigma": 1.0, "d": 1},
    "lattice": {"t_final": None, "n_t": 128, "domain_half_width": 8.0, "n_x": 128},
    "grid": None,
    "point": None,
    "epsilon": 1e-4,
    "epsilon_levels": [2.0**-k for k in range(6, 14)],
    "spectral_cutoff": None,
    "ml": {"alpha": 1.0, "beta": 1.0, "z_min": -10.0, "z_max": 2.0, "num": 101},
    "caputo": {"alpha": 0.5, "x": 1.0, "function": "linear", "c": 1.0, "quad_points": 2048},
}

_EXAMPLE_PRESETS = {
    # subdiffusive: not square-integrable at any point
    "example1": {"alpha": 0.5, "lambda": 1.0, "sigma": 1.0, "d": 2},
    # superdiffusive: square-integrable in two dimensions
    "example2": {"alpha": 1.5, "lambda": 1.0, "sigma": 1.0, "d": 2},
}


@dataclasses.dataclass
class ExperimentConfig:
    command: str
    spec: EquationSpec
    lattice: LatticeSpec | None
    seed: int
    n_samples: int
    output_path: str
    format: str
    workers: int
    resolved: dict  # full defaults-merged raw document (what gets embedded)


def _merge(base, override):
    if isinstance(base, dict) and isinstance(override, dict):
        out = dict(base)
        for k, v in override.items():
            out[k] = _merge(base.get(k), v) if k in base else v
        return out
    return base if override is None else override


def _field(raw, path, caster, required=True):
    node = raw
    for part in path.split(".")[:-1]:
        node = node.get(part) or {}
    leaf = path.split(".")[-1]
    val = node.get(leaf)
    if val is None:
        if required:
            raise ConfigError(f"{path}: missing required value")
        return None
    try:
        return caster(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_config(command: str, document: dict, overrides: dict) -> ExperimentConfig:
    if command not in COMMANDS:
        raise ConfigError(f"command: unknown command {command!r}")
    raw = _merge(DEFAULTS, document or {})
    for key, val in overrides.items():
        if val is not None:
            raw[key] = val
    if command in _EXAMPLE_PRESETS:
        raw["spec"] = dict(raw["spec"], **_EXAMPLE_PRESETS[command])
    if raw["format"] not in ("csv", "json"):
        raise ConfigError(f"format: must be 'csv' or 'json', got {raw['format']!r}")
    try:
        spec = EquationSpec(
            alpha=_field(raw, "spec.alpha", float),
            lambda_=_field(raw, "spec.lambda", float),
            sigma=_field(raw, "spec.sigma", float),
            d=_field(raw, "spec.d", int),
        )
    except FracheatError as exc:
        raise ConfigError(f"spec: {exc}") from exc
    lattice = None
    if command in ("simulate", "variance", "example2"):
        lat = dict(raw["lattice"])
        if lat.get("t_final") is None:
            lat["t_final"] = raw["t"]
        try:
            lattice = LatticeSpec(
                d=spec.d,
                t_final=float(lat["t_final"]),
                n_t=int(lat["n_t"]),
                domain_half_width=float(lat["domain_half_width"]),
                n_x=int(lat["n_x"]),
            )
        except FracheatError as exc:
            raise ConfigError(f"lattice: {exc}") from exc
        raw["lattice"] = dict(lat)
    out = raw.get("output_path") or f"{command}.{raw['format']}"
    return ExperimentConfig(
        command=command,
        spec=spec,
        lattice=lattice,
        seed=int(raw["seed"]),
        n_samples=int(raw["n_samples"]),
        output_path=str(out),
        format=str(raw["format"]),
        workers=int(raw["workers"]),
        resolved=raw,
    )


# --------------------------------------------------------------------------
# output plumbing
# --------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj]
    return obj


def _atomic_write(path: str, text: str) -> str:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path: str, config: ExperimentConfig, result: dict) -> str:
    doc = {
        "artifact_version": __version__,
        "command": config.command,
        "config": _jsonable(config.resolved),
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "result": _jsonable(result),
    }
    return _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_field_csv(path: str, config: ExperimentConfig, t: float, axes, i1, i2) -> str:
    """Field file: header comments with config+version, then t, x1..xd, i1, i2, y.

    Rows are in lattice-major order; floats carry 17 significant digits so
    the values round-trip exactly.
    """
    d = len(axes)
    lines = [
        f"# fracheat {__version__}",
        "# config: " + json.dumps(_jsonable(config.resolved), sort_keys=True),
        "t," + ",".join(f"x{i+1}" for i in range(d)) + ",i1,i2,y",
    ]
    i1 = np.asarray(i1)
    i2 = np.asarray(i2)
    for idx in np.ndindex(*i1.shape):
        coords = ",".join(_fmt(axes[ax][idx[ax]]) for ax in range(d))
        a, b = i1[idx], i2[idx]
        lines.append(f"{_fmt(t)},{coords},{_fmt(a)},{_fmt(b)},{_fmt(a + b)}")
    return _atomic_write(path, "\n".join(lines) + "\n")


def _rows_json(axes, i1, i2, t):
    i1 = np.asarray(i1)
    i2 = np.asarray(i2)
    rows = []
    for idx in np.ndindex(*i1.shape):
        rows.append(
            {
                "t": t,
                "x": [float(axes[ax][idx[ax]]) for ax in range(len(axes))],
                "i1": float(i1[idx]),
                "i2": float(i2[idx]),
                "y": float(i1[idx] + i2[idx]),
            }
        )
    return rows


# --------------------------------------------------------------------------
# command implementations
# --------------------------------------------------------------------------


def _run_ml(config: ExperimentConfig):
    raw = config.resolved["ml"]
    order = MLOrder(float(raw["alpha"]), float(raw["beta"]))
    z = np.linspace(float(raw["z_min"]), float(raw["z_max"]), int(raw["num"]))
    vals = [mittag_leffler(order, float(zz), EvalPolicy()) for zz in z]
    if config.format == "csv":
        lines = [
            f"# fracheat {__version__}",
            "# config: " + json.dumps(_jsonable(config.resolved), sort_keys=True),
            "z,value",
        ]
        lines += [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(z, vals)]
        return [_atomic_write(config.output_path, "\n".join(lines) + "\n")]
    return [
        write_json(
            config.output_path,
            config,
            {"alpha": order.alpha, "beta": order.beta, "z": list(map(float, z)), "value": vals},
        )
    ]


def _run_caputo(config: ExperimentConfig):
    raw = config.resolved["caputo"]
    alpha = float(raw["alpha"])
    x = float(raw["x"])
    qp = int(raw["quad_points"])
    fn = raw["function"]
    if fn == "linear":
        value = caputo_derivative(lambda u: u, CaputoOrder(alpha), x, qp, deriv=lambda u: np.ones_like(u))
        result = {"function": fn, "alpha": alpha, "x": x, "value": value}
        if 0.0 < alpha < 1.0:
            result["closed_form"] = caputo_linear_closed_form(alpha, x)
    elif fn == "quadratic":
        value = caputo_derivative(
            lambda u: u * u, CaputoOrder(alpha), x, qp, deriv=(lambda u: 2.0 * u) if alpha <= 1 else (lambda u: 2.0 * np.ones_like(u))
        )
        result = {"function": fn, "alpha": alpha, "x": x, "value": value}
    elif fn == "ml":
        c = float(raw["c"])
        result = {
            "function": fn,
            "alpha": alpha,
            "x": x,
            "c": c,
            "ode_residual": ml_ode_residual(alpha, c, x, qp),
        }
    else:
        raise ConfigError(f"caputo.function: unknown preset {raw['function']!r}")
    return [write_json(config.output_path, config, result)]


def _kernel_parts(config: ExperimentConfig):
    """I1 (and zero I2) on the lattice centers when ``use_lattice_grid`` is
    set (comparable with ``simulate`` output), else on the default dual grid."""
    t = float(config.resolved["t"])
    lat_raw = config.resolved.get("lattice")
    if config.resolved.get("use_lattice_grid") and lat_raw:
        lattice = LatticeSpec(
            d=config.spec.d,
            t_final=t,
            n_t=int(lat_raw["n_t"]),
            domain_half_width=float(lat_raw["domain_half_width"]),
            n_x=int(lat_raw["n_x"]),
        )
        from .stochastic import _i1_on_centers

        i1 = _i1_on_centers(config.spec, lattice)
        axes = [lattice.cell_centers()] * config.spec.d
    else:
        field = i1_field(config.spec, t)
        i1 = field.values
        axes = [field.x_axis] * config.spec.d
    return t, axes, i1


def _run_kernel(config: ExperimentConfig):
    t, axes, i1 = _kernel_parts(config)
    zero = np.zeros_like(i1)
    if config.format == "csv":
        return [write_field_csv(config.output_path, config, t, axes, i1, zero)]
    return [
        write_json(config.output_path, config, {"rows": _rows_json(axes, i1, zero, t)})
    ]


def _run_simulate(config: ExperimentConfig):
    sample = simulate_field(config.spec, config.lattice, None, config.seed)
    axes = [config.lattice.cell_centers()] * config.spec.d
    t = config.lattice.t_final
    if config.format == "csv":
        return [
            write_field_csv(config.output_path, config, t, axes, sample.i1_part, sample.i2_part)
        ]
    return [
        write_json(
            config.output_path,
            config,
            {"seed": sample.seed, "rows": _rows_json(axes, sample.i1_part, sample.i2_part, t)},
        )
    ]


def _default_point(lattice: LatticeSpec):
    centers = lattice.cell_centers()
    c = float(centers[np.argmin(np.abs(centers))])
    return [c] * lattice.d


def _run_variance(config: ExperimentConfig):
    lattice = config.lattice
    point = config.resolved.get("point") or _default_point(lattice)
    est = estimate_moments(
        config.spec, lattice, None, point, config.n_samples, config.seed, config.workers
    )
    result = {
        "point": [float(p) for p in np.atleast_1d(point)],
        "estimate": est,
        "lattice_variance": lattice_point_variance(config.spec, lattice, point),
    }
    if config.spec.alpha == 1.0 and config.spec.d == 1:
        result["closed_form_j2"] = closed_form_j2_alpha1(config.spec, lattice.t_final)
    t = lattice.t_final
    eps = float(config.resolved["epsilon"])
    cut = config.resolved.get("spectral_cutoff")
    report = spectral_variance(config.spec, t, eps, float(cut) if cut else None)
    result["spectral"] = report
    return [write_json(config.output_path, config, result)]


def _run_mildness(config: ExperimentConfig):
    t = float(config.resolved["t"])
    verdict = classify(config.spec.alpha, config.spec.d)
    cut = config.resolved.get("spectral_cutoff")
    scan = divergence_scan(
        config.spec,
        t,
        [float(e) for e in config.resolved["epsilon_levels"]],
        float(cut) if cut else None,
    )
    result = {
        "status": verdict.status,
        "theorem_case": verdict.theorem_case,
        "exponent": verdict.exponent,
        "criterion_rhs": verdict.criterion_rhs,
        "scan": {
            "epsilons": list(scan.epsilons),
            "j2_values": list(scan.j2_values),
            "growth_exponent_fit": scan.growth_exponent_fit,
            "converged": scan.converged,
        },
    }
    return [write_json(config.output_path, config, result)]


def _run_example2(config: ExperimentConfig):
    stem, _ = os.path.splitext(config.output_path)
    written = []
    mcfg = dataclasses.replace(config, output_path=f"{stem}.mildness.json", format="json")
    written += _run_mildness(mcfg)
    fcfg = dataclasses.replace(config, output_path=f"{stem}.field.csv", format="csv")
    fcfg.resolved = dict(config.resolved, use_lattice_grid=True)
    written += _run_kernel(fcfg)
    vcfg = dataclasses.replace(config, output_path=f"{stem}.variance.json", format="json")
    written += _run_variance(vcfg)
    return written


def run_experiment(config: ExperimentConfig) -> list[str]:
    """Dispatch a validated configuration; returns the list of files written."""
    if config.command == "ml":
        return _run_ml(config)
    if config.command == "caputo":
        return _run_caputo(config)
    if config.command == "kernel":
        return _run_kernel(config)
    if config.command == "simulate":
        return _run_simulate(config)
    if config.command == "variance":
        return _run_variance(config)
    if config.command in ("mildness", "example1"):
        return _run_mildness(config)
    if config.command == "example2":
        return _run_example2(config)
    raise ConfigError(f"command: unknown command {config.command!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fracheat", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="path to the JSON experiment document")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output path (overrides config)")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args(argv)

    document = {}
    if args.config:
        try:
            with open(args.config) as fh:
                document = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"fracheat: config: {exc}", file=sys.stderr)
            return 2
    overrides = {
        "seed": args.seed,
        "output_path": args.out,
        "format": args.format,
        "workers": args.workers,
    }
    try:
        config = load_config(args.command, document, overrides)
        written = run_experiment(config)
    except ConfigError as exc:
        print(f"fracheat: invalid config: {exc}", file=sys.stderr)
        return 2
    except FracheatError as exc:
        print(f"fracheat: {args.command}: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
