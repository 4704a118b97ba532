"""Command-line front end.

Subcommands::

    dexpou simulate    write a simulated path CSV plus a JSON metadata sidecar
    dexpou estimate    calibrate a t,x CSV; emit estimates/covariance/intervals JSON
    dexpou experiment  convergence table over path lengths and seeds
    dexpou gcurve      export the root function g(p) for uniqueness inspection

Options may come from flags or from a JSON config file (``--config``); flags
override the file.  Exit codes: 0 success, 2 input/config error, 3 typed
estimation error (the error name and stage appear in the JSON output).
Outputs are byte-deterministic in (config, seed); no timestamps are emitted.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import confidence_intervals, covariance_estimate
from .errors import DiscriminantNonpositive, EstimationError
from .estimate import (
    FVector,
    compute_f,
    empirical_moments,
    estimate_all,
    estimate_theta,
    g_values,
    GRID_EPS,
)
from .model import ModelParams
from .pathio import fmt, read_path_csv, write_metadata, write_path_csv
from .simulate import SamplePath, simulate_path

__all__ = ["main"]

TABLE_N_VALUES = [50, 100, 200, 300, 400, 500, 600, 1000, 2000, 3000]

DEFAULTS = {
    "simulate": {
        "theta": 2.0, "p": 0.6, "eta": 1.2, "phi": 1.6, "lam": 1.0,
        "sigma": 1.0, "h": 0.02, "n": 3000, "x0": 0.0, "burn_in": None,
        "seed": 1, "replication": 0, "out": "path.csv",
    },
    "estimate": {
        "input": None, "level": 0.95, "bandwidth": None, "grid": 2001,
        "out": None,
    },
    "experiment": {
        "theta": 2.0, "p": 0.6, "eta": 1.2, "phi": 1.6, "h": 0.02,
        "x0": 0.0, "burn_in": None, "n_values": TABLE_N_VALUES,
        "seeds": 20, "seed": 1, "out": "experiment.csv",
    },
    "gcurve": {
        "input": None, "f1": None, "f2": None, "f3": None,
        "grid": 2001, "out": "gcurve.csv",
    },
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        options = _merge_options(args)
        return args.handler(options)
    except EstimationError as exc:
        print(f"error: {type(exc).__name__} (stage {exc.stage}): {exc}",
              file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dexpou",
        description="Simulation and moment calibration for the "
                    "double-exponential Ornstein-Uhlenbeck process.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a path to CSV")
    for name in ("theta", "p", "eta", "phi", "lam", "sigma", "h", "x0"):
        sim.add_argument(f"--{name}", type=float)
    sim.add_argument("--n", type=int)
    sim.add_argument("--burn-in", dest="burn_in", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--replication", type=int)
    _common(sim)
    sim.set_defaults(handler=cmd_simulate)

    est = sub.add_parser("estimate", help="calibrate a t,x CSV")
    est.add_argument("input", help="two-column t,x CSV with constant spacing")
    est.add_argument("--level", type=float)
    est.add_argument("--bandwidth", type=int)
    est.add_argument("--grid", type=int)
    _common(est)
    est.set_defaults(handler=cmd_estimate)

    exp = sub.add_parser("experiment", help="convergence table over (N, seed)")
    for name in ("theta", "p", "eta", "phi", "h", "x0"):
        exp.add_argument(f"--{name}", type=float)
    exp.add_argument("--burn-in", dest="burn_in", type=int)
    exp.add_argument("--n-values", dest="n_values",
                     help="comma-separated path lengths")
    exp.add_argument("--seeds", type=int, help="replications per length")
    exp.add_argument("--seed", type=int)
    _common(exp)
    exp.set_defaults(handler=cmd_experiment)

    gc = sub.add_parser("gcurve", help="export g(p) over a grid")
    gc.add_argument("--input", help="t,x CSV to compute f statistics from")
    gc.add_argument("--f1", type=float)
    gc.add_argument("--f2", type=float)
    gc.add_argument("--f3", type=float)
    gc.add_argument("--grid", type=int)
    _common(gc)
    gc.set_defaults(handler=cmd_gcurve)
    return parser


def _common(sub) -> None:
    sub.add_argument("--config", help="JSON file with option defaults")
    sub.add_argument("--out", help="output path")


def _merge_options(args: argparse.Namespace) -> dict:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    defaults = DEFAULTS[args.command]
    merged = dict(defaults)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError(f"config {args.config}: expected a JSON object")
        unknown = sorted(set(loaded) - set(defaults))
        if unknown:
            raise ValueError(
                f"config {args.config}: unknown option(s) {unknown} "
                f"for '{args.command}'"
            )
        merged.update(loaded)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if isinstance(merged.get("n_values"), str):
        merged["n_values"] = [int(s) for s in merged["n_values"].split(",")]
    merged["command"] = args.command
    return merged


def _provenance(options: dict) -> dict:
    return {
        "tool": "dexpou",
        "version": __version__,
        "command": options["command"],
        "options": {k: v for k, v in options.items() if k != "command"},
    }


def _jsonable(obj):
    """Recursively convert to JSON-safe values; non-finite floats become
    null (an unbounded interval endpoint serializes as null)."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def _write_json(payload: dict, out) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(options: dict) -> int:
    _require(options["n"] >= 2, f"n must be >= 2, got {options['n']}")
    _require(options["h"] > 0, f"h must be > 0, got {options['h']}")
    params = ModelParams(theta=options["theta"], eta=options["eta"],
                         phi=options["phi"], p=options["p"],
                         lam=options["lam"], sigma=options["sigma"])
    path = simulate_path(params, x0=options["x0"], h=options["h"],
                         n=options["n"], seed=options["seed"],
                         burn_in=options["burn_in"],
                         replication=options["replication"])
    out = options["out"]
    write_path_csv(path, out)
    write_metadata(path, out, params, extra={"provenance": _provenance(options)})
    print(out)
    return 0


def cmd_estimate(options: dict) -> int:
    _require(options["grid"] >= 3, f"grid must be >= 3, got {options['grid']}")
    _require(0 < options["level"] < 1,
             f"level must be in (0, 1), got {options['level']}")
    path = read_path_csv(options["input"])
    payload = {"provenance": _provenance(options)}
    try:
        result = estimate_all(path, grid_size=options["grid"])
        payload["estimates"] = result.estimates_dict()
        payload["diagnostics"] = {
            "root_bracket": list(result.root_bracket),
            "sign_change_count": result.sign_change_count,
            "g_prime_sign_constant": result.g_prime_sign_constant,
            "moments": {
                "mu1": result.moments.mu1, "mu2": result.moments.mu2,
                "mu3": result.moments.mu3, "mu4": result.moments.mu4,
                "n_used": result.moments.n_used, "h": result.moments.h,
            },
            "f": {"f1": result.f.f1, "f2": result.f.f2, "f3": result.f.f3},
        }
        cov = covariance_estimate(path, result, bandwidth=options["bandwidth"])
        payload["covariance"] = {
            "A": cov.A, "Sigma": cov.Sigma,
            "bandwidth": cov.bandwidth, "n": cov.n,
        }
        ci = confidence_intervals(result, cov, level=options["level"])
        payload["intervals"] = {
            "level": ci.level,
            **{name: list(lohi) for name, lohi in sorted(ci.intervals.items())},
        }
        payload["warnings"] = list(ci.warnings)
    except EstimationError as exc:
        payload["error"] = {
            "name": type(exc).__name__,
            "stage": exc.stage,
            "message": str(exc),
        }
        _write_json(payload, options["out"])
        return 3
    _write_json(payload, options["out"])
    return 0


def cmd_experiment(options: dict) -> int:
    n_values = sorted(set(int(n) for n in options["n_values"]))
    _require(len(n_values) > 0, "n_values must be non-empty")
    _require(min(n_values) >= 2, f"n_values must all be >= 2, got {min(n_values)}")
    _require(options["seeds"] >= 1, f"seeds must be >= 1, got {options['seeds']}")
    params = ModelParams(theta=options["theta"], eta=options["eta"],
                         phi=options["phi"], p=options["p"])
    params.require_unit_scale()
    n_max = max(n_values)
    # Replication j keeps one stream for every N: shorter rows are prefixes of
    # the same trajectory, a single growing observation window per seed.
    cells = {}
    for j in range(options["seeds"]):
        full = simulate_path(params, x0=options["x0"], h=options["h"],
                             n=n_max, seed=options["seed"],
                             burn_in=options["burn_in"], replication=j)
        for n in n_values:
            sub = SamplePath(h=full.h, values=full.values[:n], x0=full.x0,
                             seed=full.seed, replication=j,
                             burn_in=full.burn_in)
            try:
                r = estimate_all(sub)
                cells[(n, j)] = (r.p_hat, r.eta_hat, r.phi_hat, r.theta_hat, "")
            except EstimationError as exc:
                cells[(n, j)] = (None, None, None, None, type(exc).__name__)

    out = options["out"]
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["N", "seed", "p_hat", "eta_hat", "phi_hat",
                         "theta_hat", "error"])
        for n in n_values:
            block = []
            for j in range(options["seeds"]):
                p_h, eta_h, phi_h, th_h, err = cells[(n, j)]
                row = [n, j] + ["" if v is None else fmt(v)
                                for v in (p_h, eta_h, phi_h, th_h)] + [err]
                writer.writerow(row)
                if not err:
                    block.append((p_h, eta_h, phi_h, th_h))
            if block:
                arr = np.array(block)
                med = np.median(arr, axis=0)
                q25, q75 = np.percentile(arr, [25, 75], axis=0)
                writer.writerow([n, "median"] + [fmt(v) for v in med] + [""])
                writer.writerow([n, "iqr"] + [fmt(v) for v in q75 - q25] + [""])
            else:
                writer.writerow([n, "median", "", "", "", "", "all cells failed"])
    meta = Path(out).with_name(Path(out).stem + ".meta.json")
    meta.write_text(json.dumps(_jsonable({"provenance": _provenance(options)}),
                               indent=2, sort_keys=True) + "\n")
    print(out)
    return 0


def cmd_gcurve(options: dict) -> int:
    _require(options["grid"] >= 3, f"grid must be >= 3, got {options['grid']}")
    f_given = [options[k] is not None for k in ("f1", "f2", "f3")]
    if options["input"] is not None:
        path = read_path_csv(options["input"])
        moments = empirical_moments(path)
        f = compute_f(moments, estimate_theta(moments))
    elif all(f_given):
        f = FVector(f1=options["f1"], f2=options["f2"], f3=options["f3"],
                    theta_hat=float("nan"))
        if f.discriminant <= 0:
            raise DiscriminantNonpositive(
                f"f2 - f1^2 = {f.discriminant:.6e} <= 0"
            )
    else:
        raise ValueError("gcurve needs either --input or all of --f1/--f2/--f3")

    grid = np.linspace(GRID_EPS, 1.0 - GRID_EPS, options["grid"])
    gv = g_values(grid, f)
    gprime = np.gradient(gv, grid)
    signs = np.sign(gv)
    count = int(np.sum(signs[:-1] * signs[1:] < 0) + np.sum(signs == 0))

    with open(options["out"], "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["p", "g", "g_prime"])
        for p, g, gp in zip(grid, gv, gprime):
            writer.writerow([fmt(p), fmt(g), fmt(gp)])
    print(f"sign_change_count={count}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
