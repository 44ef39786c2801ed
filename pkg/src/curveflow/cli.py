"""Command-line entry point: run, sweep, and verify subcommands.

Outputs per run directory:

* ``diagnostics.csv``: one row per time step with the summary scalars.
* ``snapshots/NNNN.json``: embedded-curve exports (with --emit-snapshots).
* ``verdict.json``: per-claim pass/fail entries and fitted decay data.

Everything is deterministic: the same configuration produces
byte-identical files.  There is no randomness anywhere.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsLog, GeometricSummary, build_verdict
from .engine import run
from .errors import ConfigError, FlowError
from .geometry import scaled_to_area
from .state import (
    DERIV_METHODS,
    SCHEMES,
    CurveState,
    FlowParams,
    GeometricBounds,
    from_raw,
    make_circle,
    make_ellipse,
    make_fourier,
)

CSV_COLUMNS = (
    "t", "L", "A", "lambda", "iso_diff", "iso_ratio",
    "rho_min", "rho_max", "closure_norm", "phi_max", "grad_phi_max", "flux",
)

OUTPUT_DIR_ENV = "CURVEFLOW_OUTPUT_DIR"

_PARAM_DEFAULTS = {
    "n": None,
    "grid_size": 128,
    "scheme": "explicit-rk4",
    "cfl_factor": 0.5,
    "t_end": 10.0,
    "snapshot_interval": 0.5,
    "closure_tol": 1e-8,
    "positivity_floor": 1e-8,
    "project_closure": False,
    "renormalize_area": False,
    "deriv_method": "spectral",
}

_CONFIG_KEYS = set(_PARAM_DEFAULTS) | {"initial", "output_dir", "emit_snapshots", "initial_area"}


@dataclass(frozen=True)
class RunConfig:
    """Fully validated configuration of one run."""

    params: FlowParams
    initial_spec: str
    initial_state: CurveState
    output_dir: Path
    emit_snapshots: bool
    initial_area: float | None


def _default_output_dir() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, "runs")


def build_initial(spec: str, grid_size: int) -> CurveState:
    """Build the initial curve from its CLI tag.

    Grammar: ``circle:R``, ``ellipse:A:B``, ``import:PATH``, or
    ``fourier:A0:AMP@K[:AMP@K...]`` where a trailing ``s`` on ``K`` marks
    a sine term (for example ``fourier:1:0.3@2:0.1@3s``).
    """
    kind, _, rest = spec.partition(":")
    try:
        if kind == "circle":
            return make_circle(float(rest), grid_size)
        if kind == "ellipse":
            a, b = rest.split(":")
            return make_ellipse(float(a), float(b), grid_size)
        if kind == "import":
            return from_raw(rest)
        if kind == "fourier":
            parts = rest.split(":")
            a0 = float(parts[0])
            coeffs = []
            for item in parts[1:]:
                amp_text, _, mode_text = item.partition("@")
                if not mode_text:
                    raise ValueError(f"coefficient '{item}' is not of the form AMP@K")
                amp = float(amp_text)
                if mode_text.endswith("s"):
                    coeffs.append((int(mode_text[:-1]), 0.0, amp))
                else:
                    coeffs.append((int(mode_text), amp, 0.0))
            return make_fourier(a0, coeffs, grid_size)
    except ConfigError:
        raise
    except (FlowError, ValueError, OSError) as exc:
        raise ConfigError("initial", str(exc)) from exc
    raise ConfigError("initial", f"unknown initial kind '{kind}'")


def _resample_initial(state: CurveState, m: int) -> CurveState:
    """Re-evaluate a constructor-built state on the configured grid."""
    if state.grid_size == m:
        return state
    from . import spectral

    if m < state.grid_size:
        # Downsampling loses modes; rebuild instead of truncating silently.
        raise ConfigError("grid_size", f"grid {m} is coarser than the imported profile")
    return CurveState(spectral.resample(state.rho, m), state.t)


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with configuration values (flags override)")
    parser.add_argument("--initial", help="initial curve, e.g. circle:1 or fourier:1:0.3@2")
    parser.add_argument("--n", type=float, help="curvature exponent (> 0)")
    parser.add_argument("--grid-size", type=int, dest="grid_size")
    parser.add_argument("--scheme", choices=SCHEMES)
    parser.add_argument("--cfl", type=float, dest="cfl_factor")
    parser.add_argument("--t-end", type=float, dest="t_end")
    parser.add_argument("--snapshot-interval", type=float, dest="snapshot_interval")
    parser.add_argument("--closure-tol", type=float, dest="closure_tol")
    parser.add_argument("--positivity-floor", type=float, dest="positivity_floor")
    parser.add_argument("--deriv", choices=DERIV_METHODS, dest="deriv_method")
    parser.add_argument("--project-closure", action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--renormalize-area", action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--initial-area", type=float, dest="initial_area",
                        help="rescale the initial curve to enclose this area")
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--emit-snapshots", action=argparse.BooleanOptionalAction, default=None)


def parse_config(argv) -> RunConfig:
    """Parse ``run`` arguments (and optional config file) into a RunConfig.

    File values override defaults, command-line flags override the file.

    Raises
    ------
    ConfigError
        For unknown keys, bad types, or constraint violations; the
        offending key is named.
    """
    parser = argparse.ArgumentParser(prog="curveflow run", add_help=False)
    _add_run_arguments(parser)
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:  # argparse reports its own message
        raise ConfigError("args", "could not parse arguments") from exc

    merged: dict = dict(_PARAM_DEFAULTS)
    merged.update(
        {"initial": None, "output_dir": _default_output_dir(),
         "emit_snapshots": False, "initial_area": None}
    )
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from exc
        for key, value in file_values.items():
            if key not in _CONFIG_KEYS:
                raise ConfigError(key, "unknown configuration key")
            merged[key] = value
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value

    return _config_from_mapping(merged)


def _config_from_mapping(merged: dict) -> RunConfig:
    if merged["n"] is None:
        raise ConfigError("n", "required (curvature exponent > 0)")
    if merged["initial"] is None:
        raise ConfigError("initial", "required (e.g. circle:1)")

    params_kwargs = {}
    for key, default in _PARAM_DEFAULTS.items():
        value = merged[key]
        try:
            if key in ("project_closure", "renormalize_area"):
                if not isinstance(value, bool):
                    raise ValueError("expected true/false")
                params_kwargs[key] = value
            elif key == "grid_size":
                params_kwargs[key] = int(value)
            elif key in ("scheme", "deriv_method"):
                params_kwargs[key] = str(value)
            else:
                params_kwargs[key] = float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(key, f"bad value {value!r}: {exc}") from exc

    # Validate each constraint under its own key for precise reporting.
    checks = {
        "n": params_kwargs["n"] > 0,
        "grid_size": params_kwargs["grid_size"] >= 16 and params_kwargs["grid_size"] % 2 == 0,
        "cfl_factor": 0 < params_kwargs["cfl_factor"] <= 1,
        "t_end": params_kwargs["t_end"] > 0,
        "snapshot_interval": params_kwargs["snapshot_interval"] > 0,
        "closure_tol": params_kwargs["closure_tol"] > 0,
        "positivity_floor": params_kwargs["positivity_floor"] > 0,
        "scheme": params_kwargs["scheme"] in SCHEMES,
        "deriv_method": params_kwargs["deriv_method"] in DERIV_METHODS,
    }
    for key, ok in checks.items():
        if not ok:
            raise ConfigError(key, f"constraint violated by value {params_kwargs[key]!r}")
    params = FlowParams(**params_kwargs)

    state = build_initial(str(merged["initial"]), params.grid_size)
    state = _resample_initial(state, params.grid_size)
    initial_area = merged["initial_area"]
    if initial_area is not None:
        initial_area = float(initial_area)
        if initial_area <= 0:
            raise ConfigError("initial_area", "must be positive")
        state = scaled_to_area(state, initial_area)

    return RunConfig(
        params=params,
        initial_spec=str(merged["initial"]),
        initial_state=state,
        output_dir=Path(merged["output_dir"]),
        emit_snapshots=bool(merged["emit_snapshots"]),
        initial_area=initial_area,
    )


def _format_row(summary: GeometricSummary) -> list[str]:
    values = (
        summary.t, summary.L, summary.A, summary.lam, summary.iso_diff,
        summary.iso_ratio, summary.rho_min, summary.rho_max,
        summary.closure_norm, summary.phi_max, summary.grad_phi_max, summary.flux,
    )
    return [f"{v:.17g}" for v in values]


def execute(config: RunConfig, quiet: bool = False) -> int:
    """Run one simulation, write outputs, and report claim outcomes.

    Returns 0 only when the run completed and every monitored claim holds.
    """
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    snap_dir = out / "snapshots"
    if config.emit_snapshots:
        snap_dir.mkdir(exist_ok=True)

    def on_snapshot(index, curve):
        path = snap_dir / f"{index:04d}.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(curve.to_export_dict(), fh, sort_keys=True)
            fh.write("\n")

    with open(out / "diagnostics.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        log = run(
            config.initial_state,
            config.params,
            on_summary=lambda s: writer.writerow(_format_row(s)),
            on_snapshot=on_snapshot if config.emit_snapshots else None,
        )

    verdict = build_verdict(log)
    payload = verdict.to_dict()
    payload["config"] = {
        "initial": config.initial_spec,
        "initial_area": config.initial_area,
        "n": config.params.n,
        "grid_size": config.params.grid_size,
        "scheme": config.params.scheme,
        "cfl_factor": config.params.cfl_factor,
        "t_end": config.params.t_end,
        "deriv_method": config.params.deriv_method,
    }
    with open(out / "verdict.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if not quiet:
        for claim in verdict.claims:
            status = "PASS" if claim.holds else "FAIL"
            extra = f" ({claim.note})" if claim.note else ""
            print(f"CLAIM {claim.claim_id}: {status}{extra}")
        for warning in verdict.warnings:
            print(f"WARNING: {warning}")
        if verdict.error:
            print(f"ERROR: {verdict.error}")
    return 0 if verdict.all_passed else 1


def _sweep_worker(item: tuple[str, RunConfig]) -> tuple[str, int]:
    label, config = item
    return label, execute(config, quiet=True)


def cmd_sweep(argv) -> int:
    parser = argparse.ArgumentParser(prog="curveflow sweep", add_help=True)
    parser.add_argument("--n-values", required=True, help="comma-separated exponents")
    parser.add_argument("--amplitudes", required=True, help="comma-separated mode amplitudes")
    parser.add_argument("--mode", type=int, default=2, help="perturbed Fourier mode (k >= 2)")
    parser.add_argument("--a0", type=float, default=1.0)
    parser.add_argument("--grid-size", type=int, default=_PARAM_DEFAULTS["grid_size"])
    parser.add_argument("--t-end", type=float, default=_PARAM_DEFAULTS["t_end"])
    parser.add_argument("--cfl", type=float, default=_PARAM_DEFAULTS["cfl_factor"])
    parser.add_argument("--scheme", choices=SCHEMES, default=_PARAM_DEFAULTS["scheme"])
    parser.add_argument("--deriv", choices=DERIV_METHODS, default=_PARAM_DEFAULTS["deriv_method"])
    parser.add_argument("--snapshot-interval", type=float, default=_PARAM_DEFAULTS["snapshot_interval"])
    parser.add_argument("--initial-area", type=float, default=None)
    parser.add_argument("--output-dir", default=_default_output_dir())
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args(list(argv))

    items: list[tuple[str, RunConfig]] = []
    for n_text in args.n_values.split(","):
        for amp_text in args.amplitudes.split(","):
            label = f"n{float(n_text):g}_amp{float(amp_text):g}"
            merged = dict(_PARAM_DEFAULTS)
            merged.update(
                n=float(n_text),
                grid_size=args.grid_size,
                t_end=args.t_end,
                cfl_factor=args.cfl,
                scheme=args.scheme,
                deriv_method=args.deriv,
                snapshot_interval=args.snapshot_interval,
                initial=f"fourier:{args.a0:g}:{float(amp_text):g}@{args.mode}",
                output_dir=str(Path(args.output_dir) / label),
                emit_snapshots=False,
                initial_area=args.initial_area,
            )
            items.append((label, _config_from_mapping(merged)))

    results: dict[str, int] = {}
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for label, code in pool.map(_sweep_worker, items):
                results[label] = code
    else:
        for item in items:
            label, code = _sweep_worker(item)
            results[label] = code

    for label in sorted(results):
        print(f"RUN {label}: {'PASS' if results[label] == 0 else 'FAIL'}")
    return max(results.values(), default=0)


def _read_diagnostics_csv(path: Path) -> list[GeometricSummary]:
    summaries = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ConfigError("csv", f"missing columns: {sorted(missing)}")
        for row in reader:
            summaries.append(
                GeometricSummary(
                    t=float(row["t"]),
                    L=float(row["L"]),
                    A=float(row["A"]),
                    lam=float(row["lambda"]),
                    rho_min=float(row["rho_min"]),
                    rho_max=float(row["rho_max"]),
                    iso_diff=float(row["iso_diff"]),
                    iso_ratio=float(row["iso_ratio"]),
                    closure_norm=float(row["closure_norm"]),
                    phi_max=float(row["phi_max"]),
                    grad_phi_max=float(row["grad_phi_max"]),
                    flux=float(row["flux"]),
                )
            )
    if not summaries:
        raise ConfigError("csv", "no data rows")
    return summaries


def cmd_verify(argv) -> int:
    parser = argparse.ArgumentParser(prog="curveflow verify", add_help=True)
    parser.add_argument("--csv", required=True, help="existing diagnostics.csv")
    parser.add_argument("--n", type=float, required=True, help="exponent used for the run")
    parser.add_argument("--output", default=None, help="where to write the recomputed verdict")
    args = parser.parse_args(list(argv))

    csv_path = Path(args.csv)
    summaries = _read_diagnostics_csv(csv_path)
    first = summaries[0]
    bounds = GeometricBounds.from_scalars(first.A, first.L, first.lam, args.n)
    log = DiagnosticsLog(n=args.n, bounds=bounds, summaries=summaries)
    verdict = build_verdict(log)

    output = Path(args.output) if args.output else csv_path.parent / "verdict.rechecked.json"
    with open(output, "w", encoding="utf-8") as fh:
        json.dump(verdict.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for claim in verdict.claims:
        status = "PASS" if claim.holds else "FAIL"
        extra = f" ({claim.note})" if claim.note else ""
        print(f"CLAIM {claim.claim_id}: {status}{extra}")
    return 0 if verdict.all_passed else 1


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = argparse.ArgumentParser(
        prog="curveflow",
        description="Area-preserving inverse-curvature flow simulator and claim checker",
    )
    sub = parser.add_subparsers(dest="command")
    run_parser = sub.add_parser("run", help="run one simulation")
    _add_run_arguments(run_parser)
    sub.add_parser("sweep", help="run a cartesian sweep over n and amplitudes", add_help=False)
    sub.add_parser("verify", help="re-check claims from an existing diagnostics.csv", add_help=False)

    if not argv:
        parser.print_help()
        return 2
    command, rest = argv[0], argv[1:]
    try:
        if command == "run":
            return execute(parse_config(rest))
        if command == "sweep":
            return cmd_sweep(rest)
        if command == "verify":
            return cmd_verify(rest)
        parser.print_help()
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
