"""Command line front end.

Exit codes: 0 success, 2 configuration problem, 3 calibration failure,
4 malformed data encountered while scoring.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import CalibrationError, ConfigError, DataError
from .runner import (
    OBSERVABLES,
    CALIBRATION_PARAMETERS,
    calibrate,
    emit_report,
    run_scenario,
    run_sweep,
    sweep_csv,
    sweep_rows,
)
from .scenario import SWEEP_AXES, config_hash, parse_scenario
from .scenarios import DESCRIPTIONS, bundled_names, bundled_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CALIBRATION = 3
EXIT_DATA = 4


def _load_config(ref: str) -> dict:
    if ref in bundled_names():
        return bundled_scenario(ref)
    try:
        with open(ref) as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise ConfigError(
            [f"--config: {ref!r} is neither a bundled scenario nor a readable file"]
        )
    except json.JSONDecodeError as exc:
        raise ConfigError([f"--config: {ref}: invalid JSON ({exc})"])


def _apply_overrides(raw: dict, args: argparse.Namespace) -> dict:
    run = raw.setdefault("run", {})
    if getattr(args, "mode", None):
        run["mode"] = args.mode
    if getattr(args, "seed", None) is not None:
        run["seed"] = args.seed
    if getattr(args, "duration", None) is not None:
        run["duration_s"] = args.duration
    return raw


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _cmd_run(args: argparse.Namespace) -> int:
    raw = _apply_overrides(_load_config(args.config), args)
    result = run_scenario(parse_scenario(raw))
    _write(emit_report(result, fmt=args.format), args.out)
    return EXIT_OK


def _parse_values(text: str) -> list[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise ConfigError([f"--values: could not parse {text!r} as comma separated numbers"])
    if not values:
        raise ConfigError(["--values: expected at least one number"])
    return [int(v) if float(v).is_integer() else v for v in values]


def _cmd_sweep(args: argparse.Namespace) -> int:
    raw = _apply_overrides(_load_config(args.config), args)
    scn = parse_scenario(raw)
    axis = args.axis or (scn.sweep or {}).get("axis")
    values = _parse_values(args.values) if args.values else (scn.sweep or {}).get("values")
    if axis is None or values is None:
        raise ConfigError(
            ["sweep: provide --axis and --values or a config with a sweep section"]
        )
    results = run_sweep(scn, axis=axis, values=values)
    if args.format == "json":
        text = json.dumps(sweep_rows(values, results), indent=2, sort_keys=True) + "\n"
    else:
        text = sweep_csv(values, results)
    _write(text, args.out)
    return EXIT_OK


def _cmd_calibrate(args: argparse.Namespace) -> int:
    raw = _load_config(args.config)
    result, fitted = calibrate(raw, args.param, args.observable, args.target)
    summary = {
        "parameter": result.parameter,
        "value": result.value,
        "residual": result.residual,
        "observable": result.observable,
        "target": result.target,
        "iterations": result.iterations,
    }
    sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if args.out:
        with open(args.out, "w") as handle:
            json.dump(fitted, handle, indent=2, sort_keys=True)
            handle.write("\n")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    raw = _load_config(args.config)
    scn = parse_scenario(raw)
    sys.stdout.write(f"ok {scn.name} {config_hash(raw)}\n")
    return EXIT_OK


def _cmd_scenarios(args: argparse.Namespace) -> int:
    for name in bundled_names():
        sys.stdout.write(f"{name:20s} {DESCRIPTIONS.get(name, '')}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ponqkd",
        description="Quantum/classical PON coexistence link simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="bundled scenario name or JSON path")
        p.add_argument("--mode", choices=("oracle", "monte_carlo"))
        p.add_argument("--seed", type=int)
        p.add_argument("--duration", type=float, help="Monte Carlo duration in seconds")
        p.add_argument("--out", help="write output here instead of stdout")

    p_run = sub.add_parser("run", help="evaluate one scenario")
    common(p_run)
    p_run.add_argument("--format", choices=("json", "csv"), default="json")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="evaluate a scenario along one axis")
    common(p_sweep)
    p_sweep.add_argument("--axis", choices=SWEEP_AXES)
    p_sweep.add_argument("--values", help="comma separated axis values")
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_cal = sub.add_parser("calibrate", help="fit one scalar parameter to an anchor")
    p_cal.add_argument("--config", required=True)
    p_cal.add_argument("--param", required=True, choices=sorted(CALIBRATION_PARAMETERS))
    p_cal.add_argument("--observable", required=True, choices=OBSERVABLES)
    p_cal.add_argument("--target", required=True, type=float)
    p_cal.add_argument("--out", help="write the calibrated config here")
    p_cal.set_defaults(func=_cmd_calibrate)

    p_val = sub.add_parser("validate", help="check a config and print its hash")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=_cmd_validate)

    p_ls = sub.add_parser("scenarios", help="list bundled scenarios")
    p_ls.set_defaults(func=_cmd_scenarios)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except CalibrationError as exc:
        sys.stderr.write(f"calibration error: {exc}\n")
        return EXIT_CALIBRATION
    except DataError as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
