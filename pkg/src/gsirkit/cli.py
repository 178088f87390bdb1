"""Command-line entry point: verify, simulate, fit, diagnose.

Exit codes: 0 success, 1 usage/config/data error, 2 failed verdict or statement check.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import dataclasses
import sys
from pathlib import Path

from . import __version__
from .diagnostics import DiagnosticsConfig, unbiasedness_report
from .errors import AssumptionViolation, GsirError, InvalidInput, OracleInconsistency
from .files import atomic_write, read_csv_matrix, read_dataset, read_json, write_json
from .gsir import DEFAULT_ETA, DEFAULT_JITTER, GsirModel, KernelSpec, evaluate_predictors, gsir_fit
from .selection import cv_select_eta
from .suite import STATEMENTS, run_suite
from .synth import ScenarioSpec, dataset_to_csv, gen_continuous, matrix_to_csv

SCHEMA = "gsirkit-report/1"
EXIT_OK, EXIT_CONFIG, EXIT_VERDICT = 0, 1, 2

DEFAULTS = {
    "verify": {"seed": 42, "instances": 500, "statements": None, "out": "out"},
    "simulate": {
        "seed": 0,
        "out": "out",
        "scenario": {"name": "exp", "n": 500, "p": 5, "link": "exp", "noise_sd": 0.2},
        "kernel_x": {"family": "gaussian", "bandwidth": None},
        "kernel_y": {"family": "gaussian", "bandwidth": None},
        "eta_x": DEFAULT_ETA,
        "eta_y": DEFAULT_ETA,
        "d": None,
        "jitter": DEFAULT_JITTER,
        "thresholds": {},
    },
    "fit": {
        "seed": 0,
        "out": "out",
        "data": None,
        "x_columns": None,
        "y_columns": None,
        "kernel_x": {"family": "gaussian", "bandwidth": None},
        "kernel_y": {"family": "gaussian", "bandwidth": None},
        "eta_x": DEFAULT_ETA,
        "eta_y": DEFAULT_ETA,
        "eta_grid": None,
        "d": 1,
        "jitter": DEFAULT_JITTER,
    },
    "diagnose": {
        "seed": 0,
        "out": "out",
        "model": None,
        "data": None,
        "truth": None,
        "x_columns": None,
        "y_columns": None,
        "thresholds": {},
    },
}


class ConfigError(InvalidInput):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _parse_threshold(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"threshold value must be a number: {value!r}") from None


def _u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with command parameters")
    common.add_argument("--seed", type=_u64)
    common.add_argument("--out", help="output directory")
    common.add_argument("--threshold", action="append", type=_parse_threshold, default=[], metavar="NAME=VALUE")

    p = _Parser(prog="gsirkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"gsirkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", parents=[common], help="randomized checks of the finite-space theory")
    v.add_argument("--instances", type=int)
    v.add_argument("--statements", help="comma-separated subset of: " + ", ".join(STATEMENTS))
    v.add_argument("--corrupt-constant-mean", action="store_true", help=argparse.SUPPRESS)

    s = sub.add_parser("simulate", parents=[common], help="generate a scenario, fit, and diagnose")
    s.add_argument("--link")
    s.add_argument("--n", type=int)
    s.add_argument("--p", type=int)
    s.add_argument("--noise-sd", type=float)
    s.add_argument("--d", type=int)
    s.add_argument("--eta", type=float, help="ridge parameter for both X and Y")

    f = sub.add_parser("fit", parents=[common], help="fit a model to a CSV dataset")
    f.add_argument("--data")
    f.add_argument("--d", type=int)
    f.add_argument("--eta", type=float, help="ridge parameter for both X and Y")
    f.add_argument("--eta-grid", type=_float_list, help="comma-separated grid selected by 5-fold CV")

    g = sub.add_parser("diagnose", parents=[common], help="score a fitted model against a known reduction")
    g.add_argument("--model")
    g.add_argument("--data")
    g.add_argument("--truth")
    return p


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    cfg = _merge(DEFAULTS[command], read_json(args.config) if args.config else {}, command)
    for key in ("seed", "out", "instances", "data", "d", "eta_grid", "model", "truth"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "statements", None):
        cfg["statements"] = [s.strip() for s in args.statements.split(",") if s.strip()]
    if getattr(args, "eta", None) is not None:
        cfg["eta_x"] = cfg["eta_y"] = args.eta
    if command == "simulate":
        for key, attr in (("link", "link"), ("n", "n"), ("p", "p"), ("noise_sd", "noise_sd")):
            if getattr(args, attr) is not None:
                cfg["scenario"][key] = getattr(args, attr)
    if args.threshold:
        if "thresholds" not in cfg:
            raise ConfigError(f"{command} takes no thresholds")
        for name, value in args.threshold:
            cfg["thresholds"][name] = value
    return cfg


def _merge(defaults: dict, user: dict, command: str) -> dict:
    if not isinstance(user, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = sorted(set(user) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown {command} config keys: {unknown}")
    out = {}
    for key, dv in defaults.items():
        uv = user.get(key, dv)
        if isinstance(dv, dict) and isinstance(uv, dict):
            merged = dict(dv)
            merged.update(uv)
            out[key] = merged
        else:
            out[key] = uv
    return out


def _envelope(command: str, cfg: dict, payload: dict) -> dict:
    out = {
        "schema": SCHEMA,
        "command": command,
        "version": __version__,
        "config": cfg,
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    out.update(payload)
    return out


def _kernel(obj) -> KernelSpec:
    if not isinstance(obj, dict):
        raise ConfigError("kernel specs must be JSON objects")
    return KernelSpec.from_json(obj)


def _diag_config(cfg: dict) -> DiagnosticsConfig:
    allowed = {"ratio_threshold", "alignment_threshold", "null_threshold", "slices", "knn_k"}
    unknown = sorted(set(cfg["thresholds"]) - allowed)
    if unknown:
        raise ConfigError(f"unknown thresholds {unknown}; expected some of {sorted(allowed)}")
    t = dict(cfg["thresholds"])
    for key in ("slices", "knn_k"):
        if key in t:
            t[key] = int(t[key])
    return DiagnosticsConfig.from_json(t)


def cmd_verify(cfg: dict) -> int:
    unknown = [s for s in cfg["statements"] or [] if s not in STATEMENTS]
    if unknown:
        raise ConfigError(f"unknown statements {unknown}")
    if not isinstance(cfg["instances"], int) or cfg["instances"] < 1:
        raise ConfigError("instances must be a positive integer")
    result = run_suite(cfg["seed"], cfg["instances"], cfg["statements"], cfg.get("corrupt_constant_mean", False))
    elapsed = result.pop("elapsed_seconds")
    report = _envelope("verify", cfg, result)
    out = Path(cfg["out"])
    write_json(out / "verify_report.json", report)
    for s in result["statements"]:
        line = f"{s['statement']:<28} pass={s['passed']:<4} fail={s['failed']:<4} n/a={s['not_applicable']:<4} worst={s['worst_residual']:.2e}"
        if s["failures"]:
            line += f" reproducer={s['failures'][0]['reproducer']}"
        print(line)
    print(f"verify: {'ok' if result['ok'] else 'FAILED'} in {elapsed:.1f}s -> {out / 'verify_report.json'}")
    return EXIT_OK if result["ok"] else EXIT_VERDICT


def _eigen_csv(model: GsirModel) -> str:
    lines = ["index,eigenvalue,canonical"]
    for i, (lam, rho) in enumerate(zip(model.eigenvalues, model.canonical), start=1):
        lines.append(f"{i},{float(lam)!r},{float(rho)!r}")
    return "\n".join(lines) + "\n"


def cmd_simulate(cfg: dict) -> int:
    scen = dict(cfg["scenario"])
    scen["seed"] = cfg["seed"]
    spec = ScenarioSpec.from_json(scen)
    dcfg = _diag_config(cfg)
    sc = gen_continuous(spec)
    d = cfg["d"] if cfg["d"] is not None else sc.r
    model = gsir_fit(sc.data, _kernel(cfg["kernel_x"]), _kernel(cfg["kernel_y"]), cfg["eta_x"], cfg["eta_y"], d, cfg["jitter"])
    rep = unbiasedness_report(model, sc.data, sc.true_reduction, dcfg)
    out = Path(cfg["out"])
    atomic_write(out / "dataset.csv", dataset_to_csv(sc.data))
    atomic_write(out / "truth.csv", matrix_to_csv(sc.true_reduction, "t"))
    write_json(out / "scenario.json", spec.to_json())
    write_json(out / "model.json", model.to_json())
    write_json(out / "diagnostics.json", _envelope("simulate", cfg, {"passed": rep.passed, "diagnostics": rep.to_json()}))
    atomic_write(out / "eigenvalues.csv", _eigen_csv(model))
    atomic_write(out / "slices.csv", rep.slices_csv())
    _print_diag(rep)
    return EXIT_OK if rep.passed else EXIT_VERDICT


def _print_diag(rep) -> None:
    print("eigenvalues:", " ".join(f"{v:.4g}" for v in rep.spectrum))
    print("eps_ratios: ", " ".join(f"{v:.4f}" for v in rep.eps_ratios))
    print("alignment:  ", " ".join(f"{v:.4f}" for v in rep.alignment))
    print("verdicts:   ", ", ".join(f"{k}={v}" for k, v in rep.verdicts.items()))
    for note in rep.notes:
        print("note:", note)


def cmd_fit(cfg: dict) -> int:
    if not cfg["data"]:
        raise ConfigError("fit needs --data")
    data = read_dataset(cfg["data"], cfg["x_columns"], cfg["y_columns"])
    kx = _kernel(cfg["kernel_x"]).resolved(data.X)
    ky = _kernel(cfg["kernel_y"]).resolved(data.Y)
    d = cfg["d"]
    if not isinstance(d, int):
        raise ConfigError("d must be an integer")
    extra = {}
    eta_x, eta_y = cfg["eta_x"], cfg["eta_y"]
    if cfg["eta_grid"]:
        cv = cv_select_eta(data, cfg["eta_grid"], kx, ky, d, cfg["seed"], cfg["jitter"])
        eta_x = eta_y = cv.selected
        extra["cv"] = cv.to_json()
    model = gsir_fit(data, kx, ky, eta_x, eta_y, d, cfg["jitter"])
    if extra:
        model = dataclasses.replace(model, extra=extra)
    out = Path(cfg["out"])
    write_json(out / "model.json", model.to_json())
    atomic_write(out / "predictors.csv", matrix_to_csv(evaluate_predictors(model, data.X), "f"))
    print("eigenvalues:", " ".join(f"{v:.4g}" for v in model.eigenvalues))
    if extra:
        print(f"selected eta: {eta_x:g}")
    return EXIT_OK


def cmd_diagnose(cfg: dict) -> int:
    for key in ("model", "data", "truth"):
        if not cfg[key]:
            raise ConfigError(f"diagnose needs --{key}")
    model = GsirModel.from_json(read_json(cfg["model"]))
    data = read_dataset(cfg["data"], cfg["x_columns"], cfg["y_columns"])
    _, truth = read_csv_matrix(cfg["truth"])
    if truth.shape[0] != data.n:
        raise ConfigError(f"truth has {truth.shape[0]} rows but data has {data.n}")
    rep = unbiasedness_report(model, data, truth, _diag_config(cfg))
    out = Path(cfg["out"])
    write_json(out / "diagnostics.json", _envelope("diagnose", cfg, {"passed": rep.passed, "diagnostics": rep.to_json()}))
    atomic_write(out / "slices.csv", rep.slices_csv())
    _print_diag(rep)
    return EXIT_OK if rep.passed else EXIT_VERDICT


COMMANDS = {"verify": cmd_verify, "simulate": cmd_simulate, "fit": cmd_fit, "diagnose": cmd_diagnose}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args.command, args)
        if getattr(args, "corrupt_constant_mean", False):
            cfg["corrupt_constant_mean"] = True
        return COMMANDS[args.command](cfg)
    except (AssumptionViolation, OracleInconsistency) as exc:
        print(f"gsirkit: {exc}", file=sys.stderr)
        return EXIT_VERDICT
    except (GsirError, ValueError, ArithmeticError, OSError, KeyError, TypeError) as exc:
        print(f"gsirkit: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
