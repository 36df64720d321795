"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import detengine as de
from .equilibrium import IntervalUnion, Kind, get_ensemble, report_for
from .errors import ConfigError, DomainError, NumericalError, PrecisionError, SizeError, UnsupportedDegeneracyError
from .harness import ExperimentConfig, csv_text, run_experiment, write_result

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

OUTPUT_ENV = "BULKGAPS_OUTPUT_DIR"
DEFAULT_OUTPUT = "bulkgaps-out"

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

CONFIG_SCHEMA = {
    "experiment": {
        "ensemble": str, "n": int, "replicas": int, "interval": str, "k_list": list,
        "x_list": list, "seed": int, "workers": int, "output_dir": str, "emit_cdf": bool,
    },
    "detengine": {"order": int},
}


class UsageError(Exception):
    pass


def load_config(path) -> dict:
    """Read a TOML config and validate it against CONFIG_SCHEMA."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for section, body in data.items():
        if section not in CONFIG_SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in body.items():
            if key not in CONFIG_SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            want = CONFIG_SCHEMA[section][key]
            if want is int and isinstance(value, bool) or not isinstance(value, want):
                raise ConfigError(f"{section}.{key} must be of type {want.__name__}")
    return data


def _emit(args, payload, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True, default=_json_default))
    else:
        print(text)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj).__name__)


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


# ---------------------------------------------------------------------------
# constants


def cmd_constants(args) -> int:
    spec = get_ensemble(Kind.parse(args.ensemble))
    report = report_for(spec, IntervalUnion.parse(args.interval))
    payload = {"ensemble": spec.kind.value, "interval": args.interval, **report.as_dict()}
    d_text = ", ".join(f"{u:.12g}: {v:.12g}" for u, v in report.d.items())
    rows = [
        ("rho_I", f"{report.rho_I:.15g}"),
        ("q", str(report.q)),
        ("A", "{" + ", ".join(f"{u:.12g}" for u in report.A) + "}"),
        ("B", "{" + ", ".join(f"{u:.12g}" for u in report.B) + "}"),
        ("d_u", "{" + d_text + "}"),
        ("M(I)", f"{report.M_I:.15g}"),
        ("S(I)", f"{report.S_I:.15g}"),
        ("c_VI", f"{report.c_VI:.15g}"),
    ]
    _emit(args, payload, "\n".join(f"{k:<6} {v}" for k, v in rows))
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def _experiment_settings(args) -> tuple[dict, bool]:
    settings = {}
    if args.config:
        settings.update(load_config(args.config).get("experiment", {}))
    overrides = {
        "ensemble": args.ensemble, "n": args.n, "replicas": args.replicas,
        "interval": args.interval, "seed": args.seed, "workers": args.workers,
        "output_dir": args.output,
        "k_list": _int_list(args.k) if args.k else None,
        "x_list": _float_list(args.x) if args.x else None,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    emit_cdf = bool(settings.pop("emit_cdf", False)) or args.emit_cdf
    return settings, emit_cdf


def cmd_simulate(args) -> int:
    settings, emit_cdf = _experiment_settings(args)
    for key in ("ensemble", "n", "replicas", "interval"):
        if key not in settings:
            raise ConfigError(f"missing setting {key!r} (flag or [experiment] key)")
    out = settings.pop("output_dir", None) or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT
    try:
        interval = IntervalUnion.parse(settings.pop("interval"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    config = ExperimentConfig(interval=interval, output_dir=out, **settings)
    result = run_experiment(config)
    files = write_result(result, out, emit_cdf=emit_cdf)
    payload = {**result.summary(), "files": [str(f) for f in files],
               "wall_time": result.metadata["wall_time"]}
    lines = [f"{config.ensemble.value} n={config.n} replicas={config.replicas} I={config.interval} "
             f"c_VI={result.report.c_VI:.12g}"]
    for k in config.k_list:
        lines.append(f"k={k}  KS={result.ks[k]:.6f}  missing={result.missing[k]}")
    for x, m, v, t in zip(config.x_list, result.mean_counts, result.var_counts, result.theory_means):
        lines.append(f"x={x:+.3f}  mean={m:.5f}  var={v:.5f}  theory={t:.5f}")
    lines.append(f"wrote {len(files)} files to {out}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    from .suites import as_records, run_suite

    checks = run_suite(args.suite)
    ok = all(c.passed for c in checks)
    _emit(args, {"suite": args.suite, "passed": ok, "checks": as_records(checks)},
          "\n".join([c.line() for c in checks] + [f"suite {args.suite}: {'PASS' if ok else 'FAIL'}"]))
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# gap-prob


def _sweep_values(text: str) -> np.ndarray:
    lo, hi, count = text.split(":")
    return np.linspace(float(lo), float(hi), int(count))


def cmd_gap_prob(args) -> int:
    order = args.order
    if args.engine == "toeplitz":
        _require(args, "n", "alpha")

        def value(a):
            return de.toeplitz_gap_cue(args.n, a)

        def asym(a):
            return math.exp(de.dikz_log_gap(args.n, a)) if 0 < a < math.pi else float("nan")

        param, base = "alpha", args.alpha
    elif args.engine == "sine":
        _require(args, "r")

        def value(r):
            return de.sine_gap_fredholm(r, order)

        def asym(r):
            return math.exp(de.sine_gap_asymptotic(r)) if r > 0 else float("nan")

        param, base = "r", args.r
    else:
        _require(args, "ensemble", "n", "x", "delta")
        spec = get_ensemble(Kind.parse(args.ensemble))

        def value(d):
            return de.finite_n_gap(spec, args.n, args.x, d, order)

        def asym(d):
            # CUE comparison value at the matching scaled length
            scaled = d * float(spec.density_fn(args.x))
            return de.toeplitz_gap_cue(args.n, math.pi * scaled) if d > 0 else 1.0

        param, base = "delta", args.delta

    if args.sweep:
        rows = []
        for p in _sweep_values(args.sweep):
            v, s = value(p), asym(p)
            rows.append((p, v, s, v - s))
        text = csv_text([param, "value", "asymptotic", "difference"], rows)
        if args.json:
            print(json.dumps({"engine": args.engine, "rows": [list(r) for r in rows]}, indent=2))
        else:
            sys.stdout.write(text)
        return EXIT_OK
    v = value(base)
    _emit(args, {"engine": args.engine, param: base, "value": v}, f"{v:.17g}")
    return EXIT_OK


def _require(args, *names):
    # the last name is the swept parameter, which --sweep supplies
    if args.sweep:
        names = names[:-1]
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"gap-prob {args.engine} needs --{' --'.join(missing)}")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bulkgaps", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    c = sub.add_parser("constants", parents=[common], help="minimizers and limit-law constants")
    c.add_argument("--ensemble", required=True, choices=["gue", "lue", "jue", "GUE", "LUE", "JUE"])
    c.add_argument("--interval", required=True, help="lo:hi[,lo:hi...]")
    c.set_defaults(func=cmd_constants)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo experiment")
    s.add_argument("--config", help="TOML file with an [experiment] table")
    s.add_argument("--ensemble")
    s.add_argument("--n", type=int)
    s.add_argument("--replicas", type=int)
    s.add_argument("--interval")
    s.add_argument("--k", help="comma-separated gap orders")
    s.add_argument("--x", help="comma-separated evaluation points")
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--output", help=f"output directory (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
    s.add_argument("--emit-cdf", action="store_true", help="also write cdf_k<k>.csv")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=["kernel", "dikz", "cue-compare", "integral-lemma", "negcorr", "sigma-equiv"])
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gap-prob", parents=[common], help="gap probabilities")
    g.add_argument("engine", choices=["toeplitz", "sine", "finite"])
    g.add_argument("--n", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--r", type=float)
    g.add_argument("--ensemble")
    g.add_argument("--x", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--order", type=int, default=de.DEFAULT_ORDER, help="Gauss-Legendre order")
    g.add_argument("--sweep", help="lo:hi:count over the engine's main parameter; emits CSV")
    g.set_defaults(func=cmd_gap_prob)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError, DomainError, SizeError, UnsupportedDegeneracyError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, PrecisionError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
