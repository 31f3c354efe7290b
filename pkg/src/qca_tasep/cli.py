"""Command line entry point.

Subcommands map one-to-one onto the harness run modes; every flag can also
be supplied through a JSON config file (flags override the file).  Angles
accept "pi" expressions like pi/4 or 2pi/3 as well as plain floats.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys

from .harness import (
    BACKENDS,
    FSS_OBSERVABLES,
    ExperimentConfig,
    emit_outputs,
    run_fss,
    run_scan,
    run_single,
    run_timeseries,
)
from .model import ModelParams
from .tensor import TruncationPolicy

__all__ = ["main", "build_parser", "parse_angle", "parse_grid", "parse_sizes"]

_ANGLE_RE = re.compile(r"^([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?$")

# CLI shorthand -> config observable names
_OBSERVABLE_ALIASES = {
    "profile": "profile",
    "negativity": "negativity",
    "lqu": "lqu",
    "coherence": "coherence",
    "ppt": "ppt_ratio",
    "ppt_ratio": "ppt_ratio",
}


def parse_angle(text) -> float:
    """Angle from a float literal or a pi expression ("pi/4", "2pi/3")."""
    if isinstance(text, (int, float)):
        return float(text)
    cleaned = text.strip().lower()
    match = _ANGLE_RE.match(cleaned)
    if match:
        coef_text, den_text = match.groups()
        coef = float(coef_text) if coef_text not in ("", "+", "-") else (
            -1.0 if coef_text == "-" else 1.0
        )
        value = coef * math.pi
        if den_text:
            value /= float(den_text)
        return value
    try:
        return float(cleaned)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"cannot parse angle {text!r}; use a float or a pi expression"
        ) from None


def parse_grid(text) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    """Grid from "a0:a1:da,b0:b1:db"."""
    if isinstance(text, (tuple, list)):
        (a0, a1, da), (b0, b1, db) = text
        return ((float(a0), float(a1), float(da)), (float(b0), float(b1), float(db)))
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(
            f"grid must be 'a0:a1:da,b0:b1:db', got {text!r}"
        )
    axes = []
    for part in parts:
        pieces = part.split(":")
        if len(pieces) != 3:
            raise argparse.ArgumentTypeError(
                f"each grid axis needs start:stop:step, got {part!r}"
            )
        try:
            axes.append(tuple(float(p) for p in pieces))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"grid axis {part!r} has a non-numeric entry"
            ) from None
    return (axes[0], axes[1])


def parse_sizes(text) -> tuple[int, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(int(v) for v in text)
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"sizes must be comma-separated integers, got {text!r}"
        ) from None


def parse_observables(text) -> tuple[str, ...]:
    if isinstance(text, (tuple, list)):
        names = [str(v) for v in text]
    else:
        names = [p.strip() for p in text.split(",") if p.strip()]
    out = []
    for name in names:
        if name not in _OBSERVABLE_ALIASES:
            raise argparse.ArgumentTypeError(
                f"unknown observable {name!r}; allowed: "
                f"{sorted(set(_OBSERVABLE_ALIASES))}"
            )
        out.append(_OBSERVABLE_ALIASES[name])
    return tuple(dict.fromkeys(out))


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", type=int, default=None, help="number of lattice sites")
    sub.add_argument("--alpha", type=float, default=None, help="injection probability")
    sub.add_argument("--beta", type=float, default=None, help="ejection probability")
    sub.add_argument("--tau", type=float, default=None, help="bulk hop probability (default 0.75)")
    sub.add_argument(
        "--omega",
        type=parse_angle,
        default=None,
        help="coherent hop angle; accepts pi expressions (default pi/4)",
    )
    sub.add_argument("--backend", choices=BACKENDS, default=None)
    sub.add_argument("--chi-max", type=int, default=None, help="bond dimension cap")
    sub.add_argument("--svd-cutoff", type=float, default=None, help="discarded-weight cutoff")
    sub.add_argument("--tol", type=float, default=None, help="steady-state residual tolerance")
    sub.add_argument("--max-sweeps", type=int, default=None)
    sub.add_argument("--grid", type=parse_grid, default=None, help="a0:a1:da,b0:b1:db")
    sub.add_argument("--sizes", type=parse_sizes, default=None, help="comma-separated N list")
    sub.add_argument(
        "--observables",
        type=parse_observables,
        default=None,
        help="comma-separated subset of profile,negativity,lqu,coherence,ppt",
    )
    sub.add_argument("--steps", type=int, default=None, help="number of sweeps to record")
    sub.add_argument("--fss-observable", choices=FSS_OBSERVABLES, default=None)
    sub.add_argument("--workers", type=int, default=None, help="parallel grid workers")
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument("--config", default=None, help="JSON config file; flags override it")


_DEFAULTS = {
    "run": {
        "backend": "exact",
        "n": 6,
        "alpha": 0.3,
        "beta": 0.7,
        "observables": ("profile", "coherence", "lqu", "ppt_ratio"),
    },
    "scan": {
        "backend": "mpo",
        "n": 10,
        "alpha": 0.3,
        "beta": 0.7,
        "observables": ("profile", "coherence", "lqu", "ppt_ratio"),
    },
    "timeseries": {
        "backend": "exact",
        "n": 6,
        "alpha": 0.7,
        "beta": 0.7,
        "steps": 100,
        "observables": ("negativity", "lqu", "coherence"),
    },
    "fss": {
        "backend": "classical-mpa",
        "n": 16,
        "alpha": 0.3,
        "beta": 0.3,
        "omega": 0.0,
        "sizes": (16, 32, 64),
        "observables": ("profile",),
    },
    "classical": {
        "backend": "classical-mpa",
        "n": 32,
        "alpha": 0.3,
        "beta": 0.7,
        "omega": 0.0,
        "observables": ("profile",),
    },
}

_GLOBAL_DEFAULTS = {
    "tau": 0.75,
    "omega": math.pi / 4,
    "chi_max": 64,
    "svd_cutoff": 1e-12,
    "tol": 1e-9,
    "max_sweeps": 100_000,
    "workers": 1,
    "fss_observable": "mean_density",
    "grid": None,
    "sizes": None,
    "steps": None,
    "out": None,
}

_FILE_PARSERS = {
    "omega": parse_angle,
    "grid": parse_grid,
    "sizes": parse_sizes,
    "observables": parse_observables,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qca",
        description=(
            "Discrete-time quantum cellular automaton of boundary-driven "
            "hopping: steady states, scans, time series, size sweeps."
        ),
    )
    subs = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "run": "evolve one parameter point to its steady state",
        "scan": "evaluate an (alpha, beta) grid",
        "timeseries": "record correlations after every sweep",
        "fss": "observable curves and crossings across sizes",
        "classical": "classical stationary profile and phase label",
    }
    for name, text in descriptions.items():
        sub = subs.add_parser(name, help=text, description=text)
        _add_common_flags(sub)
    return parser


def _merge_settings(args: argparse.Namespace) -> dict:
    """Layer CLI flags over the config file over per-command defaults."""
    settings = dict(_GLOBAL_DEFAULTS)
    settings.update(_DEFAULTS[args.command])
    if args.config is not None:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError(f"config file {args.config!r} must hold a JSON object")
        unknown = set(loaded) - set(_GLOBAL_DEFAULTS) - {"n", "alpha", "beta", "backend", "observables"}
        if unknown:
            raise ValueError(f"unknown config file keys: {sorted(unknown)}")
        for key, value in loaded.items():
            settings[key] = _FILE_PARSERS[key](value) if key in _FILE_PARSERS and value is not None else value
    for key in settings:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag
    if args.command == "classical":
        settings["backend"] = "classical-mpa"
    return settings


def _build_config(command: str, settings: dict) -> ExperimentConfig:
    mode = {"run": "single"}.get(command, command)
    params = ModelParams(
        n_sites=settings["n"],
        alpha=settings["alpha"],
        beta=settings["beta"],
        tau=settings["tau"],
        omega=settings["omega"],
    )
    policy = TruncationPolicy(
        chi_max=settings["chi_max"], svd_cutoff=settings["svd_cutoff"]
    )
    return ExperimentConfig(
        params=params,
        mode=mode,
        backend=settings["backend"],
        policy=policy,
        tol=settings["tol"],
        max_sweeps=settings["max_sweeps"],
        grid=settings["grid"],
        sizes=tuple(settings["sizes"]) if settings["sizes"] else None,
        observables=tuple(settings["observables"]),
        n_steps=settings["steps"],
        fss_observable=settings["fss_observable"],
        out_dir=settings["out"],
        workers=settings["workers"],
    )


def _print_record(record) -> None:
    print(f"run {record.run_id}: backend={record.config.backend}")
    if record.error is not None:
        print(f"  error: {record.error}")
        return
    conv = record.convergence
    if conv is not None:
        print(
            f"  converged={conv.converged} sweeps={conv.sweeps_run} "
            f"residual={conv.final_residual:.3g}"
        )
    if record.phase is not None:
        print(f"  phase: {record.phase}")
    if record.mean_density is not None:
        print(f"  mean density: {record.mean_density:.6g}")
    corr = record.correlations
    if corr is not None:
        for label, value in (
            ("negativity", corr.negativity),
            ("max two-site lqu", corr.lqu_max),
            ("max two-site coherence", corr.coherence_max),
            ("ppt moment ratio", corr.ppt_ratio),
        ):
            if value is not None:
                print(f"  {label}: {value:.6g}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = _merge_settings(args)
        config = _build_config(args.command, settings)
        if args.command in ("run", "classical"):
            result = run_single(config)
            _print_record(result)
            failed = result.error is not None
        elif args.command == "scan":
            result = run_scan(config)
            errors = [r for r in result.records if r.error is not None]
            print(
                f"scan {result.run_id}: {len(result.records)} points, "
                f"{len(errors)} failed"
            )
            for record in errors:
                p = record.config.params
                print(f"  ({p.alpha:g}, {p.beta:g}): {record.error}")
            failed = len(errors) == len(result.records)
        elif args.command == "timeseries":
            result = run_timeseries(config)
            peak = int(result.negativity.argmax())
            print(
                f"timeseries {result.run_id}: peak negativity "
                f"{result.negativity[peak]:.6g} at sweep {int(result.sweeps[peak])}, "
                f"final {result.negativity[-1]:.6g}"
            )
            failed = False
        else:
            result = run_fss(config)
            print(f"fss {result.run_id}: cut over {result.cut_axis}")
            for (na, nb), locations in sorted(result.crossings.items()):
                rendered = ", ".join(f"{x:.6g}" for x in locations) or "none"
                print(f"  N={na} vs N={nb} crossings: {rendered}")
            failed = False
        if config.out_dir:
            paths = emit_outputs(result, config.out_dir)
            print(f"wrote {len(paths)} files to {config.out_dir}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
