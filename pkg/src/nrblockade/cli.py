"""Command-line entry point: run, preset, validate, list-presets.

Exit status is 0 on success, 1 for invalid input and 2 when a solve fails.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from importlib import resources
from typing import Optional, Sequence

from .config import emit_config, parse_config
from .errors import ConfigurationError, NRBlockadeError
from .model import PRESETS, loop_fluxes, preset, validate_timescales
from .sweep import default_sweep, run_sweep, write_csv

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2


def shipped_config(name: str) -> str:
    """Text of the config file bundled for preset ``name``."""
    return resources.files("nrblockade").joinpath("configs", f"{name}.cfg").read_text("utf-8")


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror}") from None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        model, sweep = parse_config(text)
    for w in caught:
        print(f"note: {w.message}", file=sys.stderr)
    return model, sweep


def _report_invalid(exc: ConfigurationError) -> int:
    for msg in exc.messages:
        print(f"error: {msg}", file=sys.stderr)
    return EXIT_INVALID


def cmd_run(args) -> int:
    try:
        model, sweep = _load(args.config)
    except ConfigurationError as exc:
        return _report_invalid(exc)
    for msg in validate_timescales(model):
        print(f"warning: {msg}", file=sys.stderr)
    try:
        result = run_sweep(model, sweep, workers=args.workers)
    except ConfigurationError as exc:
        return _report_invalid(exc)
    if args.out:
        write_csv(result, args.out)
    else:
        write_csv(result, sys.stdout)
    if result.failures:
        for k, reason in sorted(result.failures.items()):
            print(f"error: {sweep.variable} = {result.grid[k]:.17g} failed: {reason}",
                  file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _describe(name: str) -> str:
    model = preset(name)
    lines = [f"preset {name}"]
    for m in model.modes:
        lines.append(f"  mode {m.label}: omega={m.omega:g} U={m.kerr_u:g} gamma={m.gamma:g}")
    for c in model.couplings:
        lines.append(f"  coupling {c.from_mode}->{c.to_mode}: g={c.strength:g} phase={c.phase:.6g}")
    d = model.drive
    lines.append(f"  drive on {d.target}: epsilon={d.epsilon:g} detuning={d.detuning:g}")
    fluxes = ", ".join(f"{f:.6g}" for f in loop_fluxes(model)) or "none"
    lines.append(f"  loop flux: {fluxes}")
    t = model.truncation
    lines.append(f"  truncation: per-mode {list(t.per_mode_caps)}, total {t.total_cap}")
    s = default_sweep(name)
    lines.append(f"  sweep: {s.variable} {s.start:g}..{s.stop:g}, {s.points} points, "
                 f"ports {', '.join(s.drive_ports)}")
    for msg in validate_timescales(model):
        lines.append(f"  warning: {msg}")
    return "\n".join(lines) + "\n"


def cmd_preset(args) -> int:
    if args.name not in PRESETS:
        print(f"error: unknown preset {args.name!r}; valid presets: {', '.join(PRESETS)}",
              file=sys.stderr)
        return EXIT_INVALID
    if args.emit_config:
        sys.stdout.write(emit_config(preset(args.name), default_sweep(args.name)))
    else:
        sys.stdout.write(_describe(args.name))
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        model, sweep = _load(args.config)
    except ConfigurationError as exc:
        return _report_invalid(exc)
    for msg in validate_timescales(model):
        print(f"warning: {msg}", file=sys.stderr)
    print(f"ok: {model.mode_count} modes, {len(model.couplings)} couplings, "
          f"{sweep.points} {sweep.variable} points")
    return EXIT_OK


def cmd_list(args) -> int:
    for name in PRESETS:
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nrblockade",
        description="Steady-state transmission and g2 of driven Kerr-mode networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve a sweep described by a config file")
    run.add_argument("config")
    run.add_argument("--out", help="CSV destination (default: stdout)")
    run.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    run.set_defaults(func=cmd_run)

    pre = sub.add_parser("preset", help="describe a built-in preset")
    pre.add_argument("name")
    pre.add_argument("--emit-config", action="store_true",
                     help="print the preset as a config document")
    pre.set_defaults(func=cmd_preset)

    val = sub.add_parser("validate", help="check a config file without solving")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)

    lst = sub.add_parser("list-presets", help="print the preset names")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except NRBlockadeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
