"""Command-line interface.

Subcommands select one artifact kind (``spectrum``, ``intensity``,
``carpet``, ``trajectories``, ``momentum``, ``md-compare``) or run a named
preset with its configured outputs (``preset``).  Parameters come from a
preset, a configuration file, or both (the file may start from ``preset =``
and override fields); ``--seed``, ``--n-traj``, ``--bins`` and ``--y``
override on top.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure (partial outputs removed).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import _y_entry, parse_config_file
from .errors import ConfigError, NslitError
from .presets import presets
from .runner import run_scenario

_KIND_BY_COMMAND = {
    "spectrum": ("spectrum",),
    "intensity": ("intensity",),
    "carpet": ("carpet",),
    "trajectories": ("trajectories",),
    "momentum": ("momentum",),
    "md-compare": ("md",),
}


def _add_common(p, with_preset_flag=True):
    if with_preset_flag:
        p.add_argument("--preset", help="start from a named preset")
    p.add_argument("--config", type=Path, help="configuration file (key = value)")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="random seed override")
    p.add_argument("--n-traj", type=int, default=None, help="trajectory count override")
    p.add_argument("--bins", type=int, default=None, help="histogram bin count override")
    p.add_argument(
        "--y",
        default=None,
        help="detector distances, e.g. '1.25 LT, 0.5 mm' (overrides scenario)",
    )
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nslit",
        description="n-slit matter-wave diffraction: wave fields, Bohmian and "
        "momentum-distribution trajectories, momentum statistics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _KIND_BY_COMMAND:
        p = sub.add_parser(name, help=f"emit the {name} artifact")
        _add_common(p)
    p = sub.add_parser("preset", help="run a named preset with its configured outputs")
    p.add_argument("name", choices=sorted(presets().keys()))
    _add_common(p, with_preset_flag=False)
    return parser


def _resolve_scenario(args):
    base = None
    if getattr(args, "name", None):
        base = presets()[args.name]
    elif args.preset:
        try:
            base = presets()[args.preset]
        except KeyError:
            raise ConfigError(f"unknown preset {args.preset!r}") from None
    if args.config is not None:
        if base is not None:
            raise ConfigError(
                "give either --preset or --config (files may start from 'preset =')"
            )
        if not args.config.exists():
            raise ConfigError(f"no such config file: {args.config}")
        base = parse_config_file(args.config)
    if base is None:
        raise ConfigError("a scenario is required: --preset NAME or --config FILE")
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.n_traj is not None:
        overrides["n_traj"] = args.n_traj
    if args.bins is not None:
        overrides["bins"] = args.bins
    if args.y is not None:
        overrides["y_spec"] = tuple(_y_entry(tok.strip(), None) for tok in args.y.split(","))
    if args.command in _KIND_BY_COMMAND:
        overrides["outputs"] = _KIND_BY_COMMAND[args.command]
    if overrides:
        base = base.with_overrides(**overrides)
    return base


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        scenario = _resolve_scenario(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    outdir = args.out if args.out is not None else Path("nslit-out") / scenario.name
    try:
        result = run_scenario(scenario, outdir, make_figures=not args.no_figures)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NslitError, ValueError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    print(f"{scenario.name}: wrote {len(result.files)} files to {result.outdir}")
    for key, value in result.summary.items():
        print(f"  {key} = {value:.6g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
