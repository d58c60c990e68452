"""Command line entry point: ``fracsp {validate,limit,solve,sweep,multiplicity}``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .io import COMMANDS, EXIT_CONFIG, ConfigError, RunConfig, load_preset, parse_config, preset_names, run_command

_HELP = {
    "validate": "check the structural hypotheses and exit",
    "limit": "solve the constant-potential limit ground state",
    "solve": "multistart solve at a single eps (frac.eps or the last of frac.eps_list)",
    "sweep": "eps continuation with seeds at the wells",
    "multiplicity": "sweep, then compare the number of distinct solutions with cat M",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracsp", description="Fractional Schrodinger-Poisson ground states on a periodic box.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd, help=_HELP[cmd])
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--config", metavar="PATH", help="config file (key = value)")
        src.add_argument("--preset", choices=preset_names(), help="shipped config")
        sp.add_argument("--out", metavar="DIR", help="output directory (overrides out.dir)")
        sp.add_argument("--seed", type=int, metavar="INT", help="rng seed (overrides rng.seed)")
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def _load(args) -> RunConfig:
    if args.config:
        cfg = parse_config(args.config, validate=False)
    elif args.preset:
        cfg = load_preset(args.preset, validate=False)
    else:
        cfg = RunConfig()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    if args.out is not None:
        cfg = cfg.replace(out_dir=args.out)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    # hypothesis failures are reported through the bundle so validate still writes one
    bundle = run_command(args.command, cfg)
    if args.command == "validate" or bundle.exit_code == EXIT_CONFIG:
        for name, entry in (bundle.validation or {}).items():
            mark = "pass" if entry["pass"] else "FAIL"
            print(f"[{mark}] {name}: {entry['detail']}")
    status = "ok" if bundle.exit_code == 0 else f"exit {bundle.exit_code}"
    print(f"{args.command}: {status}: {bundle.message} (bundle in {bundle.out_dir}, config_hash={bundle.config_hash})")
    return bundle.exit_code


if __name__ == "__main__":
    sys.exit(main())
