"""``sim`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

import argparse
from dataclasses import replace
import sys

from . import __version__
from . import config as cfgmod
from . import presets
from .errors import ConfigError, SimulationError
from .runner import OUT_ENV, resolve_output_dir, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _parser():
    p = argparse.ArgumentParser(prog="sim", description="Photonic FMCW radar leakage-cancellation simulator.",
                                epilog=f"Default output directory: ${OUT_ENV}, else ./sim_out.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the scenario described by a TOML config")
    run.add_argument("config")
    run.add_argument("--out")

    pre = sub.add_parser("preset", help="run a built-in scenario")
    pre.add_argument("name", choices=sorted(presets.PRESETS))
    pre.add_argument("--out")
    pre.add_argument("--engine", choices=cfgmod.ENGINES)
    pre.add_argument("--seed", type=int)

    sw = sub.add_parser("sweep", help="cancellation depth along one mismatch axis")
    sw.add_argument("config")
    sw.add_argument("--axis", required=True, choices=("amplitude", "delay", "bias"))
    sw.add_argument("--out")

    m = sub.add_parser("match", help="auto-tune the cancellation reference")
    m.add_argument("config")
    m.add_argument("--out")
    return p


def _summary(manifest, out):
    for rec in manifest.outputs:
        print(f"wrote {out}/{rec.path}")
    for key, value in sorted(manifest.results.items()):
        print(f"{key} = {value:.6g}" if isinstance(value, float) else f"{key} = {value}")


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "preset":
            cfg = presets.get(args.name)
            if args.engine:
                cfg = replace(cfg, engine=args.engine)
            if args.seed is not None:
                cfg = replace(cfg, seed=args.seed)
            kind = None
        else:
            cfg = cfgmod.load(args.config)
            kind = {"sweep": "sweep", "match": "match"}.get(args.command)
        axis = getattr(args, "axis", None)
        manifest = run_scenario(cfg, args.out, kind=kind, sweep_axis=axis)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, OSError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _summary(manifest, resolve_output_dir(args.out, cfg))
    if manifest.results.get("match_converged") is False:
        print("runtime error: auto-match did not converge; best point written", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
