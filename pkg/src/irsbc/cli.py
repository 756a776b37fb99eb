"""Command-line entry point for the experiment sweeps."""

import argparse
import sys

from .experiments import load_config, run_experiment, emit_outputs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irsbc",
        description="Minimum transmit power sweeps for reflector-aided backscatter links",
    )
    parser.add_argument(
        "--experiment",
        choices=("fig2", "fig3", "fig4", "single"),
        help="which sweep to run (default from config file, else fig2)",
    )
    parser.add_argument("--config", help="key = value config file (INI sections)")
    parser.add_argument("--seed", type=int, help="master RNG seed")
    parser.add_argument("--realizations", type=int, help="channel realizations per point")
    parser.add_argument("--out", dest="out_dir", help="output directory")
    parser.add_argument(
        "--schemes",
        help="comma-separated scheme list (default depends on the experiment)",
    )
    parser.add_argument(
        "--regime",
        choices=("auto", "dinkelbach", "circuit", "noise"),
        help="solution path for circuit-powered single runs",
    )
    return parser


_REGIME_MAP = {
    "auto": "auto",
    "dinkelbach": "dinkelbach",
    "circuit": "circuit_limited",
    "noise": "noise_limited",
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "experiment": args.experiment,
        "seed": args.seed,
        "realizations": args.realizations,
        "out_dir": args.out_dir,
        "regime": _REGIME_MAP[args.regime] if args.regime else None,
    }
    if args.schemes:
        overrides["schemes"] = tuple(s.strip() for s in args.schemes.split(",") if s.strip())
    config = load_config(args.config, overrides)
    result = run_experiment(config)
    paths = emit_outputs(result, config.out_dir)
    n_rows = len(result.rows)
    n_infeasible = sum(1 for r in result.rows if not r.feasible)
    print(f"{config.experiment}: {n_rows} rows ({n_infeasible} infeasible)")
    for kind, path in paths.items():
        print(f"  {kind}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
