"""Command line entry point: ``symbreak-vqe {solve,transfer,penalty,sweep-setups,exact}``.

Precedence: built-in defaults < ``--config FILE`` < explicit flags. Exit status
is 0 when every requested run completed (converged or epoch budget used up),
1 when some run failed, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .harness import (
    cmd_exact,
    cmd_penalty,
    cmd_solve,
    cmd_sweep_setups,
    cmd_transfer,
    completed,
    gnuplot_hints,
    make_config,
    read_config_file,
)
from .hamiltonians import ModelSpec

# flag dest -> config key
_FLAG_KEYS = {
    "model": "model", "n": "n", "h": "h", "depth": "depth", "ansatz": "ansatz",
    "init": "init", "fisher": "fisher", "eta": "eta", "lambda0": "lambda0",
    "lambda_decay": "lambda_decay", "lambda_floor": "lambda_floor", "epochs": "epochs",
    "stop_window": "stop_window", "stop_tol": "stop_tol", "replicas": "replicas",
    "seed": "seed", "jobs": "jobs", "out": "out", "alpha": "alpha", "perturb": "perturb",
    "new_block_sigma": "new_block_sigma", "insert_position": "insert_position",
    "chain": "chain", "ground_method": "ground_method",
}


def _common(p: argparse.ArgumentParser) -> None:
    # defaults are None so that config-file values survive unless overridden
    p.add_argument("--config", help="INI file with [model]/[ansatz]/[optimizer]/[experiment] sections")
    p.add_argument("--model", choices=["tfi", "tfc", "cluster"])
    p.add_argument("--n", help="qubit count(s), comma separated")
    p.add_argument("--h", type=float, help="transverse field")
    p.add_argument("--depth", help="circuit depth(s), comma separated")
    p.add_argument("--ansatz", choices=["qaoa", "sb"])
    p.add_argument("--init", help="normal:SIGMA or sboffset:SIGMA")
    p.add_argument("--fisher", choices=["centered", "uncentered"])
    p.add_argument("--eta", type=float)
    p.add_argument("--lambda0", type=float)
    p.add_argument("--lambda-decay", type=float)
    p.add_argument("--lambda-floor", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--stop-window", type=int)
    p.add_argument("--stop-tol", type=float)
    p.add_argument("--replicas", type=int)
    p.add_argument("--seed", type=int, help="base seed; replica k uses seed+k")
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--ground-method", choices=["auto", "dense", "lanczos"])
    p.add_argument("--gnuplot-hints", action="store_true", help="print column documentation")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symbreak-vqe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("solve", help="(N, D) sweep with seeded replicas"))

    p = sub.add_parser("transfer", help="insert a block into converged circuits and retrain")
    _common(p)
    p.add_argument("--source", nargs="+", required=True, help="checkpoint JSON file(s)")
    p.add_argument("--perturb", type=float, help="std of the noise added to every parameter")
    p.add_argument("--new-block-sigma", type=float, help="std of the inserted block (0 = identity)")
    p.add_argument("--insert-position", choices=["floor", "ceil"])
    p.add_argument("--chain", type=int, help="number of D -> D+1 steps")

    p = sub.add_parser("penalty", help="parity-penalised runs on the open cluster model")
    _common(p)
    p.add_argument("--alpha", help="penalty weights a1,a2 (one value sets both)")

    _common(sub.add_parser("sweep-setups", help="Fisher variant x initialisation grid"))

    p = sub.add_parser("exact", help="print the reference ground energy as JSON")
    p.add_argument("--model", choices=["tfi", "tfc", "cluster"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--h", type=float, default=0.5)
    p.add_argument("--method", choices=["auto", "dense", "lanczos"], default="auto")
    return parser


def _config_from_args(args: argparse.Namespace):
    values = read_config_file(args.config) if args.config else {}
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            values[key] = value
    return make_config(values)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        if args.command == "exact":
            print(json.dumps(cmd_exact(ModelSpec(args.model, args.n, args.h), args.method)))
            return 0
        if args.gnuplot_hints:
            print(gnuplot_hints(), end="")
        cfg = _config_from_args(args)
        if args.command == "solve":
            result = cmd_solve(cfg)
        elif args.command == "penalty":
            result = cmd_penalty(cfg)
        elif args.command == "transfer":
            result = cmd_transfer(cfg, args.source)
        else:
            result = cmd_sweep_setups(cfg)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "sweep-setups":
        rows = [r for cell in result["cells"].values() for r in cell["replicas"]]
        for r in result["grid"]:
            print(f"{r['fisher']:>10} {r['init']:>8} N={r['n']:<3} D={r['depth']:<3} "
                  f"best={r['best_normalized_energy']:.3e}")
    else:
        rows = result["replicas"]
        for r in result["summary"]:
            print(f"N={r['n']:<3} D={r['depth']:<3} best={r['best_normalized_energy']:.3e} "
                  f"seed={r['best_seed']} failed={r['failed']}/{r['replicas']}")
    return 0 if all(completed(r) for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
