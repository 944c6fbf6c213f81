"""Command-line front end; a thin client over the handlers in api.py.

Exit codes: 0 success, 1 verdict-negative (not an equilibrium, conflicting,
property fails), 2 input error, 3 non-convergence.  Identical inputs and
seeds produce byte-identical JSON on stdout.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import api, serialize
from .errors import (ExchangeNotFound, FormatError, GraphTooLarge,
                     GroundTooLarge, InvalidK, InvalidSpec, NoConvergence,
                     NotLaminar, PolygameError, QueueOverload, Unstable)

INPUT_ERRORS = (FormatError, GroundTooLarge, GraphTooLarge, InvalidSpec,
                InvalidK, NotLaminar, Unstable, ExchangeNotFound, QueueOverload)


def _read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise FormatError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})")


def _emit(payload: dict, out: str | None) -> None:
    text = serialize.dumps(payload)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polygame",
        description="Equilibria, exchange graphs and matroid certificates for "
                    "atomic splittable congestion games.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="find equilibria of a game")
    p.add_argument("game")
    p.add_argument("--starts", type=int, default=1)
    p.add_argument("--damping", type=float, default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify", help="check whether a profile is an equilibrium")
    p.add_argument("game")
    p.add_argument("profile")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default=None)

    p = sub.add_parser("probe", help="multi-start equilibrium multiplicity probe")
    p.add_argument("game")
    p.add_argument("--starts", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("matroid", help="matroid utilities")
    msub = p.add_subparsers(dest="matroid_command", required=True)
    mc = msub.add_parser("check", help="axiom suite plus base-orderability certificate")
    mc.add_argument("matroid")
    mc.add_argument("--out", default=None)

    p = sub.add_parser("exchange", help="exchange graphs and flows for a point pair")
    p.add_argument("oracle")
    p.add_argument("x")
    p.add_argument("y", nargs="?", default=None)
    p.add_argument("--dot", default=None, metavar="OUT.dot")
    p.add_argument("--out", default=None)

    p = sub.add_parser("reproduce",
                       help="emit a bundled instance, expected results, and self-check")
    p.add_argument("target", help="triangle | k4 | cycle:<k> | queueing")
    p.add_argument("--out", default=None)

    p = sub.add_parser("property", help="structure properties")
    psub = p.add_subparsers(dest="property_command", required=True)
    pb = psub.add_parser("bidir", help="probe the bidirectional-flow property")
    pb.add_argument("oracle")
    pb.add_argument("--samples", type=int, default=200)
    pb.add_argument("--seed", type=int, default=42)
    pb.add_argument("--jobs", type=int, default=1)
    pb.add_argument("--out", default=None)
    pg = psub.add_parser("graph", help="no-long-cycle uniqueness property")
    pg.add_argument("graph")
    pg.add_argument("--out", default=None)

    return parser


def _seed_of(args) -> int:
    env = os.environ.get("POLYGAME_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise FormatError(f"POLYGAME_SEED must be an integer, got {env!r}")
    return getattr(args, "seed", 42)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            payload, code = api.run_solve(_read_json(args.game), starts=args.starts,
                                          damping=args.damping, seed=_seed_of(args),
                                          max_iters=args.max_iters, jobs=args.jobs)
        elif args.command == "verify":
            payload, code = api.run_verify(_read_json(args.game),
                                           _read_json(args.profile), tol=args.tol)
        elif args.command == "probe":
            payload, code = api.run_probe(_read_json(args.game), starts=args.starts,
                                          seed=_seed_of(args),
                                          max_iters=args.max_iters, jobs=args.jobs)
        elif args.command == "matroid":
            payload, code = api.run_matroid_check(_read_json(args.matroid))
        elif args.command == "exchange":
            y = _read_json(args.y) if args.y else None
            payload, code = api.run_exchange(_read_json(args.oracle),
                                             _read_json(args.x), y,
                                             want_dot=args.dot is not None)
            if args.dot and "dot" in payload:
                with open(args.dot, "w", encoding="utf-8") as fh:
                    for name in sorted(payload["dot"]):
                        fh.write(payload["dot"][name])
        elif args.command == "reproduce":
            payload, code = api.run_reproduce(args.target)
        elif args.command == "property" and args.property_command == "bidir":
            payload, code = api.run_property_bidir(_read_json(args.oracle),
                                                   samples=args.samples,
                                                   seed=_seed_of(args))
        elif args.command == "property" and args.property_command == "graph":
            payload, code = api.run_property_graph(_read_json(args.graph))
        else:  # pragma: no cover - argparse enforces the choices
            return api.EXIT_INPUT
    except INPUT_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return api.EXIT_INPUT
    except NoConvergence as exc:
        sys.stderr.write(f"error: {exc}\n")
        return api.EXIT_NO_CONVERGENCE
    except PolygameError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return api.EXIT_INPUT
    _emit(payload, getattr(args, "out", None))
    return code


def main() -> None:
    sys.exit(run())
