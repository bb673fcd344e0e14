"""Command-line front end.

Subcommands: check (scheme verdicts), estimate (ray-chain decay rate),
simulate (coupled tree runs), threshold (family bisection), speed (front
speed of the unkilled walk).  Reports are JSON on stdout with an embedded
run manifest; diagnostics go to stderr and nonzero exits carry no report
body.

Exit codes: 0 ok, 2 bad input or parameter, 3 internal consistency
failure, 4 degenerate extinction in the splitting estimator, 5 no sign
change in a threshold search.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .analysis import (
    Scheme,
    SchemeError,
    family_from_json,
    find_threshold,
    scheme_report,
)
from .backend import backend_name
from .chains import ChainKind, spectral_decay, splitting_decay
from .errors import (
    ConfigError,
    DegenerateExtinction,
    InternalConsistencyError,
    NoSignChange,
    NotLatticeFinite,
    PreconditionError,
)
from .model import ModelConfig
from .rng import derive_seed
from .treesim import run_coupled, simulate_front_speed

# Central defaults for every tunable the subcommands share.
DEFAULTS = {
    "depth": 30,
    "reps": 20,
    "particles": 10_000,
    "n": 200,
    "tol": 1e-4,
    "budget": 200,
    "frontier_cap": 4096,
    "threads": 1,
    "seed": 1,
}

_EXIT_SCHEMA = 2
_EXIT_INCONSISTENT = 3
_EXIT_EXTINCT = 4
_EXIT_NO_SIGN_CHANGE = 5


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _manifest(command: str, payload, seed: int, started: float, stable: bool) -> dict:
    return {
        "command": command,
        "config_digest": hashlib.sha256(_canonical(payload).encode()).hexdigest(),
        "seed": seed,
        "versions": f"treecast {__version__}",
        "backend": backend_name(),
        "wall_time": 0.0 if stable else round(time.perf_counter() - started, 6),
    }


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None


def _check_mc_bounds(args) -> None:
    """Splitting parameters must respect their documented minima even when
    an exact route ends up being used."""
    if args.n < 50:
        raise PreconditionError("--n must be at least 50")
    if args.particles < 1_000:
        raise PreconditionError("--particles must be at least 1000")
    if args.reps < 10:
        raise PreconditionError("--reps must be at least 10")


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("TREECAST_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"TREECAST_SEED is not an integer: {env!r}") from None
    return DEFAULTS["seed"]


def _emit(obj) -> None:
    sys.stdout.write(_canonical(obj) + "\n")


def cmd_check(args) -> int:
    started = time.perf_counter()
    raw = _load_json(args.config)
    cfg = ModelConfig.from_json(raw)
    seed = _resolve_seed(args)
    _check_mc_bounds(args)
    mc = {"n": args.n, "particles": args.particles, "reps": args.reps}
    verdicts = scheme_report(cfg, seed=seed, mc=mc)
    if args.scheme != "all":
        verdicts = [v for v in verdicts if v.scheme is Scheme(args.scheme)]
    report = {
        "config": cfg.to_json(),
        "verdicts": [v.to_json() for v in verdicts],
        "manifest": _manifest("check", raw, seed, started, args.stable),
    }
    _emit(report)
    if any(isinstance(v, SchemeError) for v in verdicts):
        sys.stderr.write("warning: some schemes failed; see report entries\n")
    return 0


def cmd_estimate(args) -> int:
    started = time.perf_counter()
    raw = _load_json(args.config)
    cfg = ModelConfig.from_json(raw)
    seed = _resolve_seed(args)
    _check_mc_bounds(args)
    chain = ChainKind.COMPLETE if args.chain == "beta" else ChainKind.BOUNDARY
    try:
        est = spectral_decay(cfg, chain)
    except NotLatticeFinite:
        est = splitting_decay(
            cfg, chain, n=args.n, particles=args.particles, reps=args.reps, seed=seed
        )
    report = {
        "config": cfg.to_json(),
        "estimate": est.to_json(),
        "manifest": _manifest("estimate", raw, seed, started, args.stable),
    }
    _emit(report)
    return 0


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    raw = _load_json(args.config)
    cfg = ModelConfig.from_json(raw)
    seed = _resolve_seed(args)
    if args.depth * args.reps > args.budget_cells:
        raise ConfigError(
            f"depth*reps = {args.depth * args.reps} exceeds --budget-cells "
            f"({args.budget_cells})"
        )

    def one(rep: int):
        return run_coupled(
            cfg, args.depth, derive_seed(seed, rep), frontier_cap=args.frontier_cap
        )

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            reports = list(pool.map(one, range(args.reps)))
    else:
        reports = [one(rep) for rep in range(args.reps)]

    freq = {
        name: sum(r.survived[name] for r in reports) / args.reps
        for name in ("aug", "comp", "bond")
    }
    manifest = _manifest("simulate", raw, seed, started, args.stable)
    if args.format == "csv":
        sys.stdout.write("# manifest: " + _canonical(manifest) + "\n")
        sys.stdout.write("rep,level,aug,comp,bond\n")
        for rep, rpt in enumerate(reports):
            for level, aug, comp, bond in rpt.csv_rows():
                sys.stdout.write(f"{rep},{level},{aug},{comp},{bond}\n")
        sys.stdout.write(
            "# survival_frequency: "
            f"aug={freq['aug']} comp={freq['comp']} bond={freq['bond']}\n"
        )
    else:  # json-lines
        for rep, rpt in enumerate(reports):
            _emit({"rep": rep, "report": rpt.to_json(), "manifest": manifest})
        _emit({"summary": {"reps": args.reps, "survival_frequency": freq},
               "manifest": manifest})
    return 0


def cmd_threshold(args) -> int:
    started = time.perf_counter()
    raw = _load_json(args.family)
    family = family_from_json(raw)
    seed = _resolve_seed(args)
    _check_mc_bounds(args)
    mc = {"n": args.n, "particles": args.particles, "reps": args.reps}
    est = find_threshold(
        family, Scheme(args.scheme), tol=args.tol, budget=args.budget,
        seed=seed, mc=mc,
    )
    report = {
        "family": {"name": family.name, "param": family.param,
                   "range": [family.lo, family.hi]},
        "threshold": est.to_json(),
        "manifest": _manifest("threshold", raw, seed, started, args.stable),
    }
    _emit(report)
    return 0


def cmd_speed(args) -> int:
    started = time.perf_counter()
    raw = _load_json(args.config)
    cfg = ModelConfig.from_json(raw)
    seed = _resolve_seed(args)
    estimate = simulate_front_speed(
        cfg, depth=args.depth, reps=args.reps, seed=seed,
        frontier_cap=args.frontier_cap,
    )
    report = {
        "config": cfg.to_json(),
        "speed_estimate": estimate,
        "depth": args.depth,
        "reps": args.reps,
        "frontier_cap": args.frontier_cap,
        "manifest": _manifest("speed", raw, seed, started, args.stable),
    }
    _emit(report)
    return 0


def _add_common(sub, *names):
    if "seed" in names:
        sub.add_argument("--seed", type=int, default=None,
                         help="run seed (falls back to TREECAST_SEED, then 1)")
    if "stable" in names:
        sub.add_argument("--stable", action="store_true",
                         help="zero the manifest wall time for byte-stable output")
    if "mc" in names:
        sub.add_argument("--n", type=int, default=DEFAULTS["n"],
                         help="splitting horizon (steps)")
        sub.add_argument("--particles", type=int, default=DEFAULTS["particles"])
        sub.add_argument("--reps", type=int, default=DEFAULTS["reps"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treecast",
        description="Decide whether tree routing schemes can transmit a "
                    "signal indefinitely.",
    )
    parser.add_argument("--version", action="version",
                        version=f"treecast {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("check", help="scheme verdicts for a model config")
    p.add_argument("--config", required=True)
    p.add_argument("--scheme", default="all",
                   choices=["all", "augmented", "complete", "boundary"])
    _add_common(p, "seed", "stable", "mc")
    p.set_defaults(func=cmd_check)

    p = subs.add_parser("estimate", help="decay rate of a ray chain")
    p.add_argument("--config", required=True)
    p.add_argument("--chain", required=True, choices=["beta", "gamma"],
                   help="beta = complete routing, gamma = boundary routing")
    _add_common(p, "seed", "stable", "mc")
    p.set_defaults(func=cmd_estimate)

    p = subs.add_parser("simulate", help="coupled tree runs")
    p.add_argument("--config", required=True)
    p.add_argument("--depth", type=int, default=DEFAULTS["depth"])
    p.add_argument("--reps", type=int, default=DEFAULTS["reps"])
    p.add_argument("--frontier-cap", type=int, default=DEFAULTS["frontier_cap"],
                   dest="frontier_cap")
    p.add_argument("--threads", type=int, default=DEFAULTS["threads"])
    p.add_argument("--format", default="jsonl", choices=["jsonl", "csv"])
    p.add_argument("--budget-cells", type=int, default=1_000_000,
                   dest="budget_cells",
                   help="refuse runs with depth*reps beyond this")
    _add_common(p, "seed", "stable")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("threshold", help="bisect a family for its critical value")
    p.add_argument("--family", required=True)
    p.add_argument("--scheme", required=True,
                   choices=["augmented", "complete", "boundary"])
    p.add_argument("--tol", type=float, default=DEFAULTS["tol"])
    p.add_argument("--budget", type=int, default=DEFAULTS["budget"],
                   help="maximum verdict evaluations")
    _add_common(p, "seed", "stable", "mc")
    p.set_defaults(func=cmd_threshold)

    p = subs.add_parser("speed", help="front speed of the unkilled walk")
    p.add_argument("--config", required=True)
    p.add_argument("--depth", type=int, default=25)
    p.add_argument("--reps", type=int, default=DEFAULTS["reps"])
    p.add_argument("--frontier-cap", type=int, default=DEFAULTS["frontier_cap"],
                   dest="frontier_cap")
    _add_common(p, "seed", "stable")
    p.set_defaults(func=cmd_speed)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PreconditionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return _EXIT_SCHEMA
    except InternalConsistencyError as exc:
        sys.stderr.write(f"internal consistency error: {exc}\n")
        return _EXIT_INCONSISTENT
    except DegenerateExtinction as exc:
        sys.stderr.write(
            f"error: {exc}\nhint: raise --particles or lower --n\n"
        )
        return _EXIT_EXTINCT
    except NoSignChange as exc:
        sys.stderr.write(f"error: {exc}\n")
        return _EXIT_NO_SIGN_CHANGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
