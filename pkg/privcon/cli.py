"""Command-line front-end: augment, audit, simulate, catalog, bench.

Exit codes: 0 ok / private, 2 violated precondition, 3 I/O or malformed
input, 4 audit verdict not private, 5 simulation did not converge.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from loguru import logger

from .core import db
from .core.agents import run_agents
from .core.augment import (
    AugmentationKind,
    AugmentedSystem,
    SplitChoice,
    build_alg1,
    build_alg2,
    check_network,
    solve_p1d,
    wrap_raw,
)
from .core.bench import DEFAULT_SIZES, BenchConfig, run_bench
from .core.catalog import CatalogConfig, enumerate_3aug, enumerate_4aug_bidirected, write_catalog
from .core.constants import (
    CLI_MAX_DENOMINATOR,
    DEFAULT_MAX_ROUNDS,
    DEFAULT_SEED,
    DEFAULT_TOL,
    DEFAULT_TRIALS,
    LEDGER_ENABLED,
    LOG_FILE,
    LOG_LEVEL,
)
from .core.errors import (
    EigenError,
    FormatError,
    NotReversibleError,
    PreconditionError,
    PrivconError,
    SplitError,
)
from .core.exactla import parse_rational, rationalize
from .core.netgraph import read_graph, to_matrix
from .core.privacy import audit
from .core.simulate import compare_traces, run_matrix

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_IO = 3
EXIT_NOT_PRIVATE = 4
EXIT_NOT_CONVERGED = 5

ALGORITHMS = tuple(k.value for k in AugmentationKind)


@dataclass
class RunConfig:
    input: Path
    algorithm: str = AugmentationKind.ALG3_5N.value
    split: str | None = None  # None or "default" -> SplitChoice.default
    tolerance: float = DEFAULT_TOL
    max_rounds: int = DEFAULT_MAX_ROUNDS
    seed: int | None = DEFAULT_SEED
    out_dir: Path = field(default_factory=lambda: Path("."))

    def __post_init__(self):
        self.input = Path(self.input)
        self.out_dir = Path(self.out_dir)
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_rounds < 0:
            raise ValueError("max_rounds must be >= 0")

    def rng(self) -> np.random.Generator:
        if self.seed is None:
            raise PreconditionError("seed", f"{self.algorithm} draws random weights: pass --seed or set PRIVCON_SEED")
        return np.random.default_rng(self.seed)

    def split_choice(self, n: int, width: int) -> SplitChoice:
        if self.split is None or self.split.strip() == "default":
            return SplitChoice.default(n, width)
        return SplitChoice.from_text(self.split)


# ---------------- helpers ---------------- #


def configure_logging(level: str = LOG_LEVEL) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level.upper())
    if LOG_FILE:
        logger.add(LOG_FILE, rotation="1 MB", level="DEBUG")


def parse_values(text: str) -> tuple[tuple[Fraction, ...], bool]:
    """Comma separated rationals; decimal literals are rationalized and flagged."""
    out = []
    rationalized = False
    for token in text.split(","):
        token = token.strip()
        if not token:
            raise FormatError(f"empty entry in {text!r}")
        if "/" not in token and any(c in token for c in ".eE"):
            try:
                value = float(token)
            except ValueError as exc:
                raise FormatError(f"bad number {token!r}") from exc
            q = rationalize(value, CLI_MAX_DENOMINATOR)
            rationalized = rationalized or float(q) != value
            out.append(q)
        else:
            out.append(parse_rational(token))
    return tuple(out), rationalized


def _parse_ints(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise FormatError(f"bad integer list {text!r}") from exc


def _record(enabled: bool, **fields) -> None:
    if not (enabled or LEDGER_ENABLED):
        return
    try:
        db.init_db()
        db.store_run(**fields)
    except Exception as exc:  # ledger is best-effort
        logger.warning(f"ledger write failed: {exc}")


# ---------------- commands ---------------- #


def cmd_augment(args: argparse.Namespace) -> int:
    config = RunConfig(
        input=args.graph,
        algorithm=args.alg,
        split=args.split,
        seed=args.seed if args.seed is not None else DEFAULT_SEED,
        out_dir=args.out_dir,
    )
    g = read_graph(config.input)
    x0, rationalized = (None, False) if args.x0 is None else parse_values(args.x0)
    if rationalized:
        logger.warning("float inputs rationalized with denominator <= 10^6")
    kind = AugmentationKind(config.algorithm)
    if kind is AugmentationKind.ALG1_3N:
        # network preconditions are reported ahead of a missing seed
        check_network(g, args.min_agents)
        system = build_alg1(
            g,
            config.rng(),
            stochastic=args.stochastic,
            min_agents=args.min_agents,
            x0=x0,
        )
    elif kind is AugmentationKind.RAW:
        system = wrap_raw(g, x0)
    else:
        if x0 is None:
            raise PreconditionError("initial state", f"{kind.value} needs --x0")
        width = kind.aug_per_agent
        split = config.split_choice(g.node_count, width)
        if kind is AugmentationKind.ALG2_4N:
            system = build_alg2(g, x0, split, weighted=args.weighted)
        else:
            system = solve_p1d(to_matrix(g), x0, split)

    data = system.to_dict()
    if rationalized:
        data["rationalized_inputs"] = True
    out = Path(args.out) if args.out else config.out_dir / f"{config.input.stem}_{kind.value}.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(data, indent=2) + "\n")
    print(f"{kind.value}: {system.n_original} agents -> {system.dim} states, written to {out}")
    _record(args.ledger, command="augment", kind=kind.value, n_original=system.n_original,
            dim=system.dim, seed=config.seed)
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    system = AugmentedSystem.load(args.system)
    report = audit(system, args.observer, _parse_ints(args.coalition), args.mode)
    if args.report:
        Path(args.report).write_text(report.to_json())
    print(report.summary())
    _record(args.ledger, command="audit", kind=system.kind.value, n_original=system.n_original,
            dim=system.dim, verdict=report.verdict)
    return EXIT_OK if report.private else EXIT_NOT_PRIVATE


def cmd_simulate(args: argparse.Namespace) -> int:
    system = AugmentedSystem.load(args.system)
    if system.x_tilde0 is None:
        raise PreconditionError("initial state", "system file carries no initial state")
    tol = args.tol
    if not tol > 0:
        raise ValueError("tolerance must be > 0")
    x0 = [float(v) for v in system.x_tilde0]
    traces = []
    if args.mode in ("matrix", "both"):
        traces.append(run_matrix(system.ap, x0, tol, args.max_rounds))
    if args.mode in ("agents", "both"):
        traces.append(run_agents(system, tol, args.max_rounds))
    max_rows = None if args.full else 10_000
    main_trace = traces[0]
    if args.trace:
        main_trace.export_csv(args.trace, max_rows)
    if args.json:
        main_trace.export_json(args.json, max_rows)
    for t in traces:
        print(t.summary())
    if len(traces) == 2:
        print(f"max cross-mode deviation: {compare_traces(*traces):.3e}")
    _record(args.ledger, command="simulate", kind=system.kind.value, n_original=system.n_original,
            dim=system.dim, consensus_value=main_trace.consensus_value, rounds=main_trace.rounds,
            converged=main_trace.converged)
    if not all(t.converged for t in traces):
        logger.warning(main_trace.summary())
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_catalog(args: argparse.Namespace) -> int:
    config = CatalogConfig(trials=args.trials, seed=args.seed, progress=args.progress)
    if args.kind == "3aug":
        candidates = enumerate_3aug(config)
    else:
        candidates = enumerate_4aug_bidirected(config)
    if args.out:
        write_catalog(candidates, args.out)
    print(f"{args.kind}: {len(candidates)} classes")
    for c in candidates:
        print(f"  {c.class_form}  edges={list(c.edges)}  variants={len(c.variants)}")
    _record(args.ledger, command="catalog", kind=args.kind, seed=args.seed)
    return EXIT_OK


def cmd_bench_p1d(args: argparse.Namespace) -> int:
    sizes = _parse_ints(args.sizes) or list(DEFAULT_SIZES)
    result = run_bench(BenchConfig(sizes=tuple(sizes), seed=args.seed, repeats=args.repeats))
    if args.out:
        result.table.to_csv(args.out, index=False)
    print(result.summary())
    _record(args.ledger, command="bench", kind=AugmentationKind.ALG3_5N.value, seed=args.seed)
    return EXIT_OK


# ---------------- parser ---------------- #


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privcon", description="Privacy-preserving augmented consensus")
    parser.add_argument("--log-level", default=LOG_LEVEL)
    parser.add_argument("--ledger", action="store_true", help="record the run in the ledger DB")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="build an augmented system from a graph")
    p.add_argument("graph", help="graph JSON or edge list")
    p.add_argument("--alg", choices=ALGORITHMS, default=AugmentationKind.ALG3_5N.value)
    p.add_argument("--x0", help="initial values, e.g. 1/2,1/3,1/5")
    p.add_argument("--split", help='"default" or per-agent weights "a,b,c;d,e,f"')
    p.add_argument("--seed", type=int)
    p.add_argument("--stochastic", action="store_true", help="alg1: row-normalize")
    p.add_argument("--min-agents", type=int, default=3, help="alg1: minimum network size")
    p.add_argument("--weighted", action="store_true", help="alg2: copy edge weights")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--out", help="output file (overrides --out-dir)")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("audit", help="observability-based privacy audit")
    p.add_argument("system")
    p.add_argument("--observer", type=int, default=0)
    p.add_argument("--coalition", help="comma separated agent ids")
    p.add_argument("--mode", choices=("proof", "minimal"), default="proof")
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("simulate", help="run the consensus iteration")
    p.add_argument("system")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-rounds", type=int, default=DEFAULT_MAX_ROUNDS)
    p.add_argument("--mode", choices=("matrix", "agents", "both"), default="matrix")
    p.add_argument("--trace", help="CSV trace output")
    p.add_argument("--json", help="JSON trace output")
    p.add_argument("--full", action="store_true", help="do not stride the trace")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("catalog", help="enumerate admissible gadgets")
    p.add_argument("--kind", choices=("3aug", "4aug"), default="3aug")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED or 0)
    p.add_argument("--out", help="catalog JSON output")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("bench", help="time the 5N construction")
    p.add_argument("--sizes", help="comma separated N values")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED or 0)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--out", help="CSV table output")
    p.set_defaults(func=cmd_bench_p1d)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.func(args)
    except (PreconditionError, SplitError, EigenError, NotReversibleError) as exc:
        logger.error(str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (OSError, FormatError) as exc:
        logger.error(str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PrivconError, ValueError) as exc:
        logger.error(str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
