"""Command line interface.

Exit codes: 0 when an answer was produced, 2 when the answer is false
or infeasible and 1 on errors.
"""

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import oracles
from .bench import BENCH_SOLVERS, run_bench, write_bench
from .cutcount.core import DEFAULT_TRIALS
from .cycle_cover import build_kernel
from .decomposition import verify_decomposition
from .geometry import (
    GeometricInstance,
    IntersectionGraph,
    build_intersection_graph,
    generate_random_instance,
)
from .results import SolverResult
from .solver import CUT_COUNT_PROBLEMS, PROBLEMS, GeoSolver
from .utils import configure_logger

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FALSE = 2

ORACLE_PROBLEMS = PROBLEMS + ("treedepth",)
RANDOMIZED_COMMANDS = ("gen", "bench")


@dataclass
class RunConfig:
    """Validated settings of one CLI run."""

    command: str
    problem: str | None = None
    instance: str | None = None
    graph: str | None = None
    k: int | None = None
    r: int = 1
    terminals: list[int] = field(default_factory=list)
    weights: list[float] | None = None
    seed: int | None = None
    trials: int = DEFAULT_TRIALS
    backend: str = "exact"
    json_out: str | None = None
    verify: bool = False
    witness: bool = False
    log_level: str = "WARNING"

    def __post_init__(self):
        randomized = self.command in RANDOMIZED_COMMANDS or (
            self.command == "solve" and self.problem in CUT_COUNT_PROBLEMS
        )
        if randomized and self.seed is None:
            raise ValueError(f"'{self.command}' needs --seed")
        if self.k is not None and self.k < 0:
            raise ValueError(f"k must be non-negative, got {self.k}")
        if self.r < 0:
            raise ValueError(f"r must be non-negative, got {self.r}")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")

    def to_dict(self) -> dict:
        return asdict(self)


def read_terminals(path: str | Path) -> list[int]:
    """Terminals as a JSON list or whitespace separated integers."""
    text = Path(path).read_text().strip()
    if text.startswith("["):
        values = json.loads(text)
    else:
        values = text.split()
    try:
        return [int(v) for v in values]
    except ValueError as e:
        raise ValueError(f"Malformed terminals file {path}: {e}") from e


def read_weights(path: str | Path) -> list[float]:
    values = json.loads(Path(path).read_text())
    if not isinstance(values, list):
        raise ValueError(f"Weights file {path} must hold a JSON list")
    return [float(v) for v in values]


def _load(config: RunConfig) -> GeoSolver:
    if config.instance is not None:
        instance = GeometricInstance.load(config.instance)
        graph = build_intersection_graph(instance)
    elif config.graph is not None:
        instance = None
        graph = IntersectionGraph.load(config.graph)
    else:
        raise ValueError("Either --instance or --graph is required")
    return GeoSolver(
        graph=graph,
        instance=instance,
        seed=config.seed,
        trials=config.trials,
        backend=config.backend,
    )


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out is not None:
        Path(out).write_text(text + "\n")
    print(text)


def cmd_gen(n: int, d: int, density: float, seed: int, out: str) -> int:
    instance = generate_random_instance(n, d, density, seed)
    instance.save(out)
    logger.info(f"Wrote {n} objects to {out}")
    return EXIT_OK


def cmd_decompose(config: RunConfig, out: str | None) -> int:
    solver = _load(config)
    q = solver.partition
    td = solver.decomposition
    payload = {
        "partition": q.to_dict(),
        "decomposition": td.to_dict(),
        "audit": [asdict(step) for step in td.audit],
    }
    if solver.instance is not None:
        payload["instance_id"] = solver.instance.instance_id
    _emit(payload, out)
    return EXIT_OK


def cmd_kernel(config: RunConfig, out: str | None) -> int:
    solver = _load(config)
    q = solver.clique_partition
    kernel_sets = build_kernel(solver.graph, q)
    payload = {"parts": [list(p) for p in q.parts], **kernel_sets.to_dict()}
    _emit(payload, out)
    return EXIT_OK


def cmd_solve(config: RunConfig) -> int:
    solver = _load(config)
    kwargs = {"k": config.k, "r": config.r, "witness": config.witness}
    if config.problem == "steiner":
        kwargs["terminals"] = config.terminals
    if config.weights is not None:
        kwargs["weights"] = config.weights
    needs_k = CUT_COUNT_PROBLEMS + ("cyclecover",)
    if config.problem in needs_k and config.k is None:
        raise ValueError(f"'{config.problem}' needs --k")
    result = solver.solve(config.problem, **kwargs)
    payload = result.to_dict()
    payload["trials"] = config.trials
    code = EXIT_OK if result.answer else EXIT_FALSE
    if config.verify:
        check = solver.cross_check(result)
        payload["oracle_check"] = check
        if check.get("agrees") is False:
            logger.error("Solver and oracle disagree")
            code = EXIT_ERROR
    _emit(payload, config.json_out)
    return code


def _oracle(config: RunConfig, g: IntersectionGraph):
    problem = config.problem
    if problem in ("is", "wis"):
        return oracles.brute_is(g, config.weights)
    if problem == "rds":
        return oracles.brute_rds(g, config.r)
    if problem == "steiner":
        return oracles.brute_steiner(g, config.terminals)
    if problem == "cvc":
        return oracles.brute_cvc(g)
    if problem == "fvs":
        return oracles.brute_fvs(g)
    if problem in ("oct", "coct"):
        return oracles.brute_oct(g, connected=problem == "coct")
    if problem == "cyclecover":
        if config.k is None:
            raise ValueError("'cyclecover' needs --k")
        return oracles.brute_cycle_cover(g, config.k)
    if problem == "hamcycle":
        return oracles.brute_hamiltonian(g)
    if problem == "hampath":
        return oracles.brute_hamiltonian_path(g)
    if problem == "treedepth":
        return oracles.brute_treedepth(g)
    raise ValueError(f"Unknown problem: {problem}")


def cmd_oracle(config: RunConfig) -> int:
    solver = _load(config)
    result = _oracle(config, solver.graph)
    _emit(result.to_dict(), config.json_out)
    if result.value is None or result.value is False:
        return EXIT_FALSE
    return EXIT_OK


def cmd_verify(config: RunConfig, solution: str | None) -> int:
    solver = _load(config)
    q = solver.partition
    payload = {
        "partition": q.verify(),
        "decomposition": verify_decomposition(solver.decomposition, q),
    }
    valid = not payload["partition"] and not payload["decomposition"]
    if solution is not None:
        data = json.loads(Path(solution).read_text())
        result = SolverResult(
            problem=data["problem"],
            answer=data["answer"],
            value=data.get("value"),
            witness=data.get("witness"),
            params=data.get("params", {}),
        )
        check = solver.cross_check(result)
        payload["solution"] = check
        valid &= check.get("agrees", True)
    payload["valid"] = bool(valid)
    _emit(payload, config.json_out)
    return EXIT_OK if valid else EXIT_FALSE


def cmd_bench(
    sizes: list[int],
    reps: int,
    seed: int,
    out: str,
    solvers: list[str],
    d: int = 2,
    density: float = 1.0,
    k: int | None = None,
    trials: int = DEFAULT_TRIALS,
) -> int:
    table = run_bench(
        sizes, reps, seed, solvers, d=d, density=density, k=k,
        trials=trials,
    )
    write_bench(table, out)
    logger.info(f"Wrote {len(table)} benchmark rows to {out}")
    return EXIT_OK


def _add_input(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--instance", help="Instance JSON file")
    group.add_argument("--graph", help="Edge list file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geosolve",
        description="Exact solvers for geometric intersection graphs",
    )
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate a random instance")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, default=2)
    gen.add_argument("--density", type=float, default=1.0)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", required=True)

    decompose = sub.add_parser(
        "decompose", help="Write the partition and decomposition"
    )
    _add_input(decompose)
    decompose.add_argument("--out")

    kernel = sub.add_parser(
        "kernel", help="Write the cycle cover kernel of each clique part"
    )
    _add_input(kernel)
    kernel.add_argument("--out")

    for name in ("solve", "oracle"):
        command = sub.add_parser(name, help=f"Run a {name}")
        choices = PROBLEMS if name == "solve" else ORACLE_PROBLEMS
        command.add_argument("problem", choices=choices)
        _add_input(command)
        command.add_argument("--k", type=int)
        command.add_argument("--r", type=int, default=1)
        command.add_argument("--terminals", help="Terminals file")
        command.add_argument("--weights", help="JSON list of vertex weights")
        command.add_argument("--seed", type=int)
        command.add_argument("--json-out")
        if name == "solve":
            command.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
            command.add_argument("--backend", default="exact")
            command.add_argument("--verify", action="store_true")
            command.add_argument("--witness", action="store_true")

    verify = sub.add_parser(
        "verify", help="Check a partition, decomposition or solution"
    )
    _add_input(verify)
    verify.add_argument("--solution", help="Output of 'solve'")
    verify.add_argument("--json-out")

    bench = sub.add_parser("bench", help="Benchmark random instances")
    bench.add_argument("--sizes", type=int, nargs="+", required=True)
    bench.add_argument("--reps", type=int, default=1)
    bench.add_argument("--seed", type=int)
    bench.add_argument(
        "--solvers", nargs="+", default=["decompose"], choices=BENCH_SOLVERS
    )
    bench.add_argument("--d", type=int, default=2)
    bench.add_argument("--density", type=float, default=1.0)
    bench.add_argument(
        "--k", type=int, help="Cut&Count budget, isqrt(n) by default"
    )
    bench.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    bench.add_argument("--out", required=True)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    terminals = getattr(args, "terminals", None)
    weights = getattr(args, "weights", None)
    return RunConfig(
        command=args.command,
        problem=getattr(args, "problem", None),
        instance=getattr(args, "instance", None),
        graph=getattr(args, "graph", None),
        k=getattr(args, "k", None),
        r=getattr(args, "r", 1),
        terminals=read_terminals(terminals) if terminals else [],
        weights=read_weights(weights) if weights else None,
        seed=getattr(args, "seed", None),
        trials=getattr(args, "trials", DEFAULT_TRIALS),
        backend=getattr(args, "backend", "exact"),
        json_out=getattr(args, "json_out", None),
        verify=getattr(args, "verify", False),
        witness=getattr(args, "witness", False),
        log_level=args.log_level,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logger(args.log_level.upper())
    try:
        config = _config(args)
        if config.command == "gen":
            return cmd_gen(args.n, args.d, args.density, args.seed, args.out)
        if config.command == "decompose":
            return cmd_decompose(config, args.out)
        if config.command == "kernel":
            return cmd_kernel(config, args.out)
        if config.command == "solve":
            return cmd_solve(config)
        if config.command == "oracle":
            return cmd_oracle(config)
        if config.command == "verify":
            return cmd_verify(config, args.solution)
        return cmd_bench(
            args.sizes,
            args.reps,
            args.seed,
            args.out,
            args.solvers,
            d=args.d,
            density=args.density,
            k=config.k,
            trials=config.trials,
        )
    except Exception as e:
        logger.error(f"{type(e).__name__}: {e}")
        logger.debug("Traceback", exc_info=True)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
