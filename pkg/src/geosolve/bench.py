"""Benchmark loop over random unit-ball instances."""

import logging
import math
import multiprocessing as mp
import time
from pathlib import Path
from typing import Sequence

import tqdm

from .cutcount.core import DEFAULT_TRIALS
from .geometry import generate_random_instance
from .solver import CUT_COUNT_PROBLEMS, GeoSolver
from .utils import get_thread_count, spawn_seeds

logger = logging.getLogger(__name__)

BENCH_SOLVERS = ("decompose", "is", "rds", *CUT_COUNT_PROBLEMS)
BENCH_COLUMNS = [
    "n",
    "d",
    "density",
    "rep",
    "seed",
    "solver",
    "parts",
    "kappa",
    "delta",
    "weighted_depth",
    "depth",
    "wtd_over_sqrt_n",
    "wall_time",
    "calls",
    "max_depth",
    "peak_states",
    "peak_monomials",
    "value",
    "k",
    "trials",
    "answer",
]


def bench_budget(n: int) -> int:
    """Default Cut&Count budget for an instance on ``n`` vertices."""
    return max(1, math.isqrt(n))


def _bench_one(job: tuple) -> list[dict]:
    n, d, density, rep, seed, solvers, k, trials = job
    instance = generate_random_instance(n, d, density, seed)
    solver = GeoSolver(instance=instance, seed=seed, trials=trials)
    start = time.perf_counter()
    q = solver.partition
    td = solver.decomposition
    decompose_time = time.perf_counter() - start
    base = {
        "n": n,
        "d": d,
        "density": density,
        "rep": rep,
        "seed": seed,
        "parts": q.num_parts,
        "kappa": q.kappa,
        "delta": q.delta,
        "weighted_depth": td.weighted_depth,
        "depth": td.depth,
        "wtd_over_sqrt_n": td.weighted_depth / math.sqrt(n) if n else 0.0,
    }
    rows = []
    for name in solvers:
        if name == "decompose":
            rows.append(
                {
                    **base,
                    "solver": name,
                    "wall_time": decompose_time,
                    "calls": len(td.audit),
                    "max_depth": td.depth,
                    "peak_states": 0,
                    "peak_monomials": 0,
                    "value": td.weighted_depth,
                    "k": None,
                    "trials": 0,
                    "answer": True,
                }
            )
            continue
        start = time.perf_counter()
        budget = None
        if name == "is":
            result = solver.solve("is")
        elif name == "rds":
            result = solver.solve("rds", r=1)
        else:
            budget = min(bench_budget(n) if k is None else k, n)
            result = solver.solve(
                name, k=budget, terminals=sorted({0, n - 1})
            )
        elapsed = time.perf_counter() - start
        rows.append(
            {
                **base,
                "solver": name,
                "wall_time": elapsed,
                "calls": result.stats.calls,
                "max_depth": result.stats.depth,
                "peak_states": result.stats.peak_states,
                "peak_monomials": result.stats.peak_monomials,
                "value": result.value,
                "k": budget,
                "trials": result.stats.trials,
                "answer": result.answer,
            }
        )
    return rows


def run_bench(
    sizes: Sequence[int],
    reps: int = 1,
    seed: int | None = None,
    solvers: Sequence[str] = ("decompose",),
    d: int = 2,
    density: float = 1.0,
    threads: int | None = None,
    k: int | None = None,
    trials: int = DEFAULT_TRIALS,
):
    """Time the decomposition and the chosen solvers on random instances.

    Repetitions run on a pool of ``threads`` workers, ``GEOSOLVE_THREADS``
    by default. Cut&Count solvers run with budget ``k``,
    ``bench_budget(n)`` when unset, and Steiner Tree connects the
    first and last vertex. Returns a ``pandas.DataFrame`` with
    ``BENCH_COLUMNS``.
    """
    import pandas as pd

    unknown = [s for s in solvers if s not in BENCH_SOLVERS]
    if unknown:
        raise ValueError(f"Unknown bench solvers: {unknown}")
    if reps < 1:
        raise ValueError(f"reps must be at least 1, got {reps}")
    if any(s in CUT_COUNT_PROBLEMS for s in solvers) and min(sizes) < 1:
        raise ValueError("Cut&Count benchmarks need non-empty instances")
    threads = get_thread_count() if threads is None else threads
    seeds = spawn_seeds(seed, len(sizes) * reps)
    jobs = [
        (
            n, d, density, rep, seeds[i * reps + rep], tuple(solvers), k,
            trials,
        )
        for i, n in enumerate(sizes)
        for rep in range(reps)
    ]
    logger.info(f"Running {len(jobs)} benchmark jobs on {threads} workers")
    if threads > 1:
        with mp.Pool(threads) as pool:
            results = list(
                tqdm.tqdm(pool.imap(_bench_one, jobs), total=len(jobs))
            )
    else:
        results = [_bench_one(job) for job in tqdm.tqdm(jobs)]
    rows = [row for job_rows in results for row in job_rows]
    return pd.DataFrame(rows, columns=BENCH_COLUMNS)


def write_bench(table, path: str | Path) -> None:
    table.to_csv(path, index=False)
