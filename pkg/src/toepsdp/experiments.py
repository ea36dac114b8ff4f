"""Monte Carlo experiment harness: phase-transition grids and runtime benches.

A trial synthesizes a random instance from a seed, solves it, and declares
success when the relative recovery error is at most 1e-3. Grids sweep
(m, s) cells with a fixed number of trials per cell; every per-trial seed is
derived by stable hashing of (base_seed, m, s, trial), so results are
reproducible and trials can run in parallel without changing the counts.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .admm import RecoveryResult, SolverConfig, solve
from .signal_model import sample_observations, synth_random

__all__ = [
    "SUCCESS_THRESHOLD",
    "DEFAULT_BENCH_SIZES",
    "PhaseGridSpec",
    "PhaseGridResult",
    "BenchRow",
    "trial_seed",
    "instance_from_seed",
    "run_trial",
    "run_phase_grid",
    "run_bench",
    "emit_phase_plot",
    "write_bench_csv",
    "write_manifest",
]

# a recovery counts as successful at or below this relative error
SUCCESS_THRESHOLD = 1e-3

# (n, m) ladder for the runtime bench, solved at s=5; the largest row is the
# size where vectorized second-order solvers run out of memory
DEFAULT_BENCH_SIZES = (
    (15, 80),
    (16, 90),
    (17, 100),
    (18, 110),
    (19, 120),
    (20, 130),
    (21, 140),
    (22, 150),
    (23, 160),
)


@dataclass(frozen=True)
class PhaseGridSpec:
    """A success-count grid over m (rows) and s (columns) at fixed n."""

    m_values: tuple[int, ...]
    s_values: tuple[int, ...]
    n: int = 50
    trials: int = 20
    base_seed: int = 0
    variant: str = "toeplitz"

    def __post_init__(self):
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(self, "s_values", tuple(int(s) for s in self.s_values))
        if not self.m_values or not self.s_values:
            raise ValueError("m_values and s_values must be nonempty")
        if list(self.m_values) != sorted(set(self.m_values)):
            raise ValueError("m_values must be strictly increasing")
        if list(self.s_values) != sorted(set(self.s_values)):
            raise ValueError("s_values must be strictly increasing")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.m_values[0] < 1 or self.m_values[-1] > self.n * self.n:
            raise ValueError("m values must lie in [1, n^2]")
        if self.s_values[0] < 1 or self.s_values[-1] > self.n // 2:
            raise ValueError("s values must lie in [1, n/2] (separated synthesis)")
        if self.variant not in ("toeplitz", "nuclear"):
            raise ValueError(f"unknown variant {self.variant!r}")

    def to_json_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["m_values"] = list(self.m_values)
        d["s_values"] = list(self.s_values)
        return d


@dataclass
class PhaseGridResult:
    """Per-cell aggregates; all arrays have shape (len(m_values), len(s_values))."""

    spec: PhaseGridSpec
    counts: np.ndarray
    mean_rel_error: np.ndarray
    mean_iters: np.ndarray
    mean_wall_time: np.ndarray

    def __post_init__(self):
        if np.any(self.counts < 0) or np.any(self.counts > self.spec.trials):
            raise ValueError("success counts must lie in [0, trials]")


@dataclass
class BenchRow:
    n: int
    m: int
    wall_time: float
    rel_error: float
    iters: int
    success: bool


def trial_seed(base_seed: int, m: int, s: int, trial: int) -> int:
    """Stable per-trial seed from the cell coordinates."""
    ss = np.random.SeedSequence([int(base_seed), int(m), int(s), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def instance_from_seed(n: int, s: int, m: int, seed: int):
    """The (signal, observations) pair a trial with this seed works on."""
    sig_seed, obs_seed = (
        int(x) for x in np.random.SeedSequence(int(seed)).generate_state(2, dtype=np.uint64)
    )
    truth = synth_random(n, s, rng_seed=sig_seed)
    obs = sample_observations(truth, m, rng_seed=obs_seed)
    return truth, obs


def run_trial(
    n: int, s: int, m: int, seed: int, cfg: SolverConfig = SolverConfig()
) -> tuple[bool, RecoveryResult]:
    """Synthesize one instance from ``seed``, solve it, grade the recovery."""
    truth, obs = instance_from_seed(n, s, m, seed)
    result = solve(obs, cfg, truth=truth)
    return result.rel_error <= SUCCESS_THRESHOLD, result


def _grid_cell(args):
    i, j, n, s, m, seed, cfg = args
    success, result = run_trial(n, s, m, seed, cfg)
    return i, j, success, result.rel_error, result.iters, result.wall_time


def run_phase_grid(
    spec: PhaseGridSpec, cfg: SolverConfig = SolverConfig(), jobs: int = 1
) -> PhaseGridResult:
    """Fill every (m, s) cell with success counts over ``spec.trials`` trials.

    ``spec.variant`` decides which program the solver runs regardless of
    ``cfg.variant``. Trials are independent; with ``jobs > 1`` they execute in
    a process pool, and aggregation into preallocated per-cell slots keeps the
    result identical to a sequential run.
    """
    cfg = dataclasses.replace(cfg, variant=spec.variant)
    tasks = [
        (i, j, spec.n, s, m, trial_seed(spec.base_seed, m, s, t), cfg)
        for i, m in enumerate(spec.m_values)
        for j, s in enumerate(spec.s_values)
        for t in range(spec.trials)
    ]
    shape = (len(spec.m_values), len(spec.s_values))
    counts = np.zeros(shape, dtype=int)
    rel_sum = np.zeros(shape)
    iter_sum = np.zeros(shape)
    time_sum = np.zeros(shape)
    if jobs == 1:
        outcomes = map(_grid_cell, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=jobs)
        outcomes = pool.map(_grid_cell, tasks, chunksize=1)
    for i, j, success, rel, iters, wall in outcomes:
        counts[i, j] += success
        rel_sum[i, j] += rel
        iter_sum[i, j] += iters
        time_sum[i, j] += wall
    if jobs != 1:
        pool.shutdown()
    return PhaseGridResult(
        spec=spec,
        counts=counts,
        mean_rel_error=rel_sum / spec.trials,
        mean_iters=iter_sum / spec.trials,
        mean_wall_time=time_sum / spec.trials,
    )


def run_bench(
    sizes=DEFAULT_BENCH_SIZES,
    s: int = 5,
    cfg: SolverConfig = SolverConfig(),
    base_seed: int = 0,
) -> list[BenchRow]:
    """Solve one seeded instance per (n, m) row and record wall time."""
    rows = []
    for n, m in sizes:
        seed = trial_seed(base_seed, m, s, n)
        success, result = run_trial(n, s, m, seed, cfg)
        rows.append(
            BenchRow(
                n=n,
                m=m,
                wall_time=result.wall_time,
                rel_error=result.rel_error,
                iters=result.iters,
                success=success,
            )
        )
    return rows


def write_bench_csv(rows: list[BenchRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "m", "wall_time", "rel_error", "iters", "success"])
        for r in rows:
            writer.writerow(
                [r.n, r.m, f"{r.wall_time:.6f}", f"{r.rel_error:.6e}", r.iters, int(r.success)]
            )


def emit_phase_plot(result: PhaseGridResult, path_base) -> tuple[Path, Path]:
    """Write the counts matrix as ``<base>.csv`` and ``<base>.pgm``.

    CSV: header row of s values, first column the m values. PGM: binary P5,
    8-bit, rows are m ascending, columns s ascending, pixel = round-half-up of
    count/trials*255 (all-success renders white).
    """
    base = Path(path_base)
    spec = result.spec
    csv_path = base.with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", *spec.s_values])
        for m, row in zip(spec.m_values, result.counts):
            writer.writerow([m, *row.tolist()])
    # floor(x + 0.5) rounds halves up; Python's round() would take 127.5 down
    pixels = np.floor(result.counts / spec.trials * 255.0 + 0.5).astype(np.uint8)
    pgm_path = base.with_suffix(".pgm")
    header = f"P5\n{len(spec.s_values)} {len(spec.m_values)}\n255\n"
    with open(pgm_path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(pixels.tobytes())
    return csv_path, pgm_path


def write_manifest(path, payload: dict) -> str:
    """Write a reproducibility manifest with a content hash; returns the hash."""
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    out = dict(payload)
    out["content_hash"] = digest
    Path(path).write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return digest
