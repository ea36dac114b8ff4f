"""Command-line front end for reproducible recovery runs.

Commands
--------
synth       write a random instance (signal.json, observations.json)
solve       synthesize an instance, recover it, report the error
phase       success-count grid over (m, s) cells -> CSV + PGM
bench       timing ladder over the preset (n, m) rows
demo-large  the n=500, s=10, m=5000 recovery with acceleration on

Every command writes a manifest.json capturing all parameters and seeds.
Option values resolve as: built-in defaults, then --config JSON, then
TOEPSDP_* environment variables, then explicit flags. Exit codes: 0 success,
1 solver failure (divergence or no convergence), 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .admm import DivergenceError, SolverConfig, write_trace_csv
from .experiments import (
    DEFAULT_BENCH_SIZES,
    SUCCESS_THRESHOLD,
    PhaseGridSpec,
    emit_phase_plot,
    instance_from_seed,
    run_bench,
    run_phase_grid,
    run_trial,
    write_bench_csv,
    write_manifest,
)
from .signal_model import write_dense_csv

__all__ = ["RunConfig", "ConfigError", "parse_cli", "run", "main"]

ENV_PREFIX = "TOEPSDP_"

COMMANDS = ("synth", "solve", "phase", "bench", "demo-large")


class ConfigError(Exception):
    """Invalid or inconsistent run configuration (exit code 2)."""


def _parse_int_list(text: str) -> list[int]:
    """Comma-separated ints; a:b:step tokens expand to inclusive ranges."""
    values: list[int] = []
    for token in str(text).split(","):
        token = token.strip()
        if not token:
            continue
        if ":" in token:
            parts = token.split(":")
            if len(parts) not in (2, 3):
                raise ConfigError(f"bad range token {token!r} (want start:stop[:step])")
            start, stop = int(parts[0]), int(parts[1])
            step = int(parts[2]) if len(parts) == 3 else 1
            if step < 1:
                raise ConfigError(f"range step must be positive in {token!r}")
            values.extend(range(start, stop + 1, step))
        else:
            values.append(int(token))
    if not values:
        raise ConfigError(f"empty integer list {text!r}")
    return values


def _to_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot read {value!r} as a boolean")


# every overridable key with its converter from config/env text
_KEY_PARSERS = {
    "n": int,
    "s": int,
    "m": int,
    "seed": int,
    "rho": float,
    "eps_abs": float,
    "eps_rel": float,
    "max_iters": int,
    "variant": str,
    "accelerate": _to_bool,
    "trials": int,
    "m_grid": _parse_int_list,
    "s_grid": _parse_int_list,
    "jobs": int,
    "out": str,
}


@dataclass
class RunConfig:
    """Everything one run needs; serializes to JSON and back losslessly."""

    command: str
    solver: SolverConfig
    seed: int
    out: str
    n: int | None = None
    s: int | None = None
    m: int | None = None
    jobs: int = 1
    experiment: PhaseGridSpec | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.command in ("synth", "solve"):
            for name in ("n", "s", "m"):
                if getattr(self, name) is None:
                    raise ConfigError(f"command {self.command!r} requires {name}")
        if self.command == "phase" and self.experiment is None:
            raise ConfigError("command 'phase' requires a grid spec")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")

    def to_json_dict(self) -> dict:
        return {
            "command": self.command,
            "solver": dataclasses.asdict(self.solver),
            "seed": self.seed,
            "out": self.out,
            "n": self.n,
            "s": self.s,
            "m": self.m,
            "jobs": self.jobs,
            "experiment": self.experiment.to_json_dict() if self.experiment else None,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "RunConfig":
        allowed = {"command", "solver", "seed", "out", "n", "s", "m", "jobs", "experiment"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            solver = SolverConfig(**d["solver"])
        except TypeError as exc:
            raise ConfigError(f"bad solver config: {exc}") from exc
        experiment = None
        if d.get("experiment") is not None:
            try:
                experiment = PhaseGridSpec(**d["experiment"])
            except TypeError as exc:
                raise ConfigError(f"bad experiment spec: {exc}") from exc
        return cls(
            command=d["command"],
            solver=solver,
            seed=int(d["seed"]),
            out=str(d["out"]),
            n=d.get("n"),
            s=d.get("s"),
            m=d.get("m"),
            jobs=int(d.get("jobs", 1)),
            experiment=experiment,
        )


def _build_parser() -> argparse.ArgumentParser:
    solver_flags = argparse.ArgumentParser(add_help=False)
    solver_flags.add_argument("--rho", type=float, help="ADMM penalty (default 0.1)")
    solver_flags.add_argument("--eps-abs", type=float, help="absolute tolerance (default 1e-5)")
    solver_flags.add_argument("--eps-rel", type=float, help="relative tolerance (default 1e-5)")
    solver_flags.add_argument("--max-iters", type=int, help="iteration cap (default 20000)")
    solver_flags.add_argument(
        "--variant", choices=["toeplitz", "nuclear"], help="constraint set (default toeplitz)"
    )
    solver_flags.add_argument(
        "--accelerate",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="momentum with restart (default off; demo-large defaults on)",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="base seed (default 0)")
    common.add_argument("--out", help="output directory (default .)")
    common.add_argument("--config", help="JSON file of defaults; flags override it")

    parser = argparse.ArgumentParser(
        prog="toepsdp",
        description="Recover 2D spectrally sparse signals from partial samples "
        "via a Toeplitz-block trace-minimization SDP solved with ADMM.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="write a random instance to disk")
    p.add_argument("--n", type=int, help="grid side length (default 50)")
    p.add_argument("--s", type=int, help="number of sinusoids")
    p.add_argument("--m", type=int, help="number of observed entries")

    p = sub.add_parser(
        "solve", parents=[solver_flags, common], help="synthesize, recover, report"
    )
    p.add_argument("--n", type=int, help="grid side length (default 50)")
    p.add_argument("--s", type=int, help="number of sinusoids")
    p.add_argument("--m", type=int, help="number of observed entries")

    p = sub.add_parser(
        "phase", parents=[solver_flags, common], help="success-count grid over (m, s)"
    )
    p.add_argument("--n", type=int, help="grid side length (default 50)")
    p.add_argument("--trials", type=int, help="trials per cell (default 20)")
    p.add_argument("--m-grid", help="m values, e.g. 50,100,150 or 50:1250:50")
    p.add_argument("--s-grid", help="s values, e.g. 1:20")
    p.add_argument("--jobs", type=int, help="parallel trials (default: available cores)")

    p = sub.add_parser(
        "bench", parents=[solver_flags, common], help="timing ladder over preset sizes"
    )
    p.add_argument("--s", type=int, help="number of sinusoids per row (default 5)")

    sub.add_parser(
        "demo-large",
        parents=[solver_flags, common],
        help="n=500, s=10, m=5000 recovery (accelerated)",
    )
    return parser


def _merge_values(ns: argparse.Namespace) -> dict:
    """defaults < --config file < TOEPSDP_* env < explicit flags."""
    values: dict = {}
    if getattr(ns, "config", None):
        path = Path(ns.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - set(_KEY_PARSERS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key, raw in loaded.items():
            values[key] = _convert(key, raw)
    for key, parser in _KEY_PARSERS.items():
        raw = os.environ.get(ENV_PREFIX + key.upper())
        if raw is not None:
            values[key] = _convert(key, raw)
    for key in _KEY_PARSERS:
        flag_val = getattr(ns, key, None)
        if flag_val is not None:
            values[key] = _convert(key, flag_val)
    return values


def _convert(key: str, raw):
    try:
        return _KEY_PARSERS[key](raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from exc


def parse_cli(argv: list[str]) -> RunConfig:
    """Turn argv into a validated RunConfig (argparse handles usage errors)."""
    ns = _build_parser().parse_args(argv)
    values = _merge_values(ns)
    command = ns.command
    try:
        solver = SolverConfig(
            rho=values.get("rho", 0.1),
            eps_abs=values.get("eps_abs", 1e-5),
            eps_rel=values.get("eps_rel", 1e-5),
            max_iters=values.get("max_iters", 20000),
            variant=values.get("variant", "toeplitz"),
            accelerate=values.get("accelerate", command == "demo-large"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    seed = values.get("seed", 0)
    out = values.get("out", ".")
    jobs = values.get("jobs", os.cpu_count() or 1)

    n = values.get("n", 50)
    s = values.get("s")
    m = values.get("m")
    experiment = None
    if command == "phase":
        try:
            experiment = PhaseGridSpec(
                m_values=values.get("m_grid", list(range(50, 1251, 50))),
                s_values=values.get("s_grid", list(range(1, 21))),
                n=n,
                trials=values.get("trials", 20),
                base_seed=seed,
                variant=solver.variant,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    elif command == "bench":
        s = s if s is not None else 5
    elif command == "demo-large":
        n, s, m = 500, 10, 5000
    return RunConfig(
        command=command,
        solver=solver,
        seed=seed,
        out=out,
        n=n,
        s=s,
        m=m,
        jobs=jobs,
        experiment=experiment,
    )


def _run_synth(cfg: RunConfig, out: Path) -> int:
    try:
        truth, obs = instance_from_seed(cfg.n, cfg.s, cfg.m, cfg.seed)
    except (ValueError, RuntimeError) as exc:
        raise ConfigError(str(exc)) from exc
    truth.save_json(out / "signal.json")
    obs.save_json(out / "observations.json")
    write_manifest(out / "manifest.json", cfg.to_json_dict())
    print(f"wrote signal.json and observations.json to {out}")
    return 0


def _run_solve(cfg: RunConfig, out: Path) -> int:
    try:
        success, result = run_trial(cfg.n, cfg.s, cfg.m, cfg.seed, cfg.solver)
    except (ValueError, RuntimeError) as exc:
        if isinstance(exc, DivergenceError):
            print(f"solver diverged: {exc}", file=sys.stderr)
            return 1
        raise ConfigError(str(exc)) from exc
    payload = {
        "n": cfg.n,
        "s": cfg.s,
        "m": cfg.m,
        "seed": cfg.seed,
        "rel_error": result.rel_error,
        "iters": result.iters,
        "wall_time": result.wall_time,
        "converged": result.converged,
        "objective": result.objective,
        "final_r": result.final_r,
        "final_s": result.final_s,
        "success": bool(success),
        "success_threshold": SUCCESS_THRESHOLD,
    }
    (out / "result.json").write_text(json.dumps(payload, indent=2) + "\n")
    write_trace_csv(result.history, out / "trace.csv")
    write_dense_csv(result.X_rec, out / "recovered.csv")
    write_manifest(out / "manifest.json", cfg.to_json_dict())
    status = "converged" if result.converged else "did NOT converge"
    print(
        f"n={cfg.n} s={cfg.s} m={cfg.m}: rel_error={result.rel_error:.4e} "
        f"({result.iters} iters, {result.wall_time:.1f}s, {status})"
    )
    return 0 if result.converged else 1


def _run_phase(cfg: RunConfig, out: Path) -> int:
    result = run_phase_grid(cfg.experiment, cfg.solver, jobs=cfg.jobs)
    csv_path, pgm_path = emit_phase_plot(result, out / "phase")
    write_manifest(out / "manifest.json", cfg.to_json_dict())
    print(f"wrote {csv_path.name} and {pgm_path.name} to {out}")
    return 0


def _run_bench(cfg: RunConfig, out: Path) -> int:
    rows = run_bench(DEFAULT_BENCH_SIZES, s=cfg.s, cfg=cfg.solver, base_seed=cfg.seed)
    write_bench_csv(rows, out / "bench.csv")
    write_manifest(out / "manifest.json", cfg.to_json_dict())
    for r in rows:
        flag = "ok" if r.success else "FAILED"
        print(f"n={r.n:3d} m={r.m:4d}: {r.wall_time:7.3f}s rel={r.rel_error:.2e} {flag}")
    return 0


def run(cfg: RunConfig) -> int:
    """Dispatch a validated RunConfig; returns the process exit code."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.command == "synth":
        return _run_synth(cfg, out)
    if cfg.command in ("solve", "demo-large"):
        return _run_solve(cfg, out)
    if cfg.command == "phase":
        return _run_phase(cfg, out)
    if cfg.command == "bench":
        return _run_bench(cfg, out)
    raise ConfigError(f"unknown command {cfg.command!r}")


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_cli(sys.argv[1:] if argv is None else argv)
        return run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"solver diverged: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
