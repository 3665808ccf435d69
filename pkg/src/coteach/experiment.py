"""Monte-Carlo experiment harness: percent-correct curves with bootstrap bands.

For every interaction mode the harness runs ``runs`` independent sessions.
At each snapshot round it takes the three group episodes of that round and
records, step by step, the fraction of the group that has learned the target.
An episode that has already ended keeps its final fraction, so every curve at a
snapshot has the length of the longest episode there.

Replicas are the resampling unit of the bootstrap (groups within a replica
share the adaptive teacher's state), and a replica's value at a step is the
mean over its three groups.
"""

from __future__ import annotations

import json
import logging
import math
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import InteractionMode, run_session
from .scenario import (
    GenerationParams,
    Scenario,
    builtin_guesswho,
    generate_scenario,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
)

logger = logging.getLogger(__name__)

WORKERS_ENV = "COTEACH_WORKERS"
CSV_HEADER = "mode,snapshot_round,step,mean_pct,ci_low,ci_high"


class ConfigError(ValueError):
    """An experiment configuration is invalid."""


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    modes: tuple[InteractionMode, ...] = tuple(InteractionMode)
    runs: int = 100
    rounds: int = 41
    snapshot_rounds: tuple[int, ...] = (1, 21, 41)
    master_seed: int = 0
    bootstrap_resamples: int = 1000
    confidence: float = 0.95
    max_curve_steps: int | None = None  # None: longest episode at the snapshot
    scenario_source: object = field(default=None, compare=False)  # as written in the config file

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(InteractionMode(m) for m in self.modes))
        object.__setattr__(self, "snapshot_rounds", tuple(int(r) for r in self.snapshot_rounds))
        if not self.modes:
            raise ConfigError("modes: at least one mode is required")
        if len(set(self.modes)) != len(self.modes):
            raise ConfigError("modes: duplicate mode")
        if self.runs < 1:
            raise ConfigError(f"runs: must be at least 1, got {self.runs}")
        if self.rounds < 1:
            raise ConfigError(f"rounds: must be at least 1, got {self.rounds}")
        if not self.snapshot_rounds or any(not 1 <= r <= self.rounds for r in self.snapshot_rounds):
            raise ConfigError(f"snapshot_rounds: must be non-empty and within [1, {self.rounds}]")
        if len(set(self.snapshot_rounds)) != len(self.snapshot_rounds):
            raise ConfigError("snapshot_rounds: duplicate round")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed: must be a 64-bit unsigned integer")
        if self.bootstrap_resamples < 1:
            raise ConfigError("bootstrap_resamples: must be positive")
        if not 0.0 < self.confidence < 1.0:
            raise ConfigError("confidence: must be in (0, 1)")
        if self.max_curve_steps is not None and self.max_curve_steps < 1:
            raise ConfigError("max_curve_steps: must be positive or 'auto'")
        report = validate_scenario(self.scenario)
        if not report.ok:
            raise ConfigError(f"scenario: {report}")


_CONFIG_KEYS = {
    "scenario", "modes", "runs", "rounds", "snapshot_rounds", "master_seed",
    "bootstrap_resamples", "confidence", "max_curve_steps",
}


def _resolve_scenario(src, base_dir: Path) -> Scenario:
    if isinstance(src, str):
        return load_scenario(base_dir / src)
    if isinstance(src, dict) and set(src) == {"builtin"}:
        if src["builtin"] != "guesswho":
            raise ConfigError(f"scenario.builtin: unknown builtin {src['builtin']!r}")
        return builtin_guesswho()
    if isinstance(src, dict) and set(src) == {"generate"}:
        try:
            return generate_scenario(GenerationParams(**src["generate"]))
        except TypeError as exc:
            raise ConfigError(f"scenario.generate: {exc}") from exc
    if isinstance(src, dict):
        return scenario_from_dict(src)
    raise ConfigError("scenario: expected a file path, {'builtin': ...}, {'generate': {...}} or an inline scenario")


def config_from_dict(doc: dict, base_dir=".") -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config: expected an object")
    unknown = sorted(set(doc) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    if "scenario" not in doc:
        raise ConfigError("scenario: required")
    kwargs = {k: v for k, v in doc.items() if k != "scenario"}
    if kwargs.get("max_curve_steps") == "auto":
        kwargs["max_curve_steps"] = None
    try:
        if "modes" in kwargs:
            kwargs["modes"] = tuple(InteractionMode(m) for m in kwargs["modes"])
        scenario = _resolve_scenario(doc["scenario"], Path(base_dir))
        return ExperimentConfig(scenario=scenario, scenario_source=doc["scenario"], **kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(doc, path.parent)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "scenario": cfg.scenario_source if cfg.scenario_source is not None else scenario_to_dict(cfg.scenario),
        "modes": [m.value for m in cfg.modes],
        "runs": cfg.runs,
        "rounds": cfg.rounds,
        "snapshot_rounds": list(cfg.snapshot_rounds),
        "master_seed": cfg.master_seed,
        "bootstrap_resamples": cfg.bootstrap_resamples,
        "confidence": cfg.confidence,
        "max_curve_steps": "auto" if cfg.max_curve_steps is None else cfg.max_curve_steps,
    }


# -- bootstrap -----------------------------------------------------------------


def _nearest_rank(n: int, q: float) -> int:
    """0-based index of the nearest-rank q-quantile among n sorted values."""
    k = math.ceil(q * n - 1e-9)
    return min(max(k, 1), n) - 1


def bootstrap_columns(samples: np.ndarray, confidence: float, resamples: int, rng: np.random.Generator):
    """Percentile bootstrap CI of the mean for every column of ``samples`` (rows are units).

    Resampled rows are shared across columns. Returns ``(mean, low, high)`` arrays;
    the interval is widened if needed so it always contains the mean.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    n = samples.shape[0]
    if n == 0:
        raise ValueError("bootstrap needs at least one sample")
    mean = samples.mean(axis=0)
    idx = rng.integers(0, n, size=(resamples, n))
    boot = np.sort(samples[idx].mean(axis=1), axis=0)
    tail = (1.0 - confidence) / 2.0
    low = np.minimum(boot[_nearest_rank(resamples, tail)], mean)
    high = np.maximum(boot[_nearest_rank(resamples, 1.0 - tail)], mean)
    flat = np.ptp(samples, axis=0) == 0
    low[flat] = high[flat] = mean[flat]
    return mean, low, high


def bootstrap_ci(samples, confidence: float, resamples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Percentile (nearest-rank) bootstrap confidence interval for the mean of ``samples``."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("bootstrap needs at least one sample")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    if np.all(samples == samples[0]):
        return float(samples[0]), float(samples[0])
    _, low, high = bootstrap_columns(samples, confidence, resamples, rng)
    return float(low[0]), float(high[0])


# -- running -------------------------------------------------------------------


def replica_seed(master_seed: int, mode: InteractionMode | str, replica: int) -> np.random.SeedSequence:
    """Independent, individually reproducible stream for one replica of one mode."""
    return np.random.SeedSequence([master_seed, zlib.crc32(str(mode).encode()), replica])


def _bootstrap_seed(master_seed: int, mode: InteractionMode, snapshot: int, tag: bytes = b"bootstrap") -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed, zlib.crc32(tag), zlib.crc32(mode.value.encode()), snapshot])


@dataclass(frozen=True)
class EpisodeSummary:
    fractions: np.ndarray  # fraction learned after each step
    status: str


def _simulate_replica(args) -> dict[int, list[EpisodeSummary]]:
    scenario, mode, rounds, snapshots, master_seed, replica = args
    rng = np.random.default_rng(replica_seed(master_seed, mode, replica))
    session = run_session(scenario, mode, rounds, rng)
    return {
        k: [EpisodeSummary(ep.fractions, ep.status) for ep in session.rounds[k - 1].episodes]
        for k in snapshots
    }


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class CurvePoint:
    mode: InteractionMode
    snapshot_round: int
    step: int
    mean_pct: float
    ci_low: float
    ci_high: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    curves: list[CurvePoint]
    summary: dict
    # (mode, snapshot) -> padded fractions, shape (runs, groups, steps)
    episode_curves: dict[tuple[InteractionMode, int], np.ndarray]
    statuses: dict[tuple[InteractionMode, int], list[str]]
    elapsed_seconds: float = 0.0

    def curve(self, mode, snapshot: int) -> list[CurvePoint]:
        mode = InteractionMode(mode)
        return [c for c in self.curves if c.mode is mode and c.snapshot_round == snapshot]


def _pad(fractions: list[np.ndarray], length: int) -> np.ndarray:
    out = np.empty((len(fractions), length))
    for i, f in enumerate(fractions):
        f = f[:length]
        out[i, : f.size] = f
        out[i, f.size:] = f[-1] if f.size else 0.0
    return out


def first_step_reaching(pct: np.ndarray, threshold: float) -> int | None:
    """1-based first step at which a percent curve is at least ``threshold``."""
    hit = np.flatnonzero(np.asarray(pct) >= threshold - 1e-9)
    return int(hit[0]) + 1 if hit.size else None


def steps_to_full(padded: np.ndarray) -> np.ndarray:
    """Per-episode first step with every student learned (NaN if never)."""
    flat = padded.reshape(-1, padded.shape[-1])
    full = flat >= 1.0
    return np.where(full.any(axis=1), full.argmax(axis=1) + 1.0, np.nan)


def first_step_ci(
    result: ExperimentResult, mode, snapshot: int, threshold: float = 90.0, rng=None
) -> tuple[float, float, float]:
    """First step at which the mean curve reaches ``threshold`` percent, with a bootstrap CI.

    A curve that never reaches the threshold counts as one step past its end.
    """
    mode = InteractionMode(mode)
    cfg = result.config
    per_replica = 100.0 * result.episode_curves[mode, snapshot].mean(axis=1)
    censor = per_replica.shape[1] + 1

    def stat(curve):
        hit = first_step_reaching(curve, threshold)
        return censor if hit is None else hit

    point = stat(per_replica.mean(axis=0))
    rng = np.random.default_rng(rng if rng is not None else _bootstrap_seed(cfg.master_seed, mode, snapshot, b"first-step"))
    idx = rng.integers(0, per_replica.shape[0], size=(cfg.bootstrap_resamples, per_replica.shape[0]))
    boot = np.sort([stat(c) for c in per_replica[idx].mean(axis=1)])
    tail = (1.0 - cfg.confidence) / 2.0
    low = boot[_nearest_rank(boot.size, tail)]
    high = boot[_nearest_rank(boot.size, 1.0 - tail)]
    return float(point), float(min(low, point)), float(max(high, point))


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ExperimentResult:
    """Run every mode's replicas and aggregate the snapshot curves.

    The result depends only on ``cfg``; the worker count changes speed, not output.
    """
    workers = default_workers() if workers is None else max(1, workers)
    started = time.perf_counter()
    jobs = [
        (cfg.scenario, mode, cfg.rounds, cfg.snapshot_rounds, cfg.master_seed, r)
        for mode in cfg.modes
        for r in range(cfg.runs)
    ]
    if workers == 1:
        outputs = [_simulate_replica(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_simulate_replica, jobs, chunksize=max(1, len(jobs) // (4 * workers))))

    curves: list[CurvePoint] = []
    episode_curves = {}
    statuses = {}
    summary: dict = {}
    for mi, mode in enumerate(cfg.modes):
        replicas = outputs[mi * cfg.runs:(mi + 1) * cfg.runs]
        mode_summary = {}
        for k in cfg.snapshot_rounds:
            eps = [e for rep in replicas for e in rep[k]]
            n_groups = len(replicas[0][k])
            length = cfg.max_curve_steps or max(e.fractions.size for e in eps)
            padded = _pad([e.fractions for e in eps], length).reshape(cfg.runs, n_groups, length)
            episode_curves[mode, k] = padded
            statuses[mode, k] = [e.status for e in eps]

            per_replica = 100.0 * padded.mean(axis=1)
            rng = np.random.default_rng(_bootstrap_seed(cfg.master_seed, mode, k))
            mean, low, high = bootstrap_columns(per_replica, cfg.confidence, cfg.bootstrap_resamples, rng)
            curves.extend(
                CurvePoint(mode, k, step + 1, float(mean[step]), float(low[step]), float(high[step]))
                for step in range(length)
            )

            full = steps_to_full(padded)
            reached = ~np.isnan(full)
            f90 = first_step_reaching(mean, 90.0)
            mode_summary[str(k)] = {
                "final_pct": float(mean[-1]),
                "episodes": len(eps),
                "episodes_all_learned": int(reached.sum()),
                "mean_steps_to_all_learned": float(np.nanmean(full)) if reached.any() else None,
                "mean_episode_steps": float(np.mean([e.fractions.size for e in eps])),
                "first_step_reaching_90pct": f90,
                "statuses": {s: statuses[mode, k].count(s) for s in sorted(set(statuses[mode, k]))},
            }
        summary[mode.value] = mode_summary
    elapsed = time.perf_counter() - started
    logger.info("experiment finished in %.1fs", elapsed)
    return ExperimentResult(cfg, curves, summary, episode_curves, statuses, elapsed)


def format_curves_csv(res: ExperimentResult) -> str:
    lines = [CSV_HEADER]
    lines.extend(
        f"{c.mode.value},{c.snapshot_round},{c.step},{c.mean_pct:.6f},{c.ci_low:.6f},{c.ci_high:.6f}"
        for c in res.curves
    )
    return "\n".join(lines) + "\n"


def write_results(res: ExperimentResult, out_dir, svg: bool = True) -> list[Path]:
    """Write ``curves.csv``, ``summary.json`` and (optionally) ``curves.svg`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    csv_path = out / "curves.csv"
    csv_path.write_text(format_curves_csv(res))
    written.append(csv_path)

    summary_path = out / "summary.json"
    doc = {
        "config": config_to_dict(res.config),
        "modes": res.summary,
        "metadata": {"elapsed_seconds": round(res.elapsed_seconds, 3)},
    }
    summary_path.write_text(json.dumps(doc, indent=2) + "\n")
    written.append(summary_path)

    if svg:
        from .plotting import plot_curves

        svg_path = out / "curves.svg"
        plot_curves(csv_path, svg_path)
        written.append(svg_path)
    return written
