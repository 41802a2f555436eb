"""Monte Carlo detection-rate study.

Each trial draws a random path set, synthesizes the received frame,
runs the configured estimation method, and greedily matches estimates
to ground truth one-to-one.  The detection rate over a scenario is
matched pairs divided by (runs * paths).

Determinism contract: every trial derives its own seeds from
(base_seed, trial_index) through a fixed mixing function, and sweep
reduces trial results in index order, so reports are byte-identical
regardless of how trials are spread over worker processes.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import NoiseSpec, PathSet, add_awgn, apply_channel, sample_paths
from .fusion import EstimateSet, EstimationMethod, FusionParams, estimate_paths
from .signal_model import (
    ConfigurationError,
    ExtendedFrame,
    GridConfig,
    SignalModelKind,
    transmit_samples,
)

__all__ = [
    "Scenario",
    "TrialResult",
    "ScenarioResult",
    "DetectionReport",
    "match_paths",
    "run_trial",
    "sweep",
]


@dataclass(frozen=True)
class Scenario:
    """One Monte Carlo configuration cell."""

    cfg: GridConfig
    path_count: int
    snr_db: Optional[float]
    runs: int = 1000
    base_seed: int = 0
    method: EstimationMethod = EstimationMethod.PARALLEL
    match_delta_t: float = 0.5   # detection radius, units of T
    match_delta_f: float = 0.5   # detection radius, units of 1/T
    model: SignalModelKind = SignalModelKind.IDEAL_PERIODIC
    fusion: FusionParams = FusionParams()

    def __post_init__(self) -> None:
        if self.path_count < 1:
            raise ConfigurationError("path_count must be >= 1")
        if self.runs < 1:
            raise ConfigurationError("runs must be >= 1")
        if not (self.match_delta_t > 0 and self.match_delta_f > 0):
            raise ConfigurationError("match radii must be positive")


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one trial; error tuples hold only matched pairs."""

    matched: int
    delay_errors: tuple          # |delay error| / T per matched pair
    doppler_errors: tuple        # |doppler error| * T per matched pair
    estimate_count: int
    failed: bool = False
    elapsed_ms: float = 0.0


@dataclass(frozen=True)
class ScenarioResult:
    scenario: Scenario
    detection_rate: float
    mean_delay_err: float        # mean |delay error| / T over matches
    mean_doppler_err: float      # mean |doppler error| * T over matches
    fail_count: int
    mean_trial_ms: float


_CSV_COLUMNS = (
    "n", "m", "model", "method", "P", "snr_db", "runs", "detection_rate",
    "mean_delay_err_over_T", "mean_doppler_err_times_T", "fail_count",
    "mean_trial_ms",
)


@dataclass(frozen=True)
class DetectionReport:
    """Per-scenario aggregates with CSV and JSON renderings."""

    results: tuple

    def _row_values(self, res: ScenarioResult):
        sc = res.scenario
        snr = "noiseless" if sc.snr_db is None else f"{sc.snr_db:g}"
        return (
            str(sc.cfg.n_slots),
            str(sc.cfg.n_subcarriers),
            sc.model.value,
            sc.method.value,
            str(sc.path_count),
            snr,
            str(sc.runs),
            f"{res.detection_rate:.6f}",
            f"{res.mean_delay_err:.9e}",
            f"{res.mean_doppler_err:.9e}",
            str(res.fail_count),
            f"{res.mean_trial_ms:.3f}",
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for res in self.results:
            writer.writerow(self._row_values(res))
        return buf.getvalue()

    def to_json(self) -> str:
        def clean(x):
            return None if isinstance(x, float) and np.isnan(x) else x

        rows = []
        for res in self.results:
            sc = res.scenario
            rows.append({
                "n": sc.cfg.n_slots,
                "m": sc.cfg.n_subcarriers,
                "model": sc.model.value,
                "method": sc.method.value,
                "P": sc.path_count,
                "snr_db": sc.snr_db,
                "runs": sc.runs,
                "detection_rate": res.detection_rate,
                "mean_delay_err_over_T": clean(res.mean_delay_err),
                "mean_doppler_err_times_T": clean(res.mean_doppler_err),
                "fail_count": res.fail_count,
                "mean_trial_ms": res.mean_trial_ms,
            })
        return json.dumps({"results": rows}, indent=2) + "\n"


def _match_with_errors(truth: np.ndarray, est: np.ndarray, dt: float,
                       df: float, slot_duration: float):
    """Greedy one-to-one matching under the normalized max distance.

    truth and est are (K, 2) arrays of (delay, doppler).  Pairs qualify
    only when both deviations are strictly inside (dt*T, df/T); the
    globally closest pair is matched first.  Returns (matched count,
    delay errors / T, doppler errors * T).
    """
    big_t = slot_duration
    if len(truth) == 0 or len(est) == 0:
        return 0, (), ()
    d_t = np.abs(truth[:, 0, None] - est[None, :, 0]) / (dt * big_t)
    d_f = np.abs(truth[:, 1, None] - est[None, :, 1]) * big_t / df
    dist = np.maximum(d_t, d_f)
    matched = 0
    delay_errs = []
    doppler_errs = []
    while dist.size and np.isfinite(dist).any():
        flat = int(np.argmin(dist))
        i, j = np.unravel_index(flat, dist.shape)
        if not dist[i, j] < 1.0:
            break
        matched += 1
        delay_errs.append(abs(truth[i, 0] - est[j, 0]) / big_t)
        doppler_errs.append(abs(truth[i, 1] - est[j, 1]) * big_t)
        dist[i, :] = np.inf
        dist[:, j] = np.inf
    return matched, tuple(delay_errs), tuple(doppler_errs)


def match_paths(truth: PathSet, est: EstimateSet, dt: float, df: float,
                slot_duration: float = 1.0) -> int:
    """Matched-pair count between ground truth and an estimate set."""
    if not (dt > 0 and df > 0):
        raise ValueError("match radii must be positive")
    truth_pairs = np.stack([truth.delays(), truth.dopplers()], axis=1)
    est_pairs = np.array([[p.delay, p.doppler] for p in est.paths],
                         dtype=float).reshape(-1, 2)
    matched, _, _ = _match_with_errors(truth_pairs, est_pairs, dt, df,
                                       slot_duration)
    return matched


@functools.lru_cache(maxsize=8)
def _cached_tx(cfg: GridConfig, kind: SignalModelKind) -> ExtendedFrame:
    # The pilot transmit frame depends only on (cfg, kind); caching it
    # saves its synthesis in every trial of a sweep.
    return transmit_samples(cfg, kind)


def run_trial(scenario: Scenario, trial_index: int,
              include_timing: bool = False) -> TrialResult:
    """One deterministic trial; raises on estimation failure."""
    if not 0 <= trial_index < scenario.runs:
        raise ValueError(f"trial_index {trial_index} outside [0, "
                         f"{scenario.runs})")
    seeds = np.random.SeedSequence(
        [scenario.base_seed, trial_index]).generate_state(2, dtype=np.uint64)
    start = time.perf_counter() if include_timing else 0.0
    paths = sample_paths(int(seeds[0]), scenario.path_count, scenario.cfg)
    tx = _cached_tx(scenario.cfg, scenario.model)
    rx = apply_channel(tx, paths, scenario.cfg, scenario.model)
    rx = add_awgn(rx, NoiseSpec(scenario.snr_db, int(seeds[1])), scenario.cfg)
    est = estimate_paths(rx, scenario.cfg, scenario.fusion, scenario.model,
                         scenario.method)
    truth_pairs = np.stack([paths.delays(), paths.dopplers()], axis=1)
    est_pairs = np.array([[p.delay, p.doppler] for p in est.paths],
                         dtype=float).reshape(-1, 2)
    matched, delay_errs, doppler_errs = _match_with_errors(
        truth_pairs, est_pairs, scenario.match_delta_t,
        scenario.match_delta_f, scenario.cfg.slot_duration)
    elapsed = (time.perf_counter() - start) * 1e3 if include_timing else 0.0
    return TrialResult(matched, delay_errs, doppler_errs, est.count,
                       failed=False, elapsed_ms=elapsed)


def _trial_task(args) -> TrialResult:
    # Module-level so ProcessPoolExecutor can pickle it.  A failing
    # trial becomes a failed record instead of poisoning the pool.
    scenario, trial_index, include_timing = args
    try:
        return run_trial(scenario, trial_index, include_timing)
    except Exception:
        return TrialResult(0, (), (), 0, failed=True, elapsed_ms=0.0)


def _aggregate(scenario: Scenario, trials, include_timing: bool
               ) -> ScenarioResult:
    matched_total = sum(t.matched for t in trials)
    delay_errs = np.concatenate(
        [np.asarray(t.delay_errors, dtype=float) for t in trials]) \
        if trials else np.zeros(0)
    doppler_errs = np.concatenate(
        [np.asarray(t.doppler_errors, dtype=float) for t in trials]) \
        if trials else np.zeros(0)
    rate = matched_total / (scenario.runs * scenario.path_count)
    mean_delay = float(np.mean(delay_errs)) if len(delay_errs) \
        else float("nan")
    mean_doppler = float(np.mean(doppler_errs)) if len(doppler_errs) \
        else float("nan")
    fail_count = sum(1 for t in trials if t.failed)
    mean_ms = (float(np.mean([t.elapsed_ms for t in trials]))
               if include_timing else 0.0)
    return ScenarioResult(scenario, rate, mean_delay, mean_doppler,
                          fail_count, mean_ms)


def sweep(scenarios, workers: Optional[int] = None,
          include_timing: bool = False) -> DetectionReport:
    """Run all scenarios and aggregate a DetectionReport.

    workers=1 runs inline; otherwise a process pool is used.  Results
    do not depend on the worker count.
    """
    scenarios = tuple(scenarios)
    if not scenarios:
        raise ValueError("at least one scenario is required")
    results = []
    for scenario in scenarios:
        tasks = [(scenario, i, include_timing) for i in range(scenario.runs)]
        if workers == 1:
            trials = [_trial_task(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                chunk = max(1, len(tasks) // (4 * (pool._max_workers or 1)))
                trials = list(pool.map(_trial_task, tasks, chunksize=chunk))
        results.append(_aggregate(scenario, trials, include_timing))
    return DetectionReport(tuple(results))
