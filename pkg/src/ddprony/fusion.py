"""Candidate fusion: merge near-duplicates, fit gains, prune ghosts.

The two pipelines each emit a full slate of candidates, most of which
are spurious.  Fusion pools them, repeatedly averages the closest pair
that falls inside the merge radii, least-squares-fits complex gains for
the survivors against the raw received frame, and discards candidates
whose fitted gain is negligible relative to the strongest one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import Path
from .estimators import CandidateSet, delay_first, doppler_first
from .sampling import fd_matrix, retained_td_matrix
from .signal_model import (
    ConfigurationError,
    ExtendedFrame,
    GridConfig,
    SignalModelKind,
    model_waveform,
)

__all__ = [
    "FusionParams",
    "EstimationMethod",
    "EstimateSet",
    "merge_candidates",
    "amplitude_fit",
    "prune",
    "estimate_paths",
    "parallel_estimate",
]

# Normalized pair distances closer than this are treated as tied and
# broken lexicographically, keeping the merge order (and therefore the
# result) independent of input permutation and of float rounding noise.
_TIE_TOL = 1e-9

_ILL_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class FusionParams:
    """Merge radii and prune threshold.

    delta_t and delta_f are merge radii as fractions of the delay range
    T and the Doppler range 1/T; a zero radius disables merging on both
    axes because the pair distance is their maximum.  delta_alpha is
    the relative gain magnitude below which a candidate is pruned.
    """

    delta_t: float = 0.1
    delta_f: float = 0.1
    delta_alpha: float = 0.01

    def __post_init__(self) -> None:
        if not 0.0 <= self.delta_t < 0.5:
            raise ConfigurationError("delta_t must be in [0, 0.5)")
        if not 0.0 <= self.delta_f < 0.5:
            raise ConfigurationError("delta_f must be in [0, 0.5)")
        if not 0.0 <= self.delta_alpha < 1.0:
            raise ConfigurationError("delta_alpha must be in [0, 1)")


class EstimationMethod(enum.Enum):
    DOPPLER_FIRST = "doppler-first"
    DELAY_FIRST = "delay-first"
    PARALLEL = "parallel"


@dataclass(frozen=True)
class EstimateSet:
    """Final fused estimates plus bookkeeping flags."""

    paths: tuple
    pre_prune_count: int = 0
    ill_conditioned: bool = False

    @property
    def count(self) -> int:
        return len(self.paths)


def _as_pairs(candidates) -> np.ndarray:
    if candidates is None:
        return np.zeros((0, 2), dtype=float)
    if isinstance(candidates, CandidateSet):
        return candidates.pairs()
    arr = np.asarray(candidates, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"candidates must be (K, 2), got {arr.shape}")
    return arr


def _pair_distance(a, b, params: FusionParams, slot_duration: float) -> float:
    dt = abs(a[0] - b[0])
    df = abs(a[1] - b[1])
    comp_t = dt / (params.delta_t * slot_duration) if params.delta_t > 0 \
        else np.inf
    comp_f = df * slot_duration / params.delta_f if params.delta_f > 0 \
        else np.inf
    return max(comp_t, comp_f)


def merge_candidates(first, second=None, params: FusionParams = None,
                     slot_duration: float = 1.0) -> np.ndarray:
    """Pool candidates and merge closest qualifying pairs to midpoints.

    A pair qualifies when both its delay gap and its Doppler gap are
    strictly inside the merge radii (normalized max distance < 1).
    The closest qualifying pair is replaced by its midpoint, which
    re-enters the pool, until nothing qualifies.  Distances tied within
    a small tolerance are broken by the lexicographically smallest
    (midpoint, endpoints) key so the outcome does not depend on input
    order.  Returns the surviving (K, 2) array of (delay, doppler).
    """
    if params is None:
        params = FusionParams()
    pool = [tuple(row) for row in _as_pairs(first)]
    pool += [tuple(row) for row in _as_pairs(second)]
    while len(pool) >= 2:
        best = None
        best_key = None
        best_dist = np.inf
        for i in range(len(pool)):
            for j in range(i + 1, len(pool)):
                dist = _pair_distance(pool[i], pool[j], params, slot_duration)
                if dist >= 1.0:
                    continue
                lo, hi = sorted((pool[i], pool[j]))
                mid = ((lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0)
                key = (mid, lo, hi)
                if (dist < best_dist - _TIE_TOL
                        or (dist < best_dist + _TIE_TOL
                            and (best_key is None or key < best_key))):
                    best = (i, j)
                    best_key = key
                    best_dist = min(best_dist, dist)
        if best is None:
            break
        i, j = best
        mid = best_key[0]
        pool = [p for k, p in enumerate(pool) if k not in (i, j)]
        pool.append(mid)
    if not pool:
        return np.zeros((0, 2), dtype=float)
    return np.asarray(pool, dtype=float)


def amplitude_fit(theta: np.ndarray, rx: ExtendedFrame, cfg: GridConfig,
                  kind: SignalModelKind):
    """Least-squares complex gains for candidate (delay, doppler) pairs.

    Regressor k is the model waveform delayed and Doppler-shifted by
    candidate k, sampled over the full extended support.  Returns
    (gains, ill_conditioned); the flag is set when the regressor
    matrix's singular value spread exceeds 1e12 (near-collinear
    candidates), in which case the minimum-norm solution is returned.
    """
    theta = _as_pairs(theta)
    if len(theta) == 0:
        return np.zeros(0, dtype=complex), False
    times = cfg.extended_times()
    columns = [
        np.asarray(model_waveform(times - delay, cfg, kind))
        * np.exp(2j * np.pi * doppler * times)
        for delay, doppler in theta
    ]
    design = np.stack(columns, axis=1)
    gains, _, _, sv = np.linalg.lstsq(design, rx.samples, rcond=None)
    if sv[-1] == 0.0 or sv[0] / sv[-1] > _ILL_CONDITION_LIMIT:
        ill = True
    else:
        ill = False
    return gains, ill


def prune(theta: np.ndarray, gains: np.ndarray, params: FusionParams):
    """Drop candidates with relatively negligible fitted gains.

    Keeps entries with |gain| >= delta_alpha * max |gain|.  An all-zero
    gain vector keeps nothing.  Returns (theta_kept, gains_kept).
    """
    theta = _as_pairs(theta)
    gains = np.asarray(gains, dtype=complex)
    if len(theta) != len(gains):
        raise ValueError("theta and gains must have matching lengths")
    if len(gains) == 0:
        return theta, gains
    mags = np.abs(gains)
    strongest = float(mags.max())
    if strongest == 0.0:
        return theta[:0], gains[:0]
    keep = mags >= params.delta_alpha * strongest
    return theta[keep], gains[keep]


def estimate_paths(rx: ExtendedFrame, cfg: GridConfig,
                   params: FusionParams = None,
                   kind: SignalModelKind = SignalModelKind.IDEAL_PERIODIC,
                   method: EstimationMethod = EstimationMethod.PARALLEL,
                   ) -> EstimateSet:
    """Full receiver chain: pipelines, merge, gain fit, prune, refit.

    PARALLEL runs both pipelines and fuses their pooled candidates;
    the single-pipeline methods fuse their own slate (within-slate
    merging still applies).  Gains are fitted once for pruning and
    refitted on the survivors, so reported gains are not diluted by
    the pruned ghosts; the survivor set itself is fixed by the first
    fit.
    """
    if params is None:
        params = FusionParams()
    first = second = None
    if method in (EstimationMethod.DOPPLER_FIRST, EstimationMethod.PARALLEL):
        first, _ = doppler_first(retained_td_matrix(rx, cfg), cfg)
    if method in (EstimationMethod.DELAY_FIRST, EstimationMethod.PARALLEL):
        second, _ = delay_first(fd_matrix(rx, cfg), cfg)
    if first is None:
        first, second = second, None
    merged = merge_candidates(first, second, params,
                              slot_duration=cfg.slot_duration)
    gains, ill_first = amplitude_fit(merged, rx, cfg, kind)
    kept_theta, kept_gains = prune(merged, gains, params)
    ill_refit = False
    if len(kept_theta) and len(kept_theta) < len(merged):
        kept_gains, ill_refit = amplitude_fit(kept_theta, rx, cfg, kind)
    paths = tuple(
        Path(complex(g), float(t), float(f))
        for g, (t, f) in zip(kept_gains, kept_theta)
    )
    return EstimateSet(
        paths=paths,
        pre_prune_count=len(merged),
        ill_conditioned=ill_first or ill_refit,
    )


def parallel_estimate(rx: ExtendedFrame, cfg: GridConfig,
                      params: FusionParams = None,
                      kind: SignalModelKind = SignalModelKind.IDEAL_PERIODIC,
                      ) -> EstimateSet:
    """Both pipelines fused; the headline method."""
    return estimate_paths(rx, cfg, params, kind, EstimationMethod.PARALLEL)
