"""Multipath channel: path sampling, analytic superposition, AWGN.

Each propagation path delays, Doppler-shifts, and scales the transmit
waveform.  Because the transmit model is available in closed form, a
delayed copy is evaluated analytically at the receiver's own sample
times instead of interpolating the transmit samples; sub-sample delays
are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .signal_model import (
    ConfigurationError,
    ExtendedFrame,
    GridConfig,
    SignalModelKind,
    model_waveform,
)

__all__ = [
    "Path",
    "PathSet",
    "NoiseSpec",
    "sample_paths",
    "apply_channel",
    "add_awgn",
]


@dataclass(frozen=True)
class Path:
    """One propagation path: complex gain, delay [s], Doppler shift [Hz]."""

    gain: complex
    delay: float
    doppler: float


@dataclass(frozen=True)
class PathSet:
    """Immutable collection of paths with array accessors."""

    paths: tuple

    @property
    def count(self) -> int:
        return len(self.paths)

    def gains(self) -> np.ndarray:
        return np.array([p.gain for p in self.paths], dtype=complex)

    def delays(self) -> np.ndarray:
        return np.array([p.delay for p in self.paths], dtype=float)

    def dopplers(self) -> np.ndarray:
        return np.array([p.doppler for p in self.paths], dtype=float)


@dataclass(frozen=True)
class NoiseSpec:
    """AWGN level as per-sample SNR in dB; None means noiseless."""

    snr_db: Optional[float]
    seed: int = 0


def sample_paths(rng_seed: int, count: int, cfg: GridConfig) -> PathSet:
    """Draw a random path set.

    Delays are uniform on the open interval (0, T), Dopplers uniform on
    (-1/(2T), 1/(2T)), gains standard circular complex Gaussian with
    unit mean power.
    """
    if count < 1:
        raise ConfigurationError("path count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    big_t = cfg.slot_duration
    delays = rng.uniform(0.0, big_t, size=count)
    while np.any(delays == 0.0):  # uniform() includes the left endpoint
        redraw = delays == 0.0
        delays[redraw] = rng.uniform(0.0, big_t, size=int(redraw.sum()))
    half = 1.0 / (2.0 * big_t)
    dopplers = rng.uniform(-half, half, size=count)
    gains = (rng.standard_normal(count) + 1j * rng.standard_normal(count))
    gains /= np.sqrt(2.0)
    paths = tuple(Path(complex(g), float(t), float(f))
                  for g, t, f in zip(gains, delays, dopplers))
    return PathSet(paths)


def apply_channel(tx: ExtendedFrame, paths: PathSet, cfg: GridConfig,
                  kind: SignalModelKind) -> ExtendedFrame:
    """Superpose delayed, Doppler-shifted, scaled copies of the pilot.

    r(t) = sum_p gain_p * s(t - delay_p) * exp(j 2 pi doppler_p t),
    evaluated at the extended sample grid.  The tx frame fixes the grid;
    its sample values are not touched because delayed copies come from
    the closed-form waveform.
    """
    if len(tx.samples) != cfg.extended_length:
        raise ConfigurationError(
            f"tx frame has {len(tx.samples)} samples, "
            f"config requires {cfg.extended_length}")
    if tx.origin_offset != cfg.origin_offset:
        raise ConfigurationError(
            f"tx origin {tx.origin_offset} does not match "
            f"config origin {cfg.origin_offset}")
    times = cfg.extended_times()
    out = np.zeros(cfg.extended_length, dtype=complex)
    for p in paths.paths:
        out += (p.gain * np.asarray(model_waveform(times - p.delay, cfg, kind))
                * np.exp(2j * np.pi * p.doppler * times))
    return ExtendedFrame(out, cfg.origin_offset)


def add_awgn(frame: ExtendedFrame, noise: NoiseSpec,
             cfg: GridConfig) -> ExtendedFrame:
    """Add circular complex white noise at the requested per-sample SNR.

    Signal power is the mean squared magnitude over the retained window
    t in [T, (N+1)T), so the SNR refers to the samples the estimators
    actually consume.  snr_db=None returns the frame unchanged.
    """
    if noise.snr_db is None:
        return frame
    start = cfg.origin_offset + cfg.samples_per_slot
    retained = frame.samples[start:start + cfg.retained_length]
    signal_power = float(np.mean(np.abs(retained) ** 2))
    if signal_power == 0.0:
        raise ConfigurationError("retained window has zero signal power")
    noise_power = signal_power / (10.0 ** (noise.snr_db / 10.0))
    rng = np.random.default_rng(noise.seed)
    scale = np.sqrt(noise_power / 2.0)
    w = scale * (rng.standard_normal(len(frame.samples))
                 + 1j * rng.standard_normal(len(frame.samples)))
    return ExtendedFrame(frame.samples + w, frame.origin_offset)
