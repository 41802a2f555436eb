"""Pilot-frame synthesis: delay-Doppler grid, IDZT, and transmit waveforms.

The frame geometry follows the usual OTFS convention: N time slots of
duration T, M subcarriers spaced 1/T apart.  A pilot occupying
delay-Doppler bin (0, 0) turns into an impulse train with one peak per
slot, so the transmit waveform is a periodic Dirichlet kernel (ideal
model) or a finite train of frequency-shifted sinc pulses (physical
model).  Samples are kept on an extended support of N + 1 + 2*N0 slots
so that delayed and Doppler-shifted copies stay periodic inside the
retained analysis window t in [T, (N+1)T).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConfigurationError",
    "SignalModelKind",
    "GridConfig",
    "DDGrid",
    "ExtendedFrame",
    "dirichlet_waveform",
    "shifted_sinc_pulse",
    "pilot_dd_grid",
    "idzt",
    "model_waveform",
    "transmit_samples",
]

# |sin(pi t / T)| below this switches to the removable-singularity limit.
_SINGULARITY_TOL = 1e-9


class ConfigurationError(ValueError):
    """Grid dimensions and supplied data disagree."""


class SignalModelKind(enum.Enum):
    """Transmit waveform model.

    IDEAL_PERIODIC extends the Dirichlet kernel periodically over the
    whole support; the estimation pipelines are exact for it.
    TRUNCATED_SINC is the physical finite pulse train whose truncation
    tails set the model-error floor.
    """

    IDEAL_PERIODIC = "ideal"
    TRUNCATED_SINC = "sinc"


@dataclass(frozen=True)
class GridConfig:
    """Frame geometry and oversampling factors."""

    n_slots: int                 # N time slots per frame
    n_subcarriers: int           # M subcarriers, must be even
    slot_duration: float = 1.0   # T [s]; subcarrier spacing is 1/T
    upsample_time: int = 2       # U_t samples per subcarrier interval
    upsample_freq: int = 2       # U_f frequency bins per Doppler interval
    tail_slots: int = 2          # N_0 extra slots retained on each side

    def __post_init__(self) -> None:
        if self.n_slots < 2:
            raise ConfigurationError("n_slots must be >= 2")
        if self.n_subcarriers < 2 or self.n_subcarriers % 2 != 0:
            raise ConfigurationError("n_subcarriers must be even and >= 2")
        if not self.slot_duration > 0:
            raise ConfigurationError("slot_duration must be positive")
        if self.upsample_time < 1 or self.upsample_freq < 1:
            raise ConfigurationError("upsample factors must be >= 1")
        if self.tail_slots < 1:
            raise ConfigurationError("tail_slots must be >= 1")

    @property
    def sample_interval(self) -> float:
        """Time-domain sample spacing T_s = T / (U_t * M)."""
        return self.slot_duration / (self.upsample_time * self.n_subcarriers)

    @property
    def samples_per_slot(self) -> int:
        return self.upsample_time * self.n_subcarriers

    @property
    def freq_bin(self) -> float:
        """Frequency-domain bin spacing 1 / (U_f * N * T)."""
        return 1.0 / (self.upsample_freq * self.n_slots * self.slot_duration)

    @property
    def extended_length(self) -> int:
        """Number of samples on the support t in [-N0*T, (N+1+N0)*T)."""
        return (self.n_slots + 1 + 2 * self.tail_slots) * self.samples_per_slot

    @property
    def origin_offset(self) -> int:
        """Array index of the sample at t = 0 in an extended frame."""
        return self.tail_slots * self.samples_per_slot

    @property
    def retained_length(self) -> int:
        """Number of samples in the analysis window t in [T, (N+1)T)."""
        return self.n_slots * self.samples_per_slot

    @property
    def fd_length(self) -> int:
        """Zero-padded DFT length U_f * U_t * N * M."""
        return (self.upsample_freq * self.upsample_time
                * self.n_slots * self.n_subcarriers)

    def extended_indices(self) -> np.ndarray:
        """Signed sample indices ell such that t = ell * T_s."""
        return np.arange(self.extended_length) - self.origin_offset

    def extended_times(self) -> np.ndarray:
        return self.extended_indices() * self.sample_interval


@dataclass(frozen=True)
class DDGrid:
    """N x M delay-Doppler grid (Doppler index k, delay index ell)."""

    values: np.ndarray


@dataclass(frozen=True)
class ExtendedFrame:
    """Complex samples on the extended support plus the index of t = 0."""

    samples: np.ndarray
    origin_offset: int

    def __len__(self) -> int:
        return len(self.samples)


def _check_frame(frame: ExtendedFrame, cfg: GridConfig) -> None:
    if len(frame.samples) != cfg.extended_length:
        raise ConfigurationError(
            f"frame has {len(frame.samples)} samples, "
            f"config requires {cfg.extended_length}")
    if frame.origin_offset != cfg.origin_offset:
        raise ConfigurationError(
            f"frame origin {frame.origin_offset} does not match "
            f"config origin {cfg.origin_offset}")


def dirichlet_waveform(t, cfg: GridConfig):
    """Periodic kernel sin(M pi t/T) / (T sin(pi t/T)) * exp(-j pi t/T).

    T-periodic for even M.  The removable singularity at t = q*T is
    evaluated by its limit M/T.  Accepts scalars or arrays.
    """
    t_arr = np.asarray(t, dtype=float)
    big_t = cfg.slot_duration
    m_sub = cfg.n_subcarriers
    den = np.sin(np.pi * t_arr / big_t)
    singular = np.abs(den) < _SINGULARITY_TOL
    safe_den = np.where(singular, 1.0, den)
    value = (np.sin(m_sub * np.pi * t_arr / big_t) / (big_t * safe_den)
             * np.exp(-1j * np.pi * t_arr / big_t))
    value = np.where(singular, m_sub / big_t + 0j, value)
    if value.ndim == 0:
        return complex(value)
    return value


def shifted_sinc_pulse(t, cfg: GridConfig):
    """Single-slot pulse sin(pi M t/T) / (pi t) * exp(-j pi t/T).

    Bandlimited to the M subcarriers at DFT indices -M/2 .. M/2-1, which
    centres the spectrum at -1/(2T); the t = 0 singularity evaluates to
    its limit M/T.
    """
    t_arr = np.asarray(t, dtype=float)
    big_t = cfg.slot_duration
    m_sub = cfg.n_subcarriers
    singular = np.abs(t_arr) < 1e-12 * big_t
    safe_t = np.where(singular, 1.0, t_arr)
    value = (np.sin(np.pi * m_sub * t_arr / big_t) / (np.pi * safe_t)
             * np.exp(-1j * np.pi * t_arr / big_t))
    value = np.where(singular, m_sub / big_t + 0j, value)
    if value.ndim == 0:
        return complex(value)
    return value


def pilot_dd_grid(cfg: GridConfig) -> DDGrid:
    """Unit pilot at delay-Doppler bin (0, 0), zeros elsewhere."""
    values = np.zeros((cfg.n_slots, cfg.n_subcarriers), dtype=complex)
    values[0, 0] = 1.0
    return DDGrid(values)


def idzt(grid: DDGrid, cfg: GridConfig) -> np.ndarray:
    """Inverse discrete Zak transform to serial time-domain samples.

    x[n*M + ell] = (1/N) * sum_k X[k, ell] * exp(-j 2 pi n k / N).
    """
    values = np.asarray(grid.values)
    if values.shape != (cfg.n_slots, cfg.n_subcarriers):
        raise ConfigurationError(
            f"grid shape {values.shape} does not match "
            f"({cfg.n_slots}, {cfg.n_subcarriers})")
    x = np.fft.fft(values, axis=0) / cfg.n_slots
    return x.reshape(-1)


def _sinc_pulse_train(t_arr: np.ndarray, cfg: GridConfig) -> np.ndarray:
    # One pulse per slot 0..N+1: the two extra pulses buffer the retained
    # window so its periodic structure survives delays up to T.
    # For even M all pulses share sin(pi M t/T) and exp(-j pi t/T) up to
    # (-1)^n, so the train reduces to one envelope times a reciprocal sum.
    big_t = cfg.slot_duration
    m_sub = cfg.n_subcarriers
    n_pulses = cfg.n_slots + 2
    offsets = t_arr[..., None] - np.arange(n_pulses) * big_t
    signs = np.where(np.arange(n_pulses) % 2 == 0, 1.0, -1.0)
    near = np.abs(offsets) < 1e-12 * big_t
    safe = np.where(near, 1.0, offsets)
    recip = np.where(near, 0.0, signs / (np.pi * safe)).sum(axis=-1)
    env = (np.sin(np.pi * m_sub * t_arr / big_t)
           * np.exp(-1j * np.pi * t_arr / big_t))
    value = env * recip
    # A sample sitting on a pulse centre gets that pulse's limit M/T; the
    # envelope zero already removes every other pulse there.
    return value + np.where(near.any(axis=-1), m_sub / big_t, 0.0)


def model_waveform(t, cfg: GridConfig, kind: SignalModelKind):
    """Pilot transmit waveform s(t) evaluated analytically.

    Each slot carries weight 1/N, so the ideal model is the Dirichlet
    kernel over N and the physical model is the matching pulse train.
    Accepts arbitrary (possibly off-grid) times; delays are therefore
    applied by re-evaluating this function, never by interpolation.
    """
    t_arr = np.asarray(t, dtype=float)
    if kind is SignalModelKind.IDEAL_PERIODIC:
        value = np.asarray(dirichlet_waveform(t_arr, cfg)) / cfg.n_slots
    elif kind is SignalModelKind.TRUNCATED_SINC:
        value = _sinc_pulse_train(t_arr, cfg) / cfg.n_slots
    else:  # pragma: no cover - enum is closed
        raise ConfigurationError(f"unknown signal model {kind!r}")
    if value.ndim == 0:
        return complex(value)
    return value


def transmit_samples(cfg: GridConfig, kind: SignalModelKind) -> ExtendedFrame:
    """Sample the pilot transmit waveform over the extended support."""
    samples = model_waveform(cfg.extended_times(), cfg, kind)
    return ExtendedFrame(np.asarray(samples), cfg.origin_offset)
