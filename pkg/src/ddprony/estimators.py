"""The two first-stage pipelines.

Both run the same three moves on the measurement matrices, with the
roles of delay and Doppler swapped:

* root an annihilating filter across one axis (stage 1),
* least-squares-separate the per-candidate profiles along the other
  axis and demodulate the drift the stage-1 parameter leaves behind,
* transform the profile to its spectral domain and read the remaining
  parameter off consecutive in-band bin ratios (stage 2).

doppler_first roots slot progressions of the time-domain matrix and
recovers delays from subcarrier-bin ratios; delay_first roots
subcarrier progressions of the frequency-domain matrix and recovers
Dopplers from slot-bin ratios.  Each yields one candidate per root
(N-1 and M-1 respectively); fusion deduplicates later.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .prony_core import annihilating_filter, ls_separate, polynomial_roots
from .sampling import fd_col_indices, fd_row_indices
from .signal_model import GridConfig

__all__ = [
    "CandidateSource",
    "CandidateSet",
    "StageTrace",
    "inband_subcarrier_bins",
    "inband_slot_bins",
    "candidate_subcarrier_spectrum",
    "candidate_slot_profile",
    "doppler_first",
    "delay_first",
]


class CandidateSource(enum.Enum):
    DOPPLER_FIRST = "doppler-first"
    DELAY_FIRST = "delay-first"


@dataclass(frozen=True)
class CandidateSet:
    """Raw (delay, doppler) candidates from one pipeline.

    degenerate marks rank collapse somewhere along the way: all-zero
    stage-1 data, zero roots, or a dead separated profile.  Candidates
    are still returned so fusion can decide what survives.
    """

    delays: np.ndarray
    dopplers: np.ndarray
    source: CandidateSource
    degenerate: bool = field(default=False, compare=False)

    @property
    def count(self) -> int:
        return len(self.delays)

    def pairs(self) -> np.ndarray:
        """Candidates as a (count, 2) array of (delay, doppler) rows."""
        return np.stack([self.delays, self.dopplers], axis=1)


@dataclass(frozen=True)
class StageTrace:
    """Intermediate products of one pipeline run, kept for diagnostics.

    stage1_roots are the annihilator roots, separated the per-candidate
    profiles along the second axis, demodulated those profiles with the
    stage-1 drift removed, spectra their transform whose in-band bin
    ratios yield the stage-2 parameter.  Sign-convention bugs show up
    here first, as tilted in-band magnitudes or live out-of-band bins.
    """

    stage1_roots: np.ndarray
    separated: np.ndarray
    demodulated: np.ndarray
    spectra: np.ndarray


def inband_subcarrier_bins(cfg: GridConfig) -> np.ndarray:
    """Oversampled-DFT bins of subcarriers m = -M/2 .. M/2-1, in order."""
    half = cfg.n_subcarriers // 2
    return np.mod(np.arange(-half, half), cfg.samples_per_slot)


def inband_slot_bins(cfg: GridConfig) -> np.ndarray:
    """Oversampled-IDFT bins of slots n = -N/2 .. N/2-1, in order."""
    half = cfg.n_slots // 2
    return np.mod(np.arange(-half, half), cfg.upsample_freq * cfg.n_slots)


def _consecutive_bin_ratios(rows: np.ndarray):
    """Row-wise least-squares one-step ratio, 1.0 for dead rows.

    Vectorised single_mode_ratio over the rows; a row that is
    identically zero has no phase to read, so it maps to ratio 1
    (parameter zero) and raises the dead flag instead of an exception.
    """
    rows = np.asarray(rows, dtype=complex)
    num = np.sum(rows[:, 1:] * np.conj(rows[:, :-1]), axis=1)
    den = np.sum(np.abs(rows[:, :-1]) ** 2, axis=1)
    dead = den == 0.0
    ratios = np.where(dead, 1.0, num / np.where(dead, 1.0, den))
    return ratios, bool(dead.any())


def _subcarrier_stage(td: np.ndarray, cfg: GridConfig, dopplers: np.ndarray):
    dopplers = np.asarray(dopplers, dtype=float)
    slots = np.arange(cfg.n_slots)
    modes = np.exp(2j * np.pi * dopplers[None, :] * slots[:, None]
                   * cfg.slot_duration)
    separated = ls_separate(modes, td)
    offsets = np.arange(cfg.samples_per_slot)
    demod = separated * np.exp(-2j * np.pi * dopplers[:, None]
                               * offsets[None, :] * cfg.sample_interval)
    return separated, demod, np.fft.fft(demod, axis=1)


def candidate_subcarrier_spectrum(td: np.ndarray, cfg: GridConfig,
                                  dopplers: np.ndarray) -> np.ndarray:
    """Per-candidate subcarrier spectra given Doppler hypotheses.

    Separates the slot progressions exp(j 2 pi f n T) out of the
    time-domain matrix, removes each candidate's residual intra-slot
    drift exp(j 2 pi f ell T_s), and DFTs across the intra-slot offset.
    For an exact Doppler on the periodic model the result is the pilot
    comb scaled by exp(-j 2 pi m t_d / T) on in-band bins and zero
    elsewhere.  Shape (len(dopplers), U_t*M).
    """
    return _subcarrier_stage(td, cfg, dopplers)[2]


def _slot_stage(fd: np.ndarray, cfg: GridConfig, delays: np.ndarray):
    delays = np.asarray(delays, dtype=float)
    m_idx = fd_row_indices(cfg)
    modes = np.exp(-2j * np.pi * delays[None, :] * m_idx[:, None]
                   / cfg.slot_duration)
    separated = ls_separate(modes, fd)
    k_idx = fd_col_indices(cfg)
    demod = separated * np.exp(2j * np.pi * delays[:, None] * k_idx[None, :]
                               / (cfg.n_slots * cfg.slot_duration))
    bins = cfg.upsample_freq * cfg.n_slots
    profile = bins * np.fft.ifft(np.fft.ifftshift(demod, axes=1), axis=1)
    return separated, demod, profile


def candidate_slot_profile(fd: np.ndarray, cfg: GridConfig,
                           delays: np.ndarray) -> np.ndarray:
    """Per-candidate slot-domain profiles given delay hypotheses.

    Separates the subcarrier progressions exp(-j 2 pi m t_d / T) out of
    the frequency-domain matrix, removes each candidate's in-band delay
    drift across Doppler bins, and inverse-DFTs across the bins (signed
    bin k at column position k + U_f*N/2).  Each live slot sample then
    carries the candidate's Doppler progression exp(j 2 pi f n T).
    Shape (len(delays), U_f*N).
    """
    return _slot_stage(fd, cfg, delays)[2]


def doppler_first(td: np.ndarray, cfg: GridConfig):
    """Time-domain pipeline: Dopplers by rooting, delays by bin ratios.

    td is the (N, U_t*M) retained-window matrix.  Every intra-slot
    offset contributes one annihilator row, the filter order is N-1,
    and each root z gives a Doppler angle(z) / (2 pi T).  Returns
    (CandidateSet, StageTrace).
    """
    td = np.asarray(td, dtype=complex)
    if td.shape != (cfg.n_slots, cfg.samples_per_slot):
        raise ValueError(
            f"expected ({cfg.n_slots}, {cfg.samples_per_slot}) matrix, "
            f"got {td.shape}")
    data = td[::-1, :].T
    coeffs, degenerate = annihilating_filter(data, cfg.n_slots - 1)
    roots = polynomial_roots(coeffs)
    zero_roots = roots == 0
    safe = np.where(zero_roots, 1.0, roots)
    dopplers = np.angle(safe) / (2.0 * np.pi * cfg.slot_duration)
    separated, demod, spectra = _subcarrier_stage(td, cfg, dopplers)
    ratios, dead = _consecutive_bin_ratios(
        spectra[:, inband_subcarrier_bins(cfg)])
    delays = cfg.slot_duration * ((-np.angle(ratios) / (2.0 * np.pi)) % 1.0)
    candidates = CandidateSet(
        delays=delays,
        dopplers=dopplers,
        source=CandidateSource.DOPPLER_FIRST,
        degenerate=degenerate or bool(zero_roots.any()) or dead,
    )
    return candidates, StageTrace(roots, separated, demod, spectra)


def delay_first(fd: np.ndarray, cfg: GridConfig):
    """Frequency-domain pipeline: delays by rooting, Dopplers by ratios.

    fd is the (M, U_f*N) subcarrier-by-bin matrix.  Every Doppler bin
    contributes one annihilator row, the filter order is M-1, and each
    root z gives a delay T * ((-angle(z) / 2 pi) mod 1).  Returns
    (CandidateSet, StageTrace).
    """
    fd = np.asarray(fd, dtype=complex)
    expected = (cfg.n_subcarriers, cfg.upsample_freq * cfg.n_slots)
    if fd.shape != expected:
        raise ValueError(f"expected {expected} matrix, got {fd.shape}")
    data = fd[::-1, :].T
    coeffs, degenerate = annihilating_filter(data, cfg.n_subcarriers - 1)
    roots = polynomial_roots(coeffs)
    zero_roots = roots == 0
    safe = np.where(zero_roots, 1.0, roots)
    delays = cfg.slot_duration * ((-np.angle(safe) / (2.0 * np.pi)) % 1.0)
    separated, demod, profiles = _slot_stage(fd, cfg, delays)
    ratios, dead = _consecutive_bin_ratios(profiles[:, inband_slot_bins(cfg)])
    dopplers = np.angle(ratios) / (2.0 * np.pi * cfg.slot_duration)
    candidates = CandidateSet(
        delays=delays,
        dopplers=dopplers,
        source=CandidateSource.DELAY_FIRST,
        degenerate=degenerate or bool(zero_roots.any()) or dead,
    )
    return candidates, StageTrace(roots, separated, demod, profiles)
