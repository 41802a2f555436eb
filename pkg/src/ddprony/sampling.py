"""Window extraction and the two measurement matrices.

Time-domain matrix: the retained window t in [T, (N+1)T) reshaped to
one row per slot, so each column walks a fixed intra-slot offset across
slots and carries a pure Doppler progression per path.

Frequency-domain matrix: samples of the frame's discrete-time Fourier
transform on a grid of U_f*N bins per subcarrier spacing, folded to one
row per subcarrier, so each row walks Doppler bins within one
subcarrier band and carries a pure delay progression per path.

Sign convention: the forward transform here uses the engineering DFT
kernel exp(-j 2 pi k ell / Lambda).  With this choice a path delayed by
t_d contributes the subcarrier progression exp(-j 2 pi m t_d / T), and
first-stage roots of the delay pipeline map to delays via the NEGATIVE
phase (see prony_core.phase_to_delay), while Doppler progressions keep
the positive phase in both pipelines.  Flipping the sign mirrors every
estimated delay to T - t_d.
"""

from __future__ import annotations

import numpy as np

from .signal_model import ConfigurationError, ExtendedFrame, GridConfig

__all__ = [
    "retained_td_matrix",
    "fd_samples",
    "fd_matrix",
    "fd_row_indices",
    "fd_col_indices",
]


def _check_frame(frame: ExtendedFrame, cfg: GridConfig) -> None:
    if len(frame.samples) != cfg.extended_length:
        raise ConfigurationError(
            f"frame has {len(frame.samples)} samples, "
            f"config requires {cfg.extended_length}")
    if frame.origin_offset != cfg.origin_offset:
        raise ConfigurationError(
            f"frame origin {frame.origin_offset} does not match "
            f"config origin {cfg.origin_offset}")


def retained_td_matrix(frame: ExtendedFrame, cfg: GridConfig) -> np.ndarray:
    """Slot-by-offset matrix of the retained window, shape (N, U_t*M).

    Row n holds the samples of slot n+1, i.e. entry (n, ell) is
    r((n+1)T + ell*T_s).  Relabeling the window start as time zero moves
    a factor exp(j 2 pi f_D T) per path into its effective gain but
    leaves delays untouched (the window is one period inside the frame).
    """
    _check_frame(frame, cfg)
    start = cfg.origin_offset + cfg.samples_per_slot
    retained = frame.samples[start:start + cfg.retained_length]
    return retained.reshape(cfg.n_slots, cfg.samples_per_slot)


def fd_samples(frame: ExtendedFrame, cfg: GridConfig) -> np.ndarray:
    """Frequency grid R[k] = T_s * sum_ell r[ell] exp(-j 2 pi k ell / Lambda).

    ell is the signed sample index (t = ell*T_s) over the whole extended
    support and Lambda = U_f*U_t*N*M, giving bin spacing 1/(U_f*N*T).
    Implemented by placing sample ell at position ell mod Lambda in a
    zero-padded buffer; Lambda exceeds the extended length, so no
    samples collide.
    """
    _check_frame(frame, cfg)
    lam = cfg.fd_length
    if cfg.extended_length > lam:
        raise ConfigurationError(
            "extended support exceeds the DFT length; increase upsampling "
            "or reduce tail_slots")
    buf = np.zeros(lam, dtype=complex)
    idx = np.mod(cfg.extended_indices(), lam)
    buf[idx] = frame.samples
    return cfg.sample_interval * np.fft.fft(buf)


def fd_row_indices(cfg: GridConfig) -> np.ndarray:
    """Signed subcarrier indices m = -M/2 .. M/2 - 1."""
    half = cfg.n_subcarriers // 2
    return np.arange(-half, half)


def fd_col_indices(cfg: GridConfig) -> np.ndarray:
    """Signed Doppler-bin offsets k = -U_f*N/2 .. U_f*N/2 - 1."""
    half = cfg.upsample_freq * cfg.n_slots // 2
    return np.arange(-half, half)


def fd_matrix(frame: ExtendedFrame, cfg: GridConfig) -> np.ndarray:
    """Subcarrier-by-Doppler-bin matrix, shape (M, U_f*N).

    Entry (i, j) is the frequency sample at m_i / T + k_j / (U_f*N*T)
    where m_i and k_j are the signed indices from fd_row_indices and
    fd_col_indices, i.e. bin m_i * U_f*N + k_j of fd_samples (mod
    Lambda).  Each row spans one subcarrier band.
    """
    fd = fd_samples(frame, cfg)
    m_idx = fd_row_indices(cfg)
    k_idx = fd_col_indices(cfg)
    bins = np.mod(m_idx[:, None] * (cfg.upsample_freq * cfg.n_slots)
                  + k_idx[None, :], cfg.fd_length)
    return fd[bins]
