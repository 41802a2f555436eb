"""Generic Prony machinery: annihilating filters, rooting, mode fitting.

A length-L geometric progression x[i] = sum_p c_p z_p^i with P distinct
generators is annihilated by a monic filter of order P; its roots
recover the generators.  These helpers are shared by both estimation
pipelines, which differ only in which axis of the measurement matrix
they treat as the progression index.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DegenerateInputError",
    "InvalidRootError",
    "RootRefinementError",
    "annihilating_filter",
    "polynomial_roots",
    "phase_to_doppler",
    "phase_to_delay",
    "single_mode_ratio",
    "ls_separate",
]

# Newton polish acceptance threshold on the backward error of a root:
# |poly(z)| relative to the termwise evaluation magnitude
# sum_i |a_i| |z|^(P-i).  A root passing at tol is an exact root of a
# polynomial whose coefficients differ relatively by at most tol, which
# stays meaningful for the far-out spurious roots that max-order
# annihilators of imperfect data routinely produce.
_ROOT_RESIDUAL_TOL = 1e-6
_MAX_NEWTON_STEPS = 40


class DegenerateInputError(ValueError):
    """Input carries no usable signal (e.g. all zeros)."""


class InvalidRootError(ValueError):
    """A root has no phase (zero) where a phase is required."""


class RootRefinementError(RuntimeError):
    """Root polishing stalled above the residual tolerance.

    Carries the offending coefficient vector for post-mortems.
    """

    def __init__(self, message: str, coeffs=None):
        super().__init__(message)
        self.coeffs = None if coeffs is None else np.asarray(coeffs)


def annihilating_filter(data: np.ndarray, order: int):
    """Least-squares monic annihilating filter across many progressions.

    data has one row per window position and order+1 columns, newest
    sample first: row i of a single progression x would read
    (x[i+order], ..., x[i]).  Stacking rows from several progressions
    sharing the same generators is allowed and improves conditioning.

    Returns (coeffs, degenerate): coeffs is the monic filter
    (a_0, ..., a_order) with a_0 = 1 satisfying data @ coeffs ~= 0 in
    the least-squares sense; degenerate is True when the data is all
    zeros, in which case the filter is the trivial (1, 0, ..., 0).
    """
    data = np.asarray(data, dtype=complex)
    if data.ndim != 2 or data.shape[1] != order + 1:
        raise ValueError(
            f"data must be 2-D with {order + 1} columns, got {data.shape}")
    if data.shape[0] < 1 or order < 1:
        raise ValueError("need at least one row and order >= 1")
    coeffs = np.zeros(order + 1, dtype=complex)
    coeffs[0] = 1.0
    if not np.any(data):
        return coeffs, True
    # Rank-deficient systems fall back to the minimum-norm solution.
    tail, *_ = np.linalg.lstsq(data[:, 1:], -data[:, 0], rcond=None)
    coeffs[1:] = tail
    return coeffs, False


def _polyval_with_derivative(coeffs: np.ndarray, z: complex):
    p = 0.0 + 0.0j
    dp = 0.0 + 0.0j
    for c in coeffs:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _backward_error(coeffs: np.ndarray, mags: np.ndarray, z: complex):
    """(residual, value, derivative) of z as a root of coeffs.

    residual is |poly(z)| / sum_i |a_i| |z|^(P-i), the relative size of
    the coefficient perturbation needed to make z an exact root.
    """
    p, dp = _polyval_with_derivative(coeffs, z)
    scale = np.polyval(mags, abs(z))
    if scale == 0.0:
        return (0.0 if p == 0 else np.inf), p, dp
    return abs(p) / scale, p, dp


def _refine_root(coeffs: np.ndarray, mags: np.ndarray, z: complex):
    """Newton-polish one root, accepting only improving steps.

    Roots outside the unit circle are polished through the reversed
    polynomial at 1/z so high powers never overflow.
    """
    flip = abs(z) > 1.0
    work, wmags = (coeffs[::-1], mags[::-1]) if flip else (coeffs, mags)
    w = 1.0 / z if flip else z
    res, p, dp = _backward_error(work, wmags, w)
    for _ in range(_MAX_NEWTON_STEPS):
        if res <= _ROOT_RESIDUAL_TOL:
            break
        if abs(dp) < 1e-300:
            break
        w_new = w - p / dp
        res_new, p_new, dp_new = _backward_error(work, wmags, w_new)
        if res_new >= res:
            break
        w, res, p, dp = w_new, res_new, p_new, dp_new
    if flip and w != 0:
        return 1.0 / w, res
    return (z, res) if flip else (w, res)


def polynomial_roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots of a_0 z^P + a_1 z^(P-1) + ... + a_P, Newton-polished.

    Companion-matrix roots are refined by Newton steps that are only
    accepted while they reduce the backward error.  Raises
    RootRefinementError if a root stalls above tolerance; the exception
    carries the offending coefficient vector.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if not np.any(coeffs):
        raise DegenerateInputError("all-zero polynomial has no roots")
    roots = np.roots(coeffs)
    if len(roots) == 0:
        return roots
    mags = np.abs(coeffs)
    polished = []
    for z in roots:
        z, res = _refine_root(coeffs, mags, z)
        if res > _ROOT_RESIDUAL_TOL:
            raise RootRefinementError(
                f"root {z} stalled with backward error {res:.3e}",
                coeffs=coeffs)
        polished.append(z)
    return np.asarray(polished, dtype=complex)


def phase_to_doppler(z: complex, slot_duration: float) -> float:
    """Doppler shift from a unit-circle generator z = exp(j 2 pi f T)."""
    if z == 0:
        raise InvalidRootError("zero root has no Doppler phase")
    return float(np.angle(z) / (2.0 * np.pi * slot_duration))


def phase_to_delay(z: complex, slot_duration: float) -> float:
    """Delay in [0, T) from a generator z = exp(-j 2 pi t_d / T).

    The negative phase matches the forward-DFT sign convention of the
    frequency-domain sampling (see sampling module docstring).
    """
    if z == 0:
        raise InvalidRootError("zero root has no delay phase")
    frac = (-np.angle(z) / (2.0 * np.pi)) % 1.0
    if frac == 1.0:  # fmod rounds tiny negatives up to the excluded end
        frac = 0.0
    return float(slot_duration * frac)


def single_mode_ratio(y: np.ndarray) -> complex:
    """Least-squares one-step ratio of a single geometric progression.

    For y[i] ~= c z^i the minimizer of sum |y[i+1] - Z y[i]|^2 is
    Z = sum y[i+1] conj(y[i]) / sum |y[i]|^2.  Raises on all-zero input.
    """
    y = np.asarray(y, dtype=complex).ravel()
    if len(y) < 2:
        raise ValueError("need at least two samples for a ratio")
    den = float(np.sum(np.abs(y[:-1]) ** 2))
    if den == 0.0:
        raise DegenerateInputError("progression is identically zero")
    return complex(np.sum(y[1:] * np.conj(y[:-1])) / den)


def ls_separate(modes: np.ndarray, data: np.ndarray) -> np.ndarray:
    """Least-squares mode amplitudes: solve modes @ X ~= data.

    modes has one column per candidate mode sampled down the rows; data
    has matching rows.  Returns X with one row per mode.  Requires at
    least as many rows as modes.
    """
    modes = np.asarray(modes, dtype=complex)
    data = np.asarray(data, dtype=complex)
    if modes.shape[0] < modes.shape[1]:
        raise ValueError(
            f"underdetermined separation: {modes.shape[0]} rows for "
            f"{modes.shape[1]} modes")
    solution, *_ = np.linalg.lstsq(modes, data, rcond=None)
    return solution
