"""Derived measurements: reflectivity, contrast, lattice spacing, maxima tracking."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .gpe import CondensateState
from .helmholtz import FieldState

# modulation below this contrast is treated as "no lattice"
DETECTOR_FLOOR = 1e-3


def reflectivity(fields: FieldState) -> float:
    """|r|^2 of the medium: the fraction of incident power backscattered."""
    return float(abs(fields.scattering.r) ** 2)


def density_contrast(state: CondensateState) -> float:
    """(max - min)/(max + min) of the density; 0 for homogeneous, <= 1."""
    n = state.density()
    hi, lo = float(np.max(n)), float(np.min(n))
    if hi + lo == 0.0:
        return 0.0
    return (hi - lo) / (hi + lo)


def profile_contrast(profile: np.ndarray) -> float:
    hi, lo = float(np.max(profile)), float(np.min(profile))
    if hi + lo == 0.0:
        return 0.0
    return (hi - lo) / (hi + lo)


def _parabolic_offset(left: float, center: float, right: float) -> float:
    """Vertex offset in [-1/2, 1/2] of the parabola through three samples."""
    denom = left - 2.0 * center + right
    if denom == 0.0:
        return 0.0
    return float(np.clip(0.5 * (left - right) / denom, -0.5, 0.5))


def measure_lattice_spacing(profile: np.ndarray, dx: float):
    """Lattice period from the dominant nonzero spatial-frequency FFT peak.

    The peak bin is refined by a three-point parabola, which resolves spacing
    shifts far below one FFT bin for clean gratings.  Returns None when the
    profile modulation is below the detector floor or no clear peak exists.
    """
    profile = np.asarray(profile, dtype=float)
    if profile_contrast(profile) < DETECTOR_FLOOR:
        return None
    window = len(profile) * dx
    mag = np.abs(np.fft.rfft(profile - profile.mean()))
    if len(mag) < 4:
        return None
    peak = int(np.argmax(mag[1:])) + 1
    if mag[peak] <= 5.0 * np.median(mag[1:]):
        return None
    if 2 <= peak < len(mag) - 1:
        offset = _parabolic_offset(mag[peak - 1], mag[peak], mag[peak + 1])
    else:
        offset = 0.0
    q_peak = 2.0 * np.pi * (peak + offset) / window
    return float(2.0 * np.pi / q_peak)


def center_of_mass(profile: np.ndarray, x: np.ndarray) -> float:
    profile = np.asarray(profile, dtype=float)
    return float(np.sum(x * profile) / np.sum(profile))


def cyclic_shift(profile: np.ndarray, shift: float, dx: float) -> np.ndarray:
    """Evaluate the periodic trig interpolant of ``profile`` at x - shift."""
    n = len(profile)
    q = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    return np.real(np.fft.ifft(np.fft.fft(profile) * np.exp(-1j * q * shift)))


def align_translation(reference: np.ndarray, profile: np.ndarray,
                      dx: float) -> tuple[float, np.ndarray, float]:
    """Best periodic translation of ``profile`` onto ``reference``.

    Returns (shift, shifted_profile, residual) where residual is the relative
    L2 mismatch |ref - shifted| / |ref| after the optimal translation (coarse
    FFT cross-correlation peak refined by a parabola).
    """
    ref = np.asarray(reference, dtype=float)
    prof = np.asarray(profile, dtype=float)
    corr = np.fft.irfft(np.fft.rfft(ref) * np.conj(np.fft.rfft(prof)), n=len(ref))
    j = int(np.argmax(corr))
    offset = _parabolic_offset(corr[j - 1], corr[j], corr[(j + 1) % len(corr)])
    shift = (j + offset) * dx
    shifted = cyclic_shift(prof, shift, dx)
    residual = float(np.linalg.norm(ref - shifted) / np.linalg.norm(ref))
    return shift, shifted, residual


def mirror_residual(profile: np.ndarray, dx: float) -> float:
    """Relative mismatch between the profile and its best-aligned reflection."""
    prof = np.asarray(profile, dtype=float)
    reflected = np.roll(prof[::-1], 1)  # maps sample at x_j to L - x_j
    _, _, residual = align_translation(prof, reflected, dx)
    return residual


def find_profile_maxima(profile: np.ndarray, x: np.ndarray,
                        height_fraction: float = 0.1,
                        min_separation: float = 0.25) -> np.ndarray:
    """Sub-grid positions of local maxima above a fraction of the global max.

    Maxima closer than ``min_separation`` (half a vacuum lattice period by
    default) are merged, keeping the higher peak.
    """
    y = np.asarray(profile, dtype=float)
    interior = (y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])
    idx = np.nonzero(interior)[0] + 1
    idx = idx[y[idx] >= height_fraction * np.max(y)]
    if len(idx) == 0:
        return np.array([])
    dx = x[1] - x[0]
    positions, heights = [], []
    for i in idx:
        offset = _parabolic_offset(y[i - 1], y[i], y[i + 1])
        positions.append(x[i] + offset * dx)
        heights.append(y[i])
    positions = np.array(positions)
    heights = np.array(heights)
    keep_pos, keep_h = [positions[0]], [heights[0]]
    for p, h in zip(positions[1:], heights[1:]):
        if p - keep_pos[-1] < min_separation:
            if h > keep_h[-1]:
                keep_pos[-1], keep_h[-1] = p, h
        else:
            keep_pos.append(p)
            keep_h.append(h)
    return np.array(keep_pos)


@dataclass(frozen=True)
class MaximaTrajectories:
    """Linked peak positions across snapshot frames.

    ``positions[t, p]`` is the sub-grid position of peak p at ``times[t]``;
    peaks are strictly ordered in x within every frame and linked by order,
    so trajectories never cross.
    """

    times: np.ndarray
    positions: np.ndarray

    def aligned(self) -> "MaximaTrajectories":
        """Shift every trajectory so it starts at x = 0."""
        return MaximaTrajectories(times=self.times,
                                  positions=self.positions - self.positions[0])

    def mean_spacing(self) -> np.ndarray:
        """Mean nearest-neighbor spacing per frame."""
        return np.mean(np.diff(self.positions, axis=1), axis=1)


def track_intensity_maxima(times, profiles, x,
                           height_fraction: float = 0.1,
                           min_separation: float = 0.25) -> MaximaTrajectories:
    """Track total-intensity maxima across frames by ordered linking.

    If the peak count changes between frames the trajectories are truncated
    at that frame and a warning is issued.
    """
    frames = []
    kept_times = []
    expected = None
    for t, prof in zip(times, profiles):
        peaks = find_profile_maxima(prof, x, height_fraction, min_separation)
        if expected is None:
            expected = len(peaks)
        if len(peaks) != expected:
            warnings.warn(
                f"peak count changed from {expected} to {len(peaks)} at t={t:g}; "
                "trajectories truncated", stacklevel=2)
            break
        frames.append(peaks)
        kept_times.append(t)
    if not frames:
        return MaximaTrajectories(times=np.array([]), positions=np.empty((0, 0)))
    return MaximaTrajectories(times=np.array(kept_times),
                              positions=np.vstack(frames))
