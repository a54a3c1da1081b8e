"""Scalar Helmholtz solver for the two counterpropagating field envelopes.

Each polarization component obeys ``E'' + (2*pi)**2 (1 + chi(x)) E = 0`` with
scattering boundary conditions: the left-driven component has a prescribed
incoming amplitude on the left and is purely outgoing on the right, and
mirrored for the right-driven component.

The integrator is a fixed-step RK4 over the grid cells.  Because the equation
is linear, one RK4 step is a real 2x2 map acting on (E, E'); the solver builds
all cell maps vectorized and combines them with a logarithmic prefix scan, so
a full solve costs O(N log N) array operations instead of a Python loop.
Each cell map is projected onto det = 1 (the exact Wronskian of the continuum
flow), which makes flux conservation |r|^2 + |t|^2 = 1 hold to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericsError
from .model import K0, ModelParams, SusceptibilityProfile, drive_field_intensities


@dataclass(frozen=True)
class ScatteringCoefficients:
    """Complex reflection/transmission amplitudes for left incidence.

    Amplitudes are referenced to plane waves local to each box face.  For a
    lossless medium |r|^2 + |t|^2 = 1 up to solver roundoff; transmission is
    identical for left and right incidence (reciprocity).
    """

    r: complex
    t: complex

    @property
    def reflectance(self) -> float:
        return abs(self.r) ** 2

    @property
    def flux_defect(self) -> float:
        return abs(abs(self.r) ** 2 + abs(self.t) ** 2 - 1.0)


@dataclass(frozen=True)
class FieldState:
    """Both field envelopes on the padded grid, plus scattering data.

    In the left vacuum padding ``e_left`` is exactly an incoming plus a
    reflected plane wave, and in the right padding a single outgoing wave
    (mirrored for ``e_right``).  ``drive_left``/``drive_right`` are the
    incoming field amplitudes (square roots of the internal intensities).
    """

    grid: np.ndarray
    e_left: np.ndarray
    e_right: np.ndarray
    scattering: ScatteringCoefficients
    drive_left: float
    drive_right: float
    dx: float
    pad_points: int

    @property
    def num_cells(self) -> int:
        return len(self.grid) - 2 * self.pad_points - 1

    def box_slice(self) -> slice:
        """Slice selecting the N periodic box samples [0, L)."""
        return slice(self.pad_points, self.pad_points + self.num_cells)

    def total_intensity(self) -> np.ndarray:
        return np.abs(self.e_left) ** 2 + np.abs(self.e_right) ** 2


def _rk4_cell_maps(k2_start, k2_mid, k2_end, h: float) -> np.ndarray:
    """One-step RK4 maps for y' = [[0,1],[-k2(x),0]] y over each cell.

    The four stages collapse to closed-form entries because every stage is
    linear.  Returns an (n, 4) stack of (m00, m01, m10, m11) rows, each map
    normalized to det = 1 since the exact flow preserves the Wronskian.
    """
    a1 = np.asarray(k2_start, dtype=float)
    a2 = np.asarray(k2_mid, dtype=float)
    a3 = np.asarray(k2_end, dtype=float)
    h2 = h * h
    m = np.empty((len(a2), 4))
    m[:, 0] = 1.0 - (h2 / 6.0) * (a1 + 2.0 * a2 - 0.25 * h2 * a1 * a2)
    m[:, 1] = h * (1.0 - (h2 / 6.0) * a2)
    m[:, 2] = -(h / 6.0) * (a1 + 4.0 * a2 + a3 - 0.5 * h2 * a2 * (a1 + a3))
    m[:, 3] = 1.0 - (h2 / 6.0) * (2.0 * a2 + a3 - 0.25 * h2 * a2 * a3)
    det = m[:, 0] * m[:, 3] - m[:, 1] * m[:, 2]
    m /= np.sqrt(det)[:, None]
    return m


def _prefix_products(maps: np.ndarray) -> np.ndarray:
    """Ordered prefix products P[j] = M[j-1] @ ... @ M[0], P[0] = identity.

    Logarithmic inclusive scan: each pass multiplies every entry by the
    partial product ``step`` cells behind it.
    """
    n = len(maps)
    s = np.empty((n + 1, 4))
    s[0] = (1.0, 0.0, 0.0, 1.0)
    s[1:] = maps
    step = 1
    while step < n:
        hi, lo = s[step + 1:], s[1:-step]
        n00 = hi[:, 0] * lo[:, 0] + hi[:, 1] * lo[:, 2]
        n01 = hi[:, 0] * lo[:, 1] + hi[:, 1] * lo[:, 3]
        n10 = hi[:, 2] * lo[:, 0] + hi[:, 3] * lo[:, 2]
        n11 = hi[:, 2] * lo[:, 1] + hi[:, 3] * lo[:, 3]
        hi[:, 0], hi[:, 1], hi[:, 2], hi[:, 3] = n00, n01, n10, n11
        step *= 2
    return s


def _apply_maps(prefixes: np.ndarray, y0) -> tuple[np.ndarray, np.ndarray]:
    """(E, E') at every node for initial data y0 = (E0, E0')."""
    value = prefixes[:, 0] * y0[0] + prefixes[:, 1] * y0[1]
    slope = prefixes[:, 2] * y0[0] + prefixes[:, 3] * y0[1]
    return value, slope


def _as_matrix(row: np.ndarray) -> np.ndarray:
    return np.array([[row[0], row[1]], [row[2], row[3]]])


def _medium_cell_maps(chi: SusceptibilityProfile) -> np.ndarray:
    k2n = K0 ** 2 * (1.0 + chi.box_nodes)
    k2m = K0 ** 2 * (1.0 + chi.box_mids)
    return _rk4_cell_maps(k2n[:-1], k2m, k2n[1:], chi.dx)


def _face_coefficients(value: complex, derivative: complex,
                       k_pad: float) -> tuple[complex, complex]:
    """Decompose (E, E') into amplitudes of exp(+-i*k_pad*u) at u = 0."""
    fwd = 0.5 * (value - 1j * derivative / k_pad)
    bwd = 0.5 * (value + 1j * derivative / k_pad)
    return fwd, bwd


def integrate_helmholtz_ivp(chi: SusceptibilityProfile, initial_value: complex,
                            initial_derivative: complex,
                            direction: str = "left_to_right") -> np.ndarray:
    """Integrate the Helmholtz ODE across the full padded grid.

    One-sided data (E, E') is given at the first node in the traversal
    direction; returns E at every node of ``chi.grid`` in grid order.
    """
    pad = chi.pad_points
    k2_vac = np.full(pad, chi.pad_wavenumber ** 2)
    vac_maps_l2r = _rk4_cell_maps(k2_vac, k2_vac, k2_vac, chi.dx)
    med = _medium_cell_maps(chi)
    if direction == "left_to_right":
        maps = np.concatenate([vac_maps_l2r, med, vac_maps_l2r])
    elif direction == "right_to_left":
        k2n = K0 ** 2 * (1.0 + chi.box_nodes)
        k2m = K0 ** 2 * (1.0 + chi.box_mids)
        med_rev = _rk4_cell_maps(k2n[1:][::-1], k2m[::-1], k2n[:-1][::-1], -chi.dx)
        vac_rev = _rk4_cell_maps(k2_vac, k2_vac, k2_vac, -chi.dx)
        maps = np.concatenate([vac_rev, med_rev, vac_rev])
    else:
        raise ConfigurationError(f"unknown direction {direction!r}")
    prefixes = _prefix_products(maps)
    y0 = np.array([initial_value, initial_derivative], dtype=complex)
    field, _ = _apply_maps(prefixes, y0)
    if not np.all(np.isfinite(field)):
        raise NumericsError("Helmholtz integration produced non-finite field values")
    if direction == "right_to_left":
        field = field[::-1]
    return field


def _transfer_matrix_wave_basis(chi: SusceptibilityProfile) -> np.ndarray:
    """Map (A, B) at the left face to (C, D) at the right face.

    A, C multiply exp(+i*k*u) and B, D multiply exp(-i*k*u) with u measured
    from the respective face and k the padding-medium wavenumber.  det = 1
    for the det-normalized cell maps.
    """
    k = chi.pad_wavenumber
    p = _as_matrix(_prefix_products(_medium_cell_maps(chi))[-1])
    u = np.array([[1.0, 1.0], [1j * k, -1j * k]])
    uinv = np.array([[0.5, -0.5j / k], [0.5, 0.5j / k]])
    return uinv @ p @ u


def scattering_coefficients(chi: SusceptibilityProfile) -> ScatteringCoefficients:
    """Reflection and transmission amplitudes of the medium, left incidence."""
    m = _transfer_matrix_wave_basis(chi)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    r = -m[1, 0] / m[1, 1]
    t = det / m[1, 1]
    return ScatteringCoefficients(r=complex(r), t=complex(t))


def scattering_coefficients_ivp_oracle(chi: SusceptibilityProfile):
    """Reference R/T from two forward initial-value integrations.

    Integrates the medium from the left face for two independent initial
    conditions (pure forward and pure backward plane-wave data), decomposes
    the right-face values, and solves the linear relations between incoming
    and outgoing amplitudes.  Returns (r, t, r_right) where ``r_right`` is the
    reflection amplitude for incidence from the right.
    """
    k = chi.pad_wavenumber
    p = _as_matrix(_prefix_products(_medium_cell_maps(chi))[-1])
    out = []
    for a, b in ((1.0, 0.0), (0.0, 1.0)):
        y0 = np.array([a + b, 1j * k * (a - b)], dtype=complex)
        y1 = p @ y0
        out.append(_face_coefficients(y1[0], y1[1], k))
    (_, d1), (c2, d2) = out
    # pass 1: A=1, B=0 -> 0 = r*1 + t*d1 ; pass 2: A=0, B=1 -> 1 = t*d2
    t = 1.0 / d2
    r = -d1 / d2
    r_right = c2 / d2
    return complex(r), complex(t), complex(r_right)


def solve_driven_fields(chi: SusceptibilityProfile, params: ModelParams) -> FieldState:
    """Solve both driven envelopes for the given susceptibility profile.

    The left-driven field is obtained by prescribing purely outgoing data on
    the right face and integrating backward through the prefix maps, then
    rescaling so the incoming vacuum amplitude matches the configured drive;
    mirrored for the right-driven field.  Vacuum padding is filled with the
    exact plane-wave decomposition.
    """
    i_left, i_right = drive_field_intensities(params)
    amp_left, amp_right = np.sqrt(i_left), np.sqrt(i_right)
    k = chi.pad_wavenumber
    prefixes = _prefix_products(_medium_cell_maps(chi))
    p_total = _as_matrix(prefixes[-1])
    # det-normalized: exact 2x2 inverse
    p_inv = np.array([[p_total[1, 1], -p_total[0, 1]],
                      [-p_total[1, 0], p_total[0, 0]]])

    pad = chi.pad_points
    n = chi.num_cells
    length = chi.box_length
    x = chi.grid
    x_left, x_right = x[:pad], x[pad + n + 1:]

    # left-driven: outgoing (1, i*k) at the right face
    y_end = np.array([1.0, 1j * k])
    y0 = p_inv @ y_end
    values_l, _ = _apply_maps(prefixes, y0)
    a_in, b_out = _face_coefficients(y0[0], y0[1], k)
    if abs(a_in) < 1e-300:
        raise NumericsError("vanishing incoming amplitude in field decomposition")
    scale_l = amp_left / a_in if amp_left > 0 else 0.0
    e_left = np.empty(len(x), dtype=complex)
    e_left[:pad] = scale_l * (a_in * np.exp(1j * k * x_left)
                              + b_out * np.exp(-1j * k * x_left))
    e_left[pad:pad + n + 1] = scale_l * values_l
    e_left[pad + n + 1:] = scale_l * np.exp(1j * k * (x_right - length))

    # right-driven: outgoing (1, -i*k) at the left face
    y0r = np.array([1.0, -1j * k])
    values_r, slopes_r = _apply_maps(prefixes, y0r)
    c_out, d_in = _face_coefficients(values_r[-1], slopes_r[-1], k)
    if abs(d_in) < 1e-300:
        raise NumericsError("vanishing incoming amplitude in field decomposition")
    scale_r = amp_right / d_in if amp_right > 0 else 0.0
    e_right = np.empty(len(x), dtype=complex)
    e_right[:pad] = scale_r * np.exp(-1j * k * x_left)
    e_right[pad:pad + n + 1] = scale_r * values_r
    e_right[pad + n + 1:] = scale_r * (c_out * np.exp(1j * k * (x_right - length))
                                       + d_in * np.exp(-1j * k * (x_right - length)))

    if not (np.all(np.isfinite(e_left)) and np.all(np.isfinite(e_right))):
        raise NumericsError("field solve produced non-finite values")

    scattering = ScatteringCoefficients(r=complex(b_out / a_in),
                                        t=complex(1.0 / a_in))
    return FieldState(grid=x, e_left=e_left, e_right=e_right,
                      scattering=scattering, drive_left=float(amp_left),
                      drive_right=float(amp_right), dx=chi.dx, pad_points=pad)
