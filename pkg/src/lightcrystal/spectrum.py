"""Collective excitation spectra below and above the crystallization threshold.

Below threshold the homogeneous state admits a closed-form Bogoliubov-type
dispersion with a light-induced term that diverges at the backscattering
momentum 2*k_eff (:func:`homogeneous_dispersion`).  Above threshold the
coupled equations are linearized about the crystalline stationary state; the
fields respond instantaneously, so the fluctuation of each envelope is the
formal inverse of the stationary Helmholtz operator applied to the density
fluctuation source.  Eliminating the field fluctuations leaves a dense
2M x 2M Bogoliubov matrix over the discrete momentum grid dq = 2*pi/L:

    i d/dt (u, v) = [[D, O], [-P O* P, -P D* P]] (u, v)

with D = T + conv(V_ext - I_tot) + 2 g conv(n0) + A - mu and
O = g conv(psi0^2) + A', where A, A' are the light-coupling blocks built from
multiplication operators sandwiched around the inverse Helmholtz operator Q,
and P is momentum reflection q -> -q.

Translation invariance is broken above threshold, so modes are labeled by
q_max, the momentum of the largest eigenvector component.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, NumericsError
from .gpe import CondensateState, chemical_potential_and_residual
from .helmholtz import FieldState
from .model import (K0, ModelParams, drive_field_intensities,
                    effective_wavenumber)

DEFAULT_Q_CUTOFF = 8.0 * np.pi  # four recoil momenta
_POLE_TOL = 1e-9
_PINV_RCOND = 1e-10


def _equal_drive_intensity(params: ModelParams) -> float:
    if not np.isclose(params.intensity_left, params.intensity_right,
                      rtol=1e-12, atol=0.0):
        raise ConfigurationError(
            "homogeneous-phase spectrum assumes equal drive intensities")
    return params.intensity_left


def homogeneous_dispersion(params: ModelParams, q):
    """Excitation energy omega(q) of the homogeneous phase, in recoil units.

    Returns a complex scalar/array: purely real below threshold, purely
    imaginary where omega^2 < 0 (the unstable roton window).  Diverges at the
    backscattering momentum q = +-2*k_eff, where a ValueError is raised.
    """
    q = np.asarray(q, dtype=float)
    _equal_drive_intensity(params)
    bare = drive_field_intensities(params)[0]  # |E0|^2 per beam
    length = params.box_length
    n0 = 1.0 / length
    k_eff = effective_wavenumber(params, n0)
    denom = q ** 2 - 4.0 * k_eff ** 2
    if np.any(np.abs(denom) < _POLE_TOL):
        raise ValueError("dispersion pole: q coincides with +-2*k_eff")
    kinetic = (q / K0) ** 2
    light = -8.0 * K0 ** 2 * params.zeta * bare / (length * denom)
    omega_sq = kinetic * (kinetic + 2.0 * params.g_interaction * n0 + light)
    omega = np.where(omega_sq >= 0.0,
                     np.sqrt(np.abs(omega_sq)) + 0.0j,
                     1j * np.sqrt(np.abs(omega_sq)))
    return omega if omega.ndim else complex(omega)


@dataclass(frozen=True)
class LinearizationMatrix:
    """Assembled Bogoliubov matrix over the momentum grid dq = 2*pi/L."""

    q_grid: np.ndarray
    matrix: np.ndarray
    mu: float
    k_eff: float
    d_block: np.ndarray = field(repr=False)
    o_block: np.ndarray = field(repr=False)
    a_block: np.ndarray = field(repr=False)

    @property
    def num_modes(self) -> int:
        return len(self.q_grid)


def momentum_grid(params: ModelParams, q_cutoff: float) -> np.ndarray:
    """Symmetric grid of multiples of dq = 2*pi/L with |q| <= q_cutoff."""
    dq = 2.0 * np.pi / params.box_length
    m_cut = int(round(q_cutoff / dq))
    if m_cut < 1:
        raise ConfigurationError("q_cutoff must cover at least one momentum step")
    if 4 * m_cut + 1 > params.num_points:
        raise ConfigurationError(
            f"q_cutoff needs Fourier coefficients up to index {2 * m_cut}: "
            f"increase grid_points_per_wavelength (have {params.num_points} points)")
    return dq * np.arange(-m_cut, m_cut + 1)


def _parity_conj(block: np.ndarray) -> np.ndarray:
    """P X* P: conjugate and reflect both momentum indices q -> -q."""
    return np.conj(block[::-1, ::-1])


def _assemble(d_block: np.ndarray, o_block: np.ndarray) -> np.ndarray:
    return np.block([[d_block, o_block],
                     [-_parity_conj(o_block), -_parity_conj(d_block)]])


def _multiplication_matrix(values: np.ndarray, m_indices: np.ndarray) -> np.ndarray:
    """Momentum-space matrix of multiplication by a box-periodic function.

    Entry (a, b) is the Fourier coefficient of ``values`` at momentum index
    m_a - m_b (coefficients taken as fft/N, i.e. (1/L) * integral f e^{-iqx}).
    """
    coeffs = np.fft.fft(values) / len(values)
    diff = (m_indices[:, None] - m_indices[None, :]) % len(values)
    return coeffs[diff]


def build_linearization_matrix(state: CondensateState, fields: FieldState,
                               params: ModelParams,
                               q_cutoff: float = DEFAULT_Q_CUTOFF,
                               residual_warn: float = 1e-4) -> LinearizationMatrix:
    """Linearize the coupled equations about a stationary (state, fields) pair.

    All position-dependent inputs are turned into momentum-space
    multiplication operators via FFT of their box samples; the field
    fluctuations are eliminated with a dense solve against the stationary
    Helmholtz operator Q = -q^2 + conv((2*pi)^2 (1 + zeta n0)).
    """
    q = momentum_grid(params, q_cutoff)
    dq = 2.0 * np.pi / params.box_length
    m_idx = np.rint(q / dq).astype(int)

    psi = state.psi
    sl = fields.box_slice()
    e_fields = (fields.e_left[sl], fields.e_right[sl])
    intensity_tot = np.abs(e_fields[0]) ** 2 + np.abs(e_fields[1]) ** 2
    static_potential = params.external_potential() - intensity_tot
    mu, residual = chemical_potential_and_residual(state, static_potential, params)
    if residual > residual_warn:
        warnings.warn(f"linearizing about a state with stationarity residual "
                      f"{residual:.2e}", stacklevel=2)

    density = np.abs(psi) ** 2
    g = params.g_interaction
    keff2_x = K0 ** 2 * (1.0 + params.zeta * density)
    q_op = -np.diag(q.astype(complex) ** 2) + _multiplication_matrix(keff2_x, m_idx)

    singular = False
    try:
        lu = scipy.linalg.lu_factor(q_op)
        probe = scipy.linalg.lu_solve(lu, np.eye(len(q), dtype=complex)[:, :1])
        singular = not np.all(np.isfinite(probe))
    except np.linalg.LinAlgError:
        singular = True
    if singular:
        # grid momentum resonant with the medium wavenumber: regularized inverse
        warnings.warn("stationary Helmholtz operator near-singular; using "
                      f"pseudoinverse with rcond={_PINV_RCOND}", stacklevel=2)
        q_pinv = np.linalg.pinv(q_op, rcond=_PINV_RCOND)
        solve = q_pinv.__matmul__
    else:
        solve = lambda rhs: scipy.linalg.lu_solve(lu, rhs)  # noqa: E731

    coupling = K0 ** 2 * params.zeta
    a_block = np.zeros((len(q), len(q)), dtype=complex)
    a_block_anom = np.zeros_like(a_block)
    for e_sigma in e_fields:
        m1 = _multiplication_matrix(np.conj(psi) * e_sigma, m_idx)
        m2 = _multiplication_matrix(psi * e_sigma, m_idx)
        m1h, m2h = m1.conj().T, m2.conj().T
        q_m1, q_m2 = solve(m1), solve(m2)
        q_m1h, q_m2h = solve(m1h), solve(m2h)
        a_block += coupling * (m1h @ q_m1 + m2 @ q_m2h)
        a_block_anom += coupling * (m1h @ q_m2 + m2 @ q_m1h)

    kinetic = np.diag((q / K0) ** 2).astype(complex)
    d_block = (kinetic + _multiplication_matrix(static_potential, m_idx)
               + 2.0 * g * _multiplication_matrix(density, m_idx)
               + a_block - mu * np.eye(len(q)))
    o_block = g * _multiplication_matrix(psi ** 2, m_idx) + a_block_anom

    k_eff = effective_wavenumber(params, 1.0 / params.box_length)
    return LinearizationMatrix(q_grid=q, matrix=_assemble(d_block, o_block),
                               mu=mu, k_eff=k_eff, d_block=d_block,
                               o_block=o_block, a_block=a_block)


def build_homogeneous_matrix(params: ModelParams,
                             q_cutoff: float = DEFAULT_Q_CUTOFF,
                             field_wavenumber: float | None = None) -> LinearizationMatrix:
    """Linearization matrix for the idealized homogeneous stationary state.

    The plane-wave fields C exp(+-i k x) are handled analytically, so the
    matrix is exactly diagonal per momentum and valid for the off-grid medium
    wavenumber k_eff; its eigenvalues reproduce the closed-form dispersion.
    ``field_wavenumber`` overrides the field phase wavenumber (used to
    cross-validate the generic FFT assembly with on-grid plane waves).
    """
    _equal_drive_intensity(params)
    bare = drive_field_intensities(params)[0]
    length = params.box_length
    n0 = 1.0 / length
    g = params.g_interaction
    k_eff = effective_wavenumber(params, n0)
    q = momentum_grid(params, q_cutoff)

    if field_wavenumber is None:
        # exact stationary phase: the two response denominators combine into
        # a single pole-free kernel away from |q| = 2 k_eff
        denom = q ** 2 - 4.0 * k_eff ** 2
        if np.any(np.abs(denom) < _POLE_TOL):
            raise ConfigurationError("grid momentum exactly at the 2*k_eff pole")
        kernel = -2.0 / denom
    else:
        kbar = float(field_wavenumber)
        d_plus = k_eff ** 2 - (q + kbar) ** 2
        d_minus = k_eff ** 2 - (q - kbar) ** 2
        if np.any(np.abs(d_plus) < _POLE_TOL) or np.any(np.abs(d_minus) < _POLE_TOL):
            raise ConfigurationError("field wavenumber resonant with a grid momentum")
        kernel = 1.0 / d_plus + 1.0 / d_minus
    a_diag = 2.0 * K0 ** 2 * params.zeta * (bare / length) * kernel

    mu = g * n0 - 2.0 * bare
    kinetic = (q / K0) ** 2
    d_diag = kinetic - 2.0 * bare + 2.0 * g * n0 + a_diag - mu
    o_diag = g * n0 + a_diag
    d_block = np.diag(d_diag.astype(complex))
    o_block = np.diag(o_diag.astype(complex))
    a_block = np.diag(a_diag.astype(complex))
    return LinearizationMatrix(q_grid=q, matrix=_assemble(d_block, o_block),
                               mu=mu, k_eff=k_eff, d_block=d_block,
                               o_block=o_block, a_block=a_block)


@dataclass(frozen=True)
class ExcitationModes:
    """Eigenmodes sorted by q_max, the momentum of the largest component."""

    omega: np.ndarray
    q_max: np.ndarray
    vectors: np.ndarray  # columns, concatenated (u, v) halves
    q_grid: np.ndarray
    k_eff: float
    mu: float

    def momentum_distribution(self, index: int):
        """(q_grid, |u|^2, |v|^2) for one mode."""
        m = len(self.q_grid)
        vec = self.vectors[:, index]
        return self.q_grid, np.abs(vec[:m]) ** 2, np.abs(vec[m:]) ** 2

    def table(self) -> np.ndarray:
        """(q_max, Re omega, Im omega) rows, the tabular output format."""
        return np.column_stack([self.q_max, self.omega.real, self.omega.imag])


def diagonalize_and_classify(lin: LinearizationMatrix) -> ExcitationModes:
    """Full non-Hermitian eigendecomposition with q_max labels.

    Modes are sorted by (q_max, Re omega).  The spectrum is closed under
    omega -> -omega* by the Bogoliubov pairing of the (psi, psi*) spinor.
    """
    try:
        omega, vectors = scipy.linalg.eig(lin.matrix)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        norm = float(np.linalg.norm(lin.matrix))
        raise NumericsError(
            f"eigensolver failed on {lin.matrix.shape[0]}x{lin.matrix.shape[1]} "
            f"matrix with Frobenius norm {norm:.3e}") from exc
    m = len(lin.q_grid)
    peak = np.argmax(np.abs(vectors), axis=0)
    q_max = np.abs(lin.q_grid[peak % m])
    order = np.lexsort((omega.imag, omega.real, q_max))
    return ExcitationModes(omega=omega[order], q_max=q_max[order],
                           vectors=vectors[:, order], q_grid=lin.q_grid,
                           k_eff=lin.k_eff, mu=lin.mu)


def phonon_gap(modes: ExcitationModes, omega_floor: float = 1e-3):
    """Smallest excitation energy among lattice-phonon modes (q_max > 2 k_eff).

    Returns None when no phonon-branch mode exists (below threshold).
    """
    sel = (modes.q_max > 2.0 * modes.k_eff) & (modes.omega.real > omega_floor)
    if not np.any(sel):
        return None
    return float(np.min(modes.omega.real[sel]))


def phonon_gap_estimate(params: ModelParams) -> float:
    """Near-threshold lattice-phonon gap from the homogeneous dispersion.

    Delta^2 = 4 eps (2 eps + g n0) with eps = (k_eff/(2*pi))^2 in recoil
    units; equals 2*sqrt(2) recoil energies in the large-box limit.
    """
    eps = 1.0 + params.zeta / params.box_length
    n0 = 1.0 / params.box_length
    return float(np.sqrt(4.0 * eps * (2.0 * eps + params.g_interaction * n0)))


def max_growth_rate(params: ModelParams, q_cutoff: float = DEFAULT_Q_CUTOFF) -> float:
    """Largest Im omega of the homogeneous phase (0 below threshold)."""
    modes = diagonalize_and_classify(build_homogeneous_matrix(params, q_cutoff))
    return float(np.max(modes.omega.imag))
