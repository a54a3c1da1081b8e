"""Dimensionless model parameters and closed-form quantities.

Everything in the package uses recoil units: lengths in units of the vacuum
laser wavelength, energies in units of the recoil energy, times in units of
the inverse recoil frequency.  The vacuum wavenumber is then ``2*pi`` and the
kinetic energy of a plane wave ``exp(i*q*x)`` is ``q**2 / (2*pi)**2``.

The condensate occupies the box ``[0, L]`` with unit norm, so the homogeneous
density is ``1/L`` and the susceptibility seen by the light is
``chi(x) = zeta * |psi(x)|**2`` with ``integral(chi) = zeta``.

Intensity convention: configured drive intensities are proportional to the
physical (W/m^2) intensity of each beam, normalized so that the critical
intensity scales as ``1/zeta**2`` at large box size.  The squared field
amplitude entering the optical potential is ``|E_in|**2 = 4*zeta*I`` per beam
(see :func:`drive_field_intensities`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

K0 = 2.0 * np.pi  # vacuum wavenumber in 1/lambda0 units

# Squared drive amplitude per unit configured intensity, divided by zeta.
# Fixed by requiring the closed-form threshold to scale as 1/zeta**2.
FIELD_SCALE_PER_ZETA = 4.0


@dataclass(frozen=True)
class ModelParams:
    """All dimensionless physical and numerical parameters of a run.

    Parameters
    ----------
    zeta : atom-light coupling (dimensionless, >= 0).
    box_length : condensate box size L in units of lambda0.
    g_interaction : contact coupling g = g_c N / (A lambda0 E_rec).
    intensity_left, intensity_right : drive intensities of the two beams.
    trap_strength : E_trap/E_rec of the optional harmonic trap
        V_ext = (E_trap/2) * (x - L/2)**2, centered on the box.
    grid_points_per_wavelength : spatial resolution (>= 32).
    time_step : default |dt| for real and imaginary stepping.
    padding : vacuum margin on each side of the box for the field solve.
    edge_matched : continue the edge susceptibility through the padding so
        the incoming beams enter without edge reflection.  This realizes the
        idealization used for the instability analysis, where reflection off
        the sharp box faces is neglected; the default keeps sharp edges.
    """

    zeta: float
    box_length: float
    g_interaction: float = 1.0
    intensity_left: float = 0.0
    intensity_right: float = 0.0
    trap_strength: float = 0.0
    grid_points_per_wavelength: int = 32
    time_step: float = 1e-3
    padding: float = 2.0
    edge_matched: bool = False

    def __post_init__(self):
        if self.zeta < 0:
            raise ConfigurationError("zeta must be >= 0")
        if self.box_length <= 0:
            raise ConfigurationError("box_length must be > 0")
        if self.intensity_left < 0 or self.intensity_right < 0:
            raise ConfigurationError("intensities must be >= 0")
        if self.trap_strength < 0:
            raise ConfigurationError("trap_strength must be >= 0")
        if self.grid_points_per_wavelength < 32:
            raise ConfigurationError("grid_points_per_wavelength must be >= 32")
        if self.time_step <= 0:
            raise ConfigurationError("time_step must be > 0")
        if self.padding <= 0:
            raise ConfigurationError("padding must be > 0")

    # -- grids -------------------------------------------------------------

    @property
    def num_points(self) -> int:
        """Number of box grid points (even, for FFT midpoint upsampling)."""
        n = int(round(self.box_length * self.grid_points_per_wavelength))
        return n + (n % 2)

    @property
    def dx(self) -> float:
        return self.box_length / self.num_points

    @property
    def num_padding_points(self) -> int:
        return max(1, int(round(self.padding * self.grid_points_per_wavelength)))

    def box_grid(self) -> np.ndarray:
        """Periodic condensate grid: N points on [0, L), x_j = j*dx."""
        return np.arange(self.num_points) * self.dx

    def padded_grid(self) -> np.ndarray:
        """Field grid: nodes from -padding to L+padding, both faces included."""
        n, p = self.num_points, self.num_padding_points
        return (np.arange(n + 2 * p + 1) - p) * self.dx

    def external_potential(self) -> np.ndarray:
        """Static trap on the box grid, centered at L/2."""
        x = self.box_grid()
        if self.trap_strength == 0.0:
            return np.zeros_like(x)
        return 0.5 * self.trap_strength * (x - 0.5 * self.box_length) ** 2


def drive_field_intensities(params: ModelParams) -> tuple[float, float]:
    """Squared incoming field amplitudes (|E_in|^2 per beam) in recoil units."""
    s = FIELD_SCALE_PER_ZETA * params.zeta
    return s * params.intensity_left, s * params.intensity_right


@dataclass(frozen=True)
class SusceptibilityProfile:
    """Real susceptibility chi(x) >= 0 on the padded field grid.

    ``values`` holds node samples on ``grid`` (zero in the vacuum padding,
    medium values at the box faces).  ``box_nodes``/``box_mids`` carry the
    two-sided medium samples used by the field integrator, so that the jump
    at the box faces never falls inside an integration cell.
    """

    values: np.ndarray
    grid: np.ndarray
    box_nodes: np.ndarray = field(repr=False)  # N+1 medium samples, both faces
    box_mids: np.ndarray = field(repr=False)   # N midpoint medium samples
    dx: float = 0.0
    pad_points: int = 0
    pad_value: float = 0.0  # constant susceptibility of the padding medium

    @property
    def num_cells(self) -> int:
        return len(self.box_mids)

    @property
    def box_length(self) -> float:
        return self.num_cells * self.dx

    @property
    def pad_wavenumber(self) -> float:
        """Plane-wave wavenumber of the padding medium."""
        return K0 * np.sqrt(1.0 + self.pad_value)

    def box_slice(self) -> slice:
        """Slice of ``grid`` covering the periodic box samples [0, L)."""
        return slice(self.pad_points, self.pad_points + self.num_cells)

    def integral(self) -> float:
        """integral(chi dx) over the box (periodic trapezoid = exact)."""
        return float(np.sum(self.box_nodes[:-1]) * self.dx)

    @classmethod
    def from_box_samples(cls, box_nodes, box_mids, dx, pad_points, pad_value=0.0):
        box_nodes = np.asarray(box_nodes, dtype=float)
        box_mids = np.asarray(box_mids, dtype=float)
        if len(box_nodes) != len(box_mids) + 1:
            raise ConfigurationError("need N+1 node and N midpoint samples")
        n = len(box_mids)
        values = np.full(n + 2 * pad_points + 1, float(pad_value))
        values[pad_points:pad_points + n + 1] = box_nodes
        grid = (np.arange(n + 2 * pad_points + 1) - pad_points) * dx
        return cls(values=values, grid=grid, box_nodes=box_nodes,
                   box_mids=box_mids, dx=dx, pad_points=pad_points,
                   pad_value=float(pad_value))

    @classmethod
    def uniform(cls, chi0, box_length, points_per_wavelength=64, padding=2.0):
        """Uniform dielectric slab of susceptibility ``chi0`` over the box."""
        n = int(round(box_length * points_per_wavelength))
        n += n % 2
        dx = box_length / n
        pad = max(1, int(round(padding * points_per_wavelength)))
        return cls.from_box_samples(np.full(n + 1, float(chi0)),
                                    np.full(n, float(chi0)), dx, pad)

    @classmethod
    def from_callable(cls, fn, box_length, points_per_wavelength=64, padding=2.0):
        """Sample a smooth profile fn(x) on nodes and exact midpoints."""
        n = int(round(box_length * points_per_wavelength))
        n += n % 2
        dx = box_length / n
        pad = max(1, int(round(padding * points_per_wavelength)))
        nodes = fn(np.arange(n + 1) * dx)
        mids = fn((np.arange(n) + 0.5) * dx)
        return cls.from_box_samples(nodes, mids, dx, pad)


def _upsample_periodic(values: np.ndarray) -> np.ndarray:
    """Trigonometric interpolation of periodic samples onto the doubled grid."""
    n = len(values)
    spec = np.fft.fft(values)
    out = np.zeros(2 * n, dtype=complex)
    h = n // 2
    out[:h] = spec[:h]
    out[-h:] = spec[-h:]
    # split the Nyquist coefficient symmetrically
    out[h] += 0.5 * spec[h]
    out[2 * n - h] += 0.5 * spec[h]
    return np.fft.ifft(out) * 2.0


def susceptibility_profile(psi, params: ModelParams) -> SusceptibilityProfile:
    """chi(x) = zeta * |psi(x)|^2 inside the box, constant in the padding.

    ``psi`` is a condensate state on the periodic box grid; midpoint samples
    are obtained by trigonometric interpolation, so the integrator sees the
    same band-limited density the spectral stepper evolves.  The padding is
    vacuum (sharp edges) unless ``params.edge_matched`` is set, in which case
    it carries the mean box susceptibility so a homogeneous condensate
    produces no edge reflection at all.
    """
    values = np.asarray(psi.psi)
    if len(values) != params.num_points or abs(psi.dx - params.dx) > 1e-12 * params.dx:
        raise ConfigurationError(
            f"state grid ({len(values)} pts, dx={psi.dx}) does not match params "
            f"({params.num_points} pts, dx={params.dx})")
    dense = _upsample_periodic(values)
    density_dense = np.abs(dense) ** 2
    nodes = np.empty(params.num_points + 1)
    nodes[:-1] = density_dense[0::2]
    nodes[-1] = nodes[0]  # periodic wrap: chi(L) = chi(0)
    mids = density_dense[1::2]
    pad_value = params.zeta / params.box_length if params.edge_matched else 0.0
    return SusceptibilityProfile.from_box_samples(
        params.zeta * nodes, params.zeta * mids, params.dx,
        params.num_padding_points, pad_value=pad_value)


def optical_potential(fields, params: ModelParams) -> np.ndarray:
    """V_opt(x) = -(|E_L|^2 + |E_R|^2) on the box grid, in recoil units."""
    sl = fields.box_slice()
    return -(np.abs(fields.e_left[sl]) ** 2 + np.abs(fields.e_right[sl]) ** 2)


def effective_wavenumber(params: ModelParams, density: float) -> float:
    """Medium-renormalized wavenumber 2*pi*sqrt(1 + zeta*density).

    ``density`` is the dimensionless homogeneous density |psi0|^2 (1/L for
    the box).  Always >= 2*pi; the backscattering momentum is twice this.
    """
    if density < 0:
        raise ValueError("density must be >= 0")
    return K0 * np.sqrt(1.0 + params.zeta * density)


def lattice_spacing(params: ModelParams) -> float:
    """Emergent lattice spacing d = pi / k_eff(1/L), strictly < 1/2 for zeta>0."""
    return np.pi / effective_wavenumber(params, 1.0 / params.box_length)


def roton_momentum(params: ModelParams) -> float:
    """Momentum of the finite-size roton minimum, q* = 2*k_eff + 2*pi/L."""
    k_eff = effective_wavenumber(params, 1.0 / params.box_length)
    return 2.0 * k_eff + 2.0 * np.pi / params.box_length


def critical_intensity_closed_form(params: ModelParams) -> float:
    """Per-beam intensity at which the roton mode energy vanishes.

    Solves omega(q*)^2 = 0 for the configured-intensity scale, with
    q* = 2*k_eff + 2*pi/L.  Approaches 1/(2*zeta^2) for large boxes, so
    doubling zeta divides the threshold by four.
    """
    if params.zeta == 0:
        raise ConfigurationError("zeta = 0: light decouples, no finite threshold")
    L = params.box_length
    k_eff = effective_wavenumber(params, 1.0 / L)
    q = roton_momentum(params)
    kinetic = (q / K0) ** 2
    bracket = kinetic + 2.0 * params.g_interaction / L
    denom = 8.0 * K0 ** 2 * FIELD_SCALE_PER_ZETA * params.zeta ** 2
    return bracket * L * (q ** 2 - 4.0 * k_eff ** 2) / denom
