"""Split-step spectral evolution of the condensate wavefunction.

The dimensionless Gross-Pitaevskii equation is

    i dpsi/dt = -(1/(2*pi)^2) psi'' + [V(x) + g |psi|^2] psi

with V the external-plus-optical potential in recoil units.  The wavefunction
lives on a uniform periodic grid over [0, L); a plane wave exp(i*q*x) has
kinetic energy (q/(2*pi))^2 recoil units.

Real time steps use unitary Strang splitting; imaginary time (dt = -i*dtau)
turns each factor into a relaxation and the state is renormalized after every
step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericsError
from .model import K0, ModelParams


@dataclass(frozen=True)
class CondensateState:
    """Complex wavefunction on the periodic box grid, unit norm contract."""

    psi: np.ndarray
    dx: float
    time: float = 0.0

    @property
    def box_length(self) -> float:
        return len(self.psi) * self.dx

    def grid(self) -> np.ndarray:
        return np.arange(len(self.psi)) * self.dx

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2) * self.dx))

    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2


def homogeneous_state(params: ModelParams) -> CondensateState:
    """The uniform unit-norm state psi = 1/sqrt(L)."""
    psi = np.full(params.num_points, 1.0 / np.sqrt(params.box_length),
                  dtype=complex)
    return CondensateState(psi=psi, dx=params.dx)


def normalized(state: CondensateState) -> CondensateState:
    return replace(state, psi=state.psi / state.norm())


def _momentum_grid(n: int, dx: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(n, d=dx)


def kinetic_spectrum(n: int, dx: float) -> np.ndarray:
    """Kinetic energies (q/(2*pi))^2 on the FFT momentum grid."""
    q = _momentum_grid(n, dx)
    return (q / K0) ** 2


def split_step(state: CondensateState, potential: np.ndarray,
               params: ModelParams, dt: complex) -> CondensateState:
    """One Strang step exp(-i*H*dt) with H = T + V + g|psi|^2.

    Half potential step, full kinetic step in momentum space, half potential
    step; the nonlinear factor is exact within each half step because the
    density is invariant under a pure phase.  For dt with a negative
    imaginary part (imaginary time) the state is renormalized afterward.
    """
    dt = complex(dt)
    g = params.g_interaction
    psi = state.psi
    psi = psi * np.exp(-0.5j * dt * (potential + g * np.abs(psi) ** 2))
    kin = kinetic_spectrum(len(psi), state.dx)
    psi = np.fft.ifft(np.fft.fft(psi) * np.exp(-1j * dt * kin))
    psi = psi * np.exp(-0.5j * dt * (potential + g * np.abs(psi) ** 2))
    if dt.imag != 0.0:
        psi = psi / np.sqrt(np.sum(np.abs(psi) ** 2) * state.dx)
    if not np.all(np.isfinite(psi)):
        raise NumericsError("non-finite wavefunction after split step")
    return CondensateState(psi=psi, dx=state.dx, time=state.time + abs(dt))


def kinetic_energy(state: CondensateState) -> float:
    """Spectral kinetic energy sum_q (q/(2*pi))^2 |psi(q)|^2, in recoil units."""
    spec = np.fft.fft(state.psi)
    kin = kinetic_spectrum(len(state.psi), state.dx)
    weight = state.dx / len(state.psi)
    return float(np.sum(kin * np.abs(spec) ** 2) * weight)


def apply_hamiltonian(state: CondensateState, potential: np.ndarray,
                      params: ModelParams) -> np.ndarray:
    """H[psi] psi with the mean-field potential V + g|psi|^2."""
    kin = kinetic_spectrum(len(state.psi), state.dx)
    kinetic_part = np.fft.ifft(kin * np.fft.fft(state.psi))
    return kinetic_part + (potential
                           + params.g_interaction * np.abs(state.psi) ** 2) * state.psi


def chemical_potential_and_residual(state: CondensateState,
                                    potential: np.ndarray,
                                    params: ModelParams) -> tuple[float, float]:
    """mu = <psi|H[psi]|psi> and the L2 stationarity residual |H psi - mu psi|.

    The residual vanishes exactly on a stationary state and is the ground
    state convergence measure used by the coupled driver.
    """
    h_psi = apply_hamiltonian(state, potential, params)
    mu = float(np.real(np.sum(np.conj(state.psi) * h_psi) * state.dx))
    dev = h_psi - mu * state.psi
    residual = float(np.sqrt(np.sum(np.abs(dev) ** 2) * state.dx))
    return mu, residual


def total_energy(state: CondensateState, potential: np.ndarray,
                 params: ModelParams) -> float:
    """E = E_kin + integral(V |psi|^2 + (g/2)|psi|^4); conserved in real time."""
    density = state.density()
    interaction = 0.5 * params.g_interaction * np.sum(density ** 2) * state.dx
    external = np.sum(potential * density) * state.dx
    return kinetic_energy(state) + float(external + interaction)
