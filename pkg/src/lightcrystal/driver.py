"""Self-consistent coupled evolution: fields -> potential -> GP step.

The electromagnetic field adapts instantaneously to the density, so each time
step re-solves the two Helmholtz problems for the current susceptibility (a
refresh cadence knob exists for performance studies, default every step),
rebuilds the optical potential and advances the wavefunction by one split
step.  Imaginary time relaxes to the self-consistent ground state; real time
propagates quenches.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import gpe, observables
from .errors import ConfigurationError, NumericsError
from .helmholtz import FieldState, solve_driven_fields
from .model import ModelParams, optical_potential, susceptibility_profile

NOISE_AMPLITUDE = 1e-4          # relative seed-noise rms
NOISE_Q_CUTOFF = 8.0 * np.pi    # seed-noise bandwidth


@dataclass(frozen=True)
class Snapshot:
    """Box-grid profiles stored along a run for later analysis/plotting."""

    time: float
    x: np.ndarray
    density: np.ndarray
    intensity_left: np.ndarray
    intensity_right: np.ndarray
    intensity_total: np.ndarray


def take_snapshot(state: gpe.CondensateState, fields: FieldState) -> Snapshot:
    sl = fields.box_slice()
    il = np.abs(fields.e_left[sl]) ** 2
    ir = np.abs(fields.e_right[sl]) ** 2
    return Snapshot(time=state.time, x=state.grid(), density=state.density(),
                    intensity_left=il, intensity_right=ir,
                    intensity_total=il + ir)


@dataclass
class RunRecord:
    """Time series of observables plus optional attached result tables."""

    times: np.ndarray = field(default_factory=lambda: np.array([]))
    reflectivity: np.ndarray = field(default_factory=lambda: np.array([]))
    kinetic: np.ndarray = field(default_factory=lambda: np.array([]))
    contrast: np.ndarray = field(default_factory=lambda: np.array([]))
    snapshots: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    seed: int | None = None
    stop_reason: str = ""
    spectrum_table: np.ndarray | None = None
    dispersion_table: np.ndarray | None = None
    scan_table: np.ndarray | None = None
    threshold: float | None = None
    maxima: observables.MaximaTrajectories | None = None


def seeded_initial_state(params: ModelParams, rng,
                         noise_amplitude: float = NOISE_AMPLITUDE,
                         noise_q_cutoff: float = NOISE_Q_CUTOFF,
                         exclude_bins=()) -> gpe.CondensateState:
    """Homogeneous state with real band-limited density noise.

    The instability needs a fluctuation to grow from; the noise is kept real
    so imaginary-time evolution preserves a real wavefunction.  Specific
    Fourier bins can be excluded from the seed (``exclude_bins``).
    """
    n = params.num_points
    dq = 2.0 * np.pi / params.box_length
    m_max = min(int(noise_q_cutoff / dq), n // 2 - 1)
    half = np.zeros(n // 2 + 1, dtype=complex)
    half[1:m_max + 1] = rng.standard_normal(m_max) + 1j * rng.standard_normal(m_max)
    for m in exclude_bins:
        if 0 <= m <= n // 2:
            half[m] = 0.0
    bump = np.fft.irfft(half, n=n)
    rms = np.sqrt(np.mean(bump ** 2))
    if rms > 0:
        bump *= noise_amplitude / rms
    psi = (1.0 + bump).astype(complex) / np.sqrt(params.box_length)
    return gpe.normalized(gpe.CondensateState(psi=psi, dx=params.dx))


def solve_fields(state: gpe.CondensateState, params: ModelParams):
    """(susceptibility, FieldState) for the current density."""
    chi = susceptibility_profile(state, params)
    return chi, solve_driven_fields(chi, params)


def _potential(fields: FieldState, params: ModelParams) -> np.ndarray:
    return params.external_potential() + optical_potential(fields, params)


def ground_state(params: ModelParams, *, seed: int = 0, initial_state=None,
                 dt: float | None = None, max_steps: int = 400_000,
                 residual_tol: float = 1e-6, reflectivity_tol: float = 1e-8,
                 check_every: int = 100, refresh_every: int = 1,
                 noise_amplitude: float = NOISE_AMPLITUDE,
                 stop_contrast: float | None = None,
                 max_time: float | None = None,
                 snapshot_every: int | None = None):
    """Imaginary-time relaxation to the self-consistent ground state.

    Convergence requires the stationarity residual below ``residual_tol`` and
    a reflectivity drift below ``reflectivity_tol`` per ``check_every`` steps.
    ``stop_contrast``/``max_time`` allow early classification in threshold
    scans.  Returns (state, fields, record).
    """
    dtau = dt if dt is not None else params.time_step
    rng = np.random.default_rng(seed)
    state = initial_state if initial_state is not None else seeded_initial_state(
        params, rng, noise_amplitude)
    chi, fields = solve_fields(state, params)
    potential = _potential(fields, params)

    times, refls, kins, cons = [], [], [], []
    snapshots = []
    last_refl = None
    converged = False
    stop_reason = "max_steps"
    step = 0
    for step in range(1, max_steps + 1):
        try:
            state = gpe.split_step(state, potential, params, -1j * dtau)
        except NumericsError as exc:
            raise NumericsError(f"imaginary-time step {step}: {exc}") from exc
        if step % refresh_every == 0:
            chi, fields = solve_fields(state, params)
            potential = _potential(fields, params)
        if step % check_every == 0:
            refl = observables.reflectivity(fields)
            con = observables.density_contrast(state)
            _, residual = gpe.chemical_potential_and_residual(state, potential, params)
            times.append(state.time)
            refls.append(refl)
            kins.append(gpe.kinetic_energy(state))
            cons.append(con)
            if snapshot_every and (step // check_every) % snapshot_every == 0:
                snapshots.append(take_snapshot(state, fields))
            if stop_contrast is not None and con >= stop_contrast:
                stop_reason = "contrast"
                break
            if residual < residual_tol and last_refl is not None \
                    and abs(refl - last_refl) < reflectivity_tol:
                converged = True
                stop_reason = "converged"
                break
            last_refl = refl
            if max_time is not None and state.time >= max_time:
                stop_reason = "max_time"
                break

    record = RunRecord(times=np.array(times), reflectivity=np.array(refls),
                       kinetic=np.array(kins), contrast=np.array(cons),
                       snapshots=snapshots, converged=converged,
                       iterations=step, seed=seed, stop_reason=stop_reason)
    return state, fields, record


def quench_evolution(params: ModelParams, t_max: float, sample_every: int = 100,
                     *, seed: int = 0, initial_state=None,
                     dt: float | None = None, refresh_every: int = 1,
                     snapshot_every: int | None = None,
                     noise_amplitude: float = NOISE_AMPLITUDE):
    """Real-time evolution after a sudden drive turn-on at t = 0.

    Starts from the undriven ground state (homogeneous plus seed noise) and
    records reflectivity, kinetic energy and contrast every ``sample_every``
    steps, with optional snapshots every ``snapshot_every`` samples for
    maxima tracking.  On numeric blow-up a NumericsError carrying the partial
    record (``exc.partial_record``) is raised.
    """
    dtr = dt if dt is not None else params.time_step
    rng = np.random.default_rng(seed)
    state = initial_state if initial_state is not None else seeded_initial_state(
        params, rng, noise_amplitude)
    chi, fields = solve_fields(state, params)
    potential = _potential(fields, params)

    steps = int(round(t_max / dtr))
    times, refls, kins, cons = [], [], [], []
    snapshots = [take_snapshot(state, fields)]
    sample_index = 0
    try:
        for step in range(1, steps + 1):
            state = gpe.split_step(state, potential, params, dtr)
            if step % refresh_every == 0:
                chi, fields = solve_fields(state, params)
                potential = _potential(fields, params)
            if step % sample_every == 0:
                sample_index += 1
                times.append(state.time)
                refls.append(observables.reflectivity(fields))
                kins.append(gpe.kinetic_energy(state))
                cons.append(observables.density_contrast(state))
                if snapshot_every and sample_index % snapshot_every == 0:
                    snapshots.append(take_snapshot(state, fields))
    except NumericsError as exc:
        record = RunRecord(times=np.array(times), reflectivity=np.array(refls),
                           kinetic=np.array(kins), contrast=np.array(cons),
                           snapshots=snapshots, converged=False,
                           iterations=step, seed=seed, stop_reason="numeric_blowup")
        err = NumericsError(f"real-time step {step}: {exc}")
        err.partial_record = record
        raise err from exc

    record = RunRecord(times=np.array(times), reflectivity=np.array(refls),
                       kinetic=np.array(kins), contrast=np.array(cons),
                       snapshots=snapshots, converged=True, iterations=steps,
                       seed=seed, stop_reason="t_max")
    return state, fields, record


_CRYSTAL_CONTRAST = 0.05  # order-parameter level defining "crystalline"


def _classify_intensity(params: ModelParams, intensity: float, seed: int,
                        max_time: float, dt: float | None):
    """Run one imaginary-time relaxation and decide crystalline vs homogeneous.

    Crystalline as soon as the contrast exceeds the detector level; a run that
    converges below it is homogeneous.  Very close to threshold the
    exponential growth of the seeded roton mode is too slow to reach the
    detector within the time budget, so the late-time log-slope of the
    contrast decides: sustained growth means unstable (crystalline).
    """
    p = replace(params, intensity_left=intensity, intensity_right=intensity)
    _, fields, record = ground_state(
        p, seed=seed, dt=dt, stop_contrast=_CRYSTAL_CONTRAST,
        max_time=max_time, residual_tol=1e-7)
    refl = observables.reflectivity(fields)
    contrast = record.contrast[-1] if len(record.contrast) else 0.0
    if record.stop_reason == "contrast":
        return True, refl, contrast
    if record.converged:
        return contrast >= _CRYSTAL_CONTRAST, refl, contrast
    # Out of budget mid-transient.  A stable state approaches its static
    # edge-ripple contrast with a shrinking log-slope; an unstable one grows
    # with a sustained slope.  Compare the two halves of the late window.
    c = np.maximum(record.contrast, 1e-300)
    t = record.times
    half = len(c) // 2
    logc, tt = np.log(c[half:]), t[half:]
    m = len(logc) // 2
    if m < 2:
        return contrast >= _CRYSTAL_CONTRAST, refl, contrast
    s_mid = np.polyfit(tt[:m], logc[:m], 1)[0]
    s_late = np.polyfit(tt[m:], logc[m:], 1)[0]
    sustained = s_late > max(2e-4, 0.7 * s_mid)
    return bool(sustained), refl, contrast


def threshold_scan(params: ModelParams, intensity_grid, *, seed: int = 0,
                   rel_tol: float = 0.015, max_time: float = 100.0,
                   dt: float | None = None):
    """Locate the crystallization threshold by bisection on the contrast jump.

    Every point of the (monotone) ``intensity_grid`` is relaxed in imaginary
    time and classified; the first bracketing pair is refined by bisection to
    ``rel_tol`` relative width.  Returns (threshold, record) with the scanned
    (intensity, reflectivity, contrast) rows attached.
    """
    grid = np.asarray(intensity_grid, dtype=float)
    if len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ConfigurationError("intensity_grid must be monotone increasing "
                                 "with at least two points")
    rows = []
    flags = []
    for intensity in grid:
        crystalline, refl, contrast = _classify_intensity(
            params, float(intensity), seed, max_time, dt)
        rows.append((float(intensity), refl, contrast))
        flags.append(crystalline)
    if flags[0]:
        raise ConfigurationError(
            f"bracketing failure: lowest intensity {grid[0]:g} is already "
            "crystalline; extend the grid downward")
    if not flags[-1]:
        raise ConfigurationError(
            f"bracketing failure: highest intensity {grid[-1]:g} is still "
            "homogeneous; extend the grid upward")
    hi_idx = int(np.argmax(flags))
    lo, hi = float(grid[hi_idx - 1]), float(grid[hi_idx])

    while (hi - lo) > rel_tol * 0.5 * (hi + lo):
        mid = 0.5 * (lo + hi)
        crystalline, refl, contrast = _classify_intensity(
            params, mid, seed, max_time, dt)
        rows.append((mid, refl, contrast))
        if crystalline:
            hi = mid
        else:
            lo = mid
    threshold = 0.5 * (lo + hi)

    rows.sort(key=lambda row: row[0])
    record = RunRecord(seed=seed, converged=True, stop_reason="scan",
                       scan_table=np.array(rows), threshold=threshold)
    return threshold, record


def roton_mode_index(params: ModelParams) -> int:
    """FFT bin of the finite-box roton: first grid momentum above 2*k_eff."""
    from .model import effective_wavenumber
    dq = 2.0 * np.pi / params.box_length
    pole = 2.0 * effective_wavenumber(params, 1.0 / params.box_length) / dq
    return int(np.floor(pole)) + 1


def roton_relaxation_rate(params: ModelParams, intensity: float, *,
                          seed: int = 0, fit_window: tuple = (2.0, 9.0),
                          dt: float | None = None,
                          noise_amplitude: float = 1e-6) -> float:
    """Imaginary-time growth rate of the roton density mode (negative = stable).

    Evolves homogeneous-plus-noise in imaginary time and fits the log-slope
    of the roton Fourier amplitude of the density inside ``fit_window``.
    This probes the linear instability directly: the fit window ends early
    enough that no other channel has reached nonlinear amplitude, so the rate
    crosses zero exactly at the finite-box instability threshold.
    """
    p = replace(params, intensity_left=float(intensity),
                intensity_right=float(intensity))
    dtau = dt if dt is not None else p.time_step
    rng = np.random.default_rng(seed)
    m_rot = roton_mode_index(p)
    # bins at or below the backscattering pole are excluded from the seed:
    # inside a finite box they are secularly amplified at any intensity and
    # would otherwise saturate and feed every bin within the fit window
    state = seeded_initial_state(p, rng, noise_amplitude,
                                 exclude_bins=(m_rot - 1, m_rot - 2))
    chi, fields = solve_fields(state, p)
    potential = _potential(fields, p)
    steps = int(round(fit_window[1] / dtau))
    sample_every = max(1, steps // 200)
    times, amps = [], []
    for step in range(1, steps + 1):
        state = gpe.split_step(state, potential, p, -1j * dtau)
        chi, fields = solve_fields(state, p)
        potential = _potential(fields, p)
        if step % sample_every == 0:
            times.append(state.time)
            amps.append(abs(np.fft.fft(state.density())[m_rot]))
    times = np.array(times)
    amps = np.maximum(np.array(amps), 1e-300)
    sel = times >= fit_window[0]
    return float(np.polyfit(times[sel], np.log(amps[sel]), 1)[0])


def roton_threshold(params: ModelParams, intensities, *, seed: int = 0,
                    fit_window: tuple = (2.0, 9.0), dt: float | None = None):
    """Numerical instability threshold from the zero of the roton rate.

    Fits the (linear in intensity) imaginary-time growth rate of the roton
    mode over the given intensities and returns (threshold, table) with the
    sampled (intensity, rate) rows.  The sample range must bracket the rate's
    sign change.
    """
    rows = [(float(i), roton_relaxation_rate(params, i, seed=seed,
                                             fit_window=fit_window, dt=dt))
            for i in intensities]
    table = np.array(rows)
    rates = table[:, 1]
    if not (rates.min() < 0.0 < rates.max()):
        raise ConfigurationError("intensity range does not bracket the "
                                 "roton instability (all rates same sign)")
    slope, intercept = np.polyfit(table[:, 0], rates, 1)
    return float(-intercept / slope), table


def self_consistency_drift(state: gpe.CondensateState, fields: FieldState,
                           params: ModelParams) -> float:
    """Change of mu when the fields are re-solved from the converged state."""
    pot_old = _potential(fields, params)
    mu_old, _ = gpe.chemical_potential_and_residual(state, pot_old, params)
    _, fresh = solve_fields(state, params)
    pot_new = _potential(fresh, params)
    mu_new, _ = gpe.chemical_potential_and_residual(state, pot_new, params)
    return abs(mu_new - mu_old)
