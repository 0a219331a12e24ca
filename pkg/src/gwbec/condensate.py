"""Condensate state, density/phase split, observables, background preparation.

The state is a complex amplitude field psi on a periodic grid together with
the interaction coupling g and a unit system.  Hydrodynamic fields follow
from psi = sqrt(rho) exp(i S / hbar); velocities are always computed from
the gauge-robust current Im(psi* grad psi)/|psi|^2, never from the unwrapped
phase, which is reported only as a representative.

Vortex backgrounds on the torus must carry zero net winding.  Neutral sets
are imprinted through an exact plaquette construction (discrete stream
function), so the resulting phase is strictly periodic; a lone imprinted
vortex necessarily drags a compensating seam along the domain wrap and is
meant for local tests or as a relaxation seed.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .grids import Field, Grid, spectral_derivative
from .units import UnitSystem

RHO_FLOOR_FRACTION = 1e-12
TWO_PI = 2.0 * np.pi

# Census cut (fraction of peak density) separating the condensate, where
# every singularity is a physical vortex, from the wall vacuum outside a
# confined cloud, where relaxation parks the torus-mandated compensating
# charges at relative densities below ~1e-18.  Any value between those
# scales works; this one keeps ten orders of margin to each side.
CENSUS_VACUUM_FRACTION = 1e-6


@dataclass
class CondensateState:
    """Mean-field condensate: complex field, time stamp, coupling, units."""

    psi: Field
    t: float
    units: UnitSystem
    g: float

    def __post_init__(self):
        if self.g < 0:
            raise ValueError("attractive coupling g < 0 is not supported")
        if not self.psi.is_complex:
            self.psi = Field(self.psi.grid, self.psi.values.astype(np.complex128))
        n = self.norm
        if not np.isfinite(n) or n <= 0:
            raise ValueError(f"state norm {n} is not finite and positive")

    @property
    def grid(self) -> Grid:
        return self.psi.grid

    @property
    def norm(self) -> float:
        """Atom number N = integral of |psi|^2."""
        return float(np.sum(np.abs(self.psi.values) ** 2) * self.grid.cell_volume)

    @property
    def hbar(self) -> float:
        return self.units.hbar

    @property
    def mass(self) -> float:
        return self.units.mass

    def with_values(self, values: np.ndarray, t: float | None = None) -> "CondensateState":
        return dataclasses.replace(
            self, psi=Field(self.grid, values), t=self.t if t is None else float(t)
        )

    def copy(self) -> "CondensateState":
        return self.with_values(self.psi.values.copy())


@dataclass
class HydroFields:
    """Density rho, representative phase S, velocity v = grad(S)/m."""

    rho: Field
    S: Field
    v: tuple[Field, ...]
    valid: np.ndarray
    rho_floor: float

    @property
    def grid(self) -> Grid:
        return self.rho.grid


@dataclass(frozen=True)
class Observables:
    """Integrated state diagnostics; energies share the state's units."""

    t: float
    N: float
    E_kin: float
    E_int: float
    E_pot: float
    E_total: float
    Q: float
    Lz: float

    def __post_init__(self):
        if self.E_kin < 0 or self.E_int < 0:
            raise ValueError("kinetic and interaction energies must be nonnegative")
        if abs(self.Q) > self.E_kin:
            raise ValueError(f"|Q| = {abs(self.Q)} exceeds E_kin = {self.E_kin}")


def healing_length(g: float, rho0: float, hbar: float = 1.0, mass: float = 1.0) -> float:
    """hbar / sqrt(2 m g rho0); infinite for an ideal gas."""
    if g <= 0 or rho0 <= 0:
        return np.inf
    return hbar / np.sqrt(2.0 * mass * g * rho0)


def madelung_decompose(state: CondensateState) -> HydroFields:
    """Split psi into (rho, S, v); points below the density floor are flagged.

    S comes from axis-ordered unwrap sweeps and is a representative only;
    v is built from the current density, so branch cuts cannot leak into it.
    """
    grid = state.grid
    psi = state.psi.values
    rho = np.abs(psi) ** 2
    rho_floor = RHO_FLOOR_FRACTION * float(rho.max())
    valid = rho > rho_floor

    phase = np.angle(psi)
    for axis in range(grid.dim):
        phase = np.unwrap(phase, axis=axis)
    S = state.hbar * phase

    safe_rho = np.where(valid, rho, 1.0)
    v = []
    for axis in range(grid.dim):
        dpsi = spectral_derivative(grid, psi, axis)
        current = np.imag(np.conj(psi) * dpsi)
        v_axis = np.where(valid, state.hbar * current / (state.mass * safe_rho), 0.0)
        v.append(Field(grid, v_axis))

    return HydroFields(
        rho=Field(grid, rho),
        S=Field(grid, S),
        v=tuple(v),
        valid=valid,
        rho_floor=rho_floor,
    )


def madelung_compose(rho: Field, S: Field, hbar: float) -> Field:
    """psi = sqrt(rho) exp(i S / hbar)."""
    if rho.grid != S.grid:
        raise ValueError("rho and S live on different grids")
    values = np.sqrt(np.clip(rho.values, 0.0, None)) * np.exp(1j * S.values / hbar)
    return Field(rho.grid, values)


def compute_observables(state: CondensateState, potential: Field | None = None) -> Observables:
    """Atom number, energies, quadrupole anisotropy Q, angular momentum Lz.

    Q and E_kin are assembled from the same nonnegative per-axis gradient
    integrals, so |Q| <= E_kin holds in floating point, not just in algebra.
    """
    grid = state.grid
    psi = state.psi.values
    dV = grid.cell_volume
    hbar, m, g = state.hbar, state.mass, state.g

    N = float(np.sum(np.abs(psi) ** 2) * dV)

    grads = [spectral_derivative(grid, psi, axis) for axis in range(grid.dim)]
    axis_integrals = [float(np.sum(np.abs(d) ** 2) * dV) for d in grads]
    I_x = axis_integrals[0]
    I_y = axis_integrals[1] if grid.dim >= 2 else 0.0
    prefactor = hbar**2 / (2.0 * m)
    E_kin = prefactor * sum(axis_integrals)
    Q = prefactor * (I_x - I_y)

    E_int = 0.5 * g * float(np.sum(np.abs(psi) ** 4) * dV)
    E_pot = 0.0
    if potential is not None:
        if potential.grid != grid:
            raise ValueError("potential grid mismatch")
        E_pot = float(np.sum(potential.values * np.abs(psi) ** 2) * dV)

    Lz = 0.0
    if grid.dim >= 2:
        x = grid.coordinate_mesh(0)
        y = grid.coordinate_mesh(1)
        Lz = float(
            np.real(np.sum(np.conj(psi) * (-1j * hbar) * (x * grads[1] - y * grads[0]))) * dV
        )

    return Observables(
        t=state.t,
        N=N,
        E_kin=E_kin,
        E_int=E_int,
        E_pot=E_pot,
        E_total=E_kin + E_int + E_pot,
        Q=Q,
        Lz=Lz,
    )


# --- background preparation ---------------------------------------------


def prepare_homogeneous(grid: Grid, rho0: float, g: float, units: UnitSystem) -> CondensateState:
    """Uniform condensate at rest: psi = sqrt(rho0), t = 0."""
    if rho0 <= 0:
        raise ValueError("rho0 must be positive")
    values = np.full(grid.shape, np.sqrt(rho0), dtype=np.complex128)
    return CondensateState(psi=Field(grid, values), t=0.0, units=units, g=g)


def prepare_plane_wave(
    grid: Grid, rho0: float, modes: tuple[int, ...], g: float, units: UnitSystem
) -> CondensateState:
    """Uniform flow psi = sqrt(rho0) exp(i k.r) with k on the reciprocal lattice.

    ``modes`` are integer mode numbers per axis: k_i = 2 pi n_i / L_i is the
    only flow momentum compatible with periodicity.
    """
    if rho0 <= 0:
        raise ValueError("rho0 must be positive")
    if len(modes) != grid.dim:
        raise ValueError("need one integer mode number per axis")
    if any(int(n) != n for n in modes):
        raise ValueError("mode numbers must be integers")
    phase = np.zeros(grid.shape)
    for axis, n in enumerate(modes):
        k = TWO_PI * int(n) / grid.extents[axis]
        phase = phase + k * grid.coordinate_mesh(axis)
    values = np.sqrt(rho0) * np.exp(1j * phase)
    return CondensateState(psi=Field(grid, values), t=0.0, units=units, g=g)


def _minimal_image(grid: Grid, axis: int, center: float) -> np.ndarray:
    L = grid.extents[axis]
    delta = grid.coordinate_mesh(axis) - center
    return (delta + 0.5 * L) % L - 0.5 * L


def _core_distance_sq(grid: Grid, center: tuple[float, float]) -> np.ndarray:
    """Smooth periodic stand-in for the squared distance to ``center``.

    (L/pi)^2 sin^2(pi d/L) per axis matches d^2 near the core and closes
    periodically without the gradient kink a wrapped Euclidean distance has
    along the midlines; that kink would bleed a k^-2 tail into every
    prepared state and spoil spectral accuracy downstream.
    """
    total = np.zeros(grid.shape)
    for axis, c in enumerate(center[:2]):
        L = grid.extents[axis]
        delta = grid.coordinate_mesh(axis) - c
        total = total + (L / np.pi * np.sin(np.pi * delta / L)) ** 2
    return total


def _core_dip(grid: Grid, center: tuple[float, float], xi: float, charge: int) -> np.ndarray:
    """Variational core amplitude r/sqrt(r^2 + 2 xi^2), powered by |charge|."""
    r2 = _core_distance_sq(grid, center)
    amp = np.sqrt(r2 / (r2 + 2.0 * xi**2))
    return amp ** abs(charge)


def imprint_vortex(
    state: CondensateState, position: tuple[float, float], charge: int
) -> CondensateState:
    """Multiply in a 2 pi q phase winding and a healing-length core dip.

    The winding is exact around the core.  On the periodic domain a single
    vortex cannot be globally consistent: a compensating seam appears along
    the wrap.  Balance the total charge (or relax afterwards) before using
    the state as a dynamic background.
    """
    if state.grid.dim < 2:
        raise ValueError("vortices need at least two dimensions")
    q = int(charge)
    if q != charge or q == 0:
        raise ValueError("charge must be a nonzero integer")
    for axis, p in enumerate(position[:2]):
        L = state.grid.extents[axis]
        if not -0.5 * L <= p < 0.5 * L:
            raise ValueError(f"position component {p} outside [-L/2, L/2) on axis {axis}")

    grid = state.grid
    dx = _minimal_image(grid, 0, position[0])
    dy = _minimal_image(grid, 1, position[1])
    theta = np.arctan2(dy, dx)

    hydro = madelung_decompose(state)
    rho_ref = float(hydro.rho.values.max())
    xi = healing_length(state.g, rho_ref, state.hbar, state.mass)
    if not np.isfinite(xi):
        xi = min(grid.extents[:2]) / 16.0
    dip = _core_dip(grid, position, xi, q)

    values = state.psi.values * np.exp(1j * q * theta) * dip
    return state.with_values(values)


def _neutral_phase(grid: Grid, cores: list[tuple[float, float, int]]) -> np.ndarray:
    """Exactly periodic phase with winding 2 pi q at each core plaquette.

    Solves a discrete Poisson problem for a plaquette stream function, takes
    link phases from its discrete curl, removes any residual uniform winding
    around the torus cycles (quantized to the nearest multiple of 2 pi), and
    integrates the links to a node phase.  Needs zero total charge.
    """
    if grid.dim != 2:
        raise ValueError("neutral phase construction is two-dimensional")
    if sum(q for _, _, q in cores) != 0:
        raise ValueError("total vortex charge on a periodic domain must be zero")

    nx, ny = grid.points
    hx, hy = grid.spacing

    w = np.zeros((nx, ny))
    for x0, y0, q in cores:
        i = int(np.round((x0 + 0.5 * grid.extents[0]) / hx - 0.5)) % nx
        j = int(np.round((y0 + 0.5 * grid.extents[1]) / hy - 0.5)) % ny
        w[i, j] += TWO_PI * int(q)

    # Unnormalized 5-point symbol: plaquette circulation of the curl ansatz.
    cos_x = np.cos(TWO_PI * np.fft.fftfreq(nx))[:, None]
    cos_y = np.cos(TWO_PI * np.fft.fftfreq(ny))[None, :]
    symbol = 2.0 * cos_x + 2.0 * cos_y - 4.0
    symbol[0, 0] = 1.0
    theta_hat = np.fft.fft2(w) / symbol
    theta_hat[0, 0] = 0.0
    stream = np.fft.ifft2(theta_hat).real

    # Link phases: u_x on the link (i,j)->(i+1,j) separates plaquettes
    # (i,j-1) below and (i,j) above; u_y separates (i-1,j) and (i,j).
    u_x = np.roll(stream, 1, axis=1) - stream
    u_y = stream - np.roll(stream, 1, axis=0)

    # Quantize the torus-cycle windings to multiples of 2 pi by a uniform
    # link offset (a global phase gradient), leaving plaquette windings alone.
    for u, axis, n in ((u_x, 0, nx), (u_y, 1, ny)):
        cycle = float(u.sum(axis=axis).flat[0])
        u += (TWO_PI * np.round(cycle / TWO_PI) - cycle) / n

    phase = np.zeros((nx, ny))
    phase[:, 0] = np.concatenate(([0.0], np.cumsum(u_x[:-1, 0])))
    phase[:, 1:] = phase[:, :1] + np.cumsum(u_y[:, :-1], axis=1)
    return phase


def prepare_vortex_set(
    grid: Grid,
    rho0: float,
    cores: list[tuple[float, float, int]],
    g: float,
    units: UnitSystem,
) -> CondensateState:
    """Charge-neutral vortex arrangement with periodic phase and core dips."""
    if rho0 <= 0:
        raise ValueError("rho0 must be positive")
    phase = _neutral_phase(grid, cores)
    xi = healing_length(g, rho0, units.hbar, units.mass)
    if not np.isfinite(xi):
        xi = min(grid.extents[:2]) / 16.0
    amp = np.full(grid.shape, np.sqrt(rho0))
    for x0, y0, q in cores:
        amp = amp * _core_dip(grid, (x0, y0), xi, q)
    return CondensateState(psi=Field(grid, amp * np.exp(1j * phase)), t=0.0, units=units, g=g)


def prepare_vortex_pair(
    grid: Grid,
    rho0: float,
    g: float,
    units: UnitSystem,
    separation: float | None = None,
) -> CondensateState:
    """Vortex-antivortex pair along x, symmetric about the origin."""
    if grid.dim != 2:
        raise ValueError("vortex pair preparation is two-dimensional")
    Lx = grid.extents[0]
    d = 0.5 * Lx if separation is None else float(separation)
    if not 0 < d < Lx:
        raise ValueError("separation must lie in (0, Lx)")
    cores = [(-0.5 * d, 0.0, 1), (0.5 * d, 0.0, -1)]
    return prepare_vortex_set(grid, rho0, cores, g, units)


def prepare_vortex_checkerboard(
    grid: Grid, rho0: float, g: float, units: UnitSystem
) -> CondensateState:
    """2x2 alternating-sign vortex cell; stationary by symmetry on the torus."""
    if grid.dim != 2:
        raise ValueError("checkerboard preparation is two-dimensional")
    qx = 0.25 * grid.extents[0]
    qy = 0.25 * grid.extents[1]
    cores = [(-qx, -qy, 1), (qx, -qy, -1), (-qx, qy, -1), (qx, qy, 1)]
    return prepare_vortex_set(grid, rho0, cores, g, units)


def lattice_trap_potential(
    grid: Grid,
    omega: float,
    units: UnitSystem,
    trap_height: float | None = None,
    g: float = 0.0,
    rho0: float = 0.0,
) -> Field:
    """Flat-bottomed periodic well with the co-rotating bucket term folded in.

    V = height*[(1-cos(2 pi x/Lx))^2 + (1-cos(2 pi y/Ly))^2] + m omega^2 r^2/2.

    In the frame rotating at ``omega`` the centrifugal shift cancels the
    quadratic piece exactly, leaving steep quartic-cored walls around a flat
    interior: the rotating cloud fills a uniform disk instead of piling into
    a moat at the wall, and the wrap seam stays empty at any rotation rate
    (a bare cosine well loses to the centrifugal term beyond
    height ~ m omega^2 L^2/16 and leaks density onto the seam).  The default
    height tracks the interaction energy of the compressed disk plus a
    rotational floor.  Evolving a relaxed lattice must keep this same
    potential.
    """
    if trap_height is None:
        # walls at 4*height must beat the disk chemical potential ~2.8*g*rho0,
        # but not by much: every extra depth narrows the disk and squeezes
        # the outermost vortex ring below the census floor
        trap_height = g * rho0 + units.mass * (omega * min(grid.extents[:2]) / 8.0) ** 2
    wx = (1.0 - np.cos(TWO_PI * grid.coordinate_mesh(0) / grid.extents[0])) ** 2
    wy = (1.0 - np.cos(TWO_PI * grid.coordinate_mesh(1) / grid.extents[1])) ** 2
    r2 = grid.coordinate_mesh(0) ** 2 + grid.coordinate_mesh(1) ** 2
    values = trap_height * (wx + wy) + 0.5 * units.mass * omega**2 * r2
    return Field(grid, values * np.ones(grid.shape))


def _flat_disk_profile(
    grid: Grid, potential: Field, omega: float, n_atoms: float, g: float, units: UnitSystem
) -> tuple[np.ndarray, float]:
    """Thomas-Fermi density for the rotating-frame effective well.

    Solves integral of max(0, mu - V_eff)/g = N for mu by bisection, with
    V_eff = V - m omega^2 r^2 / 2 (the frame the relaxation works in).
    """
    r2 = grid.coordinate_mesh(0) ** 2 + grid.coordinate_mesh(1) ** 2
    v_eff = potential.values - 0.5 * units.mass * omega**2 * r2
    v_eff = v_eff * np.ones(grid.shape)
    dv = grid.cell_volume
    lo, hi = float(v_eff.min()), float(v_eff.max()) + g * n_atoms
    for _ in range(80):
        mu = 0.5 * (lo + hi)
        if np.maximum(0.0, mu - v_eff).sum() * dv / g > n_atoms:
            hi = mu
        else:
            lo = mu
    mu = 0.5 * (lo + hi)
    return np.maximum(0.0, mu - v_eff) / g, mu


def feynman_lattice_spacing(omega: float, units: UnitSystem) -> float:
    """Triangular intervortex spacing at rigid-body vortex density.

    One quantum of circulation per cell of area pi*hbar/(m*omega) gives
    a = sqrt(2 pi hbar / (sqrt(3) m omega)).
    """
    if omega <= 0:
        raise ValueError("spacing needs omega > 0")
    return float(np.sqrt(TWO_PI * units.hbar / (np.sqrt(3.0) * units.mass * omega)))


def prepare_vortex_lattice(
    grid: Grid,
    omega: float,
    g: float,
    rho0: float,
    units: UnitSystem,
    seed: int = 0,
    max_steps: int = 12000,
    tol: float = 1e-9,
    trap_height: float | None = None,
):
    """Rotating-frame vortex lattice from seeded imaginary-time relaxation.

    Builds the flat-disk Thomas-Fermi profile for the confinement well,
    plants one +1 singularity per Feynman cell (triangular packing) where
    the profile is substantial, parks the torus-mandated compensating -1
    charges in the vacuum beyond the walls, and relaxes E - omega*Lz in two
    stages: a long coarse stage at 5x the diffusive step, then a polish at
    the stable step.  Seeding matters because vortex nucleation through the
    edge density gradient is exponentially slow in imaginary time; the seeds
    put the topology in place so relaxation only adjusts positions.  Census
    the result with ``rho_cut = CENSUS_VACUUM_FRACTION * rho.max()``: that
    sees every core the cloud actually holds while ignoring the parked
    compensators.

    ``rho0`` sets the total atom number rho0*Lx*Ly, which the well gathers
    into a denser central disk.  omega=0 skips the well and seeds and
    returns the homogeneous ground state.  Returns the combined relaxation
    result; the prepared state is ``result.state``.
    """
    from . import dynamics  # deferred: dynamics builds on this module

    if omega < 0:
        raise ValueError("omega must be nonnegative")
    if grid.dim != 2:
        raise ValueError("lattice preparation is two-dimensional")
    if rho0 <= 0 or g <= 0:
        raise ValueError("lattice preparation needs rho0 > 0 and g > 0")

    n_atoms = rho0 * grid.extents[0] * grid.extents[1]
    dv = grid.cell_volume

    if omega == 0:
        state = prepare_homogeneous(grid, rho0, g, units)
        config = dynamics.EvolutionConfig(
            dt=dynamics.stable_dt(grid, units),
            n_steps=max_steps,
            scheme="imaginary_time",
            omega=0.0,
            relax_tol=tol,
        )
        return dynamics.relax_imaginary_time(state, config)

    potential = lattice_trap_potential(grid, omega, units, trap_height, g=g, rho0=rho0)
    rho_tf, _ = _flat_disk_profile(grid, potential, omega, n_atoms, g, units)

    xs = grid.axis_coordinates(0)
    ys = grid.axis_coordinates(1)
    lx, ly = grid.extents[0], grid.extents[1]
    spacing = feynman_lattice_spacing(omega, units)
    cores: list[tuple[float, float, int]] = []
    j_range = int(np.ceil(max(lx, ly) / spacing)) + 1
    for j in range(-j_range, j_range + 1):
        y0 = j * spacing * np.sqrt(3.0) / 2.0
        for i in range(-j_range, j_range + 1):
            x0 = (i + 0.5 * (j % 2)) * spacing
            if abs(x0) > 0.5 * lx - 1.0 or abs(y0) > 0.5 * ly - 1.0:
                continue
            ix = int(np.argmin(np.abs(xs - x0)))
            iy = int(np.argmin(np.abs(ys - y0)))
            if rho_tf[ix, iy] > 0.1 * rho_tf.max():
                cores.append((x0, y0, +1))

    rng = np.random.Generator(np.random.Philox(seed))
    for k in range(len(cores)):
        sx = -0.5 * lx if k % 4 in (0, 2) else 0.5 * lx
        sy = -0.5 * ly if k % 4 in (0, 1) else 0.5 * ly
        jx, jy = rng.uniform(0.5, 3.0, size=2)
        cores.append((sx + jx if sx < 0 else sx - jx, sy + jy if sy < 0 else sy - jy, -1))

    phase = _neutral_phase(grid, cores)
    xi = healing_length(g, float(rho_tf.max()), units.hbar, units.mass)
    amp = np.sqrt(rho_tf)
    for x0, y0, q in cores:
        amp = amp * _core_dip(grid, (x0, y0), xi, q)
    psi = amp * np.exp(1j * phase)
    psi *= np.sqrt(n_atoms / (np.sum(np.abs(psi) ** 2) * dv))
    state = CondensateState(psi=Field(grid, psi), t=0.0, units=units, g=g)

    coarse_steps = max(1, (3 * max_steps) // 4)
    coarse = dynamics.relax_imaginary_time(
        state,
        dynamics.EvolutionConfig(
            dt=5.0 * dynamics.stable_dt(grid, units),
            n_steps=coarse_steps,
            scheme="imaginary_time",
            potential=potential,
            omega=omega,
            relax_tol=tol,
        ),
    )
    polish = dynamics.relax_imaginary_time(
        coarse.state,
        dynamics.EvolutionConfig(
            dt=dynamics.stable_dt(grid, units),
            n_steps=max(1, max_steps - coarse_steps),
            scheme="imaginary_time",
            potential=potential,
            omega=omega,
            relax_tol=tol,
        ),
    )
    return dataclasses.replace(
        polish,
        steps=coarse.steps + polish.steps,
        monotonic=coarse.monotonic and polish.monotonic,
    )


# --- vortex detection -----------------------------------------------------


@dataclass(frozen=True)
class VortexSighting:
    x: float
    y: float
    winding: int


def _wrap_phase(delta: np.ndarray) -> np.ndarray:
    return (delta + np.pi) % TWO_PI - np.pi


def vortex_census(state: CondensateState, rho_cut: float = 0.0) -> list[VortexSighting]:
    """Phase winding of every plaquette; returns the nonzero ones.

    The windings counted over the whole torus always telescope to zero, so
    any imprinted charge is balanced either by partners or by a wrap seam.
    ``rho_cut`` (absolute density) drops plaquettes whose corners all sit
    below it — used to ignore ghost vortices in the low-density halo of a
    trapped, rotating cloud.
    """
    if state.grid.dim != 2:
        raise ValueError("vortex census is two-dimensional")
    grid = state.grid
    phase = np.angle(state.psi.values)

    u_x = _wrap_phase(np.roll(phase, -1, axis=0) - phase)
    u_y = _wrap_phase(np.roll(phase, -1, axis=1) - phase)
    circulation = u_x + np.roll(u_y, -1, axis=0) - np.roll(u_x, -1, axis=1) - u_y
    winding = np.rint(circulation / TWO_PI).astype(int)

    if rho_cut > 0.0:
        rho = np.abs(state.psi.values) ** 2
        corner_max = np.maximum(rho, np.roll(rho, -1, axis=0))
        corner_max = np.maximum(corner_max, np.roll(rho, -1, axis=1))
        corner_max = np.maximum(corner_max, np.roll(np.roll(rho, -1, axis=0), -1, axis=1))
        winding = np.where(corner_max >= rho_cut, winding, 0)

    xs = grid.axis_coordinates(0)
    ys = grid.axis_coordinates(1)
    hx, hy = grid.spacing
    sightings = []
    for i, j in zip(*np.nonzero(winding)):
        sightings.append(
            VortexSighting(
                x=float(xs[i] + 0.5 * hx),
                y=float(ys[j] + 0.5 * hy),
                winding=int(winding[i, j]),
            )
        )
    return sightings


def loop_winding(state: CondensateState, center: tuple[float, float], half_width: float) -> int:
    """Net phase winding around a square loop of the given half-width.

    Sums wrapped nearest-neighbor phase differences along the loop, so it
    stays exact as long as the phase changes by less than pi per cell —
    use a loop a few cells away from any core.
    """
    if state.grid.dim != 2:
        raise ValueError("loop winding is two-dimensional")
    grid = state.grid
    phase = np.angle(state.psi.values)
    nx, ny = grid.points
    hx, hy = grid.spacing

    def node(px: float, py: float) -> tuple[int, int]:
        i = int(np.round((px + 0.5 * grid.extents[0]) / hx)) % nx
        j = int(np.round((py + 0.5 * grid.extents[1]) / hy)) % ny
        return i, j

    i0, j0 = node(center[0] - half_width, center[1] - half_width)
    i1, j1 = node(center[0] + half_width, center[1] + half_width)
    path = []
    for i in range(i0, i1):
        path.append((i % nx, j0))
    for j in range(j0, j1):
        path.append((i1 % nx, j % ny))
    for i in range(i1, i0, -1):
        path.append((i % nx, j1 % ny))
    for j in range(j1, j0, -1):
        path.append((i0, j % ny))

    total = 0.0
    for (ia, ja), (ib, jb) in zip(path, path[1:] + path[:1]):
        total += _wrap_phase(phase[ib, jb] - phase[ia, ja])
    return int(np.rint(total / TWO_PI))


def census_to_csv(sightings: list[VortexSighting]) -> str:
    lines = ["x,y,winding"]
    for s in sightings:
        lines.append(f"{s.x:.17g},{s.y:.17g},{s.winding}")
    return "\n".join(lines) + "\n"


def total_winding(sightings: list[VortexSighting]) -> int:
    return sum(s.winding for s in sightings)


def feynman_vortex_count(omega: float, area: float, mass: float, hbar: float) -> float:
    """Coarse rotating-bucket estimate N_v = m omega A / (pi hbar)."""
    return mass * omega * area / (np.pi * hbar)
