"""Linearized phonon dynamics around a flat-spacetime background flow.

The first-order system for density and phase perturbations,

    (d/dt) δρ = -∇.(v0 δρ) - ∇.(ρ0 ∇δS)/m + F_ρ
    (d/dt) δS = -v0.∇δS - g δρ + QP[δρ] + F_S,

is integrated with RK4 and spectral space operators.  The strain enters
only through the source fields, in one of two equivalent forms:

- metric form:  F_ρ = h [∂y(ρ0 v0^y) - ∂x(ρ0 v0^x)],
                F_S = m h [(v0^y)² - (v0^x)²] / 2
- gauge form:   F_ρ = (ḣ/2)(x ∂x ρ0 - y ∂y ρ0),
                F_S = (ḣ/2)(x m v0^x - y m v0^y)

Both vanish identically (exact zeros) for a homogeneous condensate at
rest.  The quantum-pressure operator QP is optional and carries no strain
coupling of its own; with it, small ripples on a uniform background
oscillate at the full Bogoliubov frequency ω² = c_s²k² + ħ²k⁴/4m².
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import waveforms
from .condensate import CondensateState, madelung_decompose
from .errors import EvolutionAbort
from .grids import Field, Grid, spectral_derivative

SOURCE_FORMS = ("metric", "gauge")
CFL_SAFETY = 0.5
# Madelung velocity diverges like 1/r into a vortex core while the
# hydrodynamic description has already failed there (the core is the kξ ≳ 1
# region).  Background extraction clips the speed at this multiple of the
# bulk sound speed: outside the clip ring the flow is untouched, inside it
# the linear problem stays well-posed (bounded CFL, no grid-rate growth).
CORE_SPEED_CAP = 1.5


class BackgroundResidualWarning(UserWarning):
    """Background is not stationary to the requested tolerance."""


@dataclass
class BackgroundFlow:
    """Flat-spacetime background (ρ0, v0, S0) with coupling and mass.

    The sound speed is always recomputed from ρ0 (single source of truth).
    """

    rho0: Field
    v0: tuple[Field, ...]
    S0: Field
    g: float
    m: float
    hbar: float
    residual_report: dict | None = None

    @property
    def grid(self) -> Grid:
        return self.rho0.grid

    @property
    def cs2(self) -> Field:
        return Field(self.grid, self.g * self.rho0.values / self.m)

    @property
    def max_speed(self) -> float:
        """max over the grid of c_s + |v0| (acoustic CFL speed)."""
        cs = np.sqrt(np.clip(self.cs2.values, 0.0, None))
        v2 = np.zeros(self.grid.shape)
        for comp in self.v0:
            v2 = v2 + comp.values**2
        return float(np.max(cs + np.sqrt(v2)))

    def residuals(self, potential: Field | None = None) -> dict:
        """Stationarity diagnostics: continuity and Bernoulli residuals.

        continuity_rel: rms ∇.(ρ0 v0) against the acoustic scale ρ̄ c̄ k1;
        bernoulli_rel: spread of the local chemical potential
        m v0²/2 + g ρ0 + V - (ħ²/2m) ∇²√ρ0/√ρ0 against its magnitude.
        """
        grid = self.grid
        rho = self.rho0.values
        rho_max = float(rho.max())
        cs_max = np.sqrt(self.g * rho_max / self.m)
        k1 = 2.0 * np.pi / max(grid.extents)

        div = np.zeros(grid.shape)
        for axis, comp in enumerate(self.v0):
            div = div + spectral_derivative(grid, rho * comp.values, axis)
        cont_rms = float(np.sqrt(np.mean(div**2)))
        cont_scale = rho_max * cs_max * k1 + 1e-300

        v2 = np.zeros(grid.shape)
        for comp in self.v0:
            v2 = v2 + comp.values**2
        sqrt_rho = np.sqrt(np.clip(rho, 0.0, None))
        lap_sqrt = _laplacian(grid, sqrt_rho)
        valid = rho > 1e-12 * rho_max
        quantum = np.where(valid, lap_sqrt / np.where(valid, sqrt_rho, 1.0), 0.0)
        mu = 0.5 * self.m * v2 + self.g * rho - (self.hbar**2 / (2.0 * self.m)) * quantum
        if potential is not None:
            mu = mu + potential.values
        mu_valid = mu[valid]
        bern_spread = float(np.std(mu_valid)) if mu_valid.size else 0.0
        bern_scale = float(np.mean(np.abs(mu_valid))) + self.g * rho_max + 1e-300

        return {
            "continuity_rms": cont_rms,
            "continuity_rel": cont_rms / cont_scale,
            "bernoulli_spread": bern_spread,
            "bernoulli_rel": bern_spread / bern_scale,
        }


def background_from(
    state: CondensateState,
    potential: Field | None = None,
    warn_tol: float = 1e-6,
) -> BackgroundFlow:
    """Extract (ρ0, v0, S0) from a prepared state; warns when not steady.

    A moving structure (e.g. a drifting vortex pair) leaves a finite
    residual; the warning flags it, and analysis may proceed deliberately.
    Inside vortex cores the raw Madelung speed is clipped at
    CORE_SPEED_CAP, c_s(ρ_max); circulation integrals along loops outside
    the clip ring are unaffected.
    """
    hydro = madelung_decompose(state)
    grid = state.psi.grid
    rho_max = float(np.max(hydro.rho.values))
    cap = CORE_SPEED_CAP * np.sqrt(max(state.g, 0.0) * rho_max / state.mass)
    v0 = hydro.v
    if cap > 0.0:
        speed2 = np.zeros(grid.shape)
        for comp in hydro.v:
            speed2 = speed2 + comp.values**2
        speed = np.sqrt(speed2)
        scale = np.where(speed > cap, cap / np.where(speed > 0.0, speed, 1.0), 1.0)
        v0 = tuple(Field(grid, comp.values * scale) for comp in hydro.v)
    bg = BackgroundFlow(
        rho0=hydro.rho,
        v0=v0,
        S0=hydro.S,
        g=state.g,
        m=state.mass,
        hbar=state.hbar,
    )
    report = bg.residuals(potential)
    bg.residual_report = report
    worst = max(report["continuity_rel"], report["bernoulli_rel"])
    if worst > warn_tol:
        warnings.warn(
            f"background is not stationary: relative residual {worst:.3e} "
            f"(tolerance {warn_tol:.1e})",
            BackgroundResidualWarning,
            stacklevel=2,
        )
    return bg


@dataclass
class Perturbation:
    """Linear phonon fields (δρ, δS) at time t."""

    drho: Field
    dS: Field
    t: float

    def __post_init__(self):
        if self.drho.grid != self.dS.grid:
            raise ValueError("drho and dS live on different grids")

    @property
    def grid(self) -> Grid:
        return self.drho.grid

    @property
    def number(self) -> float:
        """Atom-number content ∫δρ; conserved by the undriven dynamics."""
        return float(self.drho.values.sum() * self.grid.cell_volume)

    def copy(self) -> "Perturbation":
        return Perturbation(self.drho.copy(), self.dS.copy(), self.t)


@dataclass(frozen=True)
class SourceTerms:
    """Strain source fields for the continuity (F_ρ) and eikonal (F_S) rows."""

    F_rho: Field
    F_S: Field
    form: str

    def scaled(self, factor: float) -> "SourceTerms":
        return SourceTerms(
            Field(self.F_rho.grid, factor * self.F_rho.values),
            Field(self.F_S.grid, factor * self.F_S.values),
            self.form,
        )


def source_terms_metric(bg: BackgroundFlow, h: float) -> SourceTerms:
    """F_ρ = h[∂y(ρ0 v0^y) - ∂x(ρ0 v0^x)],  F_S = m h[(v0^y)² - (v0^x)²]/2."""
    grid = bg.grid
    if grid.dim < 2:
        raise ValueError("the (+) polarization needs x and y axes")
    rho = bg.rho0.values
    vx = bg.v0[0].values
    vy = bg.v0[1].values
    f_rho = h * (
        spectral_derivative(grid, rho * vy, 1) - spectral_derivative(grid, rho * vx, 0)
    )
    f_s = 0.5 * bg.m * h * (vy**2 - vx**2)
    return SourceTerms(Field(grid, f_rho), Field(grid, f_s), "metric")


def source_terms_gauge(bg: BackgroundFlow, hdot: float) -> SourceTerms:
    """F_ρ = (ḣ/2)(x∂x - y∂y)ρ0,  F_S = (ḣ/2)(x m v0^x - y m v0^y).

    The S0 term is evaluated through m v0 = ∇S0 so branch cuts in the
    unwrapped phase cannot contaminate the source.
    """
    grid = bg.grid
    if grid.dim < 2:
        raise ValueError("the (+) polarization needs x and y axes")
    x = grid.coordinate_mesh(0)
    y = grid.coordinate_mesh(1)
    rho = bg.rho0.values
    f_rho = 0.5 * hdot * (
        x * spectral_derivative(grid, rho, 0) - y * spectral_derivative(grid, rho, 1)
    )
    f_s = 0.5 * hdot * bg.m * (x * bg.v0[0].values - y * bg.v0[1].values)
    return SourceTerms(
        Field(grid, np.broadcast_to(f_rho, grid.shape).copy()),
        Field(grid, np.broadcast_to(f_s, grid.shape).copy()),
        "gauge",
    )


def zero_sources(grid: Grid, form: str = "metric") -> SourceTerms:
    zeros = np.zeros(grid.shape)
    return SourceTerms(Field(grid, zeros.copy()), Field(grid, zeros.copy()), form)


# --- linear integrator -----------------------------------------------------


def _laplacian(grid: Grid, values: np.ndarray) -> np.ndarray:
    k2, _, _ = grid.k_squared_tables()
    work = values - values.mean()
    out = np.fft.ifftn(-k2 * np.fft.fftn(work))
    return out.real if not np.iscomplexobj(values) else out


def dealias_mask(grid: Grid) -> np.ndarray:
    """Boolean 2/3-rule mask over the grid's reciprocal lattice.

    Keeps mode indices with |n| <= N//3 on each axis.  Pointwise products
    of two fields inside the band alias only into the discarded modes, so
    projecting each RHS evaluation with this mask keeps the discrete
    advection operator skew-adjoint.  Without it, runs on backgrounds with
    near-singular flow (vortex cores) grow at grid-scale rates.
    """
    mask = np.ones(grid.points, dtype=bool)
    for axis, n in enumerate(grid.points):
        idx = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        shape = [1] * grid.dim
        shape[axis] = n
        mask &= (idx <= n // 3).reshape(shape)
    return mask


@dataclass
class _Operator:
    """Precomputed background data for repeated RHS evaluations."""

    bg: BackgroundFlow
    quantum_pressure: bool
    sqrt_rho0: np.ndarray = field(init=False)
    lap_sqrt_rho0: np.ndarray = field(init=False)
    inv_rho32: np.ndarray = field(init=False)
    v0: list[np.ndarray] = field(init=False)
    rho0: np.ndarray = field(init=False)
    mask: np.ndarray = field(init=False)

    def __post_init__(self):
        self.rho0 = self.bg.rho0.values
        self.v0 = [comp.values for comp in self.bg.v0]
        self.mask = dealias_mask(self.bg.grid)
        if self.quantum_pressure:
            self.sqrt_rho0 = np.sqrt(np.clip(self.rho0, 0.0, None))
            floor = 1e-12 * float(self.rho0.max())
            safe = np.clip(self.rho0, floor, None)
            self.lap_sqrt_rho0 = _laplacian(self.bg.grid, self.sqrt_rho0)
            self.inv_rho32 = safe**-1.5
        else:
            self.sqrt_rho0 = np.zeros(0)
            self.lap_sqrt_rho0 = np.zeros(0)
            self.inv_rho32 = np.zeros(0)

    def rhs(self, drho: np.ndarray, dS: np.ndarray, f_rho, f_s):
        grid = self.bg.grid
        m = self.bg.m

        ddrho = np.zeros(grid.shape)
        for axis, v in enumerate(self.v0):
            ddrho -= spectral_derivative(grid, v * drho, axis)
            ddrho -= spectral_derivative(
                grid, self.rho0 * spectral_derivative(grid, dS, axis), axis
            ) / m

        ddS = -self.bg.g * drho
        for axis, v in enumerate(self.v0):
            ddS = ddS - v * spectral_derivative(grid, dS, axis)
        if self.quantum_pressure:
            inner = _laplacian(grid, drho / self.sqrt_rho0)
            qp = (self.bg.hbar**2 / (4.0 * m)) * (
                (self.rho0 * inner - drho * self.lap_sqrt_rho0) * self.inv_rho32
            )
            ddS = ddS + qp

        if f_rho is not None:
            ddrho = ddrho + f_rho
        if f_s is not None:
            ddS = ddS + f_s
        # project back onto the 2/3 band (see dealias_mask)
        ddrho = np.fft.ifftn(self.mask * np.fft.fftn(ddrho)).real
        ddS = np.fft.ifftn(self.mask * np.fft.fftn(ddS)).real
        return ddrho, ddS


def stable_dt_linear(
    bg: BackgroundFlow, quantum_pressure: bool = False, safety: float = CFL_SAFETY
) -> float:
    """Step size under the acoustic (and optional Bogoliubov-stiff) limit."""
    grid = bg.grid
    k_max = np.pi / min(grid.spacing)
    cs_max = float(np.sqrt(np.max(np.clip(bg.cs2.values, 0.0, None))))
    v2 = np.zeros(grid.shape)
    for comp in bg.v0:
        v2 = v2 + comp.values**2
    v_max = float(np.sqrt(v2.max()))
    omega = bogoliubov_frequency(k_max, cs_max, bg.m, bg.hbar, quantum_pressure)
    lam = omega + v_max * k_max
    if lam <= 0.0:
        raise ValueError("background supports no propagation; pick dt by hand")
    return safety * 2.8 / lam


def _resolve_sources(sources, t: float):
    if sources is None:
        return None, None
    if callable(sources):
        sources = sources(t)
    return sources.F_rho.values, sources.F_S.values


def step_linear(
    pert: Perturbation,
    bg: BackgroundFlow,
    sources,
    dt: float,
    quantum_pressure: bool = False,
    _op: _Operator | None = None,
) -> Perturbation:
    """One RK4 step of the driven first-order system.

    ``sources`` is a SourceTerms (held fixed over the step), a callable
    t -> SourceTerms (sampled at the RK4 stage times), or None.
    """
    cfl = min(bg.grid.spacing) / bg.max_speed if bg.max_speed > 0 else np.inf
    if dt >= cfl:
        raise ValueError(f"dt = {dt} violates the acoustic CFL bound {cfl:.3e}")
    op = _op if _op is not None else _Operator(bg, quantum_pressure)

    r0, s0 = pert.drho.values, pert.dS.values
    t = pert.t

    f1 = op.rhs(r0, s0, *_resolve_sources(sources, t))
    f2 = op.rhs(r0 + 0.5 * dt * f1[0], s0 + 0.5 * dt * f1[1],
                *_resolve_sources(sources, t + 0.5 * dt))
    f3 = op.rhs(r0 + 0.5 * dt * f2[0], s0 + 0.5 * dt * f2[1],
                *_resolve_sources(sources, t + 0.5 * dt))
    f4 = op.rhs(r0 + dt * f3[0], s0 + dt * f3[1],
                *_resolve_sources(sources, t + dt))

    sixth = dt / 6.0
    drho = r0 + sixth * (f1[0] + 2.0 * f2[0] + 2.0 * f3[0] + f4[0])
    dS = s0 + sixth * (f1[1] + 2.0 * f2[1] + 2.0 * f3[1] + f4[1])
    if not (np.all(np.isfinite(drho)) and np.all(np.isfinite(dS))):
        raise EvolutionAbort(0, "non-finite perturbation amplitude")
    return Perturbation(Field(bg.grid, drho), Field(bg.grid, dS), t + dt)


def perturbation_energy(
    pert: Perturbation, bg: BackgroundFlow, quantum_pressure: bool = False
) -> float:
    """Quadratic energy ∫ g δρ²/2 + ρ0|∇δS|²/2m + δρ v0.∇δS (+ QP part).

    Exactly conserved by the undriven dynamics on homogeneous backgrounds;
    on flowing inhomogeneous backgrounds it is the natural quadratic form
    but only approximately conserved.
    """
    grid = bg.grid
    drho = pert.drho.values
    dS = pert.dS.values
    density = 0.5 * bg.g * drho**2
    for axis, v in enumerate(bg.v0):
        grad_s = spectral_derivative(grid, dS, axis)
        density = density + (0.5 / bg.m) * bg.rho0.values * grad_s**2
        density = density + drho * v.values * grad_s
    if quantum_pressure:
        floor = 1e-12 * float(bg.rho0.values.max())
        safe_rho = np.clip(bg.rho0.values, floor, None)
        for axis in range(grid.dim):
            grad_r = spectral_derivative(grid, drho, axis)
            density = density + (bg.hbar**2 / (8.0 * bg.m)) * grad_r**2 / safe_rho
    return float(density.sum() * grid.cell_volume)


@dataclass
class LinearTrajectory:
    form: str
    quantum_pressure: bool
    dt: float
    times: np.ndarray
    number: np.ndarray
    energy: np.ndarray
    amplitude: np.ndarray
    probe_drho: np.ndarray | None
    probe_dS: np.ndarray | None
    final: Perturbation


def evolve_linear(
    pert: Perturbation,
    bg: BackgroundFlow,
    dt: float,
    n_steps: int,
    waveform: waveforms.StrainWaveform | None = None,
    form: str = "metric",
    quantum_pressure: bool = False,
    record_stride: int = 1,
    probe_mode: tuple[int, ...] | None = None,
) -> LinearTrajectory:
    """Drive (or freely evolve) the linear system and record diagnostics.

    With a waveform, unit-strain source fields are precomputed once and
    rescaled by h(t) (metric) or ḣ(t) (gauge) at each RK4 stage, so the
    response is exactly linear in the waveform amplitude.
    """
    if form not in SOURCE_FORMS:
        raise ValueError(f"unknown source form {form!r}")
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")

    op = _Operator(bg, quantum_pressure)
    source_fn = None
    if waveform is not None:
        end = pert.t + dt * n_steps
        if pert.t < 0 or end > waveform.duration * (1.0 + 1e-9):
            raise ValueError(
                f"waveform duration {waveform.duration} does not cover [{pert.t}, {end}]"
            )
        if form == "metric":
            unit = source_terms_metric(bg, 1.0)

            def source_fn(t):
                h, _, _ = waveforms.sample(waveform, t)
                return unit.scaled(h)

        else:
            unit = source_terms_gauge(bg, 1.0)

            def source_fn(t):
                _, hdot, _ = waveforms.sample(waveform, t)
                return unit.scaled(hdot)

    index = tuple(np.asarray(probe_mode) % np.asarray(bg.grid.points)) if probe_mode else None

    times, number, energy, amplitude = [], [], [], []
    probe_r, probe_s = [], []
    dV = bg.grid.cell_volume

    def record(p: Perturbation):
        times.append(p.t)
        number.append(p.number)
        energy.append(perturbation_energy(p, bg, quantum_pressure))
        amplitude.append(float(np.sqrt(np.sum(p.drho.values**2) * dV)))
        if index is not None:
            size = bg.grid.size
            probe_r.append(complex(np.fft.fftn(p.drho.values)[index]) / size)
            probe_s.append(complex(np.fft.fftn(p.dS.values)[index]) / size)

    current = pert.copy()
    record(current)
    for step in range(1, n_steps + 1):
        current = step_linear(current, bg, source_fn, dt, quantum_pressure, _op=op)
        if step % record_stride == 0 or step == n_steps:
            record(current)

    return LinearTrajectory(
        form=form,
        quantum_pressure=quantum_pressure,
        dt=dt,
        times=np.array(times),
        number=np.array(number),
        energy=np.array(energy),
        amplitude=np.array(amplitude),
        probe_drho=np.array(probe_r) if index is not None else None,
        probe_dS=np.array(probe_s) if index is not None else None,
        final=current,
    )


def make_standing_wave(
    bg: BackgroundFlow,
    amplitude: float,
    modes: tuple[int, ...],
    component: str = "dS",
) -> Perturbation:
    """Seed δS (or δρ) with A cos(k.r) on the reciprocal lattice; zero mean."""
    grid = bg.grid
    if len(modes) != grid.dim:
        raise ValueError("need one integer mode number per axis")
    if component not in ("dS", "drho"):
        raise ValueError("component must be 'dS' or 'drho'")
    phase = np.zeros(grid.shape)
    for axis, n in enumerate(modes):
        k = 2.0 * np.pi * int(n) / grid.extents[axis]
        phase = phase + k * grid.coordinate_mesh(axis)
    wave = amplitude * np.cos(phase)
    wave -= wave.mean()
    zeros = np.zeros(grid.shape)
    if component == "dS":
        return Perturbation(Field(grid, zeros), Field(grid, wave), 0.0)
    return Perturbation(Field(grid, wave), Field(grid, zeros), 0.0)


# --- phonon content --------------------------------------------------------


@dataclass(frozen=True)
class PhononContent:
    n_est: float
    basis: str
    modes: list[tuple[tuple[int, ...], float, float, float]]

    def to_csv(self) -> str:
        lines = ["k_modes,abs_k,E_k,n_k"]
        for kvec, absk, e_k, n_k in self.modes:
            tag = " ".join(str(int(n)) for n in kvec)
            lines.append(f"{tag},{absk:.17g},{e_k:.17g},{n_k:.17g}")
        return "\n".join(lines) + "\n"


def bogoliubov_frequency(
    k: float, cs: float, m: float, hbar: float, quantum_pressure: bool = True
) -> float:
    """ω(k) = sqrt(c_s²k² + ħ²k⁴/4m²); the k⁴ term drops when QP is off."""
    if not quantum_pressure:
        return cs * k
    return np.sqrt((cs * k) ** 2 + (hbar * k**2 / (2.0 * m)) ** 2)


def phonon_content(
    pert: Perturbation,
    bg: BackgroundFlow,
    quantum_pressure: bool = False,
    spectrum_floor: float = 1e-12,
) -> PhononContent:
    """Phonon-number estimate n = Σ_k E_k/(ħ ω_k) with the mode spectrum.

    On a homogeneous background at rest the plane-wave Bogoliubov basis is
    well-defined and the estimate is a true mode sum.  Otherwise only an
    energy-based estimate is returned (energy over ħω at the spectral
    centroid), with the basis labeled accordingly.
    """
    grid = bg.grid
    rho = bg.rho0.values
    rho_mean = float(rho.mean())
    v_max = max((float(np.max(np.abs(c.values))) for c in bg.v0), default=0.0)
    cs_mean = np.sqrt(bg.g * rho_mean / bg.m) if bg.g > 0 else 0.0
    homogeneous = (
        float(rho.std()) <= 1e-8 * max(rho_mean, 1e-300)
        and v_max <= 1e-8 * max(cs_mean, 1e-300)
        and bg.g > 0
    )

    size = grid.size
    dV = grid.cell_volume
    volume = grid.volume
    rho_hat = np.fft.fftn(pert.drho.values) / size
    s_hat = np.fft.fftn(pert.dS.values) / size

    k2 = np.zeros(grid.shape)
    for axis in range(grid.dim):
        k2 = k2 + grid.wavenumber_mesh(axis) ** 2
    absk = np.sqrt(k2)

    if homogeneous:
        qp_weight = (bg.hbar**2 * k2 / (8.0 * bg.m * rho_mean)) if quantum_pressure else 0.0
        e_density = (0.5 * bg.g + qp_weight) * np.abs(rho_hat) ** 2
        e_density = e_density + (rho_mean * k2 / (2.0 * bg.m)) * np.abs(s_hat) ** 2
        e_modes = volume * e_density
        omega = bogoliubov_frequency(absk, cs_mean, bg.m, bg.hbar, quantum_pressure)

        nonzero = absk > 0
        n_modes = np.zeros(grid.shape)
        n_modes[nonzero] = e_modes[nonzero] / (bg.hbar * omega[nonzero])
        n_est = float(n_modes.sum())

        spectrum = []
        threshold = spectrum_floor * float(e_modes.max()) if e_modes.max() > 0 else np.inf
        seen: dict[tuple[int, ...], tuple[float, float, float]] = {}
        points = grid.points
        for idx in zip(*np.nonzero(e_modes > threshold)):
            kvec = tuple(
                int(n if n <= points[a] // 2 else n - points[a]) for a, n in enumerate(idx)
            )
            canon = kvec if _canonical(kvec) else tuple(-n for n in kvec)
            e_prev, n_prev, _ = seen.get(canon, (0.0, 0.0, 0.0))
            seen[canon] = (
                e_prev + float(e_modes[idx]),
                n_prev + float(n_modes[idx]),
                float(absk[idx]),
            )
        for kvec, (e_k, n_k, kabs) in sorted(seen.items(), key=lambda kv: -kv[1][0]):
            spectrum.append((kvec, kabs, e_k, n_k))
        return PhononContent(n_est=n_est, basis="plane-wave-bogoliubov", modes=spectrum)

    energy = perturbation_energy(pert, bg, quantum_pressure)
    power = np.abs(rho_hat) ** 2 + np.abs(s_hat) ** 2
    weight = float((power * (absk > 0)).sum())
    k_centroid = float((power * absk).sum() / weight) if weight > 0 else 2.0 * np.pi / max(
        grid.extents
    )
    cs_eff = np.sqrt(bg.g * rho_mean / bg.m) if bg.g > 0 else 0.0
    omega_ref = bogoliubov_frequency(k_centroid, cs_eff, bg.m, bg.hbar, quantum_pressure)
    n_est = energy / (bg.hbar * omega_ref) if omega_ref > 0 else 0.0
    return PhononContent(n_est=float(n_est), basis="energy-estimate", modes=[])


def _canonical(kvec: tuple[int, ...]) -> bool:
    for n in kvec:
        if n > 0:
            return True
        if n < 0:
            return False
    return True


def fit_frequency(times: np.ndarray, series: np.ndarray) -> float:
    """Least-squares frequency of a sampled sinusoid via its 3-term recurrence.

    For y_j = A cos(ω t_j + φ) on a uniform grid, y_{j+1} + y_{j-1} =
    2 cos(ωΔt) y_j; the ratio estimator below solves that in least squares.
    """
    times = np.asarray(times)
    series = np.asarray(series, dtype=float)
    if times.size != series.size or times.size < 5:
        raise ValueError("need at least 5 uniformly spaced samples")
    steps = np.diff(times)
    dt = steps[0]
    if not np.allclose(steps, dt, rtol=1e-9, atol=0.0):
        raise ValueError("samples must be uniformly spaced")
    mid = series[1:-1]
    denom = 2.0 * float(np.dot(mid, mid))
    if denom == 0.0:
        raise ValueError("series is identically zero")
    c = float(np.dot(mid, series[2:] + series[:-2])) / denom
    c = min(1.0, max(-1.0, c))
    return float(np.arccos(c) / dt)
