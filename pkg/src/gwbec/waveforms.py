"""Time-dependent strain waveforms h(t) with analytic first and second derivatives.

The wave is treated as purely time dependent (the condensate is far smaller
than the wavelength), so a waveform is just a scalar signal on [0, duration].
Analytic kinds return closed-form derivatives; tabulated data goes through a
C2 cubic interpolant so that the second derivative needed by the effective
quadrupolar field exists everywhere.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

KINDS = ("sinusoid", "gaussian_pulse", "linear_chirp", "tabulated")

# relative slack for t == duration comparisons under floating-point stepping
_EDGE_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class StrainWaveform:
    """Strain signal h(t) on [0, duration], |h| <= h_max.

    ``frequency``/``phase`` apply to sinusoid and chirp, ``chirp_rate`` is the
    frequency slope of the chirp, ``center``/``width`` parameterize the
    Gaussian pulse.  Instances are immutable and safe to share.
    """

    kind: str
    h_max: float
    duration: float
    frequency: float = 0.0
    phase: float = 0.0
    center: float = 0.0
    width: float = 0.0
    chirp_rate: float = 0.0
    _spline: CubicSpline | None = field(default=None, repr=False)

    def sample(self, t):
        return sample(self, t)

    def sample_h(self, t):
        return sample(self, t)[0]

    @property
    def tag(self) -> str:
        if self.kind == "sinusoid":
            return f"sinusoid(h_max={self.h_max:g}, f={self.frequency:g})"
        if self.kind == "gaussian_pulse":
            return f"gaussian_pulse(h_max={self.h_max:g}, center={self.center:g}, width={self.width:g})"
        if self.kind == "linear_chirp":
            return f"linear_chirp(h_max={self.h_max:g}, f={self.frequency:g}, rate={self.chirp_rate:g})"
        return f"tabulated(h_max={self.h_max:g}, n={len(self._spline.x)})"

    def rescaled(self, h_max: float) -> "StrainWaveform":
        """Same signal shape with the peak strain set to ``h_max``."""
        if h_max < 0:
            raise ValueError("h_max must be non-negative")
        if self.kind == "tabulated":
            factor = h_max / self.h_max if self.h_max > 0 else 0.0
            xs = self._spline.x
            return make_tabulated(xs, factor * self._spline(xs))
        kwargs = {f: getattr(self, f) for f in
                  ("kind", "duration", "frequency", "phase", "center", "width", "chirp_rate")}
        return StrainWaveform(h_max=h_max, **kwargs)


def make_waveform(kind: str, **params) -> StrainWaveform:
    """Build a validated waveform of the given kind.

    sinusoid:       h_max, frequency, duration, [phase]
    gaussian_pulse: h_max, center, width, duration
    linear_chirp:   h_max, frequency, chirp_rate, duration, [phase]
    tabulated:      times, values  (duration is the last sample time)
    """
    if kind not in KINDS:
        raise ValueError(f"unknown waveform kind {kind!r}; expected one of {KINDS}")
    if kind == "tabulated":
        return make_tabulated(np.asarray(params["times"], dtype=float),
                              np.asarray(params["values"], dtype=float))

    h_max = float(params["h_max"])
    duration = float(params["duration"])
    if h_max < 0:
        raise ValueError("h_max must be non-negative")
    if duration <= 0:
        raise ValueError("duration must be positive")

    if kind == "sinusoid":
        frequency = float(params["frequency"])
        if frequency <= 0:
            raise ValueError("sinusoid frequency must be positive")
        return StrainWaveform(kind=kind, h_max=h_max, duration=duration,
                              frequency=frequency, phase=float(params.get("phase", 0.0)))
    if kind == "gaussian_pulse":
        width = float(params["width"])
        if width <= 0:
            raise ValueError("pulse width must be positive")
        return StrainWaveform(kind=kind, h_max=h_max, duration=duration,
                              center=float(params["center"]), width=width)
    # linear_chirp
    frequency = float(params["frequency"])
    if frequency <= 0:
        raise ValueError("chirp start frequency must be positive")
    return StrainWaveform(kind=kind, h_max=h_max, duration=duration,
                          frequency=frequency, chirp_rate=float(params.get("chirp_rate", 0.0)),
                          phase=float(params.get("phase", 0.0)))


def make_tabulated(times, values) -> StrainWaveform:
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("tabulated waveform needs at least 2 samples")
    if values.shape != times.shape:
        raise ValueError("times and values must have matching shapes")
    if not np.all(np.diff(times) > 0):
        raise ValueError("tabulated times must be strictly increasing")
    if times[0] != 0.0:
        raise ValueError("tabulated times must start at 0")
    spline = CubicSpline(times, values)  # not-a-knot: exact on cubic data
    # the interpolant may overshoot the table, so h_max comes from a dense scan
    dense = np.linspace(times[0], times[-1], 32 * times.size)
    h_max = float(np.max(np.abs(spline(dense))))
    return StrainWaveform(kind="tabulated", h_max=h_max, duration=float(times[-1]),
                          _spline=spline)


def load_tabulated_csv(path: str | Path) -> StrainWaveform:
    """Read a 2-column CSV with header line ``t,h``."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:2]] != ["t", "h"]:
            raise ValueError(f"{path}: expected CSV header 't,h'")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    if len(rows) < 2:
        raise ValueError(f"{path}: tabulated waveform needs at least 2 samples")
    times, values = zip(*rows)
    return make_tabulated(times, values)


def zero_waveform(duration: float) -> StrainWaveform:
    """Null signal used by unstrained reference runs."""
    return make_waveform("sinusoid", h_max=0.0, frequency=1.0, duration=duration)


def sample(waveform: StrainWaveform, t):
    """Return (h, dh/dt, d2h/dt2) at time(s) t in [0, duration].

    Out-of-range times are an error; there is no extrapolation or zero
    padding, so misconfigured time spans fail loudly.
    """
    t_arr = np.asarray(t, dtype=float)
    slack = _EDGE_RTOL * waveform.duration
    if np.any(t_arr < -slack) or np.any(t_arr > waveform.duration + slack):
        raise ValueError(
            f"sample time outside waveform domain [0, {waveform.duration}]: "
            f"range [{t_arr.min()}, {t_arr.max()}]"
        )

    w = waveform
    if w.kind == "sinusoid":
        omega = 2.0 * np.pi * w.frequency
        arg = omega * t_arr + w.phase
        h = w.h_max * np.sin(arg)
        hd = w.h_max * omega * np.cos(arg)
        hdd = -w.h_max * omega**2 * np.sin(arg)
    elif w.kind == "gaussian_pulse":
        u = (t_arr - w.center) / w.width
        env = w.h_max * np.exp(-0.5 * u**2)
        h = env
        hd = -env * u / w.width
        hdd = env * (u**2 - 1.0) / w.width**2
    elif w.kind == "linear_chirp":
        # instantaneous frequency f + chirp_rate * t
        arg = 2.0 * np.pi * (w.frequency * t_arr + 0.5 * w.chirp_rate * t_arr**2) + w.phase
        omega_t = 2.0 * np.pi * (w.frequency + w.chirp_rate * t_arr)
        h = w.h_max * np.sin(arg)
        hd = w.h_max * omega_t * np.cos(arg)
        hdd = w.h_max * (2.0 * np.pi * w.chirp_rate * np.cos(arg) - omega_t**2 * np.sin(arg))
    else:  # tabulated
        tc = np.clip(t_arr, w._spline.x[0], w._spline.x[-1])
        h = w._spline(tc)
        hd = w._spline(tc, 1)
        hdd = w._spline(tc, 2)

    if np.isscalar(t) or t_arr.ndim == 0:
        return float(h), float(hd), float(hdd)
    return h, hd, hdd
