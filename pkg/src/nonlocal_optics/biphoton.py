"""Two-photon joint amplitudes on uniform grids.

States are stored as cell amplitudes: ``sum(|data|**2) == 1``.  A state lives
either in the frequency domain (axes are angular frequencies) or the time
domain (axes are arrival times).  The time-domain amplitude is the envelope
relative to each axis carrier, so that

    f~(t1, t2) = sum_k f(w1_k, w2_k) exp(-i (w1_k - c1) t1 - i (w2_k - c2) t2) / sqrt(N)

with ``c1``, ``c2`` the frequency-axis centers.  Carrier phases are therefore
folded into any interferometer phase applied later.  All quantities are in
natural units (hbar = c = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np

from . import kernels
from .errors import DomainError, GridError, ParameterError

FREQUENCY = "frequency"
TIME = "time"

NORM_TOL = 1e-9
MAX_OUT_OF_BAND = 1e-6


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Axis:
    """One uniformly sampled axis; ``values[n // 2] == center``."""

    n: int
    center: float
    span: float
    conjugate_center: float = 0.0

    def __post_init__(self):
        if self.n < 16 or self.n & (self.n - 1):
            raise GridError(f"axis length must be a power of two >= 16, got {self.n}")
        if not self.span > 0:
            raise GridError(f"axis span must be positive, got {self.span}")

    @property
    def step(self) -> float:
        return self.span / self.n

    @property
    def values(self) -> np.ndarray:
        return self.center + (np.arange(self.n) - self.n // 2) * self.step

    @property
    def offsets(self) -> np.ndarray:
        """Values relative to the axis center."""
        return (np.arange(self.n) - self.n // 2) * self.step

    def conjugate(self) -> "Axis":
        return Axis(self.n, self.conjugate_center, 2 * np.pi / self.step, self.center)


def _pair(x):
    if np.ndim(x) == 0:
        return (x, x)
    a, b = x
    return (a, b)


@dataclass(frozen=True)
class FrequencyGrid:
    """Angular-frequency grid for the two photons.

    ``time_origins`` fixes the center of the conjugate time grid per axis.
    """

    n_points: tuple[int, int]
    centers: tuple[float, float]
    spans: tuple[float, float]
    time_origins: tuple[float, float] = (0.0, 0.0)

    @classmethod
    def square(cls, n: int, span: float, centers=(0.0, 0.0), time_origins=(0.0, 0.0)):
        return cls(_pair(n), _pair(centers), _pair(span), _pair(time_origins))

    @property
    def axes(self) -> tuple[Axis, Axis]:
        return tuple(
            Axis(int(n), float(c), float(s), float(o))
            for n, c, s, o in zip(self.n_points, self.centers, self.spans, self.time_origins)
        )


@dataclass(frozen=True)
class TimeGrid:
    """Arrival-time grid; ``carriers`` are the optical center frequencies."""

    n_points: tuple[int, int]
    origins: tuple[float, float]
    spans: tuple[float, float]
    carriers: tuple[float, float] = (0.0, 0.0)

    @classmethod
    def square(cls, n: int, span: float, origins=(0.0, 0.0), carriers=(0.0, 0.0)):
        return cls(_pair(n), _pair(origins), _pair(span), _pair(carriers))

    @property
    def axes(self) -> tuple[Axis, Axis]:
        return tuple(
            Axis(int(n), float(o), float(s), float(c))
            for n, o, s, c in zip(self.n_points, self.origins, self.spans, self.carriers)
        )


# ---------------------------------------------------------------------------
# Joint amplitude
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class JointAmplitude:
    """Normalized two-photon amplitude on a 2-D grid.

    ``data`` is made read-only; operations return new instances.
    """

    domain: str
    data: np.ndarray
    axes: tuple[Axis, Axis]
    source: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.domain not in (FREQUENCY, TIME):
            raise DomainError(f"unknown domain tag {self.domain!r}")
        data = np.array(self.data, dtype=np.complex128)
        if data.shape != (self.axes[0].n, self.axes[1].n):
            raise GridError(
                f"data shape {data.shape} does not match axes "
                f"({self.axes[0].n}, {self.axes[1].n})"
            )
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @cached_property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.data) ** 2)))

    @cached_property
    def intensity(self) -> np.ndarray:
        out = np.abs(self.data) ** 2
        out.flags.writeable = False
        return out

    def values(self, photon: int) -> np.ndarray:
        return self.axes[photon - 1].values

    def replace(self, data: np.ndarray, source: str | None = None) -> "JointAmplitude":
        return JointAmplitude(self.domain, data, self.axes, self.source if source is None else source)


def normalized(data: np.ndarray) -> np.ndarray:
    norm = np.sqrt(np.sum(np.abs(data) ** 2))
    if not norm > 0 or not np.isfinite(norm):
        raise GridError("state has zero or non-finite weight on the grid")
    return data / norm


def swap_photons(state: JointAmplitude) -> JointAmplitude:
    """Relabel photon 1 <-> photon 2."""
    return JointAmplitude(state.domain, state.data.T, (state.axes[1], state.axes[0]), state.source)


# ---------------------------------------------------------------------------
# Source parameterizations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cascade:
    """Three-level atomic cascade.

    ``sum_frequency`` is the atomic energy change over hbar.  ``omega2`` is the
    line center of the second photon (defaults to half the sum frequency).
    Each line is a unit-peak Lorentzian amplitude whose half width at half
    maximum is the inverse transition time.
    """

    sum_frequency: float
    tau1: float
    tau2: float
    omega2: float | None = None

    def __post_init__(self):
        if not (self.tau1 > self.tau2 > 0):
            raise ParameterError(
                f"cascade requires tau1 > tau2 > 0 (got tau1={self.tau1}, tau2={self.tau2})"
            )

    @property
    def center2(self) -> float:
        return self.sum_frequency / 2 if self.omega2 is None else self.omega2

    @property
    def center1(self) -> float:
        return self.sum_frequency - self.center2


@dataclass(frozen=True)
class GaussianPDC:
    """Gaussian down-conversion amplitude.

    exp(-(w1 + w2 - ws)^2 / 4 sigma_plus^2) * exp(-(w1 - w2 - wd)^2 / 4 sigma_minus^2)
    with ws = omega01 + omega02 and wd = omega01 - omega02.
    """

    omega01: float
    omega02: float
    sigma_plus: float
    sigma_minus: float

    def __post_init__(self):
        if not (self.sigma_plus > 0 and self.sigma_minus > 0):
            raise ParameterError("sigma_plus and sigma_minus must be positive")
        if self.sigma_plus > self.sigma_minus:
            raise ParameterError(
                f"sigma_plus <= sigma_minus required (got {self.sigma_plus} > {self.sigma_minus})"
            )

    @property
    def marginal_std(self) -> float:
        return 0.5 * math.hypot(self.sigma_plus, self.sigma_minus)


@dataclass(frozen=True)
class TimeBin:
    """Pair emitted in one of two pump pulses separated by ``separation``."""

    pulse_width: float
    separation: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.pulse_width > 0:
            raise ParameterError("pulse_width must be positive")
        if not self.separation > 5 * self.pulse_width:
            raise ParameterError(
                f"bin overlap: separation {self.separation} must exceed 5 * pulse_width "
                f"= {5 * self.pulse_width}"
            )


SourceSpec = Union[Cascade, GaussianPDC, TimeBin]


def _lorentzian(x, hwhm):
    return hwhm**2 / (x**2 + hwhm**2)


def _gaussian_tail_mass(axis: Axis, mean: float, std: float) -> float:
    lo = axis.values[0] - 0.5 * axis.step
    hi = axis.values[-1] + 0.5 * axis.step
    s = std * math.sqrt(2.0)
    return 0.5 * math.erfc((hi - mean) / s) + 0.5 * math.erfc((mean - lo) / s)


def make_cascade_state(spec: Cascade, grid: FrequencyGrid) -> JointAmplitude:
    ax1, ax2 = grid.axes
    g1, g2 = 1.0 / spec.tau1, 1.0 / spec.tau2
    for k, (ax, c) in enumerate(((ax1, spec.center1), (ax2, spec.center2)), start=1):
        if abs(ax.center - c) + 5 * g2 > ax.span / 2:
            raise GridError(
                f"axis {k} must cover +-5/tau2 = {5 * g2:g} around the photon center {c:g}"
            )
    # sum-frequency line (FWHM 2/tau1) must span at least four cells
    if 2 * g1 < 4 * max(ax1.step, ax2.step):
        raise GridError(
            f"sum-frequency linewidth {2 * g1:g} resolved by fewer than 4 cells "
            f"(step {max(ax1.step, ax2.step):g}); need n >= {20 * spec.tau1 / spec.tau2:g} "
            "at the minimum span"
        )
    w1 = ax1.values[:, None]
    w2 = ax2.values[None, :]
    data = _lorentzian(w1 + w2 - spec.sum_frequency, g1) * _lorentzian(w2 - spec.center2, g2)
    return JointAmplitude(FREQUENCY, normalized(data.astype(np.complex128)), grid.axes, "cascade")


def make_gaussian_pdc_state(
    spec: GaussianPDC, grid: FrequencyGrid, max_out_of_band: float = MAX_OUT_OF_BAND
) -> JointAmplitude:
    ax1, ax2 = grid.axes
    # amplitude FWHM along the sum direction is 4 sqrt(ln 2) sigma_plus
    fwhm = 4 * math.sqrt(math.log(2)) * spec.sigma_plus
    if fwhm < 4 * max(ax1.step, ax2.step):
        raise GridError(
            f"sum-frequency linewidth {fwhm:g} resolved by fewer than 4 cells "
            f"(step {max(ax1.step, ax2.step):g})"
        )
    std = spec.marginal_std
    tail = _gaussian_tail_mass(ax1, spec.omega01, std) + _gaussian_tail_mass(ax2, spec.omega02, std)
    if tail > max_out_of_band:
        raise GridError(f"out-of-band probability {tail:.2e} exceeds {max_out_of_band:g}")
    ws = spec.omega01 + spec.omega02
    wd = spec.omega01 - spec.omega02
    w1 = ax1.values[:, None]
    w2 = ax2.values[None, :]
    data = np.exp(
        -((w1 + w2 - ws) ** 2) / (4 * spec.sigma_plus**2)
        - ((w1 - w2 - wd) ** 2) / (4 * spec.sigma_minus**2)
    )
    return JointAmplitude(
        FREQUENCY, normalized(data.astype(np.complex128)), grid.axes, "gaussian-pdc"
    )


def make_timebin_state(
    spec: TimeBin, grid: TimeGrid, max_out_of_band: float = MAX_OUT_OF_BAND
) -> JointAmplitude:
    ax1, ax2 = grid.axes
    if max(ax1.step, ax2.step) > spec.pulse_width / 4:
        raise GridError("time-bin grid needs at least 4 cells per pulse width")
    tail = 0.0
    for ax in (ax1, ax2):
        tail += 0.5 * (
            _gaussian_tail_mass(ax, 0.0, spec.pulse_width)
            + _gaussian_tail_mass(ax, spec.separation, spec.pulse_width)
        )
    if tail > max_out_of_band:
        raise GridError(
            f"time grid does not cover both bins: out-of-band probability {tail:.2e}"
        )

    def g(t):
        return np.exp(-(t**2) / (4 * spec.pulse_width**2))

    t1 = ax1.values[:, None]
    t2 = ax2.values[None, :]
    T = spec.separation
    data = g(t1) * g(t2) + np.exp(1j * spec.phase) * g(t1 - T) * g(t2 - T)
    return JointAmplitude(TIME, normalized(data), grid.axes, "time-bin")


def make_state(spec: SourceSpec, grid) -> JointAmplitude:
    if isinstance(spec, Cascade):
        return make_cascade_state(spec, grid)
    if isinstance(spec, GaussianPDC):
        return make_gaussian_pdc_state(spec, grid)
    if isinstance(spec, TimeBin):
        return make_timebin_state(spec, grid)
    raise TypeError(f"unsupported source spec {type(spec).__name__}")


# ---------------------------------------------------------------------------
# Fourier transforms
# ---------------------------------------------------------------------------

def _origin_phase(axes, sign):
    """exp(sign * i * (w - c) * t0) per axis, or None when both origins are zero."""
    if all(ax.conjugate_center == 0.0 for ax in axes):
        return None
    p1 = np.exp(sign * 1j * axes[0].offsets * axes[0].conjugate_center)
    p2 = np.exp(sign * 1j * axes[1].offsets * axes[1].conjugate_center)
    return p1[:, None] * p2[None, :]


def to_time_domain(state: JointAmplitude) -> JointAmplitude:
    if state.domain != FREQUENCY:
        raise DomainError("to_time_domain expects a frequency-domain state")
    f = np.asarray(state.data)
    ph = _origin_phase(state.axes, -1)
    if ph is not None:
        f = f * ph
    data = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(f), norm="ortho"))
    axes = (state.axes[0].conjugate(), state.axes[1].conjugate())
    return JointAmplitude(TIME, data, axes, state.source)


def to_frequency_domain(state: JointAmplitude) -> JointAmplitude:
    if state.domain != TIME:
        raise DomainError("to_frequency_domain expects a time-domain state")
    data = np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(state.data), norm="ortho"))
    axes = (state.axes[0].conjugate(), state.axes[1].conjugate())
    ph = _origin_phase(axes, 1)
    if ph is not None:
        data = data * ph
    return JointAmplitude(FREQUENCY, data, axes, state.source)


def as_time(state: JointAmplitude) -> JointAmplitude:
    """Time-domain view, memoized on the state."""
    if state.domain == TIME:
        return state
    if "time" not in state._cache:
        state._cache["time"] = to_time_domain(state)
    return state._cache["time"]


def as_frequency(state: JointAmplitude) -> JointAmplitude:
    if state.domain == FREQUENCY:
        return state
    if "frequency" not in state._cache:
        state._cache["frequency"] = to_frequency_domain(state)
    return state._cache["frequency"]


def delay_axis(data: np.ndarray, axis: int, delay: float, time_axis: Axis) -> np.ndarray:
    """Delay the photon on ``axis`` (0 or 1) by ``delay``: g(t) = f(t - delay).

    The grid is periodic.  Whole-cell delays are exact rolls; fractional delays
    apply the equivalent spectral phase exp(i (w - c) delay).
    """
    m = delay / time_axis.step
    mi = round(m)
    if abs(m - mi) < 1e-9:
        return np.roll(data, mi, axis=axis)
    f = np.fft.fftshift(
        np.fft.ifft(np.fft.ifftshift(data, axes=axis), axis=axis, norm="ortho"), axes=axis
    )
    dw = time_axis.conjugate().offsets
    shape = [1, 1]
    shape[axis] = -1
    f = f * np.exp(1j * dw * delay).reshape(shape)
    return np.fft.fftshift(
        np.fft.fft(np.fft.ifftshift(f, axes=axis), axis=axis, norm="ortho"), axes=axis
    )


# ---------------------------------------------------------------------------
# Widths and coherence times
# ---------------------------------------------------------------------------

def _linear_moments(values: np.ndarray, weights: np.ndarray) -> tuple[float, float]:
    total = weights.sum()
    mean = float(np.sum(values * weights) / total)
    var = float(np.sum((values - mean) ** 2 * weights) / total)
    return mean, math.sqrt(max(var, 0.0))


def _check_not_degenerate(weights: np.ndarray, what: str):
    if weights.max() > 0.999 * weights.sum():
        raise GridError(f"{what} collapses to a single grid cell")


def _equal_time_steps(tstate: JointAmplitude) -> float:
    a1, a2 = tstate.axes
    if a1.n != a2.n or not math.isclose(a1.step, a2.step, rel_tol=1e-12):
        raise GridError("time axes must have equal length and step")
    return a1.step


def marginal(state: JointAmplitude, photon: int) -> tuple[np.ndarray, np.ndarray]:
    """(axis values, probabilities) of one photon in the state's own domain."""
    p = state.intensity.sum(axis=1 if photon == 1 else 0)
    return state.values(photon), p


def spectral_rms_widths(state: JointAmplitude) -> tuple[float, float]:
    fstate = as_frequency(state)
    out = []
    for photon in (1, 2):
        w, p = marginal(fstate, photon)
        _check_not_degenerate(p, f"photon {photon} spectrum")
        out.append(_linear_moments(w, p)[1])
    return out[0], out[1]


def first_order_coherence_time(state: JointAmplitude) -> float:
    """Inverse RMS angular-frequency width of the narrower single-photon spectrum."""
    if "first_order" not in state._cache:
        state._cache["first_order"] = 1.0 / min(spectral_rms_widths(state))
    return state._cache["first_order"]


def _mean_time_moments(state: JointAmplitude) -> tuple[float, float]:
    if "mean_time" not in state._cache:
        ts = as_time(state)
        dt = _equal_time_steps(ts)
        n = ts.axes[0].n
        hist = kernels.antidiagonal_sums(np.ascontiguousarray(ts.intensity))
        _check_not_degenerate(hist, "mean-time envelope")
        # index i + j  ->  t1 + t2 = c1 + c2 + (i + j - n) dt
        sums = ts.axes[0].center + ts.axes[1].center + (np.arange(hist.size) - n) * dt
        c, rms = _linear_moments(sums, hist)
        state._cache["mean_time"] = (c / 2, rms / 2)
    return state._cache["mean_time"]


def second_order_coherence_time(state: JointAmplitude) -> float:
    """RMS width of the mean arrival time (t1 + t2) / 2."""
    return _mean_time_moments(state)[1]


def _difference_moments(state: JointAmplitude) -> tuple[float, float]:
    if "difference" not in state._cache:
        ts = as_time(state)
        dt = _equal_time_steps(ts)
        n = ts.axes[0].n
        hist = kernels.diagonal_sums(np.ascontiguousarray(ts.intensity))
        _check_not_degenerate(hist, "t1 - t2 distribution")
        # index i - j + n - 1  ->  t1 - t2 = c1 - c2 + (i - j) dt
        diffs = ts.axes[0].center - ts.axes[1].center + (np.arange(hist.size) - (n - 1)) * dt
        state._cache["difference"] = _linear_moments(diffs, hist)
    return state._cache["difference"]


def correlation_width(state: JointAmplitude) -> float:
    """RMS width of the arrival-time difference t1 - t2."""
    return _difference_moments(state)[1]


def correlation_center(state: JointAmplitude) -> float:
    """Mean arrival-time difference t1 - t2."""
    return _difference_moments(state)[0]


def mean_time_center(state: JointAmplitude) -> float:
    return _mean_time_moments(state)[0]
