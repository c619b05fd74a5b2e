"""Two unbalanced Mach-Zehnder interferometers fed by one photon pair.

Each photon takes the short (S) or long (L) arm.  With symmetric 50/50 beam
splitters (t = 1/sqrt(2), r = i/sqrt(2)) the single-photon output amplitudes,
with the global phase of each port referenced to the short path, are

    port H (bright):  (S + exp(i phi) L) / 2
    port V:           (S - exp(i phi) L) / 2

so a pair detected in ports (p1, p2) carries the coefficients

    c = 1/4 [1, s1 e^{i phi1}, s2 e^{i phi2}, s1 s2 e^{i (phi1 + phi2)}]

on the path amplitudes (SS, LS, SL, LL), with s = +1 for H and -1 for V.
Gated rates are quadratic forms c^H G c in the Gram matrix G of the four path
amplitudes over the coincidence band, so one Gram serves every phase and port.

Delays act on the periodic time grid (exact spectral delay), so a shifted
amplitude wraps around rather than falling off the grid edge.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import optimize

from . import kernels
from .biphoton import (
    JointAmplitude,
    TIME,
    as_time,
    correlation_width,
    delay_axis,
    second_order_coherence_time,
)
from .errors import DomainError, GridError, ParameterError, RegimeWarning
from .scan import ScanResult

TWO_PI = 2 * np.pi
PORTS = ("H", "V")
PATHS = ("SS", "LS", "SL", "LL")
PORT_PAIRS = (("H", "H"), ("H", "V"), ("V", "H"), ("V", "V"))


@dataclass(frozen=True)
class UnbalancedMZ:
    """Path imbalance ``delay`` = (L - S)/c and long-arm phase ``phase``."""

    delay: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.delay >= 0:
            raise ParameterError(f"interferometer delay must be >= 0, got {self.delay}")
        object.__setattr__(self, "phase", float(self.phase) % TWO_PI)


@dataclass(frozen=True)
class FransonSetup:
    left: UnbalancedMZ
    right: UnbalancedMZ
    window: float
    ports: tuple[str, str] = ("H", "H")
    # optional [lo, hi] acceptance window on the arrival time of photon 1
    arrival_window: tuple[float, float] | None = None

    def __post_init__(self):
        if not self.window > 0:
            raise ParameterError(f"coincidence window must be > 0, got {self.window}")
        if any(p not in PORTS for p in self.ports):
            raise ParameterError(f"ports must be H or V, got {self.ports}")
        if abs(self.left.delay - self.right.delay) > self.window:
            raise ParameterError(
                "unmatched interferometers: delays differ by more than the coincidence window"
            )
        object.__setattr__(self, "ports", tuple(self.ports))

    @classmethod
    def matched(cls, delay, window, phi1=0.0, phi2=0.0, ports=("H", "H"), arrival_window=None):
        return cls(UnbalancedMZ(delay, phi1), UnbalancedMZ(delay, phi2), window, ports, arrival_window)

    @property
    def delay(self) -> float:
        return 0.5 * (self.left.delay + self.right.delay)

    def with_phases(self, phi1: float, phi2: float) -> "FransonSetup":
        return replace(self, left=replace(self.left, phase=phi1), right=replace(self.right, phase=phi2))

    def with_ports(self, p1: str, p2: str) -> "FransonSetup":
        return replace(self, ports=(p1, p2))


def port_sign(port: str) -> int:
    return 1 if port == "H" else -1


def path_coefficients(phi1: float, phi2: float, ports=("H", "H")) -> np.ndarray:
    s1, s2 = port_sign(ports[0]), port_sign(ports[1])
    e1, e2 = np.exp(1j * phi1), np.exp(1j * phi2)
    return 0.25 * np.array([1.0, s1 * e1, s2 * e2, s1 * s2 * e1 * e2])


# ---------------------------------------------------------------------------
# Path amplitudes and their Gram matrix
# ---------------------------------------------------------------------------

def _time_state(state: JointAmplitude) -> JointAmplitude:
    if state.domain != TIME:
        raise DomainError("interferometer amplitudes need a time-domain state (use as_time)")
    return state


def path_amplitudes(state: JointAmplitude, setup: FransonSetup) -> np.ndarray:
    """Stack of the SS, LS, SL, LL amplitudes, shape (4, n1, n2)."""
    ts = _time_state(state)
    a1, a2 = ts.axes
    f = np.asarray(ts.data)
    out = np.empty((4,) + f.shape, dtype=np.complex128)
    out[0] = f
    out[1] = delay_axis(f, 0, setup.left.delay, a1)
    out[2] = delay_axis(f, 1, setup.right.delay, a2)
    out[3] = delay_axis(out[1], 1, setup.right.delay, a2)
    return out


def coincidence_amplitude_grid(state: JointAmplitude, setup: FransonSetup) -> np.ndarray:
    c = path_coefficients(setup.left.phase, setup.right.phase, setup.ports)
    return np.tensordot(c, path_amplitudes(state, setup), axes=1)


def _grid_index(axis, t: float) -> int:
    x = (t - axis.center) / axis.step + axis.n // 2
    i = round(x)
    if abs(x - i) > 1e-6 or not 0 <= i < axis.n:
        raise GridError(f"time {t} is not a point of the grid")
    return int(i)


def coincidence_amplitude(state: JointAmplitude, setup: FransonSetup, t1: float, t2: float) -> complex:
    """Detection amplitude at grid times (t1, t2) for the selected port pair."""
    ts = _time_state(state)
    i, j = _grid_index(ts.axes[0], t1), _grid_index(ts.axes[1], t2)
    return complex(coincidence_amplitude_grid(ts, setup)[i, j])


def _gate(ts: JointAmplitude, window: float, arrival_window=None):
    a1, a2 = ts.axes
    if a1.n != a2.n or not math.isclose(a1.step, a2.step, rel_tol=1e-12):
        raise GridError("coincidence gating needs equal time steps on both axes")
    dt = a1.step
    halfwidth = int(math.floor(window / dt + 1e-9))
    off = (a1.center - a2.center) / dt
    if abs(off - round(off)) > 1e-9:
        raise GridError("time-axis origins must differ by a whole number of cells")
    if arrival_window is None:
        mask = np.ones(a1.n, dtype=np.bool_)
    else:
        lo, hi = arrival_window
        t = a1.values
        mask = (t >= lo - 1e-9 * dt) & (t <= hi + 1e-9 * dt)
    return halfwidth, int(round(off)), mask


def _gram_key(setup: FransonSetup, gated: bool) -> tuple:
    return ("gram", setup.left.delay, setup.right.delay, setup.window if gated else None,
            setup.arrival_window if gated else None)


def path_gram(state: JointAmplitude, setup: FransonSetup, gated: bool = True) -> np.ndarray:
    """Gram matrix of the four path amplitudes, memoized on the state."""
    ts = _time_state(state)
    key = _gram_key(setup, gated)
    if key not in ts._cache:
        paths = path_amplitudes(ts, setup)
        if gated:
            hw, off, mask = _gate(ts, setup.window, setup.arrival_window)
            gram = kernels.band_gram(paths, hw, off, mask)
        else:
            flat = paths.reshape(4, -1)
            gram = flat.conj() @ flat.T
        ts._cache[key] = gram
    return ts._cache[key]


def _quadratic(gram: np.ndarray, c: np.ndarray) -> float:
    return float(np.real(np.conj(c) @ gram @ c))


def _fringe_maximum(gram: np.ndarray) -> float:
    """Largest H-H probability over all (phi1, phi2); also the max for the other ports."""

    def rate(p):
        return _quadratic(gram, path_coefficients(p[0], p[1]))

    grid = np.linspace(0, TWO_PI, 48, endpoint=False)
    vals = np.array([[rate((a, b)) for b in grid] for a in grid])
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    res = optimize.minimize(lambda p: -rate(p), x0=[grid[i], grid[j]], method="BFGS",
                            options={"gtol": 1e-12})
    return max(vals[i, j], -res.fun)


def fringe_normalization(state: JointAmplitude, setup: FransonSetup) -> float:
    gram = path_gram(state, setup)
    key = ("fringe_max",) + _gram_key(setup, True)
    if key not in state._cache:
        state._cache[key] = _fringe_maximum(gram)
    return state._cache[key]


# ---------------------------------------------------------------------------
# Regime check
# ---------------------------------------------------------------------------

def check_regime(state: JointAmplitude, setup: FransonSetup, factor: float = 2.0) -> list[str]:
    """Warn (RegimeWarning) for each failed inequality of
    correlation width << window << delay << second-order coherence time.

    Returns the messages.  Time-bin states have no continuous emission envelope,
    so the last inequality is skipped for them.
    """
    ts = as_time(state)
    corr = correlation_width(ts)
    d = setup.delay
    failed = []
    if factor * corr > setup.window:
        failed.append(f"correlation width {corr:.4g} not << window {setup.window:.4g}")
    if factor * setup.window > d:
        failed.append(f"window {setup.window:.4g} not << delay {d:.4g}")
    if ts.source != "time-bin":
        t2 = second_order_coherence_time(ts)
        if factor * d > t2:
            failed.append(f"delay {d:.4g} not << second-order coherence time {t2:.4g}")
    for msg in failed:
        warnings.warn(f"interferometer regime: {msg}", RegimeWarning, stacklevel=3)
    return failed


# ---------------------------------------------------------------------------
# Rates
# ---------------------------------------------------------------------------

def port_probabilities(state: JointAmplitude, setup: FransonSetup, gated: bool = True) -> dict:
    """Raw detection probabilities for all four port pairs at the setup phases."""
    gram = path_gram(state, setup, gated)
    phi1, phi2 = setup.left.phase, setup.right.phase
    return {p: _quadratic(gram, path_coefficients(phi1, phi2, p)) for p in PORT_PAIRS}


def raw_rate(state: JointAmplitude, setup: FransonSetup) -> float:
    gram = path_gram(state, setup)
    return _quadratic(gram, path_coefficients(setup.left.phase, setup.right.phase, setup.ports))


def coincidence_rate(state: JointAmplitude, setup: FransonSetup, check: bool = True) -> float:
    """Gated coincidence rate normalized by the fringe maximum, in [0, 1]."""
    if check:
        check_regime(state, setup)
    r = raw_rate(state, setup) / fringe_normalization(state, setup)
    return float(min(max(r, 0.0), 1.0))


@dataclass
class FringeScan:
    phases: np.ndarray  # (m, 2) rows of (phi1, phi2)
    rates: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.rates)

    @property
    def phase_sums(self) -> np.ndarray:
        return self.phases.sum(axis=1) if len(self) else np.zeros(0)

    def to_scan_result(self, name: str = "fringes") -> ScanResult:
        rows = np.column_stack([self.phases, self.rates]) if len(self) else np.zeros((0, 3))
        return ScanResult(name, ["phi1", "phi2", "rate"], rows, dict(self.metadata))


def fringe_scan(state: JointAmplitude, setup: FransonSetup,
                phase_pairs: Iterable[Sequence[float]]) -> FringeScan:
    pairs = np.asarray(list(phase_pairs), dtype=np.float64).reshape(-1, 2)
    meta = {"source": state.source, "delay": setup.delay, "window": setup.window,
            "ports": "".join(setup.ports)}
    if len(pairs) == 0:
        return FringeScan(pairs, np.zeros(0), meta)
    meta["regime_warnings"] = check_regime(state, setup)
    rates = np.array([coincidence_rate(state, setup.with_phases(a, b), check=False) for a, b in pairs])
    return FringeScan(pairs, rates, meta)


# ---------------------------------------------------------------------------
# Fringe fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FringeFit:
    """R = offset + amplitude cos^2((sum + shift)/2), i.e. A cos^2(...) + B."""

    amplitude: float
    offset: float
    shift: float
    visibility: float
    rms_residual: float


def _check_coverage(sums: np.ndarray):
    u = np.unique(np.round(np.mod(sums, TWO_PI), 9))
    if u.size < 4:
        raise ParameterError("insufficient coverage: need >= 4 distinct phase sums")
    gaps = np.diff(np.concatenate([u, [u[0] + TWO_PI]]))
    if gaps.max() > np.pi / 2 + 1e-12:
        raise ParameterError("insufficient coverage: phase sums leave a gap wider than pi/2")


def fit_fringe(phase_sums, rates) -> FringeFit:
    sums = np.asarray(phase_sums, dtype=np.float64)
    r = np.asarray(rates, dtype=np.float64)
    _check_coverage(sums)
    design = np.column_stack([np.ones_like(sums), np.cos(sums), np.sin(sums)])
    (p0, p1, p2), *_ = np.linalg.lstsq(design, r, rcond=None)
    m = math.hypot(p1, p2)
    if m <= 1e-12 * abs(p0):
        m = 0.0  # flat within rounding
    if m == 0.0:
        v = 0.0
    else:
        v = 1.0 if p0 <= m else m / p0
    resid = r - design @ np.array([p0, p1, p2])
    return FringeFit(2 * m, p0 - m, math.atan2(-p2, p1), v, float(np.sqrt(np.mean(resid**2))))


def fit_cos2(phase_sums, rates) -> tuple[float, float]:
    """Least-squares alpha for R = alpha cos^2(sum/2); returns (alpha, rms residual)."""
    basis = np.cos(0.5 * np.asarray(phase_sums, dtype=np.float64)) ** 2
    r = np.asarray(rates, dtype=np.float64)
    alpha = float(basis @ r / (basis @ basis))
    return alpha, float(np.sqrt(np.mean((r - alpha * basis) ** 2)))


def visibility(scan: FringeScan) -> float:
    return fit_fringe(scan.phase_sums, scan.rates).visibility


# ---------------------------------------------------------------------------
# CHSH
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CHSHSettings:
    a: float = 0.0
    a_prime: float = np.pi / 2
    b: float = -np.pi / 4
    b_prime: float = np.pi / 4


MINUS_POSITIONS = ("ab", "ab'", "a'b", "a'b'")


def chsh_combination(correlation: Callable[[float, float], float],
                     settings: CHSHSettings = CHSHSettings(), minus: str = "a'b'") -> float:
    if minus not in MINUS_POSITIONS:
        raise ParameterError(f"minus position must be one of {MINUS_POSITIONS}")
    terms = {
        "ab": correlation(settings.a, settings.b),
        "ab'": correlation(settings.a, settings.b_prime),
        "a'b": correlation(settings.a_prime, settings.b),
        "a'b'": correlation(settings.a_prime, settings.b_prime),
    }
    return abs(sum(-v if k == minus else v for k, v in terms.items()))


def correlation(state: JointAmplitude, setup: FransonSetup, phi1: float, phi2: float) -> float:
    """E = (R_HH + R_VV - R_HV - R_VH) / sum of the four gated rates."""
    p = port_probabilities(state, setup.with_phases(phi1, phi2))
    total = sum(p.values())
    if not total > 0:
        raise GridError("no gated coincidences: correlation undefined")
    return (p[("H", "H")] + p[("V", "V")] - p[("H", "V")] - p[("V", "H")]) / total


def chsh_value(state: JointAmplitude, setup: FransonSetup,
               settings: CHSHSettings = CHSHSettings(), minus: str = "a'b'") -> float:
    check_regime(state, setup)
    return chsh_combination(lambda x, y: correlation(state, setup, x, y), settings, minus)


# ---------------------------------------------------------------------------
# Classical-field bound
# ---------------------------------------------------------------------------

def bare_coincidence(state: JointAmplitude, delta_t: float) -> float:
    """R_c0(dt) = sum_t |f(t, t - dt)|^2 on the grid diagonal (no interferometers)."""
    ts = as_time(state)
    a1, a2 = ts.axes
    if abs(delta_t) >= 0.5 * a2.span:
        raise GridError(f"relative delay {delta_t} exceeds half the time-grid span")
    _, off, _ = _gate(ts, a1.step)
    g = delay_axis(np.asarray(ts.data), 1, delta_t, a2)
    idx = np.arange(a1.n)
    return float(np.sum(np.abs(g[idx, (idx + off) % a2.n]) ** 2))


def classical_bound(state: JointAmplitude, delta_t: float) -> float:
    r0 = bare_coincidence(state, 0.0)
    rd = bare_coincidence(state, delta_t)
    if r0 + rd == 0:
        return 0.0
    return rd / (r0 + rd)


@dataclass(frozen=True)
class BoundCheck:
    violated: bool
    margin: float
    visibility: float
    bound: float


def classical_bound_violated(state: JointAmplitude, setup: FransonSetup,
                             delta_t: float | None = None, n_phases: int = 16) -> BoundCheck:
    ts = as_time(state)
    dt = setup.delay if delta_t is None else delta_t
    bound = classical_bound(ts, dt)
    phases = [(p, 0.0) for p in np.linspace(0, TWO_PI, n_phases, endpoint=False)]
    v = visibility(fringe_scan(ts, setup, phases))
    return BoundCheck(v > bound, v - bound, v, bound)
