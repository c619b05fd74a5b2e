"""Hong-Ou-Mandel interference of a photon pair on one 50/50 beam splitter.

With t = 1/sqrt(2), r = i/sqrt(2) the coincidence amplitude is
(f(w1, w2) - f(w2, w1)) / 2, which gives

    P(tau) = 1/2 - 1/2 Re sum f(w1, w2) f*(w2, w1) exp(i (w1 - w2) tau)

where ``tau`` is the extra delay of photon 1.  On identical axes w1 - w2 is a
whole number of frequency steps, so the double sum collapses to a 1-D
exchange-overlap histogram evaluated once per state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels
from .biphoton import FREQUENCY, JointAmplitude
from .dispersion import DispersiveMedium, apply_medium
from .errors import DomainError, GridError
from .scan import ScanResult


@dataclass(frozen=True)
class HomSetup:
    delay: float = 0.0
    medium: DispersiveMedium | None = None  # placed in arm 1

    def __post_init__(self):
        if not math.isfinite(self.delay):
            raise ValueError("delay must be finite")


def _prepared(state: JointAmplitude, medium: DispersiveMedium | None) -> JointAmplitude:
    if state.domain != FREQUENCY:
        raise DomainError("HOM expects a frequency-domain state")
    a1, a2 = state.axes
    if (a1.n, a1.center, a1.span) != (a2.n, a2.center, a2.span):
        raise GridError("HOM needs identical frequency axes for both photons")
    return state if medium is None else apply_medium(state, medium, 1)


def exchange_overlap(state: JointAmplitude) -> np.ndarray:
    """h[m] = sum_{i-j=m} f[i,j] conj(f[j,i]) for m = -(n-1) .. n-1."""
    if "exchange" not in state._cache:
        state._cache["exchange"] = kernels.exchange_overlap(np.ascontiguousarray(state.data))
    return state._cache["exchange"]


def _coincidence(state: JointAmplitude, delays: np.ndarray) -> np.ndarray:
    h = exchange_overlap(state)
    n = state.axes[0].n
    dw = state.axes[0].step
    m = np.arange(-(n - 1), n)
    phase = np.exp(1j * dw * np.outer(delays, m))
    return 0.5 - 0.5 * np.real(phase @ h)


def hom_coincidence(state: JointAmplitude, setup: HomSetup = HomSetup()) -> float:
    s = _prepared(state, setup.medium)
    return float(_coincidence(s, np.array([setup.delay]))[0])


def dip_visibility(p: np.ndarray) -> float:
    return float((0.5 - np.min(p)) / 0.5)


def dip_moments(delays: np.ndarray, p: np.ndarray) -> tuple[float, float]:
    """(center, RMS width) of the dip depth 0.5 - P, trapezoid-weighted."""
    order = np.argsort(delays)
    x = np.asarray(delays, dtype=np.float64)[order]
    d = np.clip(0.5 - np.asarray(p)[order], 0.0, None)
    norm = np.trapezoid(d, x)
    if not norm > 0:
        raise GridError("no dip in the scanned delay range")
    center = np.trapezoid(x * d, x) / norm
    var = np.trapezoid((x - center) ** 2 * d, x) / norm
    return float(center), float(math.sqrt(max(var, 0.0)))


def hom_scan(state: JointAmplitude, delays: Iterable[float],
             medium: DispersiveMedium | None = None) -> ScanResult:
    tau = np.asarray(list(delays), dtype=np.float64)
    s = _prepared(state, medium)
    meta = {"source": state.source, "medium": None if medium is None else vars(medium).copy()}
    if tau.size == 0:
        return ScanResult("hom_dip", ["tau", "p"], np.zeros((0, 2)), meta)
    p = _coincidence(s, tau)
    meta["visibility"] = dip_visibility(p)
    if tau.size >= 3:
        meta["dip_center"], meta["dip_width"] = dip_moments(tau, p)
    return ScanResult("hom_dip", ["tau", "p"], np.column_stack([tau, p]), meta)


def hom_dispersion_cancellation(state: JointAmplitude, medium: DispersiveMedium,
                                delays: Iterable[float]) -> float:
    """Dip RMS width with ``medium`` in arm 1 divided by the bare dip width."""
    tau = list(delays)
    bare = hom_scan(state, tau).metadata["dip_width"]
    dispersed = hom_scan(state, tau, medium).metadata["dip_width"]
    return dispersed / bare
