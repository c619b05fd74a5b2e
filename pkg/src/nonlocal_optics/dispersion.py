"""Dispersive media acting on one photon of a pair.

A medium of length z multiplies the amplitude by
exp(i z [k0 + k1 dw + k2 dw^2 / 2]) along the chosen frequency axis, with dw
measured from that axis's center.  Only Taylor terms up to second order exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .biphoton import FREQUENCY, JointAmplitude, as_frequency, correlation_width
from .errors import DomainError, ParameterError

__all__ = [
    "DispersiveMedium",
    "apply_medium",
    "correlation_width",
    "nonlocal_cancellation_check",
    "spectral_phase",
]


@dataclass(frozen=True)
class DispersiveMedium:
    k0: float = 0.0
    k1: float = 0.0  # group slowness k' (time per length)
    k2: float = 0.0  # group-velocity dispersion k'' (time^2 per length)
    length: float = 1.0

    def __post_init__(self):
        vals = (self.k0, self.k1, self.k2, self.length)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError("medium coefficients must be finite")
        if self.length < 0:
            raise ParameterError(f"medium length must be >= 0, got {self.length}")

    @classmethod
    def from_taylor(cls, coefficients: Sequence[float], length: float = 1.0) -> "DispersiveMedium":
        """Build from [k0, k1, k2]; higher orders are not supported."""
        coeffs = list(coefficients)
        if len(coeffs) > 3:
            raise ParameterError("only dispersion up to second order is supported")
        coeffs += [0.0] * (3 - len(coeffs))
        return cls(*coeffs, length=length)

    @property
    def group_delay(self) -> float:
        return self.k1 * self.length

    @property
    def gdd(self) -> float:
        """Group-delay dispersion k'' z."""
        return self.k2 * self.length

    def negated(self) -> "DispersiveMedium":
        """The medium whose phase exactly undoes this one."""
        return DispersiveMedium(-self.k0, -self.k1, -self.k2, self.length)


def spectral_phase(medium: DispersiveMedium, dw: np.ndarray) -> np.ndarray:
    return medium.length * (medium.k0 + medium.k1 * dw + 0.5 * medium.k2 * dw**2)


def apply_medium(state: JointAmplitude, medium: DispersiveMedium, arm: int) -> JointAmplitude:
    if state.domain != FREQUENCY:
        raise DomainError("apply_medium expects a frequency-domain state")
    if arm not in (1, 2):
        raise ParameterError(f"arm must be 1 or 2, got {arm}")
    axis = state.axes[arm - 1]
    phase = np.exp(1j * spectral_phase(medium, axis.offsets))
    data = state.data * (phase[:, None] if arm == 1 else phase[None, :])
    return state.replace(data)


def nonlocal_cancellation_check(state: JointAmplitude, medium1: DispersiveMedium,
                                medium2: DispersiveMedium) -> float:
    """correlation_width after media on arms 1 and 2, divided by the bare width."""
    fs = as_frequency(state)
    bare = correlation_width(fs)
    dispersed = apply_medium(apply_medium(fs, medium1, 1), medium2, 2)
    return correlation_width(dispersed) / bare
