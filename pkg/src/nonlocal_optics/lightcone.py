"""Feynman propagator, two-atom excitation transfer and post-selected entanglement.

Units: c = hbar = 1.  The dipole coupling e d enters as (e d)^2 = alpha d^2, so
the second-order transfer amplitude for atoms a distance r apart is

    b = -(alpha d^2 w^2 / 4 pi^2) int_0^T dt' int_0^t' dt''
            exp(i w (t' - t'')) / (r^2 - (t' - t'')^2 - i eps)

where w is the atomic transition frequency and T the interaction time.  This
follows from the (i hbar)^-2 (e d E_A / hbar c)^2 prefactor times the vacuum
correlator -i c hbar D_F.  For r >> T the denominator is r^2 and the double
integral is (i w T + 1 - exp(i w T)) / w^2, giving the closed form used by
:func:`amplitude_b_closed`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import fine_structure

from . import kernels
from .errors import ConvergenceError, FarFieldWarning, ParameterError
from .scan import ScanResult

ALPHA_FS = fine_structure
FAR_FIELD_RATIO = 100.0
NORM_TOL = 1e-9


# ---------------------------------------------------------------------------
# Propagator
# ---------------------------------------------------------------------------

def feynman_propagator(r, t, eps: float):
    """D_F = -1/(4 i pi^2) / (r^2 - t^2 - i eps); broadcasts over r and t."""
    if not eps > 0:
        raise ParameterError(f"regularization eps must be > 0, got {eps}")
    r = np.asarray(r, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    val = -1.0 / (4j * np.pi**2) / (r * r - t * t - 1j * eps)
    return complex(val) if val.ndim == 0 else val


def propagator_map(x_range, t_range, resolution=(101, 101), eps: float = 1e-3) -> ScanResult:
    """|D_F| sampled on a (x, t) grid; rows run over x fastest."""
    nx, nt = (resolution, resolution) if np.ndim(resolution) == 0 else resolution
    x = np.linspace(x_range[0], x_range[1], int(nx))
    t = np.linspace(t_range[0], t_range[1], int(nt))
    tt, xx = np.meshgrid(t, x, indexing="ij")
    d = feynman_propagator(np.abs(xx), tt, eps)
    rows = np.column_stack([xx.ravel(), tt.ravel(), d.real.ravel(), d.imag.ravel(), np.abs(d).ravel()])
    meta = {
        "eps": eps,
        "light_cone": "|x| = |t|",
        "outside_cone_points": int(np.sum(np.abs(xx) > np.abs(tt))),
    }
    return ScanResult("propagator_map", ["x", "t", "re", "im", "abs"], rows, meta)


def rwa_detection_probability(r: float, t: float, eps: float = 1e-6) -> tuple[float, bool]:
    """|D_F(r, t)|^2 as a detection-probability proxy and the outside-cone flag r > t."""
    if not t > 0:
        raise ParameterError(f"t must be > 0, got {t}")
    return abs(feynman_propagator(r, t, eps)) ** 2, bool(r > t)


# ---------------------------------------------------------------------------
# Transfer amplitude
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoAtomConfig:
    separation: float
    omega: float
    dipole: float
    duration: float
    alpha_fs: float = ALPHA_FS

    def __post_init__(self):
        if not self.separation > 0:
            raise ParameterError("separation r must be > 0")
        if not self.omega > 0:
            raise ParameterError("transition frequency must be > 0")
        if not self.duration >= 0:
            raise ParameterError("interaction duration must be >= 0")

    @property
    def far_field(self) -> bool:
        return self.separation >= FAR_FIELD_RATIO * self.duration

    @property
    def coupling(self) -> float:
        """alpha d^2 / (4 pi^2 r^2)."""
        return self.alpha_fs * self.dipole**2 / (4 * np.pi**2 * self.separation**2)


def amplitude_b_closed(config: TwoAtomConfig) -> complex:
    if config.duration == 0:
        return 0j
    if not config.far_field:
        warnings.warn(
            f"r = {config.separation:g} < {FAR_FIELD_RATIO:g} * dt; closed form is a far-field limit",
            FarFieldWarning, stacklevel=2,
        )
    x = 1j * config.omega * config.duration
    return complex(-config.coupling * (x - np.expm1(x)))


@dataclass(frozen=True)
class NumericAmplitude:
    value: complex
    error: float  # |I(n) - I(n/2)| of the final refinement
    eps_change: float  # |I(eps/2) - I(eps)|
    panels: int


def amplitude_b_numeric(config: TwoAtomConfig, rtol: float = 1e-10, max_panels: int = 256,
                        eps: float | None = None, order: int = 8) -> NumericAmplitude:
    """Brute-force double integral, refined by doubling the panel count."""
    T, r = config.duration, config.separation
    if T == 0:
        return NumericAmplitude(0j, 0.0, 0.0, 0)
    if r <= T:
        raise ParameterError("on-cone singularity: r <= dt puts the pole on the integration domain")
    eps = 1e-10 * r * r if eps is None else eps
    nodes, weights = np.polynomial.legendre.leggauss(order)
    pref = -config.alpha_fs * config.dipole**2 * config.omega**2 / (4 * np.pi**2)

    def integral(n, e):
        return pref * kernels.triangle_quad(r * r, config.omega, e, T, n, nodes, weights)

    n = 1
    prev = integral(n, eps)
    while True:
        n *= 2
        cur = integral(n, eps)
        err = abs(cur - prev)
        if err <= rtol * abs(cur) or err == 0.0:
            break
        if n >= max_panels:
            raise ConvergenceError(
                f"quadrature did not reach rtol={rtol:g} with {n} panels (last change {err:.3e})"
            )
        prev = cur
    eps_change = abs(integral(n, 0.5 * eps) - cur)
    return NumericAmplitude(complex(cur), float(err), float(eps_change), n)


# ---------------------------------------------------------------------------
# States and post-selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoAtomState:
    """a |E1 G2> + b |G1 E2> + gamma |phi_perp>."""

    a: complex
    b: complex
    gamma: complex

    def __post_init__(self):
        total = abs(self.a) ** 2 + abs(self.b) ** 2 + abs(self.gamma) ** 2
        if abs(total - 1) > NORM_TOL:
            raise ParameterError(f"two-atom state not normalized: {total}")


@dataclass(frozen=True)
class PostSelectedState:
    """a |E1 G2> + b |G1 E2> with the probability of having reached it."""

    a: complex
    b: complex
    success: float = 1.0

    def __post_init__(self):
        total = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(total - 1) > NORM_TOL:
            raise ParameterError(f"post-selected state not normalized: {total}")
        if not 0.0 <= self.success <= 1.0:
            raise ParameterError(f"success probability {self.success} outside [0, 1]")


def assemble_two_atom_state(b: complex, p_gamma: float) -> TwoAtomState:
    rest = 1.0 - abs(b) ** 2 - p_gamma
    if p_gamma < 0 or rest < -NORM_TOL:
        raise ParameterError(f"|b|^2 + p_gamma = {abs(b)**2 + p_gamma} exceeds 1")
    return TwoAtomState(complex(math.sqrt(max(rest, 0.0))), complex(b), complex(math.sqrt(p_gamma)))


def post_select(state: TwoAtomState) -> PostSelectedState:
    """Keep only events with no photon left."""
    p = abs(state.a) ** 2 + abs(state.b) ** 2
    if not p > 0:
        raise ParameterError("zero support: a = b = 0, post-selection always fails")
    s = math.sqrt(p)
    return PostSelectedState(state.a / s, state.b / s, min(p, 1.0))


@dataclass(frozen=True)
class BalanceResult:
    state: PostSelectedState
    cos_theta: float
    stage_success: float

    @property
    def success(self) -> float:
        """Success probability of the whole chain so far."""
        return self.state.success


def balance_to_maximal(state: PostSelectedState) -> BalanceResult:
    """Move weight out of the larger branch so that |a'| = |b'|.

    A pulse on atom 2 transfers part of the larger branch to an auxiliary
    level that is then measured and discarded; phases are left unchanged.
    """
    ma, mb = abs(state.a), abs(state.b)
    if mb == 0:
        raise ParameterError("b' = 0: nothing to balance toward")
    if ma == 0:
        raise ParameterError("a' = 0: nothing to balance toward")
    if ma >= mb:
        cos_theta = mb / ma
        a, b = state.a * cos_theta, state.b
        stage = 2 * mb**2
    else:
        cos_theta = ma / mb
        a, b = state.a, state.b * cos_theta
        stage = 2 * ma**2
    s = math.sqrt(stage)
    out = PostSelectedState(a / s, b / s, state.success * stage)
    return BalanceResult(out, cos_theta, stage)


def concurrence(state: PostSelectedState) -> float:
    return 2 * abs(state.a) * abs(state.b)


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log1p(-p) / math.log(2))


def mutual_information(state: PostSelectedState) -> float:
    """Bits shared by energy-basis measurements of the two atoms."""
    # H is symmetric; the smaller branch keeps precision when |b'| << 1
    return binary_entropy(min(abs(state.a) ** 2, abs(state.b) ** 2))


def product_state_fidelity(state: TwoAtomState) -> float:
    """Best |<Psi1 Psi2|psi>|^2 over product states.

    Party 1 is atom 1 plus the emitted photon {E1, G1, G1+photon}; party 2 is
    atom 2 {G2, E2}.  The answer is the largest squared Schmidt coefficient.
    """
    m = np.array([[state.a, 0], [0, state.b], [state.gamma, 0]], dtype=np.complex128)
    return float(np.linalg.svd(m, compute_uv=False)[0] ** 2)
