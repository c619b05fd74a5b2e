import math

import numpy as np
import pytest

from nonlocal_optics import biphoton as bp
from nonlocal_optics import dispersion as dp
from nonlocal_optics.errors import DomainError, ParameterError

SIGMA_MINUS = 0.5


def gaussian_width_oracle(sp, sm, b1, b2):
    """RMS of t1 - t2 for a Gaussian pair after quadratic phases b1, b2 (= k'' z).

    In y = (w1 + w2, w1 - w2) the amplitude is exp(-y^T M y).  Its Fourier
    transform in x = (T, tau / 2) has intensity exp(-x^T Re(M^-1) x / 2).
    """
    m = np.diag([1 / (4 * sp**2), 1 / (4 * sm**2)]).astype(complex)
    m -= 1j * np.array([[b1 + b2, b1 - b2], [b1 - b2, b1 + b2]]) / 8
    cov = np.linalg.inv(np.linalg.inv(m).real)
    return math.sqrt(4 * cov[1, 1])


def pdc(sp, sm=SIGMA_MINUS, n=1024, span=4.0):
    return bp.make_state(bp.GaussianPDC(0.0, 0.0, sp, sm), bp.FrequencyGrid.square(n, span))


@pytest.fixture(scope="module")
def narrow():
    return pdc(0.02)


def both(state, b1, b2):
    return dp.apply_medium(dp.apply_medium(state, dp.DispersiveMedium(k2=b1), 1), dp.DispersiveMedium(k2=b2), 2)


def test_medium_validation():
    with pytest.raises(ParameterError):
        dp.DispersiveMedium(length=-1.0)
    with pytest.raises(ParameterError):
        dp.DispersiveMedium(k2=math.inf)
    with pytest.raises(ParameterError):
        dp.DispersiveMedium.from_taylor([0.0, 1.0, 2.0, 3.0])
    m = dp.DispersiveMedium.from_taylor([0.5, 2.0], length=3.0)
    assert (m.k0, m.k1, m.k2, m.length) == (0.5, 2.0, 0.0, 3.0)
    assert m.group_delay == 6.0 and m.gdd == 0.0


def test_apply_medium_needs_frequency_domain(narrow):
    with pytest.raises(DomainError):
        dp.apply_medium(bp.as_time(narrow), dp.DispersiveMedium(k2=1.0), 1)
    with pytest.raises(ParameterError):
        dp.apply_medium(narrow, dp.DispersiveMedium(k2=1.0), 3)


def test_zero_length_is_identity(narrow):
    out = dp.apply_medium(narrow, dp.DispersiveMedium(1.0, 2.0, 3.0, length=0.0), 1)
    assert np.array_equal(out.data, narrow.data)


@pytest.mark.parametrize("arm", [1, 2])
def test_norm_preserved(narrow, arm):
    out = dp.apply_medium(narrow, dp.DispersiveMedium(0.3, 1.5, 40.0, 2.0), arm)
    assert out.norm == pytest.approx(1.0, abs=1e-9)


def test_negation_round_trip(narrow):
    m = dp.DispersiveMedium(0.7, 3.0, 25.0, 1.3)
    back = dp.apply_medium(dp.apply_medium(narrow, m, 2), m.negated(), 2)
    rel = np.linalg.norm(back.data - narrow.data) / np.linalg.norm(narrow.data)
    assert rel < 1e-9


def test_linear_phase_translates_correlation(narrow):
    k1, z = 2.5, 2.0
    bare_c = bp.correlation_center(narrow)
    bare_w = dp.correlation_width(narrow)
    out = dp.apply_medium(narrow, dp.DispersiveMedium(k1=k1, length=z), 1)
    # photon 1 arrives k1 z later, so t1 - t2 grows by k1 z
    assert bp.correlation_center(out) - bare_c == pytest.approx(k1 * z, rel=0.01)
    assert dp.correlation_width(out) == pytest.approx(bare_w, rel=0.01)


def test_bare_width_matches_gaussian_moment(narrow):
    assert dp.correlation_width(narrow) == pytest.approx(1 / SIGMA_MINUS, rel=0.01)


def test_width_positive_and_phase_blind(narrow):
    w = dp.correlation_width(narrow)
    assert w > 0
    rotated = narrow.replace(narrow.data * np.exp(1.234j))
    assert dp.correlation_width(rotated) == pytest.approx(w, rel=1e-12)


@pytest.mark.parametrize("sp", [0.01, 0.05, 0.2])
@pytest.mark.parametrize("b1, b2", [(20.0, -20.0), (20.0, 20.0), (10.0, 0.0), (5.0, -15.0)])
def test_width_against_quadratic_form_oracle(sp, b1, b2):
    st = pdc(sp)
    assert dp.correlation_width(both(st, b1, b2)) == pytest.approx(
        gaussian_width_oracle(sp, SIGMA_MINUS, b1, b2), rel=1e-6)


def test_opposite_media_cancel(narrow):
    m = dp.DispersiveMedium(k2=20.0)
    assert dp.nonlocal_cancellation_check(narrow, m, m.negated()) == pytest.approx(1.0, abs=0.02)


def test_same_sign_media_broaden(narrow):
    m = dp.DispersiveMedium(k2=20.0)
    ratio = dp.nonlocal_cancellation_check(narrow, m, m)
    assert ratio > 2
    assert ratio == pytest.approx(gaussian_width_oracle(0.02, SIGMA_MINUS, 20, 20) / 2.0, rel=1e-6)


def test_no_dispersion_ratio_is_one(narrow):
    m = dp.DispersiveMedium(k0=1.0, k1=0.0, k2=0.0)
    assert dp.nonlocal_cancellation_check(narrow, m, m) == pytest.approx(1.0, abs=1e-6)


def test_check_accepts_time_domain(narrow):
    m = dp.DispersiveMedium(k2=20.0)
    a = dp.nonlocal_cancellation_check(narrow, m, m.negated())
    b = dp.nonlocal_cancellation_check(bp.as_time(narrow), m, m.negated())
    assert a == pytest.approx(b, rel=1e-9)


def test_cancellation_degrades_monotonically():
    m = dp.DispersiveMedium(k2=20.0)
    ratios = [dp.nonlocal_cancellation_check(pdc(sp), m, m.negated()) for sp in (0.01, 0.02, 0.05, 0.1, 0.2)]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert ratios[0] == pytest.approx(1.0, abs=0.01)


def test_cascade_cancellation():
    spec = bp.Cascade(0.0, 100.0, 1.0)
    grid = bp.FrequencyGrid((2048, 2048), (spec.center1, spec.center2), (10.0, 10.0))
    st = bp.make_cascade_state(spec, grid)
    m = dp.DispersiveMedium(k2=3.0)
    assert dp.nonlocal_cancellation_check(st, m, m.negated()) == pytest.approx(1.0, abs=0.02)
    assert dp.nonlocal_cancellation_check(st, m, m) > 2
