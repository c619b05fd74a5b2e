import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_optics import ScanResult
from nonlocal_optics import biphoton as bp
from nonlocal_optics import dispersion as dp
from nonlocal_optics import hom
from nonlocal_optics import interferometry as fi
from nonlocal_optics import lightcone as lc
from nonlocal_optics.harness.config import parse_config, serialize_config

finite = st.floats(-50, 50, allow_nan=False)
phase = st.floats(-10, 10, allow_nan=False)
FAST = settings(max_examples=40, deadline=None)


def small_state(seed, n=16):
    rng = np.random.default_rng(seed)
    ax = bp.Axis(n, 1.0, 3.0)
    data = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return bp.JointAmplitude(bp.FREQUENCY, bp.normalized(data), (ax, ax))


@FAST
@given(seed=st.integers(0, 2**32 - 1), k0=finite, k1=finite, k2=finite,
       z=st.floats(0, 10), arm=st.sampled_from([1, 2]))
def test_media_are_unitary(seed, k0, k1, k2, z, arm):
    s = small_state(seed)
    m = dp.DispersiveMedium(k0, k1, k2, z)
    out = dp.apply_medium(s, m, arm)
    assert out.norm == pytest.approx(1.0, abs=1e-9)
    back = dp.apply_medium(out, m.negated(), arm)
    assert np.linalg.norm(back.data - s.data) < 1e-9


@FAST
@given(seed=st.integers(0, 2**32 - 1), tau=finite)
def test_hom_probability_bounds_and_relabeling(seed, tau):
    s = small_state(seed)
    p = hom.hom_coincidence(s, hom.HomSetup(tau))
    assert -1e-12 <= p <= 1 + 1e-12
    assert hom.hom_coincidence(bp.swap_photons(s), hom.HomSetup(-tau)) == pytest.approx(p, abs=1e-12)


@FAST
@given(seed=st.integers(0, 2**32 - 1), tau=finite)
def test_hom_symmetric_states(seed, tau):
    s = small_state(seed)
    sym = s.replace(bp.normalized(s.data + s.data.T))
    assert hom.hom_coincidence(sym) == pytest.approx(0.0, abs=1e-12)
    p = hom.hom_coincidence(sym, hom.HomSetup(tau))
    assert hom.hom_coincidence(sym, hom.HomSetup(-tau)) == pytest.approx(p, abs=1e-9)


@FAST
@given(sp=st.floats(0.02, 0.3), sm=st.floats(0.3, 1.0), tau=finite)
def test_hom_gaussian_never_exceeds_half(sp, sm, tau):
    s = bp.make_state(bp.GaussianPDC(0.0, 0.0, sp, sm), bp.FrequencyGrid.square(512, 6.0))
    assert -1e-12 <= hom.hom_coincidence(s, hom.HomSetup(tau)) <= 0.5 + 1e-6


@pytest.fixture(scope="module")
def unbalanced_pair(pdc_wide):
    return pdc_wide, fi.FransonSetup.matched(12.0, 3.0)


@FAST
@given(p1=phase, p2=phase, shift=phase)
def test_rate_depends_only_on_phase_sum(unbalanced_pair, p1, p2, shift):
    state, setup = unbalanced_pair
    a = fi.coincidence_rate(state, setup.with_phases(p1, p2))
    b = fi.coincidence_rate(state, setup.with_phases(p1 + shift, p2 - shift))
    assert 0 <= a <= 1
    assert a == pytest.approx(b, abs=1e-6)


@FAST
@given(b_mag=st.floats(1e-6, 0.7), b_arg=st.floats(-math.pi, math.pi), frac=st.floats(0, 0.99))
def test_post_selection_chain(b_mag, b_arg, frac):
    b = b_mag * complex(math.cos(b_arg), math.sin(b_arg))
    p_gamma = frac * (1 - b_mag**2)
    s = lc.assemble_two_atom_state(b, p_gamma)
    post = lc.post_select(s)
    assert abs(post.a) ** 2 + abs(post.b) ** 2 == pytest.approx(1.0, abs=1e-9)
    assert 0 <= post.success <= 1
    bal = lc.balance_to_maximal(post)
    assert lc.concurrence(bal.state) == pytest.approx(1.0, abs=1e-9)
    assert lc.mutual_information(bal.state) == pytest.approx(1.0, abs=1e-9)
    assert 0 <= bal.success <= post.success + 1e-15
    if b_mag**2 <= 0.5:
        assert lc.product_state_fidelity(s) < 1 - b_mag**2 / 2


@FAST
@given(p=st.floats(0, 1))
def test_binary_entropy_symmetric(p):
    assert lc.binary_entropy(p) == pytest.approx(lc.binary_entropy(1 - p), abs=1e-12)
    assert 0 <= lc.binary_entropy(p) <= 1


@FAST
@given(r=st.floats(1, 1e4), wt=st.floats(0.01, 50))
def test_closed_amplitude_scaling(r, wt):
    b1 = lc.amplitude_b_closed(lc.TwoAtomConfig(100 * r, wt, 1.0, 1.0))
    b2 = lc.amplitude_b_closed(lc.TwoAtomConfig(200 * r, wt, 1.0, 1.0))
    assert abs(b1) == pytest.approx(4 * abs(b2), rel=1e-12)


@FAST
@given(r=st.floats(0, 100), t=st.floats(-100, 100), eps=st.floats(1e-9, 1))
def test_propagator_finite_and_even(r, t, eps):
    d = lc.feynman_propagator(r, t, eps)
    assert math.isfinite(abs(d))
    assert d == lc.feynman_propagator(r, -t, eps)


@FAST
@given(delay=st.floats(0.5, 40), window=st.floats(0.1, 5), seed=st.integers(0, 2**64 - 1),
       n=st.integers(1, 40))
def test_config_round_trip(delay, window, seed, n):
    text = json.dumps({"experiment": "franson-fringes", "seed": seed,
                       "setup": {"delay": delay, "window": window},
                       "sweep": {"phi1": {"start": 0, "stop": 3, "num": n}}})
    cfg = parse_config(text)
    assert parse_config(serialize_config(cfg)) == cfg


@FAST
@given(st.lists(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=3, max_size=3),
                max_size=20))
def test_csv_round_trip_exact(rows):
    res = ScanResult("t", ["a", "b", "c"], rows)
    back = ScanResult.from_csv("t", res.to_csv())
    assert np.array_equal(np.asarray(back.rows).reshape(-1, 3), np.asarray(rows, dtype=float).reshape(-1, 3))
