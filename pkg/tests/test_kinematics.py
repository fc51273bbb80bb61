import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rss_muodd import kinematics as kin
from rss_muodd.errors import InvalidParameterError, NotApplicableError
from rss_muodd.kinematics import ScenarioParams
from rss_muodd.units import G


def fig4(a_min_g, a_max_g, **kw):
    base = dict(v_r=25.0, v_f=25.0, rho=0.5, a_max_accel=0.3 * G, a_min_brake=a_min_g * G, a_max_brake=a_max_g * G)
    base.update(kw)
    return ScenarioParams(**base)


def test_rest_position_distance_top_left_cell():
    assert round(kin.d_prime_min(fig4(0.05, 0.3)), 1) == 621.0


def test_rest_position_distance_clamps_to_zero():
    p = ScenarioParams(0.0, 10.0, 0.5, 0.0, 3.0, 5.0)
    assert kin.d_prime_unclamped(p) < 0
    assert kin.d_prime_min(p) == 0.0


def test_response_time_closure():
    assert kin.d_double_prime_min(fig4(0.4, 0.3)) == pytest.approx(0.73575, abs=1e-9)
    assert kin.d_double_prime_min(fig4(0.4, 0.3, rho=0.0, v_f=3.0)) == 0.0
    p = ScenarioParams(10.0, 10.0, 1.0, 0.0, 3.0, 1e-300)
    assert kin.d_double_prime_min(p) == pytest.approx(0.0, abs=1e-12)


def test_encroachment_at_equal_speed_time():
    p = fig4(0.4, 0.3)
    assert kin.d_triple_prime_at(p, 3.0) == pytest.approx(4.4145, abs=1e-9)
    assert kin.d_triple_prime_at(p, 0.0) == 0.0


def test_encroachment_peaks_at_equal_speed_time():
    p = fig4(0.4, 0.3)
    _, t_stop_r = kin.stopping_times(p)
    ts = np.arange(0.0, t_stop_r, 1e-4)
    values = [kin.d_triple_prime_at(p, t) for t in ts]
    assert ts[int(np.argmax(values))] == pytest.approx(kin.equal_speed_time(p), abs=1e-4)


def test_encroachment_rejects_negative_time():
    with pytest.raises(InvalidParameterError):
        kin.d_triple_prime_at(fig4(0.4, 0.3), -1.0)


def test_equal_speed_time():
    assert kin.equal_speed_time(fig4(0.4, 0.3)) == pytest.approx(3.0, abs=1e-12)
    p = ScenarioParams(20.0, 20.0, 0.0, 1.0, 5.0, 3.0)
    assert kin.equal_speed_time(p) == 0.0


def test_equal_speed_time_after_front_stops_is_rear_stop():
    # rear barely faster: speeds would meet only after the front is at rest
    p = ScenarioParams(10.05, 10.0, 0.0, 0.0, 5.0, 4.999)
    t_stop_f, t_stop_r = kin.stopping_times(p)
    assert 0.05 / 0.001 > t_stop_f
    assert kin.equal_speed_time(p) == t_stop_r


def test_equal_speed_time_outside_special_case():
    with pytest.raises(NotApplicableError):
        kin.equal_speed_time(fig4(0.3, 0.4))


def test_special_case_predicate():
    assert kin.is_special_case(fig4(0.4, 0.3))
    assert not kin.is_special_case(fig4(0.4, 0.4))
    assert not kin.is_special_case(ScenarioParams(0.0, 30.0, 0.0, 0.0, 5.0, 3.0))


def test_stopping_times():
    t_stop_f, _ = kin.stopping_times(fig4(0.4, 0.6))
    assert t_stop_f == pytest.approx(3.7473, abs=1e-4)
    _, t_stop_r = kin.stopping_times(ScenarioParams(0.0, 5.0, 1.0, 0.0, 3.0, 3.0))
    assert t_stop_r == 0.0
    t_stop_f, _ = kin.stopping_times(ScenarioParams(5.0, 1.0, 1.0, 0.0, 3.0, 3.0))
    assert t_stop_f == 0.0


def test_d_min_special_cell():
    r = kin.d_min(fig4(0.4, 0.3))
    assert round(r.d_min, 1) == 5.2
    assert r.d_prime == 0.0
    assert r.special_case_applied and r.special_case_prevails
    assert r.t_equal == pytest.approx(3.0)


def test_d_min_instant_stop_lead():
    r = kin.d_min(fig4(1.0, math.inf))
    assert round(r.d_min, 1) == 48.6
    assert not r.special_case_applied


def test_d_min_all_at_rest():
    assert kin.d_min(ScenarioParams(0.0, 0.0, 0.5, 0.0, 3.0, 3.0)).d_min == 0.0


def test_front_stopped_within_response_time_uses_rest_bound():
    # lead stops inside rho: overlap can only happen at the rest positions
    p = ScenarioParams(5.0, 1.0, 1.0, 0.0, 8.0, 2.0)
    r = kin.d_min(p)
    assert kin.is_special_case(p)
    assert not r.special_case_applied
    assert r.d_min == kin.d_prime_min(p)


@pytest.mark.parametrize("field", ["v_r", "v_f", "rho", "a_max_accel"])
def test_negative_inputs_rejected(field):
    kw = dict(v_r=1.0, v_f=1.0, rho=1.0, a_max_accel=1.0, a_min_brake=1.0, a_max_brake=1.0)
    kw[field] = -1.0
    with pytest.raises(InvalidParameterError):
        ScenarioParams(**kw)


def test_zero_braking_rejected():
    with pytest.raises(InvalidParameterError):
        ScenarioParams(1.0, 1.0, 1.0, 1.0, 0.0, 1.0)
    with pytest.raises(InvalidParameterError):
        ScenarioParams(1.0, 1.0, 1.0, 1.0, 1.0, 0.0)


speeds = st.floats(0, 40)
brakes = st.floats(0.02 * G, 1.2 * G)
params = st.builds(ScenarioParams, speeds, speeds, st.floats(0, 2), st.floats(0, 1.2 * G), brakes, brakes)


@settings(max_examples=300, deadline=None)
@given(params)
def test_d_min_bounds(p):
    r = kin.d_min(p)
    assert r.d_min >= 0
    assert r.d_min >= r.d_prime
    if r.special_case_applied:
        assert r.d_min == max(r.d_prime, r.d_double_prime + r.d_triple_prime)
        assert r.t_equal >= 0


@settings(max_examples=300, deadline=None)
@given(params)
def test_array_matches_scalar(p):
    values, special = kin.d_min_array(p.v_r, p.v_f, p.rho, p.a_max_accel, p.a_min_brake, p.a_max_brake)
    r = kin.d_min(p)
    assert float(values) == pytest.approx(r.d_min, rel=1e-12, abs=1e-12)
    assert bool(special) == r.special_case_prevails


@settings(max_examples=300, deadline=None)
@given(params)
def test_rest_identity(p):
    if not kin.mid_braking_term_applies(p):
        return
    lhs, rhs = kin.rest_position_identity(p)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)
