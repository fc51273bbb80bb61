import math

import pytest

from rss_muodd.errors import CurveInfeasibleError, InvalidParameterError, NoSafeDistanceError
from rss_muodd.physics import RoadEnvironment, effective_braking_decel, environment_to_scenario, friction_limit

TEN = math.radians(10)


def test_friction_limit():
    assert friction_limit(0.7, 0.0) == pytest.approx(6.867, abs=1e-3)
    assert friction_limit(0.7, TEN) == pytest.approx(6.7626, abs=1e-4)
    assert friction_limit(0.0, -TEN) == 0.0


def test_downhill_braking():
    cap = effective_braking_decel(RoadEnvironment(0.7, -TEN))
    assert cap.decel == pytest.approx(5.059, abs=1e-3)
    assert cap.can_hold


def test_curve_steals_braking():
    cap = effective_braking_decel(RoadEnvironment(0.7, 0.0, 100.0, 25.0))
    # sqrt(6.867**2 - 6.25**2) = 2.84495
    assert cap.decel == pytest.approx(math.sqrt(6.867**2 - 6.25**2), abs=1e-3)
    assert cap.decel == pytest.approx(2.8449, abs=1e-3)


def test_curve_beyond_friction_is_infeasible():
    with pytest.raises(CurveInfeasibleError):
        effective_braking_decel(RoadEnvironment(0.7, 0.0, 50.0, 25.0))


def test_ice_on_downhill_cannot_hold():
    cap = effective_braking_decel(RoadEnvironment(0.1, -TEN))
    assert cap.decel == 0.0
    assert not cap.can_hold


def test_mu_above_one_allowed():
    assert friction_limit(1.1, 0.0) == pytest.approx(1.1 * 9.81)


def test_environment_validation():
    with pytest.raises(InvalidParameterError):
        RoadEnvironment(-0.1)
    with pytest.raises(InvalidParameterError):
        RoadEnvironment(0.7, math.pi / 2)
    with pytest.raises(InvalidParameterError):
        RoadEnvironment(0.7, 0.0, 0.0)


def test_environment_to_scenario():
    dry = RoadEnvironment(0.9)
    assert environment_to_scenario(dry, dry) == pytest.approx((8.829, 8.829), abs=1e-9)
    assert environment_to_scenario(RoadEnvironment(0.1), dry) == pytest.approx((0.981, 8.829), abs=1e-9)
    assert environment_to_scenario(dry, dry, 5.0) == pytest.approx((8.829, 5.0))


def test_environment_to_scenario_cannot_hold():
    with pytest.raises(NoSafeDistanceError):
        environment_to_scenario(RoadEnvironment(0.1, -TEN), RoadEnvironment(0.9))
