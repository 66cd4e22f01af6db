import numpy as np
import pytest

from edgeseg.errors import NumericError, SpecError
from edgeseg.planner import (
    asymptotic_speedup,
    break_even_n,
    choose_target,
    plan,
    total_time_ms,
)


def test_asymptotic_speedup_frozen_values():
    assert asymptotic_speedup(8.73, 7.71) == pytest.approx(1.1323, abs=1e-3)
    assert asymptotic_speedup(8.55, 17.24) == pytest.approx(0.4959, abs=1e-3)


def test_break_even_frozen_case():
    # 1000 ms transfer, 8.73 ms on-device, 7.71 ms in the cloud
    assert break_even_n(1000.0, 8.73, 7.71) == 980
    # at the break-even point the device still wins; one past it, it loses
    assert choose_target(980, 1000.0, 8.73, 7.71) == "edge"
    assert choose_target(981, 1000.0, 8.73, 7.71) == "cloud"


def test_break_even_edges():
    assert break_even_n(0.0, 8.73, 7.71) == 0
    assert break_even_n(1000.0, 7.71, 8.73) is None  # device faster per image
    assert break_even_n(1000.0, 8.0, 8.0) is None  # equal rates: cloud never wins


def test_total_time_formulas():
    assert total_time_ms(7, 100.0, 3.0, 2.0, "edge") == 21.0
    assert total_time_ms(7, 100.0, 3.0, 2.0, "cloud") == 114.0
    with pytest.raises(SpecError):
        total_time_ms(-1, 100.0, 3.0, 2.0, "edge")
    with pytest.raises(SpecError):
        total_time_ms(1, 100.0, 3.0, 2.0, "fog")


def test_validation_errors():
    with pytest.raises(NumericError):
        asymptotic_speedup(8.0, 0.0)
    with pytest.raises(NumericError):
        asymptotic_speedup(8.0, -1.0)
    with pytest.raises(NumericError):
        break_even_n(-5.0, 8.0, 7.0)
    with pytest.raises(NumericError):
        break_even_n(float("nan"), 8.0, 7.0)


def test_ties_go_to_cloud():
    # n*edge == transfer + n*cloud exactly: 10*4 = 20 + 10*2
    assert choose_target(10, 20.0, 4.0, 2.0) == "cloud"
    assert break_even_n(20.0, 4.0, 2.0) == 9


def test_boundary_property_random_sweep():
    rng = np.random.default_rng(12)
    ns = np.arange(0, 10_001)
    for _ in range(1000):
        cloud = float(rng.uniform(0.1, 50.0))
        edge = cloud + float(rng.uniform(0.01, 50.0))  # device slower per image
        transfer = float(rng.uniform(0.1, 5000.0))
        be = break_even_n(transfer, edge, cloud)
        edge_wins = ns * edge < transfer + ns * cloud
        assert np.array_equal(edge_wins, ns <= be)


def test_device_always_wins_when_faster_per_image():
    rng = np.random.default_rng(13)
    for _ in range(200):
        edge = float(rng.uniform(0.1, 20.0))
        cloud = edge + float(rng.uniform(0.01, 20.0))
        transfer = float(rng.uniform(0.1, 1000.0))
        assert break_even_n(transfer, edge, cloud) is None
        for n in (0, 1, 17, 10_000):
            assert choose_target(n, transfer, edge, cloud) == "edge"


def test_plan_bundle():
    p = plan(200, 1000.0, 8.73, 7.71)
    assert p.break_even == 980 and p.target == "edge"
    assert p.edge_total_ms == pytest.approx(200 * 8.73)
    assert p.cloud_total_ms == pytest.approx(1000.0 + 200 * 7.71)
    assert p.asymptotic_speedup == pytest.approx(8.73 / 7.71)
