import numpy as np

from rss_muodd import verify


def test_draws_reproducible():
    a = [verify.draw_scenario(np.random.default_rng(5)) for _ in range(3)]
    b = [verify.draw_scenario(np.random.default_rng(5)) for _ in range(3)]
    assert a == b


def test_special_draws_use_mid_braking_term():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = verify.draw_special_case(rng)
        assert p.a_min_brake > p.a_max_brake


def test_report_passes_and_counts():
    report = verify.run_verify(seed=11, draws=64)
    assert report.ok
    counts = {p.name: p.total for p in report.properties}
    assert counts["oracle_agreement"] == 64
    assert counts["cell_tightness"] == 42


def test_seed_variation():
    for seed in (1, 2):
        assert verify.run_verify(seed=seed, draws=32).ok


def test_corruption_fails():
    agree, safe, _ = verify.check_oracle(0, 64, corrupt=0.01)
    assert not agree.ok
