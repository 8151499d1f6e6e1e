import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pajscc.channel import (ChainState, Fate, GilbertParams, LossMode, PathSpec, PathState,
                            gilbert_from_stats, loss_runs, next_fate, simulate_fates, stationary,
                            transit)
from pajscc.errors import InvalidParameter, PathUnavailable

from conftest import make_path


def test_zero_loss_params():
    p = gilbert_from_stats(0.0, 4)
    assert p.p_gb == 0.0
    assert p.p_bg == 0.25


def test_symmetric_chain():
    p = gilbert_from_stats(0.5, 2)
    assert p.p_gb == pytest.approx(0.5, abs=1e-15)
    assert p.p_bg == 0.5


def test_from_stats_formula_and_invariants():
    p = gilbert_from_stats(0.1, 4)
    assert p.p_gb == pytest.approx(1 / 36, abs=1e-12)  # 0.1 / (4 * 0.9)
    assert p.p_bg == 0.25
    assert p.p_gb / (p.p_gb + p.p_bg) == pytest.approx(0.1, abs=1e-12)
    assert 1 / p.p_bg == pytest.approx(4, abs=1e-12)


@pytest.mark.parametrize("pi_b, burst", [(1.0, 2), (1.2, 2), (-0.1, 2), (0.1, 0.5), (0.9, 1)])
def test_from_stats_rejects(pi_b, burst):
    # (0.9, 1) implies p_gb = 9 > 1
    with pytest.raises(InvalidParameter):
        gilbert_from_stats(pi_b, burst)


def test_from_stats_boundary_p_gb_equals_one():
    p = gilbert_from_stats(0.5, 1)
    assert p.p_gb == 1.0 and p.p_bg == 1.0


def test_stationary_examples():
    assert stationary(GilbertParams(0.5, 2, 0.5, 0.5)) == (0.5, 0.5)
    assert stationary(GilbertParams(0.0, 3, 0.0, 1 / 3)) == (1.0, 0.0)
    assert stationary(gilbert_from_stats(0.1, 4))[1] == pytest.approx(0.1, abs=1e-12)


def test_stationary_rejects_frozen_chain():
    p = object.__new__(GilbertParams)
    object.__setattr__(p, "p_gb", 0.0)
    object.__setattr__(p, "p_bg", 0.0)
    with pytest.raises(InvalidParameter):
        stationary(p)


@given(st.floats(0.0, 1.0), st.floats(1e-6, 1.0))
def test_stationary_sums_to_one(p_gb, p_bg):
    pi_g, pi_b = stationary(GilbertParams(0.0, 1.0, p_gb, p_bg))
    assert pi_g + pi_b == pytest.approx(1.0, abs=1e-15)
    assert 0.0 <= pi_b <= 1.0


@given(st.floats(0.0, 0.95), st.floats(1.0, 50.0))
def test_from_stats_round_trip(pi_b, burst):
    try:
        p = gilbert_from_stats(pi_b, burst)
    except InvalidParameter:
        assert pi_b / (burst * (1 - pi_b)) > 1
        return
    assert stationary(p)[1] == pytest.approx(pi_b, abs=1e-12)
    assert 1 / p.p_bg == pytest.approx(burst, rel=1e-12)


def test_zero_loss_always_delivered():
    state = PathState(make_path(loss=0.0, burst=3), rng=1)
    assert all(next_fate(state) is Fate.DELIVERED for _ in range(10_000))


def test_near_absorbing_bad_state_loses_first_packet():
    params = GilbertParams(pi_b=1 - 1e-6, mean_burst_len=1e6, p_gb=1.0, p_bg=1e-6)
    spec = PathSpec("bad", 1000, 0, params)
    for seed in range(20):
        assert next_fate(PathState(spec, seed, chain_state=ChainState.BAD)) is Fate.LOST


def test_chain_recovers_when_bg_is_certain():
    params = GilbertParams(pi_b=0.5, mean_burst_len=1, p_gb=1.0, p_bg=1.0)
    state = PathState(PathSpec("x", 1000, 0, params), 0, chain_state=ChainState.BAD)
    fates = [next_fate(state) for _ in range(6)]
    assert fates == [Fate.DELIVERED, Fate.LOST] * 3


def test_empirical_loss_rate_gilbert():
    # 3 standard errors of a Markov chain mean; variance inflation (1+rho)/(1-rho)
    params = gilbert_from_stats(0.2, 3)
    lost = simulate_fates(params, 1_000_000, np.random.default_rng(11))
    rho = 1 - params.p_gb - params.p_bg
    se = math.sqrt(0.2 * 0.8 / 1e6 * (1 + rho) / (1 - rho))
    assert abs(lost.mean() - 0.2) <= max(3 * se, 0.002)


def test_iid_mode_is_uncorrelated():
    params = gilbert_from_stats(0.2, 3)
    lost = simulate_fates(params, 1_000_000, np.random.default_rng(5), mode=LossMode.IID)
    x = lost.astype(float)
    assert abs(x.mean() - 0.2) <= 3 * math.sqrt(0.16 / 1e6)
    r = np.corrcoef(x[:-1], x[1:])[0, 1]
    assert abs(r) <= 3 / math.sqrt(len(x))


def test_fates_deterministic_for_seed():
    params = gilbert_from_stats(0.1, 4)
    a = simulate_fates(params, 5000, np.random.default_rng(3))
    b = simulate_fates(params, 5000, np.random.default_rng(3))
    assert (a == b).all()


def test_loss_runs():
    assert loss_runs(np.array([1, 1, 0, 1, 0, 0, 1, 1, 1], dtype=bool)).tolist() == [2, 1, 3]
    assert loss_runs(np.zeros(4, dtype=bool)).tolist() == []


def test_transit_single_packet():
    state = PathState(make_path(bw=8000, delay=50), rng=0)
    arrival, fate = transit(state, 0.0, 1000)
    assert arrival == pytest.approx(0.001 + 0.050, abs=1e-15)
    assert fate is Fate.DELIVERED
    assert state.queue_free_at_s == pytest.approx(0.001)


def test_transit_back_to_back_spacing():
    state = PathState(make_path(bw=8000, delay=50), rng=0)
    a1, _ = transit(state, 0.0, 1000)
    a2, _ = transit(state, 0.0, 1000)
    assert a2 - a1 == pytest.approx(0.001, abs=1e-15)


def test_transit_infinite_bandwidth_limit():
    state = PathState(make_path(bw=math.inf, delay=0), rng=0)
    arrival, _ = transit(state, 3.25, 1500)
    assert arrival == 3.25


def test_transit_idle_gap_resets_queue():
    state = PathState(make_path(bw=8000, delay=0), rng=0)
    transit(state, 0.0, 1000)
    arrival, _ = transit(state, 1.0, 1000)
    assert arrival == pytest.approx(1.001)


@given(st.lists(st.floats(0, 10), min_size=1, max_size=40))
def test_transit_arrivals_non_decreasing(times):
    state = PathState(make_path(bw=500, delay=30, loss=0.1, burst=2), rng=0)
    arrivals = []
    last_free = 0.0
    for t in sorted(times):
        arrivals.append(transit(state, t, 700)[0])
        assert state.queue_free_at_s >= last_free
        last_free = state.queue_free_at_s
    assert arrivals == sorted(arrivals)


def test_transit_unavailable_path():
    state = PathState(make_path(avail=((0.0, 1.0), (2.0, 3.0))), rng=0)
    transit(state, 0.5, 100)
    transit(state, 2.0, 100)
    with pytest.raises(PathUnavailable):
        transit(state, 1.0, 100)
    with pytest.raises(PathUnavailable):
        transit(state, 3.0, 100)


def test_path_spec_validation():
    with pytest.raises(InvalidParameter):
        make_path(avail=((0, 2), (1, 3)))
    with pytest.raises(InvalidParameter):
        make_path(bw=0)
    with pytest.raises(InvalidParameter):
        make_path(delay=-1)


def test_from_stats_against_sojourn_oracle():
    # Independent oracle: alternate geometric Good/Bad sojourns for ~1e7 packets.
    p = gilbert_from_stats(0.1, 4)
    rng = np.random.default_rng(2024)
    good = rng.geometric(p.p_gb, 300_000)
    bad = rng.geometric(p.p_bg, 300_000)
    total_bad, total = bad.sum(), good.sum() + bad.sum()
    assert total > 1e7
    assert total_bad / total == pytest.approx(0.1, abs=0.002)
    assert bad.mean() == pytest.approx(4.0, rel=0.01)
