import dataclasses
import math

import numpy as np
import pytest
from scipy import stats as sps

from msanet.analytics import geo_geo1_mean_delay
from msanet.model import SystemParams, derive_constants
from msanet.sim import (
    Mobility, NetworkState, SimConfig, SlotMode, Topology, Traffic, realization_rng,
    run_realization, run_simulation, sample_topology, single_queue_delays, step_slot,
)
from msanet.stats import (
    estimate_delay, estimate_nonempty, estimate_queue_length, joint_frequency,
    pearson_over_slots, stacked_traces,
)
from oracles import window_backlogged_success

BASE = SystemParams()
SMALL = SimConfig(num_realizations=4, num_slots=300, seed=11)


class UnitRng:
    """Stand-in generator: every uniform draw is 0 and every fading draw is 1."""

    def random(self, n):
        return np.zeros(n)

    def exponential(self, size):
        return np.ones(size)


def _pair():
    # receiver 0 at (5, 0); interfering transmitter 1 is 10 away from it
    tx = np.array([[0.0, 0.0], [15.0, 0.0]])
    rx = np.array([[5.0, 0.0], [15.0, 50.0]])
    return Topology(tx, rx, 240.0, 0.0)


@pytest.mark.parametrize("theta, ok", [(7.9, True), (8.1, False)])
def test_deterministic_sinr(theta, ok):
    params = SystemParams(transmit_prob_p=1.0, sinr_threshold_theta=theta, noise_W=0.0)
    trace = step_slot(_pair(), None, params, SlotMode(Traffic.BACKLOGGED), UnitRng(), 0)
    assert trace.interference[0] == pytest.approx(10.0 ** -3)
    assert bool(trace.success[0]) is ok


def test_noise_only_capture_rate():
    params = SystemParams(transmit_prob_p=1.0, noise_W=0.5 / (10 * 125))
    topo = Topology(np.zeros((1, 2)), np.array([[5.0, 0.0]]), 240.0, 0.0)
    rng = np.random.default_rng(5)
    wins = sum(bool(step_slot(topo, None, params, SlotMode(Traffic.BACKLOGGED), rng, t).success[0])
               for t in range(20_000))
    expected = math.exp(-0.5)
    assert abs(wins / 20_000 - expected) < 4 * math.sqrt(expected * (1 - expected) / 20_000)


def test_link_geometry_and_counts():
    counts = []
    cfg = SimConfig()
    for i in range(400):
        topo = sample_topology(BASE, cfg, realization_rng(1, i))
        counts.append(len(topo))
        if i < 5:
            d = np.linalg.norm(topo.tx - topo.rx, axis=1)
            assert np.allclose(d, BASE.link_distance_r0)
            assert np.all((topo.tx >= 0) & (topo.tx <= 240))
    counts = np.asarray(counts)
    mean = 0.01 * 240 ** 2
    assert abs(counts.mean() - mean) < 4 * math.sqrt(mean / counts.size)
    # chi-square goodness of fit on equiprobable Poisson bins
    edges = sps.poisson.ppf(np.linspace(0, 1, 11)[1:-1], mean)
    observed = np.bincount(np.searchsorted(edges, counts, side="right"), minlength=10)
    bins = np.concatenate([[-1], edges, [np.inf]])
    probs = np.diff(sps.poisson.cdf(bins, mean))
    assert sps.chisquare(observed, probs * counts.size).pvalue > 1e-3


def test_sparse_topology_is_empty():
    tiny = dataclasses.replace(BASE, density_lambda=1e-12)
    assert all(len(sample_topology(tiny, SimConfig(), realization_rng(0, i))) == 0 for i in range(50))


def test_interior_mask():
    topo = Topology(np.array([[10.0, 100], [20, 20], [220, 220], [230, 50]]), np.zeros((4, 2)), 240.0, 20.0)
    assert topo.interior.tolist() == [False, True, True, False]


def test_conservation_and_fifo():
    params = dataclasses.replace(BASE, arrival_rate_xi=0.05)
    rec = run_realization(params, SMALL, 0)
    assert np.array_equal(rec.arrivals_per_link, rec.delivered_per_link + rec.final_backlog)
    assert rec.arrivals_per_link.sum() > 0

    rng = realization_rng(3, 0)
    topo = sample_topology(params, SMALL, rng)
    state = NetworkState(len(topo))
    gains = topo.gains(params.pathloss_alpha)
    for t in range(300):
        step_slot(topo, state, params, SlotMode(), rng, t, gains)
    for link in state.links:
        arrivals = [a for a, _ in link.delivered]
        departures = [d for _, d in link.delivered]
        assert arrivals == sorted(arrivals)
        assert departures == sorted(departures)
        assert all(d > a for a, d in link.delivered)
        assert len(link.delivered) + len(link.queue) == link.arrivals


def test_no_arrivals():
    params = dataclasses.replace(BASE, arrival_rate_xi=0.0)
    recs = run_simulation(params, SMALL)
    assert all(r.departure_slot.size == 0 and r.nonempty_count.sum() == 0 for r in recs)
    assert estimate_nonempty(recs) == (0.0, 0.0)


def test_backlogged_is_always_nonempty():
    recs = run_simulation(BASE, dataclasses.replace(SMALL, traffic=Traffic.BACKLOGGED, num_slots=20))
    assert estimate_nonempty(recs)[0] == 1.0


def test_determinism_and_worker_independence():
    cfg = dataclasses.replace(SMALL, mobility=Mobility.HIGH_MOBILITY, num_slots=100, trace=True)
    a = run_simulation(BASE, cfg, workers=1)
    b = run_simulation(BASE, cfg, workers=3)
    c = run_simulation(BASE, cfg, workers=1)
    for x, y, z in zip(a, b, c):
        for f in dataclasses.fields(x):
            u, v, w = getattr(x, f.name), getattr(y, f.name), getattr(z, f.name)
            assert np.array_equal(u, v) and np.array_equal(u, w), f.name
    other = run_simulation(BASE, dataclasses.replace(cfg, seed=12), workers=1)
    assert not np.array_equal(a[0].trace_capture, other[0].trace_capture)


def test_isolated_link_delay():
    # one link, p = 1: service rate e^{-N}; delay from the Geo/Geo/1 formula
    params = SystemParams(density_lambda=1e-9, arrival_rate_xi=0.3, transmit_prob_p=1.0, noise_W=0.5 / 1250)
    topo = Topology(np.zeros((1, 2)), np.array([[5.0, 0.0]]), 240.0, 0.0)
    rng = np.random.default_rng(9)
    state = NetworkState(1)
    for t in range(200_000):
        step_slot(topo, state, params, SlotMode(), rng, t, np.zeros((1, 1)))
    delays = np.array([d - a for a, d in state.links[0].delivered])
    expected = geo_geo1_mean_delay(0.3, math.exp(-0.5))
    assert delays.mean() == pytest.approx(expected, rel=0.03)


def test_noise_free_single_link_delay_is_one():
    params = SystemParams(density_lambda=1e-9, arrival_rate_xi=0.2, transmit_prob_p=1.0, noise_W=0.0)
    topo = Topology(np.zeros((1, 2)), np.array([[5.0, 0.0]]), 240.0, 0.0)
    rng = np.random.default_rng(2)
    state = NetworkState(1)
    for t in range(2000):
        step_slot(topo, state, params, SlotMode(), rng, t, np.zeros((1, 1)))
    assert {d - a for a, d in state.links[0].delivered} == {1}


@pytest.mark.parametrize("xi, mu", [(0.1, 0.5), (0.3, 0.6)])
def test_single_queue_oracle(xi, mu):
    delays = single_queue_delays(xi, mu, 200_000, np.random.default_rng(4))
    assert delays.mean() == pytest.approx(geo_geo1_mean_delay(xi, mu), rel=0.02)
    assert delays.min() >= 1


@pytest.mark.parametrize("mobility, xi", [(Mobility.STATIC, 0.01), (Mobility.HIGH_MOBILITY, 0.02)])
def test_littles_law(mobility, xi):
    # a static network at higher load has locally saturated links, whose
    # long sojourns are censored, so the check uses a comfortably stable load
    params = dataclasses.replace(BASE, density_lambda=0.005, arrival_rate_xi=xi)
    cfg = SimConfig(num_realizations=8, num_slots=2000, seed=21, warmup_slots=200, mobility=mobility)
    recs = run_simulation(params, cfg)
    length = estimate_queue_length(recs)[0]
    delay = estimate_delay(recs)[0]
    assert length == pytest.approx(params.arrival_rate_xi * delay, rel=0.05)


@pytest.mark.parametrize("params, margin, realizations", [
    (SystemParams(density_lambda=0.001), 20.0, 150),
    (SystemParams(density_lambda=0.01, pathloss_alpha=4.0, noise_W=0.0), 60.0, 60),
])
def test_backlogged_success_vs_window_oracle(params, margin, realizations):
    """Single-slot and two-slot success frequencies agree with exact
    quadrature over the simulated window."""
    cfg = SimConfig(num_realizations=realizations, num_slots=100, seed=8,
                    traffic=Traffic.BACKLOGGED, margin=margin)
    recs = run_simulation(params, cfg)
    cap, labels = stacked_traces(recs, "trace_capture")
    single, joint = window_backlogged_success(params, cfg.window_side, margin)
    freq, se = joint_frequency(cap, 1, groups=labels)
    per_real = np.array([cap[:, labels == k].mean() for k in np.unique(labels)])
    se_single = per_real.std(ddof=1) / math.sqrt(per_real.size)
    assert abs(cap.mean() - single) < 3 * se_single
    assert abs(freq - joint) < 3 * se


def test_high_mobility_backlogged_independence():
    cfg = SimConfig(num_realizations=10, num_slots=200, seed=4,
                    mobility=Mobility.HIGH_MOBILITY, traffic=Traffic.BACKLOGGED)
    recs = run_simulation(dataclasses.replace(BASE, density_lambda=0.005), cfg)
    cap, labels = stacked_traces(recs, "trace_capture")
    inside, _ = stacked_traces(recs, "trace_interior")
    r, se = pearson_over_slots(cap, 1, mask=inside, groups=labels)
    assert abs(r) < 3 * se


def test_static_backlogged_interference_correlation():
    cfg = SimConfig(num_realizations=10, num_slots=250, seed=6, traffic=Traffic.BACKLOGGED)
    recs = run_simulation(dataclasses.replace(BASE, density_lambda=0.005), cfg)
    inter, labels = stacked_traces(recs, "trace_interference")
    r, se = pearson_over_slots(inter, 1, groups=labels)
    assert abs(r - 0.25) < 3 * se


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(margin=130)
    with pytest.raises(ValueError):
        SimConfig(num_slots=0)
