"""Slotted Monte Carlo simulator of the Poisson bipolar network.

Each realization draws a Poisson number of links uniformly in a square
window. Every slot runs, in order: ALOHA gating of nonempty queues, Rayleigh
fading draws, SINR decisions, departures, Bernoulli arrivals and (in the
high-mobility mode) a fresh placement of every link.

Realizations use independent generators derived from one root seed and the
realization index, so results do not depend on execution order or on the
number of worker processes.
"""
import enum
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import validate_params


class Mobility(enum.Enum):
    STATIC = "static"
    HIGH_MOBILITY = "high_mobility"


class Traffic(enum.Enum):
    BERNOULLI = "bernoulli"
    BACKLOGGED = "backlogged"


@dataclass(frozen=True)
class SimConfig:
    window_side: float = 240.0
    margin: float = 20.0
    num_realizations: int = 200
    num_slots: int = 1000
    mobility: Mobility = Mobility.STATIC
    traffic: Traffic = Traffic.BERNOULLI
    seed: int = 0
    warmup_slots: int = 0
    # record per-slot SINR traces at interior receivers (always on when backlogged)
    trace: bool = False

    def __post_init__(self):
        if not self.window_side > 2 * self.margin:
            raise ValueError("window_side must exceed twice the margin")
        if self.margin < 0:
            raise ValueError("margin must be non-negative")
        if self.num_realizations < 1:
            raise ValueError("num_realizations must be at least 1")
        if self.num_slots < 1:
            raise ValueError("num_slots must be at least 1")
        if not 0 <= self.warmup_slots < self.num_slots:
            raise ValueError("warmup_slots must lie in [0, num_slots)")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def traced(self):
        return self.trace or self.traffic is Traffic.BACKLOGGED


def realization_rng(seed, index):
    """Generator for realization ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


@dataclass
class Topology:
    tx: np.ndarray  # (n, 2)
    rx: np.ndarray  # (n, 2)
    window_side: float
    margin: float

    def __len__(self):
        return len(self.tx)

    @property
    def interior(self):
        lo, hi = self.margin, self.window_side - self.margin
        return np.all((self.tx >= lo) & (self.tx <= hi), axis=1)

    def gains(self, alpha, tx_index=None, rx_index=None):
        """Path gains |tx_i - rx_j|^-alpha with the own-link entries zeroed."""
        ti = np.arange(len(self)) if tx_index is None else tx_index
        ri = np.arange(len(self)) if rx_index is None else rx_index
        diff = self.tx[ti, None, :] - self.rx[None, ri, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        with np.errstate(divide="ignore"):
            g = d2 ** (-alpha / 2.0)
        g[ti[:, None] == ri[None, :]] = 0.0
        return g


def _place_links(n, r0, side, rng):
    tx = rng.uniform(0.0, side, size=(n, 2))
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    rx = tx + r0 * np.column_stack((np.cos(phi), np.sin(phi)))
    return tx, rx


def sample_topology(params, config, rng):
    """Poisson number of links, uniform transmitters, receivers at distance r0."""
    side = config.window_side
    n = rng.poisson(params.density_lambda * side * side)
    tx, rx = _place_links(n, params.link_distance_r0, side, rng)
    return Topology(tx, rx, side, config.margin)


def resample_positions(topology, r0, rng):
    """Move every link rigidly to a fresh uniform position and orientation."""
    tx, rx = _place_links(len(topology), r0, topology.window_side, rng)
    return Topology(tx, rx, topology.window_side, topology.margin)


@dataclass
class LinkState:
    """FIFO of packet arrival slots plus the (arrival, departure) log."""

    queue: deque = field(default_factory=deque)
    delivered: list = field(default_factory=list)
    arrivals: int = 0


class NetworkState:
    """Queues of every link, with a backlog counter kept in step with them."""

    def __init__(self, n):
        self.links = [LinkState() for _ in range(n)]
        self.backlog = np.zeros(n, dtype=np.int64)

    def __len__(self):
        return len(self.links)


@dataclass
class SlotTrace:
    """One slot of per-link observations.

    ``success`` is an actual delivery and implies ``active``. ``capture`` is
    whether the SINR at that receiver exceeded the threshold, evaluated for
    traced links whether or not their own transmitter was active; it is
    the success indicator of the backlogged analysis.
    """

    active: np.ndarray
    success: np.ndarray
    interference: np.ndarray
    capture: np.ndarray
    links: np.ndarray


@dataclass(frozen=True)
class SlotMode:
    traffic: Traffic = Traffic.BERNOULLI
    trace_links: np.ndarray | None = None


def step_slot(topology, states, params, mode, rng, slot, gains=None):
    """Advance the network by one slot.

    Parameters
    ----------
    topology : link positions valid for this slot
    states : NetworkState, updated in place (ignored when backlogged)
    slot : index of this slot, used as departure and arrival timestamp
    gains : optional precomputed ``topology.gains(alpha)`` for static runs

    Returns
    -------
    SlotTrace for the links in the union of active and traced links.
    """
    n = len(topology)
    alpha, theta = params.pathloss_alpha, params.sinr_threshold_theta
    signal_gain = params.link_distance_r0 ** -alpha

    gate = rng.random(n) < params.transmit_prob_p
    if mode.traffic is Traffic.BACKLOGGED:
        active = gate
    else:
        active = gate & (states.backlog > 0)
    act = np.flatnonzero(active)
    traced = mode.trace_links
    targets = act if traced is None else np.union1d(act, traced)

    fading = rng.exponential(size=(act.size, targets.size))
    own = rng.exponential(size=targets.size)
    if gains is None:
        g = topology.gains(alpha, act, targets)
    else:
        g = gains[np.ix_(act, targets)]
    interference = np.einsum("ij,ij->j", fading, g)
    capture = own * signal_gain > theta * (interference + params.noise_W)
    success = capture & active[targets]

    if mode.traffic is Traffic.BERNOULLI:
        for j in targets[success]:
            link = states.links[j]
            link.delivered.append((link.queue.popleft(), slot))
        states.backlog[targets[success]] -= 1
        arrived = np.flatnonzero(rng.random(n) < params.arrival_rate_xi)
        for j in arrived:
            link = states.links[j]
            link.queue.append(slot)
            link.arrivals += 1
        states.backlog[arrived] += 1

    return SlotTrace(active[targets], success, interference, capture, targets)


@dataclass
class RealizationRecord:
    """Raw output of one realization.

    Per-slot arrays have one entry per slot after warm-up. Packet arrays hold
    one entry per delivered packet of a link that was interior when the
    packet departed. Trace arrays have shape ``(slots, traced links)``.
    """

    index: int
    num_links: int
    interior_links: np.ndarray
    interior_count: np.ndarray
    nonempty_count: np.ndarray
    queue_sum: np.ndarray
    attempts: int
    successes: int
    arrival_slot: np.ndarray
    departure_slot: np.ndarray
    stranded: int
    arrivals_per_link: np.ndarray
    delivered_per_link: np.ndarray
    final_backlog: np.ndarray
    trace_links: np.ndarray | None = None
    trace_interference: np.ndarray | None = None
    trace_capture: np.ndarray | None = None
    trace_active: np.ndarray | None = None
    trace_interior: np.ndarray | None = None


def run_realization(params, config, index):
    """Simulate realization ``index`` of ``config``; pure given its inputs."""
    rng = realization_rng(config.seed, index)
    topo = sample_topology(params, config, rng)
    n = len(topo)
    static = config.mobility is Mobility.STATIC
    backlogged = config.traffic is Traffic.BACKLOGGED
    r0 = params.link_distance_r0
    gains = topo.gains(params.pathloss_alpha) if static and n else None

    start_interior = topo.interior
    trace_links = np.flatnonzero(start_interior) if config.traced else None
    mode = SlotMode(config.traffic, trace_links)
    states = NetworkState(n)

    kept = config.num_slots - config.warmup_slots
    interior_count = np.zeros(kept, dtype=np.int64)
    nonempty_count = np.zeros(kept, dtype=np.int64)
    queue_sum = np.zeros(kept, dtype=np.int64)
    arrival, departure = [], []
    attempts = successes = 0
    if trace_links is not None:
        shape = (kept, trace_links.size)
        tr_i = np.zeros(shape)
        tr_c = np.zeros(shape, dtype=bool)
        tr_a = np.zeros(shape, dtype=bool)
        tr_in = np.zeros(shape, dtype=bool)

    interior = start_interior
    for slot in range(config.num_slots):
        k = slot - config.warmup_slots
        if k >= 0:
            if backlogged:
                nonempty_count[k] = interior.sum()
                queue_sum[k] = 0
            else:
                nonempty_count[k] = np.count_nonzero(states.backlog[interior])
                queue_sum[k] = states.backlog[interior].sum()
            interior_count[k] = interior.sum()
        tr = step_slot(topo, states, params, mode, rng, slot, gains)
        if k >= 0:
            inner = interior[tr.links]
            attempts += int(np.count_nonzero(tr.active & inner))
            successes += int(np.count_nonzero(tr.success & inner))
            if not backlogged:
                for j in tr.links[tr.success & inner]:
                    a, d = states.links[j].delivered[-1]
                    arrival.append(a)
                    departure.append(d)
            if trace_links is not None:
                pos = np.searchsorted(tr.links, trace_links)
                tr_i[k] = tr.interference[pos]
                tr_c[k] = tr.capture[pos]
                tr_a[k] = tr.active[pos]
                tr_in[k] = interior[trace_links]
        if not static:
            topo = resample_positions(topo, r0, rng)
            interior = topo.interior

    if backlogged:
        arrivals_per_link = np.zeros(n, dtype=np.int64)
        delivered_per_link = np.zeros(n, dtype=np.int64)
        stranded = 0
    else:
        arrivals_per_link = np.array([link.arrivals for link in states.links], dtype=np.int64)
        delivered_per_link = np.array([len(link.delivered) for link in states.links], dtype=np.int64)
        stranded = int(states.backlog[interior].sum())

    rec = RealizationRecord(
        index=index,
        num_links=n,
        interior_links=np.flatnonzero(start_interior),
        interior_count=interior_count,
        nonempty_count=nonempty_count,
        queue_sum=queue_sum,
        attempts=attempts,
        successes=successes,
        arrival_slot=np.asarray(arrival, dtype=np.int64),
        departure_slot=np.asarray(departure, dtype=np.int64),
        stranded=stranded,
        arrivals_per_link=arrivals_per_link,
        delivered_per_link=delivered_per_link,
        final_backlog=states.backlog.copy(),
    )
    if trace_links is not None:
        rec.trace_links = trace_links
        rec.trace_interference = tr_i
        rec.trace_capture = tr_c
        rec.trace_active = tr_a
        rec.trace_interior = tr_in
    return rec


def default_workers():
    """Worker processes for ``run_simulation``: MSA_THREADS if set, else the CPU count."""
    raw = os.environ.get("MSA_THREADS")
    if not raw:
        return os.cpu_count() or 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"MSA_THREADS must be an integer, got {raw!r}") from None


def _run_one(args):
    return run_realization(*args)


def run_simulation(params, config, workers=None):
    """Run every realization of ``config`` and return their records in index order."""
    validate_params(params)
    workers = default_workers() if workers is None else max(1, int(workers))
    jobs = [(params, config, i) for i in range(config.num_realizations)]
    if workers == 1 or len(jobs) == 1:
        return [_run_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs, chunksize=1))


def single_queue_delays(xi, mu, num_packets, rng):
    """Sojourn times of ``num_packets`` consecutive packets of one
    early-arrival Geo/Geo/1 queue, started empty.

    Arrivals are Bernoulli(xi) per slot and the head-of-line packet leaves
    with probability mu per slot, so a packet arriving in slot ``a`` to an
    idle server leaves at ``a + S`` with ``S ~ Geometric(mu)`` on {1, 2, ...}.
    """
    if not 0.0 < xi <= 1.0 or not 0.0 < mu <= 1.0:
        raise ValueError("xi and mu must lie in (0, 1]")
    arrivals = np.cumsum(rng.geometric(xi, size=num_packets))
    service = rng.geometric(mu, size=num_packets)
    delays = np.empty(num_packets, dtype=np.int64)
    free_at = 0
    for n in range(num_packets):
        a = int(arrivals[n])
        free_at = (a if a > free_at else free_at) + int(service[n])
        delays[n] = free_at - a
    return delays
