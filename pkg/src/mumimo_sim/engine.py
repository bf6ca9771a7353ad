"""Discrete-event simulation of the AP downlink.

The AP is the only transmitter, so the event sequence is simply: arrivals
while idle, then back-to-back transmission cycles as long as the queue is not
empty. Within a cycle no departure can happen, so all arrivals falling inside
it are admitted in one tail-drop step. The clock is an integer count of
nanoseconds.

Every offered packet gets an id equal to its arrival index; per-packet arrival
and departure instants live in numpy arrays and all statistics are computed
from them after the event loop.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from mumimo_sim.buffer import Packet, SharedBuffer
from mumimo_sim.phy_timing import NS_PER_US, PhyMacParams, duration_table_ns, max_backoff_slots, us_to_ns
from mumimo_sim.scheduler import IDEAL, POLICIES, REFERENCE, TransmissionPlan, plan_ideal, plan_reference
from mumimo_sim.stats import confidence_half_width

BACKOFF_MODES = ("sampled", "fixed-mean")
_BACKOFF_CHUNK = 1 << 16


class ConfigError(ValueError):
    """Invalid simulation configuration; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class SimConfig:
    M: int = 4
    N: int = 8
    K: int = 1000
    B: int = 64
    load: Optional[float] = None  # offered load, bit/s
    lam: Optional[float] = None  # arrival rate, packet/s (wins over load)
    phy: PhyMacParams = field(default_factory=PhyMacParams)
    scheduler: str = REFERENCE
    seed: int = 1
    horizon: int = 5_000_000  # offered packets
    warmup: Optional[int] = None  # discarded packets, default horizon // 10
    backoff_mode: str = "sampled"
    batches: int = 10
    max_cycles: Optional[int] = None
    arrivals: Optional[Sequence[tuple[float, int]]] = None  # scripted (time us, destination)

    @property
    def arrival_rate(self) -> float:
        if self.lam is not None:
            return float(self.lam)
        if self.load is not None:
            return self.load / self.phy.packet_payload_bits
        raise ConfigError("load", "either load or lam must be given")

    @property
    def offered_load(self) -> float:
        return self.arrival_rate * self.phy.packet_payload_bits

    @property
    def n_packets(self) -> int:
        return len(self.arrivals) if self.arrivals is not None else self.horizon

    @property
    def warmup_packets(self) -> int:
        if self.warmup is not None:
            return self.warmup
        return 0 if self.arrivals is not None else self.horizon // 10

    def validate(self) -> "SimConfig":
        for key in ("M", "N", "K", "B", "horizon", "batches"):
            if int(getattr(self, key)) < 1:
                raise ConfigError(key, f"must be >= 1, got {getattr(self, key)}")
        if self.scheduler not in POLICIES:
            raise ConfigError("scheduler", f"must be one of {POLICIES}, got {self.scheduler!r}")
        if self.backoff_mode not in BACKOFF_MODES:
            raise ConfigError("backoff_mode", f"must be one of {BACKOFF_MODES}, got {self.backoff_mode!r}")
        if self.arrivals is None:
            rate = self.arrival_rate
            if not rate > 0:
                raise ConfigError("load" if self.lam is None else "lam", "must be > 0")
        else:
            times = [t for t, _ in self.arrivals]
            if any(b < a for a, b in zip(times, times[1:])):
                raise ConfigError("arrivals", "times must be non-decreasing")
            if any(not 0 <= d < self.N for _, d in self.arrivals):
                raise ConfigError("arrivals", f"destinations must lie in [0, {self.N})")
        if not 0 <= self.warmup_packets < self.n_packets:
            raise ConfigError("warmup", f"must be in [0, {self.n_packets}), got {self.warmup_packets}")
        if self.max_cycles is not None and self.max_cycles < 1:
            raise ConfigError("max_cycles", "must be >= 1")
        return self

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


METRIC_NAMES = (
    "blocking_probability",
    "mean_delay",
    "throughput",
    "mean_streams",
    "mean_ampdu",
    "mean_aggregated",
    "mean_occupancy",
)


@dataclass
class RunMetrics:
    """Post-warm-up estimates; ``ci`` holds 95% batch-means half-widths."""

    blocking_probability: float
    mean_delay: float  # s
    throughput: float  # bit/s
    mean_streams: float
    mean_ampdu: float
    mean_aggregated: float
    mean_occupancy: float  # time-averaged queued + in-flight packets
    ci: dict[str, float]
    offered: int
    accepted: int
    blocked: int
    delivered: int
    residual: int
    cycles: int
    measured_offered: int
    measured_blocked: int
    measured_accepted: int
    measured_time: float  # s

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


class TraceEvent(NamedTuple):
    time_ns: int
    kind: str  # arrival | cycle_start | cycle_end
    occupancy: int
    queued: int
    m: int = 0
    b: int = 0
    blocked: bool = False
    detail: str = ""

    def format(self, sep: str = ";") -> str:
        t = f"{self.time_ns / NS_PER_US:.3f}"
        return sep.join([t, self.kind, str(self.occupancy), str(self.queued), str(self.m), str(self.b),
                         str(int(self.blocked)), self.detail])


TRACE_HEADER = "time_us;event;occupancy;queued;m;b;blocked;detail"


def next_arrival(rng: np.random.Generator, lam: float, n_stations: int) -> tuple[float, int]:
    """One Poisson inter-arrival gap (s) and a uniformly drawn destination."""
    return float(rng.exponential(1.0 / lam)), int(rng.integers(n_stations))


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    # separate streams so the arrival trace does not depend on policy or backoff mode
    arrivals, destinations, backoff = np.random.SeedSequence(seed).spawn(3)
    return np.random.default_rng(arrivals), np.random.default_rng(destinations), np.random.default_rng(backoff)


def arrival_trace(config: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Arrival instants (int ns) and destinations of every offered packet."""
    if config.arrivals is not None:
        times = np.array([us_to_ns(t) for t, _ in config.arrivals], dtype=np.int64)
        dests = np.array([d for _, d in config.arrivals], dtype=np.int64)
        return times, dests
    rng_arr, rng_dest, _ = _streams(config.seed)
    gaps = rng_arr.exponential(1e9 / config.arrival_rate, size=config.horizon)
    times = np.rint(np.cumsum(gaps)).astype(np.int64)
    dests = rng_dest.integers(config.N, size=config.horizon)
    return times, dests


@dataclass
class _RunState:
    arr_t: np.ndarray
    accepted: np.ndarray
    depart: np.ndarray
    cyc_start: list[int] = field(default_factory=list)
    cyc_m: list[int] = field(default_factory=list)
    cyc_b: list[int] = field(default_factory=list)
    residual: int = 0


def _simulate(config: SimConfig, trace: Optional[Callable[[TraceEvent], None]]) -> _RunState:
    M, B, K = config.M, config.B, config.K
    phy = config.phy
    table = duration_table_ns(M, B, phy)
    arr_t, dests_np = arrival_trace(config)
    dests = dests_np.tolist()
    n = len(dests)
    state = _RunState(arr_t, np.zeros(n, dtype=bool), np.full(n, -1, dtype=np.int64))
    accepted = state.accepted
    depart = state.depart
    cyc_start, cyc_m, cyc_b = state.cyc_start, state.cyc_m, state.cyc_b

    sampled = config.backoff_mode == "sampled"
    if sampled:
        rng_bo = _streams(config.seed)[2]
        slot_ns = us_to_ns(phy.slot_time)
        top = max_backoff_slots(phy)

        def backoff_draws():
            while True:
                yield from (rng_bo.integers(0, top + 1, size=_BACKOFF_CHUNK) * slot_ns).tolist()

        backoffs = backoff_draws()
    else:
        mean_backoff = us_to_ns(phy.mean_backoff)

    buf = SharedBuffer(K)
    reference = config.scheduler == REFERENCE
    max_cycles = config.max_cycles
    search = arr_t.searchsorted

    def admit(lo: int, hi: int):
        if trace is None:
            got = buf.offer_many(lo, dests[lo:hi])
            accepted[lo:lo + got] = True
            return
        for k in range(lo, hi):
            ok = buf.offer(Packet(k, dests[k], int(arr_t[k])))
            accepted[k] = ok
            trace(TraceEvent(int(arr_t[k]), "arrival", buf.occupancy, buf.n_queued, blocked=not ok,
                             detail=str(dests[k])))

    i = 0
    now = 0
    while True:
        if buf.n_queued == 0:
            if i >= n:
                break
            now = int(arr_t[i])
        j = int(search(now, "right"))
        if j > i:
            admit(i, j)
            i = j

        if reference:
            plan = plan_reference(buf.census_by_head(), M, B)
        else:
            m, b = plan_ideal(buf.n_queued, M, B)
            plan = TransmissionPlan(m=m, b=b)
        m, b = plan.m, plan.b
        buf.dequeue_for_transmission(plan)
        end = now + table[m][b] + (next(backoffs) if sampled else mean_backoff)
        cyc_start.append(now)
        cyc_m.append(m)
        cyc_b.append(b)
        if trace is not None:
            who = "+".join(map(str, plan.stations)) if plan.stations else "oracle"
            trace(TraceEvent(now, "cycle_start", buf.occupancy, buf.n_queued, m, b, detail=who))

        j = int(search(end, "left"))
        if j > i:
            admit(i, j)
            i = j
        delivered = buf.complete_all()
        depart[delivered] = end
        now = end
        if trace is not None:
            trace(TraceEvent(now, "cycle_end", buf.occupancy, buf.n_queued, m, b, detail=str(len(delivered))))
        if max_cycles is not None and len(cyc_m) >= max_cycles:
            break

    state.residual = buf.occupancy
    return state


def _window_overlap(arr: np.ndarray, dep: np.ndarray, lo: int, hi: int) -> float:
    """Integral over [lo, hi) of the number of packets present (sum of clipped sojourns)."""
    a = np.maximum(arr, lo)
    d = np.minimum(dep, hi)
    return float(np.clip(d - a, 0, None).sum())


def _estimates(state: _RunState, idx_lo: int, idx_hi: int, t_lo: int, t_hi: int, payload_bits: int,
               cycles: tuple[np.ndarray, np.ndarray, np.ndarray], sojourn: tuple[np.ndarray, np.ndarray]) -> dict:
    arr_t, accepted, depart = state.arr_t, state.accepted, state.depart
    offered = idx_hi - idx_lo
    acc = accepted[idx_lo:idx_hi]
    dep = depart[idx_lo:idx_hi]
    done = dep >= 0
    span = t_hi - t_lo
    out = {
        "blocking_probability": 1.0 - acc.sum() / offered if offered else math.nan,
        "mean_delay": float((dep[done] - arr_t[idx_lo:idx_hi][done]).mean()) * 1e-9 if done.any() else math.nan,
    }
    if span > 0:
        n_out = np.count_nonzero((depart > t_lo) & (depart <= t_hi))
        out["throughput"] = n_out * payload_bits / (span * 1e-9)
        out["mean_occupancy"] = _window_overlap(*sojourn, t_lo, t_hi) / span
    else:
        out["throughput"] = math.nan
        out["mean_occupancy"] = math.nan
    start, m, b = cycles
    sel = (start >= t_lo) & (start < t_hi) if span > 0 else (start >= t_lo)
    if sel.any():
        out["mean_streams"] = float(m[sel].mean())
        out["mean_ampdu"] = float(b[sel].mean())
        out["mean_aggregated"] = float((m[sel] * b[sel]).mean())
    else:
        out["mean_streams"] = out["mean_ampdu"] = out["mean_aggregated"] = math.nan
    return out


def _collect(config: SimConfig, state: _RunState) -> RunMetrics:
    arr_t, accepted, depart = state.arr_t, state.accepted, state.depart
    n = len(arr_t)
    warm = config.warmup_packets
    payload = config.phy.packet_payload_bits
    t_lo = int(arr_t[warm])
    t_hi = int(arr_t[-1])
    cycles = (np.asarray(state.cyc_start, dtype=np.int64), np.asarray(state.cyc_m), np.asarray(state.cyc_b))
    present = accepted
    big = np.iinfo(np.int64).max
    sojourn = (arr_t[present], np.where(depart[present] >= 0, depart[present], big))

    point = _estimates(state, warm, n, t_lo, t_hi, payload, cycles, sojourn)

    batches = min(config.batches, n - warm)
    ci = {name: math.nan for name in METRIC_NAMES}
    if batches >= 2:
        edges = np.linspace(warm, n, batches + 1).astype(int)
        t_edges = [int(arr_t[e]) for e in edges[:-1]] + [t_hi]
        per_batch = [
            _estimates(state, edges[k], edges[k + 1], t_edges[k], t_edges[k + 1], payload, cycles, sojourn)
            for k in range(batches)
        ]
        ci = {name: confidence_half_width([row[name] for row in per_batch]) for name in METRIC_NAMES}

    n_acc = int(accepted.sum())
    m_acc = int(accepted[warm:].sum())
    return RunMetrics(
        **{name: float(point[name]) for name in METRIC_NAMES},
        ci=ci,
        offered=n,
        accepted=n_acc,
        blocked=n - n_acc,
        delivered=int(np.count_nonzero(depart >= 0)),
        residual=state.residual,
        cycles=len(state.cyc_m),
        measured_offered=n - warm,
        measured_blocked=(n - warm) - m_acc,
        measured_accepted=m_acc,
        measured_time=(t_hi - t_lo) * 1e-9,
    )


def run(config: SimConfig, trace: Optional[Callable[[TraceEvent], None]] = None) -> RunMetrics:
    """Run one simulation. Deterministic for a given configuration and seed."""
    config.validate()
    state = _simulate(config, trace)
    return _collect(config, state)


def run_with_state(config: SimConfig) -> tuple[RunMetrics, _RunState]:
    config.validate()
    state = _simulate(config, None)
    return _collect(config, state), state
