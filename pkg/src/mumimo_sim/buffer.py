"""Single shared finite FIFO buffer at the AP.

Packets are identified by integer ids assigned in arrival order, so FIFO order
is id order. Internally the queue is kept as one deque per destination; the
global order is recovered by merging on id. Transmitted packets stay in the
buffer (in flight) until the Block ACK arrives.
"""

from __future__ import annotations

import heapq
from collections import defaultdict, deque
from itertools import islice, repeat
from typing import Iterable, NamedTuple

from mumimo_sim.scheduler import TransmissionPlan


class BufferConsistencyError(RuntimeError):
    """A plan or acknowledgement does not match the buffer contents."""


class Packet(NamedTuple):
    id: int
    destination: int
    arrival_time: float = 0.0


class SharedBuffer:
    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._queues: defaultdict[int, deque[int]] = defaultdict(deque)
        self._n_queued = 0
        self._in_flight: dict[int, int] = {}
        self._last_id = -1

    def __len__(self) -> int:
        return self.occupancy

    @property
    def occupancy(self) -> int:
        return self._n_queued + len(self._in_flight)

    @property
    def n_queued(self) -> int:
        return self._n_queued

    @property
    def free(self) -> int:
        return self.capacity - self._n_queued - len(self._in_flight)

    @property
    def in_flight(self) -> frozenset[int]:
        return frozenset(self._in_flight)

    @property
    def queued(self) -> list[int]:
        """Queued packet ids in arrival order (in-flight packets excluded)."""
        return sorted(pid for q in self._queues.values() for pid in q)

    def queued_destinations(self) -> list[int]:
        pairs = sorted((pid, dest) for dest, q in self._queues.items() for pid in q)
        return [dest for _, dest in pairs]

    def offer(self, packet: Packet) -> bool:
        """Tail-drop admission. Returns False when the packet is blocked."""
        if packet.id <= self._last_id:
            raise ValueError(f"packet ids must increase: got {packet.id} after {self._last_id}")
        if packet.destination < 0:
            raise ValueError(f"invalid destination {packet.destination}")
        self._last_id = packet.id
        if self.free <= 0:
            return False
        self._queues[packet.destination].append(packet.id)
        self._n_queued += 1
        return True

    def offer_many(self, first_id: int, destinations: list[int]) -> int:
        """Offer consecutive ids ``first_id, first_id+1, ...`` in one go.

        No departure can happen in between, so the first ``free`` packets are
        admitted and the rest are blocked. Returns the number admitted.
        """
        if first_id <= self._last_id:
            raise ValueError(f"packet ids must increase: got {first_id} after {self._last_id}")
        if not destinations:
            return 0
        self._last_id = first_id + len(destinations) - 1
        n = min(self.free, len(destinations))
        if n <= 0:
            return 0
        queues = self._queues
        for pid, dest in zip(range(first_id, first_id + n), destinations):
            queues[dest].append(pid)
        self._n_queued += n
        return n

    def census(self) -> dict[int, tuple[int, int]]:
        """``destination -> (queued count, queue position of its oldest packet)``."""
        heads = self.census_by_head()
        order = self.queued
        position = {pid: pos for pos, pid in enumerate(order)}
        return {dest: (count, position[head]) for dest, (count, head) in heads.items()}

    def census_by_head(self) -> dict[int, tuple[int, int]]:
        """Like :meth:`census` but keyed by the oldest packet id (same ordering, no sort)."""
        return {dest: (len(q), q[0]) for dest, q in self._queues.items() if q}

    def dequeue_for_transmission(self, plan: TransmissionPlan) -> list[list[int]]:
        """Move the packets of ``plan`` to in flight; returns the ids per stream.

        Station plans take each station's ``b`` oldest packets. Oracle plans
        (no stations) take the ``m*b`` oldest packets regardless of destination.
        If the plan already lists packet ids they must match exactly; the
        buffer is left untouched when they do not.
        """
        if plan.is_oracle:
            picked = self._oldest(plan.m * plan.b)
        else:
            picked = []
            for station in plan.stations:
                q = self._queues.get(station)
                if q is None or len(q) < plan.b:
                    raise BufferConsistencyError(
                        f"station {station} has {0 if q is None else len(q)} queued packets, plan needs {plan.b}"
                    )
                picked.extend((q[k], station) for k in range(plan.b))
        b = plan.b
        streams = [[pid for pid, _ in picked[k * b:(k + 1) * b]] for k in range(plan.m)]
        if plan.per_stream_packets and [list(s) for s in plan.per_stream_packets] != streams:
            raise BufferConsistencyError("plan packets are not the oldest queued packets of their stations")
        queues = self._queues
        in_flight = self._in_flight
        for pid, dest in picked:
            queues[dest].popleft()
            in_flight[pid] = dest
        self._n_queued -= len(picked)
        return streams

    def _oldest(self, total: int) -> list[tuple[int, int]]:
        if total > self._n_queued:
            raise BufferConsistencyError(f"oracle plan needs {total} packets, {self._n_queued} queued")
        runs = [zip(q, repeat(dest)) for dest, q in self._queues.items() if q]
        return list(islice(heapq.merge(*runs), total))

    def complete_transmission(self, acked: Iterable[int]) -> list[int]:
        """End the cycle: acked packets leave, the rest go back to the head of the queue.

        Returns the delivered ids in increasing order.
        """
        acked = set(acked)
        missing = acked - self._in_flight.keys()
        if missing:
            raise BufferConsistencyError(f"acknowledged packets not in flight: {sorted(missing)}")
        lost: defaultdict[int, list[int]] = defaultdict(list)
        for pid, dest in self._in_flight.items():
            if pid not in acked:
                lost[dest].append(pid)
        for dest, ids in lost.items():
            # in-flight packets are older than anything still queued for the same station
            self._queues[dest].extendleft(sorted(ids, reverse=True))
            self._n_queued += len(ids)
        self._in_flight.clear()
        return sorted(acked)

    def complete_all(self) -> list[int]:
        """Error-free channel: every in-flight packet is acknowledged."""
        delivered = list(self._in_flight)
        self._in_flight.clear()
        return delivered
