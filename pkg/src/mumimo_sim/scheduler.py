"""Selection of stations, spatial streams and A-MPDU size at each transmission.

Two policies:

* ``reference``: ``m = min(xi, M)`` streams where ``xi`` is the number of
  distinct destinations queued, ``b = min(psi, B)`` where ``psi`` is the
  largest count that ``m`` destinations all reach. Ties among stations holding
  at least ``psi`` packets go to the oldest head-of-line packet.
* ``ideal``: pretends any packet can ride any stream, ``m = min(q, M)`` and
  ``b = min(q // m, B)``. Gives the upper bound on performance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

REFERENCE = "reference"
IDEAL = "ideal"
POLICIES = (REFERENCE, IDEAL)


@dataclass(frozen=True)
class TransmissionPlan:
    """One air-time grant: ``m`` streams of ``b`` packets each.

    ``stations`` is empty for oracle plans, whose streams are filled with the
    oldest packets irrespective of destination. ``per_stream_packets`` is
    optional; the buffer fills it in when the plan is executed.
    """

    m: int
    b: int
    stations: tuple[int, ...] = ()
    per_stream_packets: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.m < 1 or self.b < 1:
            raise ValueError(f"plan needs m >= 1 and b >= 1, got m={self.m}, b={self.b}")
        if self.stations:
            if len(self.stations) != self.m:
                raise ValueError(f"{len(self.stations)} stations for {self.m} streams")
            if len(set(self.stations)) != self.m:
                raise ValueError(f"stations must be distinct: {self.stations}")
        if self.per_stream_packets:
            if len(self.per_stream_packets) != self.m or any(len(s) != self.b for s in self.per_stream_packets):
                raise ValueError("every stream must carry exactly b packets")

    @property
    def is_oracle(self) -> bool:
        return not self.stations

    @property
    def n_packets(self) -> int:
        return self.m * self.b


def plan_reference(census: Mapping[int, tuple[int, int]], M: int, B: int) -> Optional[TransmissionPlan]:
    """Reference scheme over a census ``destination -> (count, head position)``.

    Head positions only need to order the stations' oldest packets; queue
    positions and packet ids both work.
    """
    if not census:
        return None
    m = min(len(census), M)
    # equal counts straddling the m-th slot are broken by head position
    ranked = sorted(census.items(), key=lambda item: (-item[1][0], item[1][1]))
    psi = ranked[m - 1][1][0]
    b = min(psi, B)
    eligible = sorted((head, dest) for dest, (count, head) in census.items() if count >= psi)
    stations = tuple(dest for _, dest in eligible[:m])
    return TransmissionPlan(m=m, b=b, stations=stations)


def plan_ideal(q: int, M: int, B: int) -> Optional[tuple[int, int]]:
    """Streams and A-MPDU size the ideal scheduler uses with ``q`` queued packets."""
    if q < 0:
        raise ValueError(f"queued count must be >= 0, got {q}")
    if q == 0:
        return None
    m = min(q, M)
    return m, min(q // m, B)
