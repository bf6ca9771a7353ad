"""Air-time of the RTS*/CTS*/A-MPDU/BA exchange used by the MU-MIMO access scheme.

All durations are handled internally as integer nanoseconds so sums such as a
139.5 us mean backoff stay exact; the public functions report microseconds.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

NS_PER_US = 1000


def us_to_ns(value_us: float) -> int:
    ns = round(value_us * NS_PER_US)
    if abs(ns - value_us * NS_PER_US) > 1e-6:
        raise ValueError(f"{value_us} us is not representable in whole nanoseconds")
    return ns


@dataclass(frozen=True)
class PhyMacParams:
    """PHY/MAC constants (80 MHz, 256-QAM 5/6, 5 GHz OFDM interframe spaces).

    Durations are in microseconds, sizes in bits.
    """

    symbol_time: float = 4.0
    preamble_base: float = 36.0
    sifs: float = 16.0
    difs: float = 34.0
    slot_time: float = 9.0
    mean_backoff_slots: float = 15.5
    bits_per_symbol: int = 1560
    service_field_bits: int = 16
    tail_bits: int = 6
    mpdu_delimiter_bits: int = 32
    mac_header_bits: int = 288
    ba_bits: int = 256
    rts_base_bits: int = 160
    rts_per_extra_addr_bits: int = 46
    cts_base_bits: int = 112
    csi_bits_per_antenna: int = 1872
    packet_payload_bits: int = 12000

    def __post_init__(self):
        for name in ("symbol_time", "preamble_base", "sifs", "difs", "slot_time"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
            us_to_ns(value)
        if self.mean_backoff_slots < 0:
            raise ValueError("mean_backoff_slots must be non-negative")
        us_to_ns(self.mean_backoff_slots * self.slot_time)
        if self.bits_per_symbol <= 0:
            raise ValueError("bits_per_symbol must be positive")
        for f in dataclasses.fields(self):
            if f.name.endswith("_bits") and getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")

    @classmethod
    def from_mapping(cls, values: dict) -> "PhyMacParams":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise KeyError(f"unknown phy parameter(s): {', '.join(sorted(unknown))}")
        return cls(**values)

    @property
    def mean_backoff(self) -> float:
        """Mean backoff duration in microseconds (139.5 us by default)."""
        return self.mean_backoff_slots * self.slot_time


@dataclass(frozen=True)
class CycleBreakdown:
    """Durations (integer ns) of each phase of one transmission cycle."""

    backoff_ns: int
    difs_ns: int
    rts_ns: int
    cts_phase_ns: int
    ampdu_ns: int
    ba_phase_ns: int
    total_ns: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "total_ns",
            self.backoff_ns + self.difs_ns + self.rts_ns + self.cts_phase_ns + self.ampdu_ns + self.ba_phase_ns,
        )

    @property
    def backoff(self) -> float:
        return self.backoff_ns / NS_PER_US

    @property
    def difs(self) -> float:
        return self.difs_ns / NS_PER_US

    @property
    def rts(self) -> float:
        return self.rts_ns / NS_PER_US

    @property
    def cts_phase(self) -> float:
        return self.cts_phase_ns / NS_PER_US

    @property
    def ampdu(self) -> float:
        return self.ampdu_ns / NS_PER_US

    @property
    def ba_phase(self) -> float:
        return self.ba_phase_ns / NS_PER_US

    @property
    def total(self) -> float:
        return self.total_ns / NS_PER_US

    def as_rows(self) -> list[tuple[str, float]]:
        return [
            ("backoff", self.backoff),
            ("difs", self.difs),
            ("rts", self.rts),
            ("cts_phase", self.cts_phase),
            ("ampdu", self.ampdu),
            ("ba_phase", self.ba_phase),
            ("total", self.total),
        ]


DEFAULT_PARAMS = PhyMacParams()


def _check_count(name: str, value: int, low: int = 1):
    if value < low:
        raise ValueError(f"{name} must be >= {low}, got {value}")


def symbols_for_bits(payload_bits: int, phy: PhyMacParams = DEFAULT_PARAMS) -> int:
    return -(-payload_bits // phy.bits_per_symbol)


def _frame_ns(num_ltf: int, body_bits: int, phy: PhyMacParams) -> int:
    bits = phy.service_field_bits + body_bits + phy.tail_bits
    return _preamble_ns(num_ltf, phy) + symbols_for_bits(bits, phy) * us_to_ns(phy.symbol_time)


def _preamble_ns(num_ltf: int, phy: PhyMacParams) -> int:
    _check_count("num_ltf", num_ltf)
    return us_to_ns(phy.preamble_base) + num_ltf * us_to_ns(phy.symbol_time)


def preamble_duration(num_ltf: int, phy: PhyMacParams = DEFAULT_PARAMS) -> float:
    """VHT preamble plus headers carrying ``num_ltf`` long training fields, in us."""
    return _preamble_ns(num_ltf, phy) / NS_PER_US


def _rts_ns(m_antennas: int, phy: PhyMacParams) -> int:
    _check_count("m_antennas", m_antennas)
    body = phy.rts_base_bits + phy.rts_per_extra_addr_bits * (m_antennas - 1)
    return _frame_ns(m_antennas, body, phy)


def _cts_ns(m_antennas: int, phy: PhyMacParams) -> int:
    _check_count("m_antennas", m_antennas)
    body = phy.cts_base_bits + phy.csi_bits_per_antenna * m_antennas
    return _frame_ns(1, body, phy)


def _ampdu_ns(b: int, m_antennas: int, phy: PhyMacParams) -> int:
    _check_count("b", b)
    _check_count("m_antennas", m_antennas)
    per_packet = phy.mac_header_bits + phy.packet_payload_bits
    if b > 1:
        # the delimiter is only present when frames are actually aggregated
        per_packet += phy.mpdu_delimiter_bits
    return _frame_ns(m_antennas, b * per_packet, phy)


def _ba_ns(phy: PhyMacParams) -> int:
    return _frame_ns(1, phy.ba_bits, phy)


def rts_duration(m_antennas: int, phy: PhyMacParams = DEFAULT_PARAMS) -> float:
    return _rts_ns(m_antennas, phy) / NS_PER_US


def cts_duration(m_antennas: int, phy: PhyMacParams = DEFAULT_PARAMS) -> float:
    """CTS* carrying CSI feedback for every AP antenna; single-LTF preamble."""
    return _cts_ns(m_antennas, phy) / NS_PER_US


def ampdu_duration(b: int, m_antennas: int, phy: PhyMacParams = DEFAULT_PARAMS) -> float:
    return _ampdu_ns(b, m_antennas, phy) / NS_PER_US


def ba_duration(phy: PhyMacParams = DEFAULT_PARAMS) -> float:
    return _ba_ns(phy) / NS_PER_US


def cycle_duration(m: int, b: int, m_antennas: int, phy: PhyMacParams = DEFAULT_PARAMS) -> CycleBreakdown:
    """Breakdown of one cycle sending ``m`` streams of ``b`` packets.

    The backoff term is the mean backoff. RTS* and A-MPDU preambles carry one
    LTF per AP antenna whatever ``m`` is.
    """
    _check_count("m_antennas", m_antennas)
    if not 1 <= m <= m_antennas:
        raise ValueError(f"m must be in [1, {m_antennas}], got {m}")
    sifs = us_to_ns(phy.sifs)
    return CycleBreakdown(
        backoff_ns=us_to_ns(phy.mean_backoff),
        difs_ns=us_to_ns(phy.difs),
        rts_ns=_rts_ns(m_antennas, phy),
        cts_phase_ns=m * (sifs + _cts_ns(m_antennas, phy)),
        ampdu_ns=_ampdu_ns(b, m_antennas, phy),
        ba_phase_ns=m * (sifs + _ba_ns(phy)),
    )


def s_max(m_antennas: int, b_max: int, phy: PhyMacParams = DEFAULT_PARAMS) -> float:
    """Saturation throughput in bit/s: every cycle carries M streams of B packets."""
    _check_count("b_max", b_max)
    cycle = cycle_duration(m_antennas, b_max, m_antennas, phy)
    return m_antennas * b_max * phy.packet_payload_bits / (cycle.total_ns * 1e-9)


def duration_table_ns(m_antennas: int, b_max: int, phy: PhyMacParams = DEFAULT_PARAMS) -> list[list[int]]:
    """``table[m][b]`` = cycle length in ns without backoff, for 1 <= m <= M, 1 <= b <= B."""
    table = [[0] * (b_max + 1) for _ in range(m_antennas + 1)]
    for m in range(1, m_antennas + 1):
        for b in range(1, b_max + 1):
            c = cycle_duration(m, b, m_antennas, phy)
            table[m][b] = c.total_ns - c.backoff_ns
    return table


def max_backoff_slots(phy: PhyMacParams) -> int:
    """Upper end of the uniform backoff draw whose mean is ``mean_backoff_slots``."""
    return math.floor(2 * phy.mean_backoff_slots + 0.5)
