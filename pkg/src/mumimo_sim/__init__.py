"""Downlink MU-MIMO WLAN simulator with joint spatial multiplexing and A-MPDU aggregation."""

from mumimo_sim.buffer import Packet, SharedBuffer
from mumimo_sim.engine import RunMetrics, SimConfig, run
from mumimo_sim.phy_timing import CycleBreakdown, PhyMacParams, cycle_duration, s_max
from mumimo_sim.scheduler import TransmissionPlan, plan_ideal, plan_reference

__all__ = [
    "CycleBreakdown",
    "Packet",
    "PhyMacParams",
    "RunMetrics",
    "SharedBuffer",
    "SimConfig",
    "TransmissionPlan",
    "cycle_duration",
    "plan_ideal",
    "plan_reference",
    "run",
    "s_max",
]

__version__ = "0.1.0"
