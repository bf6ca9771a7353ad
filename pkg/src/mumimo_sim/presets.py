"""Shipped configurations reproducing the published scenarios."""

from __future__ import annotations

import copy
from typing import Any

# Fig. 2 walk-through: M=2, B=2, K=8, fixed mean backoff. Destinations are
# zero-based, so STA k of the figure is destination k-1. Cycle boundaries are
# 0, 425.5, 1011, 1564.5 and 2150 us; every arrival falls strictly inside one.
FIG2_ARRIVALS = [
    (0.0, 0),
    # during the (i-1)-th transmission: two for STA4, two for STA2
    (100.0, 3), (150.0, 3), (200.0, 1), (250.0, 1),
    # during the i-th: two for STA3, one for STA1, two for STA2 (the last is blocked)
    (500.0, 2), (550.0, 2), (600.0, 0), (650.0, 1), (700.0, 1),
    # during the (i+1)-th
    (1100.0, 2), (1150.0, 1), (1200.0, 0), (1250.0, 0),
]

RUN_PRESETS: dict[str, dict[str, Any]] = {
    "fig2-trace": {
        "M": 2, "N": 4, "K": 8, "B": 2,
        "backoff_mode": "fixed-mean",
        "arrivals": FIG2_ARRIVALS,
        "max_cycles": 4,
        "batches": 2,
    },
    "fig3a-m4-k1000": {"M": 4, "N": 8, "K": 1000, "B": 64, "load_mbps": 1098},
    "fig3a-m8-k1000": {"M": 8, "N": 16, "K": 1000, "B": 64, "load_mbps": 1390},
    "fig3a-m8-k2000": {"M": 8, "N": 16, "K": 2000, "B": 64, "load_mbps": 1740},
}

_POLICIES = ("reference", "ideal")

SWEEP_PRESETS: dict[str, dict[str, Any]] = {
    "fig3a-m4": {
        "base": {"M": 4, "N": 8, "B": 64, "horizon": 1_000_000},
        "sweep": {
            "axis": "load_mbps",
            "values": [800, 900, 950, 1000, 1050, 1075, 1100, 1150, 1200],
            "replications": 1,
            "series": [{"K": k, "scheduler": p} for k in (500, 1000, 2000) for p in _POLICIES],
        },
    },
    "fig3a-m8": {
        "base": {"M": 8, "N": 16, "B": 64, "horizon": 1_000_000},
        "sweep": {
            "axis": "load_mbps",
            "values": [1100, 1200, 1300, 1350, 1400, 1500, 1600, 1700, 1750, 1800],
            "replications": 1,
            "series": [{"K": k, "scheduler": p} for k in (500, 1000, 2000) for p in _POLICIES],
        },
    },
    "fig3b-3c": {
        "base": {"M": 4, "B": 64, "horizon": 500_000},
        "sweep": {
            "axis": "N",
            "values": [4, 5, 6, 7, 8, 10, 12, 16, 20, 24, 32],
            "replications": 1,
            "series": [{"K": 500, "load_mbps": 930}, {"K": 1000, "load_mbps": 1098}],
        },
    },
}

TIMING_PRESETS: dict[str, dict[str, Any]] = {
    "smax-table": {"M": [1, 2, 4, 8], "B": [1, 2, 4, 8, 16, 32, 64]},
}

ALL_PRESETS = sorted({*RUN_PRESETS, *SWEEP_PRESETS, *TIMING_PRESETS})


def get_run_preset(name: str) -> dict[str, Any]:
    if name not in RUN_PRESETS:
        raise KeyError(f"unknown run preset {name!r}; choose from {sorted(RUN_PRESETS)}")
    return copy.deepcopy(RUN_PRESETS[name])


def get_sweep_preset(name: str) -> dict[str, Any]:
    if name not in SWEEP_PRESETS:
        raise KeyError(f"unknown sweep preset {name!r}; choose from {sorted(SWEEP_PRESETS)}")
    return copy.deepcopy(SWEEP_PRESETS[name])
