"""Run/sweep configuration: TOML files, ``key=value`` overrides and shipped presets.

Run configuration keys are the :class:`SimConfig` field names plus

* ``alpha``: buffer factor, sets ``K = round(alpha * M * B)``
* ``load_mbps``: offered load in Mbit/s (alternative to ``load`` in bit/s)
* ``phy.<field>`` or a ``[phy]`` table: :class:`PhyMacParams` fields

A sweep file has a ``[base]`` table (run keys), and a ``[sweep]`` table with
``axis`` (one of ``load``, ``load_mbps``, ``N``, ``K``, ``M``, ``alpha``),
``values`` (list) or ``start``/``stop``/``step``, ``replications``, and an
optional ``series`` list of override tables, each swept over all values.
"""

from __future__ import annotations

import copy
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import tomli

from mumimo_sim.engine import ConfigError, SimConfig
from mumimo_sim.phy_timing import PhyMacParams

SWEEP_AXES = ("load", "load_mbps", "N", "K", "M", "alpha")
_SIM_FIELDS = {f.name for f in dataclasses.fields(SimConfig)} - {"phy"}
_EXTRA_KEYS = {"alpha", "load_mbps"}
_PHY_FIELDS = {f.name for f in dataclasses.fields(PhyMacParams)}
# keys that would silently override the swept one
_SHADOWED_BY = {"load": ("load_mbps", "lam"), "load_mbps": ("load", "lam"), "K": ("alpha",)}


def parse_value(text: str) -> Any:
    """TOML scalar/array syntax, falling back to a bare string (``scheduler=ideal``)."""
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def parse_overrides(pairs: list[str]) -> dict[str, Any]:
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(pair, "overrides must look like key=value")
        out[key] = parse_value(value.strip())
    return out


def load_toml(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    with path.open("rb") as fh:
        return tomli.load(fh)


def _flatten(values: dict[str, Any]) -> dict[str, Any]:
    flat = {}
    for key, value in values.items():
        if key == "phy" and isinstance(value, dict):
            flat.update({f"phy.{k}": v for k, v in value.items()})
        else:
            flat[key] = value
    return flat


def build_config(values: dict[str, Any]) -> SimConfig:
    """Turn a flat (or ``[phy]``-nested) mapping into a validated :class:`SimConfig`."""
    values = _flatten(values)
    sim: dict[str, Any] = {}
    phy: dict[str, Any] = {}
    for key, value in values.items():
        if key.startswith("phy."):
            name = key[4:]
            if name not in _PHY_FIELDS:
                raise ConfigError(key, "unknown phy parameter")
            phy[name] = value
        elif key in _SIM_FIELDS or key in _EXTRA_KEYS:
            sim[key] = value
        else:
            raise ConfigError(key, "unknown configuration key")
    try:
        phy_params = PhyMacParams(**phy)
    except (TypeError, ValueError) as exc:
        raise ConfigError("phy", str(exc)) from exc
    alpha = sim.pop("alpha", None)
    load_mbps = sim.pop("load_mbps", None)
    if load_mbps is not None:
        sim["load"] = float(load_mbps) * 1e6
    if sim.get("arrivals") is not None:
        sim["arrivals"] = [tuple(a) for a in sim["arrivals"]]
    for key in ("M", "N", "K", "B", "seed", "horizon", "warmup", "batches", "max_cycles"):
        if sim.get(key) is not None:
            if isinstance(sim[key], bool) or float(sim[key]) != int(sim[key]):
                raise ConfigError(key, f"must be an integer, got {sim[key]!r}")
            sim[key] = int(sim[key])
    for key in ("load", "lam"):
        if sim.get(key) is not None:
            try:
                sim[key] = float(sim[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(key, f"must be a number, got {sim[key]!r}") from exc
    config = SimConfig(phy=phy_params, **sim)
    if alpha is not None:
        config.K = round(float(alpha) * config.M * config.B)
    return config.validate()


def config_to_dict(config: SimConfig) -> dict[str, Any]:
    out = dataclasses.asdict(config)
    out["lam"] = config.arrival_rate if config.arrivals is None else None
    out["load"] = config.offered_load if config.arrivals is None else None
    out["warmup"] = config.warmup_packets
    if out["arrivals"] is not None:
        out["arrivals"] = [list(a) for a in out["arrivals"]]
    return out


@dataclass
class SweepSpec:
    base: dict[str, Any]
    axis: str
    values: list[Any]
    replications: int = 1
    series: list[dict[str, Any]] = field(default_factory=lambda: [{}])

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError("sweep.axis", f"must be one of {SWEEP_AXES}, got {self.axis!r}")
        if not self.values:
            raise ConfigError("sweep.values", "must not be empty")
        if self.replications < 1:
            raise ConfigError("sweep.replications", "must be >= 1")
        if not self.series:
            self.series = [{}]

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> "SweepSpec":
        data = copy.deepcopy(data)
        base = _flatten(data.get("base", {}))
        sweep = data.get("sweep")
        if sweep is None:
            raise ConfigError("sweep", "missing [sweep] table")
        if "axis" not in sweep:
            raise ConfigError("sweep.axis", "missing")
        values = sweep.get("values")
        if values is None:
            try:
                start, stop, step = sweep["start"], sweep["stop"], sweep["step"]
            except KeyError as exc:
                raise ConfigError(f"sweep.{exc.args[0]}", "give either values or start/stop/step") from exc
            values = [v.item() for v in np.arange(start, stop + step / 2, step)]
        series = [_flatten(s) for s in sweep.get("series", [{}])]
        return cls(base=base, axis=sweep["axis"], values=list(values),
                   replications=int(sweep.get("replications", 1)), series=series)

    def points(self) -> list[tuple[int, Any, int, dict[str, Any]]]:
        """``(series index, axis value, replication, resolved run mapping)`` in output order."""
        out = []
        for s_idx, overrides in enumerate(self.series):
            for value in self.values:
                for rep in range(self.replications):
                    values = {**self.base, **overrides}
                    for key in _SHADOWED_BY.get(self.axis, ()):
                        values.pop(key, None)
                    values[self.axis] = value
                    values["seed"] = int(values.get("seed", 1)) + rep
                    out.append((s_idx, value, rep, values))
        return out

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)
