"""Experiment configuration: dataclasses plus a strict JSON loader.

Unknown keys are rejected at every level so that typos never silently
fall back to defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ..channel import ChannelConfig
from ..errors import ConfigError
from ..ici import IciProfile, cfo_profile, none_profile, scalar_profile
from ..manifold import CgSettings
from ..mathcore import GmmParams
from ..precoding import PipelineSettings

__all__ = [
    "SWEEP_AXES",
    "METHODS",
    "IciSpec",
    "SweepSpec",
    "SweepPoint",
    "ExperimentConfig",
    "config_from_dict",
    "load_config",
    "config_to_dict",
]

SWEEP_AXES = ("snr", "n_t", "n_rf", "users", "ici_s", "distance")
# "no-ici-ideal" optimizes and evaluates without ICI (three-case studies)
METHODS = ("conventional", "reduced", "no-ici", "no-ici-ideal")
ICI_MODES = ("cfo", "scalar", "none")


@dataclass(frozen=True)
class IciSpec:
    mode: str = "scalar"
    value: float = 0.3  # S in scalar mode, epsilon in cfo mode

    def __post_init__(self):
        if self.mode not in ICI_MODES:
            raise ConfigError(f"ici.mode must be one of {ICI_MODES}, got {self.mode!r}")
        if not 0.0 <= self.value < 1.0:
            raise ConfigError("ici.value must lie in [0, 1)")

    def profile(self, K: int) -> IciProfile:
        if self.mode == "cfo":
            return cfo_profile(K, self.value)
        if self.mode == "scalar":
            return scalar_profile(K, self.value)
        return none_profile(K)


@dataclass(frozen=True)
class SweepSpec:
    axis: str = "snr"
    values: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)
    # other axes moved in lockstep with ``values``
    paired: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        if len(self.values) == 0:
            raise ConfigError("sweep.values must be non-empty")
        for name, vals in self.paired.items():
            if name not in SWEEP_AXES or name in ("snr", self.axis):
                raise ConfigError(f"cannot pair sweep axis {name!r} with {self.axis!r}")
            if len(vals) != len(self.values):
                raise ConfigError(f"paired axis {name!r} needs {len(self.values)} values")


@dataclass(frozen=True)
class SweepPoint:
    """One x-axis position of a sweep, fully resolved."""

    value: float
    channel: ChannelConfig
    num_rf_chains: int
    ici: IciSpec
    snr_db: tuple


@dataclass(frozen=True)
class ExperimentConfig:
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    num_rf_chains: int = 4
    snr_db: tuple = (20.0,)
    ici: IciSpec = field(default_factory=IciSpec)
    methods: tuple = ("conventional", "reduced")
    sweep: SweepSpec = field(default_factory=SweepSpec)
    realizations: int = 20
    seed: int = 1
    pipeline: PipelineSettings = field(default_factory=PipelineSettings)
    output: str | None = None
    name: str = ""
    description: str = ""

    def __post_init__(self):
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if len(self.snr_db) == 0:
            raise ConfigError("snr_db must be non-empty")
        if len(self.methods) == 0:
            raise ConfigError("methods must be non-empty")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {METHODS}")
        if self.sweep.axis == "ici_s" and self.ici.mode == "none":
            raise ConfigError("an ici_s sweep needs ici.mode 'scalar' or 'cfo'")
        for point in self.points():
            U = point.channel.num_users
            n_t = point.channel.tx_antennas
            if not U <= point.num_rf_chains <= n_t:
                raise ConfigError(
                    f"sweep value {point.value}: need U <= N_RF <= N_t, "
                    f"got U={U}, N_RF={point.num_rf_chains}, N_t={n_t}"
                )

    def _apply(self, axis: str, value, channel, n_rf, ici, snr):
        if axis == "snr":
            snr = (float(value),)
        elif axis == "n_t":
            channel = replace(channel, tx_antennas=int(value))
        elif axis == "n_rf":
            n_rf = int(value)
        elif axis == "users":
            channel = replace(channel, num_users=int(value))
        elif axis == "ici_s":
            ici = replace(ici, value=float(value))
        elif axis == "distance":
            channel = replace(channel, link_distance=float(value))
        return channel, n_rf, ici, snr

    def points(self) -> list[SweepPoint]:
        out = []
        for j, value in enumerate(self.sweep.values):
            state = (self.channel, self.num_rf_chains, self.ici, tuple(self.snr_db))
            try:
                state = self._apply(self.sweep.axis, value, *state)
                for name, vals in self.sweep.paired.items():
                    state = self._apply(name, vals[j], *state)
            except ValueError as exc:
                raise ConfigError(f"sweep value {value}: {exc}") from exc
            out.append(SweepPoint(float(value), *state))
        return out

    def pipeline_for(self, point: SweepPoint) -> PipelineSettings:
        return replace(self.pipeline, num_rf_chains=point.num_rf_chains)


def _take(data: dict, allowed, where: str) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    return dict(data)


def _names(cls) -> list[str]:
    return [f.name for f in fields(cls)]


def _channel(data: dict) -> ChannelConfig:
    d = _take(data, _names(ChannelConfig), "channel")
    try:
        if "gmm" in d:
            d["gmm"] = GmmParams(**_take(d["gmm"], _names(GmmParams), "channel.gmm"))
        return ChannelConfig(**d)
    except ValueError as exc:
        raise ConfigError(f"channel: {exc}") from exc


def _pipeline(data: dict) -> PipelineSettings:
    allowed = [n for n in _names(PipelineSettings) if n != "num_rf_chains"]
    d = _take(data, allowed, "pipeline")
    if "cg" in d:
        try:
            d["cg"] = CgSettings(**_take(d["cg"], _names(CgSettings), "pipeline.cg"))
        except ValueError as exc:
            raise ConfigError(f"pipeline.cg: {exc}") from exc
    return PipelineSettings(**d)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build and validate an :class:`ExperimentConfig` from parsed JSON."""
    d = _take(data, _names(ExperimentConfig), "config")
    if "channel" in d:
        d["channel"] = _channel(d["channel"])
    if "ici" in d:
        d["ici"] = IciSpec(**_take(d["ici"], _names(IciSpec), "ici"))
    if "sweep" in d:
        s = _take(d["sweep"], _names(SweepSpec), "sweep")
        if "values" in s:
            s["values"] = tuple(s["values"])
        if "paired" in s:
            s["paired"] = {k: tuple(v) for k, v in _take(s["paired"], SWEEP_AXES, "sweep.paired").items()}
        d["sweep"] = SweepSpec(**s)
    if "pipeline" in d:
        d["pipeline"] = _pipeline(d["pipeline"])
    for key in ("snr_db", "methods"):
        if key in d:
            d[key] = tuple(d[key])
    try:
        return ExperimentConfig(**d)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(data)


def _plain(obj):
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    return obj


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """JSON-ready dict that :func:`config_from_dict` accepts back."""
    d = _plain(cfg)
    d["pipeline"].pop("num_rf_chains", None)
    return d
