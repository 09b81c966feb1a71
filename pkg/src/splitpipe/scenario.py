"""Problem instances: device, channel and model profiles.

A scenario bundles everything needed to evaluate one training round: the UE
fleet, the base station, the shared TDMA channel, the per-layer model cost
profile and the global batch size.  All types are immutable after
construction and safe to share across workers.

Scenario files are YAML documents with sections ``channel``, ``bs``, ``ues``
(list), ``model`` and ``batch``; see the README for the field/unit table.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import ScenarioFormatError, ScenarioValidationError
from .units import parse_quantity

PATHLOSS_MODES = ("factor", "attenuation")


@dataclass(frozen=True, slots=True)
class UEProfile:
    """One user equipment: compute capability, radio and storage budget."""

    id: int
    clock_freq: float          # cycles/s
    flops_per_cycle: float
    tx_power: float            # W
    distance: float            # m, to the base station
    storage_budget: float      # FLOPs of UE-side work it can hold per round

    def flops_per_second(self) -> float:
        return self.clock_freq * self.flops_per_cycle


@dataclass(frozen=True, slots=True)
class BSProfile:
    """Base-station compute capability and downlink transmit power."""

    clock_freq: float          # cycles/s
    flops_per_cycle: float
    tx_power: float            # W

    def flops_per_second(self) -> float:
        return self.clock_freq * self.flops_per_cycle


@dataclass(frozen=True, slots=True)
class ChannelParams:
    """Shared TDMA channel parameters.

    ``pathloss_mode`` selects how the scalar path-loss figure enters the
    SNR: ``"factor"`` uses the plain number as a dimensionless channel
    factor (the rate model the bundled reference parameters are calibrated
    against), ``"attenuation"`` converts the dB figure into a linear power
    attenuation ``10**(-PL/10)``.
    """

    bandwidth: float           # Hz
    carrier_freq: float        # GHz (the path-loss formula takes GHz)
    antenna_gain: float        # linear
    noise_psd: float           # W/Hz
    frame_length: float        # s
    pathloss_mode: str = "factor"


@dataclass(frozen=True, slots=True)
class LayerProfile:
    """Per-sample cost of one cut unit of the model."""

    name: str
    fwd_flops: float           # FLOPs per sample
    bwd_flops: float           # FLOPs per sample
    activation_bits: float     # bits per sample when the model is cut after this layer


@dataclass(frozen=True, slots=True)
class ModelProfile:
    layers: tuple[LayerProfile, ...]
    label_bits: float = 32.0   # bits per sample

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def prefix_fwd(self, cut: int) -> float:
        return sum(layer.fwd_flops for layer in self.layers[:cut])

    def prefix_bwd(self, cut: int) -> float:
        return sum(layer.bwd_flops for layer in self.layers[:cut])

    def suffix_fwd(self, cut: int) -> float:
        return sum(layer.fwd_flops for layer in self.layers[cut:])

    def suffix_bwd(self, cut: int) -> float:
        return sum(layer.bwd_flops for layer in self.layers[cut:])

    def cut_activation_bits(self, cut: int) -> float:
        return self.layers[cut - 1].activation_bits


@dataclass(frozen=True, slots=True)
class Scenario:
    ues: tuple[UEProfile, ...]
    bs: BSProfile
    channel: ChannelParams
    model: ModelProfile
    total_batch: int

    @property
    def num_ues(self) -> int:
        return len(self.ues)


def _positive(value: float, field_name: str) -> None:
    if not (value > 0.0):
        raise ScenarioValidationError(field_name, f"must be strictly positive, got {value}")


def _non_negative(value: float, field_name: str) -> None:
    if not (value >= 0.0):
        raise ScenarioValidationError(field_name, f"must be non-negative, got {value}")


def validate_scenario(scenario: Scenario) -> None:
    """Check every invariant; raise ScenarioValidationError naming the field."""
    if len(scenario.ues) < 1:
        raise ScenarioValidationError("ues", "at least one UE is required")
    seen_ids: set[int] = set()
    for idx, ue in enumerate(scenario.ues):
        prefix = f"ues[{idx}]"
        if ue.id in seen_ids:
            raise ScenarioValidationError(f"{prefix}.id", f"duplicate id {ue.id}")
        seen_ids.add(ue.id)
        _positive(ue.clock_freq, f"{prefix}.clock_freq")
        _positive(ue.flops_per_cycle, f"{prefix}.flops_per_cycle")
        _positive(ue.tx_power, f"{prefix}.tx_power")
        _positive(ue.distance, f"{prefix}.distance")
        _positive(ue.storage_budget, f"{prefix}.storage_budget")
    _positive(scenario.bs.clock_freq, "bs.clock_freq")
    _positive(scenario.bs.flops_per_cycle, "bs.flops_per_cycle")
    _positive(scenario.bs.tx_power, "bs.tx_power")
    ch = scenario.channel
    _positive(ch.bandwidth, "channel.bandwidth")
    _positive(ch.carrier_freq, "channel.carrier_freq")
    _positive(ch.antenna_gain, "channel.antenna_gain")
    _positive(ch.noise_psd, "channel.noise_psd")
    _positive(ch.frame_length, "channel.frame_length")
    if ch.pathloss_mode not in PATHLOSS_MODES:
        raise ScenarioValidationError(
            "channel.pathloss_mode", f"must be one of {PATHLOSS_MODES}, got {ch.pathloss_mode!r}")
    model = scenario.model
    if len(model.layers) < 2:
        raise ScenarioValidationError("model.layers", "at least two layers are required")
    _non_negative(model.label_bits, "model.label_bits")
    for idx, layer in enumerate(model.layers):
        prefix = f"model.layers[{idx}]"
        _positive(layer.fwd_flops, f"{prefix}.fwd_flops")
        _non_negative(layer.bwd_flops, f"{prefix}.bwd_flops")
        _non_negative(layer.activation_bits, f"{prefix}.activation_bits")
    if scenario.total_batch < scenario.num_ues:
        raise ScenarioValidationError(
            "batch", f"total batch {scenario.total_batch} must be >= number of UEs {scenario.num_ues}")


# --------------------------------------------------------------------------
# Built-in model profile

# (name, fwd MFLOP per sample, activation MB per sample)
_RESNET18_UNITS = (
    ("conv1", 3.802, 0.250),
    ("block1", 303.0, 0.250),
    ("block2", 269.1, 0.125),
    ("block3", 268.8, 0.063),
    ("block4", 268.6, 0.031),
    ("avgpool_fc", 0.026, 3.81e-5),
)

_MB_BITS = 1024.0 * 1024.0 * 8.0


def builtin_resnet18() -> ModelProfile:
    """Cost profile of a CIFAR-sized ResNet-18 in six cut units.

    Backward cost uses the standard 2x-forward estimate; scenario files can
    override it per layer.  Labels are one 4-byte class index per sample.
    """
    layers = tuple(
        LayerProfile(
            name=name,
            fwd_flops=mflop * 1e6,
            bwd_flops=2.0 * mflop * 1e6,
            activation_bits=traffic_mb * _MB_BITS,
        )
        for name, mflop, traffic_mb in _RESNET18_UNITS
    )
    return ModelProfile(layers=layers, label_bits=32.0)


# --------------------------------------------------------------------------
# Random generator (reference cell defaults)

def random_scenario(n_ues: int, seed: int) -> Scenario:
    """Deterministic random instance on the reference cell parameters.

    Per-UE draws (uniform): clock 1..2 Gcycle/s, transmit power 13..23 dBm,
    distance 100..500 m, storage budget 1..2 GFLOPs.  Fixed: 100 MHz
    bandwidth, 3.5 GHz carrier, gain 10, noise -174 dBm/Hz, 10 ms frame,
    BS 80 Gcycle/s x 32 FLOP/cycle at 46 dBm, 16 FLOP/cycle UEs, batch 512.
    """
    if n_ues < 1:
        raise ScenarioValidationError("n_ues", f"must be >= 1, got {n_ues}")
    rng = random.Random(seed)
    ues = []
    for i in range(n_ues):
        clock = rng.uniform(1.0, 2.0) * 1e9
        power_dbm = rng.uniform(13.0, 23.0)
        distance = rng.uniform(100.0, 500.0)
        storage = rng.uniform(1.0, 2.0) * 1e9
        ues.append(UEProfile(
            id=i + 1,
            clock_freq=clock,
            flops_per_cycle=16.0,
            tx_power=10.0 ** ((power_dbm - 30.0) / 10.0),
            distance=distance,
            storage_budget=storage,
        ))
    scenario = Scenario(
        ues=tuple(ues),
        bs=BSProfile(clock_freq=80e9, flops_per_cycle=32.0,
                     tx_power=10.0 ** ((46.0 - 30.0) / 10.0)),
        channel=ChannelParams(
            bandwidth=100e6,
            carrier_freq=3.5,
            antenna_gain=10.0,
            noise_psd=10.0 ** ((-174.0 - 30.0) / 10.0),
            frame_length=10e-3,
            pathloss_mode="factor",
        ),
        model=builtin_resnet18(),
        total_batch=512,
    )
    validate_scenario(scenario)
    return scenario


# --------------------------------------------------------------------------
# File loading / serialization

def _require(section: dict, key: str, path: str):
    if key not in section or section[key] is None:
        raise ScenarioValidationError(f"{path}.{key}" if path else key, "missing required field")
    return section[key]


def _section(doc: dict, key: str) -> dict:
    value = _require(doc, key, "")
    if not isinstance(value, dict):
        raise ScenarioFormatError(f"section must be a mapping, got {type(value).__name__}", key)
    return value


def _qty(section: dict, key: str, path: str, kind: str, default_unit: str):
    raw = _require(section, key, path)
    return parse_quantity(raw, kind, f"{path}.{key}", default_unit)


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioFormatError("scenario document must be a mapping")

    ch = _section(doc, "channel")
    carrier_hz = _qty(ch, "carrier_freq", "channel", "frequency", "ghz")
    channel = ChannelParams(
        bandwidth=_qty(ch, "bandwidth", "channel", "frequency", "mhz"),
        carrier_freq=carrier_hz / 1e9,
        antenna_gain=_qty(ch, "antenna_gain", "channel", "gain", "linear"),
        noise_psd=_qty(ch, "noise_psd", "channel", "psd", "dbm/hz"),
        frame_length=_qty(ch, "frame_length", "channel", "time", "ms"),
        pathloss_mode=ch.get("pathloss_mode", "factor"),
    )

    bs_sec = _section(doc, "bs")
    bs = BSProfile(
        clock_freq=_qty(bs_sec, "clock_freq", "bs", "clock", "gcycle/s"),
        flops_per_cycle=_qty(bs_sec, "flops_per_cycle", "bs", "count", ""),
        tx_power=_qty(bs_sec, "tx_power", "bs", "power", "dbm"),
    )

    ues_raw = _require(doc, "ues", "")
    if not isinstance(ues_raw, list) or not ues_raw:
        raise ScenarioValidationError("ues", "must be a non-empty list")
    ues = []
    for idx, entry in enumerate(ues_raw):
        path = f"ues[{idx}]"
        if not isinstance(entry, dict):
            raise ScenarioFormatError("UE entry must be a mapping", path)
        ues.append(UEProfile(
            id=int(entry.get("id", idx + 1)),
            clock_freq=_qty(entry, "clock_freq", path, "clock", "gcycle/s"),
            flops_per_cycle=_qty(entry, "flops_per_cycle", path, "count", ""),
            tx_power=_qty(entry, "tx_power", path, "power", "dbm"),
            distance=_qty(entry, "distance", path, "distance", "m"),
            storage_budget=_qty(entry, "storage_budget", path, "flops", "gflop"),
        ))

    model_sec = _section(doc, "model")
    layers_raw = _require(model_sec, "layers", "model")
    if not isinstance(layers_raw, list):
        raise ScenarioFormatError("model.layers must be a list", "model.layers")
    layers = []
    for idx, entry in enumerate(layers_raw):
        path = f"model.layers[{idx}]"
        if not isinstance(entry, dict):
            raise ScenarioFormatError("layer entry must be a mapping", path)
        fwd = _qty(entry, "fwd_flops", path, "flops", "mflop")
        if "bwd_flops" in entry and entry["bwd_flops"] is not None:
            bwd = parse_quantity(entry["bwd_flops"], "flops", f"{path}.bwd_flops", "mflop")
        else:
            bwd = 2.0 * fwd
        act_raw = entry.get("activation_bits", entry.get("activation"))
        if act_raw is None:
            raise ScenarioValidationError(f"{path}.activation_bits", "missing required field")
        layers.append(LayerProfile(
            name=str(entry.get("name", f"layer{idx + 1}")),
            fwd_flops=fwd,
            bwd_flops=bwd,
            activation_bits=parse_quantity(act_raw, "data", f"{path}.activation_bits", "MB"),
        ))
    label_raw = model_sec.get("label_bits", 32.0)
    model = ModelProfile(
        layers=tuple(layers),
        label_bits=parse_quantity(label_raw, "data", "model.label_bits", "bit"),
    )

    batch_raw = _require(doc, "batch", "")
    try:
        total_batch = int(batch_raw)
    except (TypeError, ValueError):
        raise ScenarioFormatError(f"batch must be an integer, got {batch_raw!r}", "batch") from None

    scenario = Scenario(ues=tuple(ues), bs=bs, channel=channel, model=model,
                        total_batch=total_batch)
    validate_scenario(scenario)
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario file (YAML)."""
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioFormatError(f"not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioFormatError("scenario document must be a mapping")
    return scenario_from_dict(doc)


def scenario_to_dict(scenario: Scenario) -> dict:
    """Canonical dict form; round-trips exactly through scenario_from_dict.

    Dimensioned values are written as "<repr> <unit>" strings in internal
    units so no precision is lost.
    """
    ch = scenario.channel
    return {
        "channel": {
            "bandwidth": f"{ch.bandwidth!r} Hz",
            "carrier_freq": f"{ch.carrier_freq * 1e9!r} Hz",
            "antenna_gain": ch.antenna_gain,
            "noise_psd": f"{ch.noise_psd!r} W/Hz",
            "frame_length": f"{ch.frame_length!r} s",
            "pathloss_mode": ch.pathloss_mode,
        },
        "bs": {
            "clock_freq": f"{scenario.bs.clock_freq!r} cycle/s",
            "flops_per_cycle": scenario.bs.flops_per_cycle,
            "tx_power": f"{scenario.bs.tx_power!r} W",
        },
        "ues": [
            {
                "id": ue.id,
                "clock_freq": f"{ue.clock_freq!r} cycle/s",
                "flops_per_cycle": ue.flops_per_cycle,
                "tx_power": f"{ue.tx_power!r} W",
                "distance": f"{ue.distance!r} m",
                "storage_budget": f"{ue.storage_budget!r} FLOP",
            }
            for ue in scenario.ues
        ],
        "model": {
            "label_bits": f"{scenario.model.label_bits!r} bit",
            "layers": [
                {
                    "name": layer.name,
                    "fwd_flops": f"{layer.fwd_flops!r} FLOP",
                    "bwd_flops": f"{layer.bwd_flops!r} FLOP",
                    "activation_bits": f"{layer.activation_bits!r} bit",
                }
                for layer in scenario.model.layers
            ],
        },
        "batch": scenario.total_batch,
    }


def dumps_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(scenario), sort_keys=True)


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps_scenario(scenario))
