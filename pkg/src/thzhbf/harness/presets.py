"""Named experiment presets, one per reproduced study, at two scales.

``<study>-paper`` uses the published simulation tables (K = 64 subcarriers,
up to 256 antennas and 9 users). These runs are slow because the
conventional pipeline relies on finite-difference gradients.

``<study>-desk`` keeps the same study structure with K = 16, N_t <= 64,
U <= 4 and 20 realizations, so that it finishes in minutes.

Where the published tables disagree with themselves or with the model
constraints, the resolution is noted in the preset's ``description``.
"""

from __future__ import annotations

import copy

from ..errors import ConfigError
from .config import ExperimentConfig, config_from_dict

__all__ = ["PRESETS", "merge_dicts", "preset_names", "preset_dict", "load_preset"]

SNR_GRID = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0]
THREE_CASES = ["conventional", "no-ici", "no-ici-ideal"]


def _paper(**kw) -> dict:
    base = {
        "channel": {"num_subcarriers": 64, "num_users": 9, "tx_antennas": 64},
        "num_rf_chains": 10,
        "ici": {"mode": "scalar", "value": 0.3},
        "snr_db": SNR_GRID,
        "realizations": 10,
        "seed": 2024,
    }
    return merge_dicts(base, kw)


def _desk(**kw) -> dict:
    base = {
        "channel": {"num_subcarriers": 16, "num_users": 2, "tx_antennas": 64},
        "num_rf_chains": 4,
        "ici": {"mode": "scalar", "value": 0.3},
        "snr_db": SNR_GRID,
        "realizations": 20,
        "seed": 2024,
    }
    return merge_dicts(base, kw)


def merge_dicts(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = merge_dicts(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _snr_sweep(**kw) -> dict:
    kw.setdefault("sweep", {"axis": "snr", "values": SNR_GRID})
    return kw


PRESETS: dict[str, dict] = {
    # wall-clock of both pipelines on identical channels
    "timing-paper": _paper(
        description="Conventional vs reduced wall-clock; parameters of the performance study.",
        methods=["conventional", "reduced"],
        sweep={"axis": "snr", "values": [10.0]},
    ),
    "timing-desk": _desk(
        methods=["conventional", "reduced"],
        sweep={"axis": "snr", "values": [10.0]},
    ),
    "performance-paper": _paper(**_snr_sweep(methods=["conventional", "reduced"])),
    "performance-desk": _desk(**_snr_sweep(methods=["conventional", "reduced"])),
    # optimized and evaluated with ICI vs without ICI altogether
    "ici-effect-paper": _paper(**_snr_sweep(
        description="Table lists N_RF=8, which cannot serve U=9 users; the prose value 9 is used.",
        channel={"tx_antennas": 169}, num_rf_chains=9,
        methods=["reduced", "no-ici-ideal"],
    )),
    "ici-effect-desk": _desk(**_snr_sweep(
        channel={"tx_antennas": 36}, methods=["reduced", "no-ici-ideal"],
    )),
    "ici-vary-paper": _paper(
        description="Table lists N_RF=8, which cannot serve U=9 users; the prose value 9 is used.",
        channel={"tx_antennas": 169}, num_rf_chains=9, methods=["reduced"],
        sweep={"axis": "ici_s", "values": [0.1, 0.2, 0.3]},
    ),
    "ici-vary-desk": _desk(
        channel={"tx_antennas": 36}, methods=["reduced"],
        sweep={"axis": "ici_s", "values": [0.1, 0.2, 0.3]},
    ),
    "antennas-paper": _paper(
        description="Upper antenna count 255 is not a square array; 256 (16x16) is used.",
        num_rf_chains=9, methods=["conventional", "reduced"], snr_db=[20.0],
        sweep={"axis": "n_t", "values": [81, 121, 169, 225, 256]},
    ),
    "antennas-desk": _desk(
        methods=["conventional", "reduced"], snr_db=[20.0],
        sweep={"axis": "n_t", "values": [16, 36, 64]},
    ),
    "rf-chains-paper": _paper(
        channel={"tx_antennas": 81}, methods=["conventional", "reduced"], snr_db=[20.0],
        sweep={"axis": "n_rf", "values": [9, 11, 13, 15]},
    ),
    "rf-chains-desk": _desk(
        channel={"tx_antennas": 36}, methods=["conventional", "reduced"], snr_db=[20.0],
        sweep={"axis": "n_rf", "values": [2, 4, 6, 8]},
    ),
    "rf-antennas-paper": _paper(
        methods=["conventional", "reduced"], snr_db=[20.0],
        sweep={"axis": "n_t", "values": [81, 121, 169, 225],
               "paired": {"n_rf": [9, 11, 13, 15]}},
    ),
    "rf-antennas-desk": _desk(
        methods=["conventional", "reduced"], snr_db=[20.0],
        sweep={"axis": "n_t", "values": [16, 36, 64], "paired": {"n_rf": [2, 4, 6]}},
    ),
    "users-paper": _paper(
        description="Table allows up to 16 users with 9 RF chains; capped at U=9 so that U <= N_RF.",
        channel={"tx_antennas": 81}, num_rf_chains=9,
        methods=["conventional", "reduced"], snr_db=[20.0],
        sweep={"axis": "users", "values": [1, 3, 5, 7, 9]},
    ),
    "users-desk": _desk(
        methods=["conventional", "reduced"], snr_db=[20.0],
        sweep={"axis": "users", "values": [1, 2, 4]},
    ),
    "three-case-ici-paper": _paper(
        num_rf_chains=15, methods=THREE_CASES, snr_db=[20.0],
        sweep={"axis": "ici_s", "values": [0.0, 0.1, 0.2, 0.3]},
    ),
    "three-case-ici-desk": _desk(
        channel={"tx_antennas": 36}, methods=THREE_CASES, snr_db=[20.0],
        sweep={"axis": "ici_s", "values": [0.0, 0.1, 0.2, 0.3]},
    ),
    "three-case-antennas-paper": _paper(
        methods=THREE_CASES, snr_db=[20.0],
        sweep={"axis": "n_t", "values": [25, 49, 81, 121, 169]},
    ),
    "three-case-antennas-desk": _desk(
        methods=THREE_CASES, snr_db=[20.0],
        sweep={"axis": "n_t", "values": [16, 36, 64]},
    ),
    "three-case-rf-paper": _paper(
        methods=THREE_CASES, snr_db=[20.0],
        sweep={"axis": "n_rf", "values": [10, 11, 12, 13, 14, 15]},
    ),
    "three-case-rf-desk": _desk(
        channel={"tx_antennas": 36}, methods=THREE_CASES, snr_db=[20.0],
        sweep={"axis": "n_rf", "values": [2, 4, 6, 8]},
    ),
    "three-case-users-paper": _paper(
        methods=THREE_CASES, snr_db=[20.0],
        sweep={"axis": "users", "values": [1, 3, 5, 7, 9]},
    ),
    "three-case-users-desk": _desk(
        methods=THREE_CASES, snr_db=[20.0],
        sweep={"axis": "users", "values": [1, 2, 4]},
    ),
    "distance-paper": _paper(
        methods=["conventional", "reduced"], snr_db=[15.0],
        sweep={"axis": "distance", "values": [1.0, 2.0, 4.0, 6.0, 8.0, 10.0]},
    ),
    "distance-desk": _desk(
        methods=["conventional", "reduced"], snr_db=[15.0],
        sweep={"axis": "distance", "values": [1.0, 3.0, 5.0, 10.0]},
    ),
}
for _name, _data in PRESETS.items():
    _data["name"] = _name


def preset_names() -> list[str]:
    return sorted(PRESETS)


def preset_dict(name: str) -> dict:
    """A deep copy of the preset's JSON-style description."""
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}") from None


def load_preset(name: str, **overrides) -> ExperimentConfig:
    """Build the named preset, optionally merging JSON-style overrides."""
    return config_from_dict(merge_dicts(preset_dict(name), overrides))
