"""Model configurations and the nine named presets.

A model configuration fixes six assumption axes: how arrivals are generated
(replayed identically or redrawn as an inhomogeneous Poisson process with
piecewise-constant rates), the handling-time distribution (empirical or
exponential), the AHT horizon (per day, per year, or the fitted daily
value), whether wrap-up time is added to handling times, the patience
distribution (empirical or exponential), and whether break shrinkage is
reflected in the staffing levels.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ccsim.errors import ConfigError

ARRIVAL_VALUES = ("identical", "ipp")
HT_VALUES = ("empirical", "exp")
AHT_PER_DAY_VALUES = ("yes", "no", "fit")
YES_NO = ("yes", "no")


@dataclass(frozen=True)
class ModelConfig:
    arrival: str
    ht: str
    aht_per_day: str
    wrapup: str
    patience: str
    breaks: str

    def __post_init__(self):
        checks = (
            ("arrival", ARRIVAL_VALUES), ("ht", HT_VALUES),
            ("aht_per_day", AHT_PER_DAY_VALUES), ("wrapup", YES_NO),
            ("patience", ("empirical", "exp")), ("breaks", YES_NO),
        )
        for name, allowed in checks:
            value = getattr(self, name)
            if value not in allowed:
                raise ConfigError(f"{name}={value!r} not in {allowed}")
        if self.aht_per_day == "fit" and self.ht != "exp":
            raise ConfigError("aht_per_day='fit' requires ht='exp'")

    def to_dict(self) -> dict:
        return {
            "arrival": self.arrival, "ht": self.ht, "aht_per_day": self.aht_per_day,
            "wrapup": self.wrapup, "patience": self.patience, "breaks": self.breaks,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        unknown = set(d) - {"arrival", "ht", "aht_per_day", "wrapup", "patience", "breaks"}
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        try:
            return cls(**{k: str(v).strip().casefold() for k, v in d.items()})
        except TypeError as exc:
            raise ConfigError(f"incomplete model config: {exc}") from exc


@dataclass(frozen=True)
class ModelPreset:
    name: str
    config: ModelConfig


_PRESET_ROWS = (
    ("Empirical Model", ("identical", "empirical", "yes", "yes", "empirical", "yes")),
    ("Arrival Model", ("ipp", "empirical", "yes", "yes", "empirical", "yes")),
    ("Daily HT Model", ("ipp", "exp", "yes", "yes", "empirical", "yes")),
    ("Fitted HT Model", ("ipp", "exp", "fit", "yes", "empirical", "yes")),
    ("Yearly HT Model", ("ipp", "empirical", "no", "yes", "empirical", "yes")),
    ("Patience Model", ("ipp", "empirical", "yes", "yes", "exp", "yes")),
    ("HT & Patience Model", ("ipp", "exp", "yes", "yes", "exp", "yes")),
    ("Breaks Model", ("ipp", "empirical", "yes", "yes", "empirical", "no")),
    ("Wrap-up Model", ("ipp", "empirical", "yes", "no", "empirical", "yes")),
)

_PRESETS = tuple(
    ModelPreset(name, ModelConfig(*row)) for name, row in _PRESET_ROWS
)


def _norm(name: str) -> str:
    text = name.strip().casefold()
    text = re.sub(r"\bmodel\b", "", text)
    return re.sub(r"[\s\-_]+", "", text)


_BY_KEY = {_norm(p.name): p for p in _PRESETS}
_BY_KEY["wrapup"] = _BY_KEY[_norm("Wrap-up Model")]
_BY_KEY["ht&patience"] = _BY_KEY[_norm("HT & Patience Model")]
_BY_KEY["htandpatience"] = _BY_KEY[_norm("HT & Patience Model")]


def all_presets() -> list[ModelPreset]:
    """The nine presets in table order."""
    return list(_PRESETS)


def preset_names() -> list[str]:
    return [p.name for p in _PRESETS]


def preset(name: str) -> ModelConfig:
    """Look up a preset by name (case-insensitive, 'Model' suffix optional)."""
    p = _BY_KEY.get(_norm(name))
    if p is None:
        raise ConfigError(
            f"unknown model preset {name!r}; valid names: {', '.join(preset_names())}"
        )
    return p.config


def load_model(name_or_path: str) -> tuple[str, ModelConfig]:
    """Resolve a preset name or a JSON config file into (label, config)."""
    if _norm(name_or_path) in _BY_KEY:
        p = _BY_KEY[_norm(name_or_path)]
        return p.name, p.config
    try:
        with open(name_or_path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ConfigError(
            f"{name_or_path!r} is neither a preset name nor a config file; "
            f"valid presets: {', '.join(preset_names())}"
        )
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad model config file {name_or_path}: {exc}") from exc
    return name_or_path, ModelConfig.from_dict(raw)
