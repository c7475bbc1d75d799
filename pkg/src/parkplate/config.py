"""Configuration sections and the INI loader.

Every tunable threshold lives in one of the frozen dataclasses below. The INI
file has one ``[section]`` per dataclass; unknown sections or keys are errors.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any

from .errors import ConfigError

DEFAULT_ALPHABET = "0123456789ABCDEFHJKLMNPRTUVWXY"


@dataclass(frozen=True)
class LocalizationConfig:
    blue_h_min: float = 0.55
    blue_h_max: float = 0.70
    blue_s_min: float = 0.40
    blue_v_min: float = 0.30
    strip_ratio_min: float = 1.5
    strip_ratio_max: float = 8.0
    min_area: int = 80
    plate_width_factor: float = 9.0
    min_jumps: int = 12
    aspect_min: float = 3.5
    aspect_max: float = 6.0


@dataclass(frozen=True)
class SegmentationConfig:
    min_char_area_frac: float = 0.01
    min_char_height_frac: float = 0.40
    max_chars: int = 8
    clear_border: bool = True


@dataclass(frozen=True)
class FeatureConfig:
    normalize: str = "off"  # off | per-glyph


@dataclass(frozen=True)
class ClassifierConfig:
    k: int = 1
    alphabet: str = DEFAULT_ALPHABET


HueBand = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class PlateTypeConfig:
    """Color votes. Defaults are the "literal" preset: hue bands taken verbatim, not remapped."""

    preset: str = "literal"
    red_h: HueBand = ((0.80, 0.94),)
    red_s_min: float = 0.45
    red_v_min: float = 0.50
    yellow_h: HueBand = ((0.58, 0.74),)
    yellow_s_min: float = 0.45
    yellow_v_min: float = 0.50
    white_s_max: float = 0.15
    white_v_min: float = 0.80


PRESETS: dict[str, PlateTypeConfig] = {
    "literal": PlateTypeConfig(),
    "standard-hue": PlateTypeConfig(
        preset="standard-hue",
        red_h=((0.0, 0.05), (0.95, 1.0)),
        yellow_h=((0.12, 0.20),),
    ),
}


@dataclass(frozen=True)
class TariffConfig:
    """Entrance fee per plate type, in currency units with two decimals."""

    white: Decimal = Decimal("1.00")   # private
    yellow: Decimal = Decimal("2.00")  # public
    red: Decimal = Decimal("0.00")     # government


@dataclass(frozen=True)
class GateConfig:
    open_ms: int = 5000
    reject_cooldown_ms: int = 2000
    seg7_mode: str = "cost"  # cost | count


@dataclass(frozen=True)
class Config:
    localization: LocalizationConfig = field(default_factory=LocalizationConfig)
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    plate_type: PlateTypeConfig = field(default_factory=PlateTypeConfig)
    tariff: TariffConfig = field(default_factory=TariffConfig)
    gate: GateConfig = field(default_factory=GateConfig)


_RANGES: dict[tuple[str, str], tuple[float, float]] = {
    ("localization", "blue_h_min"): (0.0, 1.0),
    ("localization", "blue_h_max"): (0.0, 1.0),
    ("localization", "blue_s_min"): (0.0, 1.0),
    ("localization", "blue_v_min"): (0.0, 1.0),
    ("localization", "strip_ratio_min"): (0.1, 100.0),
    ("localization", "strip_ratio_max"): (0.1, 100.0),
    ("localization", "min_area"): (1, 1e9),
    ("localization", "plate_width_factor"): (1.0, 50.0),
    ("localization", "min_jumps"): (0, 1e6),
    ("localization", "aspect_min"): (0.1, 100.0),
    ("localization", "aspect_max"): (0.1, 100.0),
    ("segmentation", "min_char_area_frac"): (0.0, 1.0),
    ("segmentation", "min_char_height_frac"): (0.0, 1.0),
    ("segmentation", "max_chars"): (1, 64),
    ("classifier", "k"): (1, 1000),
    ("plate_type", "red_s_min"): (0.0, 1.0),
    ("plate_type", "red_v_min"): (0.0, 1.0),
    ("plate_type", "yellow_s_min"): (0.0, 1.0),
    ("plate_type", "yellow_v_min"): (0.0, 1.0),
    ("plate_type", "white_s_max"): (0.0, 1.0),
    ("plate_type", "white_v_min"): (0.0, 1.0),
    ("tariff", "white"): (0, 1e9),
    ("tariff", "yellow"): (0, 1e9),
    ("tariff", "red"): (0, 1e9),
    ("gate", "open_ms"): (0, 86_400_000),
    ("gate", "reject_cooldown_ms"): (0, 86_400_000),
}
_CHOICES = {
    ("features", "normalize"): ("off", "per-glyph"),
    ("plate_type", "preset"): tuple(PRESETS),
    ("gate", "seg7_mode"): ("cost", "count"),
}


def _parse_band(text: str) -> HueBand:
    bands = []
    for part in text.split(","):
        lo, sep, hi = part.strip().partition("-")
        if not sep:
            raise ValueError(f"hue band {part!r} must look like lo-hi")
        lo_f, hi_f = float(lo), float(hi)
        if not (0.0 <= lo_f <= hi_f <= 1.0):
            raise ValueError(f"hue band {part!r} out of [0, 1]")
        bands.append((lo_f, hi_f))
    return tuple(bands)


def _convert(section: str, key: str, raw: str, default: Any) -> Any:
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, Decimal):
        try:
            value = Decimal(raw.strip())
        except InvalidOperation:
            raise ValueError(f"expected a decimal amount, got {raw!r}") from None
        if value != value.quantize(Decimal("0.01")):
            raise ValueError(f"amount {raw!r} has more than two decimals")
        return value.quantize(Decimal("0.01"))
    if isinstance(default, tuple):
        return _parse_band(raw)
    return raw.strip()


def _check(section: str, key: str, value: Any) -> None:
    rng = _RANGES.get((section, key))
    if rng is not None and not (rng[0] <= value <= rng[1]):
        raise ConfigError(f"[{section}] {key}={value} outside [{rng[0]}, {rng[1]}]")
    choices = _CHOICES.get((section, key))
    if choices is not None and value not in choices:
        raise ConfigError(f"[{section}] {key}={value!r} not one of {', '.join(choices)}")


def parse_config(text: str) -> Config:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keys are case sensitive
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    base = Config()
    sections: dict[str, Any] = {}
    for name in parser.sections():
        if name not in {f.name for f in dataclasses.fields(Config)}:
            raise ConfigError(f"unknown section [{name}]")
        current = getattr(base, name)
        items = dict(parser.items(name))
        if name == "plate_type" and "preset" in items:
            preset = items["preset"].strip()
            _check(name, "preset", preset)
            current = PRESETS[preset]
        known = {f.name: getattr(current, f.name) for f in dataclasses.fields(current)}
        updates = {}
        for key, raw in items.items():
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
            try:
                value = _convert(name, key, raw, known[key])
            except ValueError as exc:
                raise ConfigError(f"[{name}] {key}: {exc}") from None
            _check(name, key, value)
            updates[key] = value
        sections[name] = dataclasses.replace(current, **updates)
    cfg = dataclasses.replace(base, **sections)
    loc = cfg.localization
    if loc.blue_h_min > loc.blue_h_max or loc.strip_ratio_min > loc.strip_ratio_max \
            or loc.aspect_min > loc.aspect_max:
        raise ConfigError("[localization] a min bound exceeds its max bound")
    if len(set(cfg.classifier.alphabet)) != len(cfg.classifier.alphabet):
        raise ConfigError("[classifier] alphabet has repeated symbols")
    return cfg


def load_config(path: str | Path | None) -> Config:
    if path is None:
        return Config()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
