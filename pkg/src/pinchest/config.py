"""Experiment configuration: defaults, file parsing, and overrides.

Config files are either flat ``key=value`` text (one pair per line, ``#``
comments) or a JSON object with the same keys. Unknown keys are rejected
rather than ignored so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields

from .errors import ConfigError
from .waveguide import SPEED_OF_LIGHT

DEFAULT_BETA_GRID = (0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99, 0.999)
DEFAULT_SNR_GRID = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)

# accepted spellings for config keys whose natural symbol differs
KEY_ALIASES = {
    "N": "n_pas",
    "epsilon": "attenuation",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs for the bundled sweeps; defaults give the indoor mmWave setup."""

    n_pas: int = 16
    carrier_freq_hz: float = 60e9
    attenuation: float = 0.1  # nepers/m
    gamma: float = 0.5  # uplink bidirectional split
    eta: float = 0.9  # downlink feed coupling efficiency
    beta: float = 0.9  # pass-through knob for the parallel coupling
    effective_index: float = 1.4
    pa_spacing_m: float = 0.5
    first_pa_distance_m: float = 0.5
    region_x_m: float = 10.0
    region_y_m: float = 6.0
    height_m: float = 3.0
    scatterer_count: int = 4
    scatterer_gain_var: float = 1.0
    los_block_prob: float = 0.0
    snr_db_grid: tuple[float, ...] = DEFAULT_SNR_GRID
    beta_grid: tuple[float, ...] = DEFAULT_BETA_GRID
    beta_sweep_snr_db: float = 20.0
    trials: int = 1000
    seed: int = 1234
    ue_power: float = 1.0
    total_power: float = 1.0
    group_size: int = 0  # 0 selects n_pas // 2
    workers: int = 1
    rel_cutoff: float = 0.0
    protocols: tuple[str, ...] = ()  # empty selects every series of an experiment

    def __post_init__(self):
        object.__setattr__(self, "snr_db_grid", tuple(float(x) for x in self.snr_db_grid))
        object.__setattr__(self, "beta_grid", tuple(float(x) for x in self.beta_grid))
        object.__setattr__(self, "protocols", tuple(str(p) for p in self.protocols))
        if self.n_pas < 1:
            raise ConfigError("n_pas must be at least 1")
        if self.carrier_freq_hz <= 0:
            raise ConfigError("carrier frequency must be positive")
        if self.attenuation < 0:
            raise ConfigError("attenuation must be nonnegative")
        if not 0 <= self.gamma <= 1:
            raise ConfigError("gamma must lie in [0, 1]")
        if not 0 < self.eta < 1:
            raise ConfigError("eta must lie in (0, 1)")
        if not 0 <= self.beta < 1:
            raise ConfigError("beta must lie in [0, 1)")
        if not all(0 <= b < 1 for b in self.beta_grid):
            raise ConfigError("beta grid values must lie in [0, 1)")
        if not self.snr_db_grid or not self.beta_grid:
            raise ConfigError("sweep grids must be nonempty")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.ue_power <= 0 or self.total_power <= 0:
            raise ConfigError("pilot powers must be positive")
        if self.group_size and not 1 <= self.group_size <= self.n_pas:
            raise ConfigError("group_size must lie in 1..n_pas (or 0 for n_pas // 2)")
        if self.scatterer_count < 0:
            raise ConfigError("scatterer_count must be nonnegative")
        if not 0 <= self.los_block_prob < 1:
            raise ConfigError("los_block_prob must lie in [0, 1)")
        if self.rel_cutoff < 0:
            raise ConfigError("rel_cutoff must be nonnegative")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    @property
    def downlink_group_size(self) -> int:
        return self.group_size if self.group_size else max(1, self.n_pas // 2)


def _parse_scalar(text: str, kind):
    try:
        return kind(text)
    except ValueError as err:
        raise ConfigError(f"cannot parse {text!r} as {kind.__name__}") from err


def _parse_float_tuple(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    return tuple(_parse_scalar(p, float) for p in parts)


def _parse_str_tuple(text) -> tuple[str, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(str(x) for x in text)
    return tuple(p.strip() for p in str(text).split(",") if p.strip())


_PARSERS = {
    "n_pas": lambda v: _parse_scalar(v, int),
    "carrier_freq_hz": lambda v: _parse_scalar(v, float),
    "attenuation": lambda v: _parse_scalar(v, float),
    "gamma": lambda v: _parse_scalar(v, float),
    "eta": lambda v: _parse_scalar(v, float),
    "beta": lambda v: _parse_scalar(v, float),
    "effective_index": lambda v: _parse_scalar(v, float),
    "pa_spacing_m": lambda v: _parse_scalar(v, float),
    "first_pa_distance_m": lambda v: _parse_scalar(v, float),
    "region_x_m": lambda v: _parse_scalar(v, float),
    "region_y_m": lambda v: _parse_scalar(v, float),
    "height_m": lambda v: _parse_scalar(v, float),
    "scatterer_count": lambda v: _parse_scalar(v, int),
    "scatterer_gain_var": lambda v: _parse_scalar(v, float),
    "los_block_prob": lambda v: _parse_scalar(v, float),
    "snr_db_grid": _parse_float_tuple,
    "beta_grid": _parse_float_tuple,
    "beta_sweep_snr_db": lambda v: _parse_scalar(v, float),
    "trials": lambda v: _parse_scalar(v, int),
    "seed": lambda v: _parse_scalar(v, int),
    "ue_power": lambda v: _parse_scalar(v, float),
    "total_power": lambda v: _parse_scalar(v, float),
    "group_size": lambda v: _parse_scalar(v, int),
    "workers": lambda v: _parse_scalar(v, int),
    "rel_cutoff": lambda v: _parse_scalar(v, float),
    "protocols": _parse_str_tuple,
}

_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}
assert set(_PARSERS) == _FIELD_NAMES


def _canonical_key(key: str, where: str) -> str:
    key = KEY_ALIASES.get(key, key)
    if key not in _FIELD_NAMES:
        raise ConfigError(f"{where}: unknown key {key!r}")
    return key


def parse_config_text(text: str) -> dict:
    """Flat key=value lines; returns parsed values keyed by canonical name."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = _canonical_key(key.strip(), f"line {lineno}")
        try:
            values[key] = _PARSERS[key](val.strip())
        except ConfigError as err:
            raise ConfigError(f"line {lineno}: {err}") from None
    return values


def parse_config_json(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"invalid JSON config: {err}") from None
    if not isinstance(doc, dict):
        raise ConfigError("JSON config must be an object")
    values = {}
    for key, val in doc.items():
        key = _canonical_key(str(key), f"key {key!r}")
        values[key] = _PARSERS[key](val)
    return values


def load_config_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return parse_config_json(text)
    return parse_config_text(text)


def apply_overrides(values: dict, overrides) -> dict:
    """key=value override pairs; last assignment wins."""
    out = dict(values)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        key, _, val = item.partition("=")
        key = _canonical_key(key.strip(), f"override {item!r}")
        out[key] = _PARSERS[key](val.strip())
    return out


def build_config(path=None, overrides=(), seed=None, workers=None) -> ExperimentConfig:
    """Assemble a config from file, overrides, and explicit seed/workers flags."""
    values = load_config_file(path) if path else {}
    values = apply_overrides(values, overrides)
    if seed is not None:
        values["seed"] = int(seed)
    if workers is not None:
        values["workers"] = int(workers)
    try:
        return ExperimentConfig(**values)
    except TypeError as err:
        raise ConfigError(str(err)) from None


def config_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    for key, val in d.items():
        if isinstance(val, tuple):
            d[key] = list(val)
    return d


def config_digest(cfg: ExperimentConfig) -> str:
    """Stable sha256 over the canonical JSON form of the config.

    The worker count is excluded: it is an execution detail that cannot
    change any result, and artifacts must be byte-identical across worker
    counts.
    """
    d = config_dict(cfg)
    d.pop("workers")
    payload = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()
