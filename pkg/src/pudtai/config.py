"""Run configuration: a JSON tree of parameters plus mode, seed and output path."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Any

MODES = ("synthesize", "pipeline", "probabilities", "fisher", "estimate", "bootstrap", "sweep", "compare")

DEFAULT_PARAMS: dict[str, Any] = {
    "signal": {"epsilon": 0.5, "phi": 0.0, "sigma": 1.0, "omega0": 0.0, "mean_photons": 0.69},
    "grid": {"n": 4096, "half_span": 8.0},
    "processor": {
        "alpha": 16000.0,
        "kappa": None,
        "alpha_di": 1.0,
        "beta": 1.0,
        "theta": 0.0,
        "t_a": 0.564,
        "omega0": 0.0,
        "band_fraction": 0.05,
        "pad": 2,
        "n_phases": 64,
    },
    "calibration": {"v_minus": 0.9751, "v_plus": 0.764, "eta_plus": 0.719, "t_a_sigma": 0.564},
    # bwl_ratio null means unlimited bandwidth
    "qmti": {"sigma_rl_ratio": 0.0, "bwl_ratio": None, "dark_fraction": 0.0},
    "sweep": {"epsilons": [0.01, 0.05, 0.08, 0.1, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0]},
    "estimate": {"photons_per_set": 150000, "n_boot": 1000, "shot_mode": False},
    "spectrometers": {"QMTI": {"sigma_rl": 7.2e3, "sigma_bwl": 300e3}, "FT": {"sigma_rl": 2.99792458e7, "sigma_bwl": 1.49896229e15}},
    "s_curve_points": 200,
}

# Blocks each mode reads; all of them must be present after defaults are merged.
MODE_BLOCKS = {
    "synthesize": ("signal", "grid"),
    "pipeline": ("signal", "grid", "processor", "sweep"),
    "probabilities": ("calibration", "sweep"),
    "fisher": ("calibration", "sweep"),
    "estimate": ("calibration", "sweep", "estimate"),
    "bootstrap": ("calibration", "sweep", "estimate", "qmti"),
    "sweep": ("calibration", "sweep", "qmti"),
    "compare": ("calibration", "sweep", "qmti", "spectrometers"),
}

SEED_MAX = 2**64 - 1


class ConfigError(ValueError):
    """Invalid configuration; ``path`` points at the offending key."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path

    def report(self) -> dict:
        return {"error": {"type": "ConfigError", "path": self.path, "message": str(self)}}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            if path == "spectrometers":
                out[key] = copy.deepcopy(value)
                continue
            raise ConfigError(f"unknown parameter '{here}'", here)
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"'{here}' must be an object", here)
            out[key] = _merge(base[key], value, here)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _check_number(tree: dict, path: str, allow_none: bool = False):
    node = tree
    keys = path.split(".")
    for k in keys:
        node = node[k]
    if node is None and allow_none:
        return
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"'{path}' must be a number", path)


def _check_tree(params: dict) -> None:
    for path in (
        "signal.epsilon", "signal.phi", "signal.sigma", "signal.omega0", "signal.mean_photons",
        "grid.n", "grid.half_span", "processor.alpha", "processor.alpha_di", "processor.beta",
        "processor.theta", "processor.t_a", "processor.omega0", "processor.band_fraction",
        "processor.pad", "processor.n_phases", "calibration.v_minus", "calibration.v_plus",
        "calibration.eta_plus", "calibration.t_a_sigma", "qmti.sigma_rl_ratio", "qmti.dark_fraction",
        "estimate.photons_per_set", "estimate.n_boot", "s_curve_points",
    ):
        _check_number(params, path)
    _check_number(params, "processor.kappa", allow_none=True)
    _check_number(params, "qmti.bwl_ratio", allow_none=True)
    eps = params["sweep"]["epsilons"]
    if not isinstance(eps, list) or not eps or any(isinstance(e, bool) or not isinstance(e, (int, float)) or e < 0 for e in eps):
        raise ConfigError("'sweep.epsilons' must be a non-empty list of non-negative numbers", "sweep.epsilons")
    if not isinstance(params["estimate"]["shot_mode"], bool):
        raise ConfigError("'estimate.shot_mode' must be true or false", "estimate.shot_mode")
    for name, spec in params["spectrometers"].items():
        if not isinstance(spec, dict) or set(spec) != {"sigma_rl", "sigma_bwl"}:
            raise ConfigError(f"'spectrometers.{name}' needs sigma_rl and sigma_bwl", f"spectrometers.{name}")


@dataclass
class RunConfig:
    mode: str
    params: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_PARAMS))
    seed: int = 0
    output_path: str = "out"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode '{self.mode}'; expected one of {', '.join(MODES)}", "mode")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed <= SEED_MAX:
            raise ConfigError("seed must be an integer in [0, 2^64 - 1]", "seed")
        if not isinstance(self.output_path, str) or not self.output_path:
            raise ConfigError("output_path must be a non-empty string", "output_path")
        if not isinstance(self.params, dict):
            raise ConfigError("params must be an object", "params")
        self.params = _merge(DEFAULT_PARAMS, self.params)
        _check_tree(self.params)
        for block in MODE_BLOCKS[self.mode]:
            if block not in self.params:
                raise ConfigError(f"mode '{self.mode}' needs the '{block}' block", block)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = set(data) - {"mode", "params", "seed", "output_path"}
        if unknown:
            key = sorted(unknown)[0]
            raise ConfigError(f"unknown top-level key '{key}'", key)
        if "mode" not in data:
            raise ConfigError("missing 'mode'", "mode")
        return cls(
            mode=data["mode"],
            params=data.get("params", {}),
            seed=data.get("seed", 0),
            output_path=data.get("output_path", "out"),
        )

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def to_dict(self) -> dict:
        return {"mode": self.mode, "params": copy.deepcopy(self.params), "seed": self.seed, "output_path": self.output_path}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def parse_value(text: str):
    """JSON literal if it parses, else the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def set_path(tree: dict, dotted: str, value) -> None:
    """Assign ``value`` at a dotted key path, creating objects as needed."""
    keys = dotted.split(".")
    node = tree
    for k in keys[:-1]:
        nxt = node.setdefault(k, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"'{dotted}' passes through a non-object", dotted)
        node = nxt
    node[keys[-1]] = value
