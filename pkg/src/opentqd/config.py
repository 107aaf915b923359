"""JSON experiment configuration: validation and model construction."""

from __future__ import annotations

import copy
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .dynamics import default_steps
from .errors import ConfigError
from .models import DeutschParams, LZParams, custom_variants, deutsch_variants, load_model_file, lz_variants
from .models.base import Variants
from .spectral import TimeGrid

MODELS = ("deutsch", "landau_zener", "custom_file")
DRIVES = ("adiabatic_me", "standard_tqd", "generalized_tqd", "adiabatic_target")
PARAM_TYPES = {"deutsch": DeutschParams, "landau_zener": LZParams}


@dataclass
class ExperimentConfig:
    model: str
    params: dict = field(default_factory=dict)
    drive: str = "adiabatic_me"
    grid: dict = field(default_factory=dict)
    sweep: dict | None = None
    output: dict = field(default_factory=dict)
    omega_ref: float = 1.0
    model_file: str | None = None
    workers: int = 1

    def resolved(self) -> dict:
        return dataclasses.asdict(self)

    def with_param(self, name: str, value) -> "ExperimentConfig":
        cfg = copy.deepcopy(self)
        if name == "tau":
            cfg.grid["tau"] = value
            cfg.params.pop("tau", None)
        else:
            cfg.params[name] = value
        return cfg

    @property
    def tau(self) -> float:
        return float(self.grid["tau"])

    def time_grid(self) -> TimeGrid:
        n = self.grid.get("n_steps")
        if n is None:
            n = default_steps(0.0, self.tau, self.omega_ref)
        return TimeGrid(0.0, self.tau, int(n))


def _param_names(model: str) -> set:
    if model == "custom_file":
        return {"tau"}
    return {f.name for f in dataclasses.fields(PARAM_TYPES[model]) if f.name != "schedule"}


def parse_config(data: dict, base_dir: Path | str = ".") -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown configuration keys: {sorted(extra)}")
    model = data.get("model")
    if model not in MODELS:
        raise ConfigError(f"model must be one of {MODELS}, got {model!r}")
    drive = data.get("drive", "adiabatic_me")
    if drive not in DRIVES:
        raise ConfigError(f"drive must be one of {DRIVES}, got {drive!r}")
    params = dict(data.get("params", {}))
    names = _param_names(model)
    bad = set(params) - names
    if bad:
        raise ConfigError(f"unknown parameters for {model}: {sorted(bad)}")
    grid = dict(data.get("grid", {}))
    if "tau" not in grid:
        if "tau" in params:
            grid["tau"] = params["tau"]
        else:
            raise ConfigError("grid.tau (total time) is required")
    params.pop("tau", None)
    try:
        tau = float(grid["tau"])
    except (TypeError, ValueError):
        raise ConfigError("grid.tau must be a number") from None
    if not tau > 0:
        raise ConfigError("grid.tau must be positive")
    if "n_steps" in grid and (not isinstance(grid["n_steps"], int) or grid["n_steps"] < 2):
        raise ConfigError("grid.n_steps must be an integer >= 2")
    omega_ref = float(data.get("omega_ref", 1.0))
    if not omega_ref > 0:
        raise ConfigError("omega_ref must be positive")

    model_file = data.get("model_file")
    if model == "custom_file":
        if not model_file:
            raise ConfigError("custom_file models need a model_file entry")
        path = Path(model_file)
        if not path.is_absolute():
            path = Path(base_dir) / path
        if not path.is_file():
            raise ConfigError(f"model file {path} does not exist")
        model_file = str(path)

    sweep = data.get("sweep")
    if sweep is not None:
        if not isinstance(sweep, dict) or "variable" not in sweep or "values" not in sweep:
            raise ConfigError("sweep needs 'variable' and 'values'")
        if sweep["variable"] not in names:
            raise ConfigError(f"sweep variable {sweep['variable']!r} is not a parameter of {model}")
        if not isinstance(sweep["values"], list) or not sweep["values"]:
            raise ConfigError("sweep.values must be a non-empty list")
        drives = sweep.get("drives", [drive])
        for d in drives:
            if d not in DRIVES:
                raise ConfigError(f"unknown sweep drive {d!r}")
        sweep = {"variable": sweep["variable"], "values": list(sweep["values"]), "drives": list(drives)}

    output = dict(data.get("output", {}))
    output.setdefault("format", "csv")
    if output["format"] != "csv":
        raise ConfigError("only csv output is supported")
    workers = int(data.get("workers", 1))
    if workers < 1:
        raise ConfigError("workers must be >= 1")

    cfg = ExperimentConfig(
        model=model,
        params=params,
        drive=drive,
        grid=grid,
        sweep=sweep,
        output=output,
        omega_ref=omega_ref,
        model_file=model_file,
        workers=workers,
    )
    build_variants(cfg)  # surfaces parameter errors early
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return parse_config(data, path.parent)


def model_params(cfg: ExperimentConfig):
    if cfg.model == "custom_file":
        return None
    cls = PARAM_TYPES[cfg.model]
    kwargs = dict(cfg.params)
    kwargs["tau"] = cfg.tau
    for k in ("f0", "f1"):
        if k in kwargs:
            kwargs[k] = int(kwargs[k])
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def build_variants(cfg: ExperimentConfig) -> Variants:
    if cfg.model == "deutsch":
        return deutsch_variants(model_params(cfg))
    if cfg.model == "landau_zener":
        return lz_variants(model_params(cfg))
    return custom_variants(load_model_file(cfg.model_file), cfg.time_grid())


def sweep_points(cfg: ExperimentConfig) -> list[tuple]:
    return [(float(v), d) for v in cfg.sweep["values"] for d in cfg.sweep["drives"]]


__all__ = [
    "DRIVES",
    "MODELS",
    "ExperimentConfig",
    "build_variants",
    "load_config",
    "model_params",
    "parse_config",
    "sweep_points",
]
