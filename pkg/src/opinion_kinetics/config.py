"""Experiment configuration: line-oriented `key = value` files with defaults."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import DensityField, Grid, bimodal_density, uniform_density
from .params import KineticParams


class ConfigError(ValueError):
    """Unreadable, malformed, or invalid experiment configuration."""


@dataclass(frozen=True)
class McConfig:
    n_agents: int = 100_000
    epsilon: float = 0.01
    gamma: float = 0.5
    seed: int = 1234
    hist_n: int = 50
    t_end: float = 2.0

    def validate(self):
        if self.n_agents < 2 or self.n_agents % 2 != 0:
            raise ConfigError(f"mc.n must be a positive even integer, got {self.n_agents}")
        if not 0.0 < self.epsilon <= 1.0:
            raise ConfigError(f"mc.epsilon must lie in (0, 1], got {self.epsilon}")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"mc.gamma must lie in (0, 1), got {self.gamma}")
        if self.hist_n < 4:
            raise ConfigError(f"mc.hist_n must be at least 4, got {self.hist_n}")
        if self.t_end <= 0.0:
            raise ConfigError(f"mc.t_end must be positive, got {self.t_end}")


@dataclass(frozen=True)
class ExperimentConfig:
    lam: float
    m: float
    n: int = 200
    dt: float = 1e-3
    t_end: float = 10.0
    sample_every: int = 10
    initial: str = "bimodal"
    bimodal_width: float = 0.15
    out: str = "."
    sweep_lambdas: tuple = ()
    mc: McConfig | None = None

    def params(self) -> KineticParams:
        return KineticParams(self.lam, self.m)

    def grid(self) -> Grid:
        return Grid(self.n)

    def initial_density(self) -> DensityField:
        return build_initial_density(self.initial, self.grid(), self.bimodal_width)


def build_initial_density(spec: str, grid: Grid, width: float = 0.15) -> DensityField:
    """Materialize a named initial condition on a grid, normalized to unit mass.

    Presets: "bimodal" (Gaussian mixture at +-1/2, truncated, renormalized),
    "uniform", and "file:<path>" with one nonnegative value per cell.
    """
    if spec == "bimodal":
        return bimodal_density(grid, width)
    if spec == "uniform":
        return uniform_density(grid)
    if spec.startswith("file:"):
        path = Path(spec[5:])
        try:
            raw = np.loadtxt(path, dtype=float, ndmin=1)
        except OSError as exc:
            raise ConfigError(f"cannot read initial-condition file {path}: {exc}") from exc
        if raw.ndim != 1 or raw.size != grid.n_cells:
            raise ConfigError(
                f"initial-condition file {path} holds {raw.size} values, "
                f"grid has {grid.n_cells} cells"
            )
        if np.any(raw < 0.0) or not np.all(np.isfinite(raw)):
            raise ConfigError(f"initial-condition file {path} must be nonnegative and finite")
        return DensityField(grid, raw).normalized()
    raise ConfigError(f"unknown initial condition {spec!r}")


_FLOAT_KEYS = {"lambda", "m", "dt", "t_end", "bimodal_width",
               "mc.epsilon", "mc.gamma", "mc.t_end"}
_INT_KEYS = {"n", "sample_every", "mc.n", "mc.seed", "mc.hist_n"}
_STR_KEYS = {"initial", "out"}
_LIST_KEYS = {"sweep_lambdas"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | _LIST_KEYS


def _parse_value(key: str, raw: str, lineno: int):
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key in _LIST_KEYS:
            return tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: cannot parse value for '{key}': {raw!r}") from exc
    return raw


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse `key = value` lines (# starts a comment) into a validated config."""
    entries: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}, line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"{source}, line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"{source}, line {lineno}: duplicate key {key!r}")
        entries[key] = _parse_value(key, raw, lineno)

    if "lambda" not in entries:
        raise ConfigError(f"{source}: missing required key 'lambda'")
    if "m" not in entries:
        raise ConfigError(f"{source}: missing required key 'm'")

    mc_entries = {k.split(".", 1)[1]: v for k, v in entries.items() if k.startswith("mc.")}
    mc = None
    if mc_entries:
        rename = {"n": "n_agents"}
        mc = McConfig(**{rename.get(k, k): v for k, v in mc_entries.items()})
        mc.validate()

    cfg = ExperimentConfig(
        lam=entries["lambda"],
        m=entries["m"],
        n=entries.get("n", 200),
        dt=entries.get("dt", 1e-3),
        t_end=entries.get("t_end", 10.0),
        sample_every=entries.get("sample_every", 10),
        initial=entries.get("initial", "bimodal"),
        bimodal_width=entries.get("bimodal_width", 0.15),
        out=entries.get("out", "."),
        sweep_lambdas=entries.get("sweep_lambdas", ()),
        mc=mc,
    )
    _validate(cfg)
    return cfg


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def _validate(cfg: ExperimentConfig):
    if not cfg.lam > 0.0:
        raise ConfigError(f"field 'lambda': must be positive, got {cfg.lam}")
    if not -1.0 < cfg.m < 1.0:
        raise ConfigError(f"field 'm': must lie strictly inside (-1, 1), got {cfg.m}")
    try:
        KineticParams(cfg.lam, cfg.m)
    except ValueError as exc:
        raise ConfigError(f"invalid parameters: {exc}") from exc
    if cfg.n < 4:
        raise ConfigError(f"field 'n': need at least 4 cells, got {cfg.n}")
    if cfg.dt <= 0.0:
        raise ConfigError(f"field 'dt': must be positive, got {cfg.dt}")
    if cfg.t_end <= 0.0:
        raise ConfigError(f"field 't_end': must be positive, got {cfg.t_end}")
    if cfg.sample_every < 1:
        raise ConfigError(f"field 'sample_every': must be >= 1, got {cfg.sample_every}")
    if cfg.bimodal_width <= 0.0:
        raise ConfigError(f"field 'bimodal_width': must be positive, got {cfg.bimodal_width}")
    for lv in cfg.sweep_lambdas:
        if lv <= 0.0:
            raise ConfigError(f"field 'sweep_lambdas': entries must be positive, got {lv}")
    if cfg.initial not in ("bimodal", "uniform") and not cfg.initial.startswith("file:"):
        raise ConfigError(f"field 'initial': unknown value {cfg.initial!r}")
