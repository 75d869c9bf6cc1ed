"""Experiment configuration: dataclasses with a YAML round trip."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any

import numpy as np
import yaml


class ConfigError(ValueError):
    pass


@dataclass
class ModelSection:
    id: str | None = "ising3"
    params: dict = field(default_factory=dict)
    hamiltonian_file: str | None = None
    dims: list | None = None
    """``[n_l, n_w, n_e]``; required with a Hamiltonian file."""
    pumping: bool = False
    H_u: str | None = None
    """Wall control Hamiltonian as a file path; defaults to the model's or ``2|ŵ⟩⟨ŵ| − 𝟙``."""


@dataclass
class FrameSection:
    use: str = "identity"
    """``identity``, ``optimized`` or ``extra:<name>`` for a unitary shipped with the model."""
    eta_reg: float = 0.01
    restarts: int = 8
    max_iter: int = 5000


@dataclass
class WallSection:
    objective: str = "auto"
    beta: float = 0.01
    use_model_state: bool = True
    n_random: int = 20


@dataclass
class SchemeSweep:
    kind: str = "driving"
    gains: list = field(default_factory=lambda: [1.0])


@dataclass
class SimulateSection:
    schemes: list = field(default_factory=lambda: [SchemeSweep("none", [0.0])])
    threshold: float = 0.97


@dataclass
class DdSection:
    schemes: list = field(default_factory=lambda: ["universal", "selective", "wall-drive"])
    frames: list = field(default_factory=lambda: ["identity"])
    f: float = 10.0
    duty: float = 0.2
    kappa: float = float(5 * np.pi)
    align_selective: bool = True
    threshold: float = 0.97


@dataclass
class EternalSection:
    kappas: list = field(default_factory=lambda: [1.0, 3.0, 10.0, 30.0, 100.0])
    check_samples: int = 200
    check_t_max: float = 500.0


@dataclass
class TimeSection:
    t_max: float = 30.0
    n_points: int = 601


@dataclass
class ExperimentConfig:
    model: ModelSection = field(default_factory=ModelSection)
    frame: FrameSection = field(default_factory=FrameSection)
    wall: WallSection = field(default_factory=WallSection)
    simulate: SimulateSection = field(default_factory=SimulateSection)
    dd: DdSection = field(default_factory=DdSection)
    eternal: EternalSection = field(default_factory=EternalSection)
    time: TimeSection = field(default_factory=TimeSection)
    seed: int = 0
    workers: int = 1
    out: str | None = None

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.time.t_max, self.time.n_points)

    def to_dict(self) -> dict:
        return asdict(self)

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def save(self, path) -> None:
        Path(path).write_text(self.dump())


_NESTED = {
    "model": ModelSection,
    "frame": FrameSection,
    "wall": WallSection,
    "simulate": SimulateSection,
    "dd": DdSection,
    "eternal": EternalSection,
    "time": TimeSection,
}


def _build(cls, data: Any):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section {cls.__name__} must be a mapping")
    known = {f.name for f in fields(cls)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown keys in {cls.__name__}: {sorted(extra)}")
    kw = dict(data)
    if cls is SimulateSection and "schemes" in kw:
        kw["schemes"] = [s if isinstance(s, SchemeSweep) else _build(SchemeSweep, s) for s in kw["schemes"]]
    return cls(**kw)


def from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    top = {f.name for f in fields(ExperimentConfig)}
    extra = set(data) - top
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    kw = {k: (_build(_NESTED[k], v) if k in _NESTED else v) for k, v in data.items()}
    cfg = ExperimentConfig(**kw)
    validate(cfg)
    return cfg


def load(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from None
    return from_dict(data)


def loads(text: str) -> ExperimentConfig:
    try:
        return from_dict(yaml.safe_load(text) or {})
    except yaml.YAMLError as exc:
        raise ConfigError(str(exc)) from None


def validate(cfg: ExperimentConfig) -> None:
    m = cfg.model
    if m.id is None and m.hamiltonian_file is None:
        raise ConfigError("give model.id or model.hamiltonian_file")
    if m.hamiltonian_file is not None:
        if not Path(m.hamiltonian_file).is_file():
            raise ConfigError(f"Hamiltonian file not found: {m.hamiltonian_file}")
        if not m.dims or len(m.dims) != 3:
            raise ConfigError("model.dims = [n_l, n_w, n_e] is required with a Hamiltonian file")
    if m.H_u is not None and not Path(m.H_u).is_file():
        raise ConfigError(f"H_u file not found: {m.H_u}")
    if cfg.frame.use not in ("identity", "optimized") and not cfg.frame.use.startswith("extra:"):
        raise ConfigError(f"frame.use must be identity, optimized or extra:<name>, got {cfg.frame.use!r}")
    if cfg.wall.objective not in ("auto", "gamma1", "gamma2"):
        raise ConfigError("wall.objective must be auto, gamma1 or gamma2")
    for s in cfg.simulate.schemes:
        if s.kind not in ("none", "measurement", "dissipation", "driving"):
            raise ConfigError(f"unknown scheme {s.kind!r}")
        if not s.gains:
            raise ConfigError(f"scheme {s.kind} has an empty gain sweep")
    known_dd = {"universal", "selective", "wall-drive", "universal+drive", "selective+drive"}
    if not cfg.dd.schemes or set(cfg.dd.schemes) - known_dd:
        raise ConfigError(f"dd.schemes must be a nonempty subset of {sorted(known_dd)}")
    if not cfg.dd.frames or set(cfg.dd.frames) - {"identity", "optimized"}:
        raise ConfigError("dd.frames must be a nonempty subset of identity, optimized")
    if not cfg.eternal.kappas:
        raise ConfigError("eternal.kappas must be nonempty")
    if cfg.time.t_max <= 0 or cfg.time.n_points < 2:
        raise ConfigError("time.t_max must be positive and time.n_points >= 2")
    if not isinstance(cfg.seed, int) or cfg.seed < 0 or cfg.seed >= 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")


def task_seed(root: int, label: str) -> np.random.SeedSequence:
    """Per-task stream from the root seed and a fixed label hash."""
    h = hashlib.sha256(label.encode()).digest()
    words = [int.from_bytes(h[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.SeedSequence([root & 0xFFFFFFFF, root >> 32, *words])


def task_rng(root: int, label: str) -> np.random.Generator:
    return np.random.default_rng(task_seed(root, label))


def replace_section(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    d = cfg.to_dict()
    for k, v in changes.items():
        if is_dataclass(v):
            v = asdict(v)
        d[k] = v
    return from_dict(d)
