"""JSON run configuration.

One document with sections ``input``, ``preprocess``, ``features``,
``fuzzy``, ``dirichlet``, ``tda``, ``cluster``, ``output`` and ``seed``.
Every key has a default; unknown keys are rejected so typos fail loudly.
Relative paths are resolved against the directory holding the config file.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import PipelineError


@dataclass(frozen=True)
class InputConfig:
    signals: tuple = ()              # [{"id": ..., "path": ...}, ...]
    covariates: str | None = None    # CSV with header id,<covariate>...
    sample_rate_hz: float | None = None  # needed for headerless signal files


@dataclass(frozen=True)
class PreprocessConfig:
    filter_order: int = 4
    cutoff_hz: float = 1.2
    resample_len: int | None = 1_200_000
    order: tuple = ("filter", "resample")


@dataclass(frozen=True)
class FeaturesConfig:
    max_lag: int = 1500
    welch_window: int = 4096
    welch_overlap: float = 0.5
    welch_taper: float = 0.5


@dataclass(frozen=True)
class FuzzyConfig:
    m: float = 1.5
    k_min: int = 2
    k_max: int = 6
    restarts: int = 20
    max_iter: int = 100


@dataclass(frozen=True)
class DirichletConfig:
    covariates: tuple | None = None  # None: every column of the covariate table
    ref_category: int = 0
    max_iter: int = 500


@dataclass(frozen=True)
class TdaConfig:
    n_frames: int = 62
    keep_odd: bool = True
    points_per_frame: int = 1200
    dimension: int = 14
    max_delay: int = 64
    delay: int | None = None
    pca_components: int = 2
    landmarks: int = 150
    max_scale: float = 2.0
    smooth_window: int = 1


@dataclass(frozen=True)
class ClusterConfig:
    cut_height: float = 0.3
    n_clusters: int | None = None    # overrides cut_height when set
    severity_column: str | None = None
    mds_dims: int = 2


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "results"
    svg: bool = True
    write_frames: bool = False


@dataclass(frozen=True)
class Config:
    input: InputConfig = field(default_factory=InputConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    features: FeaturesConfig = field(default_factory=FeaturesConfig)
    fuzzy: FuzzyConfig = field(default_factory=FuzzyConfig)
    dirichlet: DirichletConfig = field(default_factory=DirichletConfig)
    tda: TdaConfig = field(default_factory=TdaConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0
    base_dir: Path = Path(".")

    def resolve(self, path) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def out_dir(self) -> Path:
        return self.resolve(self.output.dir)

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        doc.pop("base_dir")
        return _plain(doc)


SECTIONS = {
    "input": InputConfig,
    "preprocess": PreprocessConfig,
    "features": FeaturesConfig,
    "fuzzy": FuzzyConfig,
    "dirichlet": DirichletConfig,
    "tda": TdaConfig,
    "cluster": ClusterConfig,
    "output": OutputConfig,
}


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _freeze(value):
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    if isinstance(value, dict):
        return {k: _freeze(v) for k, v in value.items()}
    return value


def _check_type(section: str, key: str, value, default):
    # bool is an int subclass; keep them apart
    if value is None or default is None:
        return
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif isinstance(default, str):
        ok = isinstance(value, str)
    elif isinstance(default, tuple):
        ok = isinstance(value, tuple)
    else:
        ok = True
    if not ok:
        raise PipelineError("config", f"{section}.{key} has the wrong type ({type(value).__name__})")


def _build_section(name: str, cls, doc) -> Any:
    if not isinstance(doc, dict):
        raise PipelineError("config", f"section {name!r} must be an object")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(doc) - set(known))
    if unknown:
        raise PipelineError("config", f"unknown key(s) in {name!r}: {', '.join(unknown)}")
    defaults = cls()
    kwargs = {}
    for key, value in doc.items():
        value = _freeze(value)
        _check_type(name, key, value, getattr(defaults, key))
        kwargs[key] = value
    return cls(**kwargs)


def config_from_dict(doc: dict, base_dir=".") -> Config:
    if not isinstance(doc, dict):
        raise PipelineError("config", "top level must be a JSON object")
    unknown = sorted(set(doc) - set(SECTIONS) - {"seed"})
    if unknown:
        raise PipelineError("config", f"unknown section(s): {', '.join(unknown)}")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise PipelineError("config", "seed must be a nonnegative integer")
    sections = {name: _build_section(name, cls, doc.get(name, {})) for name, cls in SECTIONS.items()}
    for entry in sections["input"].signals:
        if not isinstance(entry, dict) or set(entry) != {"id", "path"}:
            raise PipelineError("config", "each input.signals entry needs exactly 'id' and 'path'")
    return Config(seed=seed, base_dir=Path(base_dir), **sections)


def load_config(path, seed: int | None = None, out_dir=None) -> Config:
    """Read a config file, applying command-line overrides for seed and output dir."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise PipelineError("config", f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise PipelineError("config", f"{path}: invalid JSON ({exc})") from None
    cfg = config_from_dict(doc, path.parent)
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=int(seed))
    if out_dir is not None:
        cfg = dataclasses.replace(cfg, output=dataclasses.replace(cfg.output, dir=str(Path(out_dir).resolve())))
    return cfg
