"""CLI configuration: JSON file values, overridden by explicit flags."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace

from .calibration import PEDESTRIAN_HEIGHT, CalibrationGrid, default_grid
from .errors import SchemaError
from .synth import CorruptionParams, SceneSpec

DEFAULT_CORRUPTION = CorruptionParams(
    tilt_toward_camera=math.radians(20),
    tilt_jitter=math.radians(5),
    scale_error=0.1,
    depth_error=50.0,
    elevation_error=20.0,
    pose_noise=2.0,
)


@dataclass
class Config:
    pedestrian_height_cm: float = PEDESTRIAN_HEIGHT
    seed: int = 0
    grid: dict = field(default_factory=dict)  # overrides of default_grid fields
    scene: SceneSpec = field(default_factory=SceneSpec)
    corruption: CorruptionParams = DEFAULT_CORRUPTION
    render: dict = field(default_factory=dict)

    def calibration_grid(self, image_height: float) -> CalibrationGrid:
        g = default_grid(image_height)
        over = dict(self.grid)
        if "bins_per_axis" in over:
            over["bins_per_axis"] = int(over["bins_per_axis"])
        for key in ("f_range", "pitch_range", "height_range"):
            if key in over:
                over[key] = tuple(float(v) for v in over[key])
        try:
            return replace(g, **over)
        except TypeError as exc:
            raise SchemaError(str(exc), "/grid") from None

    def scene_spec(self) -> SceneSpec:
        return replace(self.scene, seed=self.seed)

    def corruption_params(self) -> CorruptionParams:
        return replace(self.corruption, seed=self.seed)


def _known(cls, d, pointer):
    names = {f.name for f in fields(cls)}
    extra = set(d) - names
    if extra:
        raise SchemaError(f"unknown keys {sorted(extra)}", pointer)


def config_from_dict(d) -> Config:
    if not isinstance(d, dict):
        raise SchemaError("config must be a JSON object")
    _known(Config, d, "")
    cfg = Config()
    try:
        if "scene" in d:
            _known(SceneSpec, d["scene"], "/scene")
            cfg.scene = SceneSpec.from_dict(d["scene"])
        if "corruption" in d:
            _known(CorruptionParams, d["corruption"], "/corruption")
            cfg.corruption = replace(DEFAULT_CORRUPTION, **d["corruption"])
        for key in ("pedestrian_height_cm", "seed", "grid", "render"):
            if key in d:
                setattr(cfg, key, d[key])
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from None
    return cfg


def load_config(path) -> Config:
    if path is None:
        return Config()
    with open(path, encoding="utf-8") as fh:
        try:
            return config_from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from None

