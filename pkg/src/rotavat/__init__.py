"""Single-camera auto-calibration, ground-plane realignment of predicted
human meshes (RotAvat) and world-coordinate pose metrics."""

__version__ = "0.1.0"

from .align import AlignmentTrace, align_mesh, align_scene
from .calibration import (
    CalibrationGrid,
    CalibrationResult,
    FootHeadPair,
    default_grid,
    grid_search_calibrate,
)
from .geometry import CameraParams, build_projection, project_point
from .metrics import MetricReport, evaluate_scene, mpjpe, pa_mpjpe, pve, w_mpjpe, w_pve
from .scene import Mesh, Scene, load_scene, save_scene
from .synth import CorruptionParams, SceneSpec, corrupt_scene, generate_scene, observed_pairs
