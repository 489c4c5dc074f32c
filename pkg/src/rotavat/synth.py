"""Synthetic ground-truth crowds and HPS-style corruptions.

Randomness: every draw comes from ``numpy.random.Generator(PCG64(...))``
seeded with ``SeedSequence([seed, stream, person_index])`` where ``stream``
is 0 for scene generation and 1 for corruption. Each person owns an
independent stream, so output does not depend on generation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calibration import FootHeadPair
from .errors import DegenerateDepth, MissingCamera
from .geometry import CameraParams, build_projection, camera_center, project_points, rotation_matrix
from .scene import Mesh, Scene, quantize, quantize_camera

RNG_ALGORITHM = "PCG64"
STREAM_SCENE = 0
STREAM_CORRUPT = 1

# 16-joint stick figure, canonical frame: foot midpoint at the origin, +Y up,
# height 1, facing +Z.
TEMPLATE_JOINTS = {
    "head": 0,
    "foot_left": 13,
    "foot_right": 14,
    "root": 8,
    "neck": 1,
    "shoulder_left": 2,
    "shoulder_right": 3,
    "elbow_left": 4,
    "elbow_right": 5,
    "hand_left": 6,
    "hand_right": 7,
    "hip_left": 9,
    "hip_right": 10,
    "knee_left": 11,
    "knee_right": 12,
    "spine": 15,
}
TEMPLATE_VERTICES = np.array(
    [
        [0.0, 1.0, 0.0],  # head
        [0.0, 0.86, 0.0],  # neck
        [0.12, 0.82, 0.0],  # shoulder_left
        [-0.12, 0.82, 0.0],  # shoulder_right
        [0.16, 0.63, 0.02],  # elbow_left
        [-0.16, 0.63, 0.02],  # elbow_right
        [0.17, 0.45, 0.06],  # hand_left
        [-0.17, 0.45, 0.06],  # hand_right
        [0.0, 0.5, 0.0],  # root
        [0.06, 0.49, 0.0],  # hip_left
        [-0.06, 0.49, 0.0],  # hip_right
        [0.07, 0.26, 0.03],  # knee_left
        [-0.07, 0.26, 0.03],  # knee_right
        [0.08, 0.0, 0.0],  # foot_left
        [-0.08, 0.0, 0.0],  # foot_right
        [0.0, 0.7, -0.01],  # spine
    ]
)
TEMPLATE_SEGMENTS = [
    (0, 1), (1, 15), (15, 8),
    (1, 2), (2, 4), (4, 6),
    (1, 3), (3, 5), (5, 7),
    (8, 9), (9, 11), (11, 13),
    (8, 10), (10, 12), (12, 14),
]  # fmt: skip


@dataclass(frozen=True)
class PedestrianTemplate:
    vertices: np.ndarray = field(default_factory=lambda: TEMPLATE_VERTICES.copy())
    joints: dict = field(default_factory=lambda: dict(TEMPLATE_JOINTS))
    segments: list = field(default_factory=lambda: list(TEMPLATE_SEGMENTS))


@dataclass(frozen=True)
class SceneSpec:
    person_count: int = 20
    ground_region: tuple[float, float, float, float] = (-600.0, 600.0, 800.0, 2500.0)  # x0, x1, z0, z1
    height_cm: float = 170.0
    height_jitter: float = 0.0
    camera: CameraParams = CameraParams(1000.0, -0.3, 600.0)
    image: tuple[int, int] = (1280, 960)
    seed: int = 0

    def __post_init__(self):
        if self.person_count < 0:
            raise ValueError("person_count must be >= 0")
        x0, x1, z0, z1 = self.ground_region
        if not (x0 < x1 and z0 < z1):
            raise ValueError("ground region is empty")
        if self.height_jitter < 0:
            raise ValueError("height_jitter must be >= 0")

    @classmethod
    def from_dict(cls, d) -> "SceneSpec":
        d = dict(d)
        if "camera" in d and not isinstance(d["camera"], CameraParams):
            d["camera"] = CameraParams.from_dict(d["camera"])
        for key in ("ground_region", "image"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass(frozen=True)
class CorruptionParams:
    tilt_toward_camera: float = 0.0
    tilt_jitter: float = 0.0
    scale_error: float = 0.0
    depth_error: float = 0.0
    elevation_error: float = 0.0
    pose_noise: float = 0.0  # cm std, independent per vertex
    seed: int = 0

    def __post_init__(self):
        for name in ("tilt_jitter", "scale_error", "depth_error", "elevation_error", "pose_noise"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def from_dict(cls, d) -> "CorruptionParams":
        return cls(**d)


def person_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream, index])))


def _yaw(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _quantized(vertices):
    return np.vectorize(quantize, otypes=[float])(vertices)


def generate_scene(
    spec: SceneSpec, template: PedestrianTemplate | None = None, quantized: bool = True
) -> Scene:
    """Upright pedestrians at uniform ground positions, random yaw.

    With ``quantized`` (the default) coordinates are rounded to the on-disk
    precision so the in-memory scene equals its own JSON round trip.
    """
    template = template or PedestrianTemplate()
    x0, x1, z0, z1 = spec.ground_region
    meshes = []
    for k in range(spec.person_count):
        rng = person_rng(spec.seed, STREAM_SCENE, k)
        x = rng.uniform(x0, x1)
        z = rng.uniform(z0, z1)
        yaw = rng.uniform(0.0, 2.0 * math.pi)
        h = spec.height_cm + spec.height_jitter * rng.standard_normal()
        verts = h * template.vertices @ _yaw(yaw).T + np.array([x, 0.0, z])
        if quantized:
            verts = _quantized(verts)
        meshes.append(Mesh(f"p{k:03d}", verts, template.joints, template.segments))
    cam = quantize_camera(spec.camera) if quantized else spec.camera
    return Scene(spec.image[0], spec.image[1], cam, meshes)


def _rotate_about(vertices, center, axis, angle):
    return center + (vertices - center) @ rotation_matrix(axis, angle).T


def corrupt_mesh(mesh: Mesh, cam: CameraParams, params: CorruptionParams, index: int) -> Mesh:
    rng = person_rng(params.seed, STREAM_CORRUPT, index)
    # fixed draw order keeps streams aligned whatever the std values are
    z_tilt, z_scale, z_depth, z_elev = rng.standard_normal(4)
    noise = rng.standard_normal(mesh.vertices.shape)
    verts = mesh.vertices.copy()
    if params.pose_noise:
        verts = verts + params.pose_noise * noise
    foot = mesh.with_vertices(verts).foot_mid

    tilt = params.tilt_toward_camera + params.tilt_jitter * z_tilt
    toward = np.array([-foot[0], 0.0, -foot[2]])
    if tilt != 0.0 and np.linalg.norm(toward) > 0:
        toward /= np.linalg.norm(toward)
        axis = np.cross([0.0, 1.0, 0.0], toward)
        verts = _rotate_about(verts, foot, axis, tilt)

    s = math.exp(params.scale_error * z_scale)
    if s != 1.0:
        verts = foot + s * (verts - foot)

    shift = np.zeros(3)
    if params.depth_error:
        ray = foot - camera_center(cam)
        shift += params.depth_error * z_depth * ray / np.linalg.norm(ray)
    if params.elevation_error:
        shift[1] += params.elevation_error * z_elev
    return mesh.with_vertices(verts + shift)


def corrupt_scene(scene: Scene, params: CorruptionParams) -> Scene:
    """Copy of ``scene`` with every mesh tilted toward the camera, rescaled and shifted."""
    if scene.camera is None:
        raise MissingCamera("corruption needs the scene camera")
    meshes = [corrupt_mesh(m, scene.camera, params, k) for k, m in enumerate(scene.meshes)]
    return Scene(scene.width, scene.height, scene.camera, meshes)


def observed_pairs(scene: Scene, camera: CameraParams | None = None):
    """Foot/head image pairs of every person, plus ``(person_id, reason)`` for skipped ones."""
    cam = camera or scene.camera
    if cam is None:
        raise MissingCamera("observed pairs need a camera")
    P = build_projection(cam)
    pairs, skipped = [], []
    for m in scene.meshes:
        imgs, w = project_points(P, np.stack([m.foot_mid, m.head]))
        if np.any(w <= cam.eps_w):
            skipped.append((m.person_id, DegenerateDepth(f"{m.person_id!r} is not in front of the camera")))
            continue
        try:
            pairs.append(FootHeadPair(imgs[0], imgs[1], m.person_id))
        except ValueError as exc:
            skipped.append((m.person_id, exc))
    return pairs, skipped
