"""Camera auto-calibration from pedestrian foot/head image points.

Each pedestrian is assumed upright on the ground with a known height. For a
candidate camera, the foot point fixes the ground position ``(X, Z)``; lifting
it to the pedestrian height and reprojecting gives a predicted head. The
calibration is the lattice point minimising the summed squared head error.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import AllDegenerate, DegenerateDepth, EmptyInput
from .geometry import (
    EPS_W_REL,
    CameraParams,
    back_project,
    build_projection,
    depth_from_known_height,
    project_point,
)

log = logging.getLogger(__name__)

PEDESTRIAN_HEIGHT = 170.0
PENALTY = 1e18
EPS_PAIR = 1e-6


@dataclass(frozen=True, eq=False)
class FootHeadPair:
    foot: np.ndarray
    head: np.ndarray
    person_id: str = ""

    def __post_init__(self):
        foot = np.asarray(self.foot, dtype=float).reshape(2)
        head = np.asarray(self.head, dtype=float).reshape(2)
        if not (np.all(np.isfinite(foot)) and np.all(np.isfinite(head))):
            raise ValueError("foot/head image points must be finite")
        if np.linalg.norm(head - foot) <= EPS_PAIR:
            raise ValueError(f"foot and head of {self.person_id!r} coincide")
        object.__setattr__(self, "foot", foot)
        object.__setattr__(self, "head", head)


@dataclass(frozen=True)
class CalibrationGrid:
    f_range: tuple[float, float]
    pitch_range: tuple[float, float]
    height_range: tuple[float, float]
    bins_per_axis: int = 50

    def __post_init__(self):
        for name in ("f_range", "pitch_range", "height_range"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name}: low must be < high, got {lo}, {hi}")
        if self.bins_per_axis < 2:
            raise ValueError("bins_per_axis must be >= 2")

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        b = self.bins_per_axis
        return (
            np.linspace(*self.f_range, b),
            np.linspace(*self.pitch_range, b),
            np.linspace(*self.height_range, b),
        )

    def with_bins(self, bins: int) -> "CalibrationGrid":
        return CalibrationGrid(self.f_range, self.pitch_range, self.height_range, bins)


def default_grid(image_height: float) -> CalibrationGrid:
    if image_height <= 0:
        raise ValueError("image height must be positive")
    H = float(image_height)
    return CalibrationGrid((0.1 * H, 6.0 * H), (-math.pi / 4, math.pi / 2), (50.0, 4000.0), 50)


@dataclass
class CalibrationResult:
    params: CameraParams
    mse: float
    evaluations: int
    per_pair_residuals: list[tuple[str, float, float]] = field(default_factory=list)

    def to_dict(self):
        def num(v):
            return None if not math.isfinite(v) else v

        return {
            "f": self.params.f,
            "pitch": self.params.pitch,
            "height": self.params.height,
            "mse": self.mse,
            "evaluations": self.evaluations,
            "residuals": [
                {"person_id": pid, "dx": num(dx), "dy": num(dy)}
                for pid, dx, dy in self.per_pair_residuals
            ],
        }


def extract_foot_head(mesh, P: np.ndarray) -> FootHeadPair:
    """Project the 3D foot midpoint and head joint of ``mesh``."""
    foot3 = mesh.foot_mid
    head3 = mesh.head
    out = []
    for name, pt in (("foot", foot3), ("head", head3)):
        img, w = project_point(P, pt)
        if w <= 0:
            raise DegenerateDepth(f"{name} of {mesh.person_id!r} is behind the camera")
        out.append(img)
    return FootHeadPair(out[0], out[1], mesh.person_id)


def solve_ground_position(P: np.ndarray, foot, P_inv: np.ndarray | None = None) -> tuple[float, float]:
    """Ground point ``(X, Z)`` that projects onto ``foot``."""
    if P_inv is None:
        P_inv = np.linalg.inv(P)
    w = depth_from_known_height(P, foot, 0.0, P_inv)
    if w <= EPS_W_REL * P[0, 0]:
        raise DegenerateDepth(f"ground point seen at {tuple(foot)} is not in front of the camera")
    X, _, Z = back_project(P, foot, w, P_inv)
    return float(X), float(Z)


def predict_head(P: np.ndarray, foot, pedestrian_height: float = PEDESTRIAN_HEIGHT) -> np.ndarray:
    X, Z = solve_ground_position(P, foot)
    img, w = project_point(P, (X, pedestrian_height, Z))
    if w <= 0:
        raise DegenerateDepth("predicted head is behind the camera")
    return img


def _head_residuals(f, pitch, c, foot, head, h):
    """Broadcasting kernel: head residuals and a validity mask.

    ``f``, ``pitch``, ``c`` broadcast against ``foot[..., 0]``; this is the
    same closed form as ``predict_head`` with the inverse written out.
    """
    ct, st = np.cos(pitch), np.sin(pitch)
    fx, fy = foot[..., 0], foot[..., 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = ct * fy / f + st
        w0 = -c / denom
        X = fx * w0 / f
        Z = ct * w0 - st * fy * w0 / f
        Yt = h - c
        wh = st * Yt + ct * Z
        hx = f * X / wh
        hy = f * (ct * Yt - st * Z) / wh
    eps = EPS_W_REL * f
    valid = (np.abs(denom) >= EPS_W_REL) & (w0 > eps) & (wh > eps)
    valid &= np.isfinite(hx) & np.isfinite(hy)
    return head[..., 0] - hx, head[..., 1] - hy, valid


def _stack(pairs):
    foot = np.array([p.foot for p in pairs], dtype=float)
    head = np.array([p.head for p in pairs], dtype=float)
    return foot, head


def _mse_terms(f, pitch, c, foot, head, h):
    dx, dy, valid = _head_residuals(f, pitch, c, foot, head, h)
    terms = np.where(valid, dx * dx + dy * dy, PENALTY)
    return terms, valid


def mse(P_or_cam, pairs, pedestrian_height: float = PEDESTRIAN_HEIGHT) -> float:
    """Summed squared head-prediction error over all pairs.

    Accepts a :class:`CameraParams` or a projection matrix built from one.
    Pairs that are degenerate under the candidate camera add ``PENALTY``.
    """
    if not pairs:
        raise EmptyInput("no foot/head pairs")
    cam = _as_camera(P_or_cam)
    foot, head = _stack(pairs)
    terms, _ = _mse_terms(cam.f, cam.pitch, cam.height, foot, head, pedestrian_height)
    return float(np.sum(terms))


def _as_camera(P_or_cam) -> CameraParams:
    if isinstance(P_or_cam, CameraParams):
        return P_or_cam
    P = np.asarray(P_or_cam, dtype=float)
    f = P[0, 0]
    pitch = math.atan2(P[2, 1], P[2, 2])
    c = -P[1, 3] / P[1, 1] if abs(P[1, 1]) > abs(P[2, 1]) * f else -P[2, 3] / P[2, 1]
    return CameraParams(float(f), float(pitch), float(c))


def _threads() -> int:
    try:
        n = int(os.environ.get("ROTAVAT_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else min(8, os.cpu_count() or 1)


def grid_search_calibrate(
    pairs,
    grid: CalibrationGrid,
    pedestrian_height: float = PEDESTRIAN_HEIGHT,
) -> CalibrationResult:
    """Exhaustive search of ``grid`` for the camera minimising :func:`mse`.

    Ties resolve to the lowest (f, pitch, height) lattice index.
    """
    if not pairs:
        raise EmptyInput("no foot/head pairs")
    foot, head = _stack(pairs)
    fs, pitches, cs = grid.axes()
    b = grid.bins_per_axis
    pg, cg = np.meshgrid(pitches, cs, indexing="ij")
    pg, cg = pg[..., None], cg[..., None]
    n_valid = np.zeros((b, b, b), dtype=np.int64)
    totals = np.empty((b, b, b))

    def slab(i):
        terms, valid = _mse_terms(fs[i], pg, cg, foot, head, pedestrian_height)
        totals[i] = terms.sum(axis=-1)
        n_valid[i] = valid.sum(axis=-1)

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(slab, range(b)))
    else:
        for i in range(b):
            slab(i)

    if not n_valid.any():
        raise AllDegenerate("every lattice point made every pair degenerate")
    # np.argmin returns the first minimum in C order: lexicographic tie-break
    i, j, k = np.unravel_index(int(np.argmin(totals)), totals.shape)
    cam = CameraParams(float(fs[i]), float(pitches[j]), float(cs[k]))
    dx, dy, valid = _head_residuals(cam.f, cam.pitch, cam.height, foot, head, pedestrian_height)
    residuals = [
        (p.person_id, float(a) if ok else math.nan, float(bb) if ok else math.nan)
        for p, a, bb, ok in zip(pairs, dx, dy, valid)
    ]
    return CalibrationResult(cam, mse(cam, pairs, pedestrian_height), b**3, residuals)


def calibration_from_dict(d) -> CameraParams:
    return CameraParams.from_dict(d)
