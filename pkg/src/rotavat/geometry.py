"""Camera model and projection primitives.

World frame: Y is up, the ground is the plane ``Y = 0``, lengths are in
centimeters. The camera sits at ``(0, c, 0)`` and looks along +Z, pitched by
``theta`` about the world X axis. Image coordinates are mathematical: origin
at the principal point, y pointing up, same units as the focal length.

The projection matrix is::

    [[f, 0,          0,           0          ],
     [0, f cos(t),  -f sin(t),   -f c cos(t) ],
     [0, sin(t),     cos(t),     -c sin(t)   ],
     [0, 0,          0,           1          ]]

and a point projects through ``(w x, w y, w, 1) = P (X, Y, Z, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDepth, HorizonDegenerate, ParallelLines

# depth degeneracy threshold, relative to the focal length
EPS_W_REL = 1e-9
EPS_PARALLEL = 1e-12


@dataclass(frozen=True)
class CameraParams:
    f: float
    pitch: float
    height: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.f, self.pitch, self.height)):
            raise ValueError("camera parameters must be finite")
        if self.f <= 0:
            raise ValueError(f"focal length must be positive, got {self.f}")
        if self.height <= 0:
            raise ValueError(f"camera height must be positive, got {self.height}")
        # closed interval: the default calibration grid ends exactly at pi/2
        if not -math.pi / 2 <= self.pitch <= math.pi / 2:
            raise ValueError(f"pitch must lie in [-pi/2, pi/2], got {self.pitch}")

    @property
    def matrix(self) -> np.ndarray:
        return build_projection(self)

    @property
    def eps_w(self) -> float:
        return EPS_W_REL * self.f

    def to_dict(self):
        return {"f": self.f, "pitch": self.pitch, "height": self.height}

    @classmethod
    def from_dict(cls, d):
        return cls(f=float(d["f"]), pitch=float(d["pitch"]), height=float(d["height"]))


def _projection(f, pitch, c):
    # Unvalidated builder; also used for the identity example f=1, c=0.
    ct, st = math.cos(pitch), math.sin(pitch)
    return np.array(
        [
            [f, 0.0, 0.0, 0.0],
            [0.0, f * ct, -f * st, -f * c * ct],
            [0.0, st, ct, -c * st],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def build_projection(cam: CameraParams) -> np.ndarray:
    return _projection(cam.f, cam.pitch, cam.height)


def camera_center(cam: CameraParams) -> np.ndarray:
    return np.array([0.0, cam.height, 0.0])


def _focal(P):
    return P[0, 0]


def project_points(P: np.ndarray, pts) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised projection of an ``(N, 3)`` array. No degeneracy checks."""
    pts = np.asarray(pts, dtype=float)
    h = pts @ P[:3, :3].T + P[:3, 3]
    w = h[..., 2]
    return h[..., :2] / w[..., None], w


def project_point(P: np.ndarray, pt) -> tuple[np.ndarray, float]:
    """Project one world point, returning ``(image_xy, w)``.

    Raises DegenerateDepth when the point lies on the camera plane (``|w|``
    below ``1e-9 * f``). Points behind the camera (``w < 0``) are returned
    as-is; callers decide whether that is acceptable.
    """
    pt = np.asarray(pt, dtype=float)
    h = P @ np.append(pt, 1.0)
    w = float(h[2])
    if abs(w) < EPS_W_REL * _focal(P):
        raise DegenerateDepth(f"point {pt.tolist()} lies on the camera plane (w={w:g})")
    return h[:2] / w, w


def depth_from_known_height(P: np.ndarray, img, Y: float, P_inv: np.ndarray | None = None) -> float:
    """Depth weight ``w`` of the point seen at ``img`` whose height is ``Y``.

    Reads row 1 of the inverse projection: ``Y = w * Pinv[1, :3] . (x, y, 1) + Pinv[1, 3]``.
    """
    if P_inv is None:
        P_inv = np.linalg.inv(P)
    x, y = float(img[0]), float(img[1])
    row = P_inv[1]
    denom = row[0] * x + row[1] * y + row[2]
    # denom = (cos(t) y + f sin(t)) / f, so |denom| * f < eps_w * f is the image-unit test
    if abs(denom) < EPS_W_REL:
        raise HorizonDegenerate(
            f"image point ({x:g}, {y:g}) is on the horizon of the plane Y={Y:g}"
        )
    return (Y - row[3]) / denom


def back_project(P: np.ndarray, img, w: float, P_inv: np.ndarray | None = None) -> np.ndarray:
    """World point with image ``img`` and depth weight ``w``."""
    if P_inv is None:
        P_inv = np.linalg.inv(P)
    h = P_inv @ np.array([w * img[0], w * img[1], w, 1.0])
    return h[:3]


def back_project_ray(P: np.ndarray, img, P_inv: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Camera center and unit direction of the ray seen at ``img``.

    Points ``origin + t * direction`` with ``t > 0`` have positive depth.
    """
    if P_inv is None:
        P_inv = np.linalg.inv(P)
    origin = P_inv[:3, 3].copy()
    d = P_inv[:3, :3] @ np.array([img[0], img[1], 1.0])
    return origin, d / np.linalg.norm(d)


def closest_points_between_lines(a0, ad, b0, bd) -> tuple[np.ndarray, np.ndarray, float]:
    """Closest points of the infinite lines ``a0 + s ad`` and ``b0 + t bd``."""
    a0, ad, b0, bd = (np.asarray(v, dtype=float) for v in (a0, ad, b0, bd))
    ad = ad / np.linalg.norm(ad)
    bd = bd / np.linalg.norm(bd)
    cross = np.cross(ad, bd)
    denom = cross @ cross
    if math.sqrt(denom) < EPS_PARALLEL:
        raise ParallelLines("lines are parallel")
    r = b0 - a0
    b = ad @ bd
    d, e = ad @ r, bd @ r
    # normal equations for min |a0 + s ad - b0 - t bd|^2 with unit directions
    s = (d - b * e) / denom
    t = (b * d - e) / denom
    pa = a0 + s * ad
    pb = b0 + t * bd
    return pa, pb, float(np.linalg.norm(pa - pb))


def ground_horizon_y(cam: CameraParams) -> float:
    """Image y of the ground plane's vanishing line."""
    return -cam.f * math.tan(cam.pitch)


def rotation_matrix(axis, angle) -> np.ndarray:
    """Right-handed rotation by ``angle`` about the unit vector ``axis``."""
    k = np.asarray(axis, dtype=float)
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)
