"""RotAvat: put each predicted mesh upright on the ground without moving its
foot and head in the image.

Three phases per mesh:

(i)   homothety about the camera center bringing the foot midpoint to ``Y = 0``
      (image unchanged);
(ii)  rotation about the foot, inside the plane spanned by the camera center,
      foot and head, taking the foot->head direction onto the in-plane
      projection of world up;
(iii) uniform scaling about the foot so the head lands back on its original
      viewing ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlignmentError,
    DegeneratePlane,
    FootAtCameraHeight,
    HeadRayParallel,
    MissingJoint,
    NegativeScale,
    ParallelLines,
    VerticalProjectionNull,
)
from .geometry import (
    EPS_PARALLEL,
    CameraParams,
    back_project_ray,
    build_projection,
    camera_center,
    closest_points_between_lines,
    project_points,
    rotation_matrix,
)
from .scene import Scene

UP = np.array([0.0, 1.0, 0.0])
EPS_PLANE = 1e-6  # cm; both phase-(iii) lines lie in the white plane
EPS_VERTICAL = 1e-9


@dataclass
class AlignmentTrace:
    person_id: str
    p1: np.ndarray
    p1_prime: np.ndarray
    p2: np.ndarray
    p2_prime: np.ndarray
    p3: np.ndarray
    p3_prime: np.ndarray
    lambda_ground: float
    rotation_axis: np.ndarray
    rotation_angle: float
    scale_head: float
    reprojection_residual: float

    def to_dict(self):
        out = {"person_id": self.person_id}
        for name in ("p1", "p1_prime", "p2", "p2_prime", "p3", "p3_prime"):
            out[name] = [float(v) for v in getattr(self, name)]
        out["lambda_ground"] = float(self.lambda_ground)
        out["rotation_axis"] = [float(v) for v in self.rotation_axis]
        out["rotation_angle"] = float(self.rotation_angle)
        out["scale_head"] = float(self.scale_head)
        out["reprojection_residual"] = float(self.reprojection_residual)
        return out


def _scale_about(vertices, center, s):
    return center + s * (vertices - center)


def ground_homothety(mesh, cam: CameraParams):
    """Phase (i). Returns the scaled mesh and the factor ``lambda``."""
    C = camera_center(cam)
    y = mesh.foot_mid[1]
    gap = cam.height - y
    if gap < cam.eps_w:
        where = "at" if abs(gap) < cam.eps_w else "above"
        raise FootAtCameraHeight(f"foot midpoint of {mesh.person_id!r} is {where} camera height", "i")
    lam = cam.height / gap
    if lam == 1.0:
        return mesh, lam
    return mesh.with_vertices(_scale_about(mesh.vertices, C, lam)), lam


def white_plane(cam: CameraParams, p2, p2_prime) -> np.ndarray:
    """Unit normal of the plane through the camera center, foot and head.

    Sign convention: non-negative X component, ties broken by non-negative Z.
    """
    C = camera_center(cam)
    p2 = np.asarray(p2, dtype=float)
    a = C - p2
    b = np.asarray(p2_prime, dtype=float) - p2
    n = np.cross(a, b)
    norm = np.linalg.norm(n)
    if norm < EPS_PARALLEL * np.linalg.norm(a) * np.linalg.norm(b) or norm == 0:
        raise DegeneratePlane("camera, foot and head are collinear", "ii")
    n = n / norm
    if n[0] < 0 or (n[0] == 0 and n[2] < 0):
        n = -n
    return n


def in_plane_up(normal) -> np.ndarray:
    u = UP - (UP @ normal) * normal
    norm = np.linalg.norm(u)
    if norm < EPS_VERTICAL:
        raise VerticalProjectionNull("world up is orthogonal to the white plane", "ii")
    return u / norm


def upright_rotation(mesh, cam: CameraParams):
    """Phase (ii). Returns the rotated mesh, the axis and the signed angle."""
    p2, p2p = mesh.foot_mid, mesh.head
    n = white_plane(cam, p2, p2p)
    u = in_plane_up(n)
    d = (p2p - p2) / np.linalg.norm(p2p - p2)
    angle = math.atan2(float(n @ np.cross(d, u)), float(d @ u))
    R = rotation_matrix(n, angle)
    return mesh.with_vertices(p2 + (mesh.vertices - p2) @ R.T), n, angle


def head_restore_scale(mesh, cam: CameraParams, target_head_img):
    """Phase (iii). Scale about the foot so the head sits on the ray of ``target_head_img``.

    Returns the scaled mesh, the factor and the head's reprojection error.
    """
    P = build_projection(cam)
    p2, head = mesh.foot_mid, mesh.head
    axis = head - p2
    origin, ray = back_project_ray(P, target_head_img)
    try:
        pa, pb, dist = closest_points_between_lines(p2, axis, origin, ray)
    except ParallelLines:
        raise HeadRayParallel("foot-head line is parallel to the head viewing ray", "iii") from None
    if dist > EPS_PLANE:
        raise AlignmentError(f"foot-head line misses the head ray by {dist:.3g} cm", "iii")
    if (pb - origin) @ ray <= 0:
        raise AlignmentError("head ray meets the foot-head line behind the camera", "iii")
    s = float((pa - p2) @ axis / (axis @ axis))
    if s <= 0:
        raise NegativeScale(f"head scale factor {s:.6g} is not positive", "iii")
    out = mesh.with_vertices(_scale_about(mesh.vertices, p2, s))
    img, _ = project_points(P, out.head[None])
    residual = float(np.linalg.norm(img[0] - np.asarray(target_head_img, dtype=float)))
    return out, s, residual


def align_mesh(mesh, cam: CameraParams):
    """Run all three phases. Raises :class:`AlignmentError` tagged with the failing phase."""
    try:
        mesh.check_joints()
    except MissingJoint as exc:
        raise AlignmentError(str(exc), "input") from None
    P = build_projection(cam)
    p1, p1p = mesh.foot_mid, mesh.head
    imgs, w = project_points(P, np.stack([p1, p1p]))
    if np.any(w <= cam.eps_w):
        raise AlignmentError(f"foot or head of {mesh.person_id!r} is not in front of the camera", "input")
    foot_img, head_img = imgs

    m2, lam = ground_homothety(mesh, cam)
    p2, p2p = m2.foot_mid, m2.head
    m3, axis, angle = upright_rotation(m2, cam)
    m4, s, _ = head_restore_scale(m3, cam, head_img)

    out_imgs, _ = project_points(P, np.stack([m4.foot_mid, m4.head]))
    residual = float(max(np.linalg.norm(out_imgs[0] - foot_img), np.linalg.norm(out_imgs[1] - head_img)))
    trace = AlignmentTrace(
        person_id=mesh.person_id,
        p1=p1,
        p1_prime=p1p,
        p2=p2,
        p2_prime=p2p,
        p3=m4.foot_mid,
        p3_prime=m4.head,
        lambda_ground=lam,
        rotation_axis=axis,
        rotation_angle=angle,
        scale_head=s,
        reprojection_residual=residual,
    )
    return m4, trace


def align_scene(scene: Scene, cam: CameraParams):
    """Align every mesh independently.

    Failed meshes are carried over unchanged and reported as
    ``(person_id, error)``; the output scene carries ``cam``.
    """
    meshes, traces, errors = [], [], []
    for mesh in scene.meshes:
        try:
            aligned, trace = align_mesh(mesh, cam)
        except AlignmentError as exc:
            meshes.append(mesh)
            errors.append((mesh.person_id, exc))
            continue
        meshes.append(aligned)
        traces.append(trace)
    out = Scene(scene.width, scene.height, cam, meshes)
    return out, traces, errors
