"""Pose and shape error metrics, all in centimeters.

* ``mpjpe``   root-aligned mean per-joint position error
* ``pa_mpjpe`` error after the best similarity (Procrustes) alignment
* ``pve``     root-aligned mean per-vertex error
* ``w_mpjpe`` / ``w_pve`` world-coordinate errors, no alignment at all

PVE follows the MPJPE convention (translate the prediction so its root joint
coincides with the ground truth root). Conventions differ across the
literature; this one keeps each W-metric the unaligned twin of its
counterpart.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateConfiguration, ShapeMismatch, UnmatchedPerson

METRIC_NAMES = ("mpjpe", "pa_mpjpe", "pve", "w_mpjpe", "w_pve")


@dataclass(eq=False)
class JointSet:
    points: np.ndarray
    root_index: int = 0

    def __post_init__(self):
        self.points = np.array(self.points, dtype=float).reshape(-1, 3)
        if len(self.points) == 0:
            raise ValueError("joint set is empty")
        if not 0 <= self.root_index < len(self.points):
            raise ValueError(f"root index {self.root_index} out of range")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("joint set has non-finite coordinates")

    @property
    def root(self) -> np.ndarray:
        return self.points[self.root_index]


@dataclass
class SimilarityTransform:
    scale: float
    rotation: np.ndarray
    translation: np.ndarray

    def apply(self, points) -> np.ndarray:
        return self.scale * np.asarray(points, dtype=float) @ self.rotation.T + self.translation


def _points(x):
    return x.points if isinstance(x, JointSet) else np.asarray(x, dtype=float).reshape(-1, 3)


def _check_shapes(a, b):
    if a.shape != b.shape:
        raise ShapeMismatch(f"point counts differ: {len(a)} vs {len(b)}")


def procrustes_align(source, target) -> SimilarityTransform:
    """Similarity ``s R x + t`` minimising the squared distance to ``target``.

    Umeyama's closed form; a reflection in the SVD solution is removed by
    flipping the direction of the smallest singular value.
    """
    X, Y = _points(source), _points(target)
    _check_shapes(X, Y)
    if len(X) < 3:
        raise DegenerateConfiguration("need at least 3 points")
    mx, my = X.mean(axis=0), Y.mean(axis=0)
    Xc, Yc = X - mx, Y - my
    var_x = (Xc**2).sum() / len(X)
    if var_x < 1e-12:
        raise DegenerateConfiguration("source points are coincident")
    cov = Yc.T @ Xc / len(X)
    U, D, Vt = np.linalg.svd(cov)
    S = np.ones(3)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        S[2] = -1.0
    R = (U * S) @ Vt
    scale = float((D * S).sum() / var_x)
    t = my - scale * R @ mx
    return SimilarityTransform(scale, R, t)


def _mean_dist(a, b) -> float:
    return float(np.linalg.norm(a - b, axis=-1).mean())


def mpjpe(pred: JointSet, gt: JointSet) -> float:
    _check_shapes(pred.points, gt.points)
    return _mean_dist(pred.points - pred.root + gt.root, gt.points)


def pa_mpjpe(pred: JointSet, gt: JointSet) -> float:
    T = procrustes_align(pred, gt)
    return _mean_dist(T.apply(pred.points), gt.points)


def w_mpjpe(pred, gt) -> float:
    a, b = _points(pred), _points(gt)
    _check_shapes(a, b)
    return _mean_dist(a, b)


def pve(pred_vertices, gt_vertices, pred_root, gt_root) -> float:
    a, b = _points(pred_vertices), _points(gt_vertices)
    _check_shapes(a, b)
    return _mean_dist(a + (np.asarray(gt_root, float) - np.asarray(pred_root, float)), b)


def w_pve(pred_vertices, gt_vertices) -> float:
    a, b = _points(pred_vertices), _points(gt_vertices)
    _check_shapes(a, b)
    return _mean_dist(a, b)


@dataclass
class MetricReport:
    per_person: dict[str, dict[str, float]] = field(default_factory=dict)
    aggregate: dict[str, float] = field(default_factory=dict)
    person_count: int = 0

    def to_dict(self):
        return {
            "units": "cm",
            "per_person": self.per_person,
            "aggregate": self.aggregate,
            "person_count": self.person_count,
        }


def joint_set(mesh) -> JointSet:
    points, root = mesh.joint_array()
    return JointSet(points, root)


def evaluate_mesh(pred, gt) -> dict[str, float]:
    if list(pred.joints) != list(gt.joints):
        raise ShapeMismatch(f"{pred.person_id!r}: joint names differ")
    if pred.vertices.shape != gt.vertices.shape:
        raise ShapeMismatch(
            f"{pred.person_id!r}: vertex counts differ ({len(pred.vertices)} vs {len(gt.vertices)})"
        )
    pj, gj = joint_set(pred), joint_set(gt)
    return {
        "mpjpe": mpjpe(pj, gj),
        "pa_mpjpe": pa_mpjpe(pj, gj),
        "pve": pve(pred.vertices, gt.vertices, pred.root, gt.root),
        "w_mpjpe": w_mpjpe(pj, gj),
        "w_pve": w_pve(pred.vertices, gt.vertices),
    }


def evaluate_scene(pred, gt) -> MetricReport:
    """Per-person metrics matched by ``person_id`` and their unweighted mean."""
    gt_by_id = {m.person_id: m for m in gt.meshes}
    per_person = {}
    for m in pred.meshes:
        if m.person_id not in gt_by_id:
            raise UnmatchedPerson(f"{m.person_id!r} has no ground truth")
        per_person[m.person_id] = evaluate_mesh(m, gt_by_id[m.person_id])
    if per_person:
        aggregate = {k: float(np.mean([v[k] for v in per_person.values()])) for k in METRIC_NAMES}
    else:
        aggregate = {k: 0.0 for k in METRIC_NAMES}
    return MetricReport(per_person, aggregate, len(per_person))
