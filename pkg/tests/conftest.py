import math

import numpy as np
import pytest
from hypothesis import strategies as st

from rotavat.geometry import CameraParams
from rotavat.scene import Mesh
from rotavat.synth import TEMPLATE_JOINTS, TEMPLATE_SEGMENTS, TEMPLATE_VERTICES

cameras = st.builds(
    CameraParams,
    f=st.floats(100, 6000),
    pitch=st.floats(-math.pi / 4, math.pi / 3),
    height=st.floats(50, 4000),
)


def homogeneous_project(P, pt):
    """Independent oracle: plain 4x4 multiply then divide."""
    X = np.array([pt[0], pt[1], pt[2], 1.0])
    wx, wy, w, _ = [sum(P[r][k] * X[k] for k in range(4)) for r in range(4)]
    return np.array([wx / w, wy / w]), w


def pedestrian(x=0.0, z=2000.0, height=170.0, pid="p", yaw=0.0):
    c, s = math.cos(yaw), math.sin(yaw)
    R = np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
    verts = height * TEMPLATE_VERTICES @ R.T + np.array([x, 0.0, z])
    return Mesh(pid, verts, TEMPLATE_JOINTS, TEMPLATE_SEGMENTS)


def segment_mesh(foot, head, pid="seg", n=5):
    """Degenerate mesh: points along the foot-head segment only."""
    foot, head = np.asarray(foot, float), np.asarray(head, float)
    pts = [foot + t * (head - foot) for t in np.linspace(0, 1, n)]
    verts = np.vstack([foot, foot, head, foot + 0.5 * (head - foot), *pts])
    joints = {"head": 2, "foot_left": 0, "foot_right": 1, "root": 3}
    return Mesh(pid, verts, joints, [(0, 2)])


@pytest.fixture
def cam():
    return CameraParams(1000.0, -0.3, 600.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
