import math

import numpy as np
import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rotavat.errors import DegenerateDepth, HorizonDegenerate, ParallelLines
from rotavat.geometry import (
    CameraParams,
    _projection,
    back_project,
    back_project_ray,
    build_projection,
    camera_center,
    closest_points_between_lines,
    depth_from_known_height,
    project_point,
)

from conftest import cameras, homogeneous_project


def test_identity_projection():
    assert np.array_equal(_projection(1.0, 0.0, 0.0), np.eye(4))


def test_projection_rows_zero_pitch():
    P = build_projection(CameraParams(1000, 0.0, 1000))
    np.testing.assert_array_equal(P[1], [0, 1000, 0, -1e6])
    np.testing.assert_array_equal(P[2], [0, 0, 1, 0])


def test_projection_rows_quarter_turn():
    P = build_projection(CameraParams(1000, math.pi / 2, 100))
    np.testing.assert_allclose(P[1], [0, 0, -1000, 0], atol=1e-9)
    np.testing.assert_allclose(P[2], [0, 1, 0, -100], atol=1e-12)


@pytest.mark.parametrize("bad", [dict(f=0, pitch=0, height=1), dict(f=1, pitch=0, height=0), dict(f=1, pitch=2, height=1)])
def test_camera_invariants(bad):
    with pytest.raises(ValueError):
        CameraParams(**bad)


def test_determinant_is_f_squared():
    f, t, c = sympy.symbols("f theta c", positive=True)
    P = sympy.Matrix(
        [
            [f, 0, 0, 0],
            [0, f * sympy.cos(t), -f * sympy.sin(t), -f * c * sympy.cos(t)],
            [0, sympy.sin(t), sympy.cos(t), -c * sympy.sin(t)],
            [0, 0, 0, 1],
        ]
    )
    assert sympy.simplify(P.det() - f**2) == 0
    num = build_projection(CameraParams(750, 0.4, 321))
    assert np.linalg.det(num) == pytest.approx(750**2, rel=1e-12)


@pytest.mark.parametrize("c", [1000.0, 170.0])
def test_camera_center(c):
    cam = CameraParams(800, 0.2, c)
    np.testing.assert_array_equal(camera_center(cam), [0, c, 0])


@given(cameras)
def test_center_has_zero_depth(cam):
    P = build_projection(cam)
    C = camera_center(cam)
    # w formula written out: sin(t) Y + cos(t) Z - c sin(t)
    w = math.sin(cam.pitch) * C[1] + math.cos(cam.pitch) * C[2] - cam.height * math.sin(cam.pitch)
    assert abs(w) < 1e-9 * cam.f
    with pytest.raises(DegenerateDepth):
        project_point(P, C)


def test_project_examples():
    img, w = project_point(_projection(1000.0, 0.0, 0.0), (100, 0, 1000))
    np.testing.assert_allclose(img, [100, 0])
    assert w == 1000
    img, w = project_point(build_projection(CameraParams(1000, 0.0, 170)), (0, 170, 1000))
    np.testing.assert_allclose(img, [0, 0], atol=1e-12)
    assert w == 1000
    P = build_projection(CameraParams(1000, 0.0, 1000))
    img, w = project_point(P, (200, 0, 2000))
    oracle, w_oracle = homogeneous_project(P, (200, 0, 2000))
    np.testing.assert_allclose(img, [100, -500])
    np.testing.assert_allclose(img, oracle)
    assert w == w_oracle == 2000


@given(
    st.floats(100, 5000),
    st.floats(-500, 500),
    st.floats(-500, 500),
    st.floats(1, 1e4),
)
def test_zero_pitch_is_textbook_pinhole(f, X, Y, Z):
    P = _projection(f, 0.0, 0.0)
    img, w = project_point(P, (X, Y, Z))
    np.testing.assert_allclose(img, [f * X / Z, f * Y / Z], rtol=1e-12, atol=1e-9)


def test_depth_from_height_example():
    P = build_projection(CameraParams(1000, 0.0, 1000))
    assert depth_from_known_height(P, (100, -500), 0.0) == pytest.approx(2000, rel=1e-12)


def test_horizon_degenerate_zero_pitch():
    P = build_projection(CameraParams(1000, 0.0, 1000))
    with pytest.raises(HorizonDegenerate):
        depth_from_known_height(P, (37.0, 0.0), 1000.0)


@settings(max_examples=300)
@given(cameras, st.floats(-3000, 3000), st.floats(0, 300), st.floats(100, 8000))
def test_depth_round_trip(cam, X, Y, Z):
    P = build_projection(cam)
    h = P @ np.array([X, Y, Z, 1.0])
    assume(h[2] > cam.eps_w * 10)
    img, w = project_point(P, (X, Y, Z))
    try:
        w_rec = depth_from_known_height(P, img, Y)
    except HorizonDegenerate:
        assume(False)
    assert w_rec == pytest.approx(w, rel=1e-9)
    np.testing.assert_allclose(back_project(P, img, w_rec), [X, Y, Z], rtol=1e-8, atol=1e-6)


def test_optical_axis_ray():
    P = _projection(1000, 0.0, 0.0)
    origin, d = back_project_ray(P, (0, 0))
    np.testing.assert_allclose(origin, 0, atol=1e-15)
    np.testing.assert_allclose(d, [0, 0, 1])


@settings(max_examples=200)
@given(cameras, st.floats(-2000, 2000), st.floats(0, 300), st.floats(200, 8000), st.floats(0.1, 10))
def test_ray_round_trip(cam, X, Y, Z, t_scale):
    P = build_projection(cam)
    assume((P @ [X, Y, Z, 1])[2] > 1.0)
    img, _ = project_point(P, (X, Y, Z))
    origin, d = back_project_ray(P, img)
    # the source point lies on the ray
    v = np.array([X, Y, Z]) - origin
    assert np.linalg.norm(v - (v @ d) * d) < 1e-9 * max(1.0, np.linalg.norm(v))
    assert v @ d > 0
    # any point further along reprojects to the same image point
    q = origin + t_scale * (v @ d) * d
    img_q, _ = project_point(P, q)
    np.testing.assert_allclose(img_q, img, atol=1e-9 * max(1.0, np.abs(img).max()))


def test_back_projected_depths_collinear_with_origin(rng):
    for _ in range(50):
        cam = CameraParams(rng.uniform(200, 4000), rng.uniform(-0.7, 0.7), rng.uniform(100, 3000))
        P = build_projection(cam)
        img = rng.uniform(-300, 300, 2)
        origin, d = back_project_ray(P, img)
        a = back_project(P, img, 500.0)
        b = back_project(P, img, 3000.0)
        u, v = a - origin, b - origin
        assert np.linalg.norm(np.cross(u, v)) < 1e-9 * np.linalg.norm(u) * np.linalg.norm(v)


def test_closest_points_intersecting():
    p = np.array([1.0, 2.0, 3.0])
    pa, pb, dist = closest_points_between_lines(p - [1, 1, 0], [1, 1, 0], p + [0, 2, 5], [0, 2, 5])
    np.testing.assert_allclose(pa, p)
    np.testing.assert_allclose(pb, p)
    assert dist == pytest.approx(0, abs=1e-12)


def test_closest_points_parallel():
    with pytest.raises(ParallelLines):
        closest_points_between_lines([0, 0, 0], [1, 0, 0], [0, 1, 0], [2, 0, 0])


def test_closest_points_skew_against_grid_oracle():
    a0, ad = np.zeros(3), np.array([0.0, 0.0, 1.0])
    b0, bd = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])

    # oracle: coarse grid over (s, t) then a finer one around the best cell
    best = None
    lo_s, lo_t, span = -2.0, -2.0, 4.0
    for _ in range(6):
        ss = np.linspace(lo_s, lo_s + span, 81)
        tt = np.linspace(lo_t, lo_t + span, 81)
        S, T = np.meshgrid(ss, tt, indexing="ij")
        d2 = ((a0 + S[..., None] * ad) - (b0 + T[..., None] * bd)) ** 2
        d2 = d2.sum(-1)
        i, j = np.unravel_index(np.argmin(d2), d2.shape)
        best = (ss[i], tt[j], math.sqrt(d2[i, j]))
        span /= 10
        lo_s, lo_t = ss[i] - span / 2, tt[j] - span / 2
    pa, pb, dist = closest_points_between_lines(a0, ad, b0, bd)
    assert dist == pytest.approx(best[2], abs=1e-9) == pytest.approx(1.0)
    np.testing.assert_allclose(pa, a0 + best[0] * ad, atol=1e-6)
    np.testing.assert_allclose(pb, b0 + best[1] * bd, atol=1e-6)
    np.testing.assert_allclose(pa, [0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(pb, [1, 0, 0], atol=1e-15)
