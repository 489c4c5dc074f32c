import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotavat.calibration import (
    PENALTY,
    CalibrationGrid,
    FootHeadPair,
    _head_residuals,
    default_grid,
    extract_foot_head,
    grid_search_calibrate,
    mse,
    predict_head,
    solve_ground_position,
)
from rotavat.errors import AllDegenerate, DegenerateDepth, EmptyInput, HorizonDegenerate, MissingJoint
from rotavat.geometry import CameraParams, build_projection, project_point
from rotavat.scene import Mesh
from rotavat.synth import SceneSpec, generate_scene, observed_pairs

from conftest import homogeneous_project, pedestrian

ZERO_PITCH = CameraParams(1000, 0.0, 1000)


def lattice_camera(grid, i, j, k):
    fs, ps, cs = grid.axes()
    return CameraParams(float(fs[i]), float(ps[j]), float(cs[k]))


def synthetic_pairs(cam, n=20, seed=0, region=(-500, 500, 600, 2500)):
    spec = SceneSpec(person_count=n, camera=cam, seed=seed, ground_region=region)
    pairs, skipped = observed_pairs(generate_scene(spec, quantized=False), cam)
    assert not skipped
    return pairs


def test_extract_matches_direct_projection(cam):
    m = pedestrian(x=120, z=1800)
    P = build_projection(cam)
    pair = extract_foot_head(m, P)
    foot, _ = project_point(P, (m.joint("foot_left") + m.joint("foot_right")) / 2)
    head, _ = project_point(P, m.joint("head"))
    np.testing.assert_allclose(pair.foot, foot)
    np.testing.assert_allclose(pair.head, head)


def test_extract_missing_joint(cam):
    m = Mesh("x", [[0, 0, 1000], [0, 170, 1000]], {"foot_left": 0, "head": 1})
    with pytest.raises(MissingJoint):
        extract_foot_head(m, build_projection(cam))


def test_extract_behind_camera(cam):
    with pytest.raises(DegenerateDepth):
        extract_foot_head(pedestrian(z=-2000), build_projection(cam))


def test_solve_ground_example():
    P = build_projection(ZERO_PITCH)
    X, Z = solve_ground_position(P, (100, -500))
    assert (X, Z) == pytest.approx((200, 2000), rel=1e-12)
    # reproject through the closed-form matrix
    img, _ = homogeneous_project(P, (X, 0, Z))
    np.testing.assert_allclose(img, [100, -500])


@settings(max_examples=200)
@given(
    st.floats(200, 5000), st.floats(-0.7, -0.05), st.floats(100, 3000),
    st.floats(-1000, 1000), st.floats(300, 5000),
)  # fmt: skip
def test_solve_ground_round_trip(f, pitch, c, X, Z):
    cam = CameraParams(f, pitch, c)
    P = build_projection(cam)
    img, _ = project_point(P, (X, 0, Z))
    assert solve_ground_position(P, img) == pytest.approx((X, Z), abs=1e-6)


def test_solve_ground_on_horizon():
    with pytest.raises(HorizonDegenerate):
        solve_ground_position(build_projection(ZERO_PITCH), (10, 0))


def test_predict_head_example():
    P = build_projection(ZERO_PITCH)
    head = predict_head(P, (100, -500), 170)
    oracle, _ = homogeneous_project(P, (200, 170, 2000))
    np.testing.assert_allclose(head, [100, -415])
    np.testing.assert_allclose(head, oracle)


@given(st.floats(100, 5000), st.floats(50, 4000), st.floats(-400, 400), st.floats(-400, -1))
def test_zero_pitch_keeps_x(f, c, x, y):
    P = build_projection(CameraParams(f, 0.0, c))
    assert predict_head(P, (x, y), 170)[0] == pytest.approx(x, rel=1e-12, abs=1e-9)


def test_predict_head_consistent_with_generator(cam):
    P = build_projection(cam)
    for m in [pedestrian(x=x, z=z, yaw=x) for x, z in [(-300, 900), (0, 1500), (400, 2600)]]:
        pair = extract_foot_head(m, P)
        np.testing.assert_allclose(predict_head(P, pair.foot), pair.head, atol=1e-9)


def test_kernel_matches_geometric_route(rng):
    # dual route: broadcasting closed form vs inverse-matrix path
    for _ in range(200):
        cam = CameraParams(rng.uniform(100, 6000), rng.uniform(-0.78, 0.3), rng.uniform(50, 4000))
        foot = rng.uniform(-600, 600, 2)
        try:
            head = predict_head(build_projection(cam), foot)
        except (DegenerateDepth, HorizonDegenerate):
            _, _, valid = _head_residuals(cam.f, cam.pitch, cam.height, foot, np.zeros(2), 170.0)
            assert not valid
            continue
        dx, dy, valid = _head_residuals(cam.f, cam.pitch, cam.height, foot, np.zeros(2), 170.0)
        assert valid
        np.testing.assert_allclose([-dx, -dy], head, rtol=1e-9, atol=1e-9)


def test_mse_examples():
    P = build_projection(ZERO_PITCH)
    exact = FootHeadPair((100, -500), (100, -415))
    assert mse(P, [exact]) == pytest.approx(0, abs=1e-12)
    assert mse(P, [FootHeadPair((100, -500), (103, -411))]) == pytest.approx(25)
    two = [FootHeadPair((100, -500), (101, -415)), FootHeadPair((100, -500), (100, -413))]
    assert mse(P, two) == pytest.approx(5)
    with pytest.raises(EmptyInput):
        mse(P, [])


def test_mse_penalty_for_degenerate_pair():
    P = build_projection(ZERO_PITCH)
    # above the horizon at zero pitch: ground point would be behind the camera
    assert mse(P, [FootHeadPair((0, 50), (0, 60))]) == PENALTY


@given(st.lists(st.tuples(st.floats(-300, 300), st.floats(-400, -20), st.floats(-20, 20), st.floats(1, 80)), min_size=2, max_size=8))
def test_mse_nonnegative_and_additive(raw):
    P = build_projection(ZERO_PITCH)
    pairs = [FootHeadPair((x, y), (x + dx, y + dy)) for x, y, dx, dy in raw]
    k = len(pairs) // 2
    total = mse(P, pairs)
    assert total >= 0
    assert total == pytest.approx(mse(P, pairs[:k]) + mse(P, pairs[k:]), rel=1e-9, abs=1e-9)


def test_default_grid():
    g = default_grid(1000)
    assert g.f_range == (100, 6000)
    assert g.pitch_range == (-math.pi / 4, math.pi / 2)
    assert g.height_range == (50, 4000)
    assert g.bins_per_axis == 50
    assert default_grid(480).f_range == pytest.approx((48, 2880))


def test_grid_validation():
    with pytest.raises(ValueError):
        CalibrationGrid((1, 1), (0, 1), (0, 1), 5)
    with pytest.raises(ValueError):
        CalibrationGrid((1, 2), (0, 1), (0, 1), 1)


def test_on_lattice_recovery_and_evaluation_count():
    grid = default_grid(960)
    truth = lattice_camera(grid, 10, 10, 10)
    res = grid_search_calibrate(synthetic_pairs(truth), grid)
    assert res.evaluations == 125000
    assert res.params == truth
    assert res.mse <= 1e-10


def test_spec_lattice_indices_recovered():
    grid = default_grid(960)
    truth = lattice_camera(grid, 10, 12, 20)
    res = grid_search_calibrate(synthetic_pairs(truth, seed=4), grid)
    assert res.params == truth


def test_off_lattice_within_one_step():
    grid = default_grid(960)
    fs, ps, cs = grid.axes()
    steps = (fs[1] - fs[0], ps[1] - ps[0], cs[1] - cs[0])
    truth = CameraParams(1111.0, -0.37, 777.0)
    res = grid_search_calibrate(synthetic_pairs(truth, seed=2), grid)
    got = (res.params.f, res.params.pitch, res.params.height)
    for g, t, s in zip(got, (truth.f, truth.pitch, truth.height), steps):
        assert abs(g - t) <= s


def test_single_pair_result_consistent():
    grid = default_grid(960).with_bins(12)
    pairs = synthetic_pairs(CameraParams(900, -0.3, 500), n=1)
    res = grid_search_calibrate(pairs, grid)
    assert res.mse == mse(res.params, pairs)
    assert res.mse >= 0


def test_recomputed_mse_matches():
    grid = default_grid(960).with_bins(20)
    pairs = synthetic_pairs(CameraParams(1300, -0.25, 800), seed=8)
    res = grid_search_calibrate(pairs, grid)
    assert res.mse == pytest.approx(mse(res.params, pairs), rel=1e-12)
    assert len(res.per_pair_residuals) == len(pairs)
    dx2 = sum(dx * dx + dy * dy for _, dx, dy in res.per_pair_residuals)
    assert dx2 == pytest.approx(res.mse, rel=1e-9)


def test_monotone_refinement():
    # 99 bins with shared endpoints contain every 50-bin lattice point
    coarse = default_grid(960)
    fine = coarse.with_bins(99)
    np.testing.assert_allclose(fine.axes()[0][::2], coarse.axes()[0])
    pairs = synthetic_pairs(CameraParams(1234.5, -0.41, 654.3), seed=5)
    assert grid_search_calibrate(pairs, fine).mse <= grid_search_calibrate(pairs, coarse).mse


def test_deterministic_and_thread_independent(monkeypatch):
    grid = default_grid(960).with_bins(25)
    pairs = synthetic_pairs(CameraParams(1500, -0.2, 900), seed=6)
    monkeypatch.setenv("ROTAVAT_THREADS", "1")
    a = grid_search_calibrate(pairs, grid)
    monkeypatch.setenv("ROTAVAT_THREADS", "4")
    b = grid_search_calibrate(pairs, grid)
    assert a.params == b.params
    assert a.mse == b.mse
    assert a.to_dict() == b.to_dict()


def test_tie_break_lowest_index():
    # at zero pitch the prediction does not depend on f; power-of-two focal
    # values make the two candidates bitwise tied
    grid = CalibrationGrid((128.0, 256.0), (0.0, 0.1), (1000.0, 2000.0), 2)
    pairs = [FootHeadPair((100, -500), (100, -415)), FootHeadPair((-40, -250), (-40, -207.5))]
    a = mse(CameraParams(128.0, 0.0, 1000.0), pairs)
    assert a == mse(CameraParams(256.0, 0.0, 1000.0), pairs)
    res = grid_search_calibrate(pairs, grid)
    assert res.params == CameraParams(128.0, 0.0, 1000.0)
    assert res.evaluations == 8


def test_all_degenerate_and_empty():
    grid = CalibrationGrid((100.0, 200.0), (0.0, 0.1), (50.0, 60.0), 3)
    # far above every candidate horizon: ground point behind the camera
    with pytest.raises(AllDegenerate):
        grid_search_calibrate([FootHeadPair((0, 1e6), (0, 2e6))], grid)
    with pytest.raises(EmptyInput):
        grid_search_calibrate([], grid)
