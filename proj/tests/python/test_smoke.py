"""Smoke tests for the python extension module."""

import math

import numpy as np
import pytest

try:
    import ucmctrack as uc
except ImportError:  # dev tree: the module sits next to the build outputs
    import _ucmctrack as uc


@pytest.fixture
def camera():
    extr = uc.CameraExtrinsics()
    phi = math.radians(30.0)
    s, c = math.sin(phi), math.cos(phi)
    extr.R = np.array([[1.0, 0.0, 0.0], [0.0, -s, -c], [0.0, c, -s]])
    extr.T = np.array([0.0, 5.0 * c, 5.0 * s])
    return uc.make_camera(uc.CameraIntrinsics(1000.0, 1000.0, 960.0, 540.0), extr, 0.0)


def test_projection_round_trip(camera):
    x, y, gamma = uc.image_to_ground(camera, 1100.0, 700.0)
    assert gamma > 0
    u, v = uc.ground_to_image(camera, x, y)
    assert abs(u - 1100.0) < 1e-6
    assert abs(v - 700.0) < 1e-6


def test_map_measurement_is_correlated(camera):
    pos, cov = uc.map_measurement(camera, 1200.0, 800.0, 50.0, 120.0, 0.05)
    assert pos.shape == (2,)
    assert cov.shape == (2, 2)
    assert cov[0, 1] != 0.0  # tilt induces correlation
    eigvals = np.linalg.eigvalsh(cov)
    assert eigvals.min() >= -1e-12


def test_mmd_matches_closed_form():
    S = np.array([[2.0, 0.5], [0.5, 1.0]])
    d = uc.mmd(np.array([1.0, 2.0]), S, np.zeros(4), np.zeros((4, 4)))
    assert d == pytest.approx(4.0 + math.log(1.75), abs=1e-9)


def test_solve_assignment_rectangular():
    cost = np.array([[0.0, 10.0, np.inf], [10.0, 0.0, np.inf]])
    matches, unmatched_tracks, unmatched_dets = uc.solve_assignment(cost)
    assert matches == [(0, 0), (1, 1)]
    assert unmatched_tracks == []
    assert unmatched_dets == [2]


def test_tracker_pipeline(camera):
    cfg = uc.TrackerConfig()
    cfg.fps = 30.0
    tracker = uc.Tracker(camera, cfg)
    out = tracker.step(1, [uc.Detection(1, 930.0, 600.0, 60.0, 140.0, 0.9)])
    assert len(out.boxes) == 1
    assert out.boxes[0].id == 1
    out2 = tracker.step(2, [uc.Detection(2, 932.0, 601.0, 60.0, 140.0, 0.9)])
    assert len(out2.boxes) == 1
    assert out2.boxes[0].id == 1
    assert tracker.stats.tracks_created == 1


def test_synthetic_end_to_end():
    scenario = uc.default_scenario()
    cfg = uc.TrackerConfig()
    cfg.fps = scenario.fps
    report = uc.run_synthetic(scenario, seed=3, config=cfg)
    assert report.id_switches == 0
    assert report.idf1 >= 0.99
