import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matprod_anytime.boundary import StepSchedule
from matprod_anytime.oja import OjaState, oja_path, oja_step, run_oja_demo, sin2_error
from matprod_anytime.rng import StreamBatch
from matprod_anytime.streams import RankOneSphere, simulate_trajectory


def test_zero_step_keeps_w():
    w = np.array([0.6, 0.8])
    s = oja_step(OjaState(w), [3.0, -1.0], 0.0)
    assert np.array_equal(s.w, w) and s.n == 1


def test_eigendirection_is_fixed():
    w = np.array([0.6, 0.8])
    s = oja_step(OjaState(w), w, 1.0)
    assert np.allclose(s.w, w, atol=1e-15)


def test_orthogonal_data_leaves_w():
    s = oja_step(OjaState(np.array([1.0, 0.0])), [0.0, 1.0], 5.0)
    assert np.array_equal(s.w, [1.0, 0.0])


@given(st.integers(2, 6), st.integers(0, 2**31), st.floats(0, 10))
@settings(max_examples=50, deadline=None)
def test_unit_norm_after_step(d, seed, eta):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=d)
    s = OjaState(w / np.linalg.norm(w))
    for _ in range(5):
        s = oja_step(s, rng.normal(size=d), eta)
        assert abs(np.linalg.norm(s.w) - 1) <= 1e-12


def test_deterministic_stream_converges():
    v1 = np.array([1.0, 1.0]) / np.sqrt(2)
    err = oja_path(np.tile(v1, (50, 1)), [0.5] * 50, [1.0, 0.0], v1)
    assert np.all(np.diff(err) <= 0) and err[-1] < 1e-15


def test_zero_steps_keep_error():
    dist = RankOneSphere(np.diag([1.0, 0.5]))
    s = run_oja_demo(dist, StepSchedule.constant(0.0), 50, 1, init="random")
    assert np.allclose(s.sin2_error, s.initial_error, atol=1e-15)
    assert np.all(s.dev == 0.0)


def test_degenerate_top_eigenvalue():
    with pytest.raises(ValueError, match="degenerate"):
        run_oja_demo(RankOneSphere(np.eye(3)), StepSchedule.constant(0.1), 5, 0)


def test_median_error_decreases():
    dist = RankOneSphere(np.diag([1.0, 0.5]))
    sched = StepSchedule.fixed_horizon(3.0, 2000)
    runs = [run_oja_demo(dist, sched, 2000, seed, init="random") for seed in range(10)]
    assert np.median([r.sin2_error[-1] for r in runs]) < np.median([r.initial_error for r in runs])


def test_iterate_is_normalized_product_action():
    dist = RankOneSphere(np.diag([1.0, 0.7, 0.3]))
    sched = StepSchedule.constant(0.05)
    seed = 21
    s = run_oja_demo(dist, sched, 300, seed, init="random")
    # rebuild Z_n from the same stream
    rng = StreamBatch.for_trajectories(seed, [0])
    Z = np.eye(3)
    for eta in sched.etas(300):
        z = dist.sample_vectors(rng)[0]
        Z = Z + eta * np.outer(z, z) @ Z
    v = Z @ s.w0
    v /= np.linalg.norm(v)
    # chord length ~ angle; 1 - cos^2 would bottom out at sqrt(eps)
    chord = np.linalg.norm(v - np.sign(v @ s.w) * s.w)
    assert chord <= 1e-8
    rec = simulate_trajectory(dist, sched, 300, None, seed)
    assert np.array_equal(rec.dev, s.dev)


def test_boundary_nan_past_horizon():
    s = run_oja_demo(RankOneSphere(np.diag([1.0, 0.5])), StepSchedule.fixed_horizon(1.0, 100), 100, 0)
    assert np.isfinite(s.boundary[:64]).all() and np.isnan(s.boundary[64:]).all()


def test_sin2():
    assert sin2_error(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0
    assert sin2_error(np.array([1.0, 0.0]), np.array([-2.0, 0.0])) == 0.0
