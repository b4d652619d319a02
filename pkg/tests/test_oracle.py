import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matprod_anytime.boundary import BoundaryParams, StepSchedule, anytime_boundary_curve, max_step_constant
from matprod_anytime.linalg import expected_product, inverse_expected_product, operator_norm
from matprod_anytime.oracle import (
    EnumerationSizeError,
    enumerate_paths,
    exact_crossing_probability,
    martingale_check,
    submartingale_check,
)
from matprod_anytime.streams import FiniteSupport

from conftest import A1, A2, random_psd


def _brute_force_paths(dist, etas):
    """Every path by itertools.product, first step most significant."""
    d = dist.d
    out = []
    for combo in itertools.product(range(dist.m), repeat=len(etas)):
        Z = np.eye(d)
        for j, eta in zip(combo, etas):
            Z = (np.eye(d) + eta * dist.atoms[j]) @ Z
        out.append((math.prod(dist.probs[j] for j in combo), Z))
    return out


def test_single_atom_table():
    dist = FiniteSupport([A1], [1.0])
    t = enumerate_paths(dist, StepSchedule.constant(0.1), 5)
    assert len(t) == 1 and t.probs[0] == 1.0
    assert np.max(t.max_dev) <= 1e-14


def test_scalar_four_paths(scalar_02):
    t = enumerate_paths(scalar_02, StepSchedule.constant(1.0), 2)
    assert t.Z.ravel().tolist() == [1.0, 3.0, 3.0, 9.0]
    assert t.probs.tolist() == [0.25] * 4
    assert t.mean.item() == 4.0
    assert t.dev_at(2).tolist() == [3.0, 1.0, 1.0, 5.0]
    assert t.dev_at(1).tolist() == [1.0, 1.0, 1.0, 1.0]


def test_table_matches_brute_force(noncommuting_pair):
    t = enumerate_paths(noncommuting_pair, StepSchedule.constant(0.3), 3)
    t2 = enumerate_paths(noncommuting_pair, StepSchedule.constant(0.2), 3)
    brute = _brute_force_paths(noncommuting_pair, [0.3] * 3)
    for (p, Z), pz, Zz in zip(brute, t.probs, t.Z):
        assert p == pytest.approx(pz, rel=1e-15)
        assert np.allclose(Z, Zz, atol=1e-14)
    I = np.eye(2)
    S = noncommuting_pair.mean
    closed = (I + 0.2 * S) @ (I + 0.2 * S) @ (I + 0.2 * S)
    assert np.max(np.abs(t2.mean - closed)) <= 1e-12


@given(st.integers(1, 3), st.integers(2, 3), st.integers(1, 5), st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_mean_is_spectral_closed_form(d, m, n, seed):
    rng = np.random.default_rng(seed)
    atoms = [random_psd(rng, d, rank=1) for _ in range(m)]
    probs = rng.dirichlet(np.ones(m))
    probs[-1] = 1.0 - probs[:-1].sum()
    dist = FiniteSupport(atoms, probs)
    sched = StepSchedule.polynomial(float(rng.uniform(0.05, 0.5)), 0.5)
    t = enumerate_paths(dist, sched, n)
    assert math.fsum(t.probs) == pytest.approx(1.0, abs=1e-12)
    E = expected_product(dist.mean, sched.etas(n))
    assert np.max(np.abs(t.mean - E)) <= 1e-10 * (1 + np.max(np.abs(E)))


def test_cap():
    dist = FiniteSupport([[[0.0]], [[1.0]], [[2.0]]], [0.2, 0.3, 0.5])
    with pytest.raises(EnumerationSizeError, match="3\\^5 = 243"):
        enumerate_paths(dist, StepSchedule.constant(0.1), 5, cap=200)


def test_log_space_probabilities():
    dist = FiniteSupport([[[0.0]], [[2.0]]], [1 - 1e-200, 1e-200])
    t = enumerate_paths(dist, StepSchedule.constant(0.1), 4)
    assert math.fsum(t.probs) == pytest.approx(1.0, abs=1e-12)
    assert t.probs[1] == pytest.approx((1 - 1e-200) ** 3 * 1e-200, rel=1e-12)


def test_crossing_examples(scalar_02):
    t = enumerate_paths(scalar_02, StepSchedule.constant(1.0), 2)
    assert exact_crossing_probability(t, [math.inf, 5.0], "fixed_time") == 0.25
    assert exact_crossing_probability(t, [math.inf, 3.0], "fixed_time") == 0.5
    assert exact_crossing_probability(t, [1.0, math.inf], "anytime") == 1.0
    assert exact_crossing_probability(t, [math.inf] * 2, "anytime") == 0.0
    t1 = enumerate_paths(scalar_02, StepSchedule.constant(1.0), 1)
    assert exact_crossing_probability(t1, [0.0], "anytime") == 1.0
    with pytest.raises(ValueError):
        exact_crossing_probability(t, [1.0], "anytime")


@given(st.lists(st.floats(0, 8), min_size=4, max_size=4))
@settings(max_examples=60, deadline=None)
def test_anytime_at_least_fixed(thr):
    dist = FiniteSupport([[[0.0]], [[1.0]], [[3.0]]], [0.2, 0.3, 0.5])
    t = enumerate_paths(dist, StepSchedule.constant(0.7), 4)
    assert exact_crossing_probability(t, thr, "anytime") >= exact_crossing_probability(t, thr, "fixed_time")


def test_martingale_examples(scalar_02, noncommuting_pair):
    assert martingale_check(scalar_02, StepSchedule.constant(1.0), 10) <= 1e-10
    assert martingale_check(noncommuting_pair, StepSchedule.constant(0.3), 8) <= 1e-10
    assert martingale_check(FiniteSupport([A1], [1.0]), StepSchedule.constant(0.3), 6) <= 1e-15
    assert martingale_check(noncommuting_pair, StepSchedule.constant(0.0), 6) == 0.0


def test_submartingale_examples(scalar_02, noncommuting_pair):
    assert submartingale_check(scalar_02, StepSchedule.constant(1.0), 1) == 0.5
    assert submartingale_check(scalar_02, StepSchedule.constant(1.0), 10) >= -1e-10
    assert submartingale_check(noncommuting_pair, StepSchedule.constant(0.3), 8) >= -1e-10
    assert submartingale_check(noncommuting_pair, StepSchedule.constant(0.0), 4) == 0.0
    assert abs(submartingale_check(FiniteSupport([A1], [1.0]), StepSchedule.constant(0.3), 6)) <= 1e-15


@given(st.integers(1, 4), st.integers(0, 2**31), st.floats(0.0, 1.0), st.integers(0, 6))
@settings(max_examples=40, deadline=None)
def test_one_step_martingale_identity(d, seed, eta, n):
    """sum_j p_j (E_{n+1}^{-1} (I + eta A_j) Z - I) == E_n^{-1} Z - I for any fixed Z."""
    rng = np.random.default_rng(seed)
    atoms = [random_psd(rng, d, rank=1) for _ in range(3)]
    dist = FiniteSupport(atoms, [0.2, 0.3, 0.5])
    etas = list(rng.uniform(0, 0.5, size=n))
    Z = rng.normal(size=(d, d))
    Y = inverse_expected_product(dist.mean, etas) @ Z - np.eye(d)
    Einv_next = inverse_expected_product(dist.mean, etas + [eta])
    cond = sum(p * (Einv_next @ (np.eye(d) + eta * A) @ Z - np.eye(d)) for p, A in zip(dist.probs, dist.atoms))
    assert np.max(np.abs(cond - Y)) <= 1e-10 * (1 + np.max(np.abs(Z)))


def test_sandwich_on_every_path(noncommuting_pair):
    t = enumerate_paths(noncommuting_pair, StepSchedule.constant(0.2), 8)
    for k in range(1, 9):
        dev, ydev = t.dev_levels[k - 1], t.ydev_levels[k - 1]
        assert np.all(ydev <= dev * (1 + 1e-9))
        assert np.all(dev <= t.E_norm[k - 1] * ydev * (1 + 1e-9))


def test_soundness_at_oracle_scale():
    dist = FiniteSupport([[[0.6]], [[1.4]]], [0.5, 0.5])
    p = BoundaryParams(delta=0.2, d=1, L=0.4, eta_epoch=2.0, alpha=2.0, lambda_max=1.0)
    c = max_step_constant(StepSchedule.constant, p, 16)
    sched = StepSchedule.constant(c)
    t = enumerate_paths(dist, sched, 16)
    b = anytime_boundary_curve(16, sched, p)
    assert exact_crossing_probability(t, b, "anytime") <= 0.2
