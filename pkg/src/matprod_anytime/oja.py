"""Oja's streaming PCA run side by side with the matrix-product boundary.

The Oja iterate after n steps is the normalised action ``Z_n w_0`` of the
same product that the boundary controls. The demo co-reports the alignment
error, ``dev_n`` and the anytime boundary; it does not claim the boundary
certifies the PCA error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .boundary import BoundaryParams, StepSchedule, anytime_boundary_curve
from .linalg import operator_norms
from .rng import StreamBatch
from .streams import RankOneSphere, expected_path

__all__ = ["OjaState", "OjaSeries", "oja_step", "oja_path", "sin2_error", "run_oja_demo"]

_INIT_STREAM = (1 << 64) - 1
GAP_TOL = 1e-10


@dataclass(frozen=True)
class OjaState:
    w: np.ndarray
    n: int = 0


def oja_step(state: OjaState, x, eta: float) -> OjaState:
    """w <- (I + eta x x^T) w / ||(I + eta x x^T) w||."""
    x = np.asarray(x, dtype=np.float64)
    v = state.w + eta * x * (x @ state.w)
    return OjaState(v / np.linalg.norm(v), state.n + 1)


def sin2_error(w: np.ndarray, v1: np.ndarray) -> float:
    c = float(w @ v1) / (np.linalg.norm(w) * np.linalg.norm(v1))
    return max(0.0, 1.0 - c * c)


def oja_path(vectors, etas, w0, v1) -> np.ndarray:
    """sin^2 error after each step for an explicit vector stream."""
    state = OjaState(np.asarray(w0, dtype=np.float64) / np.linalg.norm(w0))
    errs = []
    for x, eta in zip(np.asarray(vectors, dtype=np.float64), etas):
        state = oja_step(state, x, eta)
        errs.append(sin2_error(state.w, v1))
    return np.array(errs)


@dataclass
class OjaSeries:
    n: np.ndarray
    sin2_error: np.ndarray
    dev: np.ndarray
    boundary: np.ndarray
    w0: np.ndarray
    w: np.ndarray
    initial_error: float


def run_oja_demo(
    dist: RankOneSphere,
    schedule: StepSchedule,
    n_max: int,
    seed: int,
    delta: float = 0.1,
    eta_epoch: float = 2.0,
    alpha: float = 2.0,
    init: Literal["canonical", "random"] = "canonical",
) -> OjaSeries:
    """Run Oja on the vectors behind a rank-one stream.

    The matrix stream is the one :func:`~matprod_anytime.streams.simulate_trajectory`
    sees for the same seed. Boundary values are NaN for epochs reaching past
    a fixed horizon.
    """
    spec = dist.spectrum
    lam = spec.eigenvalues
    if lam.size > 1 and lam[0] - lam[1] < GAP_TOL:
        raise ValueError(f"top eigenvalue is degenerate (gap {lam[0] - lam[1]:.3e} < {GAP_TOL})")
    v1 = spec.eigenvectors[:, 0]
    d = dist.d

    if init == "canonical":
        w0 = np.zeros(d)
        w0[0] = 1.0
    elif init == "random":
        g = StreamBatch.for_trajectories(seed, [_INIT_STREAM]).normal(d)[0]
        w0 = g / np.linalg.norm(g)
    else:
        raise ValueError(f"unknown init {init!r}")

    etas = schedule.etas(n_max)
    E, _, _ = expected_path(spec, etas)
    params = BoundaryParams(delta, d, dist.deviation_bound(), eta_epoch, alpha, spec.lambda_max)
    b = anytime_boundary_curve(n_max, schedule, params, beyond_horizon="nan")

    rng = StreamBatch.for_trajectories(seed, [0])
    Z = np.eye(d)[None]
    state = OjaState(w0)
    err = np.empty(n_max)
    dev = np.empty(n_max)
    for n in range(1, n_max + 1):
        z = dist.sample_vectors(rng)
        X = z[:, :, None] * z[:, None, :]
        Z = Z + etas[n - 1] * (X @ Z)
        dev[n - 1] = operator_norms(Z - E[n - 1])[0]
        state = oja_step(state, z[0], etas[n - 1])
        err[n - 1] = sin2_error(state.w, v1)
    return OjaSeries(np.arange(1, n_max + 1), err, dev, b, w0, state.w, sin2_error(w0, v1))
