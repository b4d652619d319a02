"""I.i.d. PSD matrix streams and trajectories of the matrix product.

A trajectory tracks ``Z_n = (I + eta_n X_n) ... (I + eta_1 X_1)`` together
with ``dev_n = ||Z_n - E_n||`` and ``ydev_n = ||E_n^{-1} Z_n - I||``.
Randomness comes from :class:`~matprod_anytime.rng.StreamBatch`, one
generator per trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .boundary import StepSchedule
from .linalg import Spectrum, operator_norm, operator_norms, psd_sqrt, sym_eigen, sym_matrix
from .rng import StreamBatch

__all__ = [
    "PSD_TOL",
    "FiniteSupport",
    "RankOneSphere",
    "DiagonalPerturbation",
    "DeviationBound",
    "deviation_bound",
    "sample",
    "TrajectoryRecord",
    "BatchResult",
    "expected_path",
    "crossed",
    "simulate_batch",
    "simulate_trajectory",
]

PSD_TOL = 1e-10

BoundarySpec = Union[None, Callable[[int], float], Sequence[float], np.ndarray]


def _check_psd(A: np.ndarray, what: str) -> None:
    lam_min = sym_eigen(A).lambda_min
    if lam_min < -PSD_TOL:
        raise ValueError(f"{what} is not PSD: min eigenvalue {lam_min:.3e} < -{PSD_TOL}")


class _Distribution:
    mean: np.ndarray

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    @property
    def spectrum(self) -> Spectrum:
        return self._spectrum

    def sample_batch(self, rng: StreamBatch) -> np.ndarray:
        raise NotImplementedError

    def deviation_bound(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class FiniteSupport(_Distribution):
    """Atoms ``A_j`` drawn with probabilities ``p_j``; one uniform per draw."""

    atoms: np.ndarray
    probs: np.ndarray
    mean: np.ndarray = field(init=False)

    def __init__(self, atoms, probs):
        atoms = [sym_matrix(a) for a in atoms]
        probs = np.asarray(probs, dtype=np.float64).reshape(-1)
        if len(atoms) == 0 or len(atoms) != probs.size:
            raise ValueError("need one probability per atom")
        if len({a.shape for a in atoms}) != 1:
            raise ValueError("atoms must share a dimension")
        if np.any(probs <= 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be positive and sum to 1")
        for j, a in enumerate(atoms):
            _check_psd(a, f"atom {j}")
        stacked = np.stack(atoms)
        stacked.flags.writeable = False
        object.__setattr__(self, "atoms", stacked)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "mean", sym_matrix(np.tensordot(probs, stacked, axes=1)))
        object.__setattr__(self, "_spectrum", sym_eigen(self.mean))
        object.__setattr__(self, "_cum", np.cumsum(probs))

    @property
    def m(self) -> int:
        return self.probs.size

    def draw_indices(self, rng: StreamBatch) -> np.ndarray:
        u = rng.uniform(1)[:, 0]
        return np.minimum(np.searchsorted(self._cum, u, side="right"), self.m - 1)

    def sample_batch(self, rng: StreamBatch) -> np.ndarray:
        return self.atoms[self.draw_indices(rng)]

    def deviation_bound(self) -> float:
        return max(operator_norm(a - self.mean) for a in self.atoms)


@dataclass(frozen=True, eq=False)
class RankOneSphere(_Distribution):
    """``X = z z^T`` with ``z = sqrt(d) Sigma^{1/2} u``, u uniform on the sphere."""

    mean: np.ndarray

    def __init__(self, sigma):
        sigma = sym_matrix(sigma)
        _check_psd(sigma, "Sigma")
        object.__setattr__(self, "mean", sigma)
        object.__setattr__(self, "_spectrum", sym_eigen(sigma))
        object.__setattr__(self, "_root", psd_sqrt(self._spectrum))

    def sample_vectors(self, rng: StreamBatch) -> np.ndarray:
        g = rng.normal(self.d)
        u = g / np.linalg.norm(g, axis=1, keepdims=True)
        return np.sqrt(self.d) * (u @ self._root.T)

    def sample_batch(self, rng: StreamBatch) -> np.ndarray:
        z = self.sample_vectors(rng)
        return z[:, :, None] * z[:, None, :]

    def deviation_bound(self) -> float:
        lam = self._spectrum.lambda_max
        return self.d * lam + lam


@dataclass(frozen=True, eq=False)
class DiagonalPerturbation(_Distribution):
    """``X = Sigma + eps * D`` with independent random signs on the diagonal of D."""

    mean: np.ndarray
    eps: float

    def __init__(self, sigma, eps: float):
        sigma = sym_matrix(sigma)
        if not eps > 0:
            raise ValueError("eps must be positive")
        spec = sym_eigen(sigma)
        if spec.lambda_min < eps - PSD_TOL:
            raise ValueError(
                f"lambda_min(Sigma) = {spec.lambda_min:.3e} < eps = {eps}; samples would not be PSD"
            )
        object.__setattr__(self, "mean", sigma)
        object.__setattr__(self, "eps", float(eps))
        object.__setattr__(self, "_spectrum", spec)

    def sample_batch(self, rng: StreamBatch) -> np.ndarray:
        bits = (rng.raw(self.d) >> np.uint64(63)).astype(np.float64)
        signs = 2.0 * bits - 1.0
        X = np.broadcast_to(self.mean, (len(rng), self.d, self.d)).copy()
        idx = np.arange(self.d)
        X[:, idx, idx] += self.eps * signs
        return X

    def deviation_bound(self) -> float:
        return self.eps


@dataclass(frozen=True)
class DeviationBound:
    L: float


def deviation_bound(dist: _Distribution) -> DeviationBound:
    """Almost-sure bound on ``||X - Sigma||`` for the distribution."""
    return DeviationBound(float(dist.deviation_bound()))


def sample(dist: _Distribution, rng: StreamBatch) -> np.ndarray:
    """One draw per generator in ``rng``; a single matrix if ``len(rng) == 1``."""
    X = dist.sample_batch(rng)
    return X[0] if len(rng) == 1 else X


@dataclass
class TrajectoryRecord:
    """Per-step values of one simulated path, index 0 is n = 1."""

    dev: np.ndarray
    ydev: np.ndarray
    sigma_obs: np.ndarray
    E_norm: np.ndarray
    boundary_value: np.ndarray
    crossed: np.ndarray

    @property
    def n_max(self) -> int:
        return self.dev.size

    @property
    def first_crossing(self) -> int:
        """Step of the first crossing, 0 if the path never crosses."""
        hits = np.flatnonzero(self.crossed)
        return int(hits[0]) + 1 if hits.size else 0


@dataclass
class BatchResult:
    indices: np.ndarray
    first_crossing: np.ndarray
    max_ydev: np.ndarray
    max_dev_ratio: np.ndarray
    dev: np.ndarray | None = None
    ydev: np.ndarray | None = None
    sigma_obs: np.ndarray | None = None


def expected_path(spectrum: Spectrum, etas: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stacks of ``E_n``, ``E_n^{-1}`` and ``||E_n||`` for n = 1..len(etas)."""
    lam = spectrum.eigenvalues
    P = np.cumprod(1.0 + np.outer(etas, lam), axis=0)
    Q = spectrum.eigenvectors
    I = np.eye(spectrum.dim)
    # I + Q diag(P - 1) Q^T keeps zero steps exactly at the identity; the
    # inverse needs the direct form, 1/P - 1 cancels badly once P is large
    E = I + np.einsum("ij,nj,kj->nik", Q, P - 1.0, Q)
    Einv = np.einsum("ij,nj,kj->nik", Q, 1.0 / P, Q)
    Einv[np.all(P == 1.0, axis=1)] = I
    return E, Einv, P.max(axis=1)


def crossed(dev, threshold):
    """``dev >= threshold`` with ties counted, except that a zero deviation
    never crosses (a zero threshold only arises when every step is zero)."""
    dev = np.asarray(dev)
    return (dev >= threshold) & (dev > 0)


def _boundary_values(boundary: BoundarySpec, n_max: int) -> np.ndarray:
    if boundary is None:
        return np.full(n_max, np.inf)
    if callable(boundary):
        return np.array([float(boundary(n)) for n in range(1, n_max + 1)])
    b = np.asarray(boundary, dtype=np.float64).reshape(-1)
    if b.size < n_max:
        raise ValueError(f"boundary has {b.size} values, need {n_max}")
    return b[:n_max]


def simulate_batch(
    dist: _Distribution,
    schedule: StepSchedule,
    n_max: int,
    boundary: BoundarySpec,
    master_seed: int,
    indices: Sequence[int],
    keep_paths: bool = False,
) -> BatchResult:
    """Simulate the trajectories ``indices`` under ``master_seed`` in lockstep."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    etas = schedule.etas(n_max)
    b = _boundary_values(boundary, n_max)
    E, Einv, _ = expected_path(dist.spectrum, etas)
    indices = np.asarray(indices, dtype=np.int64)
    B, d = indices.size, dist.d
    rng = StreamBatch.for_trajectories(master_seed, indices)

    Z = np.broadcast_to(np.eye(d), (B, d, d)).copy()
    I = np.eye(d)
    first = np.zeros(B, dtype=np.int64)
    max_ydev = np.zeros(B)
    max_ratio = np.zeros(B)
    if keep_paths:
        devs, ydevs, sig = (np.empty((B, n_max)) for _ in range(3))

    for n in range(1, n_max + 1):
        X = dist.sample_batch(rng)
        eta = etas[n - 1]
        Z = Z + eta * (X @ Z)
        dev = operator_norms(Z - E[n - 1])
        ydev = operator_norms(Einv[n - 1] @ Z - I)
        np.maximum(max_ydev, ydev, out=max_ydev)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(b[n - 1] > 0, dev / b[n - 1], np.where(dev > 0, np.inf, 0.0))
        np.maximum(max_ratio, ratio, out=max_ratio)
        new = (first == 0) & crossed(dev, b[n - 1])
        first[new] = n
        if keep_paths:
            devs[:, n - 1] = dev
            ydevs[:, n - 1] = ydev
            sig[:, n - 1] = eta * operator_norms(X - dist.mean)

    res = BatchResult(indices, first, max_ydev, max_ratio)
    if keep_paths:
        res.dev, res.ydev, res.sigma_obs = devs, ydevs, sig
    return res


def simulate_trajectory(
    dist: _Distribution,
    schedule: StepSchedule,
    n_max: int,
    boundary: BoundarySpec,
    seed: int,
) -> TrajectoryRecord:
    """One path; identical to trajectory 0 of a Monte Carlo run with master seed ``seed``."""
    res = simulate_batch(dist, schedule, n_max, boundary, seed, [0], keep_paths=True)
    b = _boundary_values(boundary, n_max)
    _, _, E_norm = expected_path(dist.spectrum, schedule.etas(n_max))
    dev = res.dev[0]
    return TrajectoryRecord(
        dev=dev,
        ydev=res.ydev[0],
        sigma_obs=res.sigma_obs[0],
        E_norm=E_norm,
        boundary_value=b,
        crossed=crossed(dev, b),
    )
