"""Dense symmetric-matrix numerics.

Everything here works on small dense float64 arrays. The eigensolver is a
cyclic Jacobi sweep; batched operator norms (used on the simulation hot path)
go through LAPACK via :func:`numpy.linalg.eigvalsh`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "ConvergenceError",
    "Spectrum",
    "sym_matrix",
    "sym_eigen",
    "operator_norm",
    "operator_norms",
    "expected_product",
    "inverse_expected_product",
    "spectral_products",
    "left_accumulate",
    "psd_sqrt",
]

OFFDIAG_RTOL = 1e-13
MAX_SWEEPS = 100


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (nonincreasing) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[-1])

    def reconstruct(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.T


def sym_matrix(entries) -> np.ndarray:
    """Return a read-only float64 copy of ``(A + A.T) / 2``."""
    A = np.array(entries, dtype=np.float64, ndmin=2)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    S = 0.5 * (A + A.T)
    S.flags.writeable = False
    return S


def _offdiag_norm(A: np.ndarray) -> float:
    off = A - np.diag(np.diag(A))
    return float(np.linalg.norm(off))


def sym_eigen(S, tol: float = OFFDIAG_RTOL, max_sweeps: int = MAX_SWEEPS) -> Spectrum:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * ||S||_F``. Raises :class:`ConvergenceError` after ``max_sweeps``.
    """
    A = np.array(sym_matrix(S))
    d = A.shape[0]
    V = np.eye(d)
    target = tol * float(np.linalg.norm(A))

    sweeps = 0
    off = _offdiag_norm(A)
    while off > target:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps; "
                f"off-diagonal residual {off:.3e} > {target:.3e}"
            )
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                # Rutishauser's stable form of the rotation angle
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
        sweeps += 1
        off = _offdiag_norm(A)

    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    V = V[:, order]
    w.flags.writeable = False
    V.flags.writeable = False
    return Spectrum(w, V)


def operator_norm(A) -> float:
    """Largest singular value of a square matrix, as sqrt(lambda_max(A^T A))."""
    A = np.asarray(A, dtype=np.float64)
    if not np.any(A):
        return 0.0
    # rescale first so A^T A neither overflows nor loses the small end
    scale = float(np.max(np.abs(A)))
    B = A / scale
    lam = sym_eigen(B.T @ B).lambda_max
    return scale * float(np.sqrt(max(lam, 0.0)))


def operator_norms(A: np.ndarray) -> np.ndarray:
    """Operator norms of a stack ``(..., d, d)`` of square matrices."""
    A = np.asarray(A, dtype=np.float64)
    scale = np.max(np.abs(A), axis=(-2, -1))
    safe = np.where(scale > 0, scale, 1.0)
    B = A / safe[..., None, None]
    G = np.swapaxes(B, -1, -2) @ B
    lam = np.linalg.eigvalsh(G)[..., -1]
    return np.where(scale > 0, safe * np.sqrt(np.clip(lam, 0.0, None)), 0.0)


def _as_spectrum(sigma) -> Spectrum:
    return sigma if isinstance(sigma, Spectrum) else sym_eigen(sigma)


def spectral_products(spectrum: Spectrum, etas: Sequence[float]) -> np.ndarray:
    """Per-eigenvalue products prod_i (1 + eta_i * lambda_j)."""
    etas = np.asarray(etas, dtype=np.float64).reshape(-1)
    if np.any(etas < 0):
        raise ValueError("step sizes must be nonnegative")
    lam = spectrum.eigenvalues
    return np.prod(1.0 + np.outer(etas, lam), axis=0) if etas.size else np.ones_like(lam)


def expected_product(sigma, etas: Sequence[float]) -> np.ndarray:
    """E[Z_n] = prod_i (I + eta_i Sigma), built from the spectrum of Sigma.

    Evaluated as ``I + Q diag(p - 1) Q^T`` so an empty or all-zero schedule
    returns the identity exactly.
    """
    spec = _as_spectrum(sigma)
    Q = spec.eigenvectors
    return np.eye(spec.dim) + (Q * (spectral_products(spec, etas) - 1.0)) @ Q.T


def inverse_expected_product(sigma, etas: Sequence[float]) -> np.ndarray:
    spec = _as_spectrum(sigma)
    Q = spec.eigenvectors
    p = spectral_products(spec, etas)
    if np.all(p == 1.0):
        return np.eye(spec.dim)
    return (Q / p) @ Q.T


def left_accumulate(Z_prev, X, eta: float) -> np.ndarray:
    """Return ``(I + eta X) @ Z_prev``; the newest factor goes on the left."""
    Z_prev = np.asarray(Z_prev, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if Z_prev.shape != X.shape:
        raise ValueError(f"shape mismatch: {Z_prev.shape} vs {X.shape}")
    return Z_prev + eta * (X @ Z_prev)


def psd_sqrt(sigma) -> np.ndarray:
    spec = _as_spectrum(sigma)
    Q = spec.eigenvectors
    return (Q * np.sqrt(np.clip(spec.eigenvalues, 0.0, None))) @ Q.T
