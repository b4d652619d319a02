"""Exact enumeration over every outcome path of a finite-support stream.

Paths are expanded level by level: level ``k`` holds the ``m**k`` prefix
products, so each prefix is formed once. Path order is lexicographic in the
atom indices ``(j_1, ..., j_n)`` with the first step most significant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Literal, Sequence

import numpy as np

from .boundary import StepSchedule
from .linalg import operator_norms
from .streams import FiniteSupport, crossed, expected_path

__all__ = [
    "DEFAULT_CAP",
    "EnumerationSizeError",
    "PathTable",
    "enumerate_paths",
    "exact_crossing_probability",
    "martingale_check",
    "submartingale_check",
]

DEFAULT_CAP = 2**24
_LOG_SPACE_CUTOFF = 600.0


class EnumerationSizeError(ValueError):
    pass


@dataclass
class PathTable:
    n: int
    m: int
    probs: np.ndarray          # (m**n,)
    Z: np.ndarray              # (m**n, d, d)
    dev_levels: list           # dev_levels[k-1] has shape (m**k,)
    ydev_levels: list
    E_norm: np.ndarray         # (n,)

    def _expand(self, levels, k: int) -> np.ndarray:
        return np.repeat(levels[k - 1], self.m ** (self.n - k))

    def dev_at(self, k: int) -> np.ndarray:
        """``dev_k`` for every full path."""
        return self._expand(self.dev_levels, k)

    def ydev_at(self, k: int) -> np.ndarray:
        return self._expand(self.ydev_levels, k)

    @property
    def max_dev(self) -> np.ndarray:
        return np.max([self.dev_at(k) for k in range(1, self.n + 1)], axis=0)

    @property
    def max_ydev(self) -> np.ndarray:
        return np.max([self.ydev_at(k) for k in range(1, self.n + 1)], axis=0)

    @property
    def mean(self) -> np.ndarray:
        return np.tensordot(self.probs, self.Z, axes=1)

    def __len__(self) -> int:
        return self.probs.size


def _check_size(m: int, n: int, cap: int) -> None:
    if m**n > cap:
        raise EnumerationSizeError(f"m^n = {m}^{n} = {m**n} paths exceeds the enumeration cap {cap}")


def _levels(dist: FiniteSupport, etas: np.ndarray, n: int) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Yield ``(k, Z_k, weight_k)`` for k = 0..n; weights may be log-probabilities."""
    d, m = dist.d, dist.m
    log_space = n * abs(math.log(dist.probs.min())) > _LOG_SPACE_CUTOFF
    p = np.log(dist.probs) if log_space else dist.probs
    Z = np.eye(d)[None]
    w = np.zeros(1) if log_space else np.ones(1)
    yield 0, Z, w
    for k in range(1, n + 1):
        factors = np.eye(d) + etas[k - 1] * dist.atoms            # (m, d, d)
        Z = np.einsum("jab,pbc->pjac", factors, Z).reshape(-1, d, d)
        w = (w[:, None] + p[None, :] if log_space else w[:, None] * p[None, :]).reshape(-1)
        yield k, Z, (np.exp(w) if log_space and k == n else w)


def enumerate_paths(
    dist: FiniteSupport,
    schedule: StepSchedule,
    n: int,
    cap: int = DEFAULT_CAP,
) -> PathTable:
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_size(dist.m, n, cap)
    etas = schedule.etas(n)
    E, Einv, E_norm = expected_path(dist.spectrum, etas)
    I = np.eye(dist.d)
    devs, ydevs = [], []
    for k, Z, w in _levels(dist, etas, n):
        if k == 0:
            continue
        devs.append(operator_norms(Z - E[k - 1]))
        ydevs.append(operator_norms(Einv[k - 1] @ Z - I))
    return PathTable(n, dist.m, w, Z, devs, ydevs, E_norm)


def exact_crossing_probability(
    table: PathTable,
    thresholds: Sequence[float],
    mode: Literal["anytime", "fixed_time"] = "anytime",
) -> float:
    """Exact P(exists k <= n: dev_k >= thr_k) or P(dev_n >= thr_n).

    Uses the same tie rule as the simulator (:func:`~matprod_anytime.streams.crossed`).
    """
    thr = np.asarray(thresholds, dtype=np.float64).reshape(-1)
    if thr.size < table.n:
        raise ValueError(f"need {table.n} thresholds, got {thr.size}")
    if mode == "fixed_time":
        hit = crossed(table.dev_levels[-1], thr[table.n - 1])
    elif mode == "anytime":
        hit = np.zeros(1, dtype=bool)
        for k in range(1, table.n + 1):
            hit = np.repeat(hit, table.m) | crossed(table.dev_levels[k - 1], thr[k - 1])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return float(min(1.0, math.fsum(table.probs[hit])))


def _one_step(dist: FiniteSupport, etas: np.ndarray, n: int, cap: int):
    """For each prefix of length k < n: Y_k and the m successor values Y_{k+1}."""
    _check_size(dist.m, max(n - 1, 0), cap)
    _, Einv, _ = expected_path(dist.spectrum, etas)
    d = dist.d
    I = np.eye(d)
    for k, Z, _ in _levels(dist, etas, n - 1):
        Y = (Einv[k - 1] @ Z - I) if k > 0 else np.zeros_like(Z)
        factors = np.eye(d) + etas[k] * dist.atoms
        Y_next = np.einsum("ab,jbc,pcd->pjad", Einv[k], factors, Z) - I
        yield Y, Y_next


def martingale_check(dist: FiniteSupport, schedule: StepSchedule, n: int, cap: int = DEFAULT_CAP) -> float:
    """Max over prefixes of ``||E[Y_{k+1} | prefix] - Y_k||_max``; exactly 0 in theory."""
    etas = schedule.etas(n)
    worst = 0.0
    for Y, Y_next in _one_step(dist, etas, n, cap):
        cond = np.einsum("j,pjab->pab", dist.probs, Y_next)
        worst = max(worst, float(np.max(np.abs(cond - Y))))
    return worst


def submartingale_check(dist: FiniteSupport, schedule: StepSchedule, n: int, cap: int = DEFAULT_CAP) -> float:
    """Min over prefixes of ``E[||Y_{k+1}|| | prefix] - ||Y_k||``; nonnegative in theory."""
    etas = schedule.etas(n)
    slack = math.inf
    for Y, Y_next in _one_step(dist, etas, n, cap):
        cond = operator_norms(Y_next) @ dist.probs
        slack = min(slack, float(np.min(cond - operator_norms(Y))))
    return slack
