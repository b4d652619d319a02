"""Deterministic quantities behind the time-uniform boundary.

Growth factors, the cumulative statistics ``M_n`` / ``V_n``, the step-size
condition, geometric epochs, the fixed-time threshold, the epoch-stitched
anytime boundary, its smooth counterpart and the moment-method tail bound.

All logarithms are natural. ``V_n`` is built from the deterministic majorant
``sigma_i = eta_i * L`` where ``L`` bounds ``||X_i - Sigma||`` almost surely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

__all__ = [
    "HorizonError",
    "StepSchedule",
    "BoundaryParams",
    "CumulativeStats",
    "growth_factor",
    "accumulate_stats",
    "stats_at",
    "stats_path",
    "check_condition",
    "condition_value",
    "epoch_interval",
    "epoch_index",
    "epoch_indices",
    "epoch_endpoint",
    "fixed_time_threshold",
    "zeta",
    "stitching_h",
    "anytime_boundary",
    "anytime_boundary_curve",
    "smooth_boundary",
    "smooth_boundary_curve",
    "huang_tail",
    "boundary_table",
    "max_step_constant",
]

E = math.e
_GUARD = 1e-12


class HorizonError(ValueError):
    """A step size was requested beyond the schedule's horizon."""


@dataclass(frozen=True)
class StepSchedule:
    """Rule producing step sizes eta_1, eta_2, ...

    ``constant``: eta_i = c. ``fixed_horizon``: eta_i = c / N for i <= N.
    ``polynomial``: eta_i = c / i**gamma.
    """

    kind: Literal["constant", "fixed_horizon", "polynomial"]
    c: float
    N: int | None = None
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "fixed_horizon", "polynomial"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.c < 0 or self.gamma < 0:
            raise ValueError("schedule parameters must be nonnegative")
        if self.kind == "fixed_horizon" and (self.N is None or self.N < 1):
            raise ValueError("fixed_horizon schedule needs a horizon N >= 1")

    @classmethod
    def constant(cls, c: float) -> "StepSchedule":
        return cls("constant", float(c))

    @classmethod
    def fixed_horizon(cls, c: float, N: int) -> "StepSchedule":
        return cls("fixed_horizon", float(c), int(N))

    @classmethod
    def polynomial(cls, c: float, gamma: float = 1.0) -> "StepSchedule":
        return cls("polynomial", float(c), None, float(gamma))

    @property
    def horizon(self) -> int | None:
        return self.N if self.kind == "fixed_horizon" else None

    def etas(self, n: int) -> np.ndarray:
        """Array ``[eta_1, ..., eta_n]``."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        if self.kind == "fixed_horizon" and n > self.N:
            raise HorizonError(
                f"fixed_horizon schedule is defined for i <= {self.N}, requested up to {n}"
            )
        if self.kind == "polynomial":
            i = np.arange(1, n + 1, dtype=np.float64)
            return self.c / i**self.gamma
        step = self.c if self.kind == "constant" else self.c / self.N
        return np.full(n, step, dtype=np.float64)

    def eta(self, i: int) -> float:
        if i < 1:
            raise ValueError("step index starts at 1")
        return float(self.etas(i)[-1])


@dataclass(frozen=True)
class BoundaryParams:
    delta: float
    d: int
    L: float
    eta_epoch: float = 2.0
    alpha: float = 2.0
    lambda_max: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if not self.eta_epoch > 1:
            raise ValueError(f"eta_epoch must exceed 1, got {self.eta_epoch}")
        if not self.alpha > 1:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if self.lambda_max < 0:
            raise ValueError("lambda_max must be nonnegative")


@dataclass(frozen=True)
class CumulativeStats:
    n: int = 0
    M: float = 1.0
    V: float = 0.0

    @property
    def E_norm(self) -> float:
        # ||E_n|| = M_n for PSD Sigma
        return self.M


def growth_factor(eta_i: float, lambda_max: float) -> float:
    """m_i = ||I + eta_i Sigma|| = 1 + eta_i * lambda_max for PSD Sigma."""
    if eta_i < 0 or lambda_max < 0:
        raise ValueError("inputs must be nonnegative")
    return 1.0 + eta_i * lambda_max


def accumulate_stats(prev: CumulativeStats, eta_i: float, params: BoundaryParams) -> CumulativeStats:
    return CumulativeStats(
        n=prev.n + 1,
        M=prev.M * growth_factor(eta_i, params.lambda_max),
        V=prev.V + (eta_i * params.L) ** 2,
    )


def stats_path(schedule: StepSchedule, params: BoundaryParams, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays ``M[0..n]`` and ``V[0..n]`` (index 0 is the empty product)."""
    etas = schedule.etas(n)
    M = np.empty(n + 1)
    V = np.empty(n + 1)
    M[0], V[0] = 1.0, 0.0
    # sequential on purpose: matches accumulate_stats bit for bit
    m, v = 1.0, 0.0
    for i, eta in enumerate(etas, start=1):
        m = m * (1.0 + eta * params.lambda_max)
        v = v + (eta * params.L) ** 2
        M[i], V[i] = m, v
    return M, V


def stats_at(n: int, schedule: StepSchedule, params: BoundaryParams) -> CumulativeStats:
    M, V = stats_path(schedule, params, n)
    return CumulativeStats(n, float(M[n]), float(V[n]))


def condition_value(stats: CumulativeStats, delta: float, d: int) -> float:
    """Left-hand side M_n * sqrt(2 V_n log(d / delta))."""
    return stats.M * math.sqrt(2.0 * stats.V * math.log(d / delta))


def check_condition(stats: CumulativeStats, params: BoundaryParams, delta: float | None = None) -> bool:
    delta = params.delta if delta is None else delta
    return condition_value(stats, delta, params.d) <= 1.0


def _ceil_guarded(x: float) -> int:
    return math.ceil(x - _GUARD * x)


def _floor_guarded(x: float) -> int:
    return math.floor(x + _GUARD * x)


def _epoch_bounds(eta: float, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Start and end of every epoch k until the end passes ``n_max``."""
    starts, ends = [], []
    acc = 1.0
    while True:
        nxt = acc * eta
        starts.append(_ceil_guarded(acc))
        ends.append(_floor_guarded(nxt))
        if ends[-1] >= n_max:
            break
        acc = nxt
    return np.asarray(starts, dtype=np.int64), np.asarray(ends, dtype=np.int64)


def epoch_interval(k: int, eta_epoch: float) -> tuple[int, int]:
    """``(ceil(eta^k), floor(eta^(k+1)))``; empty when start > end."""
    acc = 1.0
    for _ in range(k):
        acc *= eta_epoch
    return _ceil_guarded(acc), _floor_guarded(acc * eta_epoch)


def epoch_index(n: int, eta_epoch: float) -> int:
    """Smallest k >= 0 with ceil(eta^k) <= n <= floor(eta^(k+1))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not eta_epoch > 1:
        raise ValueError("eta_epoch must exceed 1")
    acc = 1.0
    k = 0
    while True:
        nxt = acc * eta_epoch
        if _ceil_guarded(acc) <= n <= _floor_guarded(nxt):
            return k
        acc = nxt
        k += 1


def epoch_indices(n_max: int, eta_epoch: float) -> np.ndarray:
    """``epoch_index(n)`` for n = 1..n_max as an int array (entry 0 is n=1)."""
    starts, ends = _epoch_bounds(eta_epoch, n_max)
    n = np.arange(1, n_max + 1)
    # ends are nondecreasing and epochs leave no gaps, so the first epoch
    # whose end reaches n is the minimal one containing n
    k = np.searchsorted(ends, n, side="left")
    assert np.all(starts[k] <= n)
    return k


def epoch_endpoint(k, eta_epoch: float):
    """floor(eta^(k+1)) for scalar or array k."""
    k_arr = np.atleast_1d(np.asarray(k, dtype=np.int64))
    _, ends = _epoch_bounds(eta_epoch, 1)
    top = int(k_arr.max()) if k_arr.size else 0
    acc, out = 1.0, []
    for _ in range(top + 1):
        acc *= eta_epoch
        out.append(_floor_guarded(acc))
    res = np.asarray(out, dtype=np.int64)[k_arr]
    return int(res[0]) if np.ndim(k) == 0 else res


def fixed_time_threshold(stats: CumulativeStats, delta: float, d: int) -> float:
    """t(delta, n) = e * ||E_n|| * M_n * sqrt(2 V_n log(d / delta))."""
    if stats.V < 0:
        raise ValueError("V_n must be nonnegative")
    return E * stats.E_norm * stats.M * math.sqrt(2.0 * stats.V * math.log(d / delta))


_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)


def zeta(alpha: float) -> float:
    """Riemann zeta for real alpha > 1 via Euler-Maclaurin summation."""
    if not alpha > 1.0 + 1e-9:
        raise ValueError(f"zeta requires alpha > 1 (+1e-9 margin), got {alpha}")
    N = 20
    head = math.fsum(k ** (-alpha) for k in range(1, N))
    tail = N ** (1.0 - alpha) / (alpha - 1.0) + 0.5 * N ** (-alpha)
    rising = alpha  # alpha (alpha+1) ... (alpha+2j-2)
    fact = 2.0      # (2j)!
    for j, b in enumerate(_BERNOULLI, start=1):
        tail += b / fact * rising * N ** (-alpha - 2 * j + 1)
        rising *= (alpha + 2 * j - 1) * (alpha + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
    return head + tail


def stitching_h(k, alpha: float):
    """h(k) = (k + 1)^alpha * zeta(alpha); sum over k >= 0 of 1/h(k) is 1."""
    if np.any(np.asarray(k) < 0):
        raise ValueError("k must be nonnegative")
    z = zeta(alpha)
    if np.ndim(k) == 0:
        return (k + 1) ** alpha * z
    return (np.asarray(k, dtype=np.float64) + 1.0) ** alpha * z


def anytime_boundary(n: int, schedule: StepSchedule, params: BoundaryParams) -> float:
    """Epoch-stitched threshold t(delta / h(k_n), floor(eta^(k_n + 1)))."""
    k = epoch_index(n, params.eta_epoch)
    N_k = epoch_endpoint(k, params.eta_epoch)
    stats = stats_at(N_k, schedule, params)
    return fixed_time_threshold(stats, params.delta / stitching_h(k, params.alpha), params.d)


def anytime_boundary_curve(
    n_max: int,
    schedule: StepSchedule,
    params: BoundaryParams,
    beyond_horizon: Literal["raise", "nan"] = "raise",
) -> np.ndarray:
    """``anytime_boundary(n)`` for n = 1..n_max (entry 0 is n=1).

    Every n in an epoch maps to one shared value, so piecewise constancy is
    exact. With ``beyond_horizon="nan"`` epochs whose endpoint lies past a
    fixed horizon get NaN instead of raising :class:`HorizonError`.
    """
    k = epoch_indices(n_max, params.eta_epoch)
    ks = np.unique(k)
    ends = epoch_endpoint(ks, params.eta_epoch)
    last = int(ends.max())
    if beyond_horizon == "nan" and schedule.horizon is not None:
        last = min(last, schedule.horizon)
    M, V = stats_path(schedule, params, last)
    per_epoch = {
        int(kk): fixed_time_threshold(
            CumulativeStats(int(N), float(M[N]), float(V[N])),
            params.delta / stitching_h(int(kk), params.alpha),
            params.d,
        ) if N <= last else math.nan
        for kk, N in zip(ks, ends)
    }
    return np.array([per_epoch[int(kk)] for kk in k])


def _smooth_from(M: float, V: float, log_term: float, params: BoundaryParams, two: float) -> float:
    bracket = math.log(params.d) + math.log(zeta(params.alpha) / params.delta) + params.alpha * log_term
    return E * M * M * math.sqrt(two * V * bracket)


def smooth_boundary(
    n: int,
    schedule: StepSchedule,
    params: BoundaryParams,
    variant: Literal["paper", "dominating"] = "dominating",
) -> float:
    """Smooth boundary f(n).

    ``paper`` evaluates the verbatim formula at n (no factor 2 under the
    root, log(log_eta(n) + 1)). ``dominating`` restores the factor 2, uses
    stats at the epoch endpoint and log(k_n + 1); it is never below
    :func:`anytime_boundary`.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if variant == "paper":
        s = stats_at(n, schedule, params)
        log_term = math.log(math.log(n) / math.log(params.eta_epoch) + 1.0)
        return _smooth_from(s.M, s.V, log_term, params, 1.0)
    if variant == "dominating":
        k = epoch_index(n, params.eta_epoch)
        s = stats_at(epoch_endpoint(k, params.eta_epoch), schedule, params)
        return _smooth_from(s.M, s.V, math.log(k + 1.0), params, 2.0)
    raise ValueError(f"unknown smooth boundary variant {variant!r}")


def smooth_boundary_curve(
    n_max: int,
    schedule: StepSchedule,
    params: BoundaryParams,
    variant: Literal["paper", "dominating"] = "dominating",
) -> np.ndarray:
    base = math.log(params.d) + math.log(zeta(params.alpha) / params.delta)
    n = np.arange(1, n_max + 1)
    if variant == "paper":
        M, V = stats_path(schedule, params, n_max)
        log_term = np.log(np.log(n) / math.log(params.eta_epoch) + 1.0)
        return E * M[1:] * M[1:] * np.sqrt(V[1:] * (base + params.alpha * log_term))
    if variant == "dominating":
        k = epoch_indices(n_max, params.eta_epoch)
        ends = epoch_endpoint(k, params.eta_epoch)
        M, V = stats_path(schedule, params, int(ends.max()))
        return np.array([
            _smooth_from(float(M[N]), float(V[N]), math.log(kk + 1.0), params, 2.0)
            for kk, N in zip(k, ends)
        ])
    raise ValueError(f"unknown smooth boundary variant {variant!r}")


def huang_tail(u: float, stats: CumulativeStats, d: int) -> float:
    """max(d, e) * exp(-u^2 / (2 e^2 V_n)), valid for u in [0, e]."""
    if not 0.0 <= u <= E:
        raise ValueError(f"u = {u} is outside the validity window [0, e]")
    lead = max(float(d), E)
    if stats.V == 0.0:
        return lead if u == 0.0 else 0.0
    return lead * math.exp(-(u * u) / (2.0 * E * E * stats.V))


def boundary_table(n_max: int, schedule: StepSchedule, params: BoundaryParams) -> dict[str, np.ndarray]:
    """Columns for n = 1..n_max: epoch, stats, every threshold, validity flags.

    ``condition2_ok`` checks the step-size condition at n with the original
    delta; ``condition2_epoch_ok`` checks it at the epoch endpoint with
    delta / h(k_n).
    """
    k = epoch_indices(n_max, params.eta_epoch)
    ends = epoch_endpoint(k, params.eta_epoch)
    M, V = stats_path(schedule, params, int(max(ends.max(), n_max)))
    n = np.arange(1, n_max + 1)
    t_fixed = np.array([
        fixed_time_threshold(CumulativeStats(int(i), float(M[i]), float(V[i])), params.delta, params.d)
        for i in n
    ])
    cond = M[n] * np.sqrt(2.0 * V[n] * math.log(params.d / params.delta)) <= 1.0
    h = stitching_h(k, params.alpha)
    cond_epoch = M[ends] * np.sqrt(2.0 * V[ends] * np.log(params.d * h / params.delta)) <= 1.0
    return {
        "n": n,
        "k_n": k,
        "M_n": M[n],
        "V_n": V[n],
        "t_fixed": t_fixed,
        "b_anytime": anytime_boundary_curve(n_max, schedule, params),
        "f_paper": smooth_boundary_curve(n_max, schedule, params, "paper"),
        "f_dominating": smooth_boundary_curve(n_max, schedule, params, "dominating"),
        "condition2_ok": cond,
        "condition2_epoch_ok": cond_epoch,
    }


def max_step_constant(
    make_schedule,
    params: BoundaryParams,
    n: int,
    delta: float | None = None,
    hi: float = 64.0,
) -> float:
    """Largest ``c`` for which ``make_schedule(c)`` satisfies the step-size condition at n.

    Bisection; the condition value is increasing in ``c`` for every schedule
    kind, so the bracket is exact up to float resolution.
    """
    delta = params.delta if delta is None else delta

    def ok(c: float) -> bool:
        # large trial values overflow M_n to inf, which simply reads as "fails"
        with np.errstate(over="ignore", invalid="ignore"):
            return bool(condition_value(stats_at(n, make_schedule(c), params), delta, params.d) <= 1.0)

    lo = 0.0
    while ok(hi):
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo
