"""Monte Carlo estimates of boundary violations and of the maximal tail.

Runs are split into fixed-size chunks of trajectory indices; chunk
composition never depends on the number of worker threads, so every output
is bit-identical for any degree of parallelism. Results only cover steps
``1..n_max``: a violation rate is a lower bound on the all-time probability.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy import stats as sps

from .boundary import (
    BoundaryParams,
    CumulativeStats,
    StepSchedule,
    anytime_boundary_curve,
    condition_value,
    epoch_endpoint,
    epoch_index,
    epoch_indices,
    huang_tail,
    smooth_boundary_curve,
    stats_at,
    stats_path,
    stitching_h,
)
from .streams import BatchResult, simulate_batch

__all__ = [
    "THREADS_ENV",
    "ExperimentConfig",
    "ViolationReport",
    "TailPoint",
    "ThresholdComparison",
    "clopper_pearson",
    "boundary_curve",
    "run_trajectories",
    "estimate_violation_rate",
    "empirical_tail_curve",
    "remark2_comparison",
]

THREADS_ENV = "MATPROD_ANYTIME_THREADS"
CHUNK_SIZE = 1024

BoundaryVariant = Literal["epoch", "smooth_paper", "smooth_dominating"]


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    return max(1, int(raw)) if raw else 1


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Exact two-sided binomial confidence interval."""
    a = 1.0 - level
    lo = 0.0 if k == 0 else float(sps.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(sps.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


@dataclass(frozen=True)
class ExperimentConfig:
    dist: object
    schedule: StepSchedule
    params: BoundaryParams
    n_max: int
    trajectories: int
    master_seed: int = 0
    boundary_variant: BoundaryVariant = "epoch"
    boundary_scale: float = 1.0

    def __post_init__(self):
        if self.n_max < 1 or self.trajectories < 1:
            raise ValueError("n_max and trajectories must be >= 1")
        if self.boundary_variant not in ("epoch", "smooth_paper", "smooth_dominating"):
            raise ValueError(f"unknown boundary variant {self.boundary_variant!r}")
        if self.params.d != self.dist.d:
            raise ValueError(f"params.d = {self.params.d} but the distribution has d = {self.dist.d}")


def boundary_curve(cfg: ExperimentConfig) -> np.ndarray:
    """Boundary values for n = 1..n_max under the configured variant and scale."""
    if cfg.boundary_variant == "epoch":
        b = anytime_boundary_curve(cfg.n_max, cfg.schedule, cfg.params)
    elif cfg.boundary_variant == "smooth_paper":
        b = smooth_boundary_curve(cfg.n_max, cfg.schedule, cfg.params, "paper")
    else:
        b = smooth_boundary_curve(cfg.n_max, cfg.schedule, cfg.params, "dominating")
    return cfg.boundary_scale * b


def run_trajectories(
    cfg: ExperimentConfig,
    boundary: np.ndarray | None,
    threads: int | None = None,
    chunk_size: int = CHUNK_SIZE,
) -> BatchResult:
    """Simulate trajectories ``0..cfg.trajectories-1``; results in index order."""
    threads = default_threads() if threads is None else max(1, int(threads))
    idx = np.arange(cfg.trajectories)
    chunks = [idx[i:i + chunk_size] for i in range(0, idx.size, chunk_size)]

    def work(chunk):
        return simulate_batch(cfg.dist, cfg.schedule, cfg.n_max, boundary, cfg.master_seed, chunk)

    if threads == 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    return BatchResult(
        indices=idx,
        first_crossing=np.concatenate([p.first_crossing for p in parts]),
        max_ydev=np.concatenate([p.max_ydev for p in parts]),
        max_dev_ratio=np.concatenate([p.max_dev_ratio for p in parts]),
    )


@dataclass
class ViolationReport:
    violations: int
    trajectories: int
    rate: float
    ci95: tuple[float, float]
    delta: float
    n_max: int
    condition2_ok: bool
    condition2_epoch_ok: bool
    epoch_histogram: dict = field(default_factory=dict)
    first_crossing: np.ndarray | None = None
    max_dev_ratio: np.ndarray | None = None

    @property
    def truncation_notice(self) -> str:
        return (
            f"crossings checked for n <= {self.n_max} only; "
            "the rate is a lower bound on the all-time violation probability"
        )


def _condition_flags(cfg: ExperimentConfig) -> tuple[bool, bool]:
    """Step-size condition at the last epoch endpoint (delta), and at every
    epoch endpoint with delta / h(k)."""
    p = cfg.params
    k_last = epoch_index(cfg.n_max, p.eta_epoch)
    ks = np.arange(k_last + 1)
    ends = epoch_endpoint(ks, p.eta_epoch)
    M, V = stats_path(cfg.schedule, p, int(ends.max()))
    N = int(ends[-1])
    plain = condition_value(CumulativeStats(N, M[N], V[N]), p.delta, p.d) <= 1.0
    per_epoch = all(
        condition_value(CumulativeStats(int(e), M[e], V[e]), p.delta / stitching_h(int(k), p.alpha), p.d) <= 1.0
        for k, e in zip(ks, ends)
    )
    return bool(plain), bool(per_epoch)


def estimate_violation_rate(cfg: ExperimentConfig, threads: int | None = None) -> ViolationReport:
    """Fraction of trajectories with dev_n >= boundary(n) for some n <= n_max."""
    b = boundary_curve(cfg)
    res = run_trajectories(cfg, b, threads)
    crossed = res.first_crossing > 0
    v = int(crossed.sum())
    k = epoch_indices(cfg.n_max, cfg.params.eta_epoch)
    hist: dict[int, int] = {}
    for n in res.first_crossing[crossed]:
        hist[int(k[n - 1])] = hist.get(int(k[n - 1]), 0) + 1
    ok, ok_epoch = _condition_flags(cfg)
    return ViolationReport(
        violations=v,
        trajectories=cfg.trajectories,
        rate=v / cfg.trajectories,
        ci95=clopper_pearson(v, cfg.trajectories),
        delta=cfg.params.delta,
        n_max=cfg.n_max,
        condition2_ok=ok,
        condition2_epoch_ok=ok_epoch,
        epoch_histogram=dict(sorted(hist.items())),
        first_crossing=res.first_crossing,
        max_dev_ratio=res.max_dev_ratio,
    )


@dataclass(frozen=True)
class TailPoint:
    u: float
    empirical: float
    bound: float          # min(1, tail bound)
    ci_lo: float
    ci_hi: float
    raw_bound: float


def empirical_tail_curve(
    cfg: ExperimentConfig,
    u_grid: Sequence[float],
    threads: int | None = None,
) -> list[TailPoint]:
    """Empirical P(max_{k<=n} ||Y_k|| >= u M_n) at n = n_max beside the tail bound."""
    stats = stats_at(cfg.n_max, cfg.schedule, cfg.params)
    bounds = [huang_tail(float(u), stats, cfg.params.d) for u in u_grid]  # validates the grid
    res = run_trajectories(cfg, None, threads)
    T = cfg.trajectories
    out = []
    for u, raw in zip(u_grid, bounds):
        hits = int(np.count_nonzero(res.max_ydev >= u * stats.M))
        lo, hi = clopper_pearson(hits, T)
        out.append(TailPoint(float(u), hits / T, min(1.0, raw), lo, hi, raw))
    return out


@dataclass(frozen=True)
class ThresholdComparison:
    n: int
    M_n: float
    V_n: float
    t_fixed: float
    t_anytime: float
    t_fixed_order: float
    t_anytime_order: float
    ratio: float
    e_mu: float
    e_2mu: float


def remark2_comparison(mu: float, L: float, d: int, delta: float, n: int) -> ThresholdComparison:
    """Fixed-time versus anytime threshold with eta_i = 1/n and ||X_i - Sigma|| <= L.

    ``t_fixed`` / ``t_anytime`` include the leading constant e; the ``*_order``
    fields drop it, which is the scale compared with L e^mu sqrt(log(d/delta)/n).
    """
    params = BoundaryParams(delta=delta, d=d, L=L, lambda_max=mu)
    s = stats_at(n, StepSchedule.fixed_horizon(1.0, n), params)
    root = math.sqrt(2.0 * s.V * math.log(d / delta))
    t_fixed = math.e * s.M * root
    t_any = math.e * s.E_norm * s.M * root
    return ThresholdComparison(
        n=n,
        M_n=s.M,
        V_n=s.V,
        t_fixed=t_fixed,
        t_anytime=t_any,
        t_fixed_order=s.M * root,
        t_anytime_order=s.E_norm * s.M * root,
        ratio=t_any / t_fixed if t_fixed > 0 else s.E_norm,
        e_mu=math.exp(mu),
        e_2mu=math.exp(2.0 * mu),
    )
