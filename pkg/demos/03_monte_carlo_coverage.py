"""
Monte Carlo coverage
====================

A d = 5 stream of rank-one matrices X = z z^T, with z uniform on a scaled
sphere so that E[X] = Sigma = diag(1, .8, .6, .4, .2). Each trajectory runs
512 steps against the epoch boundary and we count the crossings.

Trajectory i always uses the same random stream, so the result does not
depend on how many threads run the chunks.
"""
import numpy as np

from matprod_anytime.boundary import BoundaryParams, StepSchedule, epoch_endpoint, epoch_index, max_step_constant
from matprod_anytime.montecarlo import ExperimentConfig, empirical_tail_curve, estimate_violation_rate
from matprod_anytime.streams import RankOneSphere

dist = RankOneSphere(np.diag([1.0, 0.8, 0.6, 0.4, 0.2]))
params = BoundaryParams(delta=0.1, d=5, L=dist.deviation_bound(), lambda_max=1.0)
N = 512
end = int(epoch_endpoint(epoch_index(N, params.eta_epoch), params.eta_epoch))
c = max_step_constant(lambda c: StepSchedule.fixed_horizon(c, N), params, end)
schedule = StepSchedule.fixed_horizon(c, N)
print(f"eta_i = {c:.4f} / {N}")

cfg = ExperimentConfig(dist, schedule, params, n_max=N, trajectories=2048, master_seed=1)
rep = estimate_violation_rate(cfg)
print(f"violations {rep.violations}/{rep.trajectories}, 95% CI [{rep.ci95[0]:.4f}, {rep.ci95[1]:.4f}]")
print(f"largest dev_n / boundary(n) seen: {rep.max_dev_ratio.max():.3f}")
print(rep.truncation_notice)

# The boundary is conservative. Scaling it down shows how much.
for s in (0.5, 0.25, 0.1):
    r = estimate_violation_rate(ExperimentConfig(dist, schedule, params, N, 2048, 1, boundary_scale=s))
    print(f"  boundary x {s:<4}: rate {r.rate:.4f}, first crossings by epoch {r.epoch_histogram}")

# Tail of the running maximum of ||Y_k||, next to its exponential bound.
print("\n   u  empirical   bound")
for p in empirical_tail_curve(cfg, [0.05, 0.1, 0.25, 0.5, 1.0, 2.0]):
    print(f"{p.u:5.2f}  {p.empirical:9.4f}  {p.bound:6.4f}")
