"""
Exact crossing probabilities
============================

For a finite-support stream every outcome path can be enumerated, which gives
exact expectations and exact crossing probabilities with no sampling error.
Here X is 0.5 or 1.5 with equal probability, so Sigma = 1 and there are
2^16 = 65,536 paths up to n = 16.
"""
import numpy as np

from matprod_anytime.boundary import BoundaryParams, StepSchedule, anytime_boundary_curve, max_step_constant
from matprod_anytime.oracle import (
    enumerate_paths,
    exact_crossing_probability,
    martingale_check,
    submartingale_check,
)
from matprod_anytime.streams import FiniteSupport

dist = FiniteSupport([[[0.5]], [[1.5]]], [0.5, 0.5])
params = BoundaryParams(delta=0.2, d=1, L=dist.deviation_bound(), lambda_max=1.0)
n = 16
schedule = StepSchedule.constant(max_step_constant(StepSchedule.constant, params, n))
print(f"eta = {schedule.c:.5f}")

table = enumerate_paths(dist, schedule, n)
print(f"{table.Z.shape[0]} paths, E[Z_n] = {table.mean[0, 0]:.12f}, "
      f"(1 + eta)^n = {(1 + schedule.c) ** n:.12f}")

# Y_n = E_n^{-1} Z_n - I is a martingale and ||Y_n|| a submartingale, exactly.
print(f"martingale residual     {martingale_check(dist, schedule, 10):.2e}")
print(f"submartingale min slack {submartingale_check(dist, schedule, 10):.2e}")

b = anytime_boundary_curve(n, schedule, params)
print(f"\nP(cross the epoch boundary by n = 16) = {exact_crossing_probability(table, b):.6f}"
      f"  (delta = {params.delta})")

# Shrinking the boundary shows where it starts to bind.
for scale in (0.5, 0.2, 0.1, 0.05, 0.01):
    p = exact_crossing_probability(table, scale * b)
    print(f"  boundary x {scale:<5} -> {p:.4f}")

# Checking only at n = 16 is never more likely than checking along the way.
fixed = exact_crossing_probability(table, 0.1 * b, mode="fixed_time")
print(f"\nat n = 16 only, boundary x 0.1 -> {fixed:.4f}")
