"""
Streaming PCA with Oja's rule
=============================

Oja's update w <- normalize((I + eta x x^T) w) applies exactly the random
matrix product studied in this package to the starting vector. We run it on
a two-dimensional stream with Sigma = diag(1, 0.5) and watch the
sin^2 angle to the top eigenvector alongside the product deviation and its
anytime boundary.
"""
import numpy as np

from matprod_anytime.boundary import StepSchedule
from matprod_anytime.oja import run_oja_demo
from matprod_anytime.streams import RankOneSphere

dist = RankOneSphere(np.diag([1.0, 0.5]))
N = 2000
series = run_oja_demo(dist, StepSchedule.fixed_horizon(10.0, N), N, seed=0, init="random")

print(f"initial sin^2 error {series.initial_error:.4f}")
print(f"{'n':>5} {'sin2':>10} {'dev':>10} {'boundary':>10}")
for n in (1, 10, 50, 100, 250, 500, 1000, 1500, 2000):
    i = n - 1
    print(f"{n:5d} {series.sin2_error[i]:10.2e} {series.dev[i]:10.4f} {series.boundary[i]:10.4f}")

# Steps of 10 / N are far too large for the boundary's step-size condition,
# so the boundary column is only a reference. It is nan in the last epoch,
# whose right end 2048 lies past the horizon N = 2000. Oja converges anyway:
# the error decays once the eigengap has acted for long enough.
