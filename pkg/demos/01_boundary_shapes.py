"""
Boundary shapes
===============

Three thresholds for the deviation ||Z_n - E_n|| of a random matrix product,
tabulated on a log-spaced grid of times:

* the fixed-time threshold, valid at one pre-chosen n,
* the epoch boundary, valid at every n simultaneously and constant on epochs,
* the smooth boundary, a closed-form curve in n of the same order.
"""
import numpy as np

from matprod_anytime.boundary import (
    BoundaryParams,
    StepSchedule,
    boundary_table,
    max_step_constant,
)

# d = 5, ||X_i - Sigma|| <= L = 1, lambda_max(Sigma) = 1
params = BoundaryParams(delta=0.05, d=5, L=1.0, eta_epoch=2.0, alpha=2.0, lambda_max=1.0)

# The step size is the largest constant that keeps the step-size condition
# true up to n = 2^14.
n_max = 2 ** 14
c = max_step_constant(StepSchedule.constant, params, n_max)
schedule = StepSchedule.constant(c)
print(f"constant step eta = {c:.3e}")

tab = boundary_table(n_max, schedule, params)

grid = np.unique(np.geomspace(1, n_max, 15).astype(int))
print(f"{'n':>6} {'k_n':>4} {'M_n':>8} {'t_fixed':>10} {'epoch':>10} {'smooth':>10} {'ratio':>6}")
for n in grid:
    i = n - 1
    print(f"{n:6d} {tab['k_n'][i]:4d} {tab['M_n'][i]:8.4f} {tab['t_fixed'][i]:10.5f} "
          f"{tab['b_anytime'][i]:10.5f} {tab['f_paper'][i]:10.5f} "
          f"{tab['b_anytime'][i] / tab['t_fixed'][i]:6.2f}")

# The price of uniformity in time is the ratio column: a constant factor
# from M_n and h(k) plus a log log n term hidden inside delta / h(k_n).
