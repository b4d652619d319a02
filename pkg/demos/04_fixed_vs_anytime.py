"""
Fixed-time versus anytime thresholds
====================================

With eta_i = mu / n for a horizon n, M_n = (1 + mu/n)^n tends to e^mu. The
anytime threshold is M_n times the fixed-time one, so the price of
uniformity settles at e^mu while both shrink like 1/sqrt(n).
"""
import math

from matprod_anytime.montecarlo import remark2_comparison

d, delta, L = 2, 0.05, 1.0
for mu in (0.5, 1.0):
    print(f"mu = {mu}:  e^mu = {math.exp(mu):.6f}")
    print(f"{'n':>7} {'M_n':>10} {'t_fixed':>10} {'t_anytime':>10} {'sqrt(n) t_fixed':>16}")
    for n in (10, 100, 1000, 10_000, 100_000):
        r = remark2_comparison(mu, L, d, delta, n)
        print(f"{n:7d} {r.M_n:10.6f} {r.t_fixed:10.6f} {r.t_anytime:10.6f} {math.sqrt(n) * r.t_fixed:16.6f}")
    ref = L * math.e * math.exp(mu) * math.sqrt(2 * math.log(d / delta))
    print(f"{'':>7} limit of sqrt(n) t_fixed: {ref:.6f}\n")
