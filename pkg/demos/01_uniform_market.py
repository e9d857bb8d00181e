"""Walk through one market: demand uniform on [0, 2] with three retailers."""

import numpy as np

from mrleq import MarketConfig, Uniform, fundamentals, solve_wholesale_price
from mrleq.oracle import argmax_grid
from mrleq.reliability import check_property, profile

demand = Uniform(0.0, 2.0)
cfg = MarketConfig(n=3, demand=demand)

# uniform demand has a decreasing generalized MRL, so the supplier's
# revenue is unimodal and the fixed point of m(r) = r is the price
print("DGMRL certificate:", check_property(demand, "DGMRL", strictness="strict").holds)

res = solve_wholesale_price(cfg)
print(f"r* = {res.r_star:.10f}  (analytic 2/3)")

# brute force: grid argmax of the supplier's expected profit
r_hat, report = argmax_grid(demand, cfg.n)
print(f"grid argmax = {r_hat:.6f}, grid step {report.grid_step:.2e}")

# a few MRL values around the price
prof = profile(demand, np.array([0.25, 0.5, res.r_star, 1.0]))
for r, m, e in zip(prof.grid, prof.mrl, prof.gmrl):
    print(f"  r={r:.4f}  m(r)={m:.4f}  m(r)/r={e:.4f}")

# realized outcomes for a few demand intercepts
for alpha in (0.8, 1.2, 2.0):
    out = fundamentals(res.r_star, alpha, cfg.n)
    print(f"alpha={alpha}: q*={out.q_star:.4f} p*={out.p_star:.4f} "
          f"supplier={out.profit_supplier:.4f} efficiency={out.efficiency:.4f}")
