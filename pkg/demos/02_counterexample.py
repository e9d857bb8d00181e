"""A demand that stochastically dominates another but commands a lower price.

F is a decaying sinusoid and G is exponential(0.9). F dominates G pointwise
in survival, yet r*_F < r*_G because F is not DMRL and the MRL order fails.
"""

import os
import tempfile

import numpy as np

from mrleq import Exponential, Sinusoid, solve_wholesale_price
from mrleq.comparative import counterexample_reproduction
from mrleq.orders import check_mrl, check_st

f = Sinusoid(np.pi, 0.8, 1.2)
g = Exponential(0.9)

print("G <=st F :", check_st(g, f).forward)
v = check_mrl(g, f)
print("G <=mrl F:", v.holds, "witness", v.witness)

r_f = solve_wholesale_price(f, certify=False).r_star
r_g = solve_wholesale_price(g).r_star
print(f"r*_F = {r_f:.10f}")
print(f"r*_G = {r_g:.10f}")

# full report, with the curves written as CSV for plotting elsewhere
out = tempfile.mkdtemp()
rep = counterexample_reproduction(out_dir=out)
for case in rep.cases:
    print(f"  {case.status:4s} {case.case_id}  {case.reason}")
print("curves:", os.path.join(out, "counterexample_curves.csv"))
