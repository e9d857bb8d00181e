"""Scale, convolution, mixture and variability experiments on small corpora."""

from mrleq import Exponential, TruncatedNormal, Uniform
from mrleq.comparative import (
    closure_experiments,
    normal_family_experiment,
    scale_experiment,
    variability_experiments,
)

for d in (Uniform(0, 1), Exponential(1.0), TruncatedNormal(10, 2)):
    print(type(d).__name__, scale_experiment(d).summary)

rep = closure_experiments(Exponential(2.0), Exponential(1.0), {"name": "power", "k": 2}, Uniform(0, 1), 0.5)
for c in rep.cases:
    print(f"{c.status:4s} {c.case_id}: {c.observed}")

# skipped cases carry the uncertified precondition
rep = variability_experiments(Uniform(0.25, 0.75), Uniform(0, 1))
for c in rep.cases:
    print(f"{c.status:4s} {c.case_id}: {c.reason or c.observed}")

# CV and dispersion disagree for normal demand truncated at zero
c = normal_family_experiment(1, 1, 1, 2).cases[0]
print(c.status, {k: round(v, 4) for k, v in c.observed.items() if isinstance(v, float)}, c.reason)
