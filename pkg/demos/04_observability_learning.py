"""
Learning who can see what with Thompson sampling
================================================

Across rounds the teacher collects reports of whether a student saw a
suggested feature, and its Beta posteriors converge on each group's true
observability rates.
"""

import numpy as np

from coteach.adaptive import dump_csv, posterior_means
from coteach.engine import run_session
from coteach.scenario import builtin_guesswho

s = builtin_guesswho()
session = run_session(s, "adaptive-teaching", rounds=400, rng=11)
ob = session.observability

truth = np.array([s.group_observability(g) for g in range(3)])
est = posterior_means(ob)
print("true\n", np.round(truth, 2))
print("estimated\n", np.round(est, 2))
print("reports per cell\n", ob.report_counts)

# the first rounds are spent discovering blind spots, later rounds need fewer steps
steps = [sum(ep.steps for ep in r.episodes) for r in session.rounds]
print("mean steps/round, first 20:", np.mean(steps[:20]), " last 20:", np.mean(steps[-20:]))

print(dump_csv(ob, s))
