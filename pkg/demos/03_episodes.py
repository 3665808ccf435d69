"""
One episode under each interaction mode
=======================================

"""

import numpy as np

from coteach.adaptive import init_observability_beliefs
from coteach.engine import InteractionMode, run_episode
from coteach.scenario import builtin_guesswho

s = builtin_guesswho()
target = s.concepts.index("Mary")
ob = init_observability_beliefs(s)

for mode in InteractionMode:
    log = run_episode(s, 2, target, mode, ob if mode.adaptive else None, rng=np.random.default_rng(3))
    print(f"\n{mode}: {log.status}, {log.final_fraction:.0%} learned after {log.steps} steps")
    for e in log.events:
        seen = "" if e.observed is None else f" -> {e.target_student} {'saw' if e.observed else 'missed'} it"
        print(f"  {e.step}. {e.actor} {e.action}s {s.features[e.feature]}={e.value}{seen} ({e.fraction_learned:.0%})")

# group 3 is mostly orange, who cannot see Hat; the adaptive teacher starts
# from a flat prior, so it may try Hat first and learn from the miss
