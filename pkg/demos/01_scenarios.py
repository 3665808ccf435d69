"""
Scenarios: concepts, features and who can see what
==================================================

"""

import numpy as np

from coteach.scenario import (
    GenerationParams,
    builtin_guesswho,
    generate_scenario,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
)

# the built-in three-person board
s = builtin_guesswho()
print("concepts:", s.concepts)
print("features:", s.features)
print(s.feature_table)

# each student type has a mask of observable features
for t in s.student_types:
    print(t.name, dict(zip(s.features, t.mask.tolist())))

# fraction of each group able to observe each feature
for g in range(3):
    print(f"g{g + 1}", np.round(s.group_observability(g), 2))

print(validate_scenario(s).ok)

# break learnability: make Alex and Mary differ only in Hat,
# which orange students cannot see
doc = scenario_to_dict(s)
doc["feature_table"] = [[0, 0, 0], [1, 1, 0], [0, 1, 1]]
broken = scenario_from_dict(doc)
for v in validate_scenario(broken).violations:
    print(v)

# a random scenario in the spirit of a larger board
params = GenerationParams(
    num_concepts=32,
    num_features=15,
    num_types=2,
    blind_features_per_type=2,
    group_sizes=(30, 30, 30),
    group_type_mix=((0.6, 0.4), (0.4, 0.6), (0.5, 0.5)),
    seed=2024,
)
big = generate_scenario(params)
print(big.num_concepts, "concepts,", big.num_features, "features")
print("blind features per type:", [np.flatnonzero(t.mask == 0).tolist() for t in big.student_types])
