"""
Entropy and information gain from both sides
============================================

The teacher knows the answer, so it scores a feature by the entropy
actually removed. A student does not, so it averages over both answers.
"""

from coteach import beliefs as B
from coteach.scenario import builtin_guesswho

s = builtin_guesswho()
p = B.uniform_belief(s.num_concepts)
print(f"prior entropy {B.entropy(p):.4f} nats")

# realised gain for target John, one entry per feature
john = s.concepts.index("John")
for f, g in zip(s.features, B.teacher_gains(p, john, s)):
    print(f"teacher  {f:10s} {g:.4f}")

# expected gain for each student type; blind features score zero
for k, t in enumerate(s.student_types):
    for f, g in zip(s.features, B.student_gains(p, k, s)):
        print(f"{t.name:7s} {f:10s} {g:.4f}")

# revealing Hat=1 pins down John outright
q = B.condition(p, s.features.index("Hat"), 1, s)
print(q, B.is_learned(q, john))

# a zero-mass answer is rejected rather than silently renormalized
try:
    B.condition(q, s.features.index("Glasses"), 1, s)
except B.InconsistentAnswerError as exc:
    print("rejected:", exc)
