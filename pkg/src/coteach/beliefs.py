"""Belief vectors over concepts, entropy, conditioning and information gain.

A belief is a plain 1-D numpy array of probabilities over the scenario's
concepts. All logarithms are natural, so entropies and gains are in nats.
"""

from __future__ import annotations

import numpy as np
from scipy.special import entr

from .scenario import Scenario

ATOL = 1e-9


class InconsistentAnswerError(ValueError):
    """An answer rules out every concept the belief still considers possible."""


def uniform_belief(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("a belief needs at least one concept")
    return np.full(n, 1.0 / n)


def check_belief(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("belief must be a non-empty vector")
    if np.any(p < 0):
        raise ValueError("belief has negative entries")
    if abs(p.sum() - 1.0) > ATOL:
        raise ValueError(f"belief sums to {p.sum()!r}, not 1")
    return p


def entropy(p) -> float:
    """Shannon entropy in nats, with 0 ln 0 = 0."""
    return float(entr(np.asarray(p, dtype=float)).sum())


def condition(p, feature: int, value: int, s: Scenario) -> np.ndarray:
    """Zero out concepts whose ``feature`` differs from ``value`` and renormalize."""
    p = np.asarray(p, dtype=float)
    q = np.where(s.feature_table[feature] == value, p, 0.0)
    total = q.sum()
    if total <= 0.0:
        raise InconsistentAnswerError(
            f"answer {s.features[feature]}={value} contradicts every concept in the belief's support"
        )
    if not np.any(q != p):
        # nothing ruled out; skip renormalizing so repeats are exact no-ops
        return p.copy()
    return q / total


def condition_rows(P: np.ndarray, rows: np.ndarray, feature: int, value: int, s: Scenario) -> None:
    """In-place :func:`condition` of the selected rows of a belief matrix."""
    if not rows.any():
        return
    old = P[rows]
    sub = old * (s.feature_table[feature] == value)
    totals = sub.sum(axis=1, keepdims=True)
    if np.any(totals <= 0.0):
        raise InconsistentAnswerError(
            f"answer {s.features[feature]}={value} contradicts a belief's whole support"
        )
    changed = np.any(sub != old, axis=1, keepdims=True)
    P[rows] = np.where(changed, sub / totals, old)


def _branch_entropies(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mass and entropy of each (unnormalized) row; zero-mass rows get entropy 0."""
    mass = P.sum(axis=-1)
    safe = np.where(mass > 0, mass, 1.0)
    h = entr(P / safe[..., None]).sum(axis=-1)
    return mass, np.where(mass > 0, h, 0.0)


def teacher_gains(p, target: int, s: Scenario) -> np.ndarray:
    """Realised entropy drop from revealing each feature's value for ``target``.

    Entry ``f`` equals :func:`teacher_information_gain` for feature ``f``.
    """
    p = np.asarray(p, dtype=float)
    table = s.feature_table
    agree = table == table[:, target : target + 1]
    mass, h = _branch_entropies(agree * p)
    if np.any(mass <= 0.0):
        raise InconsistentAnswerError("the target is outside the belief's support")
    # a feature that keeps the whole support gains exactly nothing
    unchanged = ~np.any((p > 0) & ~agree, axis=1)
    return np.where(unchanged, 0.0, entropy(p) - h)


def teacher_information_gain(p, feature: int, target: int, s: Scenario) -> float:
    return entropy(p) - entropy(condition(p, feature, s.feature_value(feature, target), s))


def student_gains(p, type_index: int, s: Scenario) -> np.ndarray:
    """Expected entropy drop of asking each feature, from a student's point of view.

    Features the student's type cannot observe have gain 0.
    """
    p = np.asarray(p, dtype=float)
    table = s.feature_table
    m1, h1 = _branch_entropies(table * p)
    m0, h0 = _branch_entropies((1 - table) * p)
    gains = np.maximum(entropy(p) - (m0 * h0 + m1 * h1), 0.0)
    gains = np.where((m0 > 0) & (m1 > 0), gains, 0.0)
    return np.where(s.student_types[type_index].mask == 1, gains, 0.0)


def student_expected_information_gain(p, feature: int, type_index: int, s: Scenario) -> float:
    if not s.observes(type_index, feature):
        return 0.0
    p = np.asarray(p, dtype=float)
    h = entropy(p)
    expected = 0.0
    for value in (0, 1):
        mass = float(p[s.feature_table[feature] == value].sum())
        if mass > 0.0:
            expected += mass * entropy(condition(p, feature, value, s))
    return max(h - expected, 0.0)


def is_learned(p, target: int) -> bool:
    """True when the belief is a point mass on ``target``."""
    return bool(abs(np.asarray(p)[target] - 1.0) <= ATOL)


def is_uniform_over_support(p, atol: float = ATOL) -> bool:
    p = np.asarray(p, dtype=float)
    support = p > atol
    return bool(support.any() and np.allclose(p[support], 1.0 / support.sum(), rtol=0.0, atol=atol))
