"""Decision rules: which feature a student asks about, and which one the teacher suggests.

Every argmax breaks ties towards the lowest feature index so replays are
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .beliefs import condition, is_learned, student_gains, teacher_gains
from .scenario import Scenario


class NoCandidateError(RuntimeError):
    """A student was asked to pick a question but every feature is already answered."""


@dataclass(frozen=True)
class StudentState:
    id: str
    type_index: int
    belief: np.ndarray


@dataclass
class TeacherEpisodeState:
    """The teacher's view of one group during one episode.

    ``belief`` is the teacher's proxy for what the group knows, ``unobserved``
    the features students reported they cannot observe, and ``asked`` every
    feature whose value was made public in the episode.
    """

    belief: np.ndarray
    unobserved: set[int] = field(default_factory=set)
    asked: set[int] = field(default_factory=set)


def _first_argmax(scores: np.ndarray, candidates: np.ndarray) -> int:
    # np.argmax returns the first maximum, and candidates are sorted
    return int(candidates[np.argmax(scores[candidates])])


def student_select_question(st: StudentState, asked: set[int], s: Scenario) -> int:
    candidates = np.array(sorted(set(range(s.num_features)) - set(asked)), dtype=int)
    if candidates.size == 0:
        raise NoCandidateError(f"student {st.id} has no unanswered feature to ask about")
    return _first_argmax(student_gains(st.belief, st.type_index, s), candidates)


def student_incorporate(st: StudentState, feature: int, value: int, s: Scenario) -> StudentState:
    if not s.observes(st.type_index, feature):
        return st
    return replace(st, belief=condition(st.belief, feature, value, s))


def teacher_answer(target: int, feature: int, s: Scenario) -> int:
    return s.feature_value(feature, target)


def teacher_select_suggestion(
    ts: TeacherEpisodeState,
    target: int,
    s: Scenario,
    weights: np.ndarray | None = None,
) -> int | None:
    """Feature with the largest (optionally observability-weighted) realised gain.

    Returns None when nothing outside ``ts.unobserved`` has positive weighted
    gain, or when the teacher already believes the target is learned.
    """
    if is_learned(ts.belief, target):
        return None
    candidates = np.array(sorted(set(range(s.num_features)) - ts.unobserved), dtype=int)
    if candidates.size == 0:
        return None
    scores = teacher_gains(ts.belief, target, s)
    if weights is not None:
        scores = np.asarray(weights, dtype=float) * scores
    best = _first_argmax(scores, candidates)
    if scores[best] <= 0.0:
        return None
    return best


def teacher_observe_report(
    ts: TeacherEpisodeState, feature: int, observed: bool, target: int, s: Scenario
) -> TeacherEpisodeState:
    if observed:
        belief = condition(ts.belief, feature, teacher_answer(target, feature, s), s)
        return TeacherEpisodeState(belief, set(ts.unobserved), set(ts.asked))
    return TeacherEpisodeState(ts.belief, ts.unobserved | {feature}, set(ts.asked))
