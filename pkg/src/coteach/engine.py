"""Episode and session simulation for the five teacher/student interaction modes.

An episode is one teacher interacting with one group to teach one target
concept. Student beliefs live in a (students x concepts) matrix so a public
answer updates the whole group in one vectorized step.

Termination per mode:

* active learning: a not-yet-learned student asks each step, until every
  student has learned the target;
* active / adaptive teaching: the teacher suggests each step, until its own
  belief is a point mass on the target (or nothing useful is left to suggest);
* the "+ active learning" variants interleave: a suggestion the chosen student
  cannot observe is followed by one student question; once the teacher
  believes it is done (or has nothing left to suggest) students keep asking
  until everyone has learned.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable

import numpy as np

from .adaptive import ObservabilityBelief, init_observability_beliefs, record_reports, thompson_sample
from .agents import (
    StudentState,
    TeacherEpisodeState,
    student_select_question,
    teacher_answer,
    teacher_observe_report,
    teacher_select_suggestion,
)
from .beliefs import ATOL, condition, condition_rows, is_learned, uniform_belief
from .scenario import Scenario


class InteractionMode(str, Enum):
    ACTIVE_LEARNING = "active-learning"
    ACTIVE_TEACHING = "active-teaching"
    ACTIVE_TEACHING_ACTIVE_LEARNING = "active-teaching+active-learning"
    ADAPTIVE_TEACHING = "adaptive-teaching"
    ADAPTIVE_TEACHING_ACTIVE_LEARNING = "adaptive-teaching+active-learning"

    @property
    def adaptive(self) -> bool:
        return self.value.startswith("adaptive")

    @property
    def teaches(self) -> bool:
        return self is not InteractionMode.ACTIVE_LEARNING

    @property
    def learns(self) -> bool:
        """True for modes in which students ask questions."""
        return self.value.endswith("active-learning")

    def __str__(self):
        return self.value


ALL_LEARNED = "all_learned"
TEACHER_BELIEVES_DONE = "teacher_believes_done"
STALLED = "stalled"
STEP_CAP = "step_cap"


@dataclass(frozen=True)
class StepEvent:
    step: int
    actor: str  # "teacher" or a student id
    action: str  # "suggest" or "ask"
    feature: int
    value: int
    fraction_learned: float
    target_student: str | None = None
    observed: bool | None = None


@dataclass
class EpisodeLog:
    mode: InteractionMode
    group: int
    target: int
    events: list[StepEvent]
    status: str
    final_fraction: float
    reports: list[tuple[int, bool]] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.events)

    @property
    def fractions(self) -> np.ndarray:
        return np.array([e.fraction_learned for e in self.events])


@dataclass
class RoundLog:
    index: int  # 1-based
    target: int
    episodes: list[EpisodeLog]
    observability: ObservabilityBelief | None = None  # after the round's updates


@dataclass
class SessionLog:
    mode: InteractionMode
    rounds: list[RoundLog]

    @property
    def episodes(self) -> list[EpisodeLog]:
        return [ep for r in self.rounds for ep in r.episodes]

    @property
    def observability(self) -> ObservabilityBelief | None:
        return self.rounds[-1].observability if self.rounds else None


StepHook = Callable[[np.ndarray, TeacherEpisodeState], None]


def step_cap(s: Scenario) -> int:
    return 4 * s.num_features


def run_episode(
    s: Scenario,
    group: int,
    target: int,
    mode: InteractionMode | str,
    ob: ObservabilityBelief | None = None,
    rng: np.random.Generator | int | None = None,
    on_step: StepHook | None = None,
) -> EpisodeLog:
    """Simulate one teacher/group episode for ``target`` under ``mode``.

    ``ob`` is required for the adaptive modes and is not modified; the
    observability reports gathered are returned in the log for the caller to
    record. ``on_step`` is called after every step with the students' belief
    matrix and the teacher state (instrumentation only).
    """
    mode = InteractionMode(mode)
    if mode.adaptive != (ob is not None):
        raise ValueError(f"mode {mode} {'requires' if mode.adaptive else 'does not take'} an observability belief")
    rng = np.random.default_rng(rng)

    members = s.groups[group]
    types = np.array([st.type_index for st in members])
    observes = s.observability[types] == 1  # (students, features)
    n = len(members)
    P = np.tile(uniform_belief(s.num_concepts), (n, 1))
    teacher = TeacherEpisodeState(uniform_belief(s.num_concepts))
    weights = thompson_sample(ob, group, rng) if mode.adaptive else None
    events: list[StepEvent] = []
    reports: list[tuple[int, bool]] = []

    def learned() -> np.ndarray:
        return P[:, target] >= 1.0 - ATOL

    def broadcast(feature: int) -> int:
        value = teacher_answer(target, feature, s)
        condition_rows(P, observes[:, feature], feature, value, s)
        teacher.asked.add(feature)
        return value

    def ask() -> None:
        nonlocal teacher
        pending = np.flatnonzero(~learned())
        k = int(pending[rng.integers(pending.size)])
        st = StudentState(members[k].id, int(types[k]), P[k])
        feature = student_select_question(st, teacher.asked, s)
        value = broadcast(feature)
        if mode.teaches:
            teacher.belief = condition(teacher.belief, feature, value, s)
        events.append(StepEvent(len(events) + 1, st.id, "ask", feature, value, float(learned().mean())))
        if on_step:
            on_step(P, teacher)

    def suggest() -> bool | None:
        """One teaching step; returns whether the chosen student observed it, None on stall."""
        nonlocal teacher
        k = int(rng.integers(n))
        feature = teacher_select_suggestion(teacher, target, s, weights)
        if feature is None:
            return None
        value = broadcast(feature)
        observed = bool(observes[k, feature])
        reports.append((feature, observed))
        teacher = teacher_observe_report(teacher, feature, observed, target, s)
        events.append(StepEvent(
            len(events) + 1, "teacher", "suggest", feature, value, float(learned().mean()),
            target_student=members[k].id, observed=observed,
        ))
        if on_step:
            on_step(P, teacher)
        return observed

    cap = step_cap(s)
    status = ALL_LEARNED
    if mode is InteractionMode.ACTIVE_LEARNING:
        while not learned().all():
            if len(events) >= cap:
                status = STEP_CAP
                break
            ask()
    elif not mode.learns:
        while True:
            if is_learned(teacher.belief, target):
                status = TEACHER_BELIEVES_DONE
                break
            if len(events) >= cap:
                status = STEP_CAP
                break
            if suggest() is None:
                status = STALLED
                break
        if status != STEP_CAP and learned().all():
            status = ALL_LEARNED
    else:
        fallback = False
        question_next = False
        while not learned().all():
            if len(events) >= cap:
                status = STEP_CAP
                break
            if not fallback and is_learned(teacher.belief, target):
                fallback = True
            if fallback or question_next:
                ask()
                question_next = False
                continue
            observed = suggest()
            if observed is None:
                fallback = True
            elif not observed:
                question_next = True

    return EpisodeLog(mode, group, target, events, status, float(learned().mean()), reports)


def run_session(
    s: Scenario,
    mode: InteractionMode | str,
    rounds: int,
    rng: np.random.Generator | int | None = None,
    on_step: StepHook | None = None,
) -> SessionLog:
    """Teach ``rounds`` random targets, each to the three groups in order.

    Adaptive modes carry one observability belief across the whole session.
    """
    mode = InteractionMode(mode)
    if rounds < 1:
        raise ValueError("rounds must be positive")
    rng = np.random.default_rng(rng)
    ob = init_observability_beliefs(s) if mode.adaptive else None
    out = []
    for r in range(rounds):
        target = int(rng.integers(s.num_concepts))
        episodes = []
        for g in range(len(s.groups)):
            log = run_episode(s, g, target, mode, ob, rng, on_step)
            if ob is not None:
                ob = record_reports(ob, g, log.reports)
            episodes.append(log)
        out.append(RoundLog(r + 1, target, episodes, ob))
    return SessionLog(mode, out)


def event_records(session: SessionLog, s: Scenario):
    """Yield one flat dict per step event, tagged with its round/group/target."""
    for rnd in session.rounds:
        for ep in rnd.episodes:
            for e in ep.events:
                rec = {
                    "mode": session.mode.value,
                    "round": rnd.index,
                    "group": ep.group + 1,
                    "target": s.concepts[ep.target],
                }
                rec.update(asdict(e))
                rec["feature"] = s.features[e.feature]
                yield rec


def write_event_log(session: SessionLog, s: Scenario, path) -> None:
    with Path(path).open("w") as fh:
        for rec in event_records(session, s):
            fh.write(json.dumps(rec) + "\n")
