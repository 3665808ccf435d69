"""Per-group Beta posteriors over feature observability, and Thompson sampling.

For every group ``g`` and feature ``f`` the teacher keeps Beta(alpha, beta)
over the probability that a student of ``g`` observes ``f``. Both parameters
start at one (uniform prior); each observability report adds one to alpha
(observed) or beta (not observed).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .scenario import Scenario


@dataclass(frozen=True, eq=False)
class ObservabilityBelief:
    alpha: np.ndarray  # shape (groups, features)
    beta: np.ndarray

    def __post_init__(self):
        for name in ("alpha", "beta"):
            arr = np.array(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.alpha.shape != self.beta.shape or self.alpha.ndim != 2:
            raise ValueError("alpha and beta must be matching (groups, features) arrays")
        if self.alpha.min(initial=1) < 1 or self.beta.min(initial=1) < 1:
            raise ValueError("Beta parameters must be at least 1")

    @property
    def report_counts(self) -> np.ndarray:
        """Number of reports recorded per (group, feature)."""
        return self.alpha + self.beta - 2

    def __eq__(self, other):
        if not isinstance(other, ObservabilityBelief):
            return NotImplemented
        return np.array_equal(self.alpha, other.alpha) and np.array_equal(self.beta, other.beta)

    __hash__ = None


def init_observability_beliefs(s: Scenario) -> ObservabilityBelief:
    shape = (len(s.groups), s.num_features)
    return ObservabilityBelief(np.ones(shape), np.ones(shape))


def thompson_sample(ob: ObservabilityBelief, group: int, rng: np.random.Generator) -> np.ndarray:
    """One draw of every feature's observability for ``group`` from its posterior."""
    return rng.beta(ob.alpha[group], ob.beta[group])


def record_reports(ob: ObservabilityBelief, group: int, reports: Iterable[tuple[int, bool]]) -> ObservabilityBelief:
    alpha = ob.alpha.copy()
    beta = ob.beta.copy()
    for feature, observed in reports:
        if observed:
            alpha[group, feature] += 1
        else:
            beta[group, feature] += 1
    return ObservabilityBelief(alpha, beta)


def posterior_mean(ob: ObservabilityBelief, group: int, feature: int) -> float:
    a = ob.alpha[group, feature]
    return float(a / (a + ob.beta[group, feature]))


def posterior_means(ob: ObservabilityBelief) -> np.ndarray:
    return ob.alpha / (ob.alpha + ob.beta)


def dump_csv(ob: ObservabilityBelief, s: Scenario | None = None) -> str:
    """CSV text with columns group, feature, alpha, beta, posterior_mean."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["group", "feature", "alpha", "beta", "posterior_mean"])
    n_groups, n_features = ob.alpha.shape
    for g in range(n_groups):
        for f in range(n_features):
            name = s.features[f] if s is not None else f
            w.writerow([g + 1, name, int(ob.alpha[g, f]), int(ob.beta[g, f]), f"{posterior_mean(ob, g, f):.6f}"])
    return buf.getvalue()
