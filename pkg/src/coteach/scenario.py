"""The concept-learning world: concepts, binary features, student types and groups.

A :class:`Scenario` is an immutable value. Structural consistency (array shapes,
index ranges) is enforced at construction; the semantic invariants (binary
entries, learnability, exactly three groups, ...) are checked by
:func:`validate_scenario`, which reports violations as data so that malformed
worlds can still be inspected.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "GenerationExhausted",
    "GenerationParams",
    "Scenario",
    "ScenarioParseError",
    "ScenarioValidationError",
    "Student",
    "StudentType",
    "ValidationReport",
    "Violation",
    "builtin_guesswho",
    "generate_scenario",
    "load_scenario",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "validate_scenario",
]

NUM_GROUPS = 3
GENERATION_RETRIES = 10_000


class ScenarioParseError(ValueError):
    """A scenario document is malformed (bad JSON, missing or unknown keys, bad values)."""


class ScenarioValidationError(ValueError):
    """A scenario parsed fine but violates one or more world invariants."""

    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__(str(report))


class GenerationExhausted(RuntimeError):
    """No valid scenario could be generated from the given parameters."""


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StudentType:
    name: str
    mask: np.ndarray  # 1 where the type can observe the feature

    def __post_init__(self):
        object.__setattr__(self, "mask", _frozen(self.mask, np.int8))

    def __eq__(self, other):
        if not isinstance(other, StudentType):
            return NotImplemented
        return self.name == other.name and np.array_equal(self.mask, other.mask)

    __hash__ = None


@dataclass(frozen=True)
class Student:
    id: str
    type_index: int


@dataclass(frozen=True, eq=False)
class Scenario:
    """A world of concepts described by binary features, and the students learning it.

    ``feature_table[f, y]`` is the value of feature ``f`` for concept ``y``.
    """

    concepts: tuple[str, ...]
    features: tuple[str, ...]
    feature_table: np.ndarray
    student_types: tuple[StudentType, ...]
    groups: tuple[tuple[Student, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "concepts", tuple(self.concepts))
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "student_types", tuple(self.student_types))
        object.__setattr__(self, "groups", tuple(tuple(g) for g in self.groups))
        table = _frozen(self.feature_table, np.int64)
        if table.shape != (len(self.features), len(self.concepts)):
            raise ValueError(
                f"feature_table shape {table.shape} does not match "
                f"({len(self.features)} features, {len(self.concepts)} concepts)"
            )
        object.__setattr__(self, "feature_table", table)
        for t in self.student_types:
            if t.mask.shape != (len(self.features),):
                raise ValueError(f"type {t.name!r}: mask length {t.mask.size} != {len(self.features)}")

    @property
    def num_concepts(self) -> int:
        return len(self.concepts)

    @property
    def num_features(self) -> int:
        return len(self.features)

    @property
    def observability(self) -> np.ndarray:
        """Matrix of shape (num_types, num_features) of observability flags."""
        return np.stack([t.mask for t in self.student_types]) if self.student_types else np.zeros((0, self.num_features), np.int8)

    def observes(self, type_index: int, feature: int) -> bool:
        return bool(self.student_types[type_index].mask[feature])

    def feature_value(self, feature: int, concept: int) -> int:
        return int(self.feature_table[feature, concept])

    def group_observability(self, group: int) -> np.ndarray:
        """Fraction of students in ``group`` whose type observes each feature."""
        types = np.array([st.type_index for st in self.groups[group]])
        return self.observability[types].mean(axis=0)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.concepts == other.concepts
            and self.features == other.features
            and np.array_equal(self.feature_table, other.feature_table)
            and self.student_types == other.student_types
            and self.groups == other.groups
        )

    __hash__ = None


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    invariant: str
    message: str
    indices: tuple[int, ...] = ()

    def __str__(self):
        return f"{self.invariant}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


def _indistinguishable_pairs(table: np.ndarray, mask: np.ndarray) -> list[tuple[int, int]]:
    """Pairs of concepts that share a signature on the observable features."""
    visible = table[mask.astype(bool)]
    seen: dict[bytes, int] = {}
    pairs = []
    for y in range(table.shape[1]):
        key = visible[:, y].tobytes()
        if key in seen:
            pairs.append((seen[key], y))
        else:
            seen[key] = y
    return pairs


def validate_scenario(s: Scenario) -> ValidationReport:
    """Check every world invariant and return the list of violations (empty means ok)."""
    out: list[Violation] = []

    if len(s.concepts) < 2:
        out.append(Violation("concepts", f"expected at least 2 concepts, found {len(s.concepts)}"))
    if len(s.features) < 1:
        out.append(Violation("features", "expected at least 1 feature, found 0"))
    for kind, names in (("concepts", s.concepts), ("features", s.features)):
        for i, j in itertools.combinations(range(len(names)), 2):
            if names[i] == names[j]:
                out.append(Violation(kind, f"duplicate identifier {names[i]!r} at {i} and {j}", (i, j)))

    bad = np.argwhere((s.feature_table != 0) & (s.feature_table != 1))
    for f, y in bad:
        out.append(Violation(
            "feature_table",
            f"entry ({s.features[f]}, {s.concepts[y]}) = {s.feature_table[f, y]} is not 0 or 1",
            (int(f), int(y)),
        ))
    if not s.student_types:
        out.append(Violation("types", "expected at least 1 student type, found 0"))
    for ti, t in enumerate(s.student_types):
        for f in np.flatnonzero((t.mask != 0) & (t.mask != 1)):
            out.append(Violation("observability", f"type {t.name!r} feature {s.features[f]} has mask value {t.mask[f]}", (ti, int(f))))

    if len(s.groups) != NUM_GROUPS:
        out.append(Violation("groups", f"expected {NUM_GROUPS}, found {len(s.groups)}"))
    for gi, g in enumerate(s.groups):
        if not g:
            out.append(Violation("groups", f"group {gi} is empty", (gi,)))
        for st in g:
            if not 0 <= st.type_index < len(s.student_types):
                out.append(Violation("groups", f"student {st.id!r} in group {gi} has invalid type index {st.type_index}", (gi, st.type_index)))
    ids = [st.id for g in s.groups for st in g]
    if len(set(ids)) != len(ids):
        out.append(Violation("groups", "student identifiers are not unique"))

    if not bad.size:
        for ti, t in enumerate(s.student_types):
            for y0, y1 in _indistinguishable_pairs(s.feature_table, t.mask == 1):
                out.append(Violation(
                    "learnability",
                    f"concepts {s.concepts[y0]},{s.concepts[y1]} indistinguishable for type {t.name}",
                    (ti, y0, y1),
                ))
    return ValidationReport(out)


# -- builtin and generated worlds ----------------------------------------------


def builtin_guesswho() -> Scenario:
    """Three characters, three traits, two trait-blind types, three groups of five."""
    types = (
        StudentType("blue", [1, 0, 1]),    # cannot tell brown hair
        StudentType("orange", [1, 1, 0]),  # cannot see hats
    )
    mixes = ((3, 2), (2, 3), (1, 4))
    groups = []
    for gi, (n_blue, n_orange) in enumerate(mixes):
        members = [0] * n_blue + [1] * n_orange
        groups.append(tuple(Student(f"g{gi + 1}-s{k + 1:02d}", t) for k, t in enumerate(members)))
    return Scenario(
        concepts=("Alex", "Mary", "John"),
        features=("Glasses", "BrownHair", "Hat"),
        feature_table=[
            [0, 1, 0],  # Glasses
            [1, 0, 0],  # BrownHair
            [0, 0, 1],  # Hat
        ],
        student_types=types,
        groups=tuple(groups),
    )


@dataclass(frozen=True)
class GenerationParams:
    num_concepts: int
    num_features: int
    num_types: int
    blind_features_per_type: int
    group_sizes: tuple[int, int, int]
    group_type_mix: tuple[tuple[float, ...], ...]
    seed: int = 0
    # Draw the types' blind sets without overlap when there are enough features.
    disjoint_blind: bool = True

    def __post_init__(self):
        object.__setattr__(self, "group_sizes", tuple(int(x) for x in self.group_sizes))
        object.__setattr__(self, "group_type_mix", tuple(tuple(float(v) for v in m) for m in self.group_type_mix))
        for name in ("num_concepts", "num_features", "num_types"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.blind_features_per_type < self.num_features:
            raise ValueError("blind_features_per_type must be in [0, num_features)")
        if len(self.group_sizes) != NUM_GROUPS or min(self.group_sizes) < 1:
            raise ValueError(f"group_sizes must be {NUM_GROUPS} positive integers")
        if len(self.group_type_mix) != NUM_GROUPS:
            raise ValueError(f"group_type_mix must have {NUM_GROUPS} entries")
        for mix in self.group_type_mix:
            if len(mix) != self.num_types or min(mix) < 0:
                raise ValueError("each group_type_mix must be a distribution over the types")
            if abs(sum(mix) - 1.0) > 1e-9:
                raise ValueError(f"group_type_mix {mix} does not sum to 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _largest_remainder(mix: tuple[float, ...], total: int) -> list[int]:
    quotas = [m * total for m in mix]
    counts = [math.floor(q) for q in quotas]
    order = sorted(range(len(mix)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[: total - sum(counts)]:
        counts[i] += 1
    return counts


def _random_table(rng: np.random.Generator, n_features: int, n_concepts: int) -> np.ndarray:
    """Binary table whose concept columns are pairwise distinct."""
    if n_features <= 62:
        codes = rng.choice(2**n_features, size=n_concepts, replace=False)
        return ((codes[None, :] >> np.arange(n_features)[:, None]) & 1).astype(np.int64)
    while True:
        table = rng.integers(0, 2, size=(n_features, n_concepts))
        if len({table[:, y].tobytes() for y in range(n_concepts)}) == n_concepts:
            return table


def generate_scenario(p: GenerationParams) -> Scenario:
    """Sample a learnable world from ``p``; a pure function of the parameters.

    Raises :class:`GenerationExhausted` when no learnable world is found within
    the retry budget.
    """
    visible = p.num_features - p.blind_features_per_type
    if p.num_concepts > 2**visible:
        raise GenerationExhausted(
            f"{p.num_concepts} concepts cannot be told apart with {visible} observable binary features"
        )
    rng = np.random.default_rng(p.seed)
    disjoint = p.disjoint_blind and p.num_types * p.blind_features_per_type <= p.num_features
    for _ in range(GENERATION_RETRIES):
        table = _random_table(rng, p.num_features, p.num_concepts)
        masks = np.ones((p.num_types, p.num_features), dtype=np.int8)
        if disjoint:
            perm = rng.permutation(p.num_features)
            for t in range(p.num_types):
                masks[t, perm[t * p.blind_features_per_type:(t + 1) * p.blind_features_per_type]] = 0
        else:
            for t in range(p.num_types):
                masks[t, rng.choice(p.num_features, p.blind_features_per_type, replace=False)] = 0
        if all(not _indistinguishable_pairs(table, m == 1) for m in masks):
            break
    else:
        raise GenerationExhausted(f"no learnable scenario after {GENERATION_RETRIES} attempts")

    width = len(str(max(p.num_concepts, p.num_features) - 1))
    groups = []
    for gi, (size, mix) in enumerate(zip(p.group_sizes, p.group_type_mix)):
        counts = _largest_remainder(mix, size)
        members = [t for t, c in enumerate(counts) for _ in range(c)]
        groups.append(tuple(Student(f"g{gi + 1}-s{k + 1:02d}", t) for k, t in enumerate(members)))
    return Scenario(
        concepts=tuple(f"c{i:0{width}d}" for i in range(p.num_concepts)),
        features=tuple(f"f{i:0{width}d}" for i in range(p.num_features)),
        feature_table=table,
        student_types=tuple(StudentType(f"t{t}", masks[t]) for t in range(p.num_types)),
        groups=tuple(groups),
    )


# -- serialization -------------------------------------------------------------

_KEYS = {"concepts", "features", "feature_table", "types", "groups"}


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "concepts": list(s.concepts),
        "features": list(s.features),
        "feature_table": s.feature_table.tolist(),
        "types": [
            {"name": t.name, "blind_features": [s.features[f] for f in np.flatnonzero(t.mask == 0)]}
            for t in s.student_types
        ],
        "groups": [[s.student_types[st.type_index].name for st in g] for g in s.groups],
    }


def _require_list(doc: dict, key: str, ctx: str = "") -> list:
    if key not in doc:
        raise ScenarioParseError(f"{ctx}{key}: required")
    value = doc[key]
    if not isinstance(value, list):
        raise ScenarioParseError(f"{ctx}{key}: expected an array, got {type(value).__name__}")
    return value


def _strings(values: list, where: str) -> tuple[str, ...]:
    for i, v in enumerate(values):
        if not isinstance(v, str):
            raise ScenarioParseError(f"{where}[{i}]: expected a string, got {v!r}")
    return tuple(values)


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a scenario from its document form; raises :class:`ScenarioParseError` on schema errors."""
    if not isinstance(doc, dict):
        raise ScenarioParseError("scenario: expected an object")
    unknown = sorted(set(doc) - _KEYS)
    if unknown:
        raise ScenarioParseError(f"{unknown[0]}: unknown key")
    concepts = _strings(_require_list(doc, "concepts"), "concepts")
    features = _strings(_require_list(doc, "features"), "features")
    feature_index = {name: i for i, name in enumerate(features)}

    rows = _require_list(doc, "feature_table")
    if len(rows) != len(features):
        raise ScenarioParseError(f"feature_table: expected {len(features)} rows, found {len(rows)}")
    for f, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != len(concepts):
            raise ScenarioParseError(f"feature_table[{f}]: expected an array of {len(concepts)} values")
        for y, v in enumerate(row):
            if isinstance(v, bool) or v not in (0, 1):
                raise ScenarioParseError(
                    f"feature_table[{f}][{y}]: value {v!r} for ({features[f]}, {concepts[y]}) is not 0 or 1"
                )

    types = []
    type_index: dict[str, int] = {}
    for i, t in enumerate(_require_list(doc, "types")):
        if not isinstance(t, dict):
            raise ScenarioParseError(f"types[{i}]: expected an object")
        extra = sorted(set(t) - {"name", "blind_features"})
        if extra:
            raise ScenarioParseError(f"types[{i}].{extra[0]}: unknown key")
        if not isinstance(t.get("name"), str):
            raise ScenarioParseError(f"types[{i}].name: required string")
        if t["name"] in type_index:
            raise ScenarioParseError(f"types[{i}].name: duplicate type {t['name']!r}")
        mask = np.ones(len(features), dtype=np.int8)
        for name in _strings(_require_list(t, "blind_features", f"types[{i}]."), f"types[{i}].blind_features"):
            if name not in feature_index:
                raise ScenarioParseError(f"types[{i}].blind_features: unknown feature {name!r}")
            mask[feature_index[name]] = 0
        type_index[t["name"]] = i
        types.append(StudentType(t["name"], mask))

    groups = []
    for gi, g in enumerate(_require_list(doc, "groups")):
        if not isinstance(g, list):
            raise ScenarioParseError(f"groups[{gi}]: expected an array of type names")
        members = []
        for k, name in enumerate(g):
            if name not in type_index:
                raise ScenarioParseError(f"groups[{gi}][{k}]: unknown type {name!r}")
            members.append(Student(f"g{gi + 1}-s{k + 1:02d}", type_index[name]))
        groups.append(tuple(members))

    return Scenario(concepts, features, np.array(rows, dtype=np.int64).reshape(len(features), len(concepts)), tuple(types), tuple(groups))


def save_scenario(s: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n")


def load_scenario(path, validate: bool = True) -> Scenario:
    """Read a scenario file.

    Raises :class:`ScenarioParseError` for malformed documents and, when
    ``validate`` is true, :class:`ScenarioValidationError` for invalid worlds.
    """
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    s = scenario_from_dict(doc)
    if validate:
        report = validate_scenario(s)
        if not report.ok:
            raise ScenarioValidationError(report)
    return s
