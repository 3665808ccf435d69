from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from coteach.scenario import GenerationParams, Student, builtin_guesswho, generate_scenario

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def with_groups(s, mixes):
    """Copy of ``s`` whose groups hold the given per-type head counts."""
    groups = []
    for gi, counts in enumerate(mixes):
        members = [t for t, c in enumerate(counts) for _ in range(c)]
        groups.append(tuple(Student(f"g{gi + 1}-s{k + 1:02d}", t) for k, t in enumerate(members)))
    return replace(s, groups=tuple(groups))


def random_params(rng: np.random.Generator, seed: int) -> GenerationParams:
    n_features = int(rng.integers(2, 8))
    blind = int(rng.integers(0, min(3, n_features - 1) + 1))
    n_concepts = int(rng.integers(2, min(2 ** (n_features - blind), 12) + 1))
    n_types = int(rng.integers(1, 4))
    mixes = [tuple(rng.dirichlet(np.ones(n_types))) for _ in range(3)]
    mixes = [tuple(m / sum(m)) for m in np.array(mixes)]
    return GenerationParams(
        num_concepts=n_concepts,
        num_features=n_features,
        num_types=n_types,
        blind_features_per_type=blind,
        group_sizes=tuple(int(x) for x in rng.integers(1, 9, size=3)),
        group_type_mix=mixes,
        seed=seed,
    )


def make_random_scenarios(count: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        try:
            out.append(generate_scenario(random_params(rng, len(out))))
        except Exception:
            continue
    return out


@pytest.fixture
def builtin():
    return builtin_guesswho()


@pytest.fixture(scope="session")
def random_scenarios():
    return make_random_scenarios(200)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion, shown in the terminal summary."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" -- {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
