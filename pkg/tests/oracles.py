"""Direct-summation reference implementations, written without numpy."""

import math


def entropy(p):
    return -sum(x * math.log(x) for x in p if x > 0)


def posterior(p, row, value):
    kept = [x if row[y] == value else 0.0 for y, x in enumerate(p)]
    z = sum(kept)
    return [x / z for x in kept], z


def teacher_gain(p, row, target):
    post, _ = posterior(p, row, row[target])
    return entropy(p) - entropy(post)


def student_gain(p, row, observable):
    if not observable:
        return 0.0
    expected = 0.0
    for v in (0, 1):
        mass = sum(x for y, x in enumerate(p) if row[y] == v)
        if mass > 0:
            expected += mass * entropy(posterior(p, row, v)[0])
    return entropy(p) - expected


def exhaustive_gain_check(beliefs_module, max_concepts=6, max_features=5):
    """Compare both gain functions with the references over every feature row,
    uniform support and target for up to ``max_concepts`` concepts, packed into
    scenarios of at most ``max_features`` features with the two builtin-style
    types (blind to the second / third feature).

    A feature's gain depends only on its own row, so this covers every
    scenario of those sizes. Returns (comparisons, worst absolute error).
    """
    import itertools

    import numpy as np

    from coteach.scenario import Scenario, Student, StudentType

    B = beliefs_module
    count, worst = 0, 0.0
    for n in range(2, max_concepts + 1):
        rows = [list(r) for r in itertools.product((0, 1), repeat=n)]
        for start in range(0, len(rows), max_features):
            chunk = rows[start:start + max_features]
            f = len(chunk)
            masks = [[0 if i == 1 else 1 for i in range(f)], [0 if i == 2 else 1 for i in range(f)]]
            s = Scenario(
                concepts=tuple(f"y{i}" for i in range(n)),
                features=tuple(f"f{i}" for i in range(f)),
                feature_table=np.array(chunk),
                student_types=tuple(StudentType(f"t{i}", m) for i, m in enumerate(masks)),
                groups=((Student("a", 0),), (Student("b", 1),), (Student("c", 0),)),
            )
            for size in range(1, n + 1):
                for support in itertools.combinations(range(n), size):
                    p = [1 / size if y in support else 0.0 for y in range(n)]
                    for t in (0, 1):
                        vec = B.student_gains(p, t, s)
                        for phi in range(f):
                            want = student_gain(p, chunk[phi], masks[t][phi] == 1)
                            worst = max(worst, abs(vec[phi] - want),
                                        abs(B.student_expected_information_gain(p, phi, t, s) - want))
                            count += 1
                    for target in support:
                        vec = B.teacher_gains(p, target, s)
                        for phi in range(f):
                            want = teacher_gain(p, chunk[phi], target)
                            worst = max(worst, abs(vec[phi] - want),
                                        abs(B.teacher_information_gain(p, phi, target, s) - want))
                            count += 1
    return count, worst
