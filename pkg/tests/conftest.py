"""Shared builders for the test suite.

Everything is seeded through KeyedStream so every test is deterministic and
order-independent.
"""
from __future__ import annotations

import numpy as np

from gradleak import qp, trajectory
from gradleak.rng import INITIAL_POINT, STEPS, UTILITY, KeyedStream


def build_instance(n: int, seed: int = 0, spectrum: tuple[float, float] = (1.0, 10.0)) -> qp.ProblemInstance:
    """An unconstrained instance with a simple random spectrum."""
    gen = KeyedStream(seed, UTILITY).generator()
    return qp.ProblemInstance(utility=qp.sample_utility(n, spectrum[0], spectrum[1], gen))


def build_constrained_instance(
    n: int, seed: int = 0, spectrum: tuple[float, float] = (1.0, 10.0), barrier_weight: float = 0.5
) -> qp.ProblemInstance:
    """A constrained instance whose half-spaces cut off the unconstrained optimum."""
    gen = KeyedStream(seed, UTILITY).generator()
    utility = qp.sample_utility(n, spectrum[0], spectrum[1], gen)
    x_star = qp.optimum(utility)
    rows = []
    offsets = []
    for _ in range(2):
        u = gen.standard_normal(n)
        u = u / np.linalg.norm(u)
        rows.append(u)
        offsets.append(float(u @ x_star) - 0.3 * (1.0 + np.linalg.norm(x_star)))
    constraints = qp.ConstraintSet(C=np.array(rows), d=np.array(offsets))
    return qp.ProblemInstance(utility=utility, constraints=constraints, barrier_weight=barrier_weight)


def run_trace(
    instance: qp.ProblemInstance,
    policy,
    horizon: int,
    seed: int = 0,
    x0: np.ndarray | None = None,
) -> trajectory.Trace:
    """Simulate from a seeded start (or a provided one)."""
    root = KeyedStream(seed)
    if x0 is None:
        x0 = qp.sample_initial_point(instance, root.child(INITIAL_POINT).generator())
    return trajectory.run(instance, policy, x0, horizon, root.child(STEPS))


# ---------------------------------------------------------------------------
# acceptance-criterion reporting: one measured pass/fail line per criterion,
# echoed in a dedicated section of the terminal summary.

ACCEPTANCE_LINES: list[str] = []


def record_criterion(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
