import random

import pytest

from salbp3pm.instance import Instance, Solution
from salbp3pm.generate import random_instance
from salbp3pm.solvers.sessions import make_session

# criterion number -> (passed, detail); printed at the end of the run
ACCEPTANCE: dict = {}


def record(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")


def five_tasks(powers=True) -> Instance:
    """Five tasks, three stations, cycle time 7 (no precedence)."""
    return Instance(3, 7, [3, 4, 2, 3, 2], [5, 3, 6, 4, 5] if powers else None, [], "five_tasks")


def example_schedule() -> Solution:
    # 0-based stations; tasks 2 and 5 share station 2, tasks 3 and 4 station 3
    return Solution((0, 1, 2, 2, 1), (0, 1, 1, 3, 5))


def tiny(m, c, powers=(3, 4), durations=(1, 1), edges=()) -> Instance:
    return Instance(m, c, list(durations), list(powers), list(edges), f"tiny-m{m}-c{c}")


def corpus(count=300, max_n=6, seed0=0):
    """Seeded random small instances: n 2..max_n, m 1..3, c 2..8, edge prob 0/.3/.6."""
    out = []
    for seed in range(seed0, seed0 + count):
        rng = random.Random(seed)
        n = rng.randint(2, max_n)
        m = rng.randint(1, 3)
        c = rng.randint(2, 8)
        prob = rng.choice([0.0, 0.3, 0.6])
        out.append(random_instance(n, m, c, prob, seed, max_duration=max(1, (c + 1) // 2)))
    return out


def projected_models(formula, vm, backend="embedded", limit=100_000):
    """All (assignment, start) projections of the formula's models, by blocking enumeration."""
    keys = sorted(vm.x) + sorted(vm.s)
    cells = [vm.x[k] for k in sorted(vm.x)] + [vm.s[k] for k in sorted(vm.s)]
    out = set()
    with make_session(backend, formula.copy()) as session:
        while True:
            res = session.solve()
            if res.status != "sat":
                break
            stations = {i: k for (i, k), v in vm.x.items() if res.model[v]}
            starts = {i: t for (i, t), v in vm.s.items() if res.model[v]}
            out.add(Solution(
                tuple(stations[i] for i in range(vm.n)),
                tuple(starts[i] for i in range(vm.n)),
            ))
            if len(out) > limit:
                raise RuntimeError("too many models")
            session.add_clause([-v if res.model[v] else v for v in cells])
    assert len(keys) == len(cells)
    return out


@pytest.fixture
def five_task_instance():
    return five_tasks()


def model_set_equals(formula, vm, solutions, backend="embedded") -> bool:
    """Exact check that the (X, S) projection of the models equals ``solutions``.

    Completeness: every solution, fixed through assumptions, extends to a
    model.  Soundness: after excluding every solution with one clause, the
    formula is unsatisfiable, so no model projects outside the set.
    """
    def lits(sol):
        return [vm.x[i, k] for i, k in enumerate(sol.assignment)] + [
            vm.s[i, t] for i, t in enumerate(sol.start)
        ]

    with make_session(backend, formula) as session:
        for sol in solutions:
            if session.solve(assumptions=lits(sol)).status != "sat":
                return False
        for sol in solutions:
            session.add_clause([-v for v in lits(sol)])
        return session.solve().status == "unsat"
