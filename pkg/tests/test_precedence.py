import random

import pytest

from salbp3pm.instance import Instance
from salbp3pm.oracle import oracle_solve
from salbp3pm.precedence import closure, transitive_closure, warshall_closure

from conftest import corpus


def random_dag_edges(n, count, rng):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    perm = list(range(n))
    rng.shuffle(perm)  # hide the topological order from the closure code
    return [(perm[i], perm[j]) for i, j in rng.sample(pairs, min(count, len(pairs)))]


def test_chain():
    assert transitive_closure(3, [(0, 1), (1, 2)]) == {(0, 1), (1, 2), (0, 2)}


def test_empty():
    assert transitive_closure(4, []) == set()


def test_twelve_node_dag_matches_warshall():
    rng = random.Random(12)
    edges = random_dag_edges(12, 20, rng)
    assert transitive_closure(12, edges) == warshall_closure(12, edges)


def test_cycle_detected():
    with pytest.raises(ValueError, match="cycle"):
        transitive_closure(3, [(0, 1), (1, 2), (2, 0)])


def test_closure_properties_random():
    rng = random.Random(5)
    for _ in range(50):
        n = rng.randint(1, 12)
        edges = random_dag_edges(n, rng.randint(0, 2 * n), rng)
        star = transitive_closure(n, edges)
        assert set(edges) <= star
        assert all(i != j for i, j in star)
        assert len(star) <= n * (n - 1) // 2
        assert transitive_closure(n, star) == star
        for i, j in star:
            for j2, k in star:
                if j2 == j:
                    assert (i, k) in star


def test_windows_chain():
    inst = Instance(3, 2, [2, 2, 2], None, [(0, 1), (1, 2)])
    clo = closure(inst)
    assert clo.first == (0, 1, 2)
    assert clo.last == (0, 1, 2)


def test_windows_no_precedence():
    clo = closure(Instance(4, 5, [1, 2, 3], None, []))
    assert clo.first == (0, 0, 0)
    assert clo.last == (3, 3, 3)


def test_windows_single_task():
    clo = closure(Instance(1, 3, [2], None, []))
    assert clo.first == clo.last == (0,)


def test_infeasible_windows_flagged():
    clo = closure(Instance(1, 2, [2, 2, 2], None, [(0, 1), (1, 2)]))
    assert not clo.feasible_windows
    assert clo.infeasible_tasks()


def test_temporal_windows_single_station():
    inst = Instance(1, 4, [2, 2], None, [(0, 1)])
    clo = closure(inst)
    assert clo.est[1][0] == 2
    assert clo.lst[0][0] == 0
    assert [clo.ip(1, 0, t) for t in inst.start_range(1)] == [True, True, False]
    assert [clo.ip(0, 0, t) for t in inst.start_range(0)] == [False, True, True]


def test_temporal_windows_no_precedence():
    inst = Instance(2, 5, [2, 3], None, [])
    clo = closure(inst)
    for i in range(inst.n):
        for k in range(inst.m):
            assert clo.est[i][k] == 0
            assert clo.lst[i][k] == inst.c - inst.durations[i]
            assert not any(clo.ip(i, k, t) for t in inst.start_range(i))


def test_windows_monotone_along_edges():
    for inst in corpus(150):
        clo = closure(inst)
        for i, j in clo.e_star:
            assert clo.first[i] <= clo.first[j]
            assert clo.last[i] <= clo.last[j]


def test_windows_contain_every_feasible_solution():
    # pruning soundness: no feasible schedule uses a pruned station or start
    from salbp3pm.oracle import oracle_feasible_set

    for inst in corpus(120, max_n=4):
        clo = closure(inst)
        for sol in oracle_feasible_set(inst):
            for i, (k, t) in enumerate(sol.key()):
                assert clo.first[i] <= k <= clo.last[i]
                assert not clo.ip(i, k, t)


def test_redundant_edges_keep_optimum():
    for inst in corpus(80, max_n=5):
        star = closure(inst).e_star
        extended = Instance(inst.m, inst.c, inst.durations, inst.powers, sorted(star), inst.name)
        assert oracle_solve(inst).optimal_peak == oracle_solve(extended).optimal_peak
