"""Transitive precedence, station windows and start-time windows."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .instance import Instance

__all__ = [
    "PrecedenceClosure",
    "closure",
    "station_windows",
    "temporal_windows",
    "transitive_closure",
    "warshall_closure",
]


def transitive_closure(n: int, edges: Iterable[tuple[int, int]]) -> set[tuple[int, int]]:
    """Reachability pairs of a DAG by memoized depth-first search.

    Each task's successor set is finalized once and reused by every
    predecessor that reaches it.
    """
    succ: list[set[int]] = [set() for _ in range(n)]
    for i, j in edges:
        succ[i].add(j)
    done = [False] * n
    on_path = [False] * n

    for root in range(n):
        if done[root]:
            continue
        # explicit stack: (task, direct successors still to merge)
        stack = [(root, sorted(succ[root]))]
        on_path[root] = True
        while stack:
            i, pending = stack[-1]
            while pending:
                j = pending[-1]
                if on_path[j]:
                    raise ValueError(f"precedence cycle through task {j + 1}")
                if not done[j]:
                    on_path[j] = True
                    stack.append((j, sorted(succ[j])))
                    break
                pending.pop()
                succ[i] |= succ[j]
            else:
                done[i] = True
                on_path[i] = False
                stack.pop()
    return {(i, j) for i in range(n) for j in succ[i]}


def warshall_closure(n: int, edges: Iterable[tuple[int, int]]) -> set[tuple[int, int]]:
    reach = [[False] * n for _ in range(n)]
    for i, j in edges:
        reach[i][j] = True
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            if reach[i][k]:
                ri = reach[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    return {(i, j) for i in range(n) for j in range(n) if reach[i][j]}


def station_windows(
    inst: Instance, pred_star: Sequence[frozenset], succ_star: Sequence[frozenset]
) -> tuple[list[int], list[int]]:
    """Earliest and latest admissible station (0-based) of every task.

    ``first[i] > last[i]`` signals an infeasible instance.
    """
    t, c, m = inst.durations, inst.c, inst.m
    first, last = [], []
    for i in range(inst.n):
        head = t[i] + sum(t[j] for j in pred_star[i])
        tail = t[i] + sum(t[j] for j in succ_star[i])
        first.append(-(-head // c) - 1)
        last.append(m - -(-tail // c))
    return first, last


def temporal_windows(inst, pred_star, succ_star, first, last):
    """Earliest/latest start of task ``i`` if placed on station ``k``.

    Transitive predecessors whose window starts at or after ``k`` must share
    station ``k`` with ``i`` and therefore run before it; symmetrically for
    successors whose window ends at or before ``k``.
    """
    t, c = inst.durations, inst.c
    est, lst = [], []
    for i in range(inst.n):
        est.append([sum(t[j] for j in pred_star[i] if first[j] >= k) for k in range(inst.m)])
        lst.append(
            [c - t[i] - sum(t[j] for j in succ_star[i] if last[j] <= k) for k in range(inst.m)]
        )
    return est, lst


@dataclass(frozen=True)
class PrecedenceClosure:
    edges: frozenset
    e_star: frozenset
    pred_star: tuple
    succ_star: tuple
    first: tuple
    last: tuple
    est: tuple
    lst: tuple

    @property
    def feasible_windows(self) -> bool:
        return all(f <= l for f, l in zip(self.first, self.last))

    def infeasible_tasks(self) -> list[int]:
        return [i for i, (f, l) in enumerate(zip(self.first, self.last)) if f > l]

    def station_range(self, i: int) -> range:
        return range(max(self.first[i], 0), min(self.last[i], len(self.est[i]) - 1) + 1)

    def ip(self, i: int, k: int, t: int) -> bool:
        """True when task ``i`` cannot start at ``t`` on station ``k``."""
        return t < self.est[i][k] or t > self.lst[i][k]

    def start_bounds(self, i: int) -> tuple[int, int]:
        """Start-time window of ``i`` over all stations in its window."""
        ks = self.station_range(i)
        if not ks:
            return 0, -1
        return min(self.est[i][k] for k in ks), max(self.lst[i][k] for k in ks)


def closure(inst: Instance) -> PrecedenceClosure:
    n = inst.n
    e_star = transitive_closure(n, inst.edges)
    pred = [set() for _ in range(n)]
    succ = [set() for _ in range(n)]
    for i, j in e_star:
        succ[i].add(j)
        pred[j].add(i)
    pred_star = tuple(frozenset(p) for p in pred)
    succ_star = tuple(frozenset(s) for s in succ)
    first, last = station_windows(inst, pred_star, succ_star)
    est, lst = temporal_windows(inst, pred_star, succ_star, first, last)
    return PrecedenceClosure(
        edges=frozenset(inst.edges),
        e_star=frozenset(e_star),
        pred_star=pred_star,
        succ_star=succ_star,
        first=tuple(first),
        last=tuple(last),
        est=tuple(tuple(row) for row in est),
        lst=tuple(tuple(row) for row in lst),
    )
