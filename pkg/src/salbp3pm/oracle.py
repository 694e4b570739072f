"""Exhaustive reference solver for small instances.

Deliberately independent of the encoders and of the precedence closure:
it branches on (station, start) per task in topological order using only
the direct edges.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Optional

from .instance import Instance, Solution, power_profile

__all__ = ["OracleLimitError", "OracleResult", "oracle_feasible_set", "oracle_solve"]

DEFAULT_MAX_NODES = 5_000_000
DEFAULT_MAX_SPACE = 10**12


class OracleLimitError(RuntimeError):
    """The search space exceeds the configured limits."""


@dataclass(frozen=True)
class OracleResult:
    optimal_peak: Optional[int]  # None when infeasible
    witness: Optional[Solution]
    nodes: int

    @property
    def feasible(self) -> bool:
        return self.optimal_peak is not None


def _search_space(inst: Instance) -> int:
    return inst.m**inst.n * prod(inst.c - t + 1 for t in inst.durations)


class _Search:
    def __init__(self, inst: Instance, max_nodes: int, max_space: int):
        if _search_space(inst) > max_space:
            raise OracleLimitError(
                f"{inst.name}: search space {_search_space(inst)} exceeds {max_space}"
            )
        self.inst = inst
        self.max_nodes = max_nodes
        self.nodes = 0
        self.order = inst.topological_order()
        self.preds = inst.predecessors()
        self.station = [-1] * inst.n
        self.start = [-1] * inst.n
        self.busy = [0] * inst.m  # bitmask of occupied time units per station

    def tick(self):
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise OracleLimitError(f"{self.inst.name}: more than {self.max_nodes} search nodes")

    def options(self, i: int):
        inst = self.inst
        t = inst.durations[i]
        lo_station = max((self.station[p] for p in self.preds[i]), default=0)
        mask = (1 << t) - 1
        for k in range(lo_station, inst.m):
            earliest = max(
                (self.start[p] + inst.durations[p] for p in self.preds[i] if self.station[p] == k),
                default=0,
            )
            for s in range(earliest, inst.c - t + 1):
                if not self.busy[k] & (mask << s):
                    yield k, s, mask << s


def oracle_feasible_set(
    inst: Instance, max_nodes: int = DEFAULT_MAX_NODES, max_space: int = DEFAULT_MAX_SPACE
) -> list[Solution]:
    """Every feasible (assignment, start) pair, in a deterministic order."""
    search = _Search(inst, max_nodes, max_space)
    out: list[Solution] = []

    def rec(depth: int):
        search.tick()
        if depth == inst.n:
            out.append(Solution(tuple(search.station), tuple(search.start)))
            return
        i = search.order[depth]
        for k, s, bits in list(search.options(i)):
            search.station[i], search.start[i] = k, s
            search.busy[k] |= bits
            rec(depth + 1)
            search.busy[k] &= ~bits
        search.station[i] = search.start[i] = -1

    rec(0)
    return out


def oracle_solve(
    inst: Instance, max_nodes: int = DEFAULT_MAX_NODES, max_space: int = DEFAULT_MAX_SPACE
) -> OracleResult:
    """Minimum peak by branch and bound on the partial power profile."""
    if inst.powers is None:
        raise ValueError("oracle needs powers")
    search = _Search(inst, max_nodes, max_space)
    w, dur = inst.powers, inst.durations
    profile = [0] * inst.c
    best = [None, None]  # peak, solution

    def rec(depth: int, peak: int):
        search.tick()
        if depth == inst.n:
            best[0] = peak
            best[1] = Solution(tuple(search.station), tuple(search.start))
            return
        i = search.order[depth]
        for k, s, bits in list(search.options(i)):
            new_peak = peak
            for tau in range(s, s + dur[i]):
                profile[tau] += w[i]
                if profile[tau] > new_peak:
                    new_peak = profile[tau]
            if best[0] is None or new_peak < best[0]:
                search.station[i], search.start[i] = k, s
                search.busy[k] |= bits
                rec(depth + 1, new_peak)
                search.busy[k] &= ~bits
            for tau in range(s, s + dur[i]):
                profile[tau] -= w[i]
        search.station[i] = search.start[i] = -1

    rec(0, 0)
    if best[0] is None:
        return OracleResult(None, None, search.nodes)
    assert power_profile(inst, best[1]).peak == best[0]
    return OracleResult(best[0], best[1], search.nodes)
