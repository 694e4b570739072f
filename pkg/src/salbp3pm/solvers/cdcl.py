"""A small incremental CDCL solver in pure Python.

Two watched literals, first-UIP learning, VSIDS-style activities with a lazy
heap, phase saving (default polarity false) and Luby restarts.  It is meant
for desk-scale formulas; correctness is the bar, not speed.
"""
from __future__ import annotations

import heapq
import time
from typing import Iterable, Optional, Sequence

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"


def _luby(i: int) -> int:
    k = 1
    while (1 << k) - 1 < i + 1:
        k += 1
    while True:
        if i + 1 == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i + 1:
            k += 1


class CdclSolver:
    """Append-only incremental solver.

    Literals are DIMACS integers.  Internally literal ``l`` is stored as
    ``2*v`` (positive) or ``2*v + 1`` (negative).
    """

    def __init__(self, seed: int = 0):
        self.nvars = 0
        self.assign: list[int] = [0]  # per var: 1 true, -1 false, 0 unassigned
        self.level: list[int] = [0]
        self.reason: list[Optional[list[int]]] = [None]
        self.activity: list[float] = [0.0]
        self.phase: list[int] = [-1]
        self.watches: list[list[list[int]]] = [[], []]
        self.trail: list[int] = []  # internal literal codes
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.clauses: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self.heap: list[tuple[float, int]] = []
        self.var_inc = 1.0
        self.ok = True
        self.seed = seed
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0

    # --- variables and clauses ---------------------------------------------

    def _ensure(self, v: int) -> None:
        while self.nvars < v:
            self.nvars += 1
            self.assign.append(0)
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(0.0)
            self.phase.append(-1)
            self.watches.append([])
            self.watches.append([])
            heapq.heappush(self.heap, (0.0, self.nvars))

    @staticmethod
    def _code(lit: int) -> int:
        return 2 * lit if lit > 0 else -2 * lit + 1

    def _value(self, code: int) -> int:
        a = self.assign[code >> 1]
        return -a if code & 1 else a

    def add_clause(self, lits: Iterable[int]) -> bool:
        """Add a clause at decision level 0.  Returns False once UNSAT."""
        if not self.ok:
            return False
        if self.trail_lim:
            self._backtrack(0)
        codes = []
        seen = set()
        for lit in lits:
            if lit == 0:
                raise ValueError("literal 0 in clause")
            self._ensure(abs(lit))
            code = self._code(lit)
            if code ^ 1 in seen:
                return True
            if code in seen:
                continue
            val = self._value(code)
            if val == 1:
                return True
            if val == -1:
                continue
            seen.add(code)
            codes.append(code)
        if not codes:
            self.ok = False
            return False
        if len(codes) == 1:
            self._enqueue(codes[0], None)
            if self._propagate() is not None:
                self.ok = False
            return self.ok
        self.clauses.append(codes)
        self.watches[codes[0] ^ 1].append(codes)
        self.watches[codes[1] ^ 1].append(codes)
        return True

    # --- core ---------------------------------------------------------------

    def _enqueue(self, code: int, reason) -> None:
        v = code >> 1
        self.assign[v] = -1 if code & 1 else 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(code)

    def _propagate(self):
        """Unit propagation; returns a conflicting clause or None.

        ``watches[c]`` lists the clauses watching literal ``c ^ 1``, i.e.
        those to revisit when code ``c`` becomes true.
        """
        assign = self.assign
        watches = self.watches
        trail = self.trail
        level = self.level
        reason = self.reason
        lvl = len(self.trail_lim)
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            ws = watches[p]
            i = j = 0
            n = len(ws)
            while i < n:
                clause = ws[i]
                i += 1
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], false_lit
                first = clause[0]
                a = assign[first >> 1]
                if (-a if first & 1 else a) == 1:
                    ws[j] = clause
                    j += 1
                    continue
                for k in range(2, len(clause)):
                    lit = clause[k]
                    a = assign[lit >> 1]
                    if (-a if lit & 1 else a) != -1:
                        clause[1] = lit
                        clause[k] = false_lit
                        watches[lit ^ 1].append(clause)
                        break
                else:
                    ws[j] = clause
                    j += 1
                    a = assign[first >> 1]
                    if (-a if first & 1 else a) == -1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.qhead = len(trail)
                        return clause
                    v = first >> 1
                    assign[v] = -1 if first & 1 else 1
                    level[v] = lvl
                    reason[v] = clause
                    trail.append(first)
                    self.propagations += 1
            del ws[j:]
        return None

    def _backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        stop = self.trail_lim[lvl]
        assign, phase, heap, act = self.assign, self.phase, self.heap, self.activity
        for code in reversed(self.trail[stop:]):
            v = code >> 1
            phase[v] = assign[v]
            assign[v] = 0
            self.reason[v] = None
            heapq.heappush(heap, (-act[v], v))
        del self.trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.nvars + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.nvars + 1) if not self.assign[u]]
            heapq.heapify(self.heap)
        elif not self.assign[v]:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, confl):
        seen = set()
        learnt = [0]
        counter = 0
        lvl = len(self.trail_lim)
        idx = len(self.trail) - 1
        p = None
        level = self.level
        while True:
            for q in confl:
                if p is not None and q == p:
                    continue
                v = q >> 1
                if v in seen or level[v] == 0:
                    continue
                seen.add(v)
                self._bump(v)
                if level[v] >= lvl:
                    counter += 1
                else:
                    learnt.append(q)
            while (self.trail[idx] >> 1) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            confl = self.reason[p >> 1]
            seen.discard(p >> 1)
        learnt[0] = p ^ 1
        # drop literals implied by the rest of the clause (local minimization)
        keep = [learnt[0]]
        marks = {q >> 1 for q in learnt}
        for q in learnt[1:]:
            r = self.reason[q >> 1]
            if r is None or any((x >> 1) not in marks and level[x >> 1] > 0 for x in r if x != (q ^ 1)):
                keep.append(q)
        learnt = keep
        if len(learnt) == 1:
            back = 0
        else:
            best = max(range(1, len(learnt)), key=lambda k: level[learnt[k] >> 1])
            learnt[1], learnt[best] = learnt[best], learnt[1]
            back = level[learnt[1] >> 1]
        self.var_inc *= 1.0 / 0.95
        return learnt, back

    def _pick(self) -> int:
        heap, assign, act = self.heap, self.assign, self.activity
        while heap:
            neg, v = heapq.heappop(heap)
            if assign[v] == 0 and -neg == act[v]:
                return v
        for v in range(1, self.nvars + 1):
            if assign[v] == 0:
                return v
        return 0

    # --- public -------------------------------------------------------------

    def solve(
        self,
        assumptions: Sequence[int] = (),
        deadline: Optional[float] = None,
        conflict_limit: Optional[int] = None,
    ) -> str:
        if not self.ok:
            return UNSAT
        self._backtrack(0)
        if self._propagate() is not None:
            self.ok = False
            return UNSAT
        for lit in assumptions:
            self._ensure(abs(lit))
        assume = [self._code(l) for l in assumptions]
        restart_no = 0
        budget = 64 * _luby(restart_no)
        local_conflicts = 0
        start_conflicts = self.conflicts
        checks = 0
        while True:
            checks += 1
            if deadline is not None and checks & 255 == 0 and time.monotonic() >= deadline:
                self._backtrack(0)
                return UNKNOWN
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                local_conflicts += 1
                if not self.trail_lim:
                    self.ok = False
                    return UNSAT
                learnt, back = self._analyze(confl)
                self._backtrack(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self.watches[learnt[0] ^ 1].append(learnt)
                    self.watches[learnt[1] ^ 1].append(learnt)
                    self._enqueue(learnt[0], learnt)
                if conflict_limit is not None and self.conflicts - start_conflicts >= conflict_limit:
                    self._backtrack(0)
                    return UNKNOWN
                continue
            if local_conflicts >= budget:
                restart_no += 1
                budget = 64 * _luby(restart_no)
                local_conflicts = 0
                self._backtrack(0)
                continue
            # assumptions occupy the first decision levels
            nxt = None
            while len(self.trail_lim) < len(assume):
                a = assume[len(self.trail_lim)]
                val = self._value(a)
                if val == 1:
                    self.trail_lim.append(len(self.trail))
                    continue
                if val == -1:
                    self._backtrack(0)
                    return UNSAT
                nxt = a
                break
            if nxt is None:
                v = self._pick()
                if v == 0:
                    return SAT
                nxt = 2 * v + (0 if self.phase[v] == 1 else 1)
                self.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(nxt, None)

    def model(self) -> list[bool]:
        """Current total assignment, indexed by variable (slot 0 unused)."""
        return [False] + [a == 1 for a in self.assign[1:]]
