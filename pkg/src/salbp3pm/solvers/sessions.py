"""Incremental SAT sessions behind one append-only interface."""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ..cnf import CnfFormula
from .cdcl import SAT, UNSAT, CdclSolver

__all__ = [
    "BackendError",
    "EmbeddedSession",
    "PysatSession",
    "Session",
    "SolveOutcome",
    "make_session",
]

TIMEOUT = "timeout"


class BackendError(RuntimeError):
    """The SAT backend is missing or failed."""


@dataclass
class SolveOutcome:
    status: str  # "sat" | "unsat" | "timeout"
    model: Optional[list[bool]] = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.status == SAT) != (self.model is not None):
            raise ValueError("a model is present exactly when the status is sat")

    @property
    def is_sat(self) -> bool:
        return self.status == SAT


class Session:
    """Append-only incremental solver session.

    A session mirrors a :class:`CnfFormula`: :meth:`sync` pushes every clause
    appended to the formula since the previous sync.
    """

    def __init__(self, formula: Optional[CnfFormula] = None):
        self.formula = formula
        self._synced = 0
        self.var_count = 0
        self.clause_count = 0
        self.solve_calls = 0
        if formula is not None:
            self.sync()

    def sync(self) -> int:
        clauses = self.formula.clauses
        added = len(clauses) - self._synced
        for clause in clauses[self._synced:]:
            self.add_clause(clause)
        self._synced = len(clauses)
        self.var_count = max(self.var_count, self.formula.var_count)
        return added

    def add_clause(self, lits: Sequence[int]) -> None:
        self.clause_count += 1
        for lit in lits:
            self.var_count = max(self.var_count, abs(lit))
        self._add(list(lits))

    def add_clauses(self, clauses: Iterable[Sequence[int]]) -> None:
        for clause in clauses:
            self.add_clause(clause)

    def solve(self, deadline: Optional[float] = None, assumptions: Sequence[int] = ()) -> SolveOutcome:
        """Solve everything added so far; ``deadline`` is a ``time.monotonic()`` value."""
        if self.formula is not None:
            self.sync()
        self.solve_calls += 1
        start = time.monotonic()
        if deadline is not None and start >= deadline:
            return SolveOutcome(TIMEOUT, stats={"wall": 0.0})
        status, model, stats = self._solve(deadline, list(assumptions))
        stats["wall"] = time.monotonic() - start
        if status == SAT:
            model = model + [False] * (self.var_count + 1 - len(model))
            return SolveOutcome(SAT, model, stats)
        return SolveOutcome(status, None, stats)

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # backend hooks
    def _add(self, lits: list[int]) -> None:  # pragma: no cover - abstract
        raise NotImplementedError

    def _solve(self, deadline, assumptions):  # pragma: no cover - abstract
        raise NotImplementedError


class EmbeddedSession(Session):
    def __init__(self, formula: Optional[CnfFormula] = None, seed: int = 0):
        self.solver = CdclSolver(seed=seed)
        super().__init__(formula)

    def _add(self, lits):
        if lits:
            self.solver.add_clause(lits)
        else:
            self.solver.ok = False

    def _solve(self, deadline, assumptions):
        s = self.solver
        s._ensure(self.var_count)
        status = s.solve(assumptions, deadline=deadline)
        stats = {"conflicts": s.conflicts, "decisions": s.decisions}
        if status == SAT:
            return SAT, s.model(), stats
        if status == UNSAT:
            return UNSAT, None, stats
        return TIMEOUT, None, stats


class PysatSession(Session):
    """Adapter to a PySAT solver (CaDiCaL 1.9.5 by default).

    CaDiCaL cannot be interrupted through PySAT; for it the deadline is only
    checked between calls and hard limits are left to the caller's process
    isolation.
    """

    def __init__(self, formula: Optional[CnfFormula] = None, name: str = "cadical195", seed: int = 0):
        try:
            from pysat.solvers import Solver
        except ImportError as exc:  # pragma: no cover - depends on environment
            raise BackendError("python-sat is not installed") from exc
        try:
            self.solver = Solver(name=name)
        except Exception as exc:
            raise BackendError(f"cannot create PySAT solver {name!r}: {exc}") from exc
        self.name = name
        self._empty = False
        super().__init__(formula)

    def _add(self, lits):
        if lits:
            self.solver.add_clause(lits)
        else:
            self._empty = True

    def _solve(self, deadline, assumptions):
        if self._empty:
            return UNSAT, None, {}
        timer = None
        interruptible = not self.name.startswith("cadical")
        if deadline is not None and interruptible:
            timer = threading.Timer(max(deadline - time.monotonic(), 0.0), self.solver.interrupt)
            timer.start()
            try:
                res = self.solver.solve_limited(assumptions=assumptions, expect_interrupt=True)
            finally:
                timer.cancel()
                self.solver.clear_interrupt()
        else:
            res = self.solver.solve(assumptions=assumptions)
        stats = dict(self.solver.accum_stats() or {})
        if res is None:
            return TIMEOUT, None, stats
        if not res:
            return UNSAT, None, stats
        model = [False] * (self.var_count + 1)
        for lit in self.solver.get_model() or ():
            if 0 < lit <= self.var_count:
                model[lit] = True
        return SAT, model, stats

    def close(self):
        self.solver.delete()


def make_session(backend: str = "embedded", formula: Optional[CnfFormula] = None, seed: int = 0) -> Session:
    """``backend`` is ``"embedded"`` or ``"pysat[:solver-name]"``."""
    if backend == "embedded":
        return EmbeddedSession(formula, seed=seed)
    if backend == "pysat" or backend.startswith("pysat:"):
        name = backend.partition(":")[2] or "cadical195"
        return PysatSession(formula, name=name, seed=seed)
    raise BackendError(f"unknown SAT backend {backend!r}")
