"""Weighted MaxSAT: embedded linear search, RC2, and external solver processes."""
from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass
from typing import Optional

from ..cnf import PbConstraint, WcnfFormula, encode_pb_leq, write_wcnf
from .sessions import make_session

__all__ = [
    "MAXSAT_CMD_ENV",
    "MaxSatConfigError",
    "MaxSatOutcome",
    "MaxSatProtocolError",
    "parse_maxsat_output",
    "run_external_maxsat",
    "solve_maxsat",
    "solve_maxsat_embedded",
    "solve_maxsat_rc2",
]

MAXSAT_CMD_ENV = "SALBP3PM_MAXSAT_CMD"

OPTIMUM, SATISFIABLE, UNSATISFIABLE, TIMEOUT = "optimum", "satisfiable", "unsat", "timeout"


class MaxSatConfigError(RuntimeError):
    """The external solver command is missing or malformed."""


class MaxSatProtocolError(RuntimeError):
    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


@dataclass
class MaxSatOutcome:
    status: str
    model: Optional[list[bool]] = None
    cost: Optional[int] = None
    wall: float = 0.0

    def __post_init__(self):
        if self.status == OPTIMUM and (self.model is None or self.cost is None):
            raise ValueError("an optimum needs a model and a cost")


def _soft_violation_literals(wcnf: WcnfFormula):
    """One literal per soft clause that is true exactly when it is violated."""
    lits, extra = [], []
    for clause, weight in wcnf.soft:
        if len(clause) == 1:
            lits.append((-clause[0], weight))
        else:
            extra.append((clause, weight))
    return lits, extra


def solve_maxsat_embedded(
    wcnf: WcnfFormula, deadline: Optional[float] = None, backend: str = "embedded"
) -> MaxSatOutcome:
    """SAT-UNSAT linear search on the cost.

    Each improvement appends a PB bound ``cost <= best - 1`` to the same
    session; the closing UNSAT proves the last model optimal.
    """
    start = time.monotonic()
    formula = wcnf.hard.copy()
    unit, wide = _soft_violation_literals(wcnf)
    for clause, weight in wide:
        relax = formula.new_var("relax")
        formula.add_clause(list(clause) + [relax], "soft-relax")
        unit.append((relax, weight))
    best_model, best_cost = None, None
    with make_session(backend, formula) as session:
        while True:
            out = session.solve(deadline)
            if out.status == "timeout":
                status = SATISFIABLE if best_model is not None else TIMEOUT
                return MaxSatOutcome(status, best_model, best_cost, time.monotonic() - start)
            if out.status == "unsat":
                if best_model is None:
                    return MaxSatOutcome(UNSATISFIABLE, wall=time.monotonic() - start)
                return MaxSatOutcome(OPTIMUM, best_model, best_cost, time.monotonic() - start)
            model = out.model[: wcnf.hard.var_count + 1]
            best_model, best_cost = model, wcnf.cost(model)
            if best_cost == 0:
                return MaxSatOutcome(OPTIMUM, best_model, 0, time.monotonic() - start)
            encode_pb_leq(
                formula,
                PbConstraint([l for l, _ in unit], [w for _, w in unit], best_cost - 1),
                family="cost-bound",
            )


def solve_maxsat_rc2(wcnf: WcnfFormula, deadline: Optional[float] = None) -> MaxSatOutcome:
    """RC2 from PySAT (no interruption; the deadline is advisory)."""
    from pysat.examples.rc2 import RC2
    from pysat.formula import WCNF

    start = time.monotonic()
    w = WCNF()
    for clause in wcnf.hard.clauses:
        w.append(list(clause))
    for clause, weight in wcnf.soft:
        w.append(list(clause), weight=weight)
    with RC2(w) as rc2:
        lits = rc2.compute()
        if lits is None:
            return MaxSatOutcome(UNSATISFIABLE, wall=time.monotonic() - start)
        model = [False] * (wcnf.hard.var_count + 1)
        for lit in lits:
            if 0 < lit <= wcnf.hard.var_count:
                model[lit] = True
        return MaxSatOutcome(OPTIMUM, model, wcnf.cost(model), time.monotonic() - start)


def parse_maxsat_output(text: str, var_count: int) -> tuple[Optional[str], Optional[int], Optional[list[bool]]]:
    """Parse ``s``/``o``/``v`` lines of the MaxSAT evaluation protocol.

    The ``v`` line may hold signed literals (``v -1 2 -3``) or a 0/1 string
    (``v 010``).  Returns ``(status, last cost, model)``.
    """
    status = cost = None
    model = None
    values: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "s":
            word = rest.strip().upper()
            if word.startswith("OPTIMUM"):
                status = OPTIMUM
            elif word.startswith("UNSAT"):
                status = UNSATISFIABLE
            elif word.startswith("SAT"):
                status = SATISFIABLE
            elif word.startswith("UNKNOWN"):
                status = None
            else:
                raise MaxSatProtocolError(f"unknown status line {line!r}", text)
        elif head == "o":
            try:
                cost = int(rest.split()[0])
            except (IndexError, ValueError):
                raise MaxSatProtocolError(f"bad cost line {line!r}", text) from None
        elif head == "v":
            values.extend(rest.split())
    if values:
        model = [False] * (var_count + 1)
        if len(values) == 1 and len(values[0]) > 1 and set(values[0]) <= {"0", "1"}:
            for v, bit in enumerate(values[0][:var_count], start=1):
                model[v] = bit == "1"
        else:
            try:
                for tok in values:
                    lit = int(tok)
                    if 0 < lit <= var_count:
                        model[lit] = True
            except ValueError:
                raise MaxSatProtocolError("bad model line", text) from None
    return status, cost, model


def _command(template: Optional[str]) -> list[str]:
    template = template or os.environ.get(MAXSAT_CMD_ENV)
    if not template:
        raise MaxSatConfigError(f"no MaxSAT command configured (set {MAXSAT_CMD_ENV} or --maxsat-cmd)")
    if "{wcnf}" not in template:
        raise MaxSatConfigError("MaxSAT command template must contain the {wcnf} placeholder")
    return shlex.split(template)


def run_external_maxsat(
    wcnf: WcnfFormula, command: Optional[str] = None, budget: Optional[float] = None
) -> MaxSatOutcome:
    """Run an external MaxSAT solver on a temporary WCNF file.

    ``command`` is a template such as ``"maxhs {wcnf}"``; it falls back to
    the ``SALBP3PM_MAXSAT_CMD`` environment variable.
    """
    argv_template = _command(command)
    start = time.monotonic()
    with tempfile.TemporaryDirectory(prefix="salbp3pm-") as tmp:
        path = os.path.join(tmp, "problem.wcnf")
        with open(path, "w", encoding="utf-8") as fh:
            write_wcnf(wcnf, fh)
        argv = [arg.replace("{wcnf}", path) for arg in argv_template]
        try:
            proc = subprocess.Popen(argv, stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True)
        except FileNotFoundError as exc:
            raise MaxSatConfigError(f"MaxSAT binary not found: {argv[0]}") from exc
        timed_out = False
        try:
            out, _ = proc.communicate(timeout=budget)
        except subprocess.TimeoutExpired:
            proc.kill()
            out, _ = proc.communicate()
            timed_out = True
    wall = time.monotonic() - start
    status, cost, model = parse_maxsat_output(out or "", wcnf.hard.var_count)
    if timed_out:
        return MaxSatOutcome(TIMEOUT, model, cost, wall)
    if status == OPTIMUM:
        if model is None:
            raise MaxSatProtocolError("optimum reported without a model line", out)
        return MaxSatOutcome(OPTIMUM, model, wcnf.cost(model), wall)
    if status == UNSATISFIABLE:
        return MaxSatOutcome(UNSATISFIABLE, wall=wall)
    if status == SATISFIABLE and model is not None:
        return MaxSatOutcome(SATISFIABLE, model, wcnf.cost(model), wall)
    raise MaxSatProtocolError("solver output has no usable status line", out)


def solve_maxsat(
    wcnf: WcnfFormula, solver: str = "embedded", deadline: Optional[float] = None, command=None
) -> MaxSatOutcome:
    """Dispatch on ``solver``: ``embedded``, ``embedded:pysat``, ``rc2`` or ``external``."""
    if solver == "embedded":
        return solve_maxsat_embedded(wcnf, deadline)
    if solver.startswith("embedded:"):
        return solve_maxsat_embedded(wcnf, deadline, backend=solver.partition(":")[2])
    if solver == "rc2":
        return solve_maxsat_rc2(wcnf, deadline)
    if solver == "external":
        budget = None if deadline is None else max(deadline - time.monotonic(), 0.0)
        return run_external_maxsat(wcnf, command, budget)
    raise MaxSatConfigError(f"unknown MaxSAT solver {solver!r}")
