"""Semantic variable maps shared by the ORG and CSE encoders."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .cnf import CnfFormula

__all__ = ["Emitter", "EncodingError", "VarMap"]

Lit = Union[int, bool]


class EncodingError(RuntimeError):
    """A model violates an invariant the encoding is supposed to enforce."""


@dataclass
class VarMap:
    """Propositional indices of the X/S/A (and optional R/T/U/binU) cells.

    ``r`` and ``tt`` may map a cell to a Python bool when window pruning
    fixes it; such cells have no variable.
    """

    n: int
    m: int
    c: int
    x: dict = field(default_factory=dict)
    s: dict = field(default_factory=dict)
    a: dict = field(default_factory=dict)
    r: dict = field(default_factory=dict)
    tt: dict = field(default_factory=dict)
    u: dict = field(default_factory=dict)
    binu: dict = field(default_factory=dict)
    reverse: dict = field(default_factory=dict)

    def register(self, formula: CnfFormula, kind: str, key: tuple) -> int:
        var = formula.new_var(kind)
        getattr(self, _TABLES[kind])[key] = var
        self.reverse[var] = (kind,) + key
        return var

    def describe(self, var: int) -> tuple:
        return self.reverse.get(var, ("aux", var))

    def activity_literals(self, t: int) -> list[tuple[int, int]]:
        """``(task, var)`` pairs of the activity cells at time ``t``."""
        return [(i, self.a[i, t]) for i in range(self.n) if (i, t) in self.a]

    def true_cells(self, model, table: dict) -> dict:
        out: dict = {}
        for key, var in table.items():
            if isinstance(var, bool):
                continue
            if model[var]:
                out.setdefault(key[0], []).append(key[1])
        return out

    def counts(self) -> dict:
        def live(table):
            return sum(1 for v in table.values() if not isinstance(v, bool))

        return {
            "X": live(self.x),
            "S": live(self.s),
            "A": live(self.a),
            "R": live(self.r),
            "T": live(self.tt),
            "U": live(self.u),
            "binU": live(self.binu),
        }


_TABLES = {"X": "x", "S": "s", "A": "a", "R": "r", "T": "tt", "U": "u", "binU": "binu"}


class Emitter:
    """Adds clauses whose literals may be Python constants.

    ``True`` satisfies the clause (it is skipped), ``False`` is dropped.
    """

    def __init__(self, formula: CnfFormula):
        self.formula = formula

    def clause(self, lits: Iterable[Lit], family: str) -> None:
        out = []
        for lit in lits:
            if lit is True:
                return
            if lit is False:
                continue
            out.append(lit)
        self.formula.add_clause(out, family)

    def infeasible(self, family: str = "infeasible") -> None:
        """An immediately contradictory unit pair."""
        v = self.formula.new_var("infeasible")
        self.formula.add_clause([v], family)
        self.formula.add_clause([-v], family)


def neg(lit: Lit) -> Lit:
    if isinstance(lit, bool):
        return not lit
    return -lit
