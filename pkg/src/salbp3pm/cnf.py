"""Clause databases, DIMACS/WCNF serialization and PB-to-CNF translation."""
from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

__all__ = [
    "CnfFormula",
    "PbConstraint",
    "WcnfFormula",
    "encode_pb_leq",
    "parse_dimacs",
    "parse_wcnf",
    "pb_aux_bound",
    "write_dimacs",
    "write_wcnf",
]


class CnfFormula:
    """Append-only clause store with a dense variable allocator.

    Clause counts are tallied per constraint family (the ``family`` argument
    of :meth:`add_clause`) so encoders can report their size breakdown.
    """

    def __init__(self, var_count: int = 0):
        self.var_count = var_count
        self.clauses: list[list[int]] = []
        self.trivially_unsat = False
        self.family_counts: Counter = Counter()
        self.var_tags: dict[int, str] = {}

    def new_var(self, tag: str = "aux") -> int:
        self.var_count += 1
        self.var_tags[self.var_count] = tag
        return self.var_count

    def add_clause(self, lits: Iterable[int], family: str = "other") -> bool:
        """Append a clause; returns False when it was dropped as a tautology."""
        clause = []
        seen = set()
        for lit in lits:
            lit = int(lit)
            if lit == 0 or abs(lit) > self.var_count:
                raise ValueError(f"literal {lit} outside allocated range 1..{self.var_count}")
            if -lit in seen:
                return False
            if lit not in seen:
                seen.add(lit)
                clause.append(lit)
        if not clause:
            self.trivially_unsat = True
        self.clauses.append(clause)
        self.family_counts[family] += 1
        return True

    def extend(self, clauses: Iterable[Iterable[int]], family: str = "other") -> None:
        for clause in clauses:
            self.add_clause(clause, family)

    def copy(self) -> "CnfFormula":
        other = CnfFormula(self.var_count)
        other.clauses = [list(c) for c in self.clauses]
        other.trivially_unsat = self.trivially_unsat
        other.family_counts = Counter(self.family_counts)
        other.var_tags = dict(self.var_tags)
        return other

    def __len__(self) -> int:
        return len(self.clauses)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CnfFormula):
            return NotImplemented
        return self.var_count == other.var_count and self.clauses == other.clauses

    def satisfied_by(self, model: Sequence[bool]) -> bool:
        """Evaluate under ``model`` (indexed by variable, slot 0 unused)."""
        for clause in self.clauses:
            if not any(model[lit] if lit > 0 else not model[-lit] for lit in clause):
                return False
        return True

    def tag_counts(self) -> Counter:
        return Counter(self.var_tags.get(v, "aux") for v in range(1, self.var_count + 1))


@dataclass
class WcnfFormula:
    hard: CnfFormula
    soft: list[tuple[list[int], int]] = field(default_factory=list)

    @property
    def top(self) -> int:
        return sum(w for _, w in self.soft) + 1

    def add_soft(self, lits: Sequence[int], weight: int) -> None:
        if weight < 1:
            raise ValueError("soft weights must be positive")
        for lit in lits:
            if lit == 0 or abs(lit) > self.hard.var_count:
                raise ValueError(f"literal {lit} outside allocated range")
        self.soft.append((list(lits), int(weight)))

    def cost(self, model: Sequence[bool]) -> int:
        return sum(
            w
            for lits, w in self.soft
            if not any(model[l] if l > 0 else not model[-l] for l in lits)
        )


@dataclass
class PbConstraint:
    """``sum(coefficients[k] * literals[k]) <= bound``."""

    literals: list[int]
    coefficients: list[int]
    bound: int

    def __post_init__(self):
        if len(self.literals) != len(self.coefficients):
            raise ValueError("literals and coefficients differ in length")
        if any(c < 1 for c in self.coefficients):
            raise ValueError("coefficients must be positive")

    def holds(self, true_lits: set) -> bool:
        return sum(c for l, c in zip(self.literals, self.coefficients) if l in true_lits) <= self.bound


def pb_aux_bound(n_literals: int, bound: int) -> int:
    """Upper bound on auxiliaries created by :func:`encode_pb_leq`."""
    return max(n_literals - 1, 0) * max(bound, 0)


def encode_pb_leq(formula: CnfFormula, pb: PbConstraint, family: str = "pb") -> None:
    """Weighted sequential counter.

    ``s[k][v]`` (v = 1..bound) means "the first k+1 terms sum to at least v".
    Only the upward implications are emitted, which is enough for a <=
    constraint: any satisfying assignment extends by setting the counters to
    the exact prefix sums.
    """
    bound = pb.bound
    if bound < 0:
        formula.add_clause([], family)
        return
    terms = []
    for lit, coef in zip(pb.literals, pb.coefficients):
        if coef > bound:
            formula.add_clause([-lit], family)
        else:
            terms.append((lit, coef))
    if sum(c for _, c in terms) <= bound:
        return
    prev: dict[int, int] = {}
    last = len(terms) - 1
    for k, (lit, coef) in enumerate(terms):
        # overflow: this term on top of an earlier partial sum exceeding the slack
        for v, var in prev.items():
            if v + coef > bound:
                formula.add_clause([-lit, -var], family)
        if k == last:
            break
        cur: dict[int, int] = {}
        reach = sorted(set(prev) | {v + coef for v in prev if v + coef <= bound} | {coef})
        for v in reach:
            cur[v] = formula.new_var("aux")
        for v in reach:
            if v <= coef:
                formula.add_clause([-lit, cur[v]], family)
        for v, var in prev.items():
            formula.add_clause([-var, cur[v]], family)
            if v + coef <= bound:
                formula.add_clause([-lit, -var, cur[v + coef]], family)
        # counters are monotone in v: "sum >= v" implies "sum >= v'" for v' < v
        for lo, hi in zip(reach, reach[1:]):
            formula.add_clause([-cur[hi], cur[lo]], family)
        prev = cur


# --- serialization ----------------------------------------------------------


def _clause_line(prefix: Optional[str], clause: Sequence[int]) -> str:
    body = " ".join(map(str, clause))
    parts = [p for p in (prefix, body) if p]
    return " ".join(parts + ["0"]) + "\n"


def write_dimacs(formula: CnfFormula, sink: TextIO) -> None:
    sink.write(f"p cnf {formula.var_count} {len(formula.clauses)}\n")
    for clause in formula.clauses:
        sink.write(_clause_line(None, clause))


def write_wcnf(wcnf: WcnfFormula, sink: TextIO, style: str = "classic") -> None:
    """Write weighted CNF; ``style`` is ``"classic"`` (p wcnf header) or ``"2022"``."""
    hard = wcnf.hard
    if style == "classic":
        top = wcnf.top
        sink.write(f"p wcnf {hard.var_count} {len(hard.clauses) + len(wcnf.soft)} {top}\n")
        hard_prefix = str(top)
    elif style == "2022":
        hard_prefix = "h"
    else:
        raise ValueError(f"unknown WCNF style {style!r}")
    for clause in hard.clauses:
        sink.write(_clause_line(hard_prefix, clause))
    for clause, weight in wcnf.soft:
        sink.write(_clause_line(str(weight), clause))


def dimacs_string(formula: CnfFormula) -> str:
    buf = io.StringIO()
    write_dimacs(formula, buf)
    return buf.getvalue()


def wcnf_string(wcnf: WcnfFormula, style: str = "classic") -> str:
    buf = io.StringIO()
    write_wcnf(wcnf, buf, style)
    return buf.getvalue()


def _data_lines(text: str):
    for no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if line and not line.startswith("c") and not line.startswith("%"):
            yield no, line


def parse_dimacs(source) -> CnfFormula:
    text = source if isinstance(source, str) else source.read()
    formula = None
    expected = 0
    pending: list[int] = []
    for no, line in _data_lines(text):
        if line.startswith("p"):
            fields_ = line.split()
            if len(fields_) != 4 or fields_[1] != "cnf":
                raise ValueError(f"line {no}: bad problem line {line!r}")
            formula = CnfFormula(int(fields_[2]))
            expected = int(fields_[3])
            continue
        if formula is None:
            raise ValueError(f"line {no}: clause before problem line")
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                formula.add_clause(pending)
                pending = []
            else:
                pending.append(lit)
    if formula is None:
        raise ValueError("missing problem line")
    if pending:
        raise ValueError("last clause is not 0-terminated")
    if len(formula.clauses) != expected:
        raise ValueError(f"header declares {expected} clauses, found {len(formula.clauses)}")
    return formula


def parse_wcnf(source) -> WcnfFormula:
    """Parse classic (``p wcnf``) or 2022 (``h``-prefixed) weighted CNF."""
    text = source if isinstance(source, str) else source.read()
    top = None
    nvars = 0
    rows = []
    for no, line in _data_lines(text):
        if line.startswith("p"):
            fields_ = line.split()
            if len(fields_) < 4 or fields_[1] != "wcnf":
                raise ValueError(f"line {no}: bad problem line {line!r}")
            nvars = int(fields_[2])
            top = int(fields_[4]) if len(fields_) > 4 else None
            continue
        toks = line.split()
        if toks[-1] != "0":
            raise ValueError(f"line {no}: clause is not 0-terminated")
        head, lits = toks[0], [int(t) for t in toks[1:-1]]
        rows.append((head, lits))
        for lit in lits:
            nvars = max(nvars, abs(lit))
    wcnf = WcnfFormula(CnfFormula(nvars))
    for head, lits in rows:
        if head == "h" or (top is not None and int(head) >= top):
            wcnf.hard.add_clause(lits)
        else:
            wcnf.add_soft(lits, int(head))
    return wcnf
