import io
import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from salbp3pm.cnf import (
    CnfFormula,
    PbConstraint,
    WcnfFormula,
    dimacs_string,
    encode_pb_leq,
    parse_dimacs,
    parse_wcnf,
    pb_aux_bound,
    wcnf_string,
)
from salbp3pm.solvers.sessions import make_session


def test_dense_allocation():
    f = CnfFormula()
    assert [f.new_var(), f.new_var(), f.new_var()] == [1, 2, 3]


def test_tautology_rejected():
    f = CnfFormula(1)
    assert f.add_clause([1, -1]) is False
    assert len(f) == 0


def test_empty_clause_flags_unsat():
    f = CnfFormula()
    f.add_clause([])
    assert f.trivially_unsat
    with make_session("embedded", f) as s:
        assert s.solve().status == "unsat"


def test_out_of_range_literal():
    f = CnfFormula(2)
    with pytest.raises(ValueError):
        f.add_clause([3])
    with pytest.raises(ValueError):
        f.add_clause([0])


def test_duplicate_literals_collapsed():
    f = CnfFormula(2)
    f.add_clause([1, 1, -2])
    assert f.clauses == [[1, -2]]


def test_dimacs_format():
    f = CnfFormula(2)
    f.add_clause([1, -2])
    assert dimacs_string(f) == "p cnf 2 1\n1 -2 0\n"
    assert dimacs_string(CnfFormula()) == "p cnf 0 0\n"


def test_wcnf_format():
    hard = CnfFormula(2)
    hard.add_clause([1])
    w = WcnfFormula(hard)
    w.add_soft([-2], 3)
    assert w.top == 4
    assert wcnf_string(w) == "p wcnf 2 2 4\n4 1 0\n3 -2 0\n"
    assert wcnf_string(w, "2022") == "h 1 0\n3 -2 0\n"


def test_wcnf_round_trip():
    hard = CnfFormula(3)
    hard.add_clause([1, 2])
    hard.add_clause([-3])
    w = WcnfFormula(hard)
    w.add_soft([-1], 2)
    w.add_soft([3], 5)
    for style in ("classic", "2022"):
        again = parse_wcnf(wcnf_string(w, style))
        assert again.hard.clauses == hard.clauses
        assert again.soft == w.soft


def test_parse_dimacs_clause_count_checked():
    with pytest.raises(ValueError):
        parse_dimacs("p cnf 2 2\n1 0\n")


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.integers(-8, 8).filter(bool), min_size=1, max_size=5), max_size=20))
def test_dimacs_round_trip(clauses):
    f = CnfFormula(8)
    for c in clauses:
        f.add_clause(c)
    text = dimacs_string(f)
    assert parse_dimacs(io.StringIO(text)) == f
    assert dimacs_string(parse_dimacs(text)) == text


def test_wcnf_cost():
    hard = CnfFormula(2)
    w = WcnfFormula(hard)
    w.add_soft([-1], 1)
    w.add_soft([-2], 2)
    assert w.cost([False, True, True]) == 3
    assert w.cost([False, False, True]) == 2


# --- pseudo-Boolean ----------------------------------------------------------

def pb_allowed_sets(pb: PbConstraint, nvars: int, formula: CnfFormula):
    """Assignments of vars 1..nvars that extend to a model, via assumption solving."""
    allowed = set()
    with make_session("embedded", formula) as s:
        for bits in product([False, True], repeat=nvars):
            assumptions = [v if b else -v for v, b in zip(range(1, nvars + 1), bits)]
            if s.solve(assumptions=assumptions).status == "sat":
                allowed.add(bits)
    return allowed


def pb_truth(pb: PbConstraint, nvars: int):
    out = set()
    for bits in product([False, True], repeat=nvars):
        true = {v if b else -v for v, b in zip(range(1, nvars + 1), bits)}
        if pb.holds(true):
            out.add(bits)
    return out


def test_pb_small_example():
    f = CnfFormula(2)
    pb = PbConstraint([1, 2], [3, 4], 4)
    encode_pb_leq(f, pb)
    allowed = pb_allowed_sets(pb, 2, f)
    assert allowed == {(False, False), (True, False), (False, True)}


def test_pb_vacuous():
    f = CnfFormula(3)
    encode_pb_leq(f, PbConstraint([1, 2, 3], [2, 5, 1], 8))
    assert len(f) == 0 and f.var_count == 3


def test_pb_forced_literal():
    f = CnfFormula(1)
    encode_pb_leq(f, PbConstraint([1], [5], 4))
    assert f.clauses == [[-1]]


def test_pb_negative_bound():
    f = CnfFormula(1)
    encode_pb_leq(f, PbConstraint([1], [1], -1))
    assert f.trivially_unsat


def test_pb_random_sound_and_complete():
    rng = random.Random(2024)
    for _ in range(60):
        n = rng.randint(1, 7)
        lits = [v if rng.random() < 0.6 else -v for v in range(1, n + 1)]
        coefs = [rng.randint(1, 20) for _ in range(n)]
        pb = PbConstraint(lits, coefs, rng.randint(0, sum(coefs)))
        f = CnfFormula(n)
        encode_pb_leq(f, pb)
        assert f.var_count - n <= pb_aux_bound(n, pb.bound)
        assert pb_allowed_sets(pb, n, f) == pb_truth(pb, n)
