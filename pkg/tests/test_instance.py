import io

import pytest
from hypothesis import given, settings, strategies as st

from salbp3pm.instance import (
    Instance,
    InstanceError,
    ParseError,
    Solution,
    analytic_bounds,
    format_instance,
    generate_powers,
    parse_instance,
    power_profile,
    validate_solution,
)
from salbp3pm.oracle import oracle_feasible_set

from conftest import corpus, example_schedule, five_tasks


# --- parsing ---------------------------------------------------------------

def test_parse_native_minimal():
    inst = parse_instance("2 1 2\n1 1\n3 4\n-1 -1\n")
    assert (inst.n, inst.m, inst.c) == (2, 1, 2)
    assert inst.durations == (1, 1)
    assert inst.powers == (3, 4)
    assert inst.edges == ()


def test_parse_native_comments_and_edges():
    text = "# demo\n3 2 5\n1 2 3\n4 5 6\n# edges\n1 2\n2 3\n-1 -1\n"
    inst = parse_instance(text, name="demo")
    assert inst.edges == ((0, 1), (1, 2))
    assert inst.name == "demo"


def test_parse_native_placeholder_powers():
    inst = parse_instance("2 1 2\n1 1\n? ?\n-1 -1\n")
    assert inst.powers is None


def test_parse_alb_plain():
    inst = parse_instance("5\n3 4 2 3 2\n1,2\n-1,-1\n", format="alb", cycle_time=7, stations=3)
    assert inst.n == 5
    assert inst.durations == (3, 4, 2, 3, 2)
    assert inst.edges == ((0, 1),)
    assert inst.powers is None


def test_parse_alb_tagged_sets_minimum_stations():
    text = (
        "<number of tasks>\n4\n<cycle time>\n5\n<order strength>\n0,5\n"
        "<task times>\n1 3\n2 3\n3 2\n4 2\n<precedence relations>\n1,2\n3,4\n<end>\n"
    )
    inst = parse_instance(text, format="alb")
    assert inst.c == 5
    assert inst.m == 2  # load 10 over capacity 5, and a 2-station schedule exists
    assert inst.edges == ((0, 1), (2, 3))


def test_parse_cycle_rejected():
    with pytest.raises(InstanceError, match="precedence cycle"):
        parse_instance("2 1 2\n1 1\n3 4\n1 2\n2 1\n-1 -1\n")


def test_parse_error_has_line_number():
    with pytest.raises(ParseError) as err:
        parse_instance("2 1 2\n1 x\n3 4\n-1 -1\n")
    assert err.value.line == 2


def test_duration_above_cycle_time_names_task():
    with pytest.raises(InstanceError, match="task 2"):
        parse_instance("2 1 2\n1 3\n3 4\n-1 -1\n")


def test_missing_terminator():
    with pytest.raises(ParseError, match="terminator"):
        parse_instance("2 1 2\n1 1\n3 4\n1 2\n")


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 1), (0, 1)], [(0, 5)]])
def test_bad_edges(edges):
    with pytest.raises(InstanceError):
        Instance(1, 3, [1, 1], [1, 1], edges)


def test_format_round_trip():
    inst = Instance(2, 6, [1, 3, 2], [4, 5, 6], [(0, 2)], "rt")
    again = parse_instance(format_instance(inst), name="rt")
    assert again == inst


# --- powers and bounds -----------------------------------------------------

def test_generate_powers_degenerate_range():
    inst = generate_powers(five_tasks(powers=False), seed=7, lo=5, hi=5)
    assert inst.powers == (5,) * 5


def test_generate_powers_deterministic():
    base = Instance(1, 10, [1] * 12, None, [])
    assert generate_powers(base, 1).powers == generate_powers(base, 1).powers
    assert generate_powers(base, 1).powers != generate_powers(base, 2).powers
    assert all(1 <= w <= 10 for w in generate_powers(base, 1).powers)


def test_generate_powers_bad_range():
    with pytest.raises(ValueError):
        generate_powers(five_tasks(powers=False), 0, 5, 4)


def test_bounds_five_tasks():
    b = analytic_bounds(five_tasks())
    # energy 3*5 + 4*3 + 2*6 + 3*4 + 2*5 = 61; ceil(61/7) = 9 > max power 6
    assert b.lb == 9
    assert b.ub_analytic == 6 + 5 + 5


def test_bounds_single_task():
    b = analytic_bounds(Instance(1, 1, [1], [5]))
    assert (b.lb, b.ub_analytic) == (5, 5)


def test_bounds_all_equal_powers():
    b = analytic_bounds(Instance(4, 10, [1, 2, 3], [7, 7, 7]))
    assert b.ub_analytic == 21


# --- profiles and validation -----------------------------------------------

def test_example_schedule_profile():
    prof = power_profile(five_tasks(), example_schedule())
    assert prof.peak == 14
    assert prof.peak_times == (1, 2)
    assert prof.peak_sets[1] == prof.peak_sets[2] == frozenset({0, 1, 2})


def test_single_task_profile():
    prof = power_profile(Instance(1, 3, [2], [5]), Solution((0,), (0,)))
    assert prof.totals == (5, 5, 0)
    assert prof.peak == 5


def test_two_task_profile():
    prof = power_profile(Instance(1, 2, [1, 1], [3, 4]), Solution((0, 0), (0, 1)))
    assert prof.totals == (3, 4)
    assert prof.peak == 4


def test_example_schedule_validates():
    assert validate_solution(five_tasks(), example_schedule()).ok


def test_overlap_reported():
    sol = Solution((0, 1, 2, 2, 1), (0, 1, 1, 3, 1))
    rep = validate_solution(five_tasks(), sol)
    assert rep.overlap == [(1, 4)]
    assert not rep


def test_precedence_reported():
    inst = Instance(2, 4, [1, 1], [1, 1], [(0, 1)])
    rep = validate_solution(inst, Solution((1, 0), (0, 0)))
    assert rep.precedence == [(0, 1)]


def test_cycle_time_and_range_reported():
    inst = Instance(2, 4, [2, 1], [1, 1], [])
    rep = validate_solution(inst, Solution((0, 2), (3, 0)))
    assert rep.cycle_time == [0]
    assert rep.assignment_range == [1]


def _brute_feasible(inst, sol):
    # literal reading of the constraints, independent of the validator's code path
    t = inst.durations
    for i in range(inst.n):
        if not (0 <= sol.assignment[i] < inst.m and 0 <= sol.start[i] <= inst.c - t[i]):
            return False
    busy = set()
    for i in range(inst.n):
        for tau in range(sol.start[i], sol.start[i] + t[i]):
            if (sol.assignment[i], tau) in busy:
                return False
            busy.add((sol.assignment[i], tau))
    for i, j in inst.edges:
        if sol.assignment[i] > sol.assignment[j]:
            return False
        if sol.assignment[i] == sol.assignment[j] and sol.start[i] + t[i] > sol.start[j]:
            return False
    return True


def test_validator_matches_enumeration():
    from itertools import product

    for inst in corpus(40, max_n=3):
        feasible = {s.key() for s in oracle_feasible_set(inst)}
        ranges = [range(inst.m)] * inst.n + [range(inst.c - t + 1) for t in inst.durations]
        for combo in product(*ranges):
            sol = Solution(combo[: inst.n], combo[inst.n:])
            ok = validate_solution(inst, sol).ok
            assert ok == _brute_feasible(inst, sol) == (sol.key() in feasible)


@st.composite
def instance_and_starts(draw):
    n = draw(st.integers(1, 6))
    c = draw(st.integers(1, 8))
    durations = [draw(st.integers(1, c)) for _ in range(n)]
    powers = [draw(st.integers(1, 10)) for _ in range(n)]
    starts = [draw(st.integers(0, c - t)) for t in durations]
    inst = Instance(draw(st.integers(1, 3)), c, durations, powers, [])
    return inst, Solution([0] * n, starts)


@settings(max_examples=200, deadline=None)
@given(instance_and_starts())
def test_energy_conservation(case):
    inst, sol = case
    prof = power_profile(inst, sol)
    assert prof.energy() == sum(w * t for w, t in zip(inst.powers, inst.durations))
    assert prof.peak == max(prof.totals)
    for tau in prof.peak_times:
        assert sum(inst.powers[i] for i in prof.peak_sets[tau]) == prof.peak
