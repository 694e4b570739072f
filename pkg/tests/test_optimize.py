import time

import pytest

from salbp3pm.cnf import CnfFormula
from salbp3pm.encode_cse import encode_cse_base
from salbp3pm.encode_org import EncodeOptions, add_binary_peak_layer, binary_wcnf
from salbp3pm.instance import Instance, analytic_bounds, power_profile, validate_solution
from salbp3pm.optimize import (
    METHODS,
    CORE_METHODS,
    DriverConfig,
    blocking_sets,
    decode,
    initial_upper_bound,
    optimize,
)
from salbp3pm.oracle import oracle_solve

from conftest import corpus, example_schedule, five_tasks, tiny

TINY = [(tiny(2, 1), 7), (tiny(1, 2), 4), (tiny(2, 2), 4)]


@pytest.mark.parametrize("method", list(METHODS))
@pytest.mark.parametrize("inst,expected", TINY)
def test_tiny_optima(method, inst, expected):
    res = optimize(inst, DriverConfig(method=method))
    assert res.status == "optimal"
    assert res.proof_of_optimality
    assert res.best_peak == expected


def test_decode_forced():
    inst = Instance(1, 1, [1], [3])
    f, vm = encode_cse_base(inst)
    model = [False] * (f.var_count + 1)
    model[vm.x[0, 0]] = model[vm.s[0, 0]] = True
    sol = decode(model, vm, inst)
    assert sol.to_dict() == {"assignment": [1], "start": [0]}


def test_constant_objective_init():
    ub, sol, state = initial_upper_bound(Instance(2, 3, [2], [6]))
    assert ub == 6
    assert state in ("ok", "proved")


def test_init_bound_brackets_oracle():
    for inst in corpus(80, max_n=5, seed0=300):
        opt = oracle_solve(inst).optimal_peak
        first, _, state = initial_upper_bound(inst, DriverConfig(init_iterations=1))
        ub, sol, state = initial_upper_bound(inst)
        if opt is None:
            assert state == "infeasible" and ub is None
            continue
        assert opt <= ub <= first
        assert power_profile(inst, sol).peak == ub
        if state == "proved":
            assert ub == opt


def test_init_infeasible():
    inst = Instance(1, 2, [2, 2, 2], [1, 1, 1], [(0, 1), (1, 2)])
    assert initial_upper_bound(inst)[2] == "infeasible"


def test_witnessed_and_minimized_sets():
    inst = five_tasks()
    prof = power_profile(inst, example_schedule())
    assert blocking_sets(prof, inst, 14, "witnessed") == [frozenset({0, 1, 2})]
    # greedy drops the weakest task (power 3) only if the rest still reaches the threshold
    assert blocking_sets(prof, inst, 11, "minimized") == [frozenset({0, 2})]
    assert blocking_sets(prof, inst, 14, "minimized") == [frozenset({0, 1, 2})]


def test_binary_bits_for_w8():
    inst = five_tasks()
    f, vm = encode_cse_base(inst)
    bits = add_binary_peak_layer(f, vm, inst, analytic_bounds(inst).lb, (8).bit_length())
    w = binary_wcnf(f, bits)
    assert len(bits) == 4
    assert sorted(wt for _, wt in w.soft) == [1, 2, 4, 8]
    assert w.top == 16


@pytest.mark.parametrize("method", CORE_METHODS)
def test_drivers_match_oracle(method):
    for inst in corpus(60, seed0=1000):
        opt = oracle_solve(inst).optimal_peak
        res = optimize(inst, DriverConfig(method=method))
        if opt is None:
            assert res.status == "infeasible" and res.best_solution is None
        else:
            assert res.status == "optimal" and res.best_peak == opt
            assert validate_solution(inst, res.best_solution).ok
            assert power_profile(inst, res.best_solution).peak == res.best_peak


@pytest.mark.parametrize("variant", [
    dict(method="org_cb", persistent=False),
    dict(method="cse_cb", blocking_scope="minimized"),
    dict(method="cse_inc", blocking_scope="minimized", init_iterations=1),
    dict(method="cse_maxsat", maxsat_solver="rc2"),
    dict(method="cse_maxsat", maxsat_solver="embedded:pysat"),
    dict(method="cse_inc", backend="pysat"),
    dict(method="cse_pb", encode=EncodeOptions(use_pruning=False)),
    dict(method="cse_inc", encode=EncodeOptions(use_extended_edges=False)),
    dict(method="org_inc", encode=EncodeOptions(use_extended_edges=True)),
    dict(method="cse_cb", encode=EncodeOptions(sat12="force")),
    dict(method="org_cb", encode=EncodeOptions(sat12="force")),
])
def test_variants_match_oracle(variant):
    for inst in corpus(40, max_n=5, seed0=2000):
        opt = oracle_solve(inst).optimal_peak
        res = optimize(inst, DriverConfig(**variant))
        assert res.best_peak == opt
        assert res.status == ("infeasible" if opt is None else "optimal")


def test_monotone_progress():
    for inst in corpus(60, seed0=3000):
        for method in CORE_METHODS:
            res = optimize(inst, DriverConfig(method=method))
            peaks = [r.peak for r in res.log if r.peak is not None]
            best = None
            for p in peaks:
                best = p if best is None else min(best, p)
            if method in ("cse_pb",):
                assert peaks == sorted(set(peaks), reverse=True)
            if method == "cse_inc":
                inc = [r.peak for r in res.log if r.phase == "inc" and r.peak is not None]
                assert inc == sorted(set(inc), reverse=True)
            if peaks:
                assert res.best_peak == best


def test_floor_case_incremental():
    # optimum equals the lower bound: one refinement round, then the closing UNSAT
    inst = tiny(1, 2)
    assert analytic_bounds(inst).lb == 4
    res = optimize(inst, DriverConfig(method="cse_inc", init_iterations=1))
    assert res.best_peak == 4 and res.proof_of_optimality
    assert res.log[-1].peak is None


def test_timeout_budget():
    inst = corpus(1, seed0=5)[0]
    res = optimize(inst, DriverConfig(method="cse_inc", timeout=0.0))
    assert res.status == "timeout"
    assert res.best_solution is None and not res.proof_of_optimality


def test_maxsat_timeout_falls_back_to_init():
    import sys
    from pathlib import Path

    fake = Path(__file__).with_name("fake_maxsat.py")
    inst = five_tasks()
    config = DriverConfig(
        method="cse_maxsat",
        init_iterations=1,
        maxsat_solver="external",
        maxsat_cmd=f"{sys.executable} {fake} hang {{wcnf}}",
        timeout=3.0,
    )
    start = time.monotonic()
    res = optimize(inst, config)
    assert time.monotonic() - start < 15
    assert res.status == "feasible_only"
    assert not res.proof_of_optimality
    assert validate_solution(inst, res.best_solution).ok
    assert res.best_peak == res.log[0].peak


def test_result_record_serializable():
    import json

    res = optimize(tiny(2, 2), DriverConfig(method="cse_maxsat"))
    record = json.loads(json.dumps(res.to_dict()))
    assert record["status"] == "optimal"
    assert record["best_peak"] == 4
    assert record["solution"]["assignment"][0] in (1, 2)


def test_config_validation():
    with pytest.raises(ValueError):
        DriverConfig(method="cse_magic")
    with pytest.raises(ValueError):
        DriverConfig(blocking_scope="everything")
    with pytest.raises(ValueError):
        DriverConfig(init_iterations=0)
    assert DriverConfig(method="cse-inc").method == "cse_inc"
    assert DriverConfig(method="org_cb").encoder == "org"


def test_missing_powers_rejected():
    with pytest.raises(ValueError):
        optimize(Instance(1, 2, [1], None))
