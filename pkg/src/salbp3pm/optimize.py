"""Peak-minimization drivers on top of the base encodings.

All drivers share one contract: the returned schedule is decoded from the
X/S cells of a model and its peak is recomputed from start times, never
read from activity literals (those are only implied upward).
"""
from __future__ import annotations

import copy
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

from .cnf import CnfFormula, PbConstraint, encode_pb_leq
from .encode_cse import encode_cse_base
from .encode_org import (
    EncodeOptions,
    add_binary_peak_layer,
    binary_wcnf,
    decode_peak_bits,
    encode_org_base,
    org_blocking_clause,
)
from .instance import Bounds, Instance, PowerProfile, Solution, analytic_bounds, power_profile, validate_solution
from .precedence import closure
from .solvers.maxsat import OPTIMUM, solve_maxsat
from .solvers.sessions import Session, make_session
from .varmap import EncodingError, VarMap

__all__ = [
    "METHODS",
    "DriverConfig",
    "IterationRecord",
    "OptimizeResult",
    "add_indicator_layer",
    "decode",
    "init_upper_bound",
    "initial_upper_bound",
    "optimize",
    "optimize_clause_blocking",
    "optimize_incremental",
    "optimize_maxsat",
    "optimize_pb",
]

log = logging.getLogger(__name__)

OPTIMAL, FEASIBLE, INFEASIBLE, TIMEOUT = "optimal", "feasible_only", "infeasible", "timeout"

# method -> (strategy, default encoder); the first five are the core configurations
METHODS = {
    "org_cb": ("cb", "org"),
    "cse_cb": ("cb", "cse"),
    "cse_pb": ("pb", "cse"),
    "cse_maxsat": ("maxsat", "cse"),
    "cse_inc": ("inc", "cse"),
    "org_pb": ("pb", "org"),
    "org_maxsat": ("maxsat", "org"),
    "org_inc": ("inc", "org"),
}
CORE_METHODS = ("org_cb", "cse_cb", "cse_pb", "cse_maxsat", "cse_inc")


@dataclass
class DriverConfig:
    method: str = "cse_inc"
    encoder: Optional[str] = None
    timeout: Optional[float] = None
    init_iterations: int = 10
    blocking_scope: str = "witnessed"
    seed: int = 0
    backend: str = "embedded"
    maxsat_solver: str = "embedded"
    maxsat_cmd: Optional[str] = None
    persistent: bool = True
    encode: EncodeOptions = field(default_factory=EncodeOptions)

    def __post_init__(self):
        self.method = self.method.replace("-", "_").lower()
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.encoder is None:
            self.encoder = METHODS[self.method][1]
        if self.encoder not in ("org", "cse"):
            raise ValueError(f"unknown encoder {self.encoder!r}")
        if self.blocking_scope not in ("witnessed", "minimized"):
            raise ValueError(f"unknown blocking scope {self.blocking_scope!r}")
        if self.init_iterations < 1:
            raise ValueError("init_iterations must be at least 1")

    @property
    def strategy(self) -> str:
        return METHODS[self.method][0]


@dataclass
class IterationRecord:
    phase: str
    peak: Optional[int]
    wall: float
    clauses_added: int
    bound: Optional[int] = None
    false_indicators: Optional[int] = None


@dataclass
class OptimizeResult:
    status: str
    best_peak: Optional[int]
    best_solution: Optional[Solution]
    iterations: int
    proof_of_optimality: bool
    log: list = field(default_factory=list)
    method: str = ""
    encoder: str = ""
    bounds: Optional[Bounds] = None
    variables: int = 0
    clauses: int = 0
    wall: float = 0.0

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "best_peak": self.best_peak,
            "proof_of_optimality": self.proof_of_optimality,
            "iterations": self.iterations,
            "method": self.method,
            "encoder": self.encoder,
            "lb": self.bounds.lb if self.bounds else None,
            "ub_analytic": self.bounds.ub_analytic if self.bounds else None,
            "ub_tight": self.bounds.ub_tight if self.bounds else None,
            "variables": self.variables,
            "clauses": self.clauses,
            "wall": round(self.wall, 6),
            "solution": self.best_solution.to_dict() if self.best_solution else None,
            "log": [asdict(rec) for rec in self.log],
        }


# --- decoding ---------------------------------------------------------------


def decode(model, vm: VarMap, inst: Instance) -> Solution:
    stations = vm.true_cells(model, vm.x)
    starts = vm.true_cells(model, vm.s)
    assignment, start = [], []
    for i in range(inst.n):
        ks, ts = stations.get(i, []), starts.get(i, [])
        if len(ks) != 1 or len(ts) != 1:
            raise EncodingError(f"task {i + 1}: stations {ks}, starts {ts} in model")
        if ts[0] not in inst.start_range(i):
            raise EncodingError(f"task {i + 1}: start {ts[0]} outside its window")
        assignment.append(ks[0])
        start.append(ts[0])
    return Solution(tuple(assignment), tuple(start))


def _evaluate(model, vm, inst) -> tuple[Solution, PowerProfile]:
    sol = decode(model, vm, inst)
    report = validate_solution(inst, sol)
    if not report.ok:
        raise EncodingError(f"decoded schedule is infeasible: {report.summary()}")
    return sol, power_profile(inst, sol)


def blocking_sets(profile: PowerProfile, inst: Instance, threshold: int, scope: str) -> list[frozenset]:
    """Task sets to forbid from co-occurring, one per distinct peak set."""
    sets = []
    for tau in profile.peak_times:
        tasks = profile.peak_sets[tau]
        if scope == "minimized":
            tasks = _shrink(tasks, inst.powers, threshold)
        if tasks not in sets:
            sets.append(tasks)
    return sets


def _shrink(tasks: frozenset, powers, threshold: int) -> frozenset:
    """Greedy inclusion-minimal subset whose power still reaches ``threshold``."""
    keep = set(tasks)
    total = sum(powers[i] for i in keep)
    for i in sorted(tasks, key=lambda j: (powers[j], j)):
        if total - powers[i] >= threshold:
            keep.discard(i)
            total -= powers[i]
    return frozenset(keep)


def _block(formula: CnfFormula, vm: VarMap, sets) -> int:
    before = len(formula)
    for tasks in sets:
        formula.extend(org_blocking_clause(vm, tasks), "SAT-13")
    return len(formula) - before


# --- shared plumbing --------------------------------------------------------


class _Run:
    """Book-keeping for one driver invocation."""

    def __init__(self, inst: Instance, config: DriverConfig):
        self.inst = inst
        self.config = config
        self.started = time.monotonic()
        self.deadline = None if config.timeout is None else self.started + config.timeout
        self.bounds = analytic_bounds(inst)
        self.clo = closure(inst)
        encoder = encode_cse_base if config.encoder == "cse" else encode_org_base
        self.formula, self.vm = encoder(inst, self.clo, config.encode)
        self.log: list[IterationRecord] = []
        self.best_peak: Optional[int] = None
        self.best: Optional[Solution] = None
        self.ub_tight: Optional[int] = None
        self.peak_vars = self.formula.var_count
        self.peak_clauses = len(self.formula)

    def session(self, formula: Optional[CnfFormula] = None) -> Session:
        return make_session(self.config.backend, formula or self.formula, seed=self.config.seed)

    def expired(self) -> bool:
        return self.deadline is not None and time.monotonic() >= self.deadline

    def record(self, phase, peak, t0, clauses_added, **extra):
        self.log.append(IterationRecord(phase, peak, time.monotonic() - t0, clauses_added, **extra))
        log.debug("%s %s: peak=%s clauses+=%d", self.inst.name, phase, peak, clauses_added)

    def improve(self, sol: Solution, peak: int) -> None:
        if self.best_peak is None or peak < self.best_peak:
            self.best_peak, self.best = peak, sol

    def track(self, formula: CnfFormula) -> None:
        self.peak_vars = max(self.peak_vars, formula.var_count)
        self.peak_clauses = max(self.peak_clauses, len(formula))

    def finish(self, status: str, proof: bool) -> OptimizeResult:
        if status == OPTIMAL and not proof:
            raise AssertionError("optimal status without a closing proof")
        if self.best is not None:
            report = validate_solution(self.inst, self.best)
            if not report.ok or power_profile(self.inst, self.best).peak != self.best_peak:
                raise EncodingError("best schedule failed re-validation")
            if status == TIMEOUT:
                status = FEASIBLE
        elif status in (OPTIMAL, FEASIBLE):
            raise AssertionError(f"status {status} without a schedule")
        bounds = self.bounds
        if self.ub_tight is not None:
            bounds = Bounds(bounds.lb, bounds.ub_analytic, self.ub_tight)
        return OptimizeResult(
            status=status,
            best_peak=self.best_peak,
            best_solution=self.best,
            iterations=len(self.log),
            proof_of_optimality=proof,
            log=self.log,
            method=self.config.method,
            encoder=self.config.encoder,
            bounds=bounds,
            variables=self.peak_vars,
            clauses=self.peak_clauses,
            wall=time.monotonic() - self.started,
        )


def init_upper_bound(run: _Run, session: Session, formula: CnfFormula, iterations: int) -> str:
    """Multi-solve initialization: returns ``"ok"``, ``"proved"``, ``"infeasible"`` or ``"timeout"``.

    Each round blocks the peak sets of the model it found (weight equal to
    that model's peak), so later rounds must find different configurations.
    ``"proved"`` means blocking exhausted the search: the best peak seen is
    optimal.
    """
    for it in range(iterations):
        t0 = time.monotonic()
        out = session.solve(run.deadline)
        if out.status == "timeout":
            return "timeout"
        if out.status == "unsat":
            run.record("init", None, t0, 0)
            return "infeasible" if run.best is None else "proved"
        sol, prof = _evaluate(out.model, run.vm, run.inst)
        run.improve(sol, prof.peak)
        threshold = run.best_peak if run.config.blocking_scope == "minimized" else prof.peak
        added = _block(formula, run.vm, blocking_sets(prof, run.inst, threshold, run.config.blocking_scope))
        run.record("init", prof.peak, t0, added)
    run.ub_tight = run.best_peak
    return "ok"


def initial_upper_bound(inst: Instance, config: Optional[DriverConfig] = None):
    """Run only the initialization rounds; returns ``(ub_tight, solution, state)``.

    ``state`` is ``"ok"``, ``"proved"``, ``"infeasible"`` or ``"timeout"``;
    ``ub_tight`` is the smallest peak seen (``None`` if no schedule).
    """
    config = config or DriverConfig()
    run = _Run(inst, config)
    with run.session() as session:
        state = init_upper_bound(run, session, run.formula, config.init_iterations)
    return run.best_peak, run.best, state


# --- drivers ----------------------------------------------------------------


def optimize_clause_blocking(inst: Instance, config: DriverConfig) -> OptimizeResult:
    run = _Run(inst, config)
    formula = run.formula
    session = run.session()
    try:
        while True:
            if not config.persistent and run.log:
                session.close()
                session = run.session()
            t0 = time.monotonic()
            out = session.solve(run.deadline)
            if out.status == "timeout":
                return run.finish(TIMEOUT, False)
            if out.status == "unsat":
                run.record("cb", None, t0, 0)
                if run.best is None:
                    return run.finish(INFEASIBLE, True)
                return run.finish(OPTIMAL, True)
            sol, prof = _evaluate(out.model, run.vm, inst)
            run.improve(sol, prof.peak)
            threshold = run.best_peak if config.blocking_scope == "minimized" else prof.peak
            added = _block(formula, run.vm, blocking_sets(prof, inst, threshold, config.blocking_scope))
            run.track(formula)
            run.record("cb", prof.peak, t0, added)
    finally:
        session.close()


def _slot_constraint(vm: VarMap, inst: Instance, t: int, bound: int, extra=()) -> PbConstraint:
    acts = vm.activity_literals(t)
    lits = [v for _, v in acts] + [l for l, _ in extra]
    coefs = [inst.powers[i] for i, _ in acts] + [c for _, c in extra]
    return PbConstraint(lits, coefs, bound)


def optimize_pb(inst: Instance, config: DriverConfig) -> OptimizeResult:
    run = _Run(inst, config)
    with run.session() as session:
        t0 = time.monotonic()
        out = session.solve(run.deadline)
    if out.status == "timeout":
        return run.finish(TIMEOUT, False)
    if out.status == "unsat":
        run.record("pb", None, t0, 0)
        return run.finish(INFEASIBLE, True)
    sol, prof = _evaluate(out.model, run.vm, inst)
    run.improve(sol, prof.peak)
    run.record("pb", prof.peak, t0, 0)
    while True:
        t0 = time.monotonic()
        formula = run.formula.copy()
        for t in range(inst.c):
            encode_pb_leq(formula, _slot_constraint(run.vm, inst, t, run.best_peak - 1), "PB")
        run.track(formula)
        added = len(formula) - len(run.formula)
        with run.session(formula) as session:
            out = session.solve(run.deadline)
        if out.status == "timeout":
            return run.finish(TIMEOUT, False)
        if out.status == "unsat":
            run.record("pb", None, t0, added, bound=run.best_peak - 1)
            return run.finish(OPTIMAL, True)
        sol, prof = _evaluate(out.model, run.vm, inst)
        if prof.peak >= run.best_peak:
            raise EncodingError("PB bound did not decrease the peak")
        run.improve(sol, prof.peak)
        run.record("pb", prof.peak, t0, added, bound=run.best_peak)


def optimize_maxsat(inst: Instance, config: DriverConfig) -> OptimizeResult:
    run = _Run(inst, config)
    init_formula = run.formula.copy()
    with run.session(init_formula) as session:
        state = init_upper_bound(run, session, init_formula, config.init_iterations)
    if state == "infeasible":
        return run.finish(INFEASIBLE, True)
    if state == "timeout":
        return run.finish(TIMEOUT, False)
    if state == "proved":
        return run.finish(OPTIMAL, True)

    t0 = time.monotonic()
    formula = run.formula.copy()
    vm = copy.deepcopy(run.vm)
    nbits = run.best_peak.bit_length()
    bits = add_binary_peak_layer(formula, vm, inst, run.bounds.lb, nbits)
    wcnf = binary_wcnf(formula, bits)
    run.track(formula)
    added = len(formula) - len(run.formula)
    out = solve_maxsat(wcnf, config.maxsat_solver, run.deadline, config.maxsat_cmd)
    if out.model is not None:
        sol, prof = _evaluate(out.model, vm, inst)
        run.improve(sol, prof.peak)
        if out.status == OPTIMUM and decode_peak_bits(out.model, vm) != prof.peak:
            raise EncodingError("binary peak bits disagree with the decoded schedule")
    run.record("maxsat", None if out.model is None else run.best_peak, t0, added, bound=out.cost)
    if out.status == OPTIMUM:
        return run.finish(OPTIMAL, True)
    if out.status == "unsat":
        raise EncodingError("MaxSAT hard part unsatisfiable although a schedule exists")
    return run.finish(TIMEOUT, False)


def add_indicator_layer(formula: CnfFormula, vm: VarMap, inst: Instance, lb: int, w_init: int) -> dict:
    """Indicators ``U_j`` for ``j = lb-1 .. w_init-1`` with ordering and slot PBs.

    Each false indicator lowers every slot's power budget by one, so with
    ``f`` indicators false the peak is at most ``w_init - f``.  Returns
    ``{j: var}``.
    """
    lo = lb - 1
    u = {j: vm.register(formula, "U", (j,)) for j in range(lo, w_init)}
    for j in range(lo + 1, w_init):
        formula.add_clause([-u[j], u[j - 1]], "INC-order")
    negs = [(-u[j], 1) for j in range(lo, w_init)]
    for t in range(inst.c):
        encode_pb_leq(formula, _slot_constraint(vm, inst, t, w_init, negs), "INC-PB")
    return u


def optimize_incremental(inst: Instance, config: DriverConfig) -> OptimizeResult:
    """Persistent session, peak indicators and unit-clause refinement.

    Indicators ``U_j`` cover ``j = lb-1 .. W-1`` for the initial bound
    ``W``; every slot carries ``sum(not U_j) + sum(w_i A_i,t) <= W``.
    Asserting ``not U_{p-1}`` after a model of peak ``p`` falsifies the
    upper part of the ladder and caps every slot at ``p - 1``.
    """
    run = _Run(inst, config)
    formula = run.formula
    session = run.session()
    try:
        state = init_upper_bound(run, session, formula, config.init_iterations)
        if state == "infeasible":
            return run.finish(INFEASIBLE, True)
        if state == "timeout":
            return run.finish(TIMEOUT, False)
        if state == "proved":
            return run.finish(OPTIMAL, True)

        t0 = time.monotonic()
        before = len(formula)
        w_init = run.best_peak
        u = add_indicator_layer(formula, run.vm, inst, run.bounds.lb, w_init)
        run.track(formula)
        run.record("inc-setup", None, t0, len(formula) - before, bound=w_init)

        while True:
            t0 = time.monotonic()
            out = session.solve(run.deadline)
            if out.status == "timeout":
                return run.finish(TIMEOUT, False)
            if out.status == "unsat":
                run.record("inc", None, t0, 0)
                return run.finish(OPTIMAL, True)
            sol, prof = _evaluate(out.model, run.vm, inst)
            false_u = sum(1 for v in u.values() if not out.model[v])
            if prof.peak > w_init - false_u:
                raise EncodingError("indicator bound violated by a model")
            run.improve(sol, prof.peak)
            formula.add_clause([-u[prof.peak - 1]], "INC-refine")
            run.track(formula)
            run.record("inc", prof.peak, t0, 1, bound=w_init - false_u, false_indicators=false_u)
    finally:
        session.close()


_DRIVERS: dict[str, Callable[[Instance, DriverConfig], OptimizeResult]] = {
    "cb": optimize_clause_blocking,
    "pb": optimize_pb,
    "maxsat": optimize_maxsat,
    "inc": optimize_incremental,
}


def optimize(inst: Instance, config: Optional[DriverConfig] = None, **kwargs) -> OptimizeResult:
    """Run the driver selected by ``config.method`` (keyword overrides allowed)."""
    if config is None:
        config = DriverConfig(**kwargs)
    elif kwargs:
        config = DriverConfig(**{**asdict_shallow(config), **kwargs})
    if inst.powers is None:
        raise ValueError(f"{inst.name}: powers are not set")
    return _DRIVERS[config.strategy](inst, config)


def asdict_shallow(config: DriverConfig) -> dict:
    return {f: getattr(config, f) for f in config.__dataclass_fields__}
