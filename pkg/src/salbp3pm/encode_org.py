"""Baseline time-indexed encoding with pairwise at-most-one constraints.

Clause families are named after the constraint schema they implement
(``SAT-1`` .. ``SAT-13``, ``MaxSAT-9`` ..) so size reports can be compared
row by row with the compact encoding.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

from .cnf import CnfFormula, PbConstraint, WcnfFormula, encode_pb_leq
from .instance import Instance
from .precedence import PrecedenceClosure, closure
from .varmap import Emitter, VarMap

__all__ = [
    "EncodeOptions",
    "add_binary_peak_layer",
    "encode_org_base",
    "org_blocking_clause",
    "org_peak_layer_binary",
    "org_peak_layer_unary",
]


@dataclass(frozen=True)
class EncodeOptions:
    """Encoder switches.

    ``use_extended_edges=None`` picks the encoder default: precedence over
    the transitive closure for CSE, over the given edges for ORG.
    ``sat12`` is ``"off"`` or ``"force"`` (activity forced on the window
    every start covers).  ``literal_sat7`` allocates start variables outside
    the admissible window and fixes them false with unit clauses.
    """

    use_pruning: bool = True
    use_extended_edges: Optional[bool] = None
    sat12: str = "off"
    literal_sat7: bool = False

    def __post_init__(self):
        if self.sat12 not in ("off", "force"):
            raise ValueError(f"sat12 must be 'off' or 'force', not {self.sat12!r}")


def precedence_pairs(inst: Instance, clo: PrecedenceClosure, extended: bool) -> list[tuple[int, int]]:
    return sorted(clo.e_star if extended else inst.edges)


def _mandatory_window(inst: Instance, i: int) -> range:
    """Times at which task ``i`` is active whatever its start."""
    return range(inst.c - inst.durations[i], inst.durations[i])


def allocate_xsa(formula: CnfFormula, vm: VarMap, inst: Instance, literal_sat7: bool = False) -> None:
    for i in range(inst.n):
        for k in range(inst.m):
            vm.register(formula, "X", (i, k))
    horizon = range(inst.c) if literal_sat7 else None
    for i in range(inst.n):
        for t in horizon or inst.start_range(i):
            vm.register(formula, "S", (i, t))
    for i in range(inst.n):
        for t in range(inst.c):
            vm.register(formula, "A", (i, t))


def emit_activity(em: Emitter, vm: VarMap, inst: Instance, family: str) -> None:
    for i in range(inst.n):
        for t in inst.start_range(i):
            for e in range(inst.durations[i]):
                em.clause([-vm.s[i, t], vm.a[i, t + e]], family)


def emit_non_overlap(em: Emitter, vm: VarMap, inst: Instance, family: str, stations=None) -> None:
    for i, j in combinations(range(inst.n), 2):
        ks = range(inst.m) if stations is None else stations(i, j)
        for k in ks:
            for t in range(inst.c):
                em.clause([-vm.x[i, k], -vm.x[j, k], -vm.a[i, t], -vm.a[j, t]], family)


def emit_sat12(em: Emitter, vm: VarMap, inst: Instance, family: str) -> None:
    for i in range(inst.n):
        for t in _mandatory_window(inst, i):
            em.clause([vm.a[i, t]], family)


def encode_org_base(
    inst: Instance,
    clo: Optional[PrecedenceClosure] = None,
    options: EncodeOptions = EncodeOptions(),
) -> tuple[CnfFormula, VarMap]:
    clo = clo or closure(inst)
    formula = CnfFormula()
    vm = VarMap(inst.n, inst.m, inst.c)
    em = Emitter(formula)
    allocate_xsa(formula, vm, inst, options.literal_sat7)
    n, m = inst.n, inst.m

    for i in range(n):
        em.clause([vm.x[i, k] for k in range(m)], "SAT-1")
    for i in range(n):
        for k1, k2 in combinations(range(m), 2):
            em.clause([-vm.x[i, k1], -vm.x[i, k2]], "SAT-2")

    pairs = precedence_pairs(inst, clo, bool(options.use_extended_edges))
    for i, j in pairs:
        for h, k in combinations(range(m), 2):  # h < k
            em.clause([-vm.x[i, k], -vm.x[j, h]], "SAT-3")
    for i, j in pairs:
        for k in range(m):
            for t1 in inst.start_range(i):
                for t2 in inst.start_range(j):
                    if t1 > t2:
                        em.clause([-vm.x[i, k], -vm.x[j, k], -vm.s[i, t1], -vm.s[j, t2]], "SAT-4")

    for i in range(n):
        em.clause([vm.s[i, t] for t in inst.start_range(i)], "SAT-5")
    for i in range(n):
        for t1, t2 in combinations(inst.start_range(i), 2):
            em.clause([-vm.s[i, t1], -vm.s[i, t2]], "SAT-6")
    if options.literal_sat7:
        for i in range(n):
            for t in range(inst.c - inst.durations[i] + 1, inst.c):
                em.clause([-vm.s[i, t]], "SAT-7")

    emit_activity(em, vm, inst, "SAT-8")
    emit_non_overlap(em, vm, inst, "SAT-9")

    if options.use_pruning:
        emit_station_pruning(em, vm, inst, clo, "SAT-10", "SAT-11")
    if options.sat12 == "force":
        emit_sat12(em, vm, inst, "SAT-12")
    return formula, vm


def emit_station_pruning(em, vm, inst, clo, station_family, time_family) -> None:
    if not clo.feasible_windows:
        em.infeasible()
    for i in range(inst.n):
        window = clo.station_range(i)
        for k in range(inst.m):
            if k not in window:
                em.clause([-vm.x[i, k]], station_family)
        for k in window:
            for t in inst.start_range(i):
                if clo.ip(i, k, t):
                    em.clause([-vm.x[i, k], -vm.s[i, t]], time_family)


def org_blocking_clause(vm: VarMap, tasks: Iterable[int]) -> list[list[int]]:
    """Clauses forbidding every task in ``tasks`` from being active together."""
    tasks = sorted(set(tasks))
    if not tasks:
        raise ValueError("blocking set must be non-empty")
    out = []
    for t in range(vm.c):
        lits = [-vm.a[i, t] for i in tasks if (i, t) in vm.a]
        if lits:
            out.append(lits)
    return out


def _slot_pb(vm: VarMap, inst: Instance, t: int, extra_lits, extra_coefs, bound) -> PbConstraint:
    acts = vm.activity_literals(t)
    lits = [v for _, v in acts] + list(extra_lits)
    coefs = [inst.powers[i] for i, _ in acts] + list(extra_coefs)
    return PbConstraint(lits, coefs, bound)


def org_peak_layer_unary(formula: CnfFormula, vm: VarMap, inst: Instance, lb: int, ub: int) -> None:
    """Peak indicators ``U_1..U_ub``: at most ``#true U`` power per slot."""
    if lb > ub:
        raise ValueError(f"lb {lb} exceeds ub {ub}")
    em = Emitter(formula)
    u = {j: vm.register(formula, "U", (j,)) for j in range(1, ub + 1)}
    for j in range(1, lb + 1):
        em.clause([u[j]], "MaxSAT-9")
    for j in range(2, ub + 1):
        em.clause([-u[j], u[j - 1]], "MaxSAT-10")
    negs = [-u[j] for j in range(1, ub + 1)]
    for t in range(inst.c):
        encode_pb_leq(formula, _slot_pb(vm, inst, t, negs, [1] * ub, ub), "MaxSAT-11")


def add_binary_peak_layer(formula: CnfFormula, vm: VarMap, inst: Instance, lb: int, nbits: int) -> list[int]:
    """Peak bits ``binU_0..binU_{nbits-1}`` bounding every slot's power.

    Returns the bit variables, least significant first.
    """
    bits = [vm.register(formula, "binU", (b,)) for b in range(nbits)]
    top = (1 << nbits) - 1
    weights = [1 << b for b in range(nbits)]
    negs = [-v for v in bits]
    # sum 2^b * binU_b >= lb  <=>  sum 2^b * (not binU_b) <= top - lb
    encode_pb_leq(formula, PbConstraint(negs, weights, top - lb), "MaxSAT-9'")
    for t in range(inst.c):
        encode_pb_leq(formula, _slot_pb(vm, inst, t, negs, weights, top), "MaxSAT-11'")
    return bits


def binary_wcnf(formula: CnfFormula, bits: list[int]) -> WcnfFormula:
    wcnf = WcnfFormula(formula)
    for b, var in enumerate(bits):
        wcnf.add_soft([-var], 1 << b)
    return wcnf


def org_peak_layer_binary(formula: CnfFormula, vm: VarMap, inst: Instance, lb: int, ub: int) -> WcnfFormula:
    """Binary peak encoding over ``ceil(log2 ub) + 1`` bits; returns the WCNF."""
    if lb > ub:
        raise ValueError(f"lb {lb} exceeds ub {ub}")
    nbits = (ub - 1).bit_length() + 1
    bits = add_binary_peak_layer(formula, vm, inst, lb, nbits)
    return binary_wcnf(formula, bits)


def decode_peak_bits(model, vm: VarMap) -> int:
    return sum(1 << b for (b,), var in vm.binu.items() if model[var])
