"""Compact encoding with cumulative station and start-time reach variables.

``R(i,k)`` reads "task i sits on a station <= k" and ``T(i,t)`` "task i has
started by time t".  Both are ladders, so at-most-one and precedence need
O(m) / O(c) clauses instead of pairwise ones.
"""
from __future__ import annotations

from typing import Optional

from .cnf import CnfFormula
from .encode_org import (
    EncodeOptions,
    allocate_xsa,
    emit_activity,
    emit_non_overlap,
    emit_sat12,
    emit_station_pruning,
    encode_org_base,
    precedence_pairs,
)
from .instance import Instance
from .precedence import PrecedenceClosure, closure
from .varmap import Emitter, VarMap, neg

__all__ = ["cse_size_report", "encode_cse_base"]


def _allocate_reach(formula, vm: VarMap, inst: Instance, clo: PrecedenceClosure, prune: bool) -> None:
    """R and T cells; with pruning, cells fixed by the windows become constants."""
    m = inst.m
    for i in range(inst.n):
        lo, hi = (clo.first[i], clo.last[i]) if prune else (0, m - 1)
        for k in range(m):
            if prune and k < lo:
                vm.r[i, k] = False
            elif prune and k >= hi:
                vm.r[i, k] = True
            else:
                vm.register(formula, "R", (i, k))
    for i in range(inst.n):
        horizon = inst.c - inst.durations[i]
        lo, hi = clo.start_bounds(i) if prune else (0, horizon)
        hi = min(hi, horizon)
        for t in range(horizon + 1):
            if prune and t < lo:
                vm.tt[i, t] = False
            elif prune and t >= hi:
                vm.tt[i, t] = True
            else:
                vm.register(formula, "T", (i, t))


def encode_cse_base(
    inst: Instance,
    clo: Optional[PrecedenceClosure] = None,
    options: EncodeOptions = EncodeOptions(),
) -> tuple[CnfFormula, VarMap]:
    clo = clo or closure(inst)
    extended = True if options.use_extended_edges is None else options.use_extended_edges
    prune = options.use_pruning and clo.feasible_windows
    formula = CnfFormula()
    vm = VarMap(inst.n, inst.m, inst.c)
    em = Emitter(formula)
    allocate_xsa(formula, vm, inst, options.literal_sat7)
    _allocate_reach(formula, vm, inst, clo, prune)
    n, m = inst.n, inst.m
    X, R, S, T = vm.x, vm.r, vm.s, vm.tt

    # station ladder
    for i in range(n):
        em.clause([neg(R[i, 0]), X[i, 0]], "CSE-1")
        em.clause([-X[i, 0], R[i, 0]], "CSE-1")
    for i in range(n):
        for k in range(1, m):
            em.clause([neg(R[i, k - 1]), R[i, k]], "CSE-2")
    for i in range(n):
        for k in range(m):
            em.clause([-X[i, k], R[i, k]], "CSE-3")
    for i in range(n):
        for k in range(1, m):
            em.clause([-X[i, k], neg(R[i, k - 1])], "CSE-4")
    for i in range(n):
        for k in range(1, m):
            em.clause([neg(R[i, k]), R[i, k - 1], X[i, k]], "CSE-5")
    for i in range(n):
        em.clause([R[i, m - 2] if m > 1 else False, X[i, m - 1]], "CSE-5a")

    pairs = precedence_pairs(inst, clo, extended)
    # different stations: a(p) <= a(s)
    for p, s in pairs:
        for k in range(m - 1):
            em.clause([-X[s, k], R[p, k]], "CSE-6")

    # start-time ladder
    for i in range(n):
        horizon = inst.c - inst.durations[i]
        em.clause([neg(T[i, 0]), S[i, 0]], "CSE-7")
        em.clause([-S[i, 0], T[i, 0]], "CSE-7")
        for t in range(1, horizon + 1):
            em.clause([neg(T[i, t - 1]), T[i, t]], "CSE-8")
        for t in range(horizon + 1):
            em.clause([-S[i, t], T[i, t]], "CSE-9")
        for t in range(1, horizon + 1):
            em.clause([-S[i, t], neg(T[i, t - 1])], "CSE-10")
        for t in range(1, horizon + 1):
            em.clause([neg(T[i, t]), T[i, t - 1], S[i, t]], "CSE-11")
        em.clause([T[i, horizon]], "CSE-ALO")

    emit_activity(em, vm, inst, "CSE-12")

    # same station: start t' of s needs p started by t' - t_p
    for p, s in pairs:
        tp = inst.durations[p]
        for k in _shared_stations(clo, p, s, m, prune):
            for t2 in inst.start_range(s):
                deadline = t2 - tp
                reach = T[p, deadline] if deadline >= 0 else False
                em.clause([-X[s, k], -X[p, k], -S[s, t2], reach], "CSE-13")

    if prune:
        emit_non_overlap(em, vm, inst, "CSE-14", stations=lambda i, j: _shared_stations(clo, i, j, m, True))
    else:
        emit_non_overlap(em, vm, inst, "CSE-14")
    if options.use_pruning:
        emit_station_pruning(em, vm, inst, clo, "CSE-15", "CSE-16")
    if options.sat12 == "force":
        emit_sat12(em, vm, inst, "SAT-12")
    return formula, vm


def _shared_stations(clo: PrecedenceClosure, i: int, j: int, m: int, prune: bool) -> range:
    if not prune:
        return range(m)
    return range(max(clo.first[i], clo.first[j]), min(clo.last[i], clo.last[j]) + 1)


# --- size comparison --------------------------------------------------------

_ROWS = [
    ("Task assignment ALO", ("SAT-1",), ("CSE-1", "CSE-5a")),
    ("Task assignment AMO", ("SAT-2",), ("CSE-2", "CSE-3", "CSE-4", "CSE-5")),
    ("Scheduling ALO", ("SAT-5",), ("CSE-7", "CSE-ALO")),
    ("Scheduling AMO", ("SAT-6", "SAT-7"), ("CSE-8", "CSE-9", "CSE-10", "CSE-11")),
    ("Precedence (diff. station)", ("SAT-3",), ("CSE-6",)),
    ("Precedence (same station)", ("SAT-4",), ("CSE-13",)),
    ("Activity propagation", ("SAT-8",), ("CSE-12",)),
    ("Non-overlap", ("SAT-9",), ("CSE-14",)),
    ("Pruning", ("SAT-10", "SAT-11"), ("CSE-15", "CSE-16")),
]


def size_summary(formula: CnfFormula, vm: VarMap) -> dict:
    variables = vm.counts()
    variables["aux"] = formula.var_count - sum(variables.values())
    return {
        "variables": variables,
        "var_total": formula.var_count,
        "clauses": dict(sorted(formula.family_counts.items())),
        "clause_total": len(formula.clauses),
    }


def cse_size_report(
    inst: Instance,
    clo: Optional[PrecedenceClosure] = None,
    options: EncodeOptions = EncodeOptions(),
) -> dict:
    """Variable and clause counts of both base encodings, side by side."""
    clo = clo or closure(inst)
    org_f, org_vm = encode_org_base(inst, clo, options)
    cse_f, cse_vm = encode_cse_base(inst, clo, options)
    org, cse = size_summary(org_f, org_vm), size_summary(cse_f, cse_vm)
    rows = []
    for label, org_fams, cse_fams in _ROWS:
        rows.append(
            {
                "constraint": label,
                "org": sum(org["clauses"].get(f, 0) for f in org_fams),
                "cse": sum(cse["clauses"].get(f, 0) for f in cse_fams),
            }
        )
    return {
        "instance": inst.name,
        "n": inst.n,
        "m": inst.m,
        "c": inst.c,
        "edges": len(inst.edges),
        "closure_edges": len(clo.e_star),
        "org": org,
        "cse": cse,
        "rows": rows,
    }
