"""Benchmark harness: instance x method cells, CSV rows and a Markdown summary.

Every cell runs in its own process so a backend that ignores its deadline
can still be killed; a killed cell is reported as a timeout row.
"""
from __future__ import annotations

import csv
import io
import multiprocessing as mp
import os
import re
import time
import traceback
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .instance import Instance, generate_powers, read_instance
from .optimize import DriverConfig, optimize
from .precedence import closure

__all__ = ["BenchRow", "collect_instances", "run_bench", "summarize", "write_csv"]

INSTANCE_SUFFIXES = (".alb", ".in2", ".txt", ".inst")
KILL_GRACE = 5.0  # seconds past the budget before a cell is killed


@dataclass
class BenchRow:
    family: str
    instance: str
    n: int
    m: int
    c: int
    edges: int
    closure_edges: int
    method: str
    status: str
    best_peak: Optional[int]
    proof: bool
    wall: Optional[float]
    iterations: int
    variables: int
    clauses: int
    error: str = ""


def _family(path: Path, root: Path) -> str:
    if path.parent != root:
        return path.parent.name
    match = re.match(r"[A-Za-z]+", path.stem)
    return match.group(0).upper() if match else path.stem


def collect_instances(root, seed: int = 0, power_range=(1, 10)) -> list[tuple[str, Instance]]:
    """(family, instance) pairs under ``root`` in sorted path order.

    Subdirectories are families; files directly under ``root`` are grouped
    by their leading letters.  Missing powers are drawn with ``seed``.
    """
    root = Path(root)
    if root.is_file():
        paths = [root]
        root = root.parent
    else:
        paths = sorted(p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in INSTANCE_SUFFIXES)
    out = []
    for path in paths:
        inst = read_instance(path)
        if inst.powers is None:
            inst = generate_powers(inst, seed, *power_range)
        out.append((_family(path, root), inst))
    return out


def _cell(conn, family: str, inst: Instance, config: DriverConfig) -> None:
    try:
        clo = closure(inst)
        res = optimize(inst, config)
        row = BenchRow(
            family, inst.name, inst.n, inst.m, inst.c, len(inst.edges), len(clo.e_star),
            config.method, res.status, res.best_peak, res.proof_of_optimality, res.wall,
            res.iterations, res.variables, res.clauses,
        )
    except Exception as exc:  # recorded as a row, never aborts the run
        row = _failed_row(family, inst, config.method, "error", f"{type(exc).__name__}: {exc}")
        traceback.print_exc()
    conn.send(row)
    conn.close()


def _failed_row(family, inst, method, status, error="") -> BenchRow:
    return BenchRow(
        family, inst.name, inst.n, inst.m, inst.c, len(inst.edges),
        len(closure(inst).e_star), method, status, None, False, None, 0, 0, 0, error,
    )


def run_bench(
    instances: Sequence[tuple[str, Instance]],
    methods: Sequence[str],
    base: DriverConfig,
    jobs: Optional[int] = None,
    progress=None,
) -> list[BenchRow]:
    """Run every (instance, method) cell; rows come back in input order."""
    cells = [(f, inst, m) for f, inst in instances for m in methods]
    jobs = max(1, jobs or os.cpu_count() or 1)
    ctx = mp.get_context("spawn")
    rows: list[Optional[BenchRow]] = [None] * len(cells)
    pending = list(enumerate(cells))
    running: dict[int, tuple] = {}
    while pending or running:
        while pending and len(running) < jobs:
            idx, (family, inst, method) = pending.pop(0)
            config = DriverConfig(**{**_fields(base), "method": method, "encoder": None})
            recv, send = ctx.Pipe(duplex=False)
            proc = ctx.Process(target=_cell, args=(send, family, inst, config), daemon=True)
            proc.start()
            send.close()
            limit = None if base.timeout is None else time.monotonic() + base.timeout + KILL_GRACE
            running[idx] = (proc, recv, limit)
        for idx, (proc, recv, limit) in list(running.items()):
            family, inst, method = cells[idx]
            row = None
            if recv.poll():
                try:
                    row = recv.recv()
                except EOFError:
                    row = _failed_row(family, inst, method, "error", "worker exited without a result")
            elif not proc.is_alive():
                row = _failed_row(family, inst, method, "error", f"worker exit code {proc.exitcode}")
            elif limit is not None and time.monotonic() > limit:
                proc.kill()
                row = _failed_row(family, inst, method, "timeout", "killed after budget")
            if row is not None:
                proc.join()
                recv.close()
                rows[idx] = row
                del running[idx]
                if progress:
                    progress(row)
        if running:
            time.sleep(0.01)
    return rows  # type: ignore[return-value]


def _fields(config: DriverConfig) -> dict:
    return {f.name: getattr(config, f.name) for f in fields(config)}


COLUMNS = [f.name for f in fields(BenchRow)]


def write_csv(rows: Iterable[BenchRow], sink, omit_timing: bool = False) -> None:
    writer = csv.DictWriter(sink, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        rec = asdict(row)
        if omit_timing or rec["wall"] is None:
            rec["wall"] = ""
        else:
            rec["wall"] = f"{rec['wall']:.3f}"
        rec["best_peak"] = "" if rec["best_peak"] is None else rec["best_peak"]
        rec["proof"] = int(rec["proof"])
        writer.writerow(rec)


def summarize(rows: Sequence[BenchRow], omit_timing: bool = False) -> str:
    """Markdown table: per family and method, ``#optimal / summed time of optimal rows``."""
    methods = list(dict.fromkeys(r.method for r in rows))
    families = list(dict.fromkeys(r.family for r in rows))
    counts = {f: len({r.instance for r in rows if r.family == f}) for f in families}

    def cell(selected):
        solved = [r for r in selected if r.status == "optimal"]
        if omit_timing:
            return f"{len(solved)} / -"
        return f"{len(solved)} / {sum(r.wall or 0.0 for r in solved):.2f}"

    out = io.StringIO()
    out.write("| Family | " + " | ".join(methods) + " |\n")
    out.write("|---" * (len(methods) + 1) + "|\n")
    for f in families:
        cells = [cell([r for r in rows if r.family == f and r.method == m]) for m in methods]
        out.write(f"| {f} ({counts[f]}) | " + " | ".join(cells) + " |\n")
    total = [cell([r for r in rows if r.method == m]) for m in methods]
    out.write(f"| Total ({sum(counts.values())}) | " + " | ".join(total) + " |\n")
    return out.getvalue()
