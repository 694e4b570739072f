"""Problem instances, schedules and power profiles.

Tasks and stations are 0-based everywhere in the Python API.  The text
formats on disk are 1-based, as in the public SALBP data sets.
"""
from __future__ import annotations

import io
import random
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO, Union

__all__ = [
    "Bounds",
    "Instance",
    "InstanceError",
    "ParseError",
    "PowerProfile",
    "Solution",
    "ValidationReport",
    "analytic_bounds",
    "format_instance",
    "generate_powers",
    "parse_instance",
    "power_profile",
    "read_instance",
    "validate_solution",
]


class InstanceError(ValueError):
    """An instance violates a structural invariant."""


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Instance:
    """A SALBP-3PM instance.

    ``edges`` holds 0-based pairs ``(i, j)``: task ``i`` completes before
    task ``j`` starts.  ``powers`` may be ``None`` for instances read from
    SALBP data files, which carry no power data.
    """

    station_count: int
    cycle_time: int
    durations: tuple[int, ...]
    powers: Optional[tuple[int, ...]] = None
    edges: tuple[tuple[int, int], ...] = ()
    name: str = "instance"

    def __post_init__(self):
        object.__setattr__(self, "durations", tuple(int(t) for t in self.durations))
        if self.powers is not None:
            object.__setattr__(self, "powers", tuple(int(w) for w in self.powers))
        object.__setattr__(self, "edges", tuple((int(i), int(j)) for i, j in self.edges))
        n = len(self.durations)
        if n < 1:
            raise InstanceError("instance needs at least one task")
        if self.station_count < 1:
            raise InstanceError("station count must be positive")
        if self.cycle_time < 1:
            raise InstanceError("cycle time must be positive")
        for i, t in enumerate(self.durations):
            if t < 1:
                raise InstanceError(f"task {i + 1}: duration must be positive")
            if t > self.cycle_time:
                raise InstanceError(
                    f"task {i + 1}: duration {t} exceeds cycle time {self.cycle_time}"
                )
        if self.powers is not None:
            if len(self.powers) != n:
                raise InstanceError(f"expected {n} powers, got {len(self.powers)}")
            for i, w in enumerate(self.powers):
                if w < 1:
                    raise InstanceError(f"task {i + 1}: power must be positive")
        seen = set()
        for i, j in self.edges:
            if not (0 <= i < n and 0 <= j < n):
                raise InstanceError(f"edge ({i + 1},{j + 1}) out of range 1..{n}")
            if i == j:
                raise InstanceError(f"edge ({i + 1},{j + 1}) is a self loop")
            if (i, j) in seen:
                raise InstanceError(f"duplicate edge ({i + 1},{j + 1})")
            seen.add((i, j))
        cycle = _find_cycle(n, self.edges)
        if cycle:
            path = " -> ".join(str(v + 1) for v in cycle)
            raise InstanceError(f"precedence cycle: {path}")

    @property
    def n(self) -> int:
        return len(self.durations)

    @property
    def m(self) -> int:
        return self.station_count

    @property
    def c(self) -> int:
        return self.cycle_time

    @property
    def has_powers(self) -> bool:
        return self.powers is not None

    def start_range(self, i: int) -> range:
        """Admissible start times of task ``i``."""
        return range(self.cycle_time - self.durations[i] + 1)

    def successors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            out[i].append(j)
        return out

    def predecessors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            out[j].append(i)
        return out

    def topological_order(self) -> list[int]:
        indeg = [0] * self.n
        succ = self.successors()
        for _, j in self.edges:
            indeg[j] += 1
        ready = [i for i in range(self.n) if indeg[i] == 0]
        order = []
        while ready:
            i = ready.pop(0)
            order.append(i)
            for j in succ[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    ready.append(j)
        return order

    def with_powers(self, powers: Sequence[int]) -> "Instance":
        return replace(self, powers=tuple(powers))


def _find_cycle(n: int, edges: Iterable[tuple[int, int]]) -> list[int]:
    succ: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        succ[i].append(j)
    color = [0] * n  # 0 new, 1 on stack, 2 done
    parent = [-1] * n
    for root in range(n):
        if color[root]:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            for w in it:
                if color[w] == 1:
                    cycle = [w]
                    u = v
                    while u != w:
                        cycle.append(u)
                        u = parent[u]
                    cycle.append(w)
                    return cycle[::-1]
                if color[w] == 0:
                    color[w] = 1
                    parent[w] = v
                    stack.append((w, iter(succ[w])))
                    break
            else:
                color[v] = 2
                stack.pop()
    return []


@dataclass(frozen=True)
class Solution:
    """Station (0-based) and start time of every task."""

    assignment: tuple[int, ...]
    start: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(a) for a in self.assignment))
        object.__setattr__(self, "start", tuple(int(s) for s in self.start))
        if len(self.assignment) != len(self.start):
            raise ValueError("assignment and start must have the same length")

    def key(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.assignment, self.start))

    def to_dict(self) -> dict:
        return {
            "assignment": [a + 1 for a in self.assignment],
            "start": list(self.start),
        }


@dataclass(frozen=True)
class PowerProfile:
    totals: tuple[int, ...]
    peak: int
    peak_times: tuple[int, ...]
    peak_sets: dict

    def energy(self) -> int:
        return sum(self.totals)


def _require_powers(inst: Instance) -> tuple[int, ...]:
    if inst.powers is None:
        raise InstanceError(f"{inst.name}: powers are not set (use generate_powers)")
    return inst.powers


def power_profile(inst: Instance, sol: Solution) -> PowerProfile:
    powers = _require_powers(inst)
    if len(sol.start) != inst.n:
        raise ValueError(f"solution covers {len(sol.start)} tasks, instance has {inst.n}")
    totals = [0] * inst.c
    active: list[list[int]] = [[] for _ in range(inst.c)]
    for i, s in enumerate(sol.start):
        for tau in range(max(s, 0), min(s + inst.durations[i], inst.c)):
            totals[tau] += powers[i]
            active[tau].append(i)
    peak = max(totals)
    times = tuple(tau for tau, w in enumerate(totals) if w == peak)
    return PowerProfile(
        totals=tuple(totals),
        peak=peak,
        peak_times=times,
        peak_sets={tau: frozenset(active[tau]) for tau in times},
    )


@dataclass
class ValidationReport:
    """Violations per constraint class.  Pairs and tasks are 0-based."""

    assignment_range: list[int] = field(default_factory=list)
    start_window: list[int] = field(default_factory=list)
    cycle_time: list[int] = field(default_factory=list)
    overlap: list[tuple[int, int]] = field(default_factory=list)
    precedence: list[tuple[int, int]] = field(default_factory=list)
    shape: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (
            self.assignment_range
            or self.start_window
            or self.cycle_time
            or self.overlap
            or self.precedence
            or self.shape
        )

    def __bool__(self) -> bool:
        return self.ok

    def summary(self) -> dict:
        return {
            "assignment_range": "pass" if not self.assignment_range else self.assignment_range,
            "start_window": "pass" if not self.start_window else self.start_window,
            "cycle_time": "pass" if not self.cycle_time else self.cycle_time,
            "overlap": "pass" if not self.overlap else self.overlap,
            "precedence": "pass" if not self.precedence else self.precedence,
        }


def validate_solution(inst: Instance, sol: Solution) -> ValidationReport:
    rep = ValidationReport()
    if len(sol.assignment) != inst.n:
        rep.shape.append(f"expected {inst.n} tasks, got {len(sol.assignment)}")
        return rep
    a, s, t = sol.assignment, sol.start, inst.durations
    for i in range(inst.n):
        if not 0 <= a[i] < inst.m:
            rep.assignment_range.append(i)
        if s[i] < 0:
            rep.start_window.append(i)
        if s[i] + t[i] > inst.c:
            rep.cycle_time.append(i)
    for i in range(inst.n):
        for j in range(i + 1, inst.n):
            if a[i] == a[j] and s[i] < s[j] + t[j] and s[j] < s[i] + t[i]:
                rep.overlap.append((i, j))
    for i, j in inst.edges:
        if a[i] > a[j] or (a[i] == a[j] and s[i] + t[i] > s[j]):
            rep.precedence.append((i, j))
    return rep


@dataclass(frozen=True)
class Bounds:
    lb: int
    ub_analytic: int
    ub_tight: Optional[int] = None

    def __post_init__(self):
        if self.ub_tight is not None and not (self.lb <= self.ub_tight <= self.ub_analytic):
            raise ValueError(
                f"inconsistent bounds lb={self.lb} ub_tight={self.ub_tight} "
                f"ub_analytic={self.ub_analytic}"
            )


def analytic_bounds(inst: Instance) -> Bounds:
    w = _require_powers(inst)
    energy = sum(wi * ti for wi, ti in zip(w, inst.durations))
    lb = max(max(w), -(-energy // inst.c))
    ub = sum(sorted(w, reverse=True)[: min(inst.m, inst.n)])
    return Bounds(lb=lb, ub_analytic=ub)


def generate_powers(inst: Instance, seed: int, lo: int = 1, hi: int = 10) -> Instance:
    """Draw every power uniformly from ``[lo, hi]`` with a seeded generator."""
    if lo > hi:
        raise ValueError(f"empty power range [{lo}, {hi}]")
    if lo < 1:
        raise ValueError("powers must be positive")
    rng = random.Random(seed)
    return inst.with_powers([rng.randint(lo, hi) for _ in range(inst.n)])


# --- text formats -----------------------------------------------------------

_Source = Union[str, TextIO]


def _lines(source: _Source) -> list[tuple[int, str]]:
    text = source if isinstance(source, str) else source.read()
    return [(no, line.strip()) for no, line in enumerate(text.splitlines(), start=1)]


def _ints(tokens: list[str], lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in tokens]
    except ValueError:
        raise ParseError(f"expected integers, got {' '.join(tokens)!r}", lineno) from None


def _parse_native(source: _Source, name: str) -> Instance:
    rows = [(no, line) for no, line in _lines(source) if line and not line.startswith("#")]
    if len(rows) < 3:
        raise ParseError("native format needs a header, a duration line and a power line")
    no, head = rows[0]
    fields_ = head.split()
    if len(fields_) != 3:
        raise ParseError("header must be 'n m c'", no)
    n, m, c = _ints(fields_, no)
    no, line = rows[1]
    durations = _ints(line.split(), no)
    if len(durations) != n:
        raise ParseError(f"expected {n} durations, got {len(durations)}", no)
    no, line = rows[2]
    toks = line.split()
    if len(toks) != n:
        raise ParseError(f"expected {n} powers, got {len(toks)}", no)
    if all(tok == "?" for tok in toks):
        powers = None
    elif any(tok == "?" for tok in toks):
        raise ParseError("powers must be all given or all '?'", no)
    else:
        powers = _ints(toks, no)
    edges = []
    terminated = False
    for no, line in rows[3:]:
        if terminated:
            raise ParseError("content after edge terminator", no)
        pair = _ints(line.replace(",", " ").split(), no)
        if len(pair) != 2:
            raise ParseError("edge lines hold exactly two task numbers", no)
        if pair == [-1, -1]:
            terminated = True
            continue
        edges.append((pair[0] - 1, pair[1] - 1))
    if not terminated:
        raise ParseError("missing '-1 -1' edge terminator")
    try:
        return Instance(m, c, durations, powers, edges, name)
    except InstanceError as exc:
        raise InstanceError(f"{name}: {exc}") from None


_TAG = re.compile(r"^<\s*([^>]+?)\s*>$")


def _parse_alb(source: _Source, name: str, cycle_time, stations) -> Instance:
    rows = [(no, line) for no, line in _lines(source) if line]
    if rows and _TAG.match(rows[0][1]):
        n, c, durations, edges = _parse_alb_tagged(rows)
        if cycle_time is None:
            cycle_time = c
    else:
        n, durations, edges = _parse_alb_plain(rows)
    if cycle_time is None:
        raise ParseError("cycle time is not in the file and was not supplied")
    if stations is None:
        from .generate import min_station_count

        stations = min_station_count(durations, edges, cycle_time)
        if stations is None:
            raise InstanceError(f"{name}: no station count admits cycle time {cycle_time}")
    return Instance(stations, cycle_time, durations, None, edges, name)


def _parse_alb_plain(rows):
    if not rows:
        raise ParseError("empty file")
    tokens: list[tuple[int, str]] = []
    for no, line in rows:
        tokens.extend((no, tok) for tok in line.split())
    no, tok = tokens[0]
    (n,) = _ints([tok], no)
    pos = 1
    durations = []
    while len(durations) < n:
        if pos >= len(tokens):
            raise ParseError(f"expected {n} durations, found {len(durations)}")
        no, tok = tokens[pos]
        if "," in tok:
            raise ParseError(f"expected {n} durations, found {len(durations)}", no)
        durations.extend(_ints([tok], no))
        pos += 1
    edges = []
    for no, tok in tokens[pos:]:
        parts = tok.split(",")
        if len(parts) != 2:
            raise ParseError(f"expected 'i,j' precedence pair, got {tok!r}", no)
        i, j = _ints(parts, no)
        if (i, j) == (-1, -1):
            return n, durations, edges
        edges.append((i - 1, j - 1))
    raise ParseError("missing '-1,-1' terminator")


def _parse_alb_tagged(rows):
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for no, line in rows:
        tag = _TAG.match(line)
        if tag:
            current = tag.group(1).lower()
            sections[current] = []
        elif current is None:
            raise ParseError("content before first section tag", no)
        else:
            sections[current].append((no, line))
    try:
        (no, line), = sections["number of tasks"]
    except (KeyError, ValueError):
        raise ParseError("missing <number of tasks> section") from None
    (n,) = _ints(line.split(), no)
    c = None
    if sections.get("cycle time"):
        no, line = sections["cycle time"][0]
        (c,) = _ints(line.split(), no)
    durations = [0] * n
    for no, line in sections.get("task times", []):
        k, t = _ints(line.split(), no)
        durations[k - 1] = t
    if 0 in durations:
        raise ParseError("<task times> does not cover every task")
    edges = []
    for no, line in sections.get("precedence relations", []):
        i, j = _ints(line.split(","), no)
        edges.append((i - 1, j - 1))
    return n, c, durations, edges


def parse_instance(
    source: _Source,
    format: str = "native",
    name: str = "instance",
    cycle_time: Optional[int] = None,
    stations: Optional[int] = None,
) -> Instance:
    """Parse an instance from text or an open stream.

    ``format`` is ``"native"`` or ``"alb"``.  SALBP files carry neither a
    station count nor powers; the station count defaults to the smallest
    feasible one for ``cycle_time`` and powers stay unset.
    """
    if format == "native":
        return _parse_native(source, name)
    if format == "alb":
        return _parse_alb(source, name, cycle_time, stations)
    raise ValueError(f"unknown instance format {format!r}")


def read_instance(path, format: Optional[str] = None, **kwargs) -> Instance:
    path = Path(path)
    if format is None:
        format = "alb" if path.suffix.lower() in (".alb", ".in2", ".IN2") else "native"
    kwargs.setdefault("name", path.stem)
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh, format, **kwargs)


def format_instance(inst: Instance) -> str:
    out = io.StringIO()
    out.write(f"# {inst.name}\n")
    out.write(f"{inst.n} {inst.m} {inst.c}\n")
    out.write(" ".join(map(str, inst.durations)) + "\n")
    if inst.powers is None:
        out.write(" ".join("?" * inst.n) + "\n")
    else:
        out.write(" ".join(map(str, inst.powers)) + "\n")
    for i, j in inst.edges:
        out.write(f"{i + 1} {j + 1}\n")
    out.write("-1 -1\n")
    return out.getvalue()
