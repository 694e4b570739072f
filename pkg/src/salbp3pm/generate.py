"""Random instances and benchmark-instance construction."""
from __future__ import annotations

import random
from pathlib import Path
from typing import Optional, Sequence

from .instance import Instance, generate_powers, read_instance

__all__ = [
    "benchmark_instance",
    "min_station_count",
    "random_dag",
    "random_instance",
    "synthetic_like",
]


def random_dag(n: int, edge_prob: float, rng: random.Random) -> list[tuple[int, int]]:
    """Edges ``i -> j`` (``i < j``) drawn independently with ``edge_prob``."""
    return [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < edge_prob]


def random_instance(
    n: int,
    m: int,
    c: int,
    edge_prob: float = 0.3,
    seed: int = 0,
    power_range: tuple[int, int] = (1, 10),
    max_duration: Optional[int] = None,
    name: Optional[str] = None,
) -> Instance:
    """Seeded random instance; durations uniform on ``[1, max_duration or c]``."""
    rng = random.Random(seed)
    hi = min(c, max_duration or c)
    durations = [rng.randint(1, hi) for _ in range(n)]
    edges = random_dag(n, edge_prob, rng)
    powers = [rng.randint(*power_range) for _ in range(n)]
    return Instance(m, c, durations, powers, edges, name or f"rand-n{n}-m{m}-c{c}-s{seed}")


def min_station_count(
    durations: Sequence[int],
    edges: Sequence[tuple[int, int]],
    cycle_time: int,
    backend: Optional[str] = None,
    max_stations: Optional[int] = None,
) -> Optional[int]:
    """Smallest station count with a feasible schedule, by SAT feasibility checks.

    Starts at the load bound ``ceil(sum t / c)`` and increases; ``None`` if
    no count up to ``max_stations`` (default ``n``) works.
    """
    from .encode_cse import encode_cse_base
    from .solvers.sessions import make_session

    if backend is None:
        backend = _default_backend()
    n = len(durations)
    if any(t > cycle_time for t in durations):
        return None
    lo = max(1, -(-sum(durations) // cycle_time))
    for m in range(lo, (max_stations or n) + 1):
        inst = Instance(m, cycle_time, durations, None, edges, "probe")
        formula, _ = encode_cse_base(inst)
        with make_session(backend, formula) as session:
            if session.solve().status == "sat":
                return m
    return None


def _default_backend() -> str:
    try:
        import pysat  # noqa: F401
    except ImportError:  # pragma: no cover - pysat is a declared dependency
        return "embedded"
    return "pysat"


def benchmark_instance(path, seed: int = 0, power_range=(1, 10), **kwargs) -> Instance:
    """SALBP data file plus seeded powers, with ``m`` set to the minimum station count."""
    inst = read_instance(path, **kwargs)
    if inst.powers is None:
        inst = generate_powers(inst, seed, *power_range)
    return inst


def synthetic_like(
    n: int,
    m: int,
    c: int,
    edge_count: int,
    seed: int = 0,
    power_range=(1, 10),
    name: Optional[str] = None,
) -> Instance:
    """Seeded instance of a given size with exactly ``edge_count`` forward edges.

    Durations are drawn so the total load fits ``m`` stations of capacity
    ``c``; feasibility is not guaranteed, only plausible.
    """
    rng = random.Random(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if edge_count > len(pairs):
        raise ValueError(f"at most {len(pairs)} edges fit {n} tasks")
    edges = sorted(rng.sample(pairs, edge_count))
    budget = m * c
    mean = max(1, budget // (n + n // 3 + 1))
    durations = [rng.randint(1, min(c, 2 * mean - 1)) for _ in range(n)]
    inst = Instance(m, c, durations, None, edges, name or f"synthetic-n{n}-m{m}-c{c}")
    return generate_powers(inst, seed, *power_range)


def load_family(directory, seed: int = 0, power_range=(1, 10)) -> list[Instance]:
    """Every ``*.alb`` / ``*.IN2`` / ``*.txt`` instance under ``directory``, sorted by name."""
    paths = sorted(
        p for p in Path(directory).iterdir() if p.suffix.lower() in (".alb", ".in2", ".txt")
    )
    return [benchmark_instance(p, seed, power_range) for p in paths]
