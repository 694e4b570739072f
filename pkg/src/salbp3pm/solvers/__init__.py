"""SAT and MaxSAT backends behind a small append-only session contract."""
from .maxsat import MaxSatOutcome, solve_maxsat, run_external_maxsat
from .sessions import BackendError, Session, SolveOutcome, make_session

__all__ = [
    "BackendError",
    "MaxSatOutcome",
    "Session",
    "SolveOutcome",
    "make_session",
    "run_external_maxsat",
    "solve_maxsat",
]
