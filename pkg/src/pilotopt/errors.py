"""Exception hierarchy shared by the solvers, loaders and CLI."""

from __future__ import annotations


class PilotOptError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(PilotOptError, ValueError):
    """Invalid scenario, configuration value or argument domain."""


class ContractError(PilotOptError, ValueError):
    """Caller broke an operation's input contract (e.g. length mismatch)."""


class InfeasibleError(PilotOptError):
    """The requested operating point cannot be reached with an interior allocation."""


class ApproximationDomainError(PilotOptError):
    """A closed-form approximation was used outside the regime where it is valid."""


class SolverError(PilotOptError):
    """A numerical procedure failed to bracket or converge.

    ``samples`` holds ``(x, f(x))`` pairs evaluated while diagnosing the
    failure, ``best`` the best iterate seen (``None`` if none was produced).
    """

    def __init__(self, message: str, samples=(), best: float | None = None):
        super().__init__(message)
        self.samples = tuple(samples)
        self.best = best
