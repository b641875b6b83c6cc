"""Exception types shared across the package."""


class NetloopError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(NetloopError):
    """Invalid model, network, or experiment configuration."""


class AllocationInfeasibleError(NetloopError):
    """No allocation satisfies the tolerance windows under the link capacities.

    Carries the first time step at which feasibility failed (if known) so the
    CLI can report where the episode aborted.
    """

    def __init__(self, message: str, time_step: int | None = None):
        super().__init__(message)
        self.time_step = time_step


class ConsistencyError(NetloopError):
    """Internal bookkeeping disagreement (e.g. estimator buffer vs. allocation
    history).  Always indicates a bug or corrupted inputs, never bad luck."""


class SolverError(NetloopError):
    """The LP/MILP machinery failed in a way that is not plain infeasibility
    (iteration cap, numerical breakdown)."""
