"""State estimation from delayed, scheduled samples.

The network delivers full state samples with a deterministic delay equal
to the link index used.  At time k the controller therefore owns the
sample with the smallest *age* j such that the sample stamped k-j was put
on a link with delay <= j.  ``b_coefficients`` encodes that choice as a
one-hot vector over ages; ``estimate`` rolls the chosen sample forward
through the recorded inputs.  If nothing has arrived yet (only possible
while k < max_delay), the estimate propagates the initial-state mean —
the "prior branch", encoded as age k+1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import PlantModel
from .errors import ConfigurationError, ConsistencyError


def _arrived(window_row: np.ndarray, age: int) -> int:
    """1 if the sample stamped ``age`` steps ago reached the controller by
    now, i.e. its one-hot link row selects a delay <= age."""
    return int(round(float(window_row[: age + 1].sum())))


def b_coefficients(alloc_window: np.ndarray, k: int, max_delay: int) -> np.ndarray:
    """One-hot age selector at time k given the allocation window.

    ``alloc_window`` has shape (max_delay+1, max_delay+1): row r is the
    one-hot link selection at time k - max_delay + r, with all-zero rows
    for times before 0.  Entry j of the result is 1 iff the freshest
    available sample is j steps old; entry k+1 (only while k < max_delay)
    marks the prior branch where nothing has arrived yet.
    """
    D = max_delay
    win = np.asarray(alloc_window, dtype=float)
    if win.shape != (D + 1, D + 1):
        raise ConfigurationError(f"alloc_window must be {(D + 1, D + 1)}, got {win.shape}")
    for r in range(D + 1):
        t_row = k - D + r
        s = win[r].sum()
        if t_row < 0:
            if s != 0:
                raise ConfigurationError(f"window row for time {t_row} must be all zero")
        else:
            rounded = np.round(win[r])
            if (not np.isclose(s, 1.0) or not np.allclose(win[r], rounded)
                    or not np.all(np.isin(rounded, (0.0, 1.0)))):
                raise ConfigurationError(f"window row for time {t_row} is not one-hot")

    b = np.zeros(D + 1, dtype=int)
    blocked = 1  # product of (1 - arrived) over fresher ages
    for j in range(min(D, k) + 1):
        row = win[D - j]                # time k - j
        hit = _arrived(row, j)
        if blocked and hit:
            b[j] = 1
            return b
        blocked &= 1 - hit
    if k < D:
        b[k + 1] = 1                    # prior branch: no sample yet
        return b
    raise ConsistencyError(f"no sample available at k={k} despite full window")


def freshest_age(alloc_window: np.ndarray, k: int, max_delay: int) -> int:
    """Age selected by :func:`b_coefficients` (k+1 means prior branch)."""
    return int(np.argmax(b_coefficients(alloc_window, k, max_delay)))


def ages_from_allocation(alloc: np.ndarray, max_delay: int) -> np.ndarray:
    """Vector of freshest ages for a full allocation schedule (T, links)."""
    alloc = np.asarray(alloc, dtype=float)
    T = alloc.shape[0]
    D = max_delay
    ages = np.zeros(T, dtype=int)
    for k in range(T):
        win = np.zeros((D + 1, D + 1))
        for r in range(D + 1):
            t_row = k - D + r
            if t_row >= 0:
                win[r] = alloc[t_row]
        ages[k] = freshest_age(win, k, D)
    return ages


@dataclass(frozen=True)
class ReceivedSample:
    """A state sample as delivered by the network."""

    stamp: int          # time the state was measured
    value: np.ndarray   # x_{stamp}


@dataclass
class ControllerInfo:
    """Everything one loop's controller knows at runtime.

    Histories grow by one entry per cycle; ``buffer`` keeps only the
    freshest delivered sample because older ones can never be selected.
    """

    max_delay: int
    mean_x0: np.ndarray
    inputs: list = field(default_factory=list)        # u_0 .. u_{k-1}
    allocations: list = field(default_factory=list)   # one-hot rows, times 0..k
    buffer: ReceivedSample | None = None

    def observe_allocation(self, vartheta: np.ndarray) -> None:
        row = np.asarray(vartheta, dtype=float).reshape(-1)
        if not np.isclose(row.sum(), 1.0):
            raise ConfigurationError("allocation row must be one-hot")
        self.allocations.append(row)

    def record_input(self, u: np.ndarray) -> None:
        self.inputs.append(np.asarray(u, dtype=float).reshape(-1))


def ingest(info: ControllerInfo, sample: ReceivedSample, now: int) -> None:
    """Accept a delivered sample, checking it against the allocation history.

    The sample stamped s must arrive exactly at s + (delay of the link the
    manager granted at s); anything else is a bookkeeping bug.
    """
    s = sample.stamp
    if not 0 <= s < len(info.allocations):
        raise ConsistencyError(f"sample stamped {s} outside recorded history")
    delay = int(np.argmax(info.allocations[s]))
    if s + delay != now:
        raise ConsistencyError(
            f"sample stamped {s} on link {delay} cannot arrive at {now}")
    if info.buffer is None or s > info.buffer.stamp:
        info.buffer = ReceivedSample(stamp=s, value=np.asarray(sample.value, dtype=float))


def estimate(info: ControllerInfo, model: PlantModel, k: int) -> np.ndarray:
    """x̂_k: freshest delivered sample (or the prior mean) rolled forward
    through the recorded inputs."""
    D = info.max_delay
    if len(info.allocations) != k + 1:
        raise ConsistencyError(
            f"estimate at k={k} needs {k + 1} allocation rows, have {len(info.allocations)}")
    win = np.zeros((D + 1, D + 1))
    for r in range(D + 1):
        t_row = k - D + r
        if t_row >= 0:
            win[r] = info.allocations[t_row]
    age = freshest_age(win, k, D)

    if age == k + 1:  # prior branch: no sample has arrived yet
        base = np.asarray(info.mean_x0, dtype=float)
        steps = k
    else:
        stamp = k - age
        if info.buffer is None or info.buffer.stamp != stamp:
            have = None if info.buffer is None else info.buffer.stamp
            raise ConsistencyError(
                f"estimate at k={k} expects sample stamped {stamp}, buffer has {have}")
        base = info.buffer.value
        steps = age

    xhat = base
    for l in range(steps, 0, -1):       # apply u_{k-steps} .. u_{k-1}
        xhat = model.A @ xhat + model.B @ info.inputs[k - l]
    return xhat
