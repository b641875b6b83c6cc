"""Per-loop transmission-link selection.

Two planners share one program builder.  The offline planner fixes the
whole schedule before the run and never looks back; the receding-horizon
planner re-solves at every step with the links actually granted so far
folded in as constants, applying only the first step of each solve.

Both emit pure binary programs: one-hot selection variables x[t,l] (step t
sends on link l) plus auxiliary freshness selectors f[t,age] marking which
past sample the controller will be working from at step t.  A freshness
selector is a product of selection complements — "the sample sent `age`
steps back used a link no slower than `age`, and every fresher sample
missed" — linearized exactly by :mod:`netloop.milp`.  Future grants are
unknowable at planning time, so the builder substitutes the plan's own
selections for them (the plan assumes it will get what it asks for); with
an empty history that makes the receding-horizon program coincide with the
offline one, term for term.

``optimal_row_schedule`` solves the same single-loop problem by forward
dynamic programming over link windows — an independent exact route used to
bound and cross-check the programs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import milp
from .core import NetworkModel, PlantModel
from .errors import ConfigurationError, SolverError
from .estimator import ages_from_allocation
from .lqg import RiccatiSolution, error_cost_table

__all__ = [
    "DelayPlan",
    "SelectionBlock",
    "add_selection_block",
    "impassive_plan",
    "reactive_plan",
    "plan_objective",
    "optimal_row_schedule",
    "onehot_schedule",
    "schedule_links",
]

_SCHED_DTYPE = np.int8


def onehot_schedule(links, n_links: int) -> np.ndarray:
    """(T,) link indices -> (T, n_links) one-hot rows."""
    links = np.asarray(links, dtype=int).reshape(-1)
    if links.size and (links.min() < 0 or links.max() >= n_links):
        raise ConfigurationError("link index outside the network's range")
    out = np.zeros((links.size, n_links), dtype=_SCHED_DTYPE)
    out[np.arange(links.size), links] = 1
    return out


def schedule_links(onehot: np.ndarray) -> np.ndarray:
    """(T, n_links) one-hot rows -> (T,) link indices."""
    onehot = np.asarray(onehot)
    check_onehot(onehot, "schedule")
    return onehot.argmax(axis=1).astype(int)


def check_onehot(rows: np.ndarray, what: str) -> None:
    if rows.ndim != 2:
        raise ConfigurationError(f"{what} must be a 2-D array of one-hot rows")
    if rows.size and (~np.isin(rows, (0, 1)) | np.isnan(rows.astype(float))).any():
        raise ConfigurationError(f"{what} entries must be 0/1")
    if not (rows.sum(axis=1) == 1).all():
        raise ConfigurationError(f"{what} rows must each select exactly one link")


@dataclass(frozen=True)
class DelayPlan:
    """A solved link schedule for one loop over [start, T).

    ``predicted_objective`` is the program's optimum: communication prices
    plus expected staleness penalties over the planned steps (the
    schedule-independent part of the loop's cost is not included).
    """

    start: int
    steps: np.ndarray            # (T - start, n_links) one-hot rows
    predicted_objective: float
    mode: str                    # "impassive" | "reactive"
    status: str                  # solver status, "optimal" unless time-limited
    gap: float

    @property
    def horizon(self) -> int:
        return self.start + self.steps.shape[0]

    def link(self, t: int) -> int:
        """Chosen link at absolute step t."""
        if not self.start <= t < self.horizon:
            raise ConfigurationError(f"step {t} outside plan range")
        return int(self.steps[t - self.start].argmax())


@dataclass(frozen=True)
class SelectionBlock:
    """Variable columns of one loop's selection sub-program."""

    start: int
    horizon: int
    select: dict          # (t, link) -> column
    fresh: dict           # (t, age) -> column; ages ruled out by history absent


def _fresh_factors(select: dict, history: np.ndarray, start: int,
                   max_delay: int, t: int, age: int):
    """Product factors of the age-``age`` freshness selector at step t.

    The selector fires iff the sample sent ``age`` steps back took a link no
    slower than ``age`` (encoded as complements of the slower links, valid
    because the row is one-hot) and every fresher sample missed.  Steps
    before ``start`` read the realized history: a realized 1 among the
    complemented entries kills the whole product, which is reported as
    ``None`` so the caller can omit the selector entirely.
    """
    factors: list[milp.Factor] = []

    def complements(sent: int, links) -> bool:
        for l in links:
            if sent < start:
                if history[sent, l]:
                    return False
            else:
                factors.append((select[(sent, l)], True))
        return True

    if age <= t:  # a real sample; age == t+1 is the prior branch, always "sent"
        if not complements(t - age, range(age + 1, max_delay + 1)):
            return None
    for fresher in range(age):
        if not complements(t - fresher, range(fresher + 1)):
            return None
    return factors


def add_selection_block(builder: milp.MilpBuilder, prefix: str,
                        net: NetworkModel, cum, T: int, start: int = 0,
                        history: np.ndarray | None = None, *,
                        price_weight: float = 1.0,
                        error_weight: float = 1.0) -> SelectionBlock:
    """Add one loop's link-selection variables and freshness logic.

    Per step t in [start, T): a one-hot row over the selection variables,
    freshness selectors for every reachable age with their product rows, an
    aggregated arrival row per selector (it cannot fire unless the sample it
    names was sent on a link no slower than its age), a unit-sum row over
    the selectors (age 0 is the step's own zero-latency link, so its
    selector is the selection variable itself), and price/staleness
    objective terms scaled by the given weights.

    ``history`` holds the realized one-hot assignments for steps before
    ``start``; selectors forced to zero by it are omitted, which also pins
    the out-of-range ages at early steps.  ``cum`` is the cumulative
    staleness table from :func:`netloop.lqg.error_cost_table`; pass ``None``
    to skip the freshness machinery entirely (price-only programs).
    """
    n_links = net.n_links
    D = net.max_delay
    if not 0 <= start <= T:
        raise ConfigurationError("start must lie in [0, T]")
    if history is None:
        history = np.zeros((0, n_links), dtype=_SCHED_DTYPE)
    history = np.asarray(history)
    if history.shape != (start, n_links):
        raise ConfigurationError(
            f"history must have shape ({start}, {n_links}), got {history.shape}")
    if start:
        check_onehot(history, "history")

    select: dict = {}
    for t in range(start, T):
        for l in range(n_links):
            select[(t, l)] = builder.add_binary(f"{prefix}x[{t},{l}]")
    for t in range(start, T):
        builder.add_eq({select[(t, l)]: 1.0 for l in range(n_links)}, 1.0)
        if price_weight:
            builder.add_objective(
                {select[(t, l)]: price_weight * float(net.prices[l])
                 for l in range(n_links)})

    fresh: dict = {}
    if cum is not None:
        for t in range(start, T):
            tau = min(D, t + 1)
            unit = {select[(t, 0)]: 1.0}
            for age in range(1, tau + 1):
                factors = _fresh_factors(select, history, start, D, t, age)
                if factors is None:
                    continue
                z = builder.add_product(f"{prefix}f[{t},{age}]", factors)
                fresh[(t, age)] = z
                unit[z] = 1.0
                if error_weight and cum[t][age]:
                    builder.add_objective({z: error_weight * float(cum[t][age])})
                sent = t - age
                if age <= t and sent >= start:
                    # arrival row: selector needs its sample on a link <= age
                    row = {select[(sent, l)]: -1.0 for l in range(age + 1)}
                    row[z] = 1.0
                    builder.add_le(row, 0.0)
            builder.add_eq(unit, 1.0)
    return SelectionBlock(start=start, horizon=T, select=select, fresh=fresh)


def _solve_selection(model: PlantModel, net: NetworkModel,
                     sol: RiccatiSolution, T: int, start: int,
                     history: np.ndarray, mode: str,
                     solver: milp.SolverOptions | None) -> DelayPlan:
    if sol.horizon != T:
        raise ConfigurationError(
            f"control solution horizon {sol.horizon} != T={T}")
    if model.n != sol.P[0].shape[0]:
        raise ConfigurationError("model/solution dimension mismatch")
    opts = solver or milp.SolverOptions()
    cum = error_cost_table(model, sol, net.max_delay)
    builder = milp.MilpBuilder()
    block = add_selection_block(builder, "", net, cum, T, start, history)
    prob = builder.build()
    res = milp.solve(prob, time_limit=opts.time_limit,
                     collect_node_log=opts.node_log)
    if res.status == "infeasible" or res.assignment is None:
        # requesting the slowest link at every step is always feasible, so
        # this can only be a solver defect or a hopeless time limit
        raise SolverError(
            f"selection program reported {res.status}; "
            "a feasible point (all slowest links) exists by construction")
    steps = np.zeros((T - start, net.n_links), dtype=_SCHED_DTYPE)
    for (t, l), col in block.select.items():
        steps[t - start, l] = res.assignment[col]
    check_onehot(steps, "plan")
    return DelayPlan(start=start, steps=steps,
                     predicted_objective=float(res.objective), mode=mode,
                     status=res.status, gap=float(res.gap))


def impassive_plan(model: PlantModel, net: NetworkModel,
                   sol: RiccatiSolution, T: int,
                   solver: milp.SolverOptions | None = None) -> DelayPlan:
    """Offline schedule for one loop: solved once, never revised.

    Noise- and grant-independent by construction — the program only sees
    the model constants, prices, and the staleness table.
    """
    empty = np.zeros((0, net.n_links), dtype=_SCHED_DTYPE)
    return _solve_selection(model, net, sol, T, 0, empty, "impassive", solver)


def reactive_plan(k: int, alloc_history, model: PlantModel,
                  net: NetworkModel, sol: RiccatiSolution, T: int,
                  solver: milp.SolverOptions | None = None) -> DelayPlan:
    """Receding-horizon schedule for one loop from step k onward.

    ``alloc_history`` holds the links actually granted at steps 0..k-1 as
    one-hot rows; they parameterize the freshness selectors near the
    boundary.  Callers apply only the first planned step, then re-solve at
    k+1 with the grant appended.
    """
    if not 0 <= k < T:
        raise ConfigurationError(f"k={k} outside [0, {T})")
    history = np.asarray(alloc_history, dtype=_SCHED_DTYPE)
    if history.size == 0:
        history = history.reshape(0, net.n_links)
    return _solve_selection(model, net, sol, T, k, history, "reactive", solver)


def plan_objective(model: PlantModel, net: NetworkModel,
                   sol: RiccatiSolution, links, start: int = 0) -> float:
    """Price + staleness objective of a complete link schedule.

    ``links`` covers every step 0..T-1 (entries before ``start`` only set
    the sample ages; their prices are sunk and not counted).  Ages come
    from the arrival replay rather than from any program encoding, which
    makes this the independent consistency check for predicted objectives.
    """
    links = np.asarray(links, dtype=int).reshape(-1)
    T = sol.horizon
    if links.shape != (T,):
        raise ConfigurationError(f"schedule must have length {T}")
    if not 0 <= start <= T:
        raise ConfigurationError("start must lie in [0, T]")
    alloc = onehot_schedule(links, net.n_links)
    ages = ages_from_allocation(alloc, net.max_delay)
    cum = error_cost_table(model, sol, net.max_delay)
    total = 0.0
    for t in range(start, T):
        total += float(net.prices[links[t]]) + float(cum[t][ages[t]])
    return total


def _window_age(window: tuple, t: int, max_delay: int) -> int:
    """Freshest sample age at step t; window[-1] is the link chosen at t."""
    tau = min(max_delay, t + 1)
    for age in range(tau + 1):
        if age <= t and window[-1 - age] <= age:
            return age
    return tau  # prior branch (only reachable while t < max_delay)


def optimal_row_schedule(net: NetworkModel, cum, T: int, *, allowed=None,
                         history=()) -> tuple[float, np.ndarray]:
    """Exact single-loop schedule optimum by forward dynamic programming.

    The state is the window of the last ``max_delay`` chosen links — enough
    to replay sample ages — and transitions try every permitted link.  Used
    as the capacity-free per-loop bound and as an independent check on the
    programs built above.

    ``allowed``, when given, is indexed by absolute step and lists the links
    permitted there (``None`` entries mean unrestricted).  ``history`` seeds
    the window with realized link indices and moves the first planned step
    to ``len(history)``.  Returns (objective over the planned steps, planned
    link indices).
    """
    D = net.max_delay
    start = len(history)
    if start > T:
        raise ConfigurationError("history longer than the horizon")
    if any(not 0 <= int(d) <= D for d in history):
        raise ConfigurationError("history link outside the network's range")

    def choices(t: int):
        if allowed is None or allowed[t] is None:
            return range(D + 1)
        picks = sorted(set(int(l) for l in allowed[t]))
        if not picks or picks[0] < 0 or picks[-1] > D:
            raise ConfigurationError(f"bad allowed-link set at step {t}")
        return picks

    init = tuple(int(d) for d in history[max(0, start - D):])
    states: dict = {init: 0.0}
    layers: list[dict] = []
    for t in range(start, T):
        nxt: dict = {}
        for win, cost in states.items():
            for d in choices(t):
                grown = win + (d,)
                step = float(net.prices[d]) + float(cum[t][_window_age(grown, t, D)])
                key = grown[-D:] if D else ()
                total = cost + step
                if key not in nxt or total < nxt[key][0]:
                    nxt[key] = (total, win, d)
        layers.append(nxt)
        states = {key: rec[0] for key, rec in nxt.items()}
    if not layers:
        return 0.0, np.zeros(0, dtype=int)

    best_key = min(states, key=lambda key: (states[key], key))
    best_cost = states[best_key]
    picks = []
    key = best_key
    for layer in reversed(layers):
        _, prev, d = layer[key]
        picks.append(d)
        key = prev
    picks.reverse()
    return best_cost, np.asarray(picks, dtype=int)
