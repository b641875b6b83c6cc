"""Centralized link assignment across loops.

The network manager grants every loop one link per step, subject to
per-link capacities and — in the tolerance-aware regimes — a bounded
deviation from each loop's requested link.  Four program families live
here:

* model-aware, full horizon (offline) and receding horizon (online):
  average price plus expected staleness, tolerance and capacity rows;
* model-agnostic: the manager knows only prices, capacities, and each
  loop's tolerance pair, so it minimizes average price alone under the
  same rows (with strictly decreasing prices it drifts every grant to
  the slowest tolerated link);
* delay-insensitive: weighted price-plus-staleness with capacity rows
  only, solved once — suffixes of the solution solve the later programs.

Programs small enough for the exact solver go through
:func:`netloop.milp.solve`; anything larger takes a bounded fallback
(feasible assignment by greedy interval packing plus local search, lower
bound from capacity-free per-loop dynamic programs) and reports an honest
optimality gap — never a fake certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import milp
from .core import NetworkModel, PlantModel
from .delay_policy import (add_selection_block, check_onehot,
                           optimal_row_schedule, schedule_links)
from .errors import (AllocationInfeasibleError, ConfigurationError,
                     ConsistencyError)
from .lqg import RiccatiSolution, error_cost_table
from .estimator import ages_from_allocation

__all__ = [
    "AllocationPlan",
    "allocate_aware_impassive",
    "allocate_aware_reactive",
    "allocate_agnostic",
    "allocate_delay_insensitive",
    "allocation_objective",
    "check_allocation",
    "feasibility_bound",
    "tolerance_window",
    "requests_from_plans",
]


@dataclass(frozen=True)
class AllocationPlan:
    """A solved grant schedule over [start, T) for all loops.

    ``steps[t - start, i]`` is the one-hot grant row of loop i at step t.
    ``predicted_objective`` is the regime's own program objective;
    ``bound`` is a certified lower bound on the true optimum (equal to the
    objective when ``status == "optimal"``), and ``gap`` their relative
    difference.  ``status`` is "optimal", "time_limit", or "heuristic"
    (bounded fallback for programs above the exact-size threshold).
    """

    start: int
    steps: np.ndarray
    predicted_objective: float
    status: str
    gap: float
    bound: float
    regime: str

    @property
    def horizon(self) -> int:
        return self.start + self.steps.shape[0]

    def step(self, t: int) -> np.ndarray:
        """(N, n_links) grant rows at absolute step t."""
        if not self.start <= t < self.horizon:
            raise ConfigurationError(f"step {t} outside allocation range")
        return self.steps[t - self.start]


def requests_from_plans(plans) -> np.ndarray:
    """Stack per-loop plans (equal spans) into a (T-start, N, links) array."""
    arr = np.stack([p.steps for p in plans], axis=1)
    return arr


def tolerance_window(requested: int, alpha: int, beta: int, max_delay: int) -> range:
    """Links a grant may use for a loop requesting ``requested``."""
    return range(max(0, requested - alpha), min(requested + beta, max_delay) + 1)


def check_allocation(alloc: np.ndarray, net: NetworkModel, requests=None,
                     tolerances=None) -> None:
    """Assert one step's grants: one-hot rows, capacities, and — when the
    requests and (alpha, beta) pairs are given — the tolerance windows."""
    alloc = np.asarray(alloc)
    check_onehot(alloc, "allocation")
    load = alloc.sum(axis=0)
    for d in range(net.n_links):
        if load[d] > net.capacities[d]:
            raise ConsistencyError(
                f"link {d} carries {int(load[d])} > capacity {int(net.capacities[d])}")
    if requests is not None:
        requests = np.asarray(requests)
        for i in range(alloc.shape[0]):
            got = int(alloc[i].argmax())
            want = int(requests[i].argmax())
            a, b = tolerances[i]
            if not -int(a) <= got - want <= int(b):
                raise ConsistencyError(
                    f"loop {i} granted link {got} for request {want}, "
                    f"outside tolerance (-{int(a)}, +{int(b)})")


def feasibility_bound(d: int, tolerances, N: int, max_delay: int) -> int:
    """Sufficient per-link capacity for the tolerance-aware programs.

    Partitions the loops by which tolerance side is open (backward only,
    forward only, both) and counts, for link d, how many of them could be
    pushed onto it from elsewhere; the returned floor(N / (1 + count/N)) is
    sufficient but deliberately not necessary.
    """
    if not 0 <= d <= max_delay:
        raise ConfigurationError(f"link {d} outside [0, {max_delay}]")
    if len(tolerances) != N:
        raise ConfigurationError("need one (alpha, beta) pair per loop")
    h = 0
    for a, b in tolerances:
        a, b = int(a), int(b)
        if a < 0 or b < 0:
            raise ConfigurationError("tolerances must be nonnegative")
        if a and not b:
            h += 1 if d else 0
        elif b and not a:
            h += 1 if max_delay - d else 0
        elif a and b:
            h += (1 if d else 0) + (1 if max_delay - d else 0)
    return math.floor(N / (1.0 + h / N))


# ---------------------------------------------------------------------------
# shared program assembly
# ---------------------------------------------------------------------------


def _validate_joint(models, net, sols, T, start, history, requests,
                    need_requests: bool):
    N = len(models)
    L = net.n_links
    if sols is not None:
        if len(sols) != N:
            raise ConfigurationError("need one control solution per loop")
        for sol in sols:
            if sol.horizon != T:
                raise ConfigurationError("control solution horizon != T")
    if history is None:
        history = np.zeros((start, N, L), dtype=np.int8)
    history = np.asarray(history)
    if history.shape != (start, N, L):
        raise ConfigurationError(
            f"history must have shape ({start}, {N}, {L}), got {history.shape}")
    if need_requests:
        requests = np.asarray(requests)
        if requests.shape != (T - start, N, L):
            raise ConfigurationError(
                f"requests must have shape ({T - start}, {N}, {L}), "
                f"got {requests.shape}")
        for i in range(N):
            check_onehot(requests[:, i, :], f"requests of loop {i}")
    return history, requests


def _windows(requests, tolerances, net, start, T):
    """Per (absolute step, loop): permitted link range under tolerance."""
    win = {}
    for t in range(start, T):
        for i, (a, b) in enumerate(tolerances):
            req = int(requests[t - start, i].argmax())
            win[(t, i)] = tolerance_window(req, int(a), int(b), net.max_delay)
    return win


def _raise_infeasible(windows, net, start, T, N, regime):
    """Find and report the first capacity/tolerance conflict.

    Grant windows are link intervals, so per-step feasibility is an
    interval packing problem: it fails exactly when some link interval
    [a, b] must carry more loops than its total capacity.
    """
    caps = np.asarray(net.capacities, dtype=int)
    L = net.n_links
    for t in range(start, T):
        spans = [windows[(t, i)] for i in range(N)]
        for a in range(L):
            for bnd in range(a, L):
                inside = sum(1 for s in spans
                             if s.start >= a and s.stop - 1 <= bnd)
                room = int(caps[a:bnd + 1].sum())
                if inside > room:
                    raise AllocationInfeasibleError(
                        f"{regime}: at step {t}, {inside} loops are confined "
                        f"to links {a}..{bnd} with total capacity {room} "
                        f"(first violated link {a})", time_step=t)
    raise ConsistencyError(
        f"{regime}: grants were declared impossible although every step "
        "admits an interval packing — internal defect")


def _extract_steps(assignment, blocks, start, T, N, L):
    steps = np.zeros((T - start, N, L), dtype=np.int8)
    for i, blk in enumerate(blocks):
        for (t, l), col in blk.select.items():
            steps[t - start, i, l] = assignment[col]
    for t in range(T - start):
        check_onehot(steps[t], "allocation")
    return steps


def _seed_assignment(n_vars, blocks, steps, history, net, start, T):
    """Full variable assignment implied by a feasible grant schedule.

    Selection columns copy the grants; each freshness column takes the
    value its defining product forces (1 exactly on the realized freshest
    age), so the result satisfies every program row and can warm-start
    the exact solver."""
    seed = np.zeros(n_vars, dtype=np.int8)
    for i, blk in enumerate(blocks):
        full = np.concatenate([history[:, i, :], steps[:, i, :]], axis=0)
        ages = ages_from_allocation(full, net.max_delay)
        for (t, l), col in blk.select.items():
            seed[col] = steps[t - start, i, l]
        for (t, age), col in blk.fresh.items():
            seed[col] = 1 if ages[t] == age else 0
    return seed


def _solve_joint(models, net, sols, T, start, history, requests, weights,
                 tolerances, solver, regime):
    """Build and solve one joint grant program (aware or delay-insensitive).

    ``tolerances`` None means no request coupling (delay-insensitive);
    ``sols`` None drops the staleness terms (model-agnostic).
    """
    opts = solver or milp.SolverOptions()
    N = len(weights)
    L = net.n_links
    builder = milp.MilpBuilder()
    blocks = []
    cums = [None if sols is None else error_cost_table(models[i], sols[i],
                                                       net.max_delay)
            for i in range(N)]
    for i in range(N):
        blocks.append(add_selection_block(
            builder, f"s{i}.", net, cums[i], T, start, history[:, i, :],
            price_weight=float(weights[i]), error_weight=float(weights[i])))
    windows = None
    if tolerances is not None:
        windows = _windows(requests, tolerances, net, start, T)
        for t in range(start, T):
            for i in range(N):
                span = windows[(t, i)]
                # encode the window as a pair of weighted-delay rows
                row = {blocks[i].select[(t, l)]: float(l) for l in range(1, L)}
                builder.add_le(dict(row), float(span.stop - 1))
                builder.add_le({c: -v for c, v in row.items()},
                               -float(span.start))
    else:
        windows = {(t, i): range(L) for t in range(start, T) for i in range(N)}
    for t in range(start, T):
        for d in range(L):
            builder.add_le({blocks[i].select[(t, d)]: 1.0 for i in range(N)},
                           float(net.capacities[d]))
    prob = builder.build()

    if max(milp.component_sizes(prob), default=0) > opts.exact_threshold:
        return _fallback_allocate(models, net, sols, T, start, history,
                                  windows, weights, regime)

    # a feasible, locally improved schedule seeds the exact search with an
    # incumbent; packing failure proves the program itself is infeasible
    seed_steps = _greedy_pack(windows, net, start, T, N, regime)
    _local_search(seed_steps, windows, net, cums, history, weights, start, T)
    seed = _seed_assignment(prob.n_vars, blocks, seed_steps, history, net,
                            start, T)

    res = milp.solve(prob, time_limit=opts.time_limit,
                     collect_node_log=opts.node_log, seed_x=seed)
    if res.status == "infeasible":
        _raise_infeasible(windows, net, start, T, N, regime)
    if res.assignment is None:  # timed out before any incumbent
        return _fallback_allocate(models, net, sols, T, start, history,
                                  windows, weights, regime,
                                  bound=float(res.bound))
    steps = _extract_steps(res.assignment, blocks, start, T, N, L)
    return AllocationPlan(start=start, steps=steps,
                          predicted_objective=float(res.objective),
                          status=res.status, gap=float(res.gap),
                          bound=float(res.bound), regime=regime)


# ---------------------------------------------------------------------------
# the four regimes
# ---------------------------------------------------------------------------


def allocate_aware_impassive(requests, models, net, sols,
                             solver: milp.SolverOptions | None = None
                             ) -> AllocationPlan:
    """Offline grants for the whole horizon against the offline requests.

    Minimizes average price plus expected staleness over all loops, with
    every grant held within its loop's tolerance window and per-link
    capacities respected at every step.
    """
    requests = np.asarray(requests)
    T = requests.shape[0]
    history, requests = _validate_joint(models, net, sols, T, 0, None,
                                        requests, True)
    weights = np.full(len(models), 1.0 / len(models))
    tolerances = [(m.alpha, m.beta) for m in models]
    return _solve_joint(models, net, sols, T, 0, history, requests, weights,
                        tolerances, solver, "aware-impassive")


def allocate_aware_reactive(k: int, requests, history, models, net, sols,
                            solver: milp.SolverOptions | None = None
                            ) -> AllocationPlan:
    """Receding-horizon grants from step k onward.

    ``requests`` carries the loops' currently submitted plans over
    [k, T); ``history`` the grants actually issued before k, which
    parameterize the staleness terms near the boundary.  Callers apply
    only ``steps[0]`` and re-solve at k+1.
    """
    requests = np.asarray(requests)
    T = k + requests.shape[0]
    if not 0 <= k < T:
        raise ConfigurationError(f"k={k} outside [0, {T})")
    history, requests = _validate_joint(models, net, sols, T, k, history,
                                        requests, True)
    weights = np.full(len(models), 1.0 / len(models))
    tolerances = [(m.alpha, m.beta) for m in models]
    return _solve_joint(models, net, sols, T, k, history, requests, weights,
                        tolerances, solver, "aware-reactive")


def allocate_agnostic(mode: str, k: int, requests, history, net, tolerances,
                      solver: milp.SolverOptions | None = None
                      ) -> AllocationPlan:
    """Grants by a manager that knows nothing about the plant models.

    Only prices, capacities, and the tolerance pairs are available, so the
    program minimizes average price under the same tolerance and capacity
    rows; with strictly decreasing prices every grant drifts to the
    slowest tolerated link the capacities admit.  The program separates
    per step — past grants never enter, so ``history`` only fixes the
    span.  ``mode`` is "impassive" (k must be 0, plans for the whole
    horizon) or "reactive" (plans [k, T), apply the first step).
    """
    if mode not in ("impassive", "reactive"):
        raise ConfigurationError(f"unknown mode {mode!r}")
    if mode == "impassive" and k != 0:
        raise ConfigurationError("impassive grants are computed at k=0")
    requests = np.asarray(requests)
    T = k + requests.shape[0]
    if not 0 <= k < T:
        raise ConfigurationError(f"k={k} outside [0, {T})")
    N = requests.shape[1]
    if len(tolerances) != N:
        raise ConfigurationError("need one (alpha, beta) pair per loop")
    models = [None] * N
    history, requests = _validate_joint(models, net, None, T, k, history,
                                        requests, True)
    weights = np.full(N, 1.0 / N)
    return _solve_joint(models, net, None, T, k, history, requests, weights,
                        list(tolerances), solver, f"agnostic-{mode}")


def allocate_delay_insensitive(weights, models, net, sols,
                               solver: milp.SolverOptions | None = None,
                               T: int | None = None, *, start: int = 0,
                               history=None) -> AllocationPlan:
    """Weighted grants ignoring requests and tolerances entirely.

    One solve covers the whole horizon: minimizing the w-weighted price
    plus staleness under capacity rows alone.  Later suffixes of the
    solution solve the later programs (no request coupling), which is why
    no per-step re-solve exists; ``start``/``history`` re-solve a suffix
    explicitly so that property can be checked.
    """
    if T is None:
        raise ConfigurationError("T is required")
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if weights.shape != (len(models),):
        raise ConfigurationError("need one weight per loop")
    if (weights <= 0).any() or abs(weights.sum() - 1.0) > 1e-9:
        raise ConfigurationError("weights must be positive and sum to 1")
    history, _ = _validate_joint(models, net, sols, T, start, history, None,
                                 False)
    return _solve_joint(models, net, sols, T, start, history, None, weights,
                        None, solver, "delay-insensitive")


def allocation_objective(models, net, sols, steps, history=None,
                         weights=None) -> float:
    """Weighted price + staleness of any grant schedule, replayed directly.

    Evaluates the model-aware objective for grants produced by *any*
    regime (the cross-regime comparisons need exactly this).  ``steps``
    covers [start, T) with ``history`` the grants before ``start``; ages
    come from the arrival replay, independent of every program encoding.
    """
    steps = np.asarray(steps)
    N = len(models)
    start = 0 if history is None else np.asarray(history).shape[0]
    T = start + steps.shape[0]
    history, _ = _validate_joint(models, net, sols, T, start, history, None,
                                 False)
    if weights is None:
        weights = np.full(N, 1.0 / N)
    total = 0.0
    for i in range(N):
        full = np.concatenate([history[:, i, :], steps[:, i, :]], axis=0)
        links = schedule_links(full)
        ages = ages_from_allocation(full, net.max_delay)
        cum = error_cost_table(models[i], sols[i], net.max_delay)
        sub = sum(float(net.prices[links[t]]) + float(cum[t][ages[t]])
                  for t in range(start, T))
        total += float(weights[i]) * sub
    return total


# ---------------------------------------------------------------------------
# bounded fallback for programs above the exact-size threshold
# ---------------------------------------------------------------------------


def _greedy_pack(windows, net, start, T, N, regime):
    """Feasible grants by earliest-deadline interval packing, per step.

    Loops are ordered by window end; each takes the fastest link in its
    window with spare capacity.  For interval windows this finds a packing
    whenever one exists, so a failure here is a genuine infeasibility.
    """
    L = net.n_links
    steps = np.zeros((T - start, N, L), dtype=np.int8)
    for t in range(start, T):
        spare = np.asarray(net.capacities, dtype=int).copy()
        order = sorted(range(N), key=lambda i: (windows[(t, i)].stop,
                                                windows[(t, i)].start, i))
        for i in order:
            span = windows[(t, i)]
            slot = next((d for d in span if spare[d] > 0), None)
            if slot is None:
                _raise_infeasible(windows, net, start, T, N, regime)
            spare[slot] -= 1
            steps[t - start, i, slot] = 1
    return steps


def _one_row_cost(i, net, cum_i, steps, history, weight) -> float:
    """Weighted objective contribution of loop i's grant schedule."""
    start = history.shape[0]
    T = start + steps.shape[0]
    full = np.concatenate([history[:, i, :], steps[:, i, :]], axis=0)
    links = schedule_links(full)
    if cum_i is None:
        sub = sum(float(net.prices[links[t]]) for t in range(start, T))
    else:
        ages = ages_from_allocation(full, net.max_delay)
        sub = sum(float(net.prices[links[t]]) + float(cum_i[t][ages[t]])
                  for t in range(start, T))
    return float(weight) * sub


def _local_search(steps, windows, net, cums, history, weights, start, T):
    """Improve a feasible grant schedule in place: steepest single-step
    moves and same-step swaps until a fixed point (or the pass cap).
    Returns the per-loop weighted costs of the final schedule."""
    N = steps.shape[1]

    def recost(i):
        return _one_row_cost(i, net, cums[i], steps, history, weights[i])

    row_cost = np.array([recost(i) for i in range(N)])
    improved = True
    passes = 0
    while improved and passes < 60:
        improved = False
        passes += 1
        for t in range(start, T):
            load = steps[t - start].sum(axis=0)
            for i in range(N):
                here = int(steps[t - start, i].argmax())
                for d in windows[(t, i)]:
                    if d == here:
                        continue
                    if load[d] < net.capacities[d]:
                        steps[t - start, i, here] = 0
                        steps[t - start, i, d] = 1
                        trial = recost(i)
                        if trial < row_cost[i] - 1e-12:
                            row_cost[i] = trial
                            load[here] -= 1
                            load[d] += 1
                            here = d
                            improved = True
                        else:
                            steps[t - start, i, d] = 0
                            steps[t - start, i, here] = 1
                    else:
                        # link full: try swapping with one of its holders
                        holders = [j for j in range(N) if j != i
                                   and steps[t - start, j, d]
                                   and here in windows[(t, j)]]
                        for j in holders:
                            steps[t - start, i, here] = 0
                            steps[t - start, i, d] = 1
                            steps[t - start, j, d] = 0
                            steps[t - start, j, here] = 1
                            ti, tj = recost(i), recost(j)
                            if ti + tj < row_cost[i] + row_cost[j] - 1e-12:
                                row_cost[i], row_cost[j] = ti, tj
                                here = d
                                improved = True
                                break
                            steps[t - start, j, here] = 0
                            steps[t - start, j, d] = 1
                            steps[t - start, i, d] = 0
                            steps[t - start, i, here] = 1
    return row_cost


def _fallback_allocate(models, net, sols, T, start, history, windows,
                       weights, regime, bound=None) -> AllocationPlan:
    """Feasible grants plus an honest lower bound for oversized programs.

    Incumbent: greedy interval packing, then steepest single-step moves
    and same-step swaps until no improvement.  Bound: per-loop optima with
    capacities dropped but windows kept (a relaxation, so always valid).
    Never claims optimality.
    """
    N = len(models)
    steps = _greedy_pack(windows, net, start, T, N, regime)
    cums = [None if sols is None else error_cost_table(models[i], sols[i],
                                                       net.max_delay)
            for i in range(N)]
    row_cost = _local_search(steps, windows, net, cums, history, weights,
                             start, T)

    objective = float(row_cost.sum())
    relaxed = 0.0
    for i in range(N):
        hist_links = [int(r.argmax()) for r in history[:, i, :]]
        if cums[i] is None:
            lo = sum(min(float(net.prices[d]) for d in windows[(t, i)])
                     for t in range(start, T))
        else:
            allowed = [None] * T
            for t in range(start, T):
                allowed[t] = list(windows[(t, i)])
            lo, _ = optimal_row_schedule(net, cums[i], T, allowed=allowed,
                                         history=tuple(hist_links))
        relaxed += float(weights[i]) * lo
    bound = relaxed if bound is None else max(float(bound), relaxed)
    gap = max(0.0, (objective - bound) / max(1.0, abs(objective)))
    return AllocationPlan(start=start, steps=steps,
                          predicted_objective=objective, status="heuristic",
                          gap=gap, bound=float(bound), regime=regime)
