"""Monte Carlo harness: schedules per regime, episode replay, cost metrics.

The split that makes large replication counts cheap: every scheduling
decision (requests θ and grants ϑ) is noise-independent, because the loops
plan from their models and the realized grant history only — never from
realized states.  So each regime's schedule is computed once
(:func:`plan_schedules`), and the Monte Carlo phase merely replays plant
dynamics under that fixed schedule.  Two replay engines exist:

* :func:`run_episode` — the reference single-replication simulator that
  walks the per-cycle event order (state update, request lookup, grant,
  delivery queue, estimate, input) using the runtime estimator objects;
* :func:`simulate_batch` — a vectorized engine that advances all
  replications of one loop simultaneously.

Both consume the same noise streams, so they agree replication by
replication.  The social cost pairs each constrained run against a shadow
run of the same replication in which every loop is granted exactly what it
requests.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import NetworkModel, PlantModel, RngStreams, psd_sqrt, step_plant
from .delay_policy import impassive_plan, reactive_plan
from .errors import ConfigurationError, ConsistencyError
from .estimator import ControllerInfo, ReceivedSample, ages_from_allocation, estimate, ingest
from .lqg import RiccatiSolution, control_input, riccati_backward
from .milp import SolverOptions
from .resource_manager import (
    allocate_agnostic,
    allocate_aware_impassive,
    allocate_aware_reactive,
    allocate_delay_insensitive,
    check_allocation,
    requests_from_plans,
)

__all__ = [
    "GapRecord",
    "ScheduleOutcome",
    "EpisodeTrace",
    "BatchCosts",
    "Metrics",
    "plan_schedules",
    "episode_noise",
    "run_cycle",
    "run_episode",
    "simulate_batch",
    "local_cost",
    "social_cost",
    "link_utilization",
    "average_deviation",
    "run_experiment",
    "write_outputs",
]


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class GapRecord:
    """Outcome of one resource-manager solve."""

    step: int
    status: str     # "optimal" | "time_limit" | "heuristic"
    gap: float


@dataclass(frozen=True)
class ScheduleOutcome:
    """The noise-independent part of a regime: who asks for and gets what."""

    regime: str
    requests: np.ndarray            # (T, N, links) one-hot θ
    grants: np.ndarray              # (T, N, links) one-hot ϑ
    predicted_objective: float      # manager's forecast at the first solve
    gap_records: tuple              # one GapRecord per manager solve

    @property
    def horizon(self) -> int:
        return self.requests.shape[0]

    @property
    def n_loops(self) -> int:
        return self.requests.shape[1]


def _impassive_plans(models, net, sols, T, solver):
    """Per-loop offline plans, shared across identical plants."""
    cache: dict = {}
    plans = []
    for model, sol in zip(models, sols):
        key = model.signature()
        if key not in cache:
            cache[key] = impassive_plan(model, net, sol, T, solver)
        plans.append(cache[key])
    return plans


def _reactive_requests(k, grants, models, net, sols, T, solver, cache):
    """Each loop replans from its realized grant history; submit step-k-on.

    Only the last max_delay grant rows can influence a plan (older samples
    can never be the freshest), so identical plants with identical recent
    histories share one solve.
    """
    D = net.max_delay
    plans = []
    for i, (model, sol) in enumerate(zip(models, sols)):
        key = (model.signature(), k, grants[max(0, k - D):k, i].tobytes())
        if key not in cache:
            cache[key] = reactive_plan(k, grants[:k, i], model, net, sol, T, solver)
        plans.append(cache[key])
    return plans


def plan_schedules(regime, models, net, sols, T, *, weights=None,
                   solver: SolverOptions | None = None,
                   imp_plans=None) -> ScheduleOutcome:
    """Compute one regime's full request/grant schedule.

    ``imp_plans`` lets callers that already solved the per-loop offline
    plans (they are regime-independent) pass them in.
    """
    N = len(models)
    links = net.max_delay + 1
    tolerances = [(m.alpha, m.beta) for m in models]

    def offline_plans():
        return imp_plans if imp_plans is not None else _impassive_plans(
            models, net, sols, T, solver)

    if regime == "AwareImpassive":
        requests = requests_from_plans(offline_plans())
        alloc = allocate_aware_impassive(requests, models, net, sols, solver)
        grants = alloc.steps
        records = (GapRecord(0, alloc.status, alloc.gap),)
        predicted = alloc.predicted_objective

    elif regime == "AgnosticImpassive":
        requests = requests_from_plans(offline_plans())
        history = np.zeros((0, N, links))
        alloc = allocate_agnostic("impassive", 0, requests, history, net,
                                  tolerances, solver)
        grants = alloc.steps
        records = (GapRecord(0, alloc.status, alloc.gap),)
        predicted = alloc.predicted_objective

    elif regime in ("AwareReactive", "AgnosticReactive"):
        requests = np.zeros((T, N, links), dtype=np.int8)
        grants = np.zeros((T, N, links), dtype=np.int8)
        records = []
        predicted = 0.0
        plan_cache: dict = {}
        for k in range(T):
            plans_k = _reactive_requests(k, grants, models, net, sols, T,
                                         solver, plan_cache)
            stacked = requests_from_plans(plans_k)          # (T-k, N, links)
            requests[k] = stacked[0]
            if regime == "AwareReactive":
                alloc = allocate_aware_reactive(k, stacked, grants[:k],
                                                models, net, sols, solver)
            else:
                alloc = allocate_agnostic("reactive", k, stacked, grants[:k],
                                          net, tolerances, solver)
            grants[k] = alloc.steps[0]
            records.append(GapRecord(k, alloc.status, alloc.gap))
            if k == 0:
                predicted = alloc.predicted_objective
        records = tuple(records)

    elif regime == "DelayInsensitive":
        # grants ignore the loops entirely; requests are still recorded
        # (what each loop would have asked for) so the deviation metric
        # has its reference point
        requests = requests_from_plans(offline_plans())
        if weights is None:
            weights = [1.0 / N] * N
        alloc = allocate_delay_insensitive(weights, models, net, sols,
                                           solver, T)
        grants = alloc.steps
        records = (GapRecord(0, alloc.status, alloc.gap),)
        predicted = alloc.predicted_objective

    else:
        raise ConfigurationError(f"unknown regime {regime!r}")

    windows = None if regime == "DelayInsensitive" else tolerances
    for k in range(T):
        check_allocation(grants[k], net,
                         requests=None if windows is None else requests[k],
                         tolerances=windows)
    return ScheduleOutcome(regime=regime,
                           requests=np.asarray(requests, dtype=np.int8),
                           grants=np.asarray(grants, dtype=np.int8),
                           predicted_objective=float(predicted),
                           gap_records=records)


# ---------------------------------------------------------------------------
# noise


def episode_noise(streams: RngStreams, replication: int, model: PlantModel,
                  T: int):
    """Draw (x0, w_0..w_{T-1}) for one loop and replication.

    The draw order is fixed (initial state first, then the process noise
    in time order) so that every consumer of the same stream sees
    identical noise — the common-random-numbers pairing relies on it.
    """
    gen = streams.stream(replication, model.index)
    n = model.n
    x0 = model.mean_x0 + psd_sqrt(model.sigma_x0) @ gen.standard_normal(n)
    W = gen.standard_normal((T, n)) @ psd_sqrt(model.sigma_w).T
    return x0, W


# ---------------------------------------------------------------------------
# reference engine: explicit event order, one replication


class _LoopRuntime:
    """Mutable per-loop state while an episode is being replayed."""

    def __init__(self, model, sol, x0, noise, max_delay):
        self.model = model
        self.sol = sol
        self.x = np.asarray(x0, dtype=float)
        self.noise = noise                      # (T, n)
        self.info = ControllerInfo(max_delay=max_delay, mean_x0=model.mean_x0)
        self.pending: dict = {}                 # due step -> [ReceivedSample]
        self.states = []
        self.estimates = []
        self.inputs = []
        self.stage = []


def _quad(M: np.ndarray, x: np.ndarray):
    """xᵀ M x on the last axis (same reduction for vectors and stacks)."""
    x = np.asarray(x, dtype=float)
    return ((x @ M) * x).sum(axis=-1)


def run_cycle(k: int, loops, schedule: ScheduleOutcome, net: NetworkModel) -> None:
    """Advance every loop through sample time k.

    Event order within the cycle: the new state becomes available; the
    requested link θ_k is looked up (offline plan or memoized reactive
    solve); the manager's grant ϑ_k is looked up and checked; the fresh
    sample enters the network to be delivered at k + delay; deliveries due
    now reach the controllers, which estimate and apply u_k = -L_k x̂_k.
    The grant is acknowledged to the controller in the same cycle.
    """
    T = schedule.horizon
    for lp in loops:
        if k > 0:
            lp.x = step_plant(lp.model, lp.x, lp.inputs[-1], lp.noise[k - 1])
        lp.states.append(lp.x)

    check_allocation(schedule.grants[k], net)
    for i, lp in enumerate(loops):
        delay = int(np.argmax(schedule.grants[k, i]))
        due = k + delay
        if due <= T - 1:
            lp.pending.setdefault(due, []).append(
                ReceivedSample(stamp=k, value=np.array(lp.x)))

    for i, lp in enumerate(loops):
        lp.info.observe_allocation(schedule.grants[k, i])
        for sample in lp.pending.pop(k, ()):
            ingest(lp.info, sample, now=k)
        xhat = estimate(lp.info, lp.model, k)
        u = control_input(lp.sol, k, xhat)
        lp.info.record_input(u)
        lp.estimates.append(xhat)
        lp.inputs.append(u)
        lp.stage.append(float(_quad(lp.model.Q1, lp.x)) + float(_quad(lp.model.R, u)))


@dataclass(frozen=True)
class EpisodeTrace:
    """Everything one replication produced, for every loop."""

    regime: str
    seed: int
    replication: int
    link_prices: np.ndarray     # λ per link, so costs can be re-priced
    requests: np.ndarray        # (T, N, links)
    grants: np.ndarray          # (T, N, links)
    states: tuple               # per loop: (T+1, n)
    estimates: tuple            # per loop: (T, n)
    inputs: tuple               # per loop: (T, m)
    stage_costs: np.ndarray     # (T, N)
    prices_paid: np.ndarray     # (T, N)
    terminal_costs: np.ndarray  # (N,)

    @property
    def horizon(self) -> int:
        return self.requests.shape[0]

    @property
    def n_loops(self) -> int:
        return self.requests.shape[1]

    def validate(self) -> None:
        T, N = self.horizon, self.n_loops
        if len(self.states) != N or len(self.inputs) != N or len(self.estimates) != N:
            raise ConsistencyError("trace is missing per-loop arrays")
        for i in range(N):
            if self.states[i].shape[0] != T + 1:
                raise ConsistencyError(f"loop {i}: need {T + 1} states")
            if self.inputs[i].shape[0] != T or self.estimates[i].shape[0] != T:
                raise ConsistencyError(f"loop {i}: need {T} inputs and estimates")
        if self.stage_costs.shape != (T, N) or self.prices_paid.shape != (T, N):
            raise ConsistencyError("stage costs and prices must be (T, N)")
        if self.terminal_costs.shape != (N,):
            raise ConsistencyError("terminal costs must have one entry per loop")
        expected = self.grants.astype(float) @ self.link_prices
        if not np.array_equal(expected, self.prices_paid):
            raise ConsistencyError("recorded prices disagree with granted links")


def run_episode(schedule: ScheduleOutcome, models, net, sols, T: int,
                streams: RngStreams, replication: int, *,
                seed: int | None = None) -> EpisodeTrace:
    """Reference simulator: one replication via the per-cycle event order."""
    loops = []
    for model, sol in zip(models, sols):
        x0, W = episode_noise(streams, replication, model, T)
        loops.append(_LoopRuntime(model, sol, x0, W, net.max_delay))

    for k in range(T):
        run_cycle(k, loops, schedule, net)

    terminal = np.zeros(len(loops))
    for i, lp in enumerate(loops):
        x_T = step_plant(lp.model, lp.x, lp.inputs[-1], lp.noise[T - 1])
        lp.states.append(x_T)
        terminal[i] = float(_quad(lp.model.Q2, x_T))

    stage = np.array([lp.stage for lp in loops]).T              # (T, N)
    prices_paid = schedule.grants.astype(float) @ net.prices    # (T, N)
    return EpisodeTrace(
        regime=schedule.regime,
        seed=streams.seed if seed is None else seed,
        replication=replication,
        link_prices=np.array(net.prices, dtype=float),
        requests=schedule.requests,
        grants=schedule.grants,
        states=tuple(np.array(lp.states) for lp in loops),
        estimates=tuple(np.array(lp.estimates) for lp in loops),
        inputs=tuple(np.array(lp.inputs) for lp in loops),
        stage_costs=stage,
        prices_paid=prices_paid,
        terminal_costs=terminal,
    )


# ---------------------------------------------------------------------------
# batch engine: all replications at once


@dataclass(frozen=True)
class BatchCosts:
    """Per-replication realized costs of one regime."""

    regime: str
    seed: int
    replications: int
    allocated: np.ndarray       # (R, N): J^i priced at the granted links
    requested: np.ndarray       # (R, N): J^i priced at the requested links
    states: tuple | None = None  # per loop (R, T+1, n) when kept

    def totals(self) -> np.ndarray:
        """(R,) fleet-average total cost per replication."""
        return self.allocated.mean(axis=1)


def _rolled_estimate(model, base, inputs, k, steps):
    """Roll ``base`` forward ``steps`` times through recorded inputs.

    Mirrors the runtime estimator: x̂ ← A x̂ + B u_{k-l} for l = steps..1.
    ``base`` is (R, n), ``inputs`` (R, T, m).
    """
    xhat = base
    for l in range(steps, 0, -1):
        xhat = xhat @ model.A.T + inputs[:, k - l] @ model.B.T
    return xhat


def simulate_batch(schedule: ScheduleOutcome, models, net, sols, T: int,
                   streams: RngStreams, replications: int, *,
                   keep_states: bool = False) -> BatchCosts:
    """Replay all replications of one regime, loop by loop, vectorized.

    The grant schedule fixes each loop's estimate age at every step, so the
    whole replication axis advances through the same branch together.
    """
    N = len(models)
    R = replications
    prices = net.prices
    price_allocated = schedule.grants.astype(float) @ prices    # (T, N)
    price_requested = schedule.requests.astype(float) @ prices  # (T, N)

    allocated = np.zeros((R, N))
    requested = np.zeros((R, N))
    kept = [] if keep_states else None

    for i, (model, sol) in enumerate(zip(models, sols)):
        ages = ages_from_allocation(schedule.grants[:, i, :], net.max_delay)
        n, m = model.n, model.m
        X = np.zeros((R, T + 1, n))
        U = np.zeros((R, T, m))
        W = np.zeros((R, T, n))
        for r in range(R):
            X[r, 0], W[r] = episode_noise(streams, r, model, T)

        stage = np.zeros((R, T))
        for k in range(T):
            age = int(ages[k])
            if age == k + 1:        # nothing delivered yet: prior branch
                base = np.broadcast_to(model.mean_x0, (R, n))
                steps = k
            else:
                base = X[:, k - age]
                steps = age
            xhat = _rolled_estimate(model, base, U, k, steps)
            u = control_input(sol, k, xhat)
            U[:, k] = u
            stage[:, k] = _quad(model.Q1, X[:, k]) + _quad(model.R, u)
            X[:, k + 1] = step_plant(model, X[:, k], u, W[:, k])

        terminal = _quad(model.Q2, X[:, T])
        lqg_part = stage.sum(axis=1) + terminal
        allocated[:, i] = lqg_part + price_allocated[:, i].sum()
        requested[:, i] = lqg_part + price_requested[:, i].sum()
        if keep_states:
            kept.append(X)

    return BatchCosts(regime=schedule.regime, seed=streams.seed,
                      replications=R, allocated=allocated,
                      requested=requested,
                      states=None if kept is None else tuple(kept))


# ---------------------------------------------------------------------------
# costs and metrics


def local_cost(trace: EpisodeTrace, which: str = "allocated") -> np.ndarray:
    """Per-loop realized cost J^i of one episode.

    ``which`` selects the price column: "allocated" prices the links the
    manager granted, "requested" the links the loop asked for.
    """
    if which not in ("requested", "allocated"):
        raise ConfigurationError(f"which must be requested|allocated, got {which!r}")
    trace.validate()
    chosen = trace.grants if which == "allocated" else trace.requests
    price = chosen.astype(float) @ trace.link_prices          # (T, N)
    return trace.stage_costs.sum(axis=0) + trace.terminal_costs + price.sum(axis=0)


def _mean_stderr(values: np.ndarray):
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    if values.size < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / np.sqrt(values.size))


def social_cost(regime_traces, shadow_traces):
    """Fleet-average regret vs the uncontended runs: mean ± stderr.

    Pairs traces by position; each pair must come from the same seed and
    replication (the whole point of common random numbers).
    """
    regime_traces = list(regime_traces)
    shadow_traces = list(shadow_traces)
    if len(regime_traces) != len(shadow_traces):
        raise ConsistencyError("need one shadow trace per regime trace")
    diffs = []
    for t, s in zip(regime_traces, shadow_traces):
        if t.seed != s.seed or t.replication != s.replication:
            raise ConsistencyError(
                f"paired runs must share noise: ({t.seed},{t.replication}) "
                f"vs ({s.seed},{s.replication})")
        diffs.append(float(np.mean(local_cost(t) - local_cost(s))))
    return _mean_stderr(np.array(diffs))


def _paired_social(costs: BatchCosts, shadow: BatchCosts):
    if costs.seed != shadow.seed or costs.replications != shadow.replications:
        raise ConsistencyError("paired batches must share seed and replication count")
    diffs = (costs.allocated - shadow.allocated).mean(axis=1)
    return _mean_stderr(diffs)


def _as_trace_list(traces):
    return [traces] if hasattr(traces, "grants") else list(traces)


def link_utilization(traces) -> np.ndarray:
    """ρ_d(t): share of all grants up to t that used link d; (links, T)."""
    traces = _as_trace_list(traces)
    if not traces:
        raise ConfigurationError("need at least one trace")
    out = None
    for tr in traces:
        counts = tr.grants.astype(float).sum(axis=1)          # (T, links)
        cum = counts.cumsum(axis=0)
        T, N = tr.grants.shape[0], tr.grants.shape[1]
        rho = (cum / (N * np.arange(1, T + 1)[:, None])).T    # (links, T)
        out = rho if out is None else out + rho
    return out / len(traces)


def average_deviation(traces) -> np.ndarray:
    """Δ̄(t): mean |granted − requested| link distance, cumulative in t."""
    traces = _as_trace_list(traces)
    if not traces:
        raise ConfigurationError("need at least one trace")
    out = None
    for tr in traces:
        asked = tr.requests.argmax(axis=2)                    # (T, N)
        got = tr.grants.argmax(axis=2)
        per_step = np.abs(got - asked).sum(axis=1).astype(float)   # (T,)
        T, N = asked.shape
        dev = per_step.cumsum() / (N * np.arange(1, T + 1))
        out = dev if out is None else out + dev
    return out / len(traces)


@dataclass(frozen=True)
class Metrics:
    """Aggregates of one regime's Monte Carlo run."""

    regime: str
    replications: int
    local_mean: np.ndarray          # (N,)
    local_stderr: np.ndarray        # (N,)
    social_mean: float
    social_stderr: float
    total_mean: float               # fleet-average total cost
    total_stderr: float
    utilization: np.ndarray         # (links, T)
    avg_deviation: np.ndarray       # (T,)
    gap_records: tuple
    predicted_objective: float
    costs: BatchCosts               # raw per-replication costs

    @property
    def max_gap(self) -> float:
        return max((r.gap for r in self.gap_records), default=0.0)

    @property
    def worst_status(self) -> str:
        order = {"optimal": 0, "time_limit": 1, "heuristic": 2}
        return max((r.status for r in self.gap_records),
                   key=lambda s: order.get(s, 3), default="optimal")


def _aggregate(schedule: ScheduleOutcome, costs: BatchCosts,
               shadow: BatchCosts) -> Metrics:
    local_mean = costs.allocated.mean(axis=0)
    if costs.replications >= 2:
        local_stderr = costs.allocated.std(axis=0, ddof=1) / np.sqrt(costs.replications)
    else:
        local_stderr = np.zeros_like(local_mean)
    social_mean, social_stderr = _paired_social(costs, shadow)
    total_mean, total_stderr = _mean_stderr(costs.totals())
    return Metrics(regime=schedule.regime, replications=costs.replications,
                   local_mean=local_mean, local_stderr=local_stderr,
                   social_mean=social_mean, social_stderr=social_stderr,
                   total_mean=total_mean, total_stderr=total_stderr,
                   utilization=link_utilization(schedule),
                   avg_deviation=average_deviation(schedule),
                   gap_records=schedule.gap_records,
                   predicted_objective=schedule.predicted_objective,
                   costs=costs)


# ---------------------------------------------------------------------------
# experiment driver


def _shadow_schedule(imp_plans) -> ScheduleOutcome:
    requests = requests_from_plans(imp_plans)
    predicted = float(np.mean([p.predicted_objective for p in imp_plans]))
    return ScheduleOutcome(regime="Shadow", requests=requests, grants=requests,
                           predicted_objective=predicted, gap_records=())


def run_experiment(config) -> dict:
    """Plan, simulate, and aggregate every regime in the config.

    Returns {regime: Metrics} and writes the CSV (and optional SVG)
    artifacts into the configured output directory.
    """
    models, net, T = config.models, config.network, config.horizon
    streams = RngStreams(config.seed)
    sols = [riccati_backward(m, T) for m in models]
    solver = config.solver

    imp_plans = _impassive_plans(models, net, sols, T, solver)
    shadow = _shadow_schedule(imp_plans)
    shadow_costs = simulate_batch(shadow, models, net, sols, T, streams,
                                  config.replications)

    results = {}
    traces = {}
    for regime in config.regimes:
        sched = plan_schedules(regime, models, net, sols, T,
                               weights=config.weights, solver=solver,
                               imp_plans=imp_plans)
        costs = simulate_batch(sched, models, net, sols, T, streams,
                               config.replications)
        results[regime] = _aggregate(sched, costs, shadow_costs)
        n_traced = min(config.outputs.trace_replications, config.replications)
        traces[regime] = [run_episode(sched, models, net, sols, T, streams, r)
                          for r in range(n_traced)]

    write_outputs(config, results, traces)
    return results


# ---------------------------------------------------------------------------
# artifacts


def _join(vec) -> str:
    return ";".join(repr(float(v)) for v in np.asarray(vec).ravel())


def write_outputs(config, results: dict, traces: dict) -> list:
    """Emit trace.csv, metrics.csv, utilization.csv, deviation.csv (+SVGs)."""
    out_dir = Path(config.outputs.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    path = out_dir / "trace.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["regime", "replication", "step", "loop", "state",
                    "estimate", "input", "requested_link", "granted_link",
                    "stage_cost", "price_paid", "terminal_cost"])
        for regime, trace_list in traces.items():
            for tr in trace_list:
                T, N = tr.horizon, tr.n_loops
                asked = tr.requests.argmax(axis=2)
                got = tr.grants.argmax(axis=2)
                for k in range(T):
                    for i in range(N):
                        w.writerow([
                            regime, tr.replication, k, i,
                            _join(tr.states[i][k]),
                            _join(tr.estimates[i][k]),
                            _join(tr.inputs[i][k]),
                            int(asked[k, i]), int(got[k, i]),
                            repr(float(tr.stage_costs[k, i])),
                            repr(float(tr.prices_paid[k, i])),
                            repr(float(tr.terminal_costs[i])) if k == T - 1 else "",
                        ])
    written.append(path)

    path = out_dir / "metrics.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["regime", "replications", "predicted_objective",
                    "social_cost_mean", "social_cost_stderr",
                    "total_cost_mean", "total_cost_stderr",
                    "max_gap", "worst_status",
                    "local_cost_means", "local_cost_stderrs"])
        for regime, m in results.items():
            w.writerow([regime, m.replications, repr(m.predicted_objective),
                        repr(m.social_mean), repr(m.social_stderr),
                        repr(m.total_mean), repr(m.total_stderr),
                        repr(m.max_gap), m.worst_status,
                        _join(m.local_mean), _join(m.local_stderr)])
    written.append(path)

    path = out_dir / "utilization.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["regime", "link", "step", "rho"])
        for regime, m in results.items():
            links, T = m.utilization.shape
            for d in range(links):
                for t in range(T):
                    w.writerow([regime, d, t, repr(float(m.utilization[d, t]))])
    written.append(path)

    path = out_dir / "deviation.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["regime", "step", "avg_deviation"])
        for regime, m in results.items():
            for t, v in enumerate(m.avg_deviation):
                w.writerow([regime, t, repr(float(v))])
    written.append(path)

    if config.outputs.emit_svg:
        from . import plotting
        written.extend(plotting.render_all(results, out_dir))
    return written
