from __future__ import annotations

import itertools

import numpy as np
import pytest

from netloop import milp
from netloop.core import NetworkModel
from netloop.delay_policy import (
    add_selection_block,
    impassive_plan,
    onehot_schedule,
    optimal_row_schedule,
    plan_objective,
    reactive_plan,
    schedule_links,
)
from netloop.errors import ConfigurationError
from netloop.estimator import ages_from_allocation
from netloop.lqg import error_cost_table, riccati_backward

from conftest import make_network, make_plant


def replay_cost(net, cum, links, start=0):
    """Price + staleness of a schedule via the arrival replay — no program
    encoding involved, so it can referee the optimizers."""
    links = np.asarray(links, dtype=int)
    ages = ages_from_allocation(onehot_schedule(links, net.n_links),
                                net.max_delay)
    return sum(float(net.prices[links[t]]) + float(cum[t][ages[t]])
               for t in range(start, len(links)))


def enumerate_best(net, cum, T, start=0, prefix=()):
    """Exhaustive minimum over all link schedules extending ``prefix``."""
    best = np.inf
    D = net.max_delay
    for tail in itertools.product(range(D + 1), repeat=T - len(prefix)):
        links = (*prefix, *tail)
        best = min(best, replay_cost(net, cum, links, start))
    return best


def test_onehot_round_trip():
    links = [2, 0, 1, 1]
    hot = onehot_schedule(links, 3)
    assert hot.shape == (4, 3)
    assert np.array_equal(schedule_links(hot), links)


def test_onehot_rejects_out_of_range():
    with pytest.raises(ConfigurationError):
        onehot_schedule([0, 3], 3)


class TestRowScheduleDP:
    def test_matches_enumeration(self, rng):
        for _ in range(12):
            D = int(rng.integers(0, 3))
            T = int(rng.integers(1, 6))
            net = make_network(D)
            model = make_plant(rng)
            sol = riccati_backward(model, T)
            cum = error_cost_table(model, sol, D)
            cost, links = optimal_row_schedule(net, cum, T)
            assert replay_cost(net, cum, links) == pytest.approx(cost, abs=1e-9)
            assert cost == pytest.approx(enumerate_best(net, cum, T), abs=1e-9)

    def test_respects_allowed_sets(self, rng):
        D, T = 2, 4
        net = make_network(D)
        model = make_plant(rng)
        cum = error_cost_table(model, riccati_backward(model, T), D)
        allowed = [None, [1, 2], [0], None]
        cost, links = optimal_row_schedule(net, cum, T, allowed=allowed)
        assert links[1] in (1, 2) and links[2] == 0
        best = min(replay_cost(net, cum, (a, b, c, d))
                   for a in range(3) for b in (1, 2) for c in (0,)
                   for d in range(3))
        assert cost == pytest.approx(best, abs=1e-9)

    def test_history_seeds_the_window(self, rng):
        D, T = 2, 5
        net = make_network(D)
        model = make_plant(rng)
        cum = error_cost_table(model, riccati_backward(model, T), D)
        prefix = (2, 1)
        cost, links = optimal_row_schedule(net, cum, T, history=prefix)
        assert len(links) == T - len(prefix)
        assert cost == pytest.approx(
            enumerate_best(net, cum, T, start=len(prefix), prefix=prefix),
            abs=1e-9)

    def test_rejects_overlong_history(self, rng):
        net = make_network(1)
        model = make_plant(rng)
        cum = error_cost_table(model, riccati_backward(model, 2), 1)
        with pytest.raises(ConfigurationError):
            optimal_row_schedule(net, cum, 2, history=(0, 0, 0))

    def test_empty_plan_for_exhausted_horizon(self, rng):
        net = make_network(1)
        model = make_plant(rng)
        cum = error_cost_table(model, riccati_backward(model, 2), 1)
        cost, links = optimal_row_schedule(net, cum, 2, history=(0, 1))
        assert cost == 0.0 and links.size == 0


class TestImpassivePlan:
    def test_agrees_with_dynamic_program(self, rng):
        """The selection program and the window DP are independent exact
        routes to the same optimum."""
        for _ in range(10):
            D = int(rng.integers(0, 3))
            T = int(rng.integers(1, 6))
            net = make_network(D)
            model = make_plant(rng)
            sol = riccati_backward(model, T)
            cum = error_cost_table(model, sol, D)
            plan = impassive_plan(model, net, sol, T)
            assert plan.status == "optimal"
            dp_cost, _ = optimal_row_schedule(net, cum, T)
            assert plan.predicted_objective == pytest.approx(dp_cost, abs=1e-9)

    def test_predicted_objective_survives_replay(self, rng):
        for _ in range(10):
            D = int(rng.integers(0, 3))
            T = int(rng.integers(1, 6))
            net = make_network(D)
            model = make_plant(rng)
            sol = riccati_backward(model, T)
            plan = impassive_plan(model, net, sol, T)
            replayed = plan_objective(model, net, sol,
                                      schedule_links(plan.steps))
            assert plan.predicted_objective == pytest.approx(replayed, abs=1e-9)

    def test_link_accessor_bounds(self, rng):
        net = make_network(1)
        model = make_plant(rng)
        sol = riccati_backward(model, 3)
        plan = impassive_plan(model, net, sol, 3)
        assert plan.link(0) in (0, 1)
        with pytest.raises(ConfigurationError):
            plan.link(3)


class TestReactivePlan:
    def test_start_of_run_coincides_with_offline(self, rng):
        """With no history the receding-horizon program is the offline
        program, term for term — same schedule, same optimum."""
        for _ in range(8):
            D = int(rng.integers(0, 3))
            T = int(rng.integers(1, 6))
            net = make_network(D)
            model = make_plant(rng)
            sol = riccati_backward(model, T)
            offline = impassive_plan(model, net, sol, T)
            online = reactive_plan(0, np.zeros((0, net.n_links)), model, net,
                                   sol, T)
            assert np.array_equal(offline.steps, online.steps)
            assert online.predicted_objective == pytest.approx(
                offline.predicted_objective, abs=1e-12)

    def test_objective_telescopes_when_granted_as_planned(self, rng):
        for _ in range(8):
            D = int(rng.integers(0, 3))
            T = int(rng.integers(2, 6))
            net = make_network(D)
            model = make_plant(rng)
            sol = riccati_backward(model, T)
            cum = error_cost_table(model, sol, D)
            plan = impassive_plan(model, net, sol, T)
            first = plan.link(0)
            age0 = ages_from_allocation(plan.steps, D)[0]
            rep = reactive_plan(1, plan.steps[:1], model, net, sol, T)
            spent = float(net.prices[first]) + float(cum[0][age0])
            assert rep.predicted_objective == pytest.approx(
                plan.predicted_objective - spent, abs=1e-9)

    def test_replans_around_a_forced_grant(self, rng):
        """Grant something other than the request at step 0; the step-1
        program must price its sample ages from the realized grant and pick
        the cheaper of 'send fresh' vs 'lean on the old sample'."""
        D, T = 1, 2
        net = NetworkModel(max_delay=1, prices=[4.0, 1.0], capacities=[1, 1])
        for _ in range(6):
            model = make_plant(rng, stable=False)
            sol = riccati_backward(model, T)
            cum = error_cost_table(model, sol, D)
            forced = np.array([[0, 1]], dtype=np.int8)   # slow link at k=0
            rep = reactive_plan(1, forced, model, net, sol, T)
            # choosing link 0 at k=1: fresh sample, price 4
            # choosing link 1 at k=1: also age 1 (the k=0 sample arrives), price 1
            want = 0 if 4.0 + cum[1][0] <= 1.0 + cum[1][1] else 1
            assert rep.link(1) == want
            assert rep.predicted_objective == pytest.approx(
                min(4.0 + cum[1][0], 1.0 + cum[1][1]), abs=1e-9)

    def test_rejects_bad_step(self, rng):
        net = make_network(1)
        model = make_plant(rng)
        sol = riccati_backward(model, 3)
        with pytest.raises(ConfigurationError):
            reactive_plan(3, np.zeros((3, 2)), model, net, sol, 3)


class TestSelectionBlock:
    def test_freshness_variables_track_realized_ages(self, rng):
        """In any solved program the age selectors must spell out exactly
        the arrival replay of the chosen schedule: a one-hot over ages with
        the 1 on the realized freshest age."""
        for _ in range(8):
            D = int(rng.integers(0, 3))
            T = int(rng.integers(1, 5))
            net = make_network(D)
            model = make_plant(rng)
            sol = riccati_backward(model, T)
            cum = error_cost_table(model, sol, D)
            builder = milp.MilpBuilder()
            block = add_selection_block(builder, "", net, cum, T)
            res = milp.solve(builder.build())
            assert res.status == "optimal"
            steps = np.zeros((T, net.n_links), dtype=np.int8)
            for (t, l), col in block.select.items():
                steps[t, l] = res.assignment[col]
            ages = ages_from_allocation(steps, D)
            for t in range(T):
                for age in range(1, min(D, t + 1) + 1):
                    expect = 1 if ages[t] == age else 0
                    got = res.assignment[block.fresh[(t, age)]] \
                        if (t, age) in block.fresh else 0
                    assert got == expect, (t, age)

    def test_history_prunes_dead_selectors(self):
        # a fast realized grant kills the staler selectors behind it
        net = make_network(1)
        model = make_plant(np.random.default_rng(5))
        T = 3
        sol = riccati_backward(model, T)
        cum = error_cost_table(model, sol, 1)
        history = np.array([[1, 0]], dtype=np.int8)  # k=0 went out on link 0
        builder = milp.MilpBuilder()
        block = add_selection_block(builder, "", net, cum, T, start=1,
                                    history=history)
        # age-1 selector at t=1 reads the history sample (arrived), so it
        # exists; nothing at t=1 can be older than that
        assert (1, 1) in block.fresh
        assert all(t >= 1 for (t, _) in block.select)

    def test_rejects_malformed_history(self, rng):
        net = make_network(1)
        model = make_plant(rng)
        sol = riccati_backward(model, 2)
        cum = error_cost_table(model, sol, 1)
        builder = milp.MilpBuilder()
        with pytest.raises(ConfigurationError):
            add_selection_block(builder, "", net, cum, 2, start=1,
                                history=np.array([[1, 1]]))


def test_plan_objective_ignores_sunk_prices(rng):
    D, T = 2, 5
    net = make_network(D)
    model = make_plant(rng)
    sol = riccati_backward(model, T)
    cum = error_cost_table(model, sol, D)
    links = [2, 1, 0, 2, 1]
    full = plan_objective(model, net, sol, links, start=0)
    tail = plan_objective(model, net, sol, links, start=2)
    spent = sum(float(net.prices[links[t]]) for t in range(2))
    ages = ages_from_allocation(onehot_schedule(links, net.n_links), D)
    spent += sum(float(cum[t][ages[t]]) for t in range(2))
    assert full - spent == pytest.approx(tail, abs=1e-9)
