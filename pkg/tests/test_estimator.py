from __future__ import annotations

import itertools

import numpy as np
import pytest

from netloop.core import PlantModel
from netloop.errors import ConfigurationError, ConsistencyError
from netloop.estimator import (
    ControllerInfo,
    ReceivedSample,
    ages_from_allocation,
    b_coefficients,
    estimate,
    freshest_age,
    ingest,
)

from conftest import make_plant


def window_from_links(links: dict, k: int, D: int) -> np.ndarray:
    """Build the (D+1, D+1) allocation window from {time: link} entries;
    rows for negative times stay zero."""
    win = np.zeros((D + 1, D + 1))
    for r in range(D + 1):
        t = k - D + r
        if t >= 0:
            win[r, links[t]] = 1.0
    return win


def arrival_replay_age(links: dict, k: int, D: int) -> int:
    """Independent oracle: walk stamps newest-first and return the age of
    the first sample whose link delay has elapsed by k."""
    for age in range(min(D, k) + 1):
        s = k - age
        if s + links[s] <= k:
            return age
    return k + 1


class TestBCoefficients:
    def test_fresh_sample_wins(self):
        links = {3: 2, 4: 1, 5: 0}
        b = b_coefficients(window_from_links(links, 5, 2), 5, 2)
        assert np.array_equal(b, [1, 0, 0])

    def test_one_step_old_sample(self):
        # current step uses the slow link, the previous one arrived in time
        links = {3: 2, 4: 1, 5: 2}
        b = b_coefficients(window_from_links(links, 5, 2), 5, 2)
        assert np.array_equal(b, [0, 1, 0])

    def test_everything_slow(self):
        links = {3: 2, 4: 2, 5: 2}
        b = b_coefficients(window_from_links(links, 5, 2), 5, 2)
        assert np.array_equal(b, [0, 0, 1])

    def test_prior_branch_at_start(self):
        # k=0 on the slowest link: nothing has arrived, entry k+1 fires
        b = b_coefficients(window_from_links({0: 2}, 0, 2), 0, 2)
        assert np.array_equal(b, [0, 1, 0])

    def test_exactly_one_entry_set(self):
        for k in (0, 1, 4):
            win = window_from_links({t: 1 for t in range(max(0, k - 2), k + 1)},
                                    k, 2)
            assert b_coefficients(win, k, 2).sum() == 1

    def test_rejects_bad_window_shape(self):
        with pytest.raises(ConfigurationError):
            b_coefficients(np.zeros((2, 3)), 1, 2)

    def test_rejects_nonzero_prehistory_row(self):
        win = window_from_links({0: 0, 1: 0}, 1, 2)
        win[0, 0] = 1.0  # row for time -1 must stay zero
        with pytest.raises(ConfigurationError):
            b_coefficients(win, 1, 2)

    def test_rejects_fractional_row(self):
        win = window_from_links({3: 0, 4: 0, 5: 0}, 5, 2)
        win[2] = [0.5, 0.5, 0.0]
        with pytest.raises(ConfigurationError):
            b_coefficients(win, 5, 2)

    @pytest.mark.parametrize("D", [0, 1, 2])
    def test_exhaustive_against_arrival_replay(self, D):
        """Every reachable window, every boundary k, against the replay."""
        for k in range(2 * D + 2):
            times = [t for t in range(k - D, k + 1) if t >= 0]
            for combo in itertools.product(range(D + 1), repeat=len(times)):
                links = dict(zip(times, combo))
                win = window_from_links(links, k, D)
                expected = arrival_replay_age(links, k, D)
                assert freshest_age(win, k, D) == expected


def test_ages_from_allocation_matches_replay(rng):
    for _ in range(50):
        D = int(rng.integers(0, 4))
        T = int(rng.integers(1, 9))
        choice = rng.integers(0, D + 1, T)
        alloc = np.zeros((T, D + 1))
        alloc[np.arange(T), choice] = 1
        ages = ages_from_allocation(alloc, D)
        links = {t: int(choice[t]) for t in range(T)}
        for k in range(T):
            window = {t: links[t] for t in range(max(0, k - D), k + 1)}
            assert ages[k] == arrival_replay_age(window, k, D)


class TestIngest:
    def _info(self, grants):
        info = ControllerInfo(max_delay=2, mean_x0=np.zeros(1))
        for row in grants:
            info.observe_allocation(row)
        return info

    def test_accepts_on_time_sample(self):
        info = self._info([[0, 1, 0]])
        ingest(info, ReceivedSample(stamp=0, value=np.array([4.0])), now=1)
        assert info.buffer.stamp == 0

    def test_rejects_wrong_arrival_time(self):
        info = self._info([[0, 1, 0]])
        with pytest.raises(ConsistencyError):
            ingest(info, ReceivedSample(stamp=0, value=np.array([4.0])), now=2)

    def test_rejects_unknown_stamp(self):
        info = self._info([[1, 0, 0]])
        with pytest.raises(ConsistencyError):
            ingest(info, ReceivedSample(stamp=3, value=np.array([1.0])), now=3)

    def test_keeps_freshest_only(self):
        # stamped 0 on link 2 and stamped 1 on link 1 both land at time 2
        info = self._info([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
        ingest(info, ReceivedSample(stamp=1, value=np.array([9.0])), now=2)
        ingest(info, ReceivedSample(stamp=0, value=np.array([5.0])), now=2)
        assert info.buffer.stamp == 1
        assert info.buffer.value[0] == 9.0


class TestEstimate:
    def test_rolls_sample_through_inputs(self):
        """Scalar x' = 2x + u: sample value 3, one recorded input 1, so the
        one-step-old estimate is 2*3 + 1 = 7."""
        model = PlantModel(A=[[2.0]], B=[[1.0]], Q1=[[1.0]], Q2=[[1.0]],
                           R=[[1.0]], sigma_w=[[1.0]], sigma_x0=[[1.0]],
                           mean_x0=[0.0], alpha=1, beta=1)
        info = ControllerInfo(max_delay=1, mean_x0=model.mean_x0)
        info.observe_allocation([0, 1])      # time 0 sent on link 1
        info.record_input([1.0])             # u_0
        info.observe_allocation([0, 1])      # time 1
        ingest(info, ReceivedSample(stamp=0, value=np.array([3.0])), now=1)
        assert estimate(info, model, 1)[0] == pytest.approx(7.0)

    def test_prior_branch_rolls_the_mean(self):
        model = PlantModel(A=[[2.0]], B=[[1.0]], Q1=[[1.0]], Q2=[[1.0]],
                           R=[[1.0]], sigma_w=[[1.0]], sigma_x0=[[1.0]],
                           mean_x0=[5.0], alpha=1, beta=1)
        info = ControllerInfo(max_delay=3, mean_x0=model.mean_x0)
        info.observe_allocation([0, 0, 0, 1])
        info.record_input([2.0])
        info.observe_allocation([0, 0, 0, 1])
        # nothing has arrived by k=1: estimate = A*mean + B*u_0 = 12
        assert estimate(info, model, 1)[0] == pytest.approx(12.0)

    def test_fresh_sample_is_identity(self, rng):
        model = make_plant(rng)
        info = ControllerInfo(max_delay=2, mean_x0=model.mean_x0)
        info.observe_allocation([1, 0, 0])
        x = rng.standard_normal(2)
        ingest(info, ReceivedSample(stamp=0, value=x), now=0)
        assert np.allclose(estimate(info, model, 0), x)

    def test_requires_allocation_history(self, rng):
        model = make_plant(rng)
        info = ControllerInfo(max_delay=1, mean_x0=model.mean_x0)
        info.observe_allocation([1, 0])
        with pytest.raises(ConsistencyError):
            estimate(info, model, 1)   # missing the row for time 1

    def test_detects_missing_buffer(self, rng):
        model = make_plant(rng)
        info = ControllerInfo(max_delay=1, mean_x0=model.mean_x0)
        info.observe_allocation([1, 0])  # age-0 sample should be in hand
        with pytest.raises(ConsistencyError):
            estimate(info, model, 0)
