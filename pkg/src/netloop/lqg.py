"""Finite-horizon LQG backbone.

One backward Riccati pass per sub-system produces everything the rest of
the package needs:

* the gains ``L_t`` of the certainty-equivalent law ``u_t = -L_t x̂_t``;
* the value matrices ``P_t`` (cost-to-go weights);
* the curvature matrices ``Ptilde_t = Q1 + AᵀP_{t+1}A - P_t``, which price
  the estimation error: running the law on an estimate that is ``j`` steps
  stale costs, in expectation, the cumulative trace terms assembled by
  :func:`error_cost_table`;
* ``noise_floor = Σ_{t=1..T} Tr(P_t sigma_w)``, the part of the expected
  cost no communication schedule can remove.

The staleness trace uses the covariance orientation
``Tr(Ptilde_t A^{l-1} Σ A^{(l-1)ᵀ})`` — the error at age ``j`` is a sum of
propagated noises ``A^{l-1} w_{t-l}``, so its covariance carries the
transpose on the right factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PlantModel, NetworkModel
from .errors import ConfigurationError


@dataclass(frozen=True)
class RiccatiSolution:
    """Backward-pass output for one sub-system over horizon T.

    P has T+1 entries (P[T] = Q2), L and Ptilde have T entries each.
    """

    P: np.ndarray        # (T+1, n, n)
    L: np.ndarray        # (T, m, n)
    Ptilde: np.ndarray   # (T, n, n)
    noise_floor: float   # sum_{t=1..T} Tr(P_t sigma_w)

    @property
    def horizon(self) -> int:
        return self.L.shape[0]


def riccati_backward(model: PlantModel, T: int) -> RiccatiSolution:
    """Solve the finite-horizon Riccati recursion for ``model`` over T steps."""
    if T < 1:
        raise ConfigurationError(f"horizon must be >= 1, got {T}")
    A, B, Q1, Q2, R = model.A, model.B, model.Q1, model.Q2, model.R
    n, m = model.n, model.m

    P = np.zeros((T + 1, n, n))
    L = np.zeros((T, m, n))
    Pt = np.zeros((T, n, n))
    P[T] = Q2
    for t in range(T - 1, -1, -1):
        PB = P[t + 1] @ B
        gram = R + B.T @ PB
        L[t] = np.linalg.solve(gram, PB.T @ A)
        P[t] = Q1 + A.T @ P[t + 1] @ A - A.T @ PB @ L[t]
        P[t] = 0.5 * (P[t] + P[t].T)
        Pt[t] = Q1 + A.T @ P[t + 1] @ A - P[t]
        Pt[t] = 0.5 * (Pt[t] + Pt[t].T)

    floor = float(sum(np.trace(P[t] @ model.sigma_w) for t in range(1, T + 1)))
    return RiccatiSolution(P=P, L=L, Ptilde=Pt, noise_floor=floor)


def control_input(sol: RiccatiSolution, t: int, xhat: np.ndarray) -> np.ndarray:
    """Certainty-equivalent input u_t = -L_t x̂_t (batched on leading axes)."""
    if not 0 <= t < sol.horizon:
        raise ConfigurationError(f"t={t} outside horizon {sol.horizon}")
    return -np.asarray(xhat, dtype=float) @ sol.L[t].T


def _noise_cov_at(model: PlantModel, t: int, l: int) -> np.ndarray:
    """Covariance of the noise entering l steps before t: process noise for
    t-l >= 0, the initial-state covariance for the virtual step t-l = -1."""
    return model.sigma_x0 if t - l < 0 else model.sigma_w


def error_cost_term(model: PlantModel, sol: RiccatiSolution, t: int, l: int) -> float:
    """Tr(Ptilde_t A^{l-1} Σ_{t-l} A^{(l-1)ᵀ}): expected price of the noise
    injected l steps before t while the estimate stayed blind to it.

    Valid for 1 <= l <= t+1; l = t+1 is the initial-state term of the
    prior-mean branch.
    """
    if not 0 <= t < sol.horizon:
        raise ConfigurationError(f"t={t} outside horizon {sol.horizon}")
    if not 1 <= l <= t + 1:
        raise ConfigurationError(f"staleness index l={l} outside [1, {t + 1}]")
    Apow = np.linalg.matrix_power(model.A, l - 1)
    return float(np.trace(sol.Ptilde[t] @ Apow @ _noise_cov_at(model, t, l) @ Apow.T))


def stale_error_covariance(model: PlantModel, t: int, age: int) -> np.ndarray:
    """Closed-form covariance of x_t - x̂_t when the estimate at time t is
    built from the state ``age`` steps back (age = t+1 means the prior mean)."""
    if not 0 <= age <= t + 1:
        raise ConfigurationError(f"age={age} outside [0, {t + 1}]")
    n = model.n
    cov = np.zeros((n, n))
    for l in range(1, age + 1):
        Apow = np.linalg.matrix_power(model.A, l - 1)
        cov += Apow @ _noise_cov_at(model, t, l) @ Apow.T
    return cov


def error_cost_table(model: PlantModel, sol: RiccatiSolution,
                     max_delay: int) -> list[np.ndarray]:
    """Cumulative staleness costs: table[t][j] is the expected extra stage
    cost at time t when the estimate is j steps stale.

    table[t] has length tau_t + 1 with tau_t = min(max_delay, t+1); index 0
    (fresh sample) costs nothing, index tau_t covers the oldest reachable
    age, which for t < max_delay is the prior-mean branch.
    """
    T = sol.horizon
    out = []
    for t in range(T):
        tau = min(max_delay, t + 1)
        cum = np.zeros(tau + 1)
        for l in range(1, tau + 1):
            cum[l] = cum[l - 1] + error_cost_term(model, sol, t, l)
        out.append(cum)
    return out


@dataclass(frozen=True)
class CostBreakdown:
    """Closed-form expected local cost, split into its mechanisms."""

    mean_term: float        # ||E x_0||^2 weighted by P_0
    init_cov_term: float    # Tr(P_0 sigma_x0)
    noise_floor: float      # schedule-independent accumulation
    staleness: float        # schedule-dependent estimation penalty
    prices: float           # communication charges

    @property
    def total(self) -> float:
        return (self.mean_term + self.init_cov_term + self.noise_floor
                + self.staleness + self.prices)


def closed_form_cost(model: PlantModel, sol: RiccatiSolution,
                     ages: np.ndarray, link_choices: np.ndarray,
                     net: NetworkModel) -> CostBreakdown:
    """Expected total cost of running the certainty-equivalent law under a
    fixed communication outcome.

    ``ages[t]`` is the staleness of the estimate used at t (t+1 = prior
    mean); ``link_choices[t]`` is the link whose price is charged at t.
    """
    T = sol.horizon
    ages = np.asarray(ages, dtype=int).reshape(-1)
    link_choices = np.asarray(link_choices, dtype=int).reshape(-1)
    if ages.shape != (T,) or link_choices.shape != (T,):
        raise ConfigurationError("ages and link_choices must have length T")

    table = error_cost_table(model, sol, max(net.max_delay, T))
    stale = 0.0
    for t in range(T):
        if not 0 <= ages[t] < len(table[t]):
            raise ConfigurationError(f"age {ages[t]} unreachable at t={t}")
        stale += table[t][ages[t]]
    prices = float(net.prices[link_choices].sum())
    mean_term = float(model.mean_x0 @ sol.P[0] @ model.mean_x0)
    init_cov = float(np.trace(sol.P[0] @ model.sigma_x0))
    return CostBreakdown(mean_term=mean_term, init_cov_term=init_cov,
                         noise_floor=sol.noise_floor, staleness=stale,
                         prices=prices)
