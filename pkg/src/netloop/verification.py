"""Self-check suites: the exact solver against exhaustive enumeration.

Two program families feed :func:`netloop.milp.verify_against_enumeration`:

* small random binary programs — dense, integer-valued data with frequent
  objective ties, so both the optimum and the declared tie-break order get
  exercised (infeasible instances included on purpose);
* link-selection programs — the real planning blocks (selection one-hots,
  freshness products, arrival rows) built from random plants over a grid
  of short horizons and small delay ranges, with and without realized
  history, kept under the enumeration limit.

`verify_suite` runs everything and reports per-family outcomes; the
command line front end prints them and the acceptance gate asserts them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import milp
from .core import NetworkModel, PlantModel
from .delay_policy import add_selection_block
from .lqg import riccati_backward, error_cost_table

__all__ = [
    "SuiteResult",
    "VerificationSummary",
    "random_binary_programs",
    "delay_control_programs",
    "verify_suite",
]

DEFAULT_SEED = 20260816


def random_binary_programs(count: int = 200, seed: int = DEFAULT_SEED,
                           max_vars: int = 10):
    """Yield (label, problem) pairs of small dense binary programs.

    Integer coefficients on a narrow range make equal-objective optima
    common, which is exactly what the tie-break contract needs checked.
    Roughly a tenth of the draws come out infeasible; both sides of the
    comparison must agree on that too.
    """
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, 1],
                                                            dtype=np.uint64)))
    for idx in range(count):
        n = int(gen.integers(2, max_vars + 1))
        builder = milp.MilpBuilder()
        cols = [builder.add_binary(f"v{j}") for j in range(n)]
        obj = gen.integers(-5, 6, size=n)
        builder.add_objective({cols[j]: float(obj[j]) for j in range(n)
                               if obj[j]})
        for _ in range(int(gen.integers(0, 3))):
            coeffs = gen.integers(-2, 3, size=n)
            if not coeffs.any():
                continue
            # rhs near the midpoint keeps most programs feasible
            lo = float(np.minimum(coeffs, 0).sum())
            hi = float(np.maximum(coeffs, 0).sum())
            rhs = float(gen.integers(int(lo), int(hi) + 1))
            builder.add_eq({cols[j]: float(coeffs[j]) for j in range(n)
                            if coeffs[j]}, rhs)
        for _ in range(int(gen.integers(0, 5))):
            coeffs = gen.integers(-2, 3, size=n)
            if not coeffs.any():
                continue
            lo = float(np.minimum(coeffs, 0).sum())
            hi = float(np.maximum(coeffs, 0).sum())
            rhs = float(gen.integers(int(lo) - 1, int(hi) + 1))
            builder.add_le({cols[j]: float(coeffs[j]) for j in range(n)
                            if coeffs[j]}, rhs)
        yield f"random-{idx}", builder.build()


def _random_plant(gen: np.random.Generator, dim: int, alpha: int,
                  beta: int) -> PlantModel:
    A = gen.uniform(-1.2, 1.2, size=(dim, dim))
    B = np.diag(gen.uniform(0.1, 1.0, size=dim))
    q = np.diag(gen.uniform(0.2, 2.0, size=dim))
    sw = np.diag(gen.uniform(0.2, 2.0, size=dim))
    return PlantModel(A=A, B=B, Q1=q, Q2=q, R=np.eye(dim), sigma_w=sw,
                      sigma_x0=sw, mean_x0=np.zeros(dim),
                      alpha=alpha, beta=beta, index=0)


def delay_control_programs(seed: int = DEFAULT_SEED,
                           max_vars: int = milp.ENUM_MAX_VARS):
    """Yield (label, problem) pairs of genuine link-selection programs.

    Covers delay ranges 0..2, horizons 1..4, scalar and planar plants,
    and — for positive start offsets — random realized grant history, so
    the history-folding of the freshness products is in the checked set.
    Programs whose free-variable count would exceed ``max_vars`` are
    skipped (the oracle cannot check them).
    """
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, 2],
                                                            dtype=np.uint64)))
    for D in (0, 1, 2):
        prices = np.sort(gen.uniform(1.0, 20.0, size=D + 1))[::-1]
        net = NetworkModel(max_delay=D, prices=prices.tolist(),
                           capacities=[1] * (D + 1))
        for T in (1, 2, 3, 4):
            for dim in (1, 2):
                model = _random_plant(gen, dim, alpha=1, beta=1)
                sol = riccati_backward(model, T)
                cum = error_cost_table(model, sol, D)
                for start in range(0, min(T, D + 1)):
                    history = np.zeros((start, D + 1), dtype=np.int8)
                    for t in range(start):
                        history[t, int(gen.integers(0, D + 1))] = 1
                    builder = milp.MilpBuilder()
                    add_selection_block(builder, "", net, cum, T, start,
                                        history)
                    prob = builder.build()
                    if prob.n_vars > max_vars:
                        continue
                    yield f"select-D{D}-T{T}-dim{dim}-start{start}", prob


@dataclass(frozen=True)
class SuiteResult:
    """Outcome of one oracle comparison."""

    label: str
    ok: bool
    message: str


@dataclass
class VerificationSummary:
    """Tallies for a full verification run."""

    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def add(self, label: str, report) -> None:
        self.checked += 1
        if not report.ok:
            self.failures.append(SuiteResult(label=label, ok=False,
                                             message=report.message))


def verify_suite(count: int = 200, seed: int = DEFAULT_SEED,
                 progress=None) -> VerificationSummary:
    """Run both program families through the enumeration oracle."""
    summary = VerificationSummary()
    for label, prob in random_binary_programs(count=count, seed=seed):
        report = milp.verify_against_enumeration(prob)
        summary.add(label, report)
        if progress is not None:
            progress(label, report)
    for label, prob in delay_control_programs(seed=seed):
        report = milp.verify_against_enumeration(prob)
        summary.add(label, report)
        if progress is not None:
            progress(label, report)
    return summary
