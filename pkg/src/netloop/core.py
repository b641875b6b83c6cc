"""Plant and network models plus the random-number plumbing.

A *sub-system* is a discrete-time linear plant

    x_{k+1} = A x_k + B u_k + w_k,        w_k ~ N(0, sigma_w)

with quadratic stage/terminal weights and a delay-tolerance window
[-alpha, +beta] that constrains how far the network manager may move its
transmissions away from the requested link.  The shared network offers
links 0..max_delay; link d delivers after exactly d steps, costs
prices[d] per use, and admits at most capacities[d] simultaneous users.

Randomness is counter-based (Philox) so that every (replication,
sub-system) pair owns an independent stream that can be regenerated from
the experiment seed alone, in any order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

_EIG_CLAMP = 1e-10  # eigenvalues in [-_EIG_CLAMP, 0) are treated as exact zeros


def _as_matrix(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2:
        raise ConfigurationError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} contains non-finite entries")
    return arr


def _check_symmetric_psd(mat: np.ndarray, name: str, *, strict: bool = False) -> None:
    if mat.shape[0] != mat.shape[1]:
        raise ConfigurationError(f"{name} must be square, got shape {mat.shape}")
    if not np.allclose(mat, mat.T, atol=1e-9):
        raise ConfigurationError(f"{name} must be symmetric")
    eigs = np.linalg.eigvalsh(0.5 * (mat + mat.T))
    floor = _EIG_CLAMP if not strict else -_EIG_CLAMP
    if strict:
        if eigs.min() <= _EIG_CLAMP:
            raise ConfigurationError(f"{name} must be positive definite (min eig {eigs.min():.3e})")
    elif eigs.min() < -_EIG_CLAMP:
        raise ConfigurationError(f"{name} must be positive semidefinite (min eig {eigs.min():.3e})")


def psd_sqrt(mat: np.ndarray, name: str = "covariance") -> np.ndarray:
    """Symmetric square root of a PSD matrix via eigendecomposition.

    Eigenvalues in [-1e-10, 0) are clamped to zero; anything below that
    is rejected as a genuinely indefinite matrix.
    """
    sym = 0.5 * (np.asarray(mat, dtype=float) + np.asarray(mat, dtype=float).T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    if eigvals.min() < -_EIG_CLAMP:
        raise ConfigurationError(f"{name} is not PSD (min eig {eigvals.min():.3e})")
    eigvals = np.clip(eigvals, 0.0, None)
    return (eigvecs * np.sqrt(eigvals)) @ eigvecs.T


@dataclass(frozen=True)
class PlantModel:
    """One control loop: LTI plant, quadratic weights, delay tolerances."""

    A: np.ndarray
    B: np.ndarray
    Q1: np.ndarray          # stage state weight
    Q2: np.ndarray          # terminal state weight
    R: np.ndarray           # input weight (positive definite)
    sigma_w: np.ndarray     # process-noise covariance
    sigma_x0: np.ndarray    # initial-state covariance
    mean_x0: np.ndarray     # initial-state mean
    alpha: int              # how many links *below* the request are tolerated
    beta: int               # how many links *above* the request are tolerated
    index: int = 0          # stable identity inside an experiment

    def __post_init__(self):
        object.__setattr__(self, "A", _as_matrix(self.A, "A"))
        object.__setattr__(self, "B", _as_matrix(self.B, "B"))
        for nm in ("Q1", "Q2", "R", "sigma_w", "sigma_x0"):
            object.__setattr__(self, nm, _as_matrix(getattr(self, nm), nm))
        object.__setattr__(self, "mean_x0", np.asarray(self.mean_x0, dtype=float).reshape(-1))

        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ConfigurationError(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != n:
            raise ConfigurationError(f"B has {self.B.shape[0]} rows, expected {n}")
        for nm in ("Q1", "Q2", "sigma_w", "sigma_x0"):
            if getattr(self, nm).shape != (n, n):
                raise ConfigurationError(f"{nm} must be {n}x{n}, got {getattr(self, nm).shape}")
        m = self.B.shape[1]
        if self.R.shape != (m, m):
            raise ConfigurationError(f"R must be {m}x{m}, got {self.R.shape}")
        if self.mean_x0.shape != (n,):
            raise ConfigurationError(f"mean_x0 must have length {n}")
        _check_symmetric_psd(self.Q1, "Q1")
        _check_symmetric_psd(self.Q2, "Q2")
        _check_symmetric_psd(self.R, "R", strict=True)
        _check_symmetric_psd(self.sigma_w, "sigma_w")
        _check_symmetric_psd(self.sigma_x0, "sigma_x0")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigurationError("tolerances alpha, beta must be nonnegative integers")
        if int(self.alpha) != self.alpha or int(self.beta) != self.beta:
            raise ConfigurationError("tolerances alpha, beta must be integers")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def signature(self) -> bytes:
        """Deterministic byte signature of all dynamics-relevant parameters.

        Sub-systems with equal signatures solve identical delay-selection
        programs, so plans can be shared between them.
        """
        parts = [self.A, self.B, self.Q1, self.Q2, self.R, self.sigma_w,
                 self.sigma_x0, self.mean_x0,
                 np.array([self.alpha, self.beta], dtype=float)]
        return b"".join(np.ascontiguousarray(p).tobytes() for p in parts)


@dataclass(frozen=True)
class NetworkModel:
    """Shared medium: links 0..max_delay with prices and per-link capacities."""

    max_delay: int
    prices: np.ndarray      # length max_delay+1, strictly decreasing, last >= 0
    capacities: np.ndarray  # length max_delay+1, positive integers

    def __post_init__(self):
        object.__setattr__(self, "prices", np.asarray(self.prices, dtype=float).reshape(-1))
        object.__setattr__(self, "capacities",
                           np.asarray(self.capacities, dtype=int).reshape(-1))
        D = self.max_delay
        if D < 0:
            raise ConfigurationError("max_delay must be >= 0")
        if self.prices.shape != (D + 1,):
            raise ConfigurationError(f"prices must have length {D + 1}")
        if self.capacities.shape != (D + 1,):
            raise ConfigurationError(f"capacities must have length {D + 1}")
        if np.any(np.diff(self.prices) >= 0):
            raise ConfigurationError("prices must be strictly decreasing in delay")
        if self.prices[-1] < 0:
            raise ConfigurationError("prices must be nonnegative")
        if np.any(self.capacities <= 0):
            raise ConfigurationError("capacities must be positive")

    @property
    def n_links(self) -> int:
        return self.max_delay + 1

    @property
    def delays(self) -> np.ndarray:
        """Vector (0, 1, ..., max_delay): inner products with one-hot link
        selections give the selected delay."""
        return np.arange(self.max_delay + 1, dtype=float)


@dataclass(frozen=True)
class RngStreams:
    """Independent Gaussian streams keyed by (replication, sub-system).

    Philox is counter based, so ``stream(r, i)`` is reproducible from the
    seed alone regardless of what was drawn before — replications can be
    simulated in any order or in parallel and still agree bit for bit.
    """

    seed: int

    def stream(self, replication: int, subsystem: int) -> np.random.Generator:
        if replication < 0 or subsystem < 0:
            raise ConfigurationError("stream indices must be nonnegative")
        # Philox keys are 2x64 bits: one word for the experiment seed, one
        # packing (replication, subsystem)
        key = np.array(
            [self.seed & 0xFFFFFFFFFFFFFFFF,
             ((int(replication) & 0xFFFFFFFF) << 32) | (int(subsystem) & 0xFFFFFFFF)],
            dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def draw_gaussian(self, replication: int, subsystem: int,
                      mean: np.ndarray, cov: np.ndarray,
                      count: int) -> np.ndarray:
        """``count`` i.i.d. N(mean, cov) draws, shape (count, n).

        The stream emits standard normals in a fixed order; correlation is
        imposed by the symmetric PSD square root so that degenerate
        covariances are handled exactly.
        """
        gen = self.stream(replication, subsystem)
        mean = np.asarray(mean, dtype=float).reshape(-1)
        root = psd_sqrt(cov)
        z = gen.standard_normal((count, mean.size))
        return mean[None, :] + z @ root.T


def step_plant(model: PlantModel, x: np.ndarray, u: np.ndarray,
               w: np.ndarray) -> np.ndarray:
    """One step of x' = A x + B u + w.  Accepts batched states with the
    state on the last axis."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape[-1] != model.n:
        raise ConfigurationError(f"state has dimension {x.shape[-1]}, expected {model.n}")
    if u.shape[-1] != model.m:
        raise ConfigurationError(f"input has dimension {u.shape[-1]}, expected {model.m}")
    return x @ model.A.T + u @ model.B.T + w
