"""Gaussian-process surrogate with UCB acquisition over template parameters.

The model regresses the scalar refinement objective on parameter vectors
normalized to the unit hypercube, using a squared-exponential kernel
k(x, x') = exp(-||x - x'||^2 / (2 l^2)) with fixed unit signal variance.
Acquisition enumerates a deterministic candidate set (grid for up to
three dimensions, seeded random samples above) and returns the UCB
argmax with first-index tie-breaking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import instrumentation

_GRID_RESOLUTION = {1: 33, 2: 17, 3: 9}
_RANDOM_CANDIDATES = 512
_JITTER_START = 1e-10
_JITTER_LIMIT = 1e-4


class GpError(ValueError):
    """Raised for invalid kernel inputs or irrecoverable factorizations."""


def rbf_kernel(x: np.ndarray, x2: np.ndarray, length_scale: float) -> float:
    """Squared-exponential kernel value in (0, 1]."""
    if length_scale <= 0:
        raise GpError(f"length scale must be positive, got {length_scale}")
    a = np.asarray(x, dtype=float)
    b = np.asarray(x2, dtype=float)
    if a.shape != b.shape:
        raise GpError(f"dimension mismatch: {a.shape} vs {b.shape}")
    sq = float(np.sum((a - b) ** 2))
    return math.exp(-sq / (2.0 * length_scale**2))


def _kernel_matrix(xs: np.ndarray, length_scale: float) -> np.ndarray:
    sq = np.sum(xs**2, axis=1)[:, None] + np.sum(xs**2, axis=1)[None, :] - 2.0 * xs @ xs.T
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-sq / (2.0 * length_scale**2))


@dataclass
class UcbSchedule:
    """Exploration weight beta_k = c * log(k + 1), non-decreasing in k."""

    c: float = 2.0

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise GpError("exploration constant must be positive")

    def beta(self, k: int) -> float:
        return self.c * math.log(k + 1)


@dataclass
class GpModel:
    """Observed (theta, objective) pairs with a cached Cholesky factor.

    ``bounds`` maps raw parameters to the unit hypercube before any
    kernel evaluation; omit it to model already-normalized inputs.
    """

    length_scale: float = 0.2
    noise_variance: float = 1e-4
    signal_variance: float = 1.0
    bounds: tuple[tuple[float, float], ...] | None = None
    thetas: list[np.ndarray] = field(default_factory=list)
    values: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.length_scale <= 0:
            raise GpError("length scale must be positive")
        if self.noise_variance < 0:
            raise GpError("noise variance must be non-negative")
        self._chol: np.ndarray | None = None
        self._alpha: np.ndarray | None = None
        instrumentation.increment("gp_models")

    def __len__(self) -> int:
        return len(self.thetas)

    def _normalize(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.bounds is None:
            return theta
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        span = np.where(hi > lo, hi - lo, 1.0)
        return (theta - lo) / span

    def add(self, theta: np.ndarray, value: float) -> None:
        """Append an observation and refresh the cached factorization."""
        if not math.isfinite(value):
            raise GpError(f"objective value must be finite, got {value}")
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if self.thetas and theta.shape != self.thetas[0].shape:
            raise GpError("observation dimension mismatch")
        self.thetas.append(theta)
        self.values.append(float(value))
        self._refit()

    def _refit(self) -> None:
        xs = self._normalize(np.stack(self.thetas))
        gram = self.signal_variance * _kernel_matrix(xs, self.length_scale)
        n = gram.shape[0]
        noise = self.noise_variance
        jitter = _JITTER_START
        while True:
            try:
                chol = np.linalg.cholesky(gram + (noise + jitter) * np.eye(n))
                break
            except np.linalg.LinAlgError:
                jitter *= 10.0
                if jitter > _JITTER_LIMIT:
                    raise GpError("kernel matrix not positive definite after jitter escalation")
        self._chol = chol
        y = np.asarray(self.values)
        self._alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, y))

    def posterior(self, query: np.ndarray) -> tuple[float, float]:
        """Posterior mean and variance at ``query`` (prior if no data)."""
        if not self.thetas:
            return 0.0, self.signal_variance
        q = self._normalize(np.atleast_1d(np.asarray(query, dtype=float)))
        xs = self._normalize(np.stack(self.thetas))
        diffs = xs - q[None, :]
        k_star = self.signal_variance * np.exp(
            -np.sum(diffs**2, axis=1) / (2.0 * self.length_scale**2)
        )
        assert self._chol is not None and self._alpha is not None
        mean = float(k_star @ self._alpha)
        v = np.linalg.solve(self._chol, k_star)
        variance = float(self.signal_variance - v @ v)
        return mean, max(variance, 0.0)

    def posterior_batch(self, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if not self.thetas:
            n = queries.shape[0]
            return np.zeros(n), np.full(n, self.signal_variance)
        qs = np.stack([self._normalize(q) for q in queries])
        xs = self._normalize(np.stack(self.thetas))
        sq = (
            np.sum(xs**2, axis=1)[:, None]
            + np.sum(qs**2, axis=1)[None, :]
            - 2.0 * xs @ qs.T
        )
        np.maximum(sq, 0.0, out=sq)
        k_star = self.signal_variance * np.exp(-sq / (2.0 * self.length_scale**2))
        assert self._chol is not None and self._alpha is not None
        means = k_star.T @ self._alpha
        v = np.linalg.solve(self._chol, k_star)
        variances = np.maximum(self.signal_variance - np.sum(v**2, axis=0), 0.0)
        return means, variances


def gp_posterior(model: GpModel, query: np.ndarray) -> tuple[float, float]:
    return model.posterior(query)


def update_model(model: GpModel, theta: np.ndarray, value: float) -> GpModel:
    model.add(theta, value)
    return model


def candidate_set(
    bounds: tuple[tuple[float, float], ...],
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Deterministic acquisition candidates within the slot bounds."""
    dim = len(bounds)
    if dim <= 3:
        res = _GRID_RESOLUTION[dim]
        axes = [np.linspace(lo, hi, res) for lo, hi in bounds]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)
    if rng is None:
        raise GpError("random candidate sampling needs a generator for > 3 slots")
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    return lo + rng.random((_RANDOM_CANDIDATES, dim)) * (hi - lo)


def ucb_value(model: GpModel, theta: np.ndarray, schedule: UcbSchedule, k: int) -> float:
    mean, variance = model.posterior(theta)
    return mean + math.sqrt(schedule.beta(k)) * math.sqrt(variance)


def propose_theta(
    model: GpModel,
    bounds: tuple[tuple[float, float], ...],
    schedule: UcbSchedule,
    k: int,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """UCB argmax over the candidate set; ties break to the first index."""
    candidates = candidate_set(bounds, rng)
    means, variances = model.posterior_batch(candidates)
    scores = means + math.sqrt(schedule.beta(k)) * np.sqrt(variances)
    best = int(np.argmax(scores))
    return candidates[best].copy()


def recommend_theta(model: GpModel) -> np.ndarray | None:
    """Posterior-mean argmax among observed parameters (earliest wins ties).

    The running loop proposes exploratory parameters via UCB; the mined
    formula reports this exploitation-only recommendation instead.
    """
    if not model.thetas:
        return None
    best_idx = 0
    best_mean = -math.inf
    for i, theta in enumerate(model.thetas):
        mean, _ = model.posterior(theta)
        if mean > best_mean + 1e-12:
            best_mean = mean
            best_idx = i
    return model.thetas[best_idx].copy()
