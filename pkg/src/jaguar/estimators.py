"""Zero-order gradient estimators.

The memory estimator keeps a vector ``h`` of the most recent central
difference seen along each coordinate and refreshes one uniformly chosen
coordinate per step, paying two oracle calls regardless of dimension. Its
stochastic variant additionally maintains a momentum average ``g`` of
debiased single-coordinate estimates, sharing the same two calls.

Baselines: a fresh multi-coordinate estimate (two calls per sampled
coordinate) and smoothing along random sphere directions (two calls per
direction).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .oracle import SamplePair, ZeroOrderOracle

__all__ = [
    "EstimatorState",
    "EstimatorKind",
    "init_memory",
    "jaguar_step",
    "jaguar_stochastic_step",
    "full_coordinate_estimate",
    "lp_smoothing_estimate",
    "sample_lp_sphere",
    "default_tau",
]

SampleProvider = Callable[[], Optional[SamplePair]]


def _no_samples() -> None:
    return None


@dataclass
class EstimatorState:
    """Mutable state of the memory estimator.

    ``h`` holds one remembered central difference per coordinate; ``g`` is
    the momentum aggregate used by the stochastic variant (``None``
    otherwise). Only the step functions below write to either.
    """

    h: np.ndarray
    tau: float
    g: Optional[np.ndarray] = None
    last_index: Optional[int] = None
    last_rho: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.h.shape[0]


def default_tau(epsilon: float, d: int, L: float, diameter: float) -> float:
    """Probe radius sized to a target accuracy: epsilon / (sqrt(d) L diameter)."""
    if min(epsilon, d, L, diameter) <= 0:
        raise ValueError("epsilon, d, L and diameter must all be > 0")
    return epsilon / (np.sqrt(d) * L * diameter)


def init_memory(
    oracle: ZeroOrderOracle,
    x0: np.ndarray,
    tau: float,
    sample_provider: SampleProvider = _no_samples,
    with_momentum: bool = False,
) -> EstimatorState:
    """Fill the memory with a central difference along every coordinate.

    Costs exactly ``2 * dim`` oracle calls. With ``with_momentum`` the
    momentum aggregate starts as an identical copy of the memory.
    """
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    d = oracle.dim
    h = np.empty(d)
    for i in range(d):
        h[i] = oracle.central_difference(x0, i, tau, pair=sample_provider())
    return EstimatorState(h=h, tau=tau, g=h.copy() if with_momentum else None)


def jaguar_step(
    state: EstimatorState,
    oracle: ZeroOrderOracle,
    x: np.ndarray,
    rng: np.random.Generator,
    sample_provider: SampleProvider = _no_samples,
) -> np.ndarray:
    """Refresh one uniformly chosen memory coordinate at ``x``.

    Two oracle calls. Returns a copy of the updated memory vector.
    """
    i = int(rng.integers(state.dim))
    state.h[i] = oracle.central_difference(x, i, state.tau, pair=sample_provider())
    state.last_index = i
    return state.h.copy()


def jaguar_stochastic_step(
    state: EstimatorState,
    oracle: ZeroOrderOracle,
    x: np.ndarray,
    rng: np.random.Generator,
    eta: float,
    sample_provider: SampleProvider = _no_samples,
) -> np.ndarray:
    """Memory refresh plus momentum-averaged debiased estimate.

    One coordinate index and one sample pair are drawn; the single central
    difference (two oracle calls) feeds both the memory update and the
    debiased point

        rho = h_pre + d * (diff - h_pre[i]) * e_i,

    built from the memory as it was before the update, whose expectation
    over the index draw is the all-coordinate estimate. The momentum
    aggregate moves to ``(1 - eta) * g + eta * rho`` and is returned.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    if state.g is None:
        raise ValueError("momentum not initialized; build the state with with_momentum=True")
    d = state.dim
    i = int(rng.integers(d))
    diff = oracle.central_difference(x, i, state.tau, pair=sample_provider())
    rho = state.h.copy()
    rho[i] = (1.0 - d) * state.h[i] + d * diff
    state.h[i] = diff
    state.g = (1.0 - eta) * state.g + eta * rho
    state.last_index = i
    state.last_rho = rho
    return state.g.copy()


def full_coordinate_estimate(
    oracle: ZeroOrderOracle,
    x: np.ndarray,
    tau: float,
    m: int,
    rng: np.random.Generator,
    sample_provider: SampleProvider = _no_samples,
) -> np.ndarray:
    """Fresh estimate from ``m`` coordinates sampled without replacement.

    Sampled coordinates carry weight ``d / m`` so the estimate is unbiased
    for the all-coordinate version; ``m = d`` visits every coordinate once
    and drops the rescaling. Costs ``2 * m`` oracle calls.
    """
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    d = oracle.dim
    if not 1 <= m <= d:
        raise ValueError(f"m must be in [1, {d}], got {m}")
    indices = rng.choice(d, size=m, replace=False)
    estimate = np.zeros(d)
    scale = d / m
    for i in indices:
        estimate[i] = scale * oracle.central_difference(x, int(i), tau, pair=sample_provider())
    return estimate


def sample_lp_sphere(d: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform direction on the unit l1 or l2 sphere.

    l2 uses a normalized Gaussian; l1 normalizes exponential magnitudes
    with independent random signs.
    """
    if p == 2:
        v = rng.standard_normal(d)
        norm = float(np.linalg.norm(v))
        while norm == 0.0:
            v = rng.standard_normal(d)
            norm = float(np.linalg.norm(v))
        return v / norm
    if p == 1:
        magnitudes = rng.exponential(1.0, size=d)
        signs = rng.integers(0, 2, size=d) * 2.0 - 1.0
        v = signs * magnitudes
        return v / np.abs(v).sum()
    raise ValueError(f"p must be 1 or 2, got {p}")


def lp_smoothing_estimate(
    oracle: ZeroOrderOracle,
    x: np.ndarray,
    tau: float,
    p: int,
    batch: int,
    rng: np.random.Generator,
    sample_provider: SampleProvider = _no_samples,
) -> np.ndarray:
    """Directional-smoothing estimate averaged over ``batch`` directions.

    Each direction e drawn uniformly on the unit lp sphere contributes
    ``d * (f(x + tau e) - f(x - tau e)) / (2 tau) * e``. Costs
    ``2 * batch`` oracle calls.
    """
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    if batch < 1:
        raise ValueError(f"batch must be >= 1, got {batch}")
    if p not in (1, 2):
        raise ValueError(f"p must be 1 or 2, got {p}")
    d = oracle.dim
    x = np.asarray(x, dtype=float)
    accum = np.zeros(d)
    for _ in range(batch):
        e = sample_lp_sphere(d, p, rng)
        pair = sample_provider()
        f_plus = oracle.eval(x + tau * e, pair.plus if pair is not None else None)
        f_minus = oracle.eval(x - tau * e, pair.minus if pair is not None else None)
        accum += d * (f_plus - f_minus) / (2.0 * tau) * e
    return accum / batch


@dataclass(frozen=True)
class EstimatorKind:
    """Configuration tag selecting an estimator and its per-step cost.

    ``name`` is one of ``jaguar``, ``jaguar_stochastic``,
    ``full_coordinate`` (with coordinate count ``m``, default all) or
    ``lp_smoothing`` (with sphere order ``p`` and direction count
    ``batch``).
    """

    name: str
    m: Optional[int] = None
    p: int = 2
    batch: int = 1

    _NAMES = ("jaguar", "jaguar_stochastic", "full_coordinate", "lp_smoothing")

    def __post_init__(self) -> None:
        if self.name not in self._NAMES:
            raise ValueError(f"unknown estimator {self.name!r}, expected one of {self._NAMES}")
        if self.m is not None and self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.p not in (1, 2):
            raise ValueError(f"p must be 1 or 2, got {self.p}")
        if self.batch < 1:
            raise ValueError(f"batch must be >= 1, got {self.batch}")

    @property
    def uses_memory(self) -> bool:
        return self.name in ("jaguar", "jaguar_stochastic")

    def init_calls(self, d: int) -> int:
        """Oracle calls spent before the first iteration."""
        return 2 * d if self.uses_memory else 0

    def calls_per_iteration(self, d: int) -> int:
        if self.name in ("jaguar", "jaguar_stochastic"):
            return 2
        if self.name == "full_coordinate":
            return 2 * (self.m if self.m is not None else d)
        return 2 * self.batch
