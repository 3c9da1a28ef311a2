"""Noisy, call-counted zero-order access to objective functions.

Solvers in this package never touch analytic gradients; everything they
learn about an objective flows through :class:`ZeroOrderOracle`, which
applies the configured evaluation noise and counts every scalar function
evaluation exactly once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

__all__ = [
    "NoiseModel",
    "SamplePair",
    "ZeroOrderOracle",
    "RngStreams",
    "make_streams",
    "make_sample_provider",
    "rng_stream",
]

# Fixed spawn keys so each consumer of randomness gets its own stream.
# Adding draws to one consumer never shifts another consumer's sequence.
_STREAM_KEYS = {"noise": 0, "index": 1, "minibatch": 2, "direction": 3, "pick": 4}


def rng_stream(seed: int, name: str) -> np.random.Generator:
    """Return the named PRNG stream derived from one experiment seed."""
    try:
        key = _STREAM_KEYS[name]
    except KeyError:
        raise ValueError(
            f"unknown stream name {name!r}, expected one of {sorted(_STREAM_KEYS)}"
        ) from None
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key,)))


@dataclass
class RngStreams:
    """Disjoint generators for the random choices a solver run makes.

    The oracle owns the noise stream itself; these cover everything else.
    """

    index: np.random.Generator
    minibatch: np.random.Generator
    direction: np.random.Generator
    pick: np.random.Generator


def make_streams(seed: int) -> RngStreams:
    return RngStreams(
        index=rng_stream(seed, "index"),
        minibatch=rng_stream(seed, "minibatch"),
        direction=rng_stream(seed, "direction"),
        pick=rng_stream(seed, "pick"),
    )


@dataclass(frozen=True)
class NoiseModel:
    """Distortion applied to every oracle evaluation.

    Kinds:
      * ``none``     -- evaluations are exact.
      * ``round``    -- values rounded to ``decimals`` decimal places,
                        ties away from zero.
      * ``gaussian`` -- additive N(0, sigma^2) noise, drawn fresh per
                        evaluation from the oracle's own stream.
    """

    kind: str = "none"
    decimals: int = 5
    sigma: float = 0.1

    def __post_init__(self) -> None:
        if self.kind not in ("none", "round", "gaussian"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "round" and self.decimals < 0:
            raise ValueError(f"decimals must be >= 0, got {self.decimals}")
        if self.kind == "gaussian" and self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls(kind="none")

    @classmethod
    def rounding(cls, decimals: int = 5) -> "NoiseModel":
        return cls(kind="round", decimals=decimals)

    @classmethod
    def gaussian(cls, sigma: float = 0.1) -> "NoiseModel":
        return cls(kind="gaussian", sigma=sigma)

    def apply(self, value: float, rng: np.random.Generator) -> float:
        if self.kind == "none":
            return value
        if self.kind == "round":
            scale = 10.0 ** self.decimals
            # round half away from zero, unlike builtin banker's rounding
            return math.copysign(math.floor(abs(value) * scale + 0.5), value) / scale
        return value + self.sigma * rng.standard_normal()


@dataclass(frozen=True)
class SamplePair:
    """Objective samples for the two probe points of one finite difference.

    Under two-point feedback both probes share one sample; under one-point
    feedback the samples are drawn independently.
    """

    plus: Any
    minus: Any


class ZeroOrderOracle:
    """Function-value access with noise, sampling discipline and call counting.

    Parameters
    ----------
    objective : object with ``dim`` and ``value``
        Deterministic objectives are evaluated as ``value(x)``; stochastic
        views (``is_stochastic`` true) as ``value(x, sample)``.
    noise : NoiseModel
    seed : int
        Seeds the oracle's private noise stream.
    feedback : str
        ``deterministic``, ``one_point`` or ``two_point``. Controls how
        sample pairs for finite differences are drawn, see
        :func:`make_sample_provider`.
    """

    def __init__(
        self,
        objective,
        noise: Optional[NoiseModel] = None,
        seed: int = 0,
        feedback: str = "deterministic",
    ) -> None:
        if feedback not in ("deterministic", "one_point", "two_point"):
            raise ValueError(f"unknown feedback mode {feedback!r}")
        self.objective = objective
        self.noise = noise if noise is not None else NoiseModel.none()
        self.feedback = feedback
        self.calls = 0
        self._noise_rng = rng_stream(seed, "noise")

    @property
    def dim(self) -> int:
        return self.objective.dim

    def eval(self, x: np.ndarray, sample: Any = None) -> float:
        """Evaluate the (noisy) objective at ``x``; counts as one call."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected point of shape ({self.dim},), got {x.shape}")
        stochastic = bool(getattr(self.objective, "is_stochastic", False))
        if stochastic and sample is None:
            raise ValueError("stochastic objective requires a sample per evaluation")
        if not stochastic and sample is not None:
            raise ValueError("deterministic objective takes no sample")
        raw = self.objective.value(x, sample) if stochastic else self.objective.value(x)
        self.calls += 1
        return self.noise.apply(float(raw), self._noise_rng)

    def central_difference(
        self,
        x: np.ndarray,
        i: int,
        tau: float,
        pair: Optional[SamplePair] = None,
    ) -> float:
        """Central finite difference along coordinate ``i``; counts two calls."""
        if tau <= 0:
            raise ValueError(f"tau must be > 0, got {tau}")
        x = np.asarray(x, dtype=float)
        if not 0 <= i < self.dim:
            raise ValueError(f"coordinate index {i} out of range for dim {self.dim}")
        x_plus = x.copy()
        x_plus[i] += tau
        x_minus = x.copy()
        x_minus[i] -= tau
        f_plus = self.eval(x_plus, pair.plus if pair is not None else None)
        f_minus = self.eval(x_minus, pair.minus if pair is not None else None)
        return (f_plus - f_minus) / (2.0 * tau)


def make_sample_provider(
    oracle: ZeroOrderOracle, rng: np.random.Generator
) -> Callable[[], Optional[SamplePair]]:
    """Build the per-difference sample source for the oracle's feedback mode.

    Deterministic objectives get a provider that always yields ``None``.
    Stochastic objectives require one- or two-point feedback; two-point
    feedback reuses a single draw for both probe points.
    """
    objective = oracle.objective
    if not getattr(objective, "is_stochastic", False):
        return lambda: None
    if oracle.feedback == "deterministic":
        raise ValueError(
            "stochastic objective needs one_point or two_point feedback"
        )
    if oracle.feedback == "two_point":

        def provider() -> SamplePair:
            shared = objective.sample(rng)
            return SamplePair(plus=shared, minus=shared)

    else:

        def provider() -> SamplePair:
            return SamplePair(plus=objective.sample(rng), minus=objective.sample(rng))

    return provider
