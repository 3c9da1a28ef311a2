"""Numerical validation of the step-size recursion bound.

The convergence proofs reduce to one scalar recursion: a sequence
contracted by ``1 - beta0 / (k + k0)^alpha0`` while absorbing additive
terms ``beta_i / (k + k0)^alpha_i``. The closed-form bound checked here is

    r_k <= 2 * sum_i Q_i / (k + k0)^(alpha_i - alpha0),

with ``Q_i = beta_i / beta0`` except that the first term also absorbs the
initial condition: ``Q_1 = max(beta_1 / beta0, r0 * k0^(alpha_1 - alpha0))``.

``simulate_recursion`` runs the recursion with equality, its worst case,
and ``check_lemma_bound`` compares the trajectory to the bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

__all__ = [
    "RecursionSpec",
    "InadmissibleSpecError",
    "simulate_recursion",
    "check_lemma_bound",
    "random_admissible_spec",
]


class InadmissibleSpecError(ValueError):
    """The recursion parameters violate an admissibility condition."""


@dataclass(frozen=True)
class RecursionSpec:
    """Parameters of one contraction-plus-additive-terms recursion.

    r_{k+1} = (1 - beta0 / (k + k0)^alpha0) * r_k
              + sum_i beta_i / (k + k0)^alpha_i,   k = 0 .. horizon-1.

    Admissibility (checked at construction):
      * alpha0 in [0, 1], beta0 > 0, k0 >= 1 integer, r0 >= 0;
      * if alpha0 == 1: beta0 >= 2 * max(1, max_i alpha_i - 1);
      * if alpha0 < 1: k0 >= ((2 / beta0) * max(1, max_i alpha_i - alpha0))
        ** (1 / (1 - alpha0));
      * beta0 <= k0^alpha0, so the contraction factor never goes negative.
        (The closed-form bound genuinely fails without this: with e.g.
        alpha0 = 1, beta0 = 4, k0 = 1 the factor is -3 and the first step
        already overshoots the bound.)
    """

    alpha0: float
    beta0: float
    k0: int
    terms: Tuple[Tuple[float, float], ...]  # (alpha_i, beta_i) pairs
    r0: float
    horizon: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha0 <= 1.0:
            raise InadmissibleSpecError(f"alpha0 must be in [0, 1], got {self.alpha0}")
        if self.beta0 <= 0:
            raise InadmissibleSpecError(f"beta0 must be > 0, got {self.beta0}")
        if self.k0 < 1:
            raise InadmissibleSpecError(f"k0 must be >= 1, got {self.k0}")
        if self.r0 < 0:
            raise InadmissibleSpecError(f"r0 must be >= 0, got {self.r0}")
        if self.horizon < 0:
            raise InadmissibleSpecError(f"horizon must be >= 0, got {self.horizon}")
        for alpha, beta in self.terms:
            if beta <= 0:
                raise InadmissibleSpecError(f"additive beta must be > 0, got {beta}")
        max_alpha = max((a for a, _ in self.terms), default=self.alpha0)
        if self.alpha0 == 1.0:
            needed = 2.0 * max(1.0, max_alpha - 1.0)
            if self.beta0 < needed:
                raise InadmissibleSpecError(
                    f"alpha0 = 1 requires beta0 >= 2 * max(1, max alpha_i - 1) = {needed}, "
                    f"got beta0 = {self.beta0}"
                )
        else:
            needed = ((2.0 / self.beta0) * max(1.0, max_alpha - self.alpha0)) ** (
                1.0 / (1.0 - self.alpha0)
            )
            if self.k0 < needed:
                raise InadmissibleSpecError(
                    f"alpha0 < 1 requires k0 >= {needed}, got k0 = {self.k0}"
                )
        if self.beta0 > self.k0**self.alpha0:
            raise InadmissibleSpecError(
                f"contraction factor is negative at k = 0: beta0 = {self.beta0} exceeds "
                f"k0^alpha0 = {self.k0**self.alpha0}"
            )


def simulate_recursion(spec: RecursionSpec) -> np.ndarray:
    """Run the recursion with equality; returns r_0 .. r_horizon."""
    ks = np.arange(spec.horizon, dtype=float) + spec.k0
    contraction = 1.0 - spec.beta0 / ks**spec.alpha0
    additive = np.zeros(spec.horizon)
    for alpha, beta in spec.terms:
        additive += beta / ks**alpha
    r = np.empty(spec.horizon + 1)
    r[0] = spec.r0
    for k in range(spec.horizon):
        r[k + 1] = contraction[k] * r[k] + additive[k]
    return r


def check_lemma_bound(spec: RecursionSpec, r: np.ndarray) -> Tuple[bool, float]:
    """Compare a trajectory against the closed-form bound.

    Returns ``(ok, max_ratio)`` where ``max_ratio`` is the largest
    r_k / bound_k over the horizon; any value above 1 (modulo float slack)
    is a violation.
    """
    if not spec.terms:
        raise ValueError("the closed-form bound needs at least one additive term")
    r = np.asarray(r, dtype=float)
    if r.shape != (spec.horizon + 1,):
        raise ValueError(f"expected trajectory of shape ({spec.horizon + 1},), got {r.shape}")
    ks = np.arange(spec.horizon + 1, dtype=float) + spec.k0
    bound = np.zeros(spec.horizon + 1)
    for position, (alpha, beta) in enumerate(spec.terms):
        q = beta / spec.beta0
        if position == 0:
            q = max(q, spec.r0 * spec.k0 ** (alpha - spec.alpha0))
        bound += 2.0 * q / ks ** (alpha - spec.alpha0)
    ratios = r / bound
    max_ratio = float(ratios.max())
    return max_ratio <= 1.0 + 1e-9, max_ratio


def random_admissible_spec(
    rng: np.random.Generator, horizon: int = 10_000, max_terms: int = 3
) -> RecursionSpec:
    """Draw a random spec satisfying every admissibility condition.

    Used by the validation suite: admissible specs must never violate the
    closed-form bound, whatever the draw.
    """
    mode = rng.integers(0, 3)
    if mode == 0:
        alpha0 = 0.0
    elif mode == 1:
        alpha0 = 1.0
    else:
        alpha0 = float(rng.uniform(0.05, 0.95))
    n_terms = int(rng.integers(1, max_terms + 1))
    terms = tuple(
        (float(rng.uniform(-1.0, 4.0)), float(rng.uniform(0.1, 10.0)))
        for _ in range(n_terms)
    )
    max_alpha = max(a for a, _ in terms)
    if alpha0 == 1.0:
        beta0 = 2.0 * max(1.0, max_alpha - 1.0) * float(rng.uniform(1.0, 2.0))
        k0 = int(np.ceil(beta0 * float(rng.uniform(1.0, 3.0))))
    else:
        beta0 = float(rng.uniform(0.1, 1.0))  # <= 1 <= k0^alpha0 keeps contraction >= 0
        needed = ((2.0 / beta0) * max(1.0, max_alpha - alpha0)) ** (1.0 / (1.0 - alpha0))
        k0 = int(np.ceil(needed * float(rng.uniform(1.0, 2.0))))
    r0 = float(rng.uniform(0.0, 10.0))
    return RecursionSpec(
        alpha0=alpha0, beta0=beta0, k0=max(k0, 1), terms=terms, r0=r0, horizon=horizon
    )
