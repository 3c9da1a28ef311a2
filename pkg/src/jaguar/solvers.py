"""Frank-Wolfe and gradient-descent loops driven by zero-order estimates.

Every solver is an instance of one generic pattern: refresh the gradient
estimate at the current point, then apply a step map. ``run_generic``
exposes that pattern directly; ``fw_deterministic``, ``fw_stochastic``
and ``gd_jaguar`` wire in the projection-free step, the momentum-averaged
stochastic step and the constant-step descent map respectively.

Traces are bit-reproducible: all randomness flows from the run seed
through named disjoint streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .estimators import (
    EstimatorKind,
    full_coordinate_estimate,
    init_memory,
    jaguar_step,
    jaguar_stochastic_step,
    lp_smoothing_estimate,
)
from .feasible_sets import FeasibleSet, Unconstrained
from .oracle import NoiseModel, ZeroOrderOracle, make_sample_provider, make_streams, rng_stream

__all__ = [
    "Schedule",
    "RunConfig",
    "TraceRecord",
    "RunResult",
    "NanError",
    "run_generic",
    "fw_deterministic",
    "fw_stochastic",
    "gd_jaguar",
    "reference_optimum",
]

StepMap = Callable[[np.ndarray, np.ndarray, int], np.ndarray]
IterateCallback = Callable[[int, np.ndarray], None]


class NanError(RuntimeError):
    """Objective became non-finite; carries the trace recorded so far."""

    def __init__(self, message: str, trace: List["TraceRecord"]) -> None:
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class Schedule:
    """Step-size laws for the three solver families.

    ``fw_det``: gamma_k = 4 / (k + 8 d).
    ``fw_stoch``: gamma_k = 4 / (k + 8 d^1.5), eta_k = 4 / (k + 8 d^1.5)^(2/3).
    ``gd_const``: gamma = 1 / (4 d L) for every k.
    """

    kind: str
    d: int
    L: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in ("fw_det", "fw_stoch", "gd_const"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.kind == "gd_const" and (self.L is None or self.L <= 0):
            raise ValueError("gd_const schedule needs L > 0")

    def gamma(self, k: int) -> float:
        if self.kind == "fw_det":
            return 4.0 / (k + 8.0 * self.d)
        if self.kind == "fw_stoch":
            return 4.0 / (k + 8.0 * self.d**1.5)
        return 1.0 / (4.0 * self.d * self.L)

    def eta(self, k: int) -> float:
        if self.kind != "fw_stoch":
            raise ValueError(f"schedule {self.kind!r} has no momentum weight")
        return 4.0 / (k + 8.0 * self.d**1.5) ** (2.0 / 3.0)


@dataclass
class TraceRecord:
    """One traced iterate. ``oracle_calls`` is cumulative and monotone."""

    iteration: int
    oracle_calls: int
    f_value: float
    grad_err: Optional[float]
    gamma: Optional[float]
    eta: Optional[float]


@dataclass
class RunConfig:
    """Everything needed to reproduce one solver run bit for bit."""

    objective: object
    feasible_set: FeasibleSet
    estimator: EstimatorKind
    budget: int
    budget_kind: str = "oracle_calls"  # or "iterations"
    noise: NoiseModel = field(default_factory=NoiseModel.none)
    tau: float = 1e-3
    seed: int = 0
    trace_every: int = 1
    feedback: str = "deterministic"
    x0: Optional[np.ndarray] = None
    L: Optional[float] = None
    gamma_override: Optional[float] = None
    eta_override: Optional[float] = None

    def __post_init__(self) -> None:
        if self.budget_kind not in ("oracle_calls", "iterations"):
            raise ValueError(f"unknown budget kind {self.budget_kind!r}")
        if self.budget < 0:
            raise ValueError(f"budget must be >= 0, got {self.budget}")
        if self.trace_every < 1:
            raise ValueError(f"trace_every must be >= 1, got {self.trace_every}")
        if self.tau <= 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")


@dataclass
class RunResult:
    x: np.ndarray
    trace: List[TraceRecord]
    iterations: int
    oracle_calls: int
    # gradient-descent candidate iterates; None for other solvers
    x_uniform: Optional[np.ndarray] = None
    k_uniform: Optional[int] = None
    x_min_grad: Optional[np.ndarray] = None
    k_min_grad: Optional[int] = None


def _planned_iterations(config: RunConfig, d: int) -> int:
    if config.budget_kind == "iterations":
        return int(config.budget)
    init = config.estimator.init_calls(d)
    per = config.estimator.calls_per_iteration(d)
    if config.budget < init:
        raise ValueError(
            f"oracle budget {config.budget} cannot cover the {init}-call initialization"
        )
    return (int(config.budget) - init) // per


def _setup(config: RunConfig):
    objective = config.objective
    fset = config.feasible_set
    if fset.dim != objective.dim:
        raise ValueError(
            f"feasible set dim {fset.dim} does not match objective dim {objective.dim}"
        )
    oracle = ZeroOrderOracle(
        objective, noise=config.noise, seed=config.seed, feedback=config.feedback
    )
    streams = make_streams(config.seed)
    if config.x0 is None:
        x0 = fset.start_point()
    else:
        x0 = np.asarray(config.x0, dtype=float)
        if not fset.contains(x0, tol=1e-9):
            raise ValueError("x0 is not in the feasible set")
    return oracle, streams, x0


def _make_estimate_fn(config: RunConfig, oracle, streams, x0):
    """Bind the configured estimator into a ``(k, x) -> estimate`` closure."""
    kind = config.estimator
    d = oracle.dim
    provider = make_sample_provider(oracle, streams.minibatch)
    if kind.name == "jaguar":
        state = init_memory(oracle, x0, config.tau, provider)

        def estimate(k: int, x: np.ndarray) -> np.ndarray:
            return jaguar_step(state, oracle, x, streams.index, provider)

        return estimate, state.h.copy()
    if kind.name == "full_coordinate":
        m = kind.m if kind.m is not None else d
        if m > d:
            raise ValueError(f"full_coordinate m={m} exceeds dimension {d}")

        def estimate(k: int, x: np.ndarray) -> np.ndarray:
            return full_coordinate_estimate(oracle, x, config.tau, m, streams.index, provider)

        return estimate, None
    if kind.name == "lp_smoothing":

        def estimate(k: int, x: np.ndarray) -> np.ndarray:
            return lp_smoothing_estimate(
                oracle, x, config.tau, kind.p, kind.batch, streams.direction, provider
            )

        return estimate, None
    raise ValueError(f"estimator {kind.name!r} is not usable here; see fw_stochastic")


def _run_loop(
    config: RunConfig,
    oracle,
    x0: np.ndarray,
    estimate_fn,
    init_estimate: Optional[np.ndarray],
    proc: StepMap,
    gamma_fn,
    eta_fn,
    iterate_callback: Optional[IterateCallback],
) -> RunResult:
    objective = config.objective
    clean_value = (
        objective.full_value
        if getattr(objective, "is_stochastic", False)
        else objective.value
    )
    grad = objective.gradient if objective.has_gradient else None
    n_iters = _planned_iterations(config, oracle.dim)
    records: List[TraceRecord] = []

    def emit(k: int, x: np.ndarray, est: Optional[np.ndarray], gamma, eta) -> None:
        f = float(clean_value(x))
        grad_err = None
        if grad is not None and est is not None:
            grad_err = float(np.linalg.norm(est - grad(x)))
        records.append(TraceRecord(k, oracle.calls, f, grad_err, gamma, eta))
        if not math.isfinite(f):
            raise NanError(f"objective is not finite at iteration {k}", records)

    x = x0
    if iterate_callback is not None:
        iterate_callback(0, x)
    emit(0, x, init_estimate, None, None)
    for k in range(n_iters):
        est = estimate_fn(k, x)
        x = proc(x, est, k)
        if iterate_callback is not None:
            iterate_callback(k + 1, x)
        if (k + 1) % config.trace_every == 0 or k + 1 == n_iters:
            emit(
                k + 1,
                x,
                est,
                gamma_fn(k) if gamma_fn is not None else None,
                eta_fn(k) if eta_fn is not None else None,
            )
    return RunResult(x=x, trace=records, iterations=n_iters, oracle_calls=oracle.calls)


def run_generic(
    proc: StepMap,
    config: RunConfig,
    gamma_fn=None,
    eta_fn=None,
    iterate_callback: Optional[IterateCallback] = None,
) -> RunResult:
    """Run estimate-then-step with an arbitrary step map ``proc(x, est, k)``.

    The Frank-Wolfe and gradient-descent solvers below are thin wrappers
    over this loop, so a hand-built step map reproduces their traces
    exactly. ``gamma_fn``/``eta_fn`` only annotate the trace.
    """
    if config.estimator.name == "jaguar_stochastic":
        raise ValueError("jaguar_stochastic needs the momentum schedule; use fw_stochastic")
    oracle, streams, x0 = _setup(config)
    estimate_fn, init_estimate = _make_estimate_fn(config, oracle, streams, x0)
    return _run_loop(
        config, oracle, x0, estimate_fn, init_estimate, proc, gamma_fn, eta_fn, iterate_callback
    )


def _fw_proc(fset: FeasibleSet, gamma_fn) -> StepMap:
    def proc(x: np.ndarray, est: np.ndarray, k: int) -> np.ndarray:
        s = fset.lmo(est)
        return x + gamma_fn(k) * (s - x)

    return proc


def _constant(value: float):
    return lambda k: value


def fw_deterministic(
    config: RunConfig, iterate_callback: Optional[IterateCallback] = None
) -> RunResult:
    """Projection-free descent with gamma_k = 4 / (k + 8 d).

    The memory estimator is the default; the fresh-coordinate and
    smoothing baselines drop in unchanged under the same schedule.
    """
    fset = config.feasible_set
    if isinstance(fset, Unconstrained):
        raise ValueError("Frank-Wolfe needs a compact feasible set; use gd_jaguar")
    if config.estimator.name == "jaguar_stochastic":
        raise ValueError("use fw_stochastic for the momentum estimator")
    schedule = Schedule("fw_det", d=config.objective.dim)
    gamma_fn = (
        _constant(config.gamma_override) if config.gamma_override is not None else schedule.gamma
    )
    proc = _fw_proc(fset, gamma_fn)
    return run_generic(proc, config, gamma_fn=gamma_fn, iterate_callback=iterate_callback)


def fw_stochastic(
    config: RunConfig, iterate_callback: Optional[IterateCallback] = None
) -> RunResult:
    """Projection-free descent for stochastic objectives.

    Per iteration the momentum estimator draws one coordinate and one
    sample pair, spends two oracle calls, and the step uses
    gamma_k = 4 / (k + 8 d^1.5) with momentum weight
    eta_k = 4 / (k + 8 d^1.5)^(2/3).
    """
    objective = config.objective
    if not getattr(objective, "is_stochastic", False):
        raise ValueError("objective is deterministic; use fw_deterministic")
    if config.feedback not in ("one_point", "two_point"):
        raise ValueError("fw_stochastic needs one_point or two_point feedback")
    fset = config.feasible_set
    if isinstance(fset, Unconstrained):
        raise ValueError("Frank-Wolfe needs a compact feasible set; use gd_jaguar")
    d = objective.dim
    schedule = Schedule("fw_stoch", d=d)
    gamma_fn = (
        _constant(config.gamma_override) if config.gamma_override is not None else schedule.gamma
    )
    oracle, streams, x0 = _setup(config)
    kind = config.estimator
    if kind.name == "jaguar_stochastic":
        eta_fn = (
            _constant(config.eta_override) if config.eta_override is not None else schedule.eta
        )
        provider = make_sample_provider(oracle, streams.minibatch)
        state = init_memory(oracle, x0, config.tau, provider, with_momentum=True)

        def estimate(k: int, x: np.ndarray) -> np.ndarray:
            return jaguar_stochastic_step(
                state, oracle, x, streams.index, eta_fn(k), provider
            )

        init_estimate = state.g.copy()
    else:
        eta_fn = None
        estimate, init_estimate = _make_estimate_fn(config, oracle, streams, x0)
    proc = _fw_proc(fset, gamma_fn)
    return _run_loop(
        config, oracle, x0, estimate, init_estimate, proc, gamma_fn, eta_fn, iterate_callback
    )


def gd_jaguar(
    config: RunConfig, iterate_callback: Optional[IterateCallback] = None
) -> RunResult:
    """Unconstrained descent x <- x - gamma h with constant gamma = 1/(4 d L).

    Besides the last iterate, the result carries the two usual candidate
    answers: an iterate drawn uniformly from x^0..x^N and, when an
    analytic gradient exists, the iterate with the smallest gradient norm.
    """
    objective = config.objective
    if not isinstance(config.feasible_set, Unconstrained):
        raise ValueError("gradient descent runs unconstrained; use a Frank-Wolfe solver")
    if config.estimator.name == "jaguar_stochastic":
        raise ValueError("use fw_stochastic for the momentum estimator")
    d = objective.dim
    L = config.L if config.L is not None else objective.L
    if L is None or L <= 0:
        raise ValueError("gd_jaguar needs a smoothness constant L > 0")
    if config.gamma_override is not None:
        gamma = float(config.gamma_override)
    else:
        gamma = Schedule("gd_const", d=d, L=float(L)).gamma(0)

    def proc(x: np.ndarray, est: np.ndarray, k: int) -> np.ndarray:
        return x - gamma * est

    n_iters = _planned_iterations(config, d)
    k_uniform = int(rng_stream(config.seed, "pick").integers(n_iters + 1))
    grad = objective.gradient if objective.has_gradient else None
    picked = {"x": None}
    best = {"norm": math.inf, "x": None, "k": None}

    def track(k: int, x: np.ndarray) -> None:
        if k == k_uniform:
            picked["x"] = x.copy()
        if grad is not None:
            norm = float(np.linalg.norm(grad(x)))
            if norm < best["norm"]:
                best.update(norm=norm, x=x.copy(), k=k)
        if iterate_callback is not None:
            iterate_callback(k, x)

    result = run_generic(proc, config, gamma_fn=_constant(gamma), iterate_callback=track)
    result.x_uniform = picked["x"]
    result.k_uniform = k_uniform
    result.x_min_grad = best["x"]
    result.k_min_grad = best["k"]
    return result


# ---------------------------------------------------------------------------
# certified reference optima for gap reporting
# ---------------------------------------------------------------------------


def _project_simplex(v: np.ndarray, z: float) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.shape[0] + 1)
    rho = int(np.nonzero(u - (css - z) / idx > 0)[0][-1])
    theta = (css[rho] - z) / (rho + 1)
    return np.maximum(v - theta, 0.0)


def _project(fset: FeasibleSet, v: np.ndarray) -> np.ndarray:
    from .feasible_sets import L1Ball, L2Ball, Simplex

    if isinstance(fset, Unconstrained):
        return v
    if isinstance(fset, Simplex):
        return _project_simplex(v, 1.0)
    if isinstance(fset, L2Ball):
        norm = float(np.linalg.norm(v))
        return v if norm <= fset.radius else v * (fset.radius / norm)
    if isinstance(fset, L1Ball):
        if float(np.abs(v).sum()) <= fset.radius:
            return v
        return np.sign(v) * _project_simplex(np.abs(v), fset.radius)
    raise TypeError(f"no projection for {type(fset).__name__}")


def reference_optimum(
    objective, fset: FeasibleSet, tol: float = 1e-9, max_iters: int = 200_000
) -> tuple[float, float]:
    """Certified reference value for objective-gap reporting.

    Runs projected gradient descent with the analytic gradient, then
    certifies closeness to the optimum: over a compact set the linear
    minimization gap <grad, x - s> bounds f(x) - f*; unconstrained it is
    ||grad||^2 / (2 mu), needing strong convexity. Returns
    ``(reference, certificate)`` with reference = f(x) - certificate, so
    reference <= f* and gaps measured against it are nonnegative and at
    most ``certificate`` above the truth.
    """
    if not objective.has_gradient:
        raise ValueError("reference optimum needs an analytic gradient")
    L = objective.L
    if L is None or L <= 0:
        raise ValueError("reference optimum needs a smoothness constant L > 0")
    unconstrained = isinstance(fset, Unconstrained)
    if unconstrained and (objective.mu is None or objective.mu <= 0):
        raise ValueError("unconstrained reference needs strong convexity (mu > 0)")
    x = fset.start_point()
    step = 1.0 / float(L)
    certificate = math.inf
    for _ in range(max_iters):
        g = objective.gradient(x)
        if unconstrained:
            certificate = float(g @ g) / (2.0 * objective.mu)
        else:
            certificate = float(g @ (x - fset.lmo(g)))
        if certificate <= tol:
            break
        x = _project(fset, x - step * g)
    else:
        raise RuntimeError(
            f"reference optimum not certified to {tol} within {max_iters} iterations "
            f"(certificate {certificate:.3e})"
        )
    # rounding can push the duality gap a hair below zero; it is a gap
    certificate = max(certificate, 0.0)
    value = float(objective.value(x))
    return value - certificate, certificate
