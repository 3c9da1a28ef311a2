"""Benchmark harness and command line.

Experiments are described by flat INI-style config files (sections
``[experiment]``, ``[problem]`` and ``[method]``; see the README for the
grammar). The harness runs every seed, writes one trace CSV per seed plus
a median/IQR summary over fixed oracle-call checkpoints, and can compare
several estimators on the same problem and budget. Identical configs and
seeds produce byte-identical output files.

Exit codes: 0 success, 2 configuration or input error, 3 runtime failure
(non-finite objective, theory-bound violation, uncertified reference).
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .dataio import (
    Dataset,
    LibsvmParseError,
    load_libsvm,
    normalize as normalize_dataset,
    serialize_libsvm,
    synthetic_classification,
)
from .estimators import EstimatorKind
from .feasible_sets import FeasibleSet, L1Ball, L2Ball, Simplex, Unconstrained
from .objectives import (
    LogisticObjective,
    Objective,
    QuadraticObjective,
    StochasticView,
    SvmObjective,
)
from .oracle import NoiseModel
from .solvers import (
    NanError,
    RunConfig,
    RunResult,
    TraceRecord,
    fw_deterministic,
    fw_stochastic,
    gd_jaguar,
    reference_optimum,
)
from .theory_checks import RecursionSpec, check_lemma_bound, random_admissible_spec, simulate_recursion

__all__ = [
    "ConfigError",
    "BenchError",
    "ExperimentSpec",
    "parse_config",
    "config_hash",
    "run_experiment",
    "compare_methods",
    "emit_plotdata",
    "validate_theory",
    "main",
    "cli_entry",
]

TRACE_HEADER = "iter,oracle_calls,f_value,f_gap,grad_err,gamma,eta"

_ESTIMATOR_TOKENS = ("jaguar", "full", "l2smooth", "l1smooth", "jaguar_stochastic")
_SOLVERS = ("fw", "fw_stochastic", "gd")
_OBJECTIVES = ("quadratic", "logistic", "svm")
_SETS = ("simplex", "l1_ball", "l2_ball", "unconstrained")

_EXPERIMENT_KEYS = {"name", "seeds", "budget", "iterations", "output_dir"}
_PROBLEM_KEYS = {
    "objective", "dimension", "diag", "data", "synthetic_rows", "synthetic_dim",
    "synthetic_seed", "separability", "normalize", "c", "batch_size", "set", "radius",
}
_METHOD_KEYS = {
    "solver", "estimator", "m", "batch", "feedback", "tau", "noise", "decimals",
    "sigma", "trace_every", "gamma", "eta", "l",
}

# spec fields that define the problem instance (reference optima are cached per
# problem, independently of method and budget)
_PROBLEM_FIELDS = (
    "objective_kind", "dimension", "diag", "data", "synthetic_rows", "synthetic_dim",
    "synthetic_seed", "separability", "normalize_mode", "C", "set_kind", "radius",
)


class ConfigError(ValueError):
    """Bad configuration or input file; maps to exit code 2."""


class BenchError(RuntimeError):
    """Runtime failure during an experiment; maps to exit code 3."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Fully resolved experiment description (config plus CLI overrides)."""

    name: str
    seeds: Tuple[int, ...]
    budget: int
    budget_kind: str
    output_dir: str
    objective_kind: str
    dimension: Optional[int]
    diag: Optional[Tuple[float, ...]]
    data: str
    synthetic_rows: int
    synthetic_dim: int
    synthetic_seed: int
    separability: float
    normalize_mode: str
    C: float
    batch_size: Optional[int]
    set_kind: str
    radius: float
    solver: str
    estimator: str
    m: Optional[int]
    est_batch: int
    feedback: str
    tau: float
    noise_kind: str
    decimals: int
    sigma: float
    trace_every: int
    gamma: Optional[float]
    eta: Optional[float]
    L: Optional[float]

    def canonical_items(self) -> List[Tuple[str, str]]:
        items = []
        for f in sorted(dataclasses.fields(self), key=lambda f: f.name):
            if f.name == "output_dir":
                continue  # where files land does not change what was run
            items.append((f.name, repr(getattr(self, f.name))))
        return items


def config_hash(spec: ExperimentSpec) -> str:
    payload = "\n".join(f"{key}={value}" for key, value in spec.canonical_items())
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def _parse_number(section: str, key: str, raw: str, kind, what: str):
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected {what}, got {raw!r}") from None


class _SectionView:
    """Typed access to one config section with precise error messages."""

    def __init__(self, parser: configparser.ConfigParser, section: str) -> None:
        self.section = section
        self.raw: Dict[str, str] = dict(parser.items(section)) if parser.has_section(section) else {}

    def check_keys(self, allowed: set) -> None:
        unknown = set(self.raw) - allowed
        if unknown:
            raise ConfigError(
                f"[{self.section}] unknown key(s): {', '.join(sorted(unknown))}"
            )

    def has(self, key: str) -> bool:
        return key in self.raw and self.raw[key].strip() != ""

    def get(self, key: str, default: Optional[str] = None) -> Optional[str]:
        return self.raw[key].strip() if self.has(key) else default

    def get_int(self, key: str, default=None):
        return _parse_number(self.section, key, self.raw[key], int, "an integer") if self.has(key) else default

    def get_float(self, key: str, default=None):
        if not self.has(key):
            return default
        raw = self.raw[key].strip()
        if raw.lower() in ("inf", "infinity"):
            return math.inf
        return _parse_number(self.section, key, raw, float, "a number")

    def get_choice(self, key: str, choices: Sequence[str], default: Optional[str] = None):
        value = self.get(key, default)
        if value is not None and value not in choices:
            raise ConfigError(
                f"[{self.section}] {key}: expected one of {', '.join(choices)}, got {value!r}"
            )
        return value


def _parse_seeds(raw: str) -> Tuple[int, ...]:
    parts = raw.replace(",", " ").split()
    if not parts:
        raise ConfigError("[experiment] seeds: empty")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"[experiment] seeds: expected integers, got {raw!r}") from None


def parse_config(path: str | Path) -> ExperimentSpec:
    """Read and validate an experiment config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read(path)
    except configparser.Error as err:
        raise ConfigError(f"{path}: {err}") from None
    known_sections = {"experiment", "problem", "method"}
    unknown = set(parser.sections()) - known_sections
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")

    exp = _SectionView(parser, "experiment")
    exp.check_keys(_EXPERIMENT_KEYS)
    prob = _SectionView(parser, "problem")
    prob.check_keys(_PROBLEM_KEYS)
    meth = _SectionView(parser, "method")
    meth.check_keys(_METHOD_KEYS)

    if exp.has("budget") and exp.has("iterations"):
        raise ConfigError("[experiment] give either budget (oracle calls) or iterations, not both")
    if exp.has("budget"):
        budget, budget_kind = exp.get_int("budget"), "oracle_calls"
    elif exp.has("iterations"):
        budget, budget_kind = exp.get_int("iterations"), "iterations"
    else:
        raise ConfigError("[experiment] missing budget (oracle calls) or iterations")
    if budget < 1:
        raise ConfigError(f"[experiment] budget must be >= 1, got {budget}")
    name = exp.get("name", path.stem)
    seeds = _parse_seeds(exp.get("seeds", "0"))
    output_dir = exp.get("output_dir", f"results/{name}")

    objective_kind = prob.get_choice("objective", _OBJECTIVES)
    if objective_kind is None:
        raise ConfigError("[problem] missing objective")
    set_kind = prob.get_choice("set", _SETS)
    if set_kind is None:
        raise ConfigError("[problem] missing set")
    dimension = prob.get_int("dimension")
    diag_raw = prob.get("diag")
    diag = None
    if diag_raw is not None:
        try:
            diag = tuple(float(v) for v in diag_raw.split())
        except ValueError:
            raise ConfigError(f"[problem] diag: expected numbers, got {diag_raw!r}") from None
    if objective_kind == "quadratic":
        if dimension is None and diag is None:
            raise ConfigError("[problem] quadratic objective needs dimension (or diag)")
        if dimension is None:
            dimension = len(diag)
        if diag is not None and len(diag) != dimension:
            raise ConfigError(
                f"[problem] diag has {len(diag)} entries but dimension is {dimension}"
            )
    elif dimension is not None or diag is not None:
        raise ConfigError("[problem] dimension/diag only apply to the quadratic objective")

    solver = meth.get_choice("solver", _SOLVERS)
    if solver is None:
        raise ConfigError("[method] missing solver")
    default_estimator = "jaguar_stochastic" if solver == "fw_stochastic" else "jaguar"
    estimator = meth.get_choice("estimator", _ESTIMATOR_TOKENS, default_estimator)
    default_feedback = "one_point" if solver == "fw_stochastic" else "deterministic"
    feedback = meth.get_choice(
        "feedback", ("deterministic", "one_point", "two_point"), default_feedback
    )
    noise_kind = meth.get_choice("noise", ("none", "round", "gaussian"), "none")
    decimals = meth.get_int("decimals", 5)
    sigma = meth.get_float("sigma", 0.1)
    if meth.has("decimals") and noise_kind != "round":
        raise ConfigError("[method] decimals only applies to round noise")
    if meth.has("sigma") and noise_kind != "gaussian":
        raise ConfigError("[method] sigma only applies to gaussian noise")
    m = meth.get_int("m")
    if m is not None and estimator != "full":
        raise ConfigError("[method] m only applies to the full estimator")
    est_batch = meth.get_int("batch", 1)
    if meth.has("batch") and estimator not in ("l1smooth", "l2smooth"):
        raise ConfigError("[method] batch only applies to the smoothing estimators")
    eta = meth.get_float("eta")
    if eta is not None and solver != "fw_stochastic":
        raise ConfigError("[method] eta only applies to fw_stochastic")
    L = meth.get_float("l")
    if L is not None and solver != "gd":
        raise ConfigError("[method] L only applies to gd")
    batch_size = prob.get_int("batch_size")
    if solver == "fw_stochastic":
        if batch_size is None:
            raise ConfigError("[problem] fw_stochastic needs batch_size (minibatch rows)")
        if feedback == "deterministic":
            raise ConfigError("[method] fw_stochastic needs one_point or two_point feedback")
    elif batch_size is not None:
        raise ConfigError("[problem] batch_size only applies to fw_stochastic")

    spec = ExperimentSpec(
        name=name,
        seeds=seeds,
        budget=budget,
        budget_kind=budget_kind,
        output_dir=output_dir,
        objective_kind=objective_kind,
        dimension=dimension,
        diag=diag,
        data=prob.get("data", "synthetic"),
        synthetic_rows=prob.get_int("synthetic_rows", 500),
        synthetic_dim=prob.get_int("synthetic_dim", 50),
        synthetic_seed=prob.get_int("synthetic_seed", 0),
        separability=prob.get_float("separability", 3.0),
        normalize_mode=prob.get_choice("normalize", ("none", "l2_rows", "scale01"), "none"),
        C=prob.get_float("c", 10.0),
        batch_size=batch_size,
        set_kind=set_kind,
        radius=prob.get_float("radius", 1.0),
        solver=solver,
        estimator=estimator,
        m=m,
        est_batch=est_batch,
        feedback=feedback,
        tau=meth.get_float("tau", 1e-3),
        noise_kind=noise_kind,
        decimals=decimals,
        sigma=sigma,
        trace_every=meth.get_int("trace_every", 1),
        gamma=meth.get_float("gamma"),
        eta=eta,
        L=L,
    )
    if spec.tau <= 0:
        raise ConfigError(f"[method] tau must be > 0, got {spec.tau}")
    if spec.trace_every < 1:
        raise ConfigError(f"[method] trace_every must be >= 1, got {spec.trace_every}")
    return spec


# ---------------------------------------------------------------------------
# problem and run construction
# ---------------------------------------------------------------------------


@dataclass
class Problem:
    objective: Objective  # what the solver sees (possibly a stochastic view)
    base: Objective  # deterministic underlying objective, for diagnostics
    fset: FeasibleSet


def _build_dataset(spec: ExperimentSpec) -> Dataset:
    if spec.data == "synthetic":
        data = synthetic_classification(
            spec.synthetic_rows, spec.synthetic_dim, spec.synthetic_seed, spec.separability
        )
    else:
        data = load_libsvm(spec.data)
    return normalize_dataset(data, spec.normalize_mode)


def build_problem(spec: ExperimentSpec) -> Problem:
    if spec.objective_kind == "quadratic":
        if spec.diag is not None:
            base: Objective = QuadraticObjective(np.diag(spec.diag))
        else:
            base = QuadraticObjective.identity(spec.dimension)
    else:
        data = _build_dataset(spec)
        if spec.objective_kind == "logistic":
            base = LogisticObjective(data, C=spec.C)
        else:
            base = SvmObjective(data, C=spec.C)
    objective: Objective = base
    if spec.solver == "fw_stochastic":
        objective = StochasticView(base, batch_size=spec.batch_size)
    d = base.dim
    if spec.set_kind == "simplex":
        fset: FeasibleSet = Simplex(d)
    elif spec.set_kind == "l1_ball":
        fset = L1Ball(d, spec.radius)
    elif spec.set_kind == "l2_ball":
        fset = L2Ball(d, spec.radius)
    else:
        fset = Unconstrained(d)
    return Problem(objective=objective, base=base, fset=fset)


def _estimator_kind(spec: ExperimentSpec) -> EstimatorKind:
    if spec.estimator == "jaguar":
        return EstimatorKind("jaguar")
    if spec.estimator == "jaguar_stochastic":
        return EstimatorKind("jaguar_stochastic")
    if spec.estimator == "full":
        return EstimatorKind("full_coordinate", m=spec.m)
    p = 2 if spec.estimator == "l2smooth" else 1
    return EstimatorKind("lp_smoothing", p=p, batch=spec.est_batch)


def _noise_model(spec: ExperimentSpec) -> NoiseModel:
    if spec.noise_kind == "none":
        return NoiseModel.none()
    if spec.noise_kind == "round":
        return NoiseModel.rounding(spec.decimals)
    return NoiseModel.gaussian(spec.sigma)


def build_run_config(spec: ExperimentSpec, problem: Problem, seed: int) -> RunConfig:
    return RunConfig(
        objective=problem.objective,
        feasible_set=problem.fset,
        estimator=_estimator_kind(spec),
        budget=spec.budget,
        budget_kind=spec.budget_kind,
        noise=_noise_model(spec),
        tau=spec.tau,
        seed=seed,
        trace_every=spec.trace_every,
        feedback=spec.feedback,
        L=spec.L,
        gamma_override=spec.gamma,
        eta_override=spec.eta,
    )


def _solve(spec: ExperimentSpec, config: RunConfig) -> RunResult:
    try:
        if spec.solver == "fw":
            return fw_deterministic(config)
        if spec.solver == "fw_stochastic":
            return fw_stochastic(config)
        return gd_jaguar(config)
    except ValueError as err:
        raise ConfigError(str(err)) from err


# ---------------------------------------------------------------------------
# reference optima
# ---------------------------------------------------------------------------


def _problem_hash(spec: ExperimentSpec) -> str:
    payload = "\n".join(f"{name}={getattr(spec, name)!r}" for name in _PROBLEM_FIELDS)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def reference_value(
    spec: ExperimentSpec, problem: Problem, out_dir: Path
) -> Tuple[Optional[float], Optional[float]]:
    """Certified reference optimum for gap reporting, cached per problem.

    Returns ``(None, None)`` when no trustworthy reference exists (no
    analytic gradient, or certification failed); gaps are then left empty
    rather than guessed.
    """
    base, fset = problem.base, problem.fset
    if isinstance(fset, Unconstrained) and base.f_star is not None:
        return float(base.f_star), 0.0
    if not base.has_gradient or base.L is None or base.L <= 0:
        return None, None
    cache_path = out_dir / "reference_cache.json"
    key = _problem_hash(spec)
    cache: Dict[str, List[float]] = {}
    if cache_path.is_file():
        try:
            cache = json.loads(cache_path.read_text())
        except (ValueError, OSError):
            cache = {}
    if key in cache:
        ref, cert = cache[key]
        return float(ref), float(cert)
    try:
        ref, cert = reference_optimum(base, fset, tol=1e-9)
    except (ValueError, RuntimeError):
        return None, None
    cache[key] = [ref, cert]
    cache_path.write_text(json.dumps(cache, sort_keys=True, indent=1) + "\n")
    return ref, cert


# ---------------------------------------------------------------------------
# trace output
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def _trace_lines(
    trace: Sequence[TraceRecord],
    f_ref: Optional[float],
    meta: Sequence[Tuple[str, str]],
    aborted: bool = False,
) -> List[str]:
    lines = [f"# {key}={value}" for key, value in meta]
    if aborted:
        lines.append("# aborted=objective_not_finite")
    lines.append(TRACE_HEADER)
    for rec in trace:
        gap = "" if f_ref is None else _fmt(rec.f_value - f_ref)
        lines.append(
            f"{rec.iteration},{rec.oracle_calls},{_fmt(rec.f_value)},{gap},"
            f"{_fmt(rec.grad_err)},{_fmt(rec.gamma)},{_fmt(rec.eta)}"
        )
    return lines


def _write_lines(path: Path, lines: Sequence[str]) -> None:
    path.write_text("\n".join(lines) + "\n")


def checkpoints_for(spec: ExperimentSpec, problem: Problem, count: int = 40) -> np.ndarray:
    """Fixed oracle-call grid shared by every seed (and compared method)."""
    kind = _estimator_kind(spec)
    d = problem.objective.dim
    if spec.budget_kind == "oracle_calls":
        total = spec.budget
    else:
        total = kind.init_calls(d) + spec.budget * kind.calls_per_iteration(d)
    start = min(2 * d, total)
    grid = np.geomspace(max(start, 1), max(total, 1), num=count)
    return np.unique(np.rint(grid).astype(int))


def _series_at(trace: Sequence[TraceRecord], cps: np.ndarray) -> np.ndarray:
    calls = np.array([rec.oracle_calls for rec in trace])
    values = np.array([rec.f_value for rec in trace])
    idx = np.searchsorted(calls, cps, side="right") - 1
    idx = np.clip(idx, 0, len(trace) - 1)
    return values[idx]


@dataclass
class ResultBundle:
    """Everything one experiment produced, in memory and on disk."""

    spec: ExperimentSpec
    config_hash: str
    f_ref: Optional[float]
    certificate: Optional[float]
    results: List[RunResult]
    checkpoints: np.ndarray
    f_matrix: np.ndarray  # seeds x checkpoints, clean objective values
    trace_paths: List[Path]
    summary_path: Path

    @property
    def gap_matrix(self) -> Optional[np.ndarray]:
        return None if self.f_ref is None else self.f_matrix - self.f_ref

    @property
    def metric_matrix(self) -> np.ndarray:
        gaps = self.gap_matrix
        return self.f_matrix if gaps is None else gaps

    @property
    def metric_name(self) -> str:
        return "f_value" if self.f_ref is None else "f_gap"

    def final_gaps(self) -> np.ndarray:
        """Per-seed metric at the last checkpoint."""
        return self.metric_matrix[:, -1]


def run_experiment(spec: ExperimentSpec, echo=print) -> ResultBundle:
    """Execute all seeds, write per-seed traces plus the summary CSV."""
    out_dir = Path(spec.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    problem = build_problem(spec)
    f_ref, certificate = reference_value(spec, problem, out_dir)
    chash = config_hash(spec)
    meta = [
        ("config_hash", chash),
        ("code_version", __version__),
        ("reference", "none" if f_ref is None else repr(f_ref)),
    ]
    cps = checkpoints_for(spec, problem)
    results: List[RunResult] = []
    trace_paths: List[Path] = []
    rows = []
    for seed in spec.seeds:
        config = build_run_config(spec, problem, seed)
        trace_path = out_dir / f"{spec.name}_seed{seed}.csv"
        try:
            result = _solve(spec, config)
        except NanError as err:
            _write_lines(
                trace_path,
                _trace_lines(err.trace, f_ref, meta + [("seed", str(seed))], aborted=True),
            )
            raise BenchError(
                f"seed {seed}: {err}; partial trace written to {trace_path}"
            ) from err
        _write_lines(trace_path, _trace_lines(result.trace, f_ref, meta + [("seed", str(seed))]))
        trace_paths.append(trace_path)
        results.append(result)
        rows.append(_series_at(result.trace, cps))
        echo(f"wrote {trace_path}")
    f_matrix = np.vstack(rows)
    bundle = ResultBundle(
        spec=spec,
        config_hash=chash,
        f_ref=f_ref,
        certificate=certificate,
        results=results,
        checkpoints=cps,
        f_matrix=f_matrix,
        trace_paths=trace_paths,
        summary_path=out_dir / f"{spec.name}_summary.csv",
    )
    _write_summary(bundle)
    echo(f"wrote {bundle.summary_path}")
    return bundle


def _quantiles(matrix: np.ndarray):
    med = np.median(matrix, axis=0)
    q25 = np.quantile(matrix, 0.25, axis=0)
    q75 = np.quantile(matrix, 0.75, axis=0)
    return med, q25, q75


def _write_summary(bundle: ResultBundle) -> None:
    lines = [
        f"# config_hash={bundle.config_hash}",
        f"# code_version={__version__}",
        f"# seeds={' '.join(str(s) for s in bundle.spec.seeds)}",
        "oracle_calls,median_f,q25_f,q75_f,median_gap,q25_gap,q75_gap",
    ]
    med_f, q25_f, q75_f = _quantiles(bundle.f_matrix)
    gaps = bundle.gap_matrix
    if gaps is not None:
        med_g, q25_g, q75_g = _quantiles(gaps)
    for j, cp in enumerate(bundle.checkpoints):
        gap_cols = (
            f"{_fmt(med_g[j])},{_fmt(q25_g[j])},{_fmt(q75_g[j])}" if gaps is not None else ",,"
        )
        lines.append(
            f"{cp},{_fmt(med_f[j])},{_fmt(q25_f[j])},{_fmt(q75_f[j])},{gap_cols}"
        )
    _write_lines(bundle.summary_path, lines)


def emit_plotdata(
    bundles: Dict[str, ResultBundle], base: Path, echo=print
) -> Tuple[Path, Path]:
    """Write a long-format plot CSV plus a gnuplot starter script.

    All bundles must share one checkpoint grid (they do when produced by
    ``compare_methods``); mixed grids are an error, not silently aligned.
    """
    if not bundles:
        raise ValueError("no bundles to plot")
    grids = [b.checkpoints for b in bundles.values()]
    for grid in grids[1:]:
        if not np.array_equal(grid, grids[0]):
            raise ValueError("bundles have mismatched checkpoint grids")
    metrics = {b.metric_name for b in bundles.values()}
    metric = "f_gap" if metrics == {"f_gap"} else "f_value"
    base = Path(base)
    hashes = ";".join(f"{m}:{b.config_hash}" for m, b in bundles.items())
    plot_lines = [
        f"# config_hash={hashes}",
        f"# code_version={__version__}",
        f"# metric={metric}",
        "method,oracle_calls,median_gap,q25,q75",
    ]
    for method, bundle in bundles.items():
        matrix = bundle.f_matrix if metric == "f_value" else bundle.gap_matrix
        med, q25, q75 = _quantiles(matrix)
        for j, cp in enumerate(bundle.checkpoints):
            plot_lines.append(f"{method},{cp},{_fmt(med[j])},{_fmt(q25[j])},{_fmt(q75[j])}")
    plotdata_path = base.with_name(base.name + "_plotdata.csv")
    _write_lines(plotdata_path, plot_lines)

    compare_path = base.with_name(base.name + "_compare.csv")
    header = ["oracle_calls"]
    for method in bundles:
        header += [f"{method}_median", f"{method}_q25", f"{method}_q75"]
    compare_lines = [
        f"# config_hash={hashes}",
        f"# code_version={__version__}",
        f"# metric={metric}",
        ",".join(header),
    ]
    stats = {}
    for method, bundle in bundles.items():
        matrix = bundle.f_matrix if metric == "f_value" else bundle.gap_matrix
        stats[method] = _quantiles(matrix)
    for j, cp in enumerate(grids[0]):
        cols = [str(cp)]
        for method in bundles:
            med, q25, q75 = stats[method]
            cols += [_fmt(med[j]), _fmt(q25[j]), _fmt(q75[j])]
        compare_lines.append(",".join(cols))
    _write_lines(compare_path, compare_lines)

    script_path = base.with_name(base.name + "_plot.gp")
    ylabel = "f - f_ref" if metric == "f_gap" else "f"
    plot_parts = []
    for position, method in enumerate(bundles):
        col = 2 + 3 * position
        plot_parts.append(
            f"'{compare_path.name}' every ::1 using 1:{col} with lines lw 2 title '{method}'"
        )
    script = [
        "# generated by jaguar-bench; run with: gnuplot <this file>",
        "set datafile separator ','",
        "set logscale xy",
        "set xlabel 'zero-order oracle calls'",
        f"set ylabel '{ylabel}'",
        "set key top right",
        f"set terminal pngcairo size 900,600",
        f"set output '{base.name}.png'",
        "plot " + ", \\\n     ".join(plot_parts),
    ]
    _write_lines(script_path, script)
    echo(f"wrote {plotdata_path}")
    echo(f"wrote {script_path}")
    return plotdata_path, script_path


def compare_methods(
    spec: ExperimentSpec, methods: Sequence[str], echo=print
) -> Dict[str, ResultBundle]:
    """Run several estimators on one problem, budget and seed list.

    Every method sees the same problem instance, noise model and oracle
    budget; outputs share one checkpoint grid so the curves align.
    """
    if not methods:
        raise ConfigError("no methods to compare")
    bundles: Dict[str, ResultBundle] = {}
    for token in methods:
        if token not in _ESTIMATOR_TOKENS:
            raise ConfigError(
                f"unknown method {token!r}, expected one of {', '.join(_ESTIMATOR_TOKENS)}"
            )
        variant = dataclasses.replace(spec, estimator=token, name=f"{spec.name}_{token}")
        bundles[token] = run_experiment(variant, echo=echo)
    emit_plotdata(bundles, Path(spec.output_dir) / spec.name, echo=echo)
    return bundles


# ---------------------------------------------------------------------------
# theory validation
# ---------------------------------------------------------------------------


def validate_theory(n_specs: int = 1000, horizon: int = 10_000, seed: int = 0, echo=print) -> float:
    """Check the recursion bound on random admissible parameter draws.

    Raises :class:`BenchError` on any violation; returns the worst
    trajectory/bound ratio observed.
    """
    example = RecursionSpec(
        alpha0=1.0, beta0=4.0, k0=8, terms=((2.0, 1.0),), r0=0.0, horizon=max(horizon, 1)
    )
    r = simulate_recursion(example)
    if r[1] != 1.0 / 64.0:
        raise BenchError(f"recursion worked example failed: r_1 = {r[1]!r}, expected 1/64")
    ok, _ = check_lemma_bound(example, r)
    if not ok:
        raise BenchError("recursion worked example violates the closed-form bound")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for index in range(n_specs):
        spec = random_admissible_spec(rng, horizon=horizon)
        ok, ratio = check_lemma_bound(spec, simulate_recursion(spec))
        if not ok:
            raise BenchError(
                f"bound violated (ratio {ratio:.6f}) by admissible spec #{index}: {spec}"
            )
        worst = max(worst, ratio)
    echo(
        f"validated {n_specs} random admissible recursions over horizon {horizon}; "
        f"worst trajectory/bound ratio {worst:.4f}"
    )
    return worst


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def _apply_overrides(spec: ExperimentSpec, args) -> ExperimentSpec:
    if getattr(args, "seed_override", None) is not None:
        spec = dataclasses.replace(spec, seeds=(args.seed_override,))
    if getattr(args, "budget_override", None) is not None:
        spec = dataclasses.replace(
            spec, budget=args.budget_override, budget_kind="oracle_calls"
        )
    if getattr(args, "output_dir", None) is not None:
        spec = dataclasses.replace(spec, output_dir=args.output_dir)
    return spec


def _cmd_run(args) -> int:
    spec = _apply_overrides(parse_config(args.config), args)
    bundle = run_experiment(spec)
    finals = ", ".join(_fmt(v) for v in bundle.final_gaps())
    print(f"final {bundle.metric_name} per seed: {finals}")
    return 0


def _cmd_compare(args) -> int:
    spec = _apply_overrides(parse_config(args.config), args)
    methods = [token.strip() for token in args.methods.split(",") if token.strip()]
    bundles = compare_methods(spec, methods)
    for method, bundle in bundles.items():
        median = float(np.median(bundle.final_gaps()))
        print(f"{method}: median final {bundle.metric_name} = {median!r}")
    return 0


def _cmd_validate_theory(args) -> int:
    validate_theory(n_specs=args.specs, horizon=args.horizon, seed=args.seed)
    return 0


def _cmd_parse_data(args) -> int:
    data = load_libsvm(args.input)
    if args.normalize != "none":
        data = normalize_dataset(data, args.normalize)
    positive = int((data.y > 0).sum())
    print(
        f"rows={data.n_rows} features={data.n_features} "
        f"positive={positive} negative={data.n_rows - positive}"
    )
    if args.output:
        Path(args.output).write_text(serialize_libsvm(data))
        print(f"wrote {args.output}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="jaguar-bench",
        description="Zero-order optimization benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment described by a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed-override", type=int, default=None)
    p_run.add_argument("--budget-override", type=int, default=None)
    p_run.add_argument("--output-dir", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="run several estimators on one problem")
    p_cmp.add_argument("--config", required=True)
    p_cmp.add_argument("--methods", required=True, help="comma-separated estimator names")
    p_cmp.add_argument("--seed-override", type=int, default=None)
    p_cmp.add_argument("--budget-override", type=int, default=None)
    p_cmp.add_argument("--output-dir", default=None)
    p_cmp.set_defaults(func=_cmd_compare)

    p_val = sub.add_parser("validate-theory", help="stress the step-size recursion bound")
    p_val.add_argument("--specs", type=int, default=1000)
    p_val.add_argument("--horizon", type=int, default=10_000)
    p_val.add_argument("--seed", type=int, default=0)
    p_val.set_defaults(func=_cmd_validate_theory)

    p_data = sub.add_parser("parse-data", help="parse and summarize a LIBSVM file")
    p_data.add_argument("--input", required=True)
    p_data.add_argument("--normalize", choices=("none", "l2_rows", "scale01"), default="none")
    p_data.add_argument("--output", default=None)
    p_data.set_defaults(func=_cmd_parse_data)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, LibsvmParseError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (BenchError, RuntimeError, ValueError) as err:
        print(f"runtime error: {err}", file=sys.stderr)
        return 3


def cli_entry() -> None:
    raise SystemExit(main())
