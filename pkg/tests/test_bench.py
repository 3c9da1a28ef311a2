import dataclasses
import json

import numpy as np
import pytest

from jaguar.bench import (
    BenchError,
    ConfigError,
    TRACE_HEADER,
    build_problem,
    checkpoints_for,
    compare_methods,
    config_hash,
    emit_plotdata,
    main,
    parse_config,
    run_experiment,
    validate_theory,
)
from jaguar.feasible_sets import L1Ball, Simplex, Unconstrained
from jaguar.objectives import StochasticView

BASE = """\
[experiment]
name = unit
seeds = 0 1
budget = 300
output_dir = {out}

[problem]
objective = quadratic
dimension = 6
set = simplex

[method]
solver = fw
estimator = jaguar
tau = 1e-4
trace_every = 5
"""


def write_config(tmp_path, text=None, **fmt):
    path = tmp_path / "exp.cfg"
    fmt.setdefault("out", str(tmp_path / "results"))
    path.write_text((text or BASE).format(**fmt))
    return path


def quiet(*args, **kwargs):
    pass


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def test_parse_basic_config(tmp_path):
    spec = parse_config(write_config(tmp_path))
    assert spec.name == "unit"
    assert spec.seeds == (0, 1)
    assert spec.budget == 300
    assert spec.budget_kind == "oracle_calls"
    assert spec.objective_kind == "quadratic"
    assert spec.dimension == 6
    assert spec.set_kind == "simplex"
    assert spec.solver == "fw"
    assert spec.estimator == "jaguar"
    assert spec.tau == 1e-4
    assert spec.trace_every == 5
    assert spec.feedback == "deterministic"
    assert spec.noise_kind == "none"


def test_parse_defaults(tmp_path):
    path = tmp_path / "minimal.cfg"
    path.write_text(
        "[experiment]\nbudget = 100\n"
        "[problem]\nobjective = quadratic\ndimension = 3\nset = simplex\n"
        "[method]\nsolver = fw\n"
    )
    spec = parse_config(path)
    assert spec.name == "minimal"  # falls back to the file stem
    assert spec.seeds == (0,)
    assert spec.estimator == "jaguar"
    assert spec.tau == 1e-3
    assert spec.trace_every == 1
    assert spec.output_dir == "results/minimal"


def test_parse_diag_infers_dimension(tmp_path):
    path = tmp_path / "diag.cfg"
    path.write_text(
        "[experiment]\nbudget = 100\n"
        "[problem]\nobjective = quadratic\ndiag = 1.0 2.0 4.0\nset = unconstrained\n"
        "[method]\nsolver = gd\n"
    )
    spec = parse_config(path)
    assert spec.dimension == 3
    assert spec.diag == (1.0, 2.0, 4.0)


def test_parse_comma_separated_seeds(tmp_path):
    path = write_config(tmp_path, BASE.replace("seeds = 0 1", "seeds = 3,4,5"))
    assert parse_config(path).seeds == (3, 4, 5)


def test_parse_stochastic_defaults(tmp_path):
    path = tmp_path / "stoch.cfg"
    path.write_text(
        "[experiment]\nbudget = 1000\n"
        "[problem]\nobjective = logistic\nbatch_size = 8\nset = simplex\n"
        "[method]\nsolver = fw_stochastic\ntau = 0.3\n"
    )
    spec = parse_config(path)
    assert spec.estimator == "jaguar_stochastic"
    assert spec.feedback == "one_point"
    assert spec.batch_size == 8


@pytest.mark.parametrize(
    "mutation, message",
    [
        (("budget = 300", "budget = 300\niterations = 5"), "not both"),
        (("budget = 300", "nothing = 1"), "unknown key"),
        (("objective = quadratic", "objective = rosenbrock"), "expected one of"),
        (("solver = fw", "solver = adam"), "expected one of"),
        (("dimension = 6", ""), "needs dimension"),
        (("set = simplex", ""), "missing set"),
        (("tau = 1e-4", "tau = 0"), "tau"),
        (("seeds = 0 1", "seeds = one two"), "integers"),
        (("trace_every = 5", "trace_every = 0"), "trace_every"),
        (("estimator = jaguar", "estimator = jaguar\nm = 2"), "only applies to the full"),
        (("estimator = jaguar", "estimator = jaguar\neta = 0.5"), "fw_stochastic"),
        (("dimension = 6", "dimension = 6\nbatch_size = 4"), "batch_size only"),
        (("tau = 1e-4", "tau = 1e-4\nsigma = 0.5"), "sigma only"),
    ],
)
def test_parse_rejects_bad_configs(tmp_path, mutation, message):
    old, new = mutation
    with pytest.raises(ConfigError, match=message):
        parse_config(write_config(tmp_path, BASE.replace(old, new)))


def test_parse_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "nope.cfg")


def test_fw_stochastic_requires_batch_size(tmp_path):
    path = tmp_path / "s.cfg"
    path.write_text(
        "[experiment]\nbudget = 1000\n"
        "[problem]\nobjective = logistic\nset = simplex\n"
        "[method]\nsolver = fw_stochastic\n"
    )
    with pytest.raises(ConfigError, match="batch_size"):
        parse_config(path)


def test_inline_comments_are_stripped(tmp_path):
    path = write_config(tmp_path, BASE.replace("budget = 300", "budget = 300  # calls"))
    assert parse_config(path).budget == 300


# ---------------------------------------------------------------------------
# hashing
# ---------------------------------------------------------------------------


def test_config_hash_is_stable(tmp_path):
    spec_a = parse_config(write_config(tmp_path))
    spec_b = parse_config(write_config(tmp_path))
    assert config_hash(spec_a) == config_hash(spec_b)
    assert len(config_hash(spec_a)) == 12


def test_config_hash_tracks_content_not_location(tmp_path):
    spec = parse_config(write_config(tmp_path))
    moved = dataclasses.replace(spec, output_dir="elsewhere")
    assert config_hash(moved) == config_hash(spec)
    changed = dataclasses.replace(spec, tau=1e-3)
    assert config_hash(changed) != config_hash(spec)


# ---------------------------------------------------------------------------
# problem construction
# ---------------------------------------------------------------------------


def test_build_quadratic_problem(tmp_path):
    problem = build_problem(parse_config(write_config(tmp_path)))
    assert problem.objective.dim == 6
    assert isinstance(problem.fset, Simplex)
    assert problem.objective is problem.base


def test_build_logistic_stochastic_problem(tmp_path):
    path = tmp_path / "s.cfg"
    path.write_text(
        "[experiment]\nbudget = 1000\n"
        "[problem]\nobjective = logistic\nsynthetic_rows = 40\nsynthetic_dim = 5\n"
        "batch_size = 4\nset = l1_ball\nradius = 2.0\n"
        "[method]\nsolver = fw_stochastic\ntau = 0.3\n"
    )
    problem = build_problem(parse_config(path))
    assert isinstance(problem.objective, StochasticView)
    assert problem.objective.batch_size == 4
    assert isinstance(problem.fset, L1Ball)
    assert problem.fset.radius == 2.0
    assert problem.objective.dim == 5


def test_build_svm_problem_has_bias_dimension(tmp_path):
    path = tmp_path / "svm.cfg"
    path.write_text(
        "[experiment]\nbudget = 1000\n"
        "[problem]\nobjective = svm\nsynthetic_rows = 30\nsynthetic_dim = 4\nset = l2_ball\n"
        "[method]\nsolver = fw\n"
    )
    problem = build_problem(parse_config(path))
    assert problem.objective.dim == 5
    assert problem.fset.dim == 5


def test_build_gd_problem_is_unconstrained(tmp_path):
    path = tmp_path / "gd.cfg"
    path.write_text(
        "[experiment]\nbudget = 1000\n"
        "[problem]\nobjective = quadratic\ndimension = 4\nset = unconstrained\n"
        "[method]\nsolver = gd\n"
    )
    problem = build_problem(parse_config(path))
    assert isinstance(problem.fset, Unconstrained)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------


def test_checkpoints_cover_the_budget(tmp_path):
    spec = parse_config(write_config(tmp_path))
    cps = checkpoints_for(spec, build_problem(spec))
    assert cps.dtype.kind == "i"
    assert np.all(np.diff(cps) > 0)
    assert cps[0] == 12  # 2 d
    assert cps[-1] == 300


def test_checkpoints_for_iteration_budget(tmp_path):
    path = write_config(tmp_path, BASE.replace("budget = 300", "iterations = 50"))
    spec = parse_config(path)
    cps = checkpoints_for(spec, build_problem(spec))
    assert cps[-1] == 2 * 6 + 2 * 50


# ---------------------------------------------------------------------------
# running experiments
# ---------------------------------------------------------------------------


def test_run_experiment_writes_all_outputs(tmp_path):
    spec = parse_config(write_config(tmp_path))
    bundle = run_experiment(spec, echo=quiet)
    assert [p.name for p in bundle.trace_paths] == ["unit_seed0.csv", "unit_seed1.csv"]
    text = bundle.trace_paths[0].read_text()
    lines = text.splitlines()
    assert lines[0].startswith("# config_hash=")
    assert f"# config_hash={bundle.config_hash}" in lines
    assert "# code_version=" in text
    assert "# seed=0" in text
    header_at = next(i for i, ln in enumerate(lines) if not ln.startswith("#"))
    assert lines[header_at] == TRACE_HEADER
    first_row = lines[header_at + 1].split(",")
    assert first_row[0] == "0"
    assert first_row[1] == "12"
    # reference exists for the quadratic, so the gap column is filled
    assert first_row[3] != ""
    assert bundle.summary_path.read_text().splitlines()[3].startswith("oracle_calls,")
    assert bundle.f_matrix.shape == (2, len(bundle.checkpoints))


def test_run_experiment_gap_empty_without_reference(tmp_path):
    path = tmp_path / "svm.cfg"
    path.write_text(
        "[experiment]\nname = svmrun\nbudget = 200\noutput_dir = {}\n"
        "[problem]\nobjective = svm\nsynthetic_rows = 20\nsynthetic_dim = 4\nset = simplex\n"
        "[method]\nsolver = fw\ntau = 1e-3\n".format(tmp_path / "svm_out")
    )
    bundle = run_experiment(parse_config(path), echo=quiet)
    assert bundle.f_ref is None
    lines = bundle.trace_paths[0].read_text().splitlines()
    assert "# reference=none" in lines
    row = lines[next(i for i, ln in enumerate(lines) if not ln.startswith("#")) + 1]
    assert row.split(",")[3] == ""
    assert bundle.metric_name == "f_value"


def test_run_experiment_reruns_identically(tmp_path):
    spec = parse_config(write_config(tmp_path))
    first = run_experiment(spec, echo=quiet)
    blobs = [p.read_bytes() for p in first.trace_paths]
    second = run_experiment(spec, echo=quiet)
    assert [p.read_bytes() for p in second.trace_paths] == blobs


def test_reference_cache_round_trip(tmp_path):
    spec = parse_config(write_config(tmp_path))
    a = run_experiment(spec, echo=quiet)
    cache = json.loads((tmp_path / "results" / "reference_cache.json").read_text())
    assert len(cache) == 1
    b = run_experiment(spec, echo=quiet)  # second run hits the cache
    assert b.f_ref == a.f_ref


@pytest.mark.filterwarnings("ignore:overflow encountered:RuntimeWarning")
def test_run_experiment_flushes_partial_trace_on_divergence(tmp_path):
    path = tmp_path / "div.cfg"
    path.write_text(
        "[experiment]\nname = div\nbudget = 400\noutput_dir = {}\n"
        "[problem]\nobjective = logistic\nsynthetic_rows = 20\nsynthetic_dim = 4\n"
        "set = unconstrained\n"
        "[method]\nsolver = gd\ngamma = 1e200\n".format(tmp_path / "div_out")
    )
    with pytest.raises(BenchError, match="partial trace"):
        run_experiment(parse_config(path), echo=quiet)
    flushed = (tmp_path / "div_out" / "div_seed0.csv").read_text()
    assert "# aborted=objective_not_finite" in flushed


# ---------------------------------------------------------------------------
# comparisons and plot data
# ---------------------------------------------------------------------------


def test_compare_methods_outputs_align(tmp_path):
    spec = parse_config(write_config(tmp_path))
    bundles = compare_methods(spec, ["jaguar", "full"], echo=quiet)
    assert set(bundles) == {"jaguar", "full"}
    grids = [b.checkpoints for b in bundles.values()]
    assert np.array_equal(grids[0], grids[1])
    plotdata = (tmp_path / "results" / "unit_plotdata.csv").read_text().splitlines()
    header_at = next(i for i, ln in enumerate(plotdata) if not ln.startswith("#"))
    assert plotdata[header_at] == "method,oracle_calls,median_gap,q25,q75"
    methods_seen = {ln.split(",")[0] for ln in plotdata[header_at + 1 :]}
    assert methods_seen == {"jaguar", "full"}
    script = (tmp_path / "results" / "unit_plot.gp").read_text()
    assert "set datafile separator ','" in script
    assert "unit_compare.csv" in script


def test_compare_rejects_unknown_method(tmp_path):
    spec = parse_config(write_config(tmp_path))
    with pytest.raises(ConfigError, match="unknown method"):
        compare_methods(spec, ["jaguar", "magic"], echo=quiet)


def test_emit_plotdata_rejects_mismatched_grids(tmp_path):
    spec = parse_config(write_config(tmp_path))
    a = run_experiment(spec, echo=quiet)
    shorter = dataclasses.replace(spec, name="unit2", budget=200)
    b = run_experiment(shorter, echo=quiet)
    with pytest.raises(ValueError, match="mismatched checkpoint"):
        emit_plotdata({"a": a, "b": b}, tmp_path / "plots", echo=quiet)


# ---------------------------------------------------------------------------
# theory validation entry
# ---------------------------------------------------------------------------


def test_validate_theory_passes_smoke():
    worst = validate_theory(n_specs=25, horizon=400, seed=1, echo=quiet)
    assert 0.0 < worst <= 1.0


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def test_cli_run_and_exit_codes(tmp_path, capsys):
    path = write_config(tmp_path)
    assert main(["run", "--config", str(path)]) == 0
    out = capsys.readouterr().out
    assert "final f_gap per seed" in out
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert "error:" in capsys.readouterr().err


def test_cli_overrides(tmp_path):
    path = write_config(tmp_path)
    out_dir = tmp_path / "override_out"
    code = main(
        [
            "run",
            "--config",
            str(path),
            "--seed-override",
            "9",
            "--budget-override",
            "200",
            "--output-dir",
            str(out_dir),
        ]
    )
    assert code == 0
    assert (out_dir / "unit_seed9.csv").is_file()
    assert not (out_dir / "unit_seed0.csv").exists()


def test_cli_compare(tmp_path, capsys):
    path = write_config(tmp_path)
    code = main(["compare", "--config", str(path), "--methods", "jaguar,l2smooth"])
    assert code == 0
    out = capsys.readouterr().out
    assert "jaguar: median final" in out
    assert "l2smooth: median final" in out
    assert main(["compare", "--config", str(path), "--methods", "magic"]) == 2


def test_cli_validate_theory(capsys):
    assert main(["validate-theory", "--specs", "10", "--horizon", "200"]) == 0
    assert "validated 10 random admissible recursions" in capsys.readouterr().out


def test_cli_parse_data(tmp_path, capsys):
    src = tmp_path / "tiny.libsvm"
    src.write_text("+1 1:0.5 2:1.5\n-1 1:-1.0\n")
    out = tmp_path / "norm.libsvm"
    code = main(
        ["parse-data", "--input", str(src), "--normalize", "l2_rows", "--output", str(out)]
    )
    assert code == 0
    assert "rows=2 features=2 positive=1 negative=1" in capsys.readouterr().out
    assert out.read_text().splitlines()[1] == "-1 1:-1.0"
    assert main(["parse-data", "--input", str(tmp_path / "missing.libsvm")]) == 2


def test_cli_parse_data_bad_content(tmp_path, capsys):
    src = tmp_path / "bad.libsvm"
    src.write_text("+1 0:1.0\n")
    assert main(["parse-data", "--input", str(src)]) == 2
    assert "error:" in capsys.readouterr().err


@pytest.mark.filterwarnings("ignore:overflow encountered:RuntimeWarning")
def test_cli_divergence_exit_code(tmp_path):
    path = tmp_path / "div.cfg"
    path.write_text(
        "[experiment]\nname = div\nbudget = 400\noutput_dir = {}\n"
        "[problem]\nobjective = logistic\nsynthetic_rows = 20\nsynthetic_dim = 4\n"
        "set = unconstrained\n"
        "[method]\nsolver = gd\ngamma = 1e200\n".format(tmp_path / "div_out")
    )
    assert main(["run", "--config", str(path)]) == 3
