import math

import numpy as np
import pytest

from jaguar.dataio import Dataset, synthetic_classification
from jaguar.objectives import (
    CustomObjective,
    LogisticObjective,
    QuadraticObjective,
    StochasticView,
    SvmObjective,
    logistic_gradient,
    logistic_value,
    svm_value,
)


# ---------------------------------------------------------------------------
# quadratic
# ---------------------------------------------------------------------------


def test_identity_quadratic_frozen_values():
    obj = QuadraticObjective.identity(4)
    x = np.ones(4)
    assert obj.value(x) == 2.0
    assert np.array_equal(obj.gradient(x), x)
    assert obj.L == 1.0
    assert obj.mu == 1.0
    assert obj.f_star == 0.0


def test_quadratic_with_linear_term():
    obj = QuadraticObjective(np.diag([1.0, 4.0]), b=np.array([1.0, 0.0]))
    assert np.allclose(obj.x_star, [1.0, 0.0])
    assert obj.f_star == pytest.approx(-0.5)
    assert obj.L == pytest.approx(4.0)
    assert obj.mu == pytest.approx(1.0)
    assert obj.value(np.zeros(2)) == 0.0


def test_quadratic_rejects_bad_matrices():
    with pytest.raises(ValueError, match="square"):
        QuadraticObjective(np.ones((2, 3)))
    with pytest.raises(ValueError, match="symmetric"):
        QuadraticObjective(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError, match="positive semidefinite"):
        QuadraticObjective(np.array([[-1.0]]))


def test_quadratic_singular_still_has_reference():
    obj = QuadraticObjective(np.diag([1.0, 0.0]), b=np.array([1.0, 0.0]))
    assert obj.mu == 0.0
    assert obj.f_star == pytest.approx(-0.5)


def test_custom_objective():
    obj = CustomObjective(lambda x: float((x ** 4).sum()), dim=2)
    assert obj.value(np.array([1.0, 2.0])) == 17.0
    assert not obj.has_gradient
    with pytest.raises(NotImplementedError):
        obj.gradient(np.zeros(2))
    with pytest.raises(ValueError, match="shape"):
        obj.value(np.zeros(3))


# ---------------------------------------------------------------------------
# svm
# ---------------------------------------------------------------------------


def one_row() -> Dataset:
    return Dataset(X=np.array([[2.0]]), y=np.array([1.0]))


def test_svm_frozen_values():
    data = one_row()
    # margin 1 - (2*1 - 0.5) < 0: only the regularizer w^2 / (2C) remains
    assert svm_value(np.array([1.0, 0.5]), data, C=10.0) == pytest.approx(0.05)
    # margin 1 - 0.2 = 0.8 plus 0.01 / 20
    assert svm_value(np.array([0.1, 0.0]), data, C=10.0) == pytest.approx(0.8005)


def test_svm_bias_excluded_from_regularizer():
    data = one_row()
    # margin 1 - (2 - 50) = 49 is active; the bias adds nothing quadratic
    with_bias = svm_value(np.array([1.0, 50.0]), data, C=10.0)
    assert with_bias == pytest.approx(49.0 + 0.05)


def test_svm_objective_dim_is_features_plus_one():
    data = synthetic_classification(10, 4, seed=0)
    obj = SvmObjective(data)
    assert obj.dim == 5
    assert not obj.has_gradient
    assert obj.value(np.zeros(5)) == pytest.approx(1.0)  # all margins equal 1


def test_svm_rejects_bad_C():
    with pytest.raises(ValueError, match="C must be > 0"):
        svm_value(np.zeros(2), one_row(), C=0.0)


# ---------------------------------------------------------------------------
# logistic
# ---------------------------------------------------------------------------


def test_logistic_frozen_values():
    data = one_row()
    assert logistic_value(np.array([0.0]), data) == pytest.approx(math.log(2.0))
    expected = math.log1p(math.exp(-2.0)) + 1.0 / 20.0
    assert logistic_value(np.array([1.0]), data) == pytest.approx(expected)


def test_logistic_gradient_matches_finite_differences():
    data = synthetic_classification(30, 5, seed=4)
    obj = LogisticObjective(data, C=10.0)
    rng = np.random.default_rng(0)
    w = rng.standard_normal(5)
    grad = obj.gradient(w)
    eps = 1e-6
    for i in range(5):
        e = np.zeros(5)
        e[i] = eps
        fd = (obj.value(w + e) - obj.value(w - e)) / (2 * eps)
        assert grad[i] == pytest.approx(fd, abs=1e-6)


def test_logistic_smoothness_constant_frozen():
    # single row (2.0): lambda_max(X'X) = 4, L = 4 / (4 * 1) + 1 / C
    obj = LogisticObjective(one_row(), C=10.0)
    assert obj.L == pytest.approx(1.1)
    assert obj.mu == pytest.approx(0.1)


def test_logistic_stable_for_extreme_weights():
    data = one_row()
    assert np.isfinite(logistic_value(np.array([500.0]), data))
    assert np.isfinite(logistic_value(np.array([-500.0]), data, C=1e6))
    assert np.all(np.isfinite(logistic_gradient(np.array([-500.0]), data)))


def test_logistic_descent_direction():
    data = synthetic_classification(50, 4, seed=9)
    obj = LogisticObjective(data)
    w = np.zeros(4)
    g = obj.gradient(w)
    assert obj.value(w - 0.1 * g) < obj.value(w)


# ---------------------------------------------------------------------------
# stochastic views
# ---------------------------------------------------------------------------


def test_view_minibatch_mean_is_unbiased():
    data = synthetic_classification(25, 3, seed=5)
    obj = LogisticObjective(data, C=10.0)
    view = StochasticView(obj, batch_size=1)
    w = np.array([0.3, -0.2, 0.1])
    singles = [view.value(w, np.array([k])) for k in range(25)]
    assert np.mean(singles) == pytest.approx(view.full_value(w), abs=1e-12)


def test_view_full_batch_is_exact():
    data = synthetic_classification(12, 3, seed=6)
    obj = LogisticObjective(data)
    view = StochasticView(obj, batch_size=12)
    w = np.array([0.1, 0.2, 0.3])
    assert view.value(w, np.arange(12)) == pytest.approx(view.full_value(w))


def test_view_sample_shape_and_range():
    data = synthetic_classification(20, 3, seed=7)
    view = StochasticView(LogisticObjective(data), batch_size=6)
    sample = view.sample(np.random.default_rng(0))
    assert sample.shape == (6,)
    assert len(set(sample.tolist())) == 6
    assert sample.min() >= 0 and sample.max() < 20


def test_view_validation():
    data = synthetic_classification(10, 3, seed=8)
    obj = LogisticObjective(data)
    with pytest.raises(ValueError, match="batch_size"):
        StochasticView(obj, batch_size=11)
    with pytest.raises(ValueError, match="batch_size"):
        StochasticView(obj, batch_size=0)
    view = StochasticView(obj, batch_size=2)
    with pytest.raises(ValueError, match="nest"):
        StochasticView(view, batch_size=2)


def test_view_delegates_metadata():
    data = synthetic_classification(10, 3, seed=8)
    obj = LogisticObjective(data, C=5.0)
    view = StochasticView(obj, batch_size=2)
    assert view.is_stochastic
    assert view.has_gradient
    assert view.mu == obj.mu
    assert view.L == obj.L
    assert view.n_terms == 10
    assert np.array_equal(view.gradient(np.zeros(3)), obj.gradient(np.zeros(3)))
