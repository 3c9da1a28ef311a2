import numpy as np
import pytest

from jaguar.feasible_sets import L1Ball, L2Ball, Simplex, Unconstrained


def test_simplex_lmo_frozen():
    s = Simplex(3).lmo(np.array([3.0, -1.0, 2.0]))
    assert np.array_equal(s, [0.0, 1.0, 0.0])


def test_simplex_lmo_tie_takes_lowest_index():
    s = Simplex(3).lmo(np.array([1.0, 1.0, 1.0]))
    assert np.array_equal(s, [1.0, 0.0, 0.0])


def test_simplex_membership_and_start():
    simplex = Simplex(4)
    assert simplex.contains(np.full(4, 0.25))
    assert simplex.contains(simplex.start_point())
    assert not simplex.contains(np.array([0.5, 0.5, 0.5, -0.5]))
    assert not simplex.contains(np.full(4, 0.3))
    assert simplex.diameter == pytest.approx(np.sqrt(2.0))
    assert np.array_equal(simplex.extreme_points(), np.eye(4))


def test_l1_lmo_frozen():
    ball = L1Ball(2, radius=2.0)
    assert np.array_equal(ball.lmo(np.array([3.0, -4.0])), [0.0, 2.0])
    assert np.array_equal(ball.lmo(np.array([-3.0, 1.0])), [2.0, 0.0])
    assert np.array_equal(ball.lmo(np.zeros(2)), [2.0, 0.0])


def test_l1_lmo_is_an_extreme_point_minimizer():
    rng = np.random.default_rng(12)
    ball = L1Ball(5, radius=1.5)
    points = ball.extreme_points()
    for _ in range(200):
        g = rng.standard_normal(5)
        s = ball.lmo(g)
        assert float(g @ s) == pytest.approx(float((points @ g).min()), abs=1e-12)


def test_l1_extreme_point_order():
    points = L1Ball(2, radius=1.0).extreme_points()
    expected = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    assert np.array_equal(points, expected)


def test_l1_membership():
    ball = L1Ball(3, radius=1.0)
    assert ball.contains(np.array([0.5, -0.25, 0.25]))
    assert not ball.contains(np.array([0.5, -0.5, 0.5]))


def test_l2_lmo_frozen():
    ball = L2Ball(2, radius=1.0)
    assert np.allclose(ball.lmo(np.array([3.0, 4.0])), [-0.6, -0.8])
    assert np.array_equal(ball.lmo(np.zeros(2)), ball.start_point())


def test_l2_lmo_minimizes_over_the_sphere():
    rng = np.random.default_rng(3)
    ball = L2Ball(4, radius=2.0)
    for _ in range(50):
        g = rng.standard_normal(4)
        s = ball.lmo(g)
        assert np.linalg.norm(s) == pytest.approx(2.0)
        # Cauchy-Schwarz lower bound is attained
        assert float(g @ s) == pytest.approx(-2.0 * float(np.linalg.norm(g)))


def test_l2_membership():
    ball = L2Ball(2, radius=1.0)
    assert ball.contains(np.array([0.6, 0.8]))
    assert not ball.contains(np.array([0.8, 0.8]))


def test_unconstrained_has_no_lmo():
    free = Unconstrained(3)
    assert free.contains(np.full(3, 1e12))
    assert np.array_equal(free.start_point(), np.zeros(3))
    with pytest.raises(ValueError, match="gd_jaguar"):
        free.lmo(np.ones(3))


def test_dimension_validation():
    with pytest.raises(ValueError, match="dim"):
        Simplex(0)
    with pytest.raises(ValueError, match="radius"):
        L1Ball(2, radius=0.0)
    with pytest.raises(ValueError, match="radius"):
        L2Ball(2, radius=-1.0)
    with pytest.raises(ValueError, match="shape"):
        Simplex(3).lmo(np.zeros(2))


def test_diameters():
    assert L1Ball(3, radius=2.0).diameter == 4.0
    assert L2Ball(3, radius=2.0).diameter == 4.0
    assert Simplex(1).diameter == 0.0
    assert Unconstrained(3).diameter == float("inf")
