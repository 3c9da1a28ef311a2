"""Constraint sets with closed-form linear minimization oracles.

Frank-Wolfe only ever interacts with a set through ``lmo`` (argmin of a
linear function over the set) and ``contains``. All tie-breaking is
deterministic: among extreme points with equal inner product, the one
with the lowest coordinate index (and positive sign first, for the l1
ball) wins, matching the enumeration order of ``extreme_points``.
"""

from __future__ import annotations

import numpy as np

__all__ = ["FeasibleSet", "Simplex", "L1Ball", "L2Ball", "Unconstrained"]


class FeasibleSet:
    """Interface shared by every constraint set."""

    diameter: float

    def __init__(self, dim: int) -> None:
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = int(dim)

    def _check(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"expected vector of shape ({self.dim},), got {v.shape}")
        return v

    def lmo(self, g: np.ndarray) -> np.ndarray:
        """Extreme point minimizing <s, g> over the set."""
        raise NotImplementedError

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        raise NotImplementedError

    def start_point(self) -> np.ndarray:
        """Deterministic feasible starting point (the first extreme point)."""
        raise NotImplementedError


class Simplex(FeasibleSet):
    """Probability simplex: x >= 0, sum(x) = 1."""

    def __init__(self, dim: int) -> None:
        super().__init__(dim)
        self.diameter = float(np.sqrt(2.0)) if dim > 1 else 0.0

    def lmo(self, g: np.ndarray) -> np.ndarray:
        g = self._check(g)
        s = np.zeros(self.dim)
        s[int(np.argmin(g))] = 1.0
        return s

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        x = self._check(x)
        return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol)

    def start_point(self) -> np.ndarray:
        s = np.zeros(self.dim)
        s[0] = 1.0
        return s

    def extreme_points(self) -> np.ndarray:
        return np.eye(self.dim)


class L1Ball(FeasibleSet):
    """l1 ball of given radius: sum |x_i| <= r."""

    def __init__(self, dim: int, radius: float = 1.0) -> None:
        super().__init__(dim)
        if radius <= 0:
            raise ValueError(f"radius must be > 0, got {radius}")
        self.radius = float(radius)
        self.diameter = 2.0 * self.radius

    def lmo(self, g: np.ndarray) -> np.ndarray:
        g = self._check(g)
        j = int(np.argmax(np.abs(g)))
        s = np.zeros(self.dim)
        if g[j] > 0:
            s[j] = -self.radius
        elif g[j] < 0:
            s[j] = self.radius
        else:
            # zero gradient: every vertex ties, take the first one
            s[0] = self.radius
        return s

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        x = self._check(x)
        return bool(np.abs(x).sum() <= self.radius + tol)

    def start_point(self) -> np.ndarray:
        s = np.zeros(self.dim)
        s[0] = self.radius
        return s

    def extreme_points(self) -> np.ndarray:
        points = np.zeros((2 * self.dim, self.dim))
        for i in range(self.dim):
            points[2 * i, i] = self.radius
            points[2 * i + 1, i] = -self.radius
        return points


class L2Ball(FeasibleSet):
    """Euclidean ball of given radius centered at the origin."""

    def __init__(self, dim: int, radius: float = 1.0) -> None:
        super().__init__(dim)
        if radius <= 0:
            raise ValueError(f"radius must be > 0, got {radius}")
        self.radius = float(radius)
        self.diameter = 2.0 * self.radius

    def lmo(self, g: np.ndarray) -> np.ndarray:
        g = self._check(g)
        norm = float(np.linalg.norm(g))
        if norm == 0.0:
            return self.start_point()
        return -(self.radius / norm) * g

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        x = self._check(x)
        return bool(np.linalg.norm(x) <= self.radius + tol)

    def start_point(self) -> np.ndarray:
        s = np.zeros(self.dim)
        s[0] = self.radius
        return s


class Unconstrained(FeasibleSet):
    """All of R^dim; exists so gradient descent fits the same run plumbing."""

    diameter = float("inf")

    def lmo(self, g: np.ndarray) -> np.ndarray:
        raise ValueError(
            "unconstrained problems have no linear minimization oracle; "
            "use gd_jaguar instead of a Frank-Wolfe solver"
        )

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        self._check(x)
        return True

    def start_point(self) -> np.ndarray:
        return np.zeros(self.dim)
