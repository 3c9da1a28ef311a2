"""Objective functions for the benchmark problems.

Solvers only ever see these through the zero-order oracle. Analytic
gradients, where implemented, exist purely for diagnostics (tracking the
estimation error along a run) and for computing reference optima.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .dataio import Dataset

__all__ = [
    "Objective",
    "CustomObjective",
    "QuadraticObjective",
    "LogisticObjective",
    "SvmObjective",
    "StochasticView",
    "svm_value",
    "logistic_value",
    "logistic_gradient",
]


class Objective:
    """Base interface: a deterministic function on R^dim.

    Finite-sum objectives additionally expose ``n_terms`` and
    ``partial_value`` so that stochastic views can evaluate minibatches.
    """

    kind = "custom"
    is_stochastic = False
    has_gradient = False
    n_terms = 1
    f_star: Optional[float] = None
    L: Optional[float] = None
    mu: Optional[float] = None

    def __init__(self, dim: int) -> None:
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = int(dim)

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def partial_value(self, x: np.ndarray, rows: np.ndarray) -> float:
        # single-term objectives: the only "minibatch" is the whole sum
        return self.value(x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no analytic gradient")

    def _check_point(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected point of shape ({self.dim},), got {x.shape}")
        return x


class CustomObjective(Objective):
    """Wrap a plain callable, mainly for tests and ad hoc experiments."""

    def __init__(
        self,
        fn: Callable[[np.ndarray], float],
        dim: int,
        grad_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        f_star: Optional[float] = None,
        L: Optional[float] = None,
        mu: Optional[float] = None,
    ) -> None:
        super().__init__(dim)
        self._fn = fn
        self._grad_fn = grad_fn
        self.has_gradient = grad_fn is not None
        self.f_star = f_star
        self.L = L
        self.mu = mu

    def value(self, x: np.ndarray) -> float:
        return float(self._fn(self._check_point(x)))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        if self._grad_fn is None:
            raise NotImplementedError("no gradient supplied")
        return np.asarray(self._grad_fn(self._check_point(x)), dtype=float)


class QuadraticObjective(Objective):
    """f(x) = x'Ax/2 - b'x with symmetric positive semidefinite A.

    Smoothness and strong-convexity constants come from the spectrum of A,
    so this is the standard fixture for checks with known answers.
    """

    kind = "quadratic"
    has_gradient = True

    def __init__(self, A: np.ndarray, b: Optional[np.ndarray] = None) -> None:
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        super().__init__(A.shape[0])
        scale = max(1.0, float(np.abs(A).max()))
        if not np.allclose(A, A.T, atol=1e-10 * scale):
            raise ValueError("A must be symmetric")
        eigs = np.linalg.eigvalsh(A)
        if eigs[0] < -1e-10 * scale:
            raise ValueError(f"A must be positive semidefinite, smallest eigenvalue {eigs[0]}")
        self.A = A
        self.b = np.zeros(self.dim) if b is None else np.asarray(b, dtype=float)
        if self.b.shape != (self.dim,):
            raise ValueError(f"b must have shape ({self.dim},), got {self.b.shape}")
        self.L = float(eigs[-1])
        self.mu = float(max(eigs[0], 0.0))
        if self.mu > 0:
            self.x_star = np.linalg.solve(A, self.b)
        else:
            self.x_star = np.linalg.lstsq(A, self.b, rcond=None)[0]
        self.f_star = self.value(self.x_star)

    @classmethod
    def identity(cls, dim: int) -> "QuadraticObjective":
        """The squared-norm objective f(x) = ||x||^2 / 2."""
        return cls(np.eye(dim))

    def value(self, x: np.ndarray) -> float:
        x = self._check_point(x)
        return float(0.5 * x @ (self.A @ x) - self.b @ x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = self._check_point(x)
        return self.A @ x - self.b


# ---------------------------------------------------------------------------
# data-driven losses
# ---------------------------------------------------------------------------


def _check_weights(w: np.ndarray, dim: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (dim,):
        raise ValueError(f"expected weights of shape ({dim},), got {w.shape}")
    return w


def svm_value(w_aug: np.ndarray, data: Dataset, C: float = 10.0) -> float:
    """Soft-margin linear SVM loss with the bias as the trailing coordinate.

    mean_k max(0, 1 - y_k ((X w)_k - b)) + ||w||^2 / (2 C), where
    ``w_aug = (w, b)`` and the bias b is excluded from the regularizer.
    """
    w_aug = _check_weights(w_aug, data.n_features + 1)
    return _svm_partial(w_aug, data, C, None)


def _svm_partial(w_aug: np.ndarray, data: Dataset, C: float, rows) -> float:
    if C <= 0:
        raise ValueError(f"C must be > 0, got {C}")
    w = w_aug[:-1]
    b = w_aug[-1]
    X, y = (data.X, data.y) if rows is None else (data.X[rows], data.y[rows])
    margins = 1.0 - y * (X @ w - b)
    hinge = float(np.maximum(margins, 0.0).mean())
    return hinge + float(w @ w) / (2.0 * C)


def logistic_value(w: np.ndarray, data: Dataset, C: float = 10.0) -> float:
    """Ridge-regularized logistic loss:
    mean_k log(1 + exp(-y_k (X w)_k)) + ||w||^2 / (2 C).
    """
    w = _check_weights(w, data.n_features)
    return _logistic_partial(w, data, C, None)


def _logistic_partial(w: np.ndarray, data: Dataset, C: float, rows) -> float:
    if C <= 0:
        raise ValueError(f"C must be > 0, got {C}")
    X, y = (data.X, data.y) if rows is None else (data.X[rows], data.y[rows])
    losses = np.logaddexp(0.0, -y * (X @ w))
    return float(losses.mean()) + float(w @ w) / (2.0 * C)


def logistic_gradient(w: np.ndarray, data: Dataset, C: float = 10.0) -> np.ndarray:
    """Analytic gradient of :func:`logistic_value`. Diagnostics only."""
    w = _check_weights(w, data.n_features)
    if C <= 0:
        raise ValueError(f"C must be > 0, got {C}")
    z = data.y * (data.X @ w)
    # sigmoid(-z) computed as exp(-log(1+exp(z))) to avoid overflow
    s = np.exp(-np.logaddexp(0.0, z))
    coeff = -data.y * s / data.n_rows
    return data.X.T @ coeff + w / C


def _lambda_max(M: np.ndarray, iters: int = 500, tol: float = 1e-12) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration."""
    d = M.shape[0]
    v = np.ones(d) / np.sqrt(d)
    lam = 0.0
    for _ in range(iters):
        w = M @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        lam_new = float(v @ (M @ v))
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        lam = lam_new
    return lam


class LogisticObjective(Objective):
    """Finite-sum logistic regression loss over a labeled dataset."""

    kind = "logistic"
    has_gradient = True

    def __init__(self, data: Dataset, C: float = 10.0) -> None:
        if C <= 0:
            raise ValueError(f"C must be > 0, got {C}")
        super().__init__(data.n_features)
        self.data = data
        self.C = float(C)
        self.n_terms = data.n_rows
        self.mu = 1.0 / self.C
        self._L: Optional[float] = None

    @property
    def L(self) -> float:  # type: ignore[override]
        """Smoothness constant lambda_max(X'X) / (4 m) + 1 / C."""
        if self._L is None:
            gram = self.data.X.T @ self.data.X
            self._L = _lambda_max(gram) / (4.0 * self.data.n_rows) + 1.0 / self.C
        return self._L

    def value(self, x: np.ndarray) -> float:
        return logistic_value(self._check_point(x), self.data, self.C)

    def partial_value(self, x: np.ndarray, rows: np.ndarray) -> float:
        return _logistic_partial(self._check_point(x), self.data, self.C, rows)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return logistic_gradient(self._check_point(x), self.data, self.C)


class SvmObjective(Objective):
    """Finite-sum soft-margin SVM loss; decision variable is (w, bias)."""

    kind = "svm"
    has_gradient = False

    def __init__(self, data: Dataset, C: float = 10.0) -> None:
        if C <= 0:
            raise ValueError(f"C must be > 0, got {C}")
        super().__init__(data.n_features + 1)
        self.data = data
        self.C = float(C)
        self.n_terms = data.n_rows

    def value(self, x: np.ndarray) -> float:
        return svm_value(self._check_point(x), self.data, self.C)

    def partial_value(self, x: np.ndarray, rows: np.ndarray) -> float:
        return _svm_partial(self._check_point(x), self.data, self.C, rows)


class StochasticView(Objective):
    """Minibatch access to a finite-sum objective.

    A sample is an index array picking ``batch_size`` distinct terms
    uniformly at random; the minibatch mean plus the full regularizer is an
    unbiased estimate of the underlying value. With ``batch_size`` equal to
    the number of terms, evaluation is exact.
    """

    is_stochastic = True

    def __init__(self, objective: Objective, batch_size: int) -> None:
        if objective.is_stochastic:
            raise ValueError("cannot nest stochastic views")
        if not 1 <= batch_size <= objective.n_terms:
            raise ValueError(
                f"batch_size must be in [1, {objective.n_terms}], got {batch_size}"
            )
        super().__init__(objective.dim)
        self.base = objective
        self.batch_size = int(batch_size)
        self.kind = objective.kind
        self.n_terms = objective.n_terms
        self.has_gradient = objective.has_gradient
        self.f_star = objective.f_star
        self.L = objective.L
        self.mu = objective.mu

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Draw a uniform minibatch without replacement."""
        return rng.choice(self.n_terms, size=self.batch_size, replace=False)

    def value(self, x: np.ndarray, sample: np.ndarray) -> float:  # type: ignore[override]
        return self.base.partial_value(x, np.asarray(sample))

    def full_value(self, x: np.ndarray) -> float:
        """Underlying deterministic value, used for clean trace diagnostics."""
        return self.base.value(x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.base.gradient(x)
