"""Dataset loading, generation and normalization.

Input format is the plain-text sparse format used by the LIBSVM dataset
collection: one row per line, ``<label> <index>:<value> ...`` with 1-based,
strictly increasing indices. Rows are materialized densely since every
benchmark here is desk scale.
"""

from __future__ import annotations

import gzip
import math
from dataclasses import dataclass
from typing import IO, Iterable, Union

import numpy as np

__all__ = [
    "Dataset",
    "LibsvmParseError",
    "parse_libsvm",
    "serialize_libsvm",
    "load_libsvm",
    "normalize",
    "synthetic_classification",
]

NORMALIZE_MODES = ("none", "l2_rows", "scale01")


class LibsvmParseError(ValueError):
    """Malformed input; the message carries the offending line number."""


@dataclass(frozen=True)
class Dataset:
    """Dense feature matrix with labels in {-1, +1}. Immutable once built."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-dimensional, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(f"y must have shape ({X.shape[0]},), got {y.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains NaN or Inf")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        X = X.copy()
        y = y.copy()
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]


def _map_labels(raw: np.ndarray) -> np.ndarray:
    distinct = sorted(set(raw.tolist()))
    if set(distinct) <= {-1.0, 1.0}:
        return raw
    if len(distinct) == 2:
        # e.g. {1, 2} or {0, 1}: smaller raw label becomes -1
        return np.where(raw == distinct[0], -1.0, 1.0)
    raise LibsvmParseError(
        f"cannot map labels {distinct} to binary -1/+1 (need two distinct values)"
    )


def parse_libsvm(source: Union[str, Iterable[str]]) -> Dataset:
    """Parse LIBSVM-format text into a :class:`Dataset`.

    ``source`` is a string or an iterable of lines (e.g. an open file).
    Every malformed line raises :class:`LibsvmParseError` naming the line;
    nothing is skipped silently.
    """
    if isinstance(source, str):
        lines: Iterable[str] = source.splitlines()
    else:
        lines = source
    labels: list[float] = []
    rows: list[list[tuple[int, float]]] = []
    max_index = 0
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise LibsvmParseError(f"line {lineno}: bad label {tokens[0]!r}") from None
        if not math.isfinite(label):
            raise LibsvmParseError(f"line {lineno}: non-finite label {tokens[0]!r}")
        entries: list[tuple[int, float]] = []
        prev_index = 0
        for token in tokens[1:]:
            index_s, sep, value_s = token.partition(":")
            if not sep:
                raise LibsvmParseError(
                    f"line {lineno}: expected index:value pair, got {token!r}"
                )
            try:
                index = int(index_s)
            except ValueError:
                raise LibsvmParseError(
                    f"line {lineno}: bad feature index {index_s!r}"
                ) from None
            if index < 1:
                raise LibsvmParseError(f"line {lineno}: feature index {index} must be >= 1")
            if index <= prev_index:
                raise LibsvmParseError(
                    f"line {lineno}: feature indices must be strictly increasing "
                    f"({index} after {prev_index})"
                )
            try:
                value = float(value_s)
            except ValueError:
                raise LibsvmParseError(
                    f"line {lineno}: bad feature value {value_s!r}"
                ) from None
            if not math.isfinite(value):
                raise LibsvmParseError(f"line {lineno}: non-finite feature value {value_s!r}")
            entries.append((index, value))
            prev_index = index
        labels.append(label)
        rows.append(entries)
        max_index = max(max_index, prev_index)
    if not rows:
        raise LibsvmParseError("no rows in input")
    if max_index == 0:
        raise LibsvmParseError("no features in input")
    X = np.zeros((len(rows), max_index))
    for r, entries in enumerate(rows):
        for index, value in entries:
            X[r, index - 1] = value
    y = _map_labels(np.asarray(labels, dtype=float))
    return Dataset(X=X, y=y)


def serialize_libsvm(data: Dataset) -> str:
    """Render a dataset back to LIBSVM text (nonzero entries only).

    Note: a trailing feature column that is zero in every row does not
    survive a round trip, since the width is recovered from the largest
    index present.
    """
    out = []
    for r in range(data.n_rows):
        parts = ["+1" if data.y[r] > 0 else "-1"]
        row = data.X[r]
        for j in np.nonzero(row)[0]:
            parts.append(f"{j + 1}:{float(row[j])!r}")
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def load_libsvm(path: str) -> Dataset:
    """Read a LIBSVM file from disk; ``.gz`` files are decompressed."""
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt") as handle:  # type: ignore[operator]
        return parse_libsvm(handle)


def normalize(data: Dataset, mode: str) -> Dataset:
    """Return a normalized copy: ``none``, ``l2_rows`` or ``scale01``."""
    if mode not in NORMALIZE_MODES:
        raise ValueError(f"unknown normalize mode {mode!r}, expected one of {NORMALIZE_MODES}")
    if mode == "none":
        return data
    X = data.X.copy()
    if mode == "l2_rows":
        norms = np.linalg.norm(X, axis=1)
        nonzero = norms > 0
        X[nonzero] /= norms[nonzero, None]
    else:
        lo = X.min(axis=0)
        hi = X.max(axis=0)
        span = hi - lo
        constant = span == 0
        span[constant] = 1.0
        X = (X - lo) / span
        X[:, constant] = 0.0
    return Dataset(X=X, y=data.y)


def synthetic_classification(
    m: int, d: int, seed: int, separability: float = 3.0
) -> Dataset:
    """Two Gaussian blobs split along a random unit direction.

    ``separability`` is the distance between the blob centers; passing
    ``math.inf`` instead labels standard Gaussian points by the sign of
    their projection, which makes the set linearly separable through the
    origin.
    """
    if m < 1 or d < 1:
        raise ValueError(f"m and d must be >= 1, got m={m}, d={d}")
    if not (separability > 0):
        raise ValueError(f"separability must be > 0, got {separability}")
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    z = rng.standard_normal((m, d))
    if math.isinf(separability):
        y = np.where(z @ direction >= 0, 1.0, -1.0)
        X = z
    else:
        y = rng.integers(0, 2, size=m) * 2.0 - 1.0
        X = z + np.outer(y * (separability / 2.0), direction)
    return Dataset(X=X, y=y)
