"""Small statistical helpers shared by the estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Estimate:
    """A value with its standard error; ``exact`` estimates carry ``se == 0``."""

    value: float | complex
    se: float = 0.0
    exact: bool = True
    n: int = 0
    warning: str | None = None

    def within(self, target, k: float = 3.0, atol: float = 0.0) -> bool:
        return abs(self.value - target) <= k * self.se + atol

    def __add__(self, other: "Estimate") -> "Estimate":
        warning = "; ".join(w for w in (self.warning, other.warning) if w) or None
        return Estimate(
            self.value + other.value,
            math.hypot(self.se, other.se),
            self.exact and other.exact,
            self.n + other.n,
            warning,
        )


def mean_se(x) -> tuple[float, float]:
    """Sample mean and its naive standard error (independent draws)."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float(x.mean()), math.inf
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def batch_means_se(x, n_batches: int = 50) -> tuple[float, float]:
    """Mean and standard error of a correlated series by non-overlapping batches."""
    x = np.asarray(x, dtype=float)
    size = x.size // n_batches
    if size < 1:
        raise ValueError("series too short for the requested number of batches")
    batches = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(x.mean()), float(batches.std(ddof=1) / math.sqrt(n_batches))
