"""Truncated weighted sequence spaces and the maps that live on them.

Coordinates are stored 0-based in arrays, but every index-dependent weight
(``i**-s`` eigenvalues, the nest radii ``i**-((1+delta)/p)``) uses the
1-based position ``i = index + 1``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

LP = "lp"
LINF = "linf"
PRODUCT = "product"
FLAVORS = (LP, LINF, PRODUCT)


@dataclass(frozen=True)
class PowerLaw:
    """The sequence ``coef * i**exponent`` for ``i = 1, 2, ...``.

    Kept symbolic so that products and powers of power laws stay power laws
    and tail sums have closed-form bounds.
    """

    coef: float = 1.0
    exponent: float = 0.0

    def __call__(self, n: int) -> np.ndarray:
        i = np.arange(1, n + 1, dtype=float)
        return self.coef * i**self.exponent

    def __mul__(self, other):
        if isinstance(other, PowerLaw):
            return PowerLaw(self.coef * other.coef, self.exponent + other.exponent)
        return PowerLaw(self.coef * float(other), self.exponent)

    __rmul__ = __mul__

    def __pow__(self, k: float) -> "PowerLaw":
        return PowerLaw(self.coef**k, self.exponent * k)

    def tail_sum_bounds(self, n: int) -> tuple[float, float]:
        """Bracket ``sum_{i>n} coef*i**exponent`` by the integral test.

        Returns ``(inf, inf)`` when the series diverges.
        """
        q = -self.exponent
        if self.coef == 0:
            return 0.0, 0.0
        if q <= 1:
            return math.inf, math.inf
        lo = self.coef * (n + 1) ** (1 - q) / (q - 1)
        hi = self.coef * n ** (1 - q) / (q - 1)
        return lo, hi

    @classmethod
    def parse(cls, text: str) -> "PowerLaw":
        """Parse ``"i^-1"``, ``"2*i^-0.5"``, ``"i**2"`` or a bare constant."""
        s = text.replace(" ", "").replace("**", "^")
        m = re.fullmatch(r"(?:([-+0-9.eE]+)\*)?i(?:\^\(?([-+0-9.eE]+)\)?)?", s)
        if m:
            coef = float(m.group(1)) if m.group(1) else 1.0
            exponent = float(m.group(2)) if m.group(2) else 1.0
            return cls(coef, exponent)
        try:
            return cls(float(s), 0.0)
        except ValueError:
            raise ValueError(f"cannot parse power-law sequence {text!r}") from None

    def __str__(self) -> str:
        return f"{self.coef:g}*i^{self.exponent:g}"


def as_array(seq, n: int | None = None) -> np.ndarray:
    """Materialize a sequence given as an array or a PowerLaw."""
    if isinstance(seq, PowerLaw):
        if n is None:
            raise ValueError("a length is needed to evaluate a PowerLaw")
        return seq(n)
    arr = np.asarray(seq, dtype=float)
    if arr.ndim == 0:
        if n is None:
            raise ValueError("a length is needed to broadcast a scalar")
        return np.full(n, float(arr))
    if n is not None and arr.shape != (n,):
        raise ValueError(f"expected length {n}, got {arr.shape}")
    return arr


@dataclass(frozen=True)
class WeightedSpaceSpec:
    """An N-truncation of ``l^p_(beta)``, ``l^inf_(beta)`` or ``R^N``."""

    p: float
    weights: np.ndarray
    flavor: str = LP

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")
        if self.flavor == LP and not (1 <= self.p < math.inf):
            raise ValueError("flavor 'lp' needs 1 <= p < inf")
        if self.flavor == LINF and self.p != math.inf:
            raise ValueError("flavor 'linf' needs p = inf")
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.weights.size

    @classmethod
    def lp(cls, p, weights):
        return cls(float(p), weights, LP)

    @classmethod
    def linf(cls, weights):
        return cls(math.inf, weights, LINF)

    @classmethod
    def product(cls, n: int):
        return cls(2.0, np.ones(n), PRODUCT)


@dataclass(frozen=True)
class EigenSequence:
    """Eigenvalues ``1 >= lambda_1 >= lambda_2 >= ... > 0`` of an inverse operator."""

    lambdas: np.ndarray
    law: PowerLaw | None = field(default=None, compare=False)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("lambdas must be a non-empty 1-d sequence")
        if np.any(lam <= 0):
            raise ValueError("eigenvalues must be strictly positive")
        if lam[0] > 1 or np.any(np.diff(lam) > 0):
            raise ValueError("eigenvalues must be non-increasing and at most 1")
        object.__setattr__(self, "lambdas", lam)

    @classmethod
    def power_law(cls, s: float, n: int) -> "EigenSequence":
        """``lambda_i = i**-s``."""
        law = PowerLaw(1.0, -float(s))
        return cls(law(n), law)

    def __len__(self):
        return self.lambdas.size

    def sum_squares(self) -> float:
        return float(np.sum(self.lambdas**2))

    def tail_squares_bound(self) -> float | None:
        """Upper bound on ``sum_{i>N} lambda_i**2``; None unless the law is known."""
        if self.law is None:
            return None
        return (self.law**2).tail_sum_bounds(len(self))[1]

    def weights(self, m: int) -> np.ndarray:
        """``beta_i = lambda_i**(-2m)``, the weights of the level-m image space."""
        return self.lambdas ** (-2.0 * m)


@dataclass(frozen=True)
class SpectralVector:
    """Coefficients ``a_i`` of ``f = sum a_i lambda_i**m phi_i`` at level m."""

    coeffs: np.ndarray
    level: int

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))

    def norm(self) -> float:
        # {lambda_i**m phi_i} is orthonormal at level m
        return weighted_norm(self.coeffs, WeightedSpaceSpec.lp(2, np.ones(self.coeffs.size)))


def weighted_norm(x, space: WeightedSpaceSpec) -> float:
    """``(sum beta_i |x_i|^p)^(1/p)`` for lp, ``max beta_i |x_i|`` for linf."""
    if isinstance(x, SpectralVector):
        x = x.coeffs
    x = np.asarray(x, dtype=float)
    if x.shape != (space.dim,):
        raise ValueError(f"dimension mismatch: point has shape {x.shape}, space has N={space.dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite entries")
    if space.flavor == PRODUCT:
        raise ValueError("R^N carries a metric, not a norm; use product_metric")
    ax = np.abs(x)
    if space.flavor == LINF:
        return float(np.max(space.weights * ax))
    p = space.p
    # scale out the largest entry so large p does not overflow
    scale = float(np.max(ax))
    if scale == 0.0:
        return 0.0
    return scale * float(np.sum(space.weights * (ax / scale) ** p)) ** (1.0 / p)


def product_metric(x, y) -> float:
    """The metric ``sum_k 2^-k |x-y|_k / (|x-y|_k + 1)`` on truncated ``R^N``."""
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    partial = np.sqrt(np.cumsum(diff**2))
    k = np.arange(1, diff.size + 1)
    return float(np.sum(0.5**k * partial / (partial + 1.0)))


def tau_map(f: SpectralVector, eig: EigenSequence) -> np.ndarray:
    """Send level-m coefficients ``a_i`` to ``lambda_i**m a_i`` in ``l^2_(lambda^-2m)``."""
    if f.coeffs.shape != eig.lambdas.shape:
        raise ValueError("coefficient vector and eigen sequence differ in length")
    return eig.lambdas**f.level * f.coeffs


def tau_inverse(x, eig: EigenSequence, m: int) -> SpectralVector:
    x = np.asarray(x, dtype=float)
    if x.shape != eig.lambdas.shape:
        raise ValueError("coefficient vector and eigen sequence differ in length")
    return SpectralVector(eig.lambdas ** (-m) * x, m)


def image_space(eig: EigenSequence, m: int) -> WeightedSpaceSpec:
    return WeightedSpaceSpec.lp(2, eig.weights(m))


def nest_radii(space: WeightedSpaceSpec, M: float, delta: float = 1.0) -> np.ndarray:
    """Coordinate bounds of ``D_M``: ``|x_i| <= M i^{-(1+delta)/p} beta_i^{-1/p}``.

    Coordinates with zero weight are unconstrained (radius inf).
    """
    if space.flavor != LP:
        raise ValueError("compact nests are defined for the lp flavor")
    i = np.arange(1, space.dim + 1, dtype=float)
    with np.errstate(divide="ignore"):
        return M * i ** (-(1.0 + delta) / space.p) * space.weights ** (-1.0 / space.p)


def nest_contains(x, M: float, space: WeightedSpaceSpec, delta: float = 1.0) -> bool:
    """True iff ``beta_i^{1/p} |x_i| <= M i^{-(1+delta)/p}`` for every i."""
    if M <= 0 or delta <= 0:
        raise ValueError("M and delta must be positive")
    x = np.asarray(x, dtype=float)
    if x.shape != (space.dim,):
        raise ValueError(f"dimension mismatch: point has shape {x.shape}, space has N={space.dim}")
    if space.flavor != LP:
        raise ValueError("compact nests are defined for the lp flavor")
    i = np.arange(1, space.dim + 1, dtype=float)
    lhs = space.weights ** (1.0 / space.p) * np.abs(x)
    return bool(np.all(lhs <= M * i ** (-(1.0 + delta) / space.p)))


# quintic smoothstep: C^2, max slope 15/8 on [0,1], i.e. 15/16 after stretching to [1,3]
def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def eta(x):
    """Cutoff bump: 1 on ``|x| <= 1``, 0 on ``|x| >= 3``, ``|eta'| <= 15/16``."""
    return 1.0 - _smoothstep((np.abs(x) - 1.0) / 2.0)


def eta_prime(x):
    t = np.clip((np.abs(x) - 1.0) / 2.0, 0.0, 1.0)
    return -np.sign(x) * 15.0 * t * t * (1.0 - t) ** 2


ETA_SLOPE = 15.0 / 16.0


def localize(f, M: float, space: WeightedSpaceSpec, delta: float = 1.0):
    """``f_M(x) = f(x) * prod_i eta(x_i / r_i)`` with ``r_i`` the ``D_M`` radii.

    The result equals f on ``D_M`` and vanishes off ``D_{3M}``.
    """
    from .forms import CylinderFunction

    radii = nest_radii(space, M, delta)
    inv_r = np.where(np.isinf(radii), 0.0, 1.0 / radii)

    def cutoff(x):
        x = np.asarray(x, dtype=float)
        return np.prod(eta(x * inv_r), axis=-1)

    def full(x):
        return f(x) * cutoff(x)

    lip = math.inf
    if f.sup_norm is not None:
        lip = f.lipschitz + f.sup_norm * ETA_SLOPE * float(np.linalg.norm(inv_r))
    return CylinderFunction(
        tuple(range(space.dim)),
        full,
        lipschitz=lip,
        sup_norm=f.sup_norm,
        name=f"{f.name}_M{M:g}",
        full_input=True,
    )


def cesaro_mean(seq: Sequence, m: int | None = None):
    """Average of the first m members; members may be arrays, numbers or callables."""
    seq = list(seq)
    if not seq:
        raise ValueError("empty sequence")
    m = len(seq) if m is None else m
    if not 1 <= m <= len(seq):
        raise ValueError(f"m must lie in [1, {len(seq)}]")
    head = seq[:m]
    if all(callable(s) for s in head):
        def mean(*args, **kwargs):
            return sum(s(*args, **kwargs) for s in head) / m
        return mean
    return sum(np.asarray(s, dtype=float) for s in head) / m
