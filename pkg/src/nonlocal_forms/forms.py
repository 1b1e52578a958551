"""Non-local jump forms: kernel, per-coordinate and total forms, contractions.

The per-coordinate form of index alpha pairs the increments of ``u`` and
``v`` when coordinate i jumps from ``y'`` to ``y``, weighted by
``|y - y'|^-exponent``.  Two exponent conventions are supported: ``"eq8"``
uses ``2*alpha + 1``, ``"toy"`` uses ``1 + alpha``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .measures import ATOMS, Conditional1D, Measure, ProductMeasure
from .spaces import ETA_SLOPE, eta
from .stats import Estimate, mean_se

EQ8 = "eq8"
TOY = "toy"


@dataclass(frozen=True)
class FormConfig:
    alpha: float = 0.5
    kernel_profile: str = EQ8
    mc_samples: int = 2000
    inner_samples: int = 16
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        if self.kernel_profile not in (EQ8, TOY):
            raise ValueError(f"kernel_profile must be {EQ8!r} or {TOY!r}")
        if self.mc_samples < 1 or self.inner_samples < 1:
            raise ValueError("sample counts must be at least 1")

    @property
    def exponent(self) -> float:
        if self.kernel_profile == EQ8:
            return 2.0 * self.alpha + 1.0
        return 1.0 + self.alpha


@dataclass(frozen=True)
class CylinderFunction:
    """A function of finitely many coordinates of a point in ``R^N``.

    ``fn`` is vectorized over leading axes and receives the active coordinates
    stacked on the last axis (or the whole point when ``full_input``).  With
    ``support_radius > 0`` the function is zero whenever an active coordinate
    leaves the box ``[-R, R]``.
    """

    active: tuple
    fn: Callable = field(compare=False)
    lipschitz: float = math.inf
    support_radius: float = 0.0
    sup_norm: float | None = None
    name: str = "f"
    full_input: bool = False

    def __post_init__(self):
        object.__setattr__(self, "active", tuple(int(i) for i in self.active))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.full_input:
            val = self.fn(x)
        elif not self.active:
            val = self.fn(x[..., :0])
        else:
            sub = x[..., list(self.active)]
            val = self.fn(sub)
            if self.support_radius > 0:
                val = np.where(np.max(np.abs(sub), axis=-1) > self.support_radius, 0.0, val)
        return np.broadcast_to(np.asarray(val, dtype=float), x.shape[:-1]).copy() if x.ndim > 1 else float(val)

    def depends_on(self, i: int) -> bool:
        return i in self.active

    def scaled(self, c: float) -> "CylinderFunction":
        sup = None if self.sup_norm is None else abs(c) * self.sup_norm
        return CylinderFunction(self.active, lambda z, f=self.fn: c * f(z), abs(c) * self.lipschitz,
                                self.support_radius, sup, f"{c:g}*{self.name}", self.full_input)

    def __rmul__(self, c):
        return self.scaled(float(c))


def constant(c: float = 1.0) -> CylinderFunction:
    return CylinderFunction((), lambda z: np.full(z.shape[:-1], float(c)), 0.0, 0.0, abs(c), f"const({c:g})")


def projection(i: int, clip: float = 1e6) -> CylinderFunction:
    """``x_i * eta(x_i / clip)``: the coordinate itself, switched off far away."""
    lip = 1.0 + 3.0 * ETA_SLOPE
    return CylinderFunction((i,), lambda z: z[..., 0] * eta(z[..., 0] / clip), lip, 0.0,
                            3.0 * clip, f"x{i}")


def bump_product(indices: Sequence[int], radius: float = 1.0) -> CylinderFunction:
    """``prod_k eta(x_k / radius)``."""
    indices = tuple(indices)
    lip = ETA_SLOPE * math.sqrt(len(indices)) / radius
    return CylinderFunction(indices, lambda z: np.prod(eta(z / radius), axis=-1), lip, 3.0 * radius,
                            1.0, f"bump{list(indices)}")


def clipped_polynomial(i: int, coeffs: Sequence[float], cutoff: float = 1.0) -> CylinderFunction:
    """``P(x_i) * eta(x_i / cutoff)`` with ``P`` given by coefficients, lowest order first."""
    poly = np.polynomial.Polynomial(coeffs)
    fn = lambda z: poly(z[..., 0]) * eta(z[..., 0] / cutoff)
    # the derivative bound is read off a dense grid of the support, padded by 1%
    ys = np.linspace(-3 * cutoff, 3 * cutoff, 20001)
    dfn = poly.deriv()(ys) * eta(ys / cutoff) + poly(ys) * np.abs(np.gradient(eta(ys / cutoff), ys))
    lip = 1.01 * float(np.max(np.abs(dfn)))
    sup = 1.01 * float(np.max(np.abs(poly(ys) * eta(ys / cutoff))))
    return CylinderFunction((i,), fn, lip, 0.0, sup, f"poly{list(coeffs)}(x{i})")


def normal_contraction(epsilon: float) -> Callable:
    """A 1-Lipschitz non-decreasing map, identity on [0, 1], valued in ``(-eps, 1+eps)``.

    Outside [0, 1] it saturates exponentially, so it is C^1.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    e = float(epsilon)

    def phi(t):
        t = np.asarray(t, dtype=float)
        upper = 1.0 + e * -np.expm1(-(np.maximum(t, 1.0) - 1.0) / e)
        lower = -e * -np.expm1(np.minimum(t, 0.0) / e)
        return np.where(t > 1.0, upper, np.where(t < 0.0, lower, t))

    phi.epsilon = e
    return phi


def contract(u: CylinderFunction, phi: Callable) -> CylinderFunction:
    eps = getattr(phi, "epsilon", None)
    sup = None if eps is None else 1.0 + eps
    return CylinderFunction(u.active, lambda z, f=u.fn: phi(f(z)), u.lipschitz, u.support_radius,
                            sup, f"phi({u.name})", u.full_input)


def _with_coordinate(x, i, y):
    z = np.array(x, dtype=float, copy=True)
    z[..., i] = y
    return z


def phi_alpha_kernel(u: CylinderFunction, v: CylinderFunction, y: float, y2: float, x, i: int,
                     cfg: FormConfig) -> float:
    """Product of the increments of u and v between ``x_i = y`` and ``x_i = y2``, over ``|y-y2|^exponent``."""
    if y == y2:
        raise ValueError("the kernel is singular on the diagonal y == y'")
    if not (u.depends_on(i) and v.depends_on(i)):
        return 0.0
    x = np.asarray(x, dtype=float)
    a, b = _with_coordinate(x, i, y), _with_coordinate(x, i, y2)
    return float((u(a) - u(b)) * (v(a) - v(b)) / abs(y - y2) ** cfg.exponent)


def _kernel_batch(u, v, X, i, Y, Y2, exponent):
    """Vectorized kernel with the off-diagonal indicator folded in (zero where Y == Y2)."""
    A = np.repeat(X[:, None, :], Y.shape[1], axis=1)
    B = A.copy()
    A[..., i] = Y
    B[..., i] = Y2
    du = u(A) - u(B)
    dv = du if v is u else v(A) - v(B)
    gap = np.abs(Y - Y2)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = du * dv / gap**exponent
    return np.where(gap > 0, out, 0.0)


def _coordinate_rng(cfg, i):
    return np.random.default_rng([cfg.seed, i])


def _exact_product_coordinate(u, v, i, measure: ProductMeasure, cfg, coords):
    """Enumerate the atoms of the relevant coordinates of a finite product measure."""
    base = np.array([m.values[0] for m in measure.marginals])
    atoms = [measure.marginals[k] for k in coords]
    size = math.prod(a.values.size for a in atoms)
    if size > 2_000_000:
        return None
    grids = np.array(list(itertools.product(*[a.values for a in atoms]))).reshape(size, len(coords))
    probs = np.prod(np.array(list(itertools.product(*[a.weights for a in atoms]))).reshape(size, len(coords)),
                    axis=1)
    X = np.repeat(base[None, :], size, axis=0)
    X[:, list(coords)] = grids
    marg = measure.marginals[i]
    Y = np.repeat(marg.values[None, :], size, axis=0)
    Y2 = np.repeat(X[:, i][:, None], marg.values.size, axis=1)
    vals = _kernel_batch(u, v, X, i, Y, Y2, cfg.exponent)
    return float(probs @ (vals @ marg.weights))


def form_coordinate(u: CylinderFunction, v: CylinderFunction, i: int, measure: Measure,
                    cfg: FormConfig, method: str = "auto") -> Estimate:
    """The contribution of coordinate i to the form, exactly or by Monte Carlo.

    ``method`` is ``"auto"`` (exact when every marginal has finitely many
    atoms), ``"exact"`` or ``"mc"``.  When the conditional law does not depend
    on ``x_i`` the estimator averages over two independent conditional draws
    ``y, y'``; otherwise it pairs one conditional draw with ``x_i`` itself.
    """
    if not 0 <= i < measure.dim:
        raise IndexError(f"coordinate {i} out of range")
    if not (u.depends_on(i) or v.depends_on(i)):
        return Estimate(0.0)
    coords = sorted(set(u.active) | set(v.active))
    finite = isinstance(measure, ProductMeasure) and measure.finite_support
    if method not in ("auto", "exact", "mc"):
        raise ValueError(f"unknown method {method!r}")
    if method == "exact" and not finite:
        raise ValueError("exact evaluation needs a product measure with finitely many atoms")
    if method != "mc" and finite:
        value = _exact_product_coordinate(u, v, i, measure, cfg, coords)
        if value is not None:
            return Estimate(value)
        if method == "exact":
            raise ValueError("too many atoms to enumerate")

    rng = _coordinate_rng(cfg, i)
    n, m = cfg.mc_samples, cfg.inner_samples
    X = np.atleast_2d(measure.sample(rng, n))
    warning = None
    if not measure.conditional_depends_on_x:
        cond = measure.conditional(i)
        Y = cond.sample(rng, (n, m))
        Y2 = cond.sample(rng, (n, m))
    else:
        conds = [measure.conditional(i, x) for x in X]
        cond = conds[0]
        Y = np.stack([c.sample(rng, m) for c in conds])
        Y2 = np.repeat(X[:, i][:, None], m, axis=1)
    if cfg.kernel_profile == EQ8 and cfg.alpha > 0.5 and cond.kind != ATOMS:
        warning = ("kernel exponent 2*alpha+1 > 2 with an atomless conditional law: "
                   "the integrand may be unbounded near the diagonal")
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
    g = _kernel_batch(u, v, X, i, Y, Y2, cfg.exponent).mean(axis=1)
    mean, se = mean_se(g)
    if np.all(g == g[0]):
        se = 0.0
    return Estimate(mean, se, exact=False, n=n * m, warning=warning)


def form_total(u: CylinderFunction, v: CylinderFunction, measure: Measure, cfg: FormConfig,
               method: str = "auto") -> Estimate:
    """Sum of the per-coordinate forms over coordinates both functions depend on.

    Contributions are reduced in increasing coordinate order.
    """
    total = Estimate(0.0)
    for i in sorted(set(u.active) | set(v.active)):
        total = total + form_coordinate(u, v, i, measure, cfg, method)
    return total


def kernel_matrix(states, cfg: FormConfig) -> np.ndarray:
    """``|x - y|^-exponent`` off the diagonal, 0 on it."""
    S = np.asarray(states, dtype=float)
    if S.ndim == 1:
        S = S[:, None]
    dist = np.sqrt(((S[:, None, :] - S[None, :, :]) ** 2).sum(-1))
    off = ~np.eye(len(S), dtype=bool)
    if np.any(dist[off] == 0):
        raise ValueError("states must be distinct")
    K = np.zeros_like(dist)
    K[off] = dist[off] ** (-cfg.exponent)
    return K


def pair_weights(states, mu, cfg: FormConfig) -> np.ndarray:
    """Symmetric jump weights ``K(x,y) mu(x) mu(y)`` of the full-jump form."""
    mu = np.asarray(mu, dtype=float)
    return kernel_matrix(states, cfg) * np.outer(mu, mu)


def _values(f, states):
    if callable(f):
        S = np.asarray(states, dtype=float)
        return np.array([float(f(np.atleast_1d(s))) for s in S])
    return np.asarray(f, dtype=float)


def quadratic_form(W, u, v) -> float:
    """``sum_{x != y} W(x,y) (u(x)-u(y)) (v(x)-v(y))`` for a symmetric W with zero diagonal."""
    du = u[:, None] - u[None, :]
    dv = v[:, None] - v[None, :]
    return float(np.sum(W * (du * dv)))


def discrete_form_exact(u, v, states, mu, cfg: FormConfig) -> float:
    """The form on a finite state space with the full-jump kernel.

    ``u`` and ``v`` are value vectors on ``states`` or callables of a state.
    """
    mu = np.asarray(mu, dtype=float)
    if np.any(mu < 0) or abs(mu.sum() - 1.0) > 1e-12:
        raise ValueError("mu must be a probability vector")
    W = pair_weights(states, mu, cfg)
    return quadratic_form(W, _values(u, states), _values(v, states))


def dirichlet_test(u, measure, cfg: FormConfig, method: str = "auto") -> Estimate:
    """The form evaluated against the constant function 1.

    ``measure`` is a measure backend or a finite state space with ``states``
    and ``mu``; in the latter case ``u`` may be a value vector.
    """
    if hasattr(measure, "states") and hasattr(measure, "mu"):
        ones = np.ones(len(measure.mu))
        return Estimate(discrete_form_exact(u, ones, measure.states, measure.mu, cfg))
    return form_total(u, constant(1.0), measure, cfg, method)
