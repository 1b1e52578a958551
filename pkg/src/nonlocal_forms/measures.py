"""Probability measures on truncated sequence spaces.

Three backends are provided: independent products of named 1-d laws, a
centered Gaussian in spectral coordinates, and the lattice phi^4 Gibbs
measure.  Every backend exposes the law of one coordinate given the others
through :meth:`conditional`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special

from .stats import Estimate, batch_means_se, mean_se

ATOMS = "atoms"
DENSITY = "density"

# exp(-_LOG_CUT) = 1e-14: integration windows stop where the density drops below 1e-14 * max
_LOG_CUT = math.log(1e14)
_QUAD_OPTS = dict(epsabs=0.0, epsrel=1e-12, limit=400)


class Conditional1D:
    """A one-dimensional law: finitely many atoms, or a density on ``[lo, hi]``.

    Build instances with :meth:`atoms`, :meth:`gaussian`, :meth:`uniform` or
    :meth:`from_log_density`.  Densities keep their log-normalizer so that
    :meth:`pdf` integrates to one.
    """

    def __init__(self, kind, family, params, *, values=None, weights=None,
                 logpdf=None, lo=-math.inf, hi=math.inf, log_norm=0.0, mode=0.0):
        self.kind = kind
        self.family = family
        self.params = dict(params)
        self.values = values
        self.weights = weights
        self._logpdf = logpdf
        self.lo = lo
        self.hi = hi
        self.log_norm = log_norm
        self.mode = mode

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"Conditional1D.{self.family}({args})"

    # -- constructors ---------------------------------------------------

    @classmethod
    def atoms(cls, values, weights):
        values = np.asarray(values, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if values.ndim != 1 or values.shape != weights.shape or values.size == 0:
            raise ValueError("atoms need matching non-empty value and weight lists")
        if np.any(weights <= 0):
            raise ValueError("atom weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"atom weights sum to {weights.sum()!r}, not 1")
        if np.unique(values).size != values.size:
            raise ValueError("atom locations must be distinct")
        return cls(ATOMS, "atoms", {"values": values.tolist(), "weights": weights.tolist()},
                   values=values, weights=weights)

    @classmethod
    def gaussian(cls, mean=0.0, var=1.0):
        mean, var = float(mean), float(var)
        if not var > 0:
            raise ValueError("gaussian variance must be positive")
        sd = math.sqrt(var)
        half = sd * math.sqrt(2 * _LOG_CUT)
        return cls(
            DENSITY, "gaussian", {"mean": mean, "var": var},
            logpdf=lambda y: -0.5 * (np.asarray(y) - mean) ** 2 / var,
            lo=mean - half, hi=mean + half,
            log_norm=0.5 * math.log(2 * math.pi * var), mode=mean,
        )

    @classmethod
    def uniform(cls, a=0.0, b=1.0):
        a, b = float(a), float(b)
        if not b > a:
            raise ValueError("uniform needs a < b")
        return cls(
            DENSITY, "uniform", {"a": a, "b": b},
            logpdf=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
            lo=a, hi=b, log_norm=math.log(b - a), mode=0.5 * (a + b),
        )

    @classmethod
    def from_log_density(cls, logf: Callable, mode: float, family="gibbs", params=None):
        """Normalize ``exp(logf)`` numerically.

        The integration window grows from ``mode`` until ``logf`` has dropped
        by ``log(1e14)`` on both sides; ``logf`` must be unimodal-ish and decay.
        """
        top = float(logf(mode))
        lo = _expand(logf, mode, top, -1.0)
        hi = _expand(logf, mode, top, +1.0)
        f = lambda y: math.exp(float(logf(y)) - top)
        z, _ = integrate.quad(f, lo, hi, points=[mode], **_QUAD_OPTS)
        return cls(DENSITY, family, params or {}, logpdf=logf, lo=lo, hi=hi,
                   log_norm=top + math.log(z), mode=mode)

    # -- evaluation -----------------------------------------------------

    def pdf(self, y):
        if self.kind != DENSITY:
            raise ValueError("atomic law has no Lebesgue density")
        y = np.asarray(y, dtype=float)
        inside = (y >= self.lo) & (y <= self.hi)
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.exp(self._logpdf(y) - self.log_norm)
        return np.where(inside, out, 0.0)

    def _integrate(self, g, a=None, b=None) -> float:
        a = self.lo if a is None else max(a, self.lo)
        b = self.hi if b is None else min(b, self.hi)
        if b <= a:
            return 0.0
        pts = [self.mode] if a < self.mode < b else None
        val, _ = integrate.quad(lambda y: g(y) * float(self.pdf(y)), a, b, points=pts, **_QUAD_OPTS)
        return val

    def total_mass(self) -> float:
        if self.kind == ATOMS:
            return float(self.weights.sum())
        return self._integrate(lambda y: 1.0)

    def mean(self) -> float:
        if self.kind == ATOMS:
            return float(self.weights @ self.values)
        if self.family == "gaussian":
            return self.params["mean"]
        if self.family == "uniform":
            return 0.5 * (self.lo + self.hi)
        return self._integrate(lambda y: y)

    def var(self) -> float:
        if self.kind == ATOMS:
            m = self.mean()
            return float(self.weights @ (self.values - m) ** 2)
        if self.family == "gaussian":
            return self.params["var"]
        if self.family == "uniform":
            return (self.hi - self.lo) ** 2 / 12.0
        m = self.mean()
        return self._integrate(lambda y: (y - m) ** 2)

    def tail(self, t: float) -> float:
        """``P(|Y| > t)``."""
        if t < 0:
            raise ValueError("threshold must be non-negative")
        if math.isinf(t):
            return 0.0
        if self.kind == ATOMS:
            return float(self.weights[np.abs(self.values) > t].sum())
        if self.family == "gaussian":
            m, s = self.params["mean"], math.sqrt(self.params["var"])
            r2 = s * math.sqrt(2.0)
            return 0.5 * (special.erfc((t - m) / r2) + special.erfc((t + m) / r2))
        if self.family == "uniform":
            a, b = self.lo, self.hi
            inside = max(0.0, min(b, t) - max(a, -t))
            return 1.0 - inside / (b - a)
        return self._integrate(lambda y: 1.0, b=-t) + self._integrate(lambda y: 1.0, a=t)

    def char_fn(self, theta: float) -> complex:
        """``E exp(i theta Y)``."""
        if self.kind == ATOMS:
            return complex(np.sum(self.weights * np.exp(1j * theta * self.values)))
        if self.family == "gaussian":
            m, v = self.params["mean"], self.params["var"]
            return complex(np.exp(1j * theta * m - 0.5 * v * theta**2))
        if self.family == "uniform":
            a, b = self.lo, self.hi
            if theta == 0:
                return 1.0 + 0j
            return complex((np.exp(1j * theta * b) - np.exp(1j * theta * a)) / (1j * theta * (b - a)))
        re = self._integrate(lambda y: math.cos(theta * y))
        im = self._integrate(lambda y: math.sin(theta * y))
        return complex(re, im)

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == ATOMS:
            idx = rng.choice(self.values.size, size=size, p=self.weights)
            return self.values[idx]
        if self.family == "gaussian":
            return self.params["mean"] + math.sqrt(self.params["var"]) * rng.standard_normal(size)
        if self.family == "uniform":
            return rng.uniform(self.lo, self.hi, size)
        grid, cdf = self._inverse_cdf_table
        return np.interp(rng.random(size), cdf, grid)

    @cached_property
    def _inverse_cdf_table(self):
        # piecewise-linear inverse CDF; accurate to the grid spacing only
        grid = np.linspace(self.lo, self.hi, 8193)
        dens = self.pdf(grid)
        cdf = integrate.cumulative_trapezoid(dens, grid, initial=0.0)
        cdf /= cdf[-1]
        return grid, cdf


def _expand(logf, start, top, direction):
    step = 1.0
    while True:
        y = start + direction * step
        if float(logf(y)) < top - _LOG_CUT - 2.0:
            return y
        step *= 2.0
        if step > 1e12:
            raise ValueError("density does not decay; it cannot be normalized")


def density_bound(cond: Conditional1D, K: tuple[float, float], method: str = "sup",
                  alpha: float | None = None, grid: int = 2049) -> float:
    """Bound the conditional density on the compact interval K.

    ``method="sup"`` returns the supremum of the normalized density over K.
    ``method="integral"`` returns ``sup_{y in K} int_K |y-y'|^(1-2 alpha) mu(dy')``,
    which is infinite when ``alpha >= 1`` and the law has a density on K.
    """
    a, b = map(float, K)
    if not b > a:
        raise ValueError("K must be a non-degenerate interval")
    if method == "sup":
        if cond.kind != DENSITY:
            raise ValueError("atomic conditional law has no density; the density-bound route is unavailable")
        lo, hi = max(a, cond.lo), min(b, cond.hi)
        if hi < lo:
            return 0.0
        ys = np.linspace(lo, hi, grid)
        if lo < cond.mode < hi:
            ys = np.append(ys, cond.mode)
        vals = cond.pdf(ys)
        k = int(np.argmax(vals))
        best = float(vals[k])
        # polish the grid maximum inside its bracketing cell
        h = (hi - lo) / (grid - 1)
        left, right = max(lo, ys[k] - h), min(hi, ys[k] + h)
        if right > left:
            res = optimize.minimize_scalar(lambda y: -float(cond.pdf(y)), bounds=(left, right),
                                           method="bounded", options={"xatol": 1e-12})
            best = max(best, -float(res.fun))
        return best
    if method == "integral":
        if alpha is None:
            raise ValueError("the integral bound needs alpha")
        e = 1.0 - 2.0 * alpha
        return _integral_bound(cond, a, b, e, grid)
    raise ValueError(f"unknown method {method!r}")


def _integral_bound(cond, a, b, e, grid):
    if cond.kind == ATOMS:
        inside = (cond.values >= a) & (cond.values <= b)
        if not inside.any():
            return 0.0
        if e < 0:
            return math.inf
        ys = np.linspace(a, b, grid)
        d = np.abs(ys[:, None] - cond.values[None, inside])
        return float(np.max((d**e * cond.weights[inside]).sum(axis=1)))
    lo, hi = max(a, cond.lo), min(b, cond.hi)
    if hi <= lo:
        return 0.0
    if e <= -1:
        return math.inf
    f = lambda t: float(cond.pdf(t))

    def at(y):
        total = 0.0
        if y > lo:
            # weight (y - t)^e on [lo, y]
            total += integrate.quad(f, lo, y, weight="alg", wvar=(0.0, e))[0]
        if y < hi:
            total += integrate.quad(f, y, hi, weight="alg", wvar=(e, 0.0))[0]
        return total

    ys = np.linspace(a, b, min(grid, 257))
    return max(at(float(y)) for y in ys)


class Measure:
    """Common interface of the measure backends."""

    dim: int
    conditional_depends_on_x = True

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def conditional(self, i: int, x=None) -> Conditional1D:
        raise NotImplementedError

    def _check_index(self, i):
        if not 0 <= i < self.dim:
            raise IndexError(f"coordinate {i} out of range for dimension {self.dim}")


@dataclass(frozen=True)
class ProductMeasure(Measure):
    """Independent coordinates with the given 1-d marginals."""

    marginals: tuple

    conditional_depends_on_x = False

    def __post_init__(self):
        marginals = tuple(self.marginals)
        if not marginals:
            raise ValueError("need at least one marginal")
        if not all(isinstance(m, Conditional1D) for m in marginals):
            raise TypeError("marginals must be Conditional1D instances")
        object.__setattr__(self, "marginals", marginals)

    @property
    def dim(self):
        return len(self.marginals)

    @property
    def finite_support(self) -> bool:
        return all(m.kind == ATOMS for m in self.marginals)

    def sample(self, rng, size=None):
        n = 1 if size is None else size
        cols = [m.sample(rng, n) for m in self.marginals]
        out = np.stack(cols, axis=-1)
        return out[0] if size is None else out

    def conditional(self, i, x=None):
        self._check_index(i)
        return self.marginals[i]

    def tail_prob(self, i, t) -> Estimate:
        self._check_index(i)
        return Estimate(self.marginals[i].tail(t))

    def characteristic_fn(self, phi) -> Estimate:
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (self.dim,):
            raise ValueError("test vector has the wrong dimension")
        value = complex(np.prod([m.char_fn(t) for m, t in zip(self.marginals, phi)]))
        return Estimate(value)


@dataclass(frozen=True)
class GaussianSpectralMeasure(Measure):
    """Centered Gaussian with independent coordinates of variance ``sigma_i^2``."""

    variances: np.ndarray

    conditional_depends_on_x = False

    def __post_init__(self):
        v = np.asarray(self.variances, dtype=float)
        if v.ndim != 1 or v.size == 0 or np.any(v <= 0):
            raise ValueError("variances must be a non-empty sequence of positive numbers")
        object.__setattr__(self, "variances", v)

    @classmethod
    def from_eigen(cls, eig):
        """Preset ``sigma_i^2 = lambda_i^2``."""
        return cls(eig.lambdas**2)

    @property
    def dim(self):
        return self.variances.size

    def second_moment(self, weights) -> float:
        """``E sum beta_i X_i^2 = sum beta_i sigma_i^2``."""
        return float(np.sum(np.asarray(weights, dtype=float) * self.variances))

    def sample(self, rng, size=None):
        shape = (self.dim,) if size is None else (size, self.dim)
        return np.sqrt(self.variances) * rng.standard_normal(shape)

    def conditional(self, i, x=None):
        self._check_index(i)
        return Conditional1D.gaussian(0.0, self.variances[i])

    def tail_prob(self, i, t) -> Estimate:
        self._check_index(i)
        if t < 0:
            raise ValueError("threshold must be non-negative")
        return Estimate(float(special.erfc(t / math.sqrt(2 * self.variances[i]))))

    def tail_probs(self, thresholds) -> np.ndarray:
        """Vectorized ``P(|X_i| > t_i)`` for all coordinates."""
        t = np.asarray(thresholds, dtype=float)
        return special.erfc(t / np.sqrt(2 * self.variances))

    def characteristic_fn(self, phi) -> Estimate:
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (self.dim,):
            raise ValueError("test vector has the wrong dimension")
        return Estimate(complex(math.exp(-0.5 * float(np.sum(self.variances * phi**2)))))


def empirical_characteristic_fn(samples, phi) -> Estimate:
    """Monte Carlo ``mean exp(i <X, phi>)`` with the SE of the complex mean."""
    samples = np.asarray(samples, dtype=float)
    z = np.exp(1j * (samples @ np.asarray(phi, dtype=float)))
    se = math.sqrt((np.var(z.real, ddof=1) + np.var(z.imag, ddof=1)) / z.size)
    return Estimate(complex(z.mean()), se, exact=False, n=z.size)


FREE = "free"
PERIODIC = "periodic"


@dataclass(frozen=True)
class _ColorClass:
    sites: np.ndarray
    nbrs: np.ndarray    # padded with n_sites, which indexes an appended zero
    quad: np.ndarray    # per-site quadratic coefficient of the local energy


@dataclass(frozen=True)
class LatticePhi4Measure(Measure):
    """Gibbs measure ``exp(-S(phi)) / Z`` on ``side**d`` sites of spacing ``eps``.

    ``S = 1/2 sum_<x,y> eps^(d-2) (phi_x - phi_y)^2 + 1/2 a_eps sum eps^d phi^2
    + coupling/2 sum eps^d phi^4``.  Sites are numbered row-major; Z is never
    computed.
    """

    d: int = 1
    eps: float = 1.0
    side: int = 2
    a_eps: float = 1.0
    coupling: float = 0.0
    boundary: str = FREE

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError("d must be 1, 2 or 3")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.side < 1:
            raise ValueError("side must be at least 1")
        if self.coupling < 0:
            raise ValueError("coupling must be non-negative")
        if self.boundary not in (FREE, PERIODIC):
            raise ValueError(f"boundary must be {FREE!r} or {PERIODIC!r}")
        if self.coupling == 0 and self.a_eps <= 0:
            raise ValueError("with zero coupling the mass term a_eps must be positive")

    @property
    def dim(self):
        return self.side**self.d

    n_sites = dim

    @property
    def hop(self) -> float:
        return self.eps ** (self.d - 2)

    @property
    def vol(self) -> float:
        return self.eps**self.d

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        shape = (self.side,) * self.d
        out = []
        for s in range(self.dim):
            coord = np.unravel_index(s, shape)
            nb = set()
            for ax in range(self.d):
                for step in (-1, 1):
                    c = list(coord)
                    c[ax] += step
                    if not 0 <= c[ax] < self.side:
                        if self.boundary == FREE:
                            continue
                        c[ax] %= self.side
                    t = int(np.ravel_multi_index(c, shape))
                    if t != s:
                        nb.add(t)
            out.append(tuple(sorted(nb)))
        return tuple(out)

    @cached_property
    def bonds(self) -> np.ndarray:
        pairs = sorted({(min(s, t), max(s, t)) for s, nb in enumerate(self.neighbors) for t in nb})
        return np.array(pairs, dtype=int).reshape(-1, 2)

    @cached_property
    def color_classes(self) -> tuple[_ColorClass, ...]:
        # greedy colouring; on bipartite lattices this is the checkerboard
        colors = np.full(self.dim, -1)
        for s in range(self.dim):
            taken = {colors[t] for t in self.neighbors[s]}
            c = 0
            while c in taken:
                c += 1
            colors[s] = c
        width = max((len(nb) for nb in self.neighbors), default=0)
        classes = []
        for c in range(colors.max() + 1):
            sites = np.flatnonzero(colors == c)
            nbrs = np.full((sites.size, max(width, 1)), self.dim)
            deg = np.zeros(sites.size)
            for k, s in enumerate(sites):
                nb = self.neighbors[s]
                nbrs[k, : len(nb)] = nb
                deg[k] = len(nb)
            quad = 0.5 * (self.hop * deg + self.a_eps * self.vol)
            classes.append(_ColorClass(sites, nbrs, quad))
        return tuple(classes)

    def action(self, phi) -> float:
        phi = np.asarray(phi, dtype=float)
        if phi.shape[-1] != self.dim:
            raise ValueError(f"field has {phi.shape[-1]} sites, lattice has {self.dim}")
        diff = phi[..., self.bonds[:, 0]] - phi[..., self.bonds[:, 1]]
        kinetic = 0.5 * self.hop * np.sum(diff**2, axis=-1)
        mass = 0.5 * self.a_eps * self.vol * np.sum(phi**2, axis=-1)
        quartic = 0.5 * self.coupling * self.vol * np.sum(phi**4, axis=-1)
        return kinetic + mass + quartic

    def precision_matrix(self) -> np.ndarray:
        """``Q`` with ``S = phi^T Q phi / 2`` when the coupling vanishes."""
        n = self.dim
        Q = np.eye(n) * self.a_eps * self.vol
        for s, t in self.bonds:
            Q[s, s] += self.hop
            Q[t, t] += self.hop
            Q[s, t] -= self.hop
            Q[t, s] -= self.hop
        return Q

    def gaussian_covariance(self) -> np.ndarray:
        if self.coupling != 0:
            raise ValueError("closed-form covariance only exists at zero coupling")
        return np.linalg.inv(self.precision_matrix())

    def _site_coeffs(self, i, x):
        nb = self.neighbors[i]
        nbsum = float(np.sum(np.asarray(x, dtype=float)[list(nb)])) if nb else 0.0
        quad = 0.5 * (self.hop * len(nb) + self.a_eps * self.vol)
        lin = -self.hop * nbsum
        quart = 0.5 * self.coupling * self.vol
        return quad, lin, quart

    def conditional(self, i, x=None) -> Conditional1D:
        """Law of ``phi_i`` given the other sites of ``x``."""
        self._check_index(i)
        if x is None:
            raise ValueError("the Gibbs conditional depends on the neighbouring sites")
        quad, lin, quart = self._site_coeffs(i, x)
        if quart == 0:
            # complete the square: quad*y^2 + lin*y
            return Conditional1D.gaussian(-lin / (2 * quad), 1.0 / (2 * quad))
        roots = np.roots([4 * quart, 0.0, 2 * quad, lin])
        real = roots[np.abs(roots.imag) < 1e-9].real
        energy = lambda y: quad * y * y + lin * y + quart * y**4
        mode = float(real[np.argmin(energy(real))])
        return Conditional1D.from_log_density(
            lambda y: -energy(np.asarray(y, dtype=float)), mode,
            family="gibbs", params={"site": i, "quad": quad, "lin": lin, "quart": quart},
        )

    def sample(self, rng, size=None, burn_in=2000, thin=10):
        """State(s) of a single-site Metropolis chain after ``burn_in`` sweeps.

        Draws are approximate: they are chain states, not independent
        samples of the Gibbs law; ``thin`` sweeps separate returned states.
        """
        n = 1 if size is None else size
        res = run_chain(self, n * thin, rng, burn_in=burn_in, thin=thin)
        return res.samples[0] if size is None else res.samples

    def tail_prob(self, i, t, n_samples=20000, seed=0) -> Estimate:
        self._check_index(i)
        res = run_chain(self, n_samples, np.random.default_rng(seed), burn_in=2000)
        hits = (np.abs(res.samples[:, i]) > t).astype(float)
        mean, se = batch_means_se(hits)
        return Estimate(mean, se, exact=False, n=hits.size)

    def characteristic_fn(self, phi, n_samples=20000, seed=0) -> Estimate:
        res = run_chain(self, n_samples, np.random.default_rng(seed), burn_in=2000)
        z = np.exp(1j * (res.samples @ np.asarray(phi, dtype=float)))
        _, se_re = batch_means_se(z.real)
        _, se_im = batch_means_se(z.imag)
        return Estimate(complex(z.mean()), math.hypot(se_re, se_im), exact=False, n=z.size)


@dataclass
class SweepStats:
    accepted: int
    proposed: int

    @property
    def rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else 1.0


def mcmc_step(measure: LatticePhi4Measure, phi, rng: np.random.Generator, step: float):
    """One Metropolis sweep with Gaussian proposals of standard deviation ``step``.

    Sites are updated one colour class at a time; sites in a class share no
    bond, so each update is an exact single-site Metropolis move.  ``phi`` may
    carry leading batch axes (independent chains).  Returns the new field and
    the acceptance counts.
    """
    phi = np.array(phi, dtype=float)
    z = rng.standard_normal(phi.shape)
    u = rng.random(phi.shape)
    pad = np.zeros(phi.shape[:-1] + (1,))
    quart = 0.5 * measure.coupling * measure.vol
    accepted = 0
    for cls in measure.color_classes:
        ext = np.concatenate([phi, pad], axis=-1)
        nb = ext[..., cls.nbrs].sum(axis=-1)
        old = phi[..., cls.sites]
        new = old + step * z[..., cls.sites]
        dE = cls.quad * (new * new - old * old) - measure.hop * nb * (new - old)
        if quart:
            dE = dE + quart * (new**4 - old**4)
        with np.errstate(divide="ignore"):
            ok = np.log(u[..., cls.sites]) < -dE
        phi[..., cls.sites] = np.where(ok, new, old)
        accepted += int(ok.sum())
    return phi, SweepStats(accepted, phi.size)


def transition_log_density(measure: LatticePhi4Measure, phi, phi_new, site: int, step: float) -> float:
    """Log density of moving ``phi -> phi_new`` (differing only at ``site``) in one site update."""
    phi = np.asarray(phi, dtype=float)
    phi_new = np.asarray(phi_new, dtype=float)
    mask = np.ones(phi.size, bool)
    mask[site] = False
    if np.any(phi[mask] != phi_new[mask]):
        raise ValueError("fields differ away from the updated site")
    dx = phi_new[site] - phi[site]
    log_q = -0.5 * (dx / step) ** 2 - math.log(step * math.sqrt(2 * math.pi))
    dS = float(measure.action(phi_new) - measure.action(phi))
    return log_q + min(0.0, -dS)


@dataclass
class ChainResult:
    samples: np.ndarray
    acceptance: float
    step: float


def run_chain(measure: LatticePhi4Measure, n_sweeps: int, rng: np.random.Generator,
              burn_in: int = 1000, step: float | None = None, phi0=None, thin: int = 1,
              tune: bool = True) -> ChainResult:
    """Run Metropolis sweeps and keep every ``thin``-th state after burn-in.

    During burn-in the proposal width is tuned toward acceptance in [0.3, 0.5];
    it is frozen afterwards so the recorded chain is reversible.
    """
    phi = np.zeros(measure.dim) if phi0 is None else np.array(phi0, dtype=float)
    if step is None:
        step = 1.0 / math.sqrt(2 * max(c.quad.max() for c in measure.color_classes))
    window = SweepStats(0, 0)
    for k in range(burn_in):
        phi, st = mcmc_step(measure, phi, rng, step)
        window.accepted += st.accepted
        window.proposed += st.proposed
        if tune and (k + 1) % 25 == 0:
            if window.rate < 0.3:
                step *= 0.8
            elif window.rate > 0.5:
                step *= 1.25
            window = SweepStats(0, 0)
    kept = []
    total = SweepStats(0, 0)
    for k in range(n_sweeps):
        phi, st = mcmc_step(measure, phi, rng, step)
        total.accepted += st.accepted
        total.proposed += st.proposed
        if (k + 1) % thin == 0:
            kept.append(phi.copy())
    samples = np.array(kept) if kept else np.empty((0,) + phi.shape)
    return ChainResult(samples, total.rate, step)


def two_point_function(fields, measure: LatticePhi4Measure) -> np.ndarray:
    """``G(r) = < phi(x) phi(x + r e_1) >`` averaged over sites and samples."""
    fields = np.asarray(fields, dtype=float)
    shape = (fields.shape[0],) + (measure.side,) * measure.d
    grid = fields.reshape(shape)
    out = np.empty(measure.side)
    for r in range(measure.side):
        if measure.boundary == PERIODIC:
            shifted = np.roll(grid, -r, axis=1)
            out[r] = np.mean(grid * shifted)
        else:
            out[r] = np.mean(grid[:, : measure.side - r] * grid[:, r:])
    return out


def sample(measure: Measure, seed: int, size=None):
    """Draw from ``measure`` with a fresh generator seeded by ``seed``."""
    return measure.sample(np.random.default_rng(seed), size)
