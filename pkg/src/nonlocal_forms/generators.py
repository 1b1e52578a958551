"""Finite-state generators, their semigroups, and Metropolis quantization.

Sign convention: the semigroup is ``exp(-A t)``, so ``A`` has a
non-negative diagonal (the jump rates) and non-positive off-diagonal
entries, with ``A @ 1 = 0``.  The form and the generator are tied together
by ``E(u, v) = (A u, v)_{L^2(mu)}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .forms import FormConfig, TOY, kernel_matrix, pair_weights
from .measures import ProductMeasure

TOL = 1e-12


@dataclass(frozen=True)
class DiscreteStateSpace:
    """Distinct states (scalars or points) with strictly positive weights summing to one."""

    states: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        if states.shape[0] != mu.shape[0] or mu.ndim != 1:
            raise ValueError("need one weight per state")
        if np.any(mu <= 0):
            raise ValueError("state weights must be strictly positive")
        if abs(mu.sum() - 1.0) > TOL:
            raise ValueError(f"state weights sum to {mu.sum()!r}, not 1")
        flat = states.reshape(len(mu), -1)
        if np.unique(flat, axis=0).shape[0] != len(mu):
            raise ValueError("states must be distinct")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "mu", mu)

    def __len__(self):
        return self.mu.size

    @classmethod
    def toy(cls, p: float) -> "DiscreteStateSpace":
        """States ``(+1/2, -1/2)`` with weights ``(p, 1 - p)``."""
        return cls(np.array([0.5, -0.5]), np.array([p, 1.0 - p]))

    def inner(self, u, v) -> float:
        return float(np.sum(self.mu * np.asarray(u) * np.asarray(v)))


@dataclass(frozen=True)
class GeneratorMatrix:
    A: np.ndarray
    space: DiscreteStateSpace

    @property
    def rates(self) -> np.ndarray:
        return np.diag(self.A).copy()

    def pairing(self, u, v) -> float:
        """``(A u, v)_{L^2(mu)}``."""
        return self.space.inner(self.A @ np.asarray(u, dtype=float), v)

    def symmetry_residual(self) -> float:
        F = self.space.mu[:, None] * self.A
        return float(np.max(np.abs(F - F.T)))

    def row_sum_residual(self) -> float:
        return float(np.max(np.abs(self.A.sum(axis=1))))

    def spectrum(self) -> np.ndarray:
        """Eigenvalues of A, which is self-adjoint in ``L^2(mu)``."""
        return np.linalg.eigvalsh(_symmetrized(self))


def generator_from_weights(W, space: DiscreteStateSpace) -> GeneratorMatrix:
    """Generator of the form ``sum_{x != y} W(x,y) du dv`` for symmetric W.

    ``(A u)(x) = (2 / mu(x)) sum_y W(x,y) (u(x) - u(y))``.
    """
    W = np.array(W, dtype=float)
    np.fill_diagonal(W, 0.0)
    mu = space.mu
    A = -2.0 * W / mu[:, None]
    np.fill_diagonal(A, 2.0 * W.sum(axis=1) / mu)
    return GeneratorMatrix(A, space)


def build_generator(space: DiscreteStateSpace, cfg: FormConfig) -> GeneratorMatrix:
    """Generator of the full-jump form with kernel ``|x-y|^-exponent``.

    Entries: ``A(x,y) = -2 K(x,y) mu(y)`` off the diagonal, rows summing to zero.
    """
    return generator_from_weights(pair_weights(space.states, space.mu, cfg), space)


def product_generator(measure: ProductMeasure, cfg: FormConfig) -> GeneratorMatrix:
    """Generator on the atom grid of a finite product measure, one coordinate jumping at a time.

    This is the finite-state version of the sum of per-coordinate forms: the
    pairing ``(A u, v)_mu`` equals the exact total form.
    """
    if not measure.finite_support:
        raise ValueError("product_generator needs atoms in every marginal")
    margs = measure.marginals
    states = np.array(list(itertools.product(*[m.values for m in margs])))
    idx = np.array(list(itertools.product(*[range(m.values.size) for m in margs])))
    mu = np.prod(np.array(list(itertools.product(*[m.weights for m in margs]))), axis=1)
    mu = mu / mu.sum()
    n = len(mu)
    W = np.zeros((n, n))
    for i, m in enumerate(margs):
        K = kernel_matrix(m.values, cfg)
        # states differing only in coordinate i
        others = np.delete(idx, i, axis=1)
        same = np.all(others[:, None, :] == others[None, :, :], axis=-1)
        a = idx[:, i]
        W += np.where(same, mu[:, None] * m.weights[a][None, :] * K[a[:, None], a[None, :]], 0.0)
    return generator_from_weights(W, DiscreteStateSpace(states, mu))


def _symmetrized(gen: GeneratorMatrix) -> np.ndarray:
    d = np.sqrt(gen.space.mu)
    S = d[:, None] * gen.A / d[None, :]
    return 0.5 * (S + S.T)


def semigroup(gen: GeneratorMatrix, t: float) -> np.ndarray:
    """``exp(-A t)`` through the eigendecomposition of ``D^1/2 A D^-1/2``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return np.eye(len(gen.space))
    d = np.sqrt(gen.space.mu)
    lam, V = np.linalg.eigh(_symmetrized(gen))
    # d spans the kernel exactly; pin it so rows still sum to one when the
    # computed eigenvectors are only approximately orthogonal to it (stiff A)
    k = int(np.argmax(np.abs(V.T @ d)))
    V = np.delete(V, k, axis=1)
    lam = np.delete(lam, k)
    V = V - np.outer(d, d @ V)
    E = np.outer(d, d) + (V * np.exp(-lam * t)) @ V.T
    return E / d[:, None] * d[None, :]


def check_invariance(mu, M) -> float:
    """``max |mu M - mu|``; M must be row-stochastic."""
    mu = np.asarray(mu, dtype=float)
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] != mu.size:
        raise ValueError("M must be square and match mu")
    if np.any(M < -TOL) or np.max(np.abs(M.sum(axis=1) - 1.0)) > 1e-10:
        raise ValueError("M is not a stochastic matrix")
    return float(np.max(np.abs(mu @ M - mu)))


class ToyModel(NamedTuple):
    A: np.ndarray
    closed_form: np.ndarray
    numeric: np.ndarray


def toy_closed_form(p: float, t: float) -> np.ndarray:
    B = np.array([[1 - p, p - 1], [-p, p]])
    return np.array([[p, 1 - p], [p, 1 - p]]) + np.exp(-2.0 * t) * B


def toy_series(p: float, t: float, terms: int = 60) -> np.ndarray:
    """Partial sum of ``sum_n (-1)^n t^n 2^n B^n / n!``."""
    B = np.array([[1 - p, p - 1], [-p, p]])
    out = np.eye(2)
    term = np.eye(2)
    for n in range(1, terms):
        term = term @ B * (-2.0 * t / n)
        out = out + term
    return out


def toy_model(p: float, t: float, alpha: float = 0.5) -> ToyModel:
    """The two-point model on ``{+1/2, -1/2}``; both semigroup routes are returned."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    gen = build_generator(DiscreteStateSpace.toy(p), FormConfig(alpha=alpha, kernel_profile=TOY))
    return ToyModel(gen.A, toy_closed_form(p, t), semigroup(gen, t))


def metropolis_quantize(mu, proposal) -> np.ndarray:
    """A Markov matrix leaving ``mu`` invariant, by Metropolis acceptance.

    ``M(x,y) = proposal(x,y) * min(1, mu(y)/mu(x))`` for ``y != x``; the
    diagonal takes the remaining mass.  ``mu`` is reversible for M.
    """
    mu = np.asarray(mu, dtype=float)
    Q = np.asarray(proposal, dtype=float)
    if np.any(mu <= 0) or abs(mu.sum() - 1.0) > TOL:
        raise ValueError("mu must be a strictly positive probability vector")
    if Q.shape != (mu.size, mu.size):
        raise ValueError("proposal must be square and match mu")
    if np.any(Q < 0) or np.max(np.abs(Q.sum(axis=1) - 1.0)) > TOL:
        raise ValueError("proposal must be a stochastic matrix")
    if np.max(np.abs(Q - Q.T)) > TOL:
        raise ValueError("proposal must be symmetric")
    # mu(x) * Q(x,y) * min(1, mu(y)/mu(x)) = Q(x,y) * min(mu(x), mu(y)): symmetric by construction
    flow = Q * np.minimum(mu[:, None], mu[None, :])
    flow = 0.5 * (flow + flow.T)
    M = flow / mu[:, None]
    np.fill_diagonal(M, 0.0)
    np.fill_diagonal(M, 1.0 - M.sum(axis=1))
    return M


def uniform_proposal(n: int) -> np.ndarray:
    """Propose each other state with probability ``1/(n-1)``."""
    if n == 1:
        return np.ones((1, 1))
    Q = np.full((n, n), 1.0 / (n - 1))
    np.fill_diagonal(Q, 0.0)
    return Q
